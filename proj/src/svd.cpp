#include "lrc/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lrc {

namespace {

// One-sided Jacobi on A (m x n, m >= n): rotates column pairs of a working
// copy until all pairs are orthogonal, accumulating the rotations in V.
SvdFactors svd_tall(const Matrix& a) {
    const std::size_t m = a.rows, n = a.cols;
    Matrix u = a;
    Matrix v = Matrix::identity(n);

    const double tol = 1e-12;
    const int max_sweeps = 100;
    double off = 0.0;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        off = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    alpha += u(k, i) * u(k, i);
                    beta += u(k, j) * u(k, j);
                    gamma += u(k, i) * u(k, j);
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                if (gamma == 0.0) continue;
                double zeta = (beta - alpha) / (2.0 * gamma);
                double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (std::size_t k = 0; k < m; ++k) {
                    double ui = u(k, i), uj = u(k, j);
                    u(k, i) = c * ui - s * uj;
                    u(k, j) = s * ui + c * uj;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vi = v(k, i), vj = v(k, j);
                    v(k, i) = c * vi - s * vj;
                    v(k, j) = s * vi + c * vj;
                }
            }
        }
        converged = off <= tol;
    }
    if (!converged)
        throw NumericalFailure("svd: Jacobi sweeps did not converge", off);

    std::vector<double> sigma(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double norm = 0.0;
        for (std::size_t k = 0; k < m; ++k) norm += u(k, j) * u(k, j);
        sigma[j] = std::sqrt(norm);
        if (sigma[j] > 0.0)
            for (std::size_t k = 0; k < m; ++k) u(k, j) /= sigma[j];
    }

    // Descending order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
    SvdFactors f;
    f.u = Matrix(m, n);
    f.v = Matrix(n, n);
    f.s.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        f.s[j] = sigma[order[j]];
        for (std::size_t k = 0; k < m; ++k) f.u(k, j) = u(k, order[j]);
        for (std::size_t k = 0; k < n; ++k) f.v(k, j) = v(k, order[j]);
    }

    // Columns with sigma == 0 carry no information; replace them with a
    // deterministic orthonormal completion from canonical basis vectors.
    for (std::size_t j = 0; j < n; ++j) {
        if (f.s[j] > 0.0) continue;
        for (std::size_t cand = 0; cand < m; ++cand) {
            std::vector<double> e(m, 0.0);
            e[cand] = 1.0;
            for (std::size_t p = 0; p < n; ++p) {
                if (p == j || (f.s[p] == 0.0 && p > j)) continue;
                double proj = 0.0;
                for (std::size_t k = 0; k < m; ++k) proj += f.u(k, p) * e[k];
                for (std::size_t k = 0; k < m; ++k) e[k] -= proj * f.u(k, p);
            }
            double norm = 0.0;
            for (double x : e) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 0.5) {
                for (std::size_t k = 0; k < m; ++k) f.u(k, j) = e[k] / norm;
                break;
            }
        }
    }
    return f;
}

void apply_sign_convention(SvdFactors& f) {
    for (std::size_t j = 0; j < f.s.size(); ++j) {
        double lead = 0.0;
        for (std::size_t i = 0; i < f.u.rows; ++i) {
            if (std::abs(f.u(i, j)) > 1e-10) {
                lead = f.u(i, j);
                break;
            }
        }
        if (lead < 0.0) {
            for (std::size_t i = 0; i < f.u.rows; ++i) f.u(i, j) = -f.u(i, j);
            for (std::size_t i = 0; i < f.v.rows; ++i) f.v(i, j) = -f.v(i, j);
        }
    }
}

}  // namespace

SvdFactors svd(const Matrix& a) {
    require(a.rows >= 1 && a.cols >= 1, "svd: empty matrix");
    check_finite(a, "svd input");
    SvdFactors f;
    if (a.rows >= a.cols) {
        f = svd_tall(a);
    } else {
        SvdFactors g = svd_tall(transpose(a));
        f.u = std::move(g.v);
        f.v = std::move(g.u);
        f.s = std::move(g.s);
    }
    apply_sign_convention(f);
    return f;
}

double spectral_norm(const Matrix& a) {
    check_finite(a, "spectral_norm input");
    return svd(a).s[0];
}

}  // namespace lrc
