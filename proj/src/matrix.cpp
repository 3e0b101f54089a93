#include "lrc/matrix.hpp"

#include <cmath>
#include <string>

namespace lrc {

void check_finite(const Matrix& a, const char* what) {
    for (double x : a.v) {
        if (!std::isfinite(x))
            throw NumericalFailure(std::string(what) + ": non-finite entry", x);
    }
}

double RngState::next_gaussian() {
    double u1 = next_double_open();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    const std::size_t n = a.rows, k = a.cols, m = b.cols;
    // i-k-j order: row of C accumulated across k, ascending-k per element.
#pragma omp parallel for schedule(static) if (n * k * m > 65536)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        double* ci = c.row(static_cast<std::size_t>(i));
        const double* ai = a.row(static_cast<std::size_t>(i));
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.row(p);
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

namespace ref {
Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols == b.rows, "matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols; ++p) s += a(i, p) * b(p, j);
            c(i, j) = s;
        }
    return c;
}
}  // namespace ref

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "add: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] += b.v[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "sub: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] -= b.v[i];
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (double& x : c.v) x *= s;
    return c;
}

void add_inplace(Matrix& a, const Matrix& b, double s) {
    require(a.same_shape(b), "add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += s * b.v[i];
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double x : a.v) s += x * x;
    return std::sqrt(s);
}

double dot(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s;
}

Matrix random_gaussian(RngState& rng, std::size_t rows, std::size_t cols) {
    require(rows >= 1 && cols >= 1, "random_gaussian: empty shape");
    Matrix m(rows, cols);
    for (double& x : m.v) x = rng.next_gaussian();
    return m;
}

Matrix random_orthonormal(RngState& rng, std::size_t rows, std::size_t cols) {
    require(cols <= rows, "random_orthonormal: cols must not exceed rows");
    Matrix g = random_gaussian(rng, rows, cols);
    // Modified Gram-Schmidt over columns, two passes.
    for (std::size_t j = 0; j < cols; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double proj = 0.0;
                for (std::size_t i = 0; i < rows; ++i) proj += g(i, p) * g(i, j);
                for (std::size_t i = 0; i < rows; ++i) g(i, j) -= proj * g(i, p);
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < rows; ++i) norm += g(i, j) * g(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            // Degenerate draw; replace the column and redo it.
            for (std::size_t i = 0; i < rows; ++i) g(i, j) = rng.next_gaussian();
            --j;
            continue;
        }
        for (std::size_t i = 0; i < rows; ++i) g(i, j) /= norm;
    }
    return g;
}

}  // namespace lrc
