#include "lrc/lowrank.hpp"

#include <cmath>

namespace lrc {

std::pair<Matrix, double> truncate_rank(const SvdFactors& f, std::size_t r,
                                        const Matrix& original) {
    require(r >= 1 && r <= f.s.size(), "truncate_rank: rank out of range");
    if (r == f.s.size()) return {original, 0.0};

    const std::size_t m = f.u.rows, n = f.v.rows;
    Matrix w(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < r; ++k) s += f.u(i, k) * f.s[k] * f.v(j, k);
            w(i, j) = s;
        }
    double tail = 0.0;
    for (std::size_t k = r; k < f.s.size(); ++k) tail += f.s[k] * f.s[k];
    return {std::move(w), std::sqrt(tail)};
}

std::pair<Matrix, double> truncate_rank(const Matrix& a, std::size_t r) {
    return truncate_rank(svd(a), r, a);
}

LowRankFactors init_projections(const Matrix& teacher, std::size_t r, InitMode mode,
                                RngState& rng) {
    const std::size_t m = teacher.rows, n = teacher.cols;
    require(r >= 1 && r <= std::min(m, n), "init_projections: rank out of range");
    LowRankFactors f;
    f.rank = r;
    f.teacher_rows = m;
    f.teacher_cols = n;
    if (mode == InitMode::Svd) {
        SvdFactors d = svd(teacher);
        f.p_left = Matrix(r, m);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < m; ++j) f.p_left(i, j) = d.u(j, i);
        f.p_right = Matrix(n, r);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < r; ++j) f.p_right(i, j) = d.v(i, j);
    } else {
        f.p_left = transpose(random_orthonormal(rng, m, r));
        f.p_right = random_orthonormal(rng, n, r);
    }
    return f;
}

Matrix compose_student_weight(const LowRankFactors& f, const Matrix& teacher) {
    require(teacher.rows == f.teacher_rows && teacher.cols == f.teacher_cols,
            "compose_student_weight: teacher shape mismatch");
    require(f.p_left.cols == teacher.rows && f.p_right.rows == teacher.cols,
            "compose_student_weight: factor shape mismatch");
    return matmul(matmul(f.p_left, teacher), f.p_right);
}

std::pair<Matrix, Matrix> projection_gradients(const Matrix& grad_ws,
                                               const Matrix& teacher,
                                               const LowRankFactors& f) {
    require(grad_ws.rows == f.p_left.rows && grad_ws.cols == f.p_right.cols,
            "projection_gradients: grad shape mismatch");
    require(teacher.rows == f.teacher_rows && teacher.cols == f.teacher_cols,
            "projection_gradients: teacher shape mismatch");
    Matrix wt_pr = matmul(teacher, f.p_right);    // m x r_in
    Matrix pl_wt = matmul(f.p_left, teacher);     // r_out x n
    Matrix d_left = matmul(grad_ws, transpose(wt_pr));
    Matrix d_right = matmul(transpose(pl_wt), grad_ws);
    return {std::move(d_left), std::move(d_right)};
}

ApproxReport approximation_error_profile(const std::vector<Matrix>& teacher_weights,
                                         const std::vector<std::size_t>& ranks) {
    require(!teacher_weights.empty(), "approximation_error_profile: no layers");
    require(ranks.size() == 1 || ranks.size() == teacher_weights.size(),
            "approximation_error_profile: one rank per layer or a single shared rank");
    ApproxReport rep;
    for (std::size_t l = 0; l < teacher_weights.size(); ++l) {
        std::size_t r = ranks.size() == 1 ? ranks[0] : ranks[l];
        const Matrix& w = teacher_weights[l];
        require(r <= std::min(w.rows, w.cols),
                "approximation_error_profile: rank exceeds layer dimension");
        auto [wr, err] = truncate_rank(w, r);
        rep.per_layer.push_back(err);
        rep.ranks.push_back(r);
        rep.total += err;
    }
    return rep;
}

}  // namespace lrc
