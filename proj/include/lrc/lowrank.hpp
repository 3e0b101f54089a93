#ifndef LRC_LOWRANK_HPP
#define LRC_LOWRANK_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "lrc/matrix.hpp"
#include "lrc/svd.hpp"

namespace lrc {

// Factored student parameterization of one teacher weight W_t (m x n):
// the composed student weight is p_left * W_t * p_right, shape r x r
// (rectangular variants allowed: p_left r_out x m, p_right n x r_in).
struct LowRankFactors {
    Matrix p_left;   // r_out x m
    Matrix p_right;  // n x r_in
    std::size_t rank = 0;
    std::size_t teacher_rows = 0;
    std::size_t teacher_cols = 0;
};

enum class InitMode { Svd, RandomOrthonormal };

// Per-layer truncation errors for a rank choice.
struct ApproxReport {
    std::vector<double> per_layer;  // epsilon_l = || W_l - W_l^r ||_F
    std::vector<std::size_t> ranks;
    double total = 0.0;  // sum of per-layer errors
};

// Best rank-r approximation and its Frobenius error (tail singular norm).
// r == min(m, n) returns the input matrix itself with error exactly 0.
std::pair<Matrix, double> truncate_rank(const SvdFactors& f, std::size_t r,
                                        const Matrix& original);
std::pair<Matrix, double> truncate_rank(const Matrix& a, std::size_t r);

// Svd mode: p_left = U_r^T, p_right = V_r, so the composed weight starts as
// diag(S_1..r), the optimal rank-r compression of the teacher. Random mode:
// both factors orthonormal.
LowRankFactors init_projections(const Matrix& teacher, std::size_t r, InitMode mode,
                                RngState& rng);

// p_left * W_t * p_right.
Matrix compose_student_weight(const LowRankFactors& f, const Matrix& teacher);

// Chain rule through the composition:
//   dL/dp_left  = grad_ws * (W_t * p_right)^T
//   dL/dp_right = (p_left * W_t)^T * grad_ws
std::pair<Matrix, Matrix> projection_gradients(const Matrix& grad_ws,
                                               const Matrix& teacher,
                                               const LowRankFactors& f);

// One rank per layer, or a single shared rank broadcast to every layer.
ApproxReport approximation_error_profile(const std::vector<Matrix>& teacher_weights,
                                         const std::vector<std::size_t>& ranks);

}  // namespace lrc

#endif
