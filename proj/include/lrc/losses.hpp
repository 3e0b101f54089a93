#ifndef LRC_LOSSES_HPP
#define LRC_LOSSES_HPP

#include <vector>

#include "lrc/matrix.hpp"
#include "lrc/model.hpp"

namespace lrc {

struct LossBreakdown {
    double kd = 0.0;
    double lm = 0.0;
    double clone = 0.0;
    double total = 0.0;
    double lambda = 1.0;
    double tau = 2.0;
};

struct KdResult {
    double loss = 0.0;
    Matrix dstudent_logits;
};

struct LmResult {
    double loss = 0.0;
    Matrix dlogits;
};

struct CloneResult {
    double loss = 0.0;
    std::vector<Matrix> dh_s, da_s;      // grads w.r.t. student activations
    std::vector<Matrix> dup_h, dup_a;    // grads w.r.t. up-projectors
};

// Forward KL D(p_t || p_s) with temperature tau applied to both logits,
// averaged over positions, scaled by tau^2 so the gradient magnitude is
// tau-invariant.
KdResult kd_loss(const Matrix& teacher_logits, const Matrix& student_logits, double tau);

// Mean token-level cross-entropy, natural log.
LmResult lm_loss(const Matrix& logits, const std::vector<int>& targets);

// sum_l (||h_t - h_s U_h^T||^2 + ||a_t - a_s U_a^T||^2) / (L * seq * d),
// with d the teacher hidden dimension. The normalization constant is
// L * seq * d, so the raw unnormalized sum is recoverable.
CloneResult clone_loss(const ActivationTrace& teacher, const ActivationTrace& student,
                       const std::vector<const Matrix*>& up_h,
                       const std::vector<const Matrix*>& up_a);
CloneResult clone_loss(const ActivationTrace& teacher, const ActivationTrace& student,
                       const StudentModel& s);

LossBreakdown total_loss(double kd, double lm, double clone, double lambda,
                         double tau = 2.0);

}  // namespace lrc

#endif
