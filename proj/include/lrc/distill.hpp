#ifndef LRC_DISTILL_HPP
#define LRC_DISTILL_HPP

#include <functional>
#include <vector>

#include "lrc/data.hpp"
#include "lrc/losses.hpp"
#include "lrc/model.hpp"

namespace lrc {

// Objective configuration: the Eq.-2 mixture with per-term switches for the
// ablation runs. Disabled terms are still measured, they just contribute no
// gradient and no weight in `total`.
struct DistillSettings {
    double lambda = 1.0;
    double tau = 2.0;
    bool use_kd = true;
    bool use_lm = true;
    bool use_clone = true;
};

struct StepResult {
    LossBreakdown loss;              // averaged over the batch
    std::vector<Matrix> grads;       // aligned with student_param_refs
};

// Loss and gradients of the distillation objective on one batch; teacher
// frozen. Gradients cover every trainable student parameter including
// up-projectors (which receive gradient only from the clone term).
StepResult distill_loss_and_grads(const StudentModel& s, const TeacherModel& teacher,
                                  const Batch& batch, const DistillSettings& cfg);

// Same objective with the composition input decoupled from the distillation
// target: student weights compose against `compose_teacher` while the KD and
// clone targets come from `target_teacher`. The Lemma-1 deviation measures
// the gradient gap between compose_teacher = exact and = rank-r truncated.
StepResult distill_loss_and_grads_split(const StudentModel& s,
                                        const TeacherModel& compose_teacher,
                                        const TeacherModel& target_teacher,
                                        const Batch& batch, const DistillSettings& cfg);

// Loss only (used by finite differences and evaluation).
LossBreakdown distill_loss(const StudentModel& s, const TeacherModel& teacher,
                           const Batch& batch, const DistillSettings& cfg);

struct TeacherStepResult {
    double loss = 0.0;
    std::vector<Matrix> grads;  // aligned with teacher_param_refs
};

// Plain language-modeling objective for training the teacher itself.
TeacherStepResult teacher_loss_and_grads(const TeacherModel& t, const Batch& batch);
double teacher_loss(const TeacherModel& t, const Batch& batch);

// Mean LM loss of a model over non-overlapping windows of a corpus;
// deterministic full walk, the validation metric everywhere.
double eval_lm_loss_student(const StudentModel& s, const TeacherModel& teacher,
                            const Corpus& c, std::size_t seq_len);
double eval_lm_loss_teacher(const TeacherModel& t, const Corpus& c, std::size_t seq_len);

// Max over all student parameters of
// |analytic - central_difference| / max(1, |central_difference|)
// for the full distillation objective on `batch`.
double grad_check(StudentModel& s, const TeacherModel& teacher, const Batch& batch,
                  double h, const DistillSettings& cfg = {});

}  // namespace lrc

#endif
