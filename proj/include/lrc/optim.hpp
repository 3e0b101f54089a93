#ifndef LRC_OPTIM_HPP
#define LRC_OPTIM_HPP

#include <functional>
#include <string>
#include <vector>

#include "lrc/data.hpp"
#include "lrc/distill.hpp"
#include "lrc/model.hpp"

namespace lrc {

enum class OptimKind { Sgd, Adam };
enum class LrSchedule { Constant, Cosine };

struct SgdConfig {
    double lr = 0.0;          // ignored when lr_auto
    bool lr_auto = true;      // resolve lr = 1 / L_hat once before training
    std::size_t steps = 500;
    std::size_t batch_size = 8;
    std::size_t seq_len = 64;
    std::uint64_t seed = 1;
    DistillSettings objective;
    OptimKind optimizer = OptimKind::Sgd;      // bound verification forces Sgd
    LrSchedule schedule = LrSchedule::Constant;
    std::size_t val_every = 25;
    bool full_batch = false;       // deterministic full-pool batch every step
    bool full_grad_trace = false;  // record the full-pool gradient norm
};

struct TrainRecord {
    std::size_t step = 0;
    LossBreakdown loss;
    double grad_sq_norm = 0.0;
    double running_mean_grad_sq = 0.0;
    double val_loss = 0.0;
    bool has_val = false;
};

struct TrainTrace {
    std::vector<TrainRecord> records;
    double resolved_lr = 0.0;
    double initial_loss = 0.0;  // objective at theta_0 on the first batch
    double best_loss = 0.0;     // smallest observed objective value
    double final_val_loss = 0.0;
};

struct ConstantEstimates {
    double smoothness = 0.0;     // L_hat
    double grad_variance = 0.0;  // sigma^2_hat
    double approx_error = 0.0;   // epsilon from the rank truncation profile
    double delta0 = 0.0;         // L(theta_0) - best observed loss
};

// Scalar objective over a flat parameter vector returning loss and filling
// the gradient. Shared by the estimators, the controlled quadratic runs and
// the model-backed objectives.
using GradOracle =
    std::function<double(const std::vector<double>&, std::vector<double>&)>;

// L_hat = max over probe pairs of ||g(theta + delta) - g(theta)|| / ||delta||
// with ||delta|| alternating between 1e-3 and 1e-2.
double estimate_smoothness_core(const GradOracle& oracle,
                                const std::vector<double>& theta0,
                                std::size_t num_probes, RngState& rng);

// Flat view of the student objective on a fixed probe batch.
GradOracle student_oracle(StudentModel& s, const TeacherModel& teacher,
                          const Batch& probe, const DistillSettings& settings);

double estimate_smoothness(StudentModel& s, const TeacherModel& teacher,
                           const Batch& probe, const DistillSettings& settings,
                           std::size_t num_probes, RngState& rng);

// sigma^2_hat = mean over sampled mini-batches of ||g(theta, xi) - g_full||^2
// at fixed theta. The dataset is the corpus's non-overlapping window pool;
// batches sample windows uniformly from that pool.
double estimate_grad_variance(const StudentModel& s, const TeacherModel& teacher,
                              const Corpus& corpus, std::size_t seq_len,
                              std::size_t batch_size, std::size_t num_batches,
                              const DistillSettings& settings, RngState& rng);

// theta <- theta - lr * grad, elementwise across parameter groups.
void sgd_step(std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
              double lr);

struct AdamState {
    std::vector<Matrix> m, v;
    std::size_t t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    void init(const std::vector<Matrix*>& params);
    void step(std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
              double lr);
};

// Distills `s` against the frozen teacher; corpus is split 90/10 and the
// heldout tail provides the periodic validation loss. Aborts with
// NumericalFailure when the loss exceeds 1e6 or goes non-finite.
TrainTrace train(StudentModel& s, const TeacherModel& teacher, const Corpus& corpus,
                 const SgdConfig& cfg);

// Language-model-only training of the teacher itself.
TrainTrace train_teacher(TeacherModel& t, const Corpus& corpus, const SgdConfig& cfg);

// Plain SGD on a flat objective with exact gradients; used by the controlled
// convergence checks. Loss is recorded in the lm field.
TrainTrace train_flat(const GradOracle& oracle, std::vector<double> theta,
                      std::size_t steps, double lr);

// CSV schema: step,kd,lm,clone,total,grad_sq_norm,running_mean_grad_sq,val_loss
// (val_loss empty when not measured).
void write_trace_csv(const TrainTrace& trace, const std::string& path);
TrainTrace read_trace_csv(const std::string& path);

}  // namespace lrc

#endif
