#ifndef LRC_THEORY_HPP
#define LRC_THEORY_HPP

#include <map>
#include <string>
#include <vector>

#include "lrc/distill.hpp"
#include "lrc/matrix.hpp"
#include "lrc/model.hpp"
#include "lrc/optim.hpp"

namespace lrc {

// Evaluated bound vs measured quantity. `margin` is the minimum of
// bound - measured over the points; pass semantics are set by the check
// that produced the report.
struct BoundReport {
    std::string name;
    std::map<std::string, double> constants;
    struct Point {
        double x = 0.0;  // sweep coordinate (rank, prefix T, rho, ...)
        double measured = 0.0;
        double bound = 0.0;
    };
    std::vector<Point> points;
    double margin = 0.0;
    bool pass = false;
    std::string note;
};

std::string bound_report_json(const BoundReport& r);
void write_bound_report(const BoundReport& r, const std::string& path);

// --- Lemma 1 ------------------------------------------------------------

// Gradient deviation when the student composes against the rank-r truncation
// of every per-layer linear map instead of the exact teacher. The loss keeps
// the exact teacher as its target; only the composition input changes.
// Returns (epsilon, deviation) where epsilon sums the truncation errors and
// the deviation is the Frobenius norm across all projection-parameter
// gradients.
std::pair<double, double> lemma1_deviation(const StudentModel& s,
                                           const TeacherModel& teacher,
                                           const Batch& batch, std::size_t r,
                                           const DistillSettings& settings = {});

// --- Theorem 1 ------------------------------------------------------------

// 2 L delta0 / T + sigma^2 / T + c eps^2 / sqrt(T).
double convergence_bound(double smoothness, double delta0, double sigma_sq,
                         std::size_t steps, double eps, double c);

struct ConvergenceCheck {
    std::size_t min_prefix = 1;    // first prefix T included in the pass rate
    double required_fraction = 1.0;
    double tolerance = 0.0;        // absolute slack on bound - measured
};

// Checks the running mean of the squared gradient norm against the bound at
// every prefix; also reports the fitted log-log slope of the running mean.
BoundReport verify_convergence(const TrainTrace& trace, const ConstantEstimates& consts,
                               double c, const ConvergenceCheck& check);

// --- Theorem 2 ------------------------------------------------------------

// r (m + n_dim + 1) * log(3 B / eps); the log of the covering number bound.
double covering_number_log(std::size_t r, std::size_t m, std::size_t n_dim, double b,
                           double eps);

// k1 r (m + n_dim) log(n_samples) / sqrt(n_samples)
//   + k2 sqrt(log(1/delta) / n_samples).
double generalization_bound(std::size_t r, std::size_t m, std::size_t n_dim,
                            std::size_t n_samples, double delta, double k1, double k2);

// Held-out minus training mean LM loss, same tokenization and windowing.
double measure_generalization_gap(const StudentModel& s, const TeacherModel& teacher,
                                  const Corpus& train_part, const Corpus& heldout,
                                  std::size_t seq_len);

// --- Theorem 3 ------------------------------------------------------------

// -(d/2) log(1 - rho^2).
double gaussian_mi(double rho, std::size_t d);

// 2 d sigma^2 (1 - rho).
double clone_loss_from_correlation(double sigma_sq, double rho, std::size_t d);

// log d - (d/2) clone + const.
double mi_lower_bound(double clone_loss_value, std::size_t d, double constant);

// Largest constant for which the bound stays below the Gaussian closed form
// across the rho grid at sigma^2 = 1 (tight at the worst grid point).
double calibrate_mi_const(std::size_t d, const std::vector<double>& rho_grid);

// KSG estimator (variant 1): digamma terms over max-norm neighbor counts.
// Rows of samples_t / samples_s are paired draws.
double estimate_mi_knn(const Matrix& samples_t, const Matrix& samples_s, std::size_t k);

// Paired draws from the isotropic Gaussian model with per-dimension
// correlation rho and shared variance sigma^2.
std::pair<Matrix, Matrix> sample_correlated_gaussians(double rho, double sigma_sq,
                                                      std::size_t d, std::size_t n,
                                                      RngState& rng);

// Scores on the top-k principal components of the (centered) rows.
Matrix project_top_pcs(const Matrix& samples, std::size_t k);

// --- Corollary 1 ----------------------------------------------------------

// sqrt(c1 n / c2), the stationary point of c1/r + c2 r / n.
double optimal_rank(double c1, double c2, double n_samples);

struct RankFit {
    double c1 = 0.0, c2 = 0.0;       // implied up to the shared scale, c2 = 1
    double slope = 0.0;              // d log r* / d log n
    double intercept = 0.0;
    double correlation = 0.0;        // of the log-log fit
    std::vector<double> n_values;
    std::vector<double> best_ranks;
};

// Least-squares fit of log r* = a + b log n over >= 4 distinct n values.
RankFit fit_rank_law(const std::vector<std::pair<double, double>>& sweep);

// --- small statistics helpers ---------------------------------------------

double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct LinearFit {
    double slope = 0.0, intercept = 0.0, correlation = 0.0;
};
LinearFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace lrc

#endif
