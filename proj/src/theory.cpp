#include "lrc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace lrc {

std::string bound_report_json(const BoundReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["constants"] = r.constants;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points)
        pts.push_back({{"x", p.x}, {"measured", p.measured}, {"bound", p.bound}});
    j["points"] = pts;
    j["margin"] = r.margin;
    j["pass"] = r.pass;
    j["note"] = r.note;
    return j.dump(2) + "\n";
}

void write_bound_report(const BoundReport& r, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "write_bound_report: cannot open " + path);
    f << bound_report_json(r);
    require(f.good(), "write_bound_report: write failed for " + path);
}

// --- Lemma 1 ----------------------------------------------------------------

namespace {

// Teacher copy with every per-layer linear map replaced by its rank-r
// truncation; returns the summed truncation error.
std::pair<TeacherModel, double> truncated_teacher(const TeacherModel& t, std::size_t r) {
    TeacherModel out = t;
    double eps = 0.0;
    for (std::size_t li = 0; li < out.w.layers.size(); ++li) {
        for (Matrix* m : {&out.w.layers[li].wq, &out.w.layers[li].wk,
                          &out.w.layers[li].wv, &out.w.layers[li].wo,
                          &out.w.layers[li].w1, &out.w.layers[li].w2}) {
            auto [wr, err] = truncate_rank(*m, r);
            *m = std::move(wr);
            eps += err;
        }
    }
    return {std::move(out), eps};
}

bool is_projection_param(const std::string& name) {
    return name.find("p_left") != std::string::npos ||
           name.find("p_right") != std::string::npos || name == "p_emb" ||
           name == "p_pos" || name == "p_head";
}

}  // namespace

std::pair<double, double> lemma1_deviation(const StudentModel& s,
                                           const TeacherModel& teacher,
                                           const Batch& batch, std::size_t r,
                                           const DistillSettings& settings) {
    auto [trunc, eps] = truncated_teacher(teacher, r);
    StepResult exact = distill_loss_and_grads(s, teacher, batch, settings);
    StepResult approx =
        distill_loss_and_grads_split(s, trunc, teacher, batch, settings);
    auto refs = student_param_refs(s);
    double dev_sq = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (!is_projection_param(refs[i].first)) continue;
        Matrix d = sub(exact.grads[i], approx.grads[i]);
        dev_sq += dot(d, d);
    }
    return {eps, std::sqrt(dev_sq)};
}

// --- Theorem 1 ----------------------------------------------------------------

double convergence_bound(double smoothness, double delta0, double sigma_sq,
                         std::size_t steps, double eps, double c) {
    require(smoothness >= 0.0 && delta0 >= 0.0 && sigma_sq >= 0.0 && eps >= 0.0 &&
                c >= 0.0,
            "convergence_bound: inputs must be non-negative");
    require(steps >= 1, "convergence_bound: steps must be >= 1");
    const double t = static_cast<double>(steps);
    return 2.0 * smoothness * delta0 / t + sigma_sq / t + c * eps * eps / std::sqrt(t);
}

BoundReport verify_convergence(const TrainTrace& trace, const ConstantEstimates& consts,
                               double c, const ConvergenceCheck& check) {
    require(trace.records.size() >= 100,
            "verify_convergence: insufficient data, need at least 100 steps");
    BoundReport rep;
    rep.name = "theorem1_convergence";
    rep.constants["smoothness"] = consts.smoothness;
    rep.constants["sigma_sq"] = consts.grad_variance;
    rep.constants["epsilon"] = consts.approx_error;
    rep.constants["delta0"] = consts.delta0;
    rep.constants["c"] = c;

    std::size_t total = 0, held = 0;
    double margin = 1e300;
    std::vector<double> log_t, log_mean;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const std::size_t prefix = i + 1;
        const double measured = trace.records[i].running_mean_grad_sq;
        const double bound = convergence_bound(consts.smoothness, consts.delta0,
                                               consts.grad_variance, prefix,
                                               consts.approx_error, c);
        rep.points.push_back({static_cast<double>(prefix), measured, bound});
        if (measured > 0.0) {
            log_t.push_back(std::log(static_cast<double>(prefix)));
            log_mean.push_back(std::log(measured));
        }
        if (prefix >= check.min_prefix) {
            ++total;
            if (measured <= bound + check.tolerance) ++held;
            margin = std::min(margin, bound - measured);
        }
    }
    rep.constants["loglog_slope"] =
        log_t.size() >= 2 ? least_squares(log_t, log_mean).slope : 0.0;
    rep.constants["fraction_held"] =
        total > 0 ? static_cast<double>(held) / static_cast<double>(total) : 0.0;
    rep.margin = margin;
    rep.pass = total > 0 && rep.constants["fraction_held"] >= check.required_fraction;
    return rep;
}

// --- Theorem 2 ----------------------------------------------------------------

double covering_number_log(std::size_t r, std::size_t m, std::size_t n_dim, double b,
                           double eps) {
    require(b > 0.0 && eps > 0.0, "covering_number_log: B and eps must be positive");
    require(eps <= 3.0 * b, "covering_number_log: eps must not exceed 3B");
    return static_cast<double>(r) * static_cast<double>(m + n_dim + 1) *
           std::log(3.0 * b / eps);
}

double generalization_bound(std::size_t r, std::size_t m, std::size_t n_dim,
                            std::size_t n_samples, double delta, double k1, double k2) {
    require(delta > 0.0 && delta <= 1.0, "generalization_bound: delta must be in (0, 1]");
    require(n_samples >= 2, "generalization_bound: need at least 2 samples");
    const double n = static_cast<double>(n_samples);
    return k1 * static_cast<double>(r) * static_cast<double>(m + n_dim) * std::log(n) /
               std::sqrt(n) +
           k2 * std::sqrt(std::log(1.0 / delta) / n);
}

double measure_generalization_gap(const StudentModel& s, const TeacherModel& teacher,
                                  const Corpus& train_part, const Corpus& heldout,
                                  std::size_t seq_len) {
    double train_loss = eval_lm_loss_student(s, teacher, train_part, seq_len);
    double held_loss = eval_lm_loss_student(s, teacher, heldout, seq_len);
    return held_loss - train_loss;
}

// --- Theorem 3 ----------------------------------------------------------------

double gaussian_mi(double rho, std::size_t d) {
    require(std::abs(rho) < 1.0, "gaussian_mi: |rho| must be < 1");
    require(d >= 1, "gaussian_mi: d must be >= 1");
    return -0.5 * static_cast<double>(d) * std::log(1.0 - rho * rho);
}

double clone_loss_from_correlation(double sigma_sq, double rho, std::size_t d) {
    require(sigma_sq > 0.0, "clone_loss_from_correlation: sigma^2 must be positive");
    return 2.0 * static_cast<double>(d) * sigma_sq * (1.0 - rho);
}

double mi_lower_bound(double clone_loss_value, std::size_t d, double constant) {
    require(d >= 1, "mi_lower_bound: d must be >= 1");
    return std::log(static_cast<double>(d)) -
           0.5 * static_cast<double>(d) * clone_loss_value + constant;
}

double calibrate_mi_const(std::size_t d, const std::vector<double>& rho_grid) {
    require(!rho_grid.empty(), "calibrate_mi_const: empty grid");
    double best = 1e300;
    for (double rho : rho_grid) {
        double clone = clone_loss_from_correlation(1.0, rho, d);
        double uncal = mi_lower_bound(clone, d, 0.0);
        best = std::min(best, gaussian_mi(rho, d) - uncal);
    }
    return best;
}

// --- KSG estimator -------------------------------------------------------------

namespace {

double digamma(double x) {
    double r = 0.0;
    while (x < 6.0) {
        r -= 1.0 / x;
        x += 1.0;
    }
    const double f = 1.0 / (x * x);
    return r + std::log(x) - 0.5 / x -
           f * (1.0 / 12.0 - f * (1.0 / 120.0 - f * (1.0 / 252.0 - f / 240.0)));
}

double cheb_dist(const double* a, const double* b, std::size_t dim) {
    double m = 0.0;
    for (std::size_t i = 0; i < dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Static kd-tree over row-points with Chebyshev metric; supports k-NN
// distance and strict range counting. Read-only after build, safe to query
// from parallel loops.
class KdTree {
public:
    KdTree(const Matrix& pts) : pts_(pts), dim_(pts.cols) {
        idx_.resize(pts_.rows);
        std::iota(idx_.begin(), idx_.end(), 0);
        root_ = build(0, idx_.size());
    }

    // Distance to the k-th nearest neighbor of point qi, excluding qi itself.
    double knn_dist(std::size_t qi, std::size_t k) const {
        std::vector<double> best(k, 1e300);
        knn_rec(root_, pts_.row(qi), qi, best);
        return best[k - 1];
    }

    // Number of points j != qi with dist(j, qi) < eps.
    std::size_t count_within(std::size_t qi, double eps) const {
        if (eps <= 0.0) return 0;
        std::size_t c = count_rec(root_, pts_.row(qi), eps);
        return c - 1;  // self distance 0 is always inside
    }

private:
    struct Node {
        int left = -1, right = -1;
        std::size_t begin = 0, end = 0;
        std::vector<double> lo, hi;
    };
    static constexpr std::size_t kLeaf = 16;

    int build(std::size_t begin, std::size_t end) {
        Node node;
        node.begin = begin;
        node.end = end;
        node.lo.assign(dim_, 1e300);
        node.hi.assign(dim_, -1e300);
        for (std::size_t i = begin; i < end; ++i) {
            const double* p = pts_.row(idx_[i]);
            for (std::size_t d = 0; d < dim_; ++d) {
                node.lo[d] = std::min(node.lo[d], p[d]);
                node.hi[d] = std::max(node.hi[d], p[d]);
            }
        }
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(node));
        if (end - begin > kLeaf) {
            // Split the widest dimension at its median.
            std::size_t sd = 0;
            double width = -1.0;
            for (std::size_t d = 0; d < dim_; ++d) {
                double w = nodes_[id].hi[d] - nodes_[id].lo[d];
                if (w > width) {
                    width = w;
                    sd = d;
                }
            }
            if (width > 0.0) {
                std::size_t mid = (begin + end) / 2;
                std::nth_element(idx_.begin() + begin, idx_.begin() + mid,
                                 idx_.begin() + end,
                                 [&](std::size_t a, std::size_t b) {
                                     return pts_(a, sd) < pts_(b, sd);
                                 });
                int l = build(begin, mid);
                int r = build(mid, end);
                nodes_[id].left = l;
                nodes_[id].right = r;
            }
        }
        return id;
    }

    double box_dist(const Node& n, const double* q) const {
        double m = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            double below = n.lo[d] - q[d];
            double above = q[d] - n.hi[d];
            m = std::max(m, std::max(below, above));
        }
        return std::max(m, 0.0);
    }

    double box_far(const Node& n, const double* q) const {
        double m = 0.0;
        for (std::size_t d = 0; d < dim_; ++d)
            m = std::max(m, std::max(std::abs(q[d] - n.lo[d]),
                                     std::abs(q[d] - n.hi[d])));
        return m;
    }

    void knn_rec(int id, const double* q, std::size_t skip,
                 std::vector<double>& best) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (box_dist(n, q) >= best.back()) return;
        if (n.left < 0) {
            for (std::size_t i = n.begin; i < n.end; ++i) {
                if (idx_[i] == skip) continue;
                double d = cheb_dist(q, pts_.row(idx_[i]), dim_);
                if (d < best.back()) {
                    // Insertion into the small sorted buffer.
                    std::size_t pos = best.size() - 1;
                    while (pos > 0 && best[pos - 1] > d) {
                        best[pos] = best[pos - 1];
                        --pos;
                    }
                    best[pos] = d;
                }
            }
            return;
        }
        double dl = box_dist(nodes_[static_cast<std::size_t>(n.left)], q);
        double dr = box_dist(nodes_[static_cast<std::size_t>(n.right)], q);
        if (dl <= dr) {
            knn_rec(n.left, q, skip, best);
            knn_rec(n.right, q, skip, best);
        } else {
            knn_rec(n.right, q, skip, best);
            knn_rec(n.left, q, skip, best);
        }
    }

    std::size_t count_rec(int id, const double* q, double eps) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (box_dist(n, q) >= eps) return 0;
        if (box_far(n, q) < eps) return n.end - n.begin;
        if (n.left < 0) {
            std::size_t c = 0;
            for (std::size_t i = n.begin; i < n.end; ++i)
                if (cheb_dist(q, pts_.row(idx_[i]), dim_) < eps) ++c;
            return c;
        }
        return count_rec(n.left, q, eps) + count_rec(n.right, q, eps);
    }

    const Matrix& pts_;
    std::size_t dim_;
    std::vector<std::size_t> idx_;
    std::vector<Node> nodes_;
    int root_;
};

// Strict-window counting over a single sorted coordinate.
class SortedCounter {
public:
    explicit SortedCounter(const Matrix& col) : vals_(col.v) {
        std::sort(vals_.begin(), vals_.end());
    }
    std::size_t count_within(double x, double eps) const {
        if (eps <= 0.0) return 0;
        auto lo = std::upper_bound(vals_.begin(), vals_.end(), x - eps);
        auto hi = std::lower_bound(vals_.begin(), vals_.end(), x + eps);
        return static_cast<std::size_t>(hi - lo) - 1;  // exclude self
    }

private:
    std::vector<double> vals_;
};

}  // namespace

double estimate_mi_knn(const Matrix& samples_t, const Matrix& samples_s,
                       std::size_t k) {
    require(samples_t.rows == samples_s.rows, "estimate_mi_knn: sample count mismatch");
    require(samples_t.rows >= 100, "estimate_mi_knn: need at least 100 samples");
    require(k >= 3 && k <= 10, "estimate_mi_knn: k must lie in [3, 10]");
    const std::size_t n = samples_t.rows;
    const std::size_t dt = samples_t.cols, ds = samples_s.cols;

    Matrix joint(n, dt + ds);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dt; ++j) joint(i, j) = samples_t(i, j);
        for (std::size_t j = 0; j < ds; ++j) joint(i, dt + j) = samples_s(i, j);
    }
    KdTree joint_tree(joint);

    std::vector<double> eps(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        eps[static_cast<std::size_t>(i)] =
            joint_tree.knn_dist(static_cast<std::size_t>(i), k);

    std::size_t degenerate = 0;
    for (double e : eps)
        if (e == 0.0) ++degenerate;
    if (degenerate > n / 2)
        throw NumericalFailure("estimate_mi_knn: degenerate (duplicated) samples",
                               static_cast<double>(degenerate));

    std::vector<std::size_t> nx(n), ny(n);
    if (dt == 1 && ds == 1) {
        SortedCounter cx(samples_t), cy(samples_s);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            nx[i] = cx.count_within(samples_t(i, 0), eps[i]);
            ny[i] = cy.count_within(samples_s(i, 0), eps[i]);
        }
    } else {
        KdTree tx(samples_t), ty(samples_s);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            nx[i] = tx.count_within(i, eps[i]);
            ny[i] = ty.count_within(i, eps[i]);
        }
    }

    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        avg += digamma(static_cast<double>(nx[i] + 1)) +
               digamma(static_cast<double>(ny[i] + 1));
    avg /= static_cast<double>(n);
    return digamma(static_cast<double>(k)) + digamma(static_cast<double>(n)) - avg;
}

std::pair<Matrix, Matrix> sample_correlated_gaussians(double rho, double sigma_sq,
                                                      std::size_t d, std::size_t n,
                                                      RngState& rng) {
    require(std::abs(rho) <= 1.0, "sample_correlated_gaussians: |rho| must be <= 1");
    require(sigma_sq > 0.0, "sample_correlated_gaussians: sigma^2 must be positive");
    const double sigma = std::sqrt(sigma_sq);
    const double resid = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    Matrix x(n, d), y(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double g1 = rng.next_gaussian();
            double g2 = rng.next_gaussian();
            x(i, j) = sigma * g1;
            y(i, j) = sigma * (rho * g1 + resid * g2);
        }
    return {std::move(x), std::move(y)};
}

Matrix project_top_pcs(const Matrix& samples, std::size_t k) {
    require(k >= 1 && k <= samples.cols, "project_top_pcs: k out of range");
    Matrix centered = samples;
    for (std::size_t j = 0; j < centered.cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < centered.rows; ++i) mean += centered(i, j);
        mean /= static_cast<double>(centered.rows);
        for (std::size_t i = 0; i < centered.rows; ++i) centered(i, j) -= mean;
    }
    SvdFactors f = svd(centered);
    Matrix vk(centered.cols, k);
    for (std::size_t i = 0; i < centered.cols; ++i)
        for (std::size_t j = 0; j < k; ++j) vk(i, j) = f.v(i, j);
    return matmul(centered, vk);
}

// --- Corollary 1 ----------------------------------------------------------------

double optimal_rank(double c1, double c2, double n_samples) {
    require(c1 > 0.0 && c2 > 0.0 && n_samples > 0.0,
            "optimal_rank: inputs must be positive");
    return std::sqrt(c1 * n_samples / c2);
}

RankFit fit_rank_law(const std::vector<std::pair<double, double>>& sweep) {
    std::vector<double> ns;
    for (const auto& [n, r] : sweep) {
        require(r > 0.0 && n > 0.0, "fit_rank_law: non-positive point");
        if (std::find(ns.begin(), ns.end(), n) == ns.end()) ns.push_back(n);
    }
    require(ns.size() >= 4, "fit_rank_law: need at least 4 distinct n values");
    std::vector<double> lx, ly;
    RankFit fit;
    for (const auto& [n, r] : sweep) {
        lx.push_back(std::log(n));
        ly.push_back(std::log(r));
        fit.n_values.push_back(n);
        fit.best_ranks.push_back(r);
    }
    LinearFit ls = least_squares(lx, ly);
    fit.slope = ls.slope;
    fit.intercept = ls.intercept;
    fit.correlation = ls.correlation;
    fit.c2 = 1.0;
    fit.c1 = std::exp(2.0 * ls.intercept);
    return fit;
}

// --- statistics helpers ---------------------------------------------------------

LinearFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size() && xs.size() >= 2, "least_squares: need >= 2 points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.correlation = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    return f;
}

namespace {
std::vector<double> ranks_of(const std::vector<double>& xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> r(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average tied ranks
        for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
        i = j + 1;
    }
    return r;
}
}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size() && xs.size() >= 2, "spearman: need >= 2 points");
    return least_squares(ranks_of(xs), ranks_of(ys)).correlation;
}

}  // namespace lrc
