#include "lrc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lrc {

namespace {

std::vector<double> flatten(const std::vector<Matrix*>& refs) {
    std::vector<double> out;
    for (const Matrix* m : refs) out.insert(out.end(), m->v.begin(), m->v.end());
    return out;
}

void scatter(const std::vector<double>& theta, const std::vector<Matrix*>& refs) {
    std::size_t off = 0;
    for (Matrix* m : refs) {
        std::copy(theta.begin() + static_cast<std::ptrdiff_t>(off),
                  theta.begin() + static_cast<std::ptrdiff_t>(off + m->v.size()),
                  m->v.begin());
        off += m->v.size();
    }
}

double grad_sq_norm_of(const std::vector<Matrix>& grads) {
    double s = 0.0;
    for (const Matrix& g : grads) s += dot(g, g);
    return s;
}

}  // namespace

double estimate_smoothness_core(const GradOracle& oracle,
                                const std::vector<double>& theta0,
                                std::size_t num_probes, RngState& rng) {
    require(num_probes >= 10, "estimate_smoothness: need at least 10 probes");
    const std::size_t n = theta0.size();
    std::vector<double> g0(n), g1(n), dir(n), theta(n);
    oracle(theta0, g0);

    auto randomize_dir = [&]() {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dir[i] = rng.next_gaussian();
            norm += dir[i] * dir[i];
        }
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) dir[i] /= norm;
    };

    // Each probe is a pair (theta0, theta0 + delta). Directions follow the
    // observed gradient difference (power iteration on the local Hessian), so
    // the max ratio approaches the spectral norm instead of the much smaller
    // random-direction average.
    double best = 0.0;
    const std::size_t half = num_probes / 2;
    for (std::size_t p = 0; p < num_probes; ++p) {
        const double scale = (p < half) ? 1e-3 : 1e-2;
        if (p == 0 || p == half) randomize_dir();
        for (std::size_t i = 0; i < n; ++i) theta[i] = theta0[i] + dir[i] * scale;
        oracle(theta, g1);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g1[i] -= g0[i];
            diff += g1[i] * g1[i];
        }
        diff = std::sqrt(diff);
        best = std::max(best, diff / scale);
        if (diff > 0.0)
            for (std::size_t i = 0; i < n; ++i) dir[i] = g1[i] / diff;
        else
            randomize_dir();
    }
    return best;
}

GradOracle student_oracle(StudentModel& s, const TeacherModel& teacher,
                          const Batch& probe, const DistillSettings& settings) {
    std::vector<Matrix*> refs;
    for (auto& [name, m] : student_param_refs(s)) refs.push_back(m);
    return [&s, &teacher, probe, settings, refs](const std::vector<double>& theta,
                                                 std::vector<double>& grad) {
        scatter(theta, refs);
        StepResult r = distill_loss_and_grads(s, teacher, probe, settings);
        grad.clear();
        for (const Matrix& g : r.grads) grad.insert(grad.end(), g.v.begin(), g.v.end());
        return r.loss.total;
    };
}

double estimate_smoothness(StudentModel& s, const TeacherModel& teacher,
                           const Batch& probe, const DistillSettings& settings,
                           std::size_t num_probes, RngState& rng) {
    std::vector<Matrix*> refs;
    for (auto& [name, m] : student_param_refs(s)) refs.push_back(m);
    std::vector<double> theta0 = flatten(refs);
    GradOracle oracle = student_oracle(s, teacher, probe, settings);
    double lhat = estimate_smoothness_core(oracle, theta0, num_probes, rng);
    scatter(theta0, refs);  // restore
    return lhat;
}

double estimate_grad_variance(const StudentModel& s, const TeacherModel& teacher,
                              const Corpus& corpus, std::size_t seq_len,
                              std::size_t batch_size, std::size_t num_batches,
                              const DistillSettings& settings, RngState& rng) {
    require(num_batches >= 2, "estimate_grad_variance: need at least 2 batches");
    Batch pool = window_pool(corpus, seq_len);
    const std::size_t n = pool.inputs.size();
    StepResult full = distill_loss_and_grads(s, teacher, pool, settings);

    double acc = 0.0;
    for (std::size_t b = 0; b < num_batches; ++b) {
        // Sample without replacement, ascending order; batch_size >= pool
        // degenerates to the full pool and contributes exactly zero.
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::size_t take = std::min(batch_size, n);
        for (std::size_t i = 0; i < take; ++i) {
            std::size_t j = i + rng.next_range(n - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(take);
        std::sort(idx.begin(), idx.end());
        Batch mini;
        for (std::size_t i : idx) {
            mini.inputs.push_back(pool.inputs[i]);
            mini.targets.push_back(pool.targets[i]);
        }
        StepResult r = distill_loss_and_grads(s, teacher, mini, settings);
        double d2 = 0.0;
        for (std::size_t g = 0; g < r.grads.size(); ++g) {
            Matrix diff = sub(r.grads[g], full.grads[g]);
            d2 += dot(diff, diff);
        }
        acc += d2;
    }
    return acc / static_cast<double>(num_batches);
}

void sgd_step(std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
              double lr) {
    require(params.size() == grads.size(), "sgd_step: group count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        add_inplace(*params[i], grads[i], -lr);
}

void AdamState::init(const std::vector<Matrix*>& params) {
    m.clear();
    v.clear();
    for (const Matrix* p : params) {
        m.emplace_back(p->rows, p->cols);
        v.emplace_back(p->rows, p->cols);
    }
    t = 0;
}

void AdamState::step(std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                     double lr) {
    require(params.size() == m.size(), "adam: not initialized for these params");
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        for (std::size_t j = 0; j < p.v.size(); ++j) {
            double g = grads[i].v[j];
            m[i].v[j] = beta1 * m[i].v[j] + (1.0 - beta1) * g;
            v[i].v[j] = beta2 * v[i].v[j] + (1.0 - beta2) * g * g;
            double mhat = m[i].v[j] / bc1;
            double vhat = v[i].v[j] / bc2;
            p.v[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

namespace {

struct LoopHooks {
    std::function<std::pair<LossBreakdown, std::vector<Matrix>>(const Batch&)> step;
    std::vector<Matrix*> params;
    std::function<double()> val;
};

TrainTrace run_loop(const LoopHooks& hooks, const Corpus& train_corpus,
                    const SgdConfig& cfg, double lr) {
    require(lr > 0.0 && std::isfinite(lr), "train: learning rate must be positive");
    require(cfg.steps >= 1, "train: steps must be >= 1");
    TrainTrace trace;
    trace.resolved_lr = lr;
    RngState batch_rng(cfg.seed);
    Batch pool = window_pool(train_corpus, cfg.seq_len);

    AdamState adam;
    std::vector<Matrix*> params = hooks.params;
    if (cfg.optimizer == OptimKind::Adam) adam.init(params);

    double sum_grad_sq = 0.0;
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        Batch b = cfg.full_batch
                      ? pool
                      : sample_batch(train_corpus, cfg.batch_size, cfg.seq_len, batch_rng);
        auto [loss, grads] = hooks.step(b);
        double grad_sq;
        if (cfg.full_grad_trace && !cfg.full_batch) {
            // Record the pool objective and its gradient at theta_t.
            auto [pool_loss, pool_grads] = hooks.step(pool);
            loss = pool_loss;
            grad_sq = grad_sq_norm_of(pool_grads);
        } else {
            grad_sq = grad_sq_norm_of(grads);
        }
        if (!std::isfinite(loss.total) || loss.total > 1e6)
            throw NumericalFailure(
                "train: divergence at step " + std::to_string(t), loss.total);

        double lr_t = lr;
        if (cfg.schedule == LrSchedule::Cosine)
            lr_t = lr * 0.5 *
                   (1.0 + std::cos(3.14159265358979323846 * static_cast<double>(t) /
                                   static_cast<double>(cfg.steps)));
        if (cfg.optimizer == OptimKind::Adam)
            adam.step(params, grads, lr_t);
        else
            sgd_step(params, grads, lr_t);

        TrainRecord rec;
        rec.step = t;
        rec.loss = loss;
        rec.grad_sq_norm = grad_sq;
        sum_grad_sq += grad_sq;
        rec.running_mean_grad_sq = sum_grad_sq / static_cast<double>(t + 1);
        if ((cfg.val_every > 0 && (t + 1) % cfg.val_every == 0) || t + 1 == cfg.steps) {
            rec.val_loss = hooks.val();
            rec.has_val = true;
        }
        trace.records.push_back(rec);
    }
    trace.initial_loss = trace.records.front().loss.total;
    trace.best_loss = trace.records.front().loss.total;
    for (const TrainRecord& r : trace.records)
        trace.best_loss = std::min(trace.best_loss, r.loss.total);
    for (const TrainRecord& r : trace.records)
        if (r.has_val) trace.final_val_loss = r.val_loss;
    return trace;
}

}  // namespace

TrainTrace train(StudentModel& s, const TeacherModel& teacher, const Corpus& corpus,
                 const SgdConfig& cfg) {
    auto [train_part, held] = split_corpus(corpus, cfg.seq_len + 1);
    double lr = cfg.lr;
    if (cfg.lr_auto) {
        Batch pool = window_pool(train_part, cfg.seq_len);
        Batch probe;
        std::size_t take = std::min<std::size_t>(pool.inputs.size(), 8);
        for (std::size_t i = 0; i < take; ++i) {
            probe.inputs.push_back(pool.inputs[i]);
            probe.targets.push_back(pool.targets[i]);
        }
        RngState rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
        double lhat = estimate_smoothness(s, teacher, probe, cfg.objective, 10, rng);
        require(lhat > 0.0, "train: smoothness estimate is zero; cannot resolve lr");
        lr = 1.0 / lhat;
    }

    LoopHooks hooks;
    hooks.step = [&](const Batch& b) {
        StepResult r = distill_loss_and_grads(s, teacher, b, cfg.objective);
        return std::make_pair(r.loss, std::move(r.grads));
    };
    for (auto& [name, m] : student_param_refs(s)) hooks.params.push_back(m);
    const Corpus held_copy = held;
    hooks.val = [&s, &teacher, held_copy, &cfg]() {
        return eval_lm_loss_student(s, teacher, held_copy, cfg.seq_len);
    };
    return run_loop(hooks, train_part, cfg, lr);
}

TrainTrace train_teacher(TeacherModel& t, const Corpus& corpus, const SgdConfig& cfg) {
    auto [train_part, held] = split_corpus(corpus, cfg.seq_len + 1);
    double lr = cfg.lr;
    if (cfg.lr_auto) {
        // Teacher smoothness probe over its own parameters.
        Batch pool = window_pool(train_part, cfg.seq_len);
        Batch probe;
        std::size_t take = std::min<std::size_t>(pool.inputs.size(), 8);
        for (std::size_t i = 0; i < take; ++i) {
            probe.inputs.push_back(pool.inputs[i]);
            probe.targets.push_back(pool.targets[i]);
        }
        std::vector<Matrix*> refs;
        for (auto& [name, m] : teacher_param_refs(t)) refs.push_back(m);
        GradOracle oracle = [&t, &probe, &refs](const std::vector<double>& theta,
                                                std::vector<double>& grad) {
            scatter(theta, refs);
            TeacherStepResult r = teacher_loss_and_grads(t, probe);
            grad.clear();
            for (const Matrix& g : r.grads)
                grad.insert(grad.end(), g.v.begin(), g.v.end());
            return r.loss;
        };
        std::vector<double> theta0 = flatten(refs);
        RngState rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
        double lhat = estimate_smoothness_core(oracle, theta0, 10, rng);
        scatter(theta0, refs);
        require(lhat > 0.0, "train_teacher: smoothness estimate is zero");
        lr = 1.0 / lhat;
    }

    LoopHooks hooks;
    hooks.step = [&](const Batch& b) {
        TeacherStepResult r = teacher_loss_and_grads(t, b);
        LossBreakdown loss = total_loss(0.0, r.loss, 0.0, 0.0, cfg.objective.tau);
        return std::make_pair(loss, std::move(r.grads));
    };
    for (auto& [name, m] : teacher_param_refs(t)) hooks.params.push_back(m);
    const Corpus held_copy = held;
    hooks.val = [&t, held_copy, &cfg]() {
        return eval_lm_loss_teacher(t, held_copy, cfg.seq_len);
    };
    return run_loop(hooks, train_part, cfg, lr);
}

TrainTrace train_flat(const GradOracle& oracle, std::vector<double> theta,
                      std::size_t steps, double lr) {
    require(steps >= 1, "train_flat: steps must be >= 1");
    TrainTrace trace;
    trace.resolved_lr = lr;
    std::vector<double> grad(theta.size());
    double sum_grad_sq = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        double loss = oracle(theta, grad);
        if (!std::isfinite(loss) || loss > 1e6)
            throw NumericalFailure("train_flat: divergence at step " + std::to_string(t),
                                   loss);
        double gsq = 0.0;
        for (double g : grad) gsq += g * g;
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
        TrainRecord rec;
        rec.step = t;
        rec.loss = total_loss(0.0, loss, 0.0, 0.0, 1.0);
        rec.grad_sq_norm = gsq;
        sum_grad_sq += gsq;
        rec.running_mean_grad_sq = sum_grad_sq / static_cast<double>(t + 1);
        trace.records.push_back(rec);
    }
    trace.initial_loss = trace.records.front().loss.total;
    trace.best_loss = trace.records.front().loss.total;
    for (const TrainRecord& r : trace.records)
        trace.best_loss = std::min(trace.best_loss, r.loss.total);
    return trace;
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "write_trace_csv: cannot open " + path);
    f << "step,kd,lm,clone,total,grad_sq_norm,running_mean_grad_sq,val_loss\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const TrainRecord& r : trace.records) {
        f << r.step << ',' << num(r.loss.kd) << ',' << num(r.loss.lm) << ','
          << num(r.loss.clone) << ',' << num(r.loss.total) << ','
          << num(r.grad_sq_norm) << ',' << num(r.running_mean_grad_sq) << ','
          << (r.has_val ? num(r.val_loss) : "") << '\n';
    }
    require(f.good(), "write_trace_csv: write failed for " + path);
}

TrainTrace read_trace_csv(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "read_trace_csv: cannot open " + path);
    std::string line;
    std::getline(f, line);
    require(line == "step,kd,lm,clone,total,grad_sq_norm,running_mean_grad_sq,val_loss",
            "read_trace_csv: unexpected header in " + path);
    TrainTrace trace;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        require(cells.size() == 8, "read_trace_csv: malformed row in " + path);
        TrainRecord r;
        r.step = std::stoull(cells[0]);
        r.loss.kd = std::stod(cells[1]);
        r.loss.lm = std::stod(cells[2]);
        r.loss.clone = std::stod(cells[3]);
        r.loss.total = std::stod(cells[4]);
        r.grad_sq_norm = std::stod(cells[5]);
        r.running_mean_grad_sq = std::stod(cells[6]);
        r.has_val = !cells[7].empty();
        if (r.has_val) r.val_loss = std::stod(cells[7]);
        trace.records.push_back(r);
    }
    if (!trace.records.empty()) {
        trace.initial_loss = trace.records.front().loss.total;
        trace.best_loss = trace.records.front().loss.total;
        for (const TrainRecord& r : trace.records) {
            trace.best_loss = std::min(trace.best_loss, r.loss.total);
            if (r.has_val) trace.final_val_loss = r.val_loss;
        }
    }
    return trace;
}

}  // namespace lrc
