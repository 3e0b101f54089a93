#include "lrc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"

namespace lrc {

TeacherModel decaying_spectrum_teacher(const ModelConfig& cfg, RngState& rng,
                                       double decay) {
    TeacherModel t = init_teacher(cfg, rng);
    for (auto& l : t.w.layers) {
        for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2}) {
            std::size_t k = std::min(m->rows, m->cols);
            Matrix u = random_orthonormal(rng, m->rows, k);
            Matrix v = random_orthonormal(rng, m->cols, k);
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t i = 0; i < m->rows; ++i)
                    u(i, j) *= 0.6 * std::pow(decay, static_cast<double>(j));
            *m = matmul(u, transpose(v));
        }
    }
    return t;
}

namespace {

// Pinned experiment design shared by the model-backed checks; small enough
// that the full verify suite completes on a laptop.
struct ExpDesign {
    std::size_t vocab = 16;
    std::size_t layers = 2;
    std::size_t dim = 32;
    std::size_t heads = 4;
    std::size_t seq = 32;
    std::size_t master_tokens = 160000;
    std::size_t markov_order = 2;
    std::size_t teacher_steps = 2000;
    std::size_t teacher_batch = 16;
    double teacher_lr = 3e-3;
    std::size_t distill_steps = 2000;
    std::size_t distill_batch = 8;
    double distill_lr = 1e-2;
    std::vector<std::size_t> budgets = {2048, 8192, 32768, 131072};
    std::vector<std::size_t> ranks = {2, 4, 8, 16};
    std::vector<std::uint64_t> run_seeds = {50, 51, 52};
};

ModelConfig exp_model(const ExpDesign& d) {
    ModelConfig cfg;
    cfg.vocab_size = d.vocab;
    cfg.num_layers = d.layers;
    cfg.hidden_dim = d.dim;
    cfg.num_heads = d.heads;
    cfg.seq_len = d.seq;
    return cfg;
}

// Teacher trained on the master corpus; the shared frozen model behind the
// experiment-analogue checks.
TeacherModel trained_experiment_teacher(const ExpDesign& d, const RunConfig& cfg,
                                        Corpus& master_out) {
    master_out = generate_markov_corpus(cfg.data_seed, static_cast<int>(d.markov_order),
                                        d.vocab, d.master_tokens);
    ModelConfig mc = exp_model(d);
    RngState rng(cfg.seed * 7919 + 1);
    TeacherModel t = init_teacher(mc, rng);
    SgdConfig tc;
    tc.steps = d.teacher_steps;
    tc.batch_size = d.teacher_batch;
    tc.seq_len = d.seq;
    tc.seed = cfg.seed * 7919 + 3;
    tc.optimizer = OptimKind::Adam;
    tc.lr_auto = false;
    tc.lr = d.teacher_lr;
    tc.val_every = 500;
    train_teacher(t, master_out, tc);
    return t;
}

Corpus prefix_corpus(const Corpus& master, std::size_t tokens) {
    Corpus sub;
    sub.vocab_size = master.vocab_size;
    sub.provenance = master.provenance + ":prefix" + std::to_string(tokens);
    sub.ids.assign(master.ids.begin(),
                   master.ids.begin() + static_cast<std::ptrdiff_t>(tokens));
    return sub;
}

SgdConfig distill_config(const ExpDesign& d, std::uint64_t seed) {
    SgdConfig sc;
    sc.steps = d.distill_steps;
    sc.batch_size = d.distill_batch;
    sc.seq_len = d.seq;
    sc.seed = seed;
    sc.optimizer = OptimKind::Adam;
    sc.lr_auto = false;
    sc.lr = d.distill_lr;
    sc.val_every = 100;
    return sc;
}

double best_val(const TrainTrace& tr) {
    double best = 1e300;
    for (const auto& r : tr.records)
        if (r.has_val) best = std::min(best, r.val_loss);
    return best;
}

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

BoundReport check_gradcheck(const RunConfig& cfg) {
    ModelConfig mc = model_config(cfg);
    RngState rng(cfg.seed);
    TeacherModel t = init_teacher(mc, rng);
    StudentModel s = init_student(t, cfg.rank, student_init(cfg), rng);

    Corpus c = generate_markov_corpus(cfg.data_seed, static_cast<int>(cfg.markov_order),
                                      mc.vocab_size, 4096);
    RngState br(cfg.seed + 17);
    const std::size_t seq = std::min<std::size_t>(mc.seq_len, 16);
    Batch b = sample_batch(c, 2, seq, br);

    DistillSettings ds;
    ds.lambda = cfg.lambda_clone;
    ds.tau = cfg.tau;
    const double h = 1e-5;
    double err = grad_check(s, t, b, h, ds);

    BoundReport rep;
    rep.name = "gradcheck";
    rep.constants["h"] = h;
    rep.constants["params"] = static_cast<double>(
        param_count(student_param_refs(static_cast<const StudentModel&>(s))));
    rep.points.push_back({h, err, 1e-5});
    rep.margin = 1e-5 - err;
    rep.pass = err < 1e-5;
    rep.note = "max |analytic - central difference| / max(1, |cd|) over all "
               "trainable parameters";
    return rep;
}

BoundReport check_lemma1(const RunConfig& cfg) {
    ModelConfig mc;
    mc.vocab_size = 16;
    mc.num_layers = 2;
    mc.hidden_dim = 16;
    mc.num_heads = 4;
    mc.seq_len = 16;
    const std::size_t d = mc.hidden_dim;
    const std::vector<std::size_t> sweep_ranks = {2, 4, 6, 8, 10, 12, 14, 16};

    BoundReport rep;
    rep.name = "lemma1_gradient_preservation";

    Corpus c = generate_markov_corpus(cfg.data_seed + 11, 1, mc.vocab_size, 2048);

    // Calibration: 5 teachers, full rank sweeps; C_hat from the max ratio.
    double chat_raw = 0.0;
    double min_spearman = 1.0;
    bool zero_case_ok = true;
    for (std::uint64_t i = 0; i < 5; ++i) {
        RngState rng(cfg.seed * 100 + i);
        TeacherModel t = decaying_spectrum_teacher(mc, rng, 0.75);
        StudentModel s = init_student(t, 4, StudentInit::Random, rng);
        RngState br(cfg.seed * 100 + i + 7);
        Batch b = sample_batch(c, 4, mc.seq_len, br);
        std::vector<double> epss, devs;
        for (std::size_t r : sweep_ranks) {
            auto [eps, dev] = lemma1_deviation(s, t, b, r);
            epss.push_back(eps);
            devs.push_back(dev);
            rep.points.push_back({static_cast<double>(r), dev, eps});
            if (r == d && (eps != 0.0 || dev != 0.0)) zero_case_ok = false;
            if (eps > 0.0) chat_raw = std::max(chat_raw, dev / eps);
        }
        min_spearman = std::min(min_spearman, spearman(epss, devs));
    }
    const double chat = 1.25 * chat_raw;

    // Held-out configurations: fresh seeds and ranks, deviation <= C_hat eps.
    double margin = 1e300;
    bool holdout_ok = true;
    const std::size_t holdout_ranks[] = {2, 4, 6, 8, 10, 12, 2, 6, 10, 4};
    for (std::uint64_t i = 0; i < 10; ++i) {
        RngState rng(cfg.seed * 100 + 1000 + i);
        TeacherModel t = decaying_spectrum_teacher(mc, rng, 0.75);
        StudentModel s = init_student(t, 4, StudentInit::Random, rng);
        RngState br(cfg.seed * 100 + 2000 + i);
        Batch b = sample_batch(c, 4, mc.seq_len, br);
        auto [eps, dev] = lemma1_deviation(s, t, b, holdout_ranks[i]);
        margin = std::min(margin, chat * eps - dev);
        if (dev > chat * eps) holdout_ok = false;
    }

    rep.constants["C_hat"] = chat;
    rep.constants["C_hat_raw"] = chat_raw;
    rep.constants["min_sweep_spearman"] = min_spearman;
    rep.margin = margin;
    rep.pass = zero_case_ok && min_spearman >= 0.95 && holdout_ok;
    rep.note = "points carry (x=rank, measured=deviation, bound=epsilon); C_hat fitted "
               "on 5 calibration sweeps, frozen for 10 held-out configurations";
    return rep;
}

std::vector<BoundReport> check_convergence(const RunConfig& cfg) {
    std::vector<BoundReport> out;

    // (a) Controlled quadratic: exact constants, bound must hold everywhere.
    {
        const std::size_t dim = 40;
        const double lmax = 4.0;
        std::vector<double> lam(dim);
        for (std::size_t i = 0; i < dim; ++i)
            lam[i] = lmax * std::pow(0.01, static_cast<double>(i) /
                                               static_cast<double>(dim - 1));
        GradOracle oracle = [&](const std::vector<double>& theta,
                                std::vector<double>& grad) {
            grad.resize(dim);
            double loss = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                loss += 0.5 * lam[i] * theta[i] * theta[i];
                grad[i] = lam[i] * theta[i];
            }
            return loss;
        };
        RngState rng(cfg.seed + 29);
        std::vector<double> theta0(dim);
        for (double& x : theta0) x = rng.next_gaussian();
        TrainTrace trace = train_flat(oracle, theta0, 2000, 1.0 / lmax);
        ConstantEstimates consts;
        consts.smoothness = lmax;
        consts.delta0 = trace.initial_loss - trace.best_loss;
        ConvergenceCheck check;
        check.min_prefix = 1;
        check.required_fraction = 1.0;
        check.tolerance = 1e-9 * trace.initial_loss;
        BoundReport rep = verify_convergence(trace, consts, 0.0, check);
        rep.name = "theorem1_quadratic";
        rep.note = "exact L, sigma^2 = 0, eps = 0; prefix range [1, 2000]";
        out.push_back(std::move(rep));
    }

    // (b) Toy distillation with c fitted on a disjoint calibration seed.
    {
        ExpDesign d;
        d.master_tokens = 4096;
        ModelConfig mc = exp_model(d);
        Corpus corpus = generate_markov_corpus(cfg.data_seed, 2, d.vocab, 4096);

        RngState trng(cfg.seed * 7919 + 1);
        TeacherModel teacher = init_teacher(mc, trng);
        SgdConfig tc;
        tc.steps = 500;
        tc.batch_size = 16;
        tc.seq_len = d.seq;
        tc.seed = cfg.seed * 7919 + 3;
        tc.optimizer = OptimKind::Adam;
        tc.lr_auto = false;
        tc.lr = 3e-3;
        tc.val_every = 250;
        train_teacher(teacher, corpus, tc);

        const std::size_t rank = 8;
        std::vector<Matrix> maps;
        for (const auto& l : teacher.w.layers)
            for (const Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2})
                maps.push_back(*m);
        double eps = approximation_error_profile(maps, {rank}).total;

        auto run_once = [&](std::uint64_t seed, ConstantEstimates& consts) {
            RngState srng(seed);
            StudentModel s = init_student(teacher, rank, StudentInit::Svd, srng);
            SgdConfig sc;
            sc.steps = 600;
            sc.batch_size = 8;
            sc.seq_len = d.seq;
            sc.seed = seed;
            sc.optimizer = OptimKind::Sgd;  // bound verification forces plain SGD
            sc.lr_auto = true;
            sc.val_every = 200;
            sc.full_grad_trace = true;

            auto [train_part, held] = split_corpus(corpus, d.seq + 1);
            Batch pool = window_pool(train_part, d.seq);
            Batch probe;
            for (std::size_t i = 0; i < std::min<std::size_t>(pool.inputs.size(), 8); ++i) {
                probe.inputs.push_back(pool.inputs[i]);
                probe.targets.push_back(pool.targets[i]);
            }
            RngState prng(seed + 101);
            consts.smoothness = estimate_smoothness(s, teacher, probe, sc.objective, 10, prng);
            RngState vrng(seed + 202);
            consts.grad_variance = estimate_grad_variance(
                s, teacher, train_part, d.seq, sc.batch_size, 16, sc.objective, vrng);
            consts.approx_error = eps;

            TrainTrace trace = train(s, teacher, corpus, sc);
            consts.delta0 = trace.initial_loss - trace.best_loss;
            return trace;
        };

        ConstantEstimates cal_consts;
        TrainTrace cal = run_once(cfg.seed + 5000, cal_consts);
        double c_fit = 0.0;
        for (std::size_t i = 99; i < cal.records.size(); ++i) {
            const std::size_t prefix = i + 1;
            double base = 2.0 * cal_consts.smoothness * cal_consts.delta0 /
                              static_cast<double>(prefix) +
                          cal_consts.grad_variance / static_cast<double>(prefix);
            double excess = cal.records[i].running_mean_grad_sq - base;
            if (excess > 0.0)
                c_fit = std::max(c_fit, excess * std::sqrt(static_cast<double>(prefix)) /
                                            (eps * eps));
        }
        c_fit *= 1.25;

        ConstantEstimates ver_consts;
        TrainTrace ver = run_once(cfg.seed, ver_consts);
        ConvergenceCheck check;
        check.min_prefix = 100;
        check.required_fraction = 0.95;
        BoundReport rep = verify_convergence(ver, ver_consts, c_fit, check);
        rep.name = "theorem1_distillation";
        rep.note = "c fitted on a disjoint calibration seed and frozen; trace records "
                   "the full-pool objective and gradient";
        out.push_back(std::move(rep));
    }
    return out;
}

BoundReport check_generalization(const RunConfig& cfg) {
    ExpDesign d;
    Corpus master;
    TeacherModel teacher = trained_experiment_teacher(d, cfg, master);
    Corpus sub = prefix_corpus(master, 2048);

    BoundReport rep;
    rep.name = "theorem2_gap_vs_rank";
    std::vector<double> ranks_x, medians;
    double k1_fit = 0.0;
    auto [train_part, held] = split_corpus(sub, d.seq + 1);
    for (std::size_t r : d.ranks) {
        std::vector<double> gaps;
        for (std::uint64_t seed : d.run_seeds) {
            RngState srng(seed);
            StudentModel s = init_student(teacher, r, StudentInit::Svd, srng);
            SgdConfig sc = distill_config(d, seed);
            Corpus run_corpus = sub;
            TrainTrace tr = train(s, teacher, run_corpus, sc);
            (void)tr;
            gaps.push_back(
                measure_generalization_gap(s, teacher, train_part, held, d.seq));
        }
        double med = median3(gaps);
        ranks_x.push_back(static_cast<double>(r));
        medians.push_back(med);
        double term = generalization_bound(r, d.dim, d.dim, train_part.ids.size(), 0.05,
                                           1.0, 0.0);
        if (term > 0.0) k1_fit = std::max(k1_fit, med / term);
    }
    for (std::size_t i = 0; i < ranks_x.size(); ++i) {
        double bound = generalization_bound(static_cast<std::size_t>(ranks_x[i]), d.dim,
                                            d.dim, train_part.ids.size(), 0.05, k1_fit,
                                            0.0);
        rep.points.push_back({ranks_x[i], medians[i], bound});
    }
    double rho = spearman(ranks_x, medians);
    rep.constants["spearman"] = rho;
    rep.constants["k1_fit"] = k1_fit;
    rep.constants["n_train_tokens"] = static_cast<double>(train_part.ids.size());
    rep.margin = rho - 0.8;
    rep.pass = rho >= 0.8;
    rep.note = "3-seed median generalization gap per rank at a fixed 2048-token "
               "budget; bound column uses k1 fitted to the measurements";
    return rep;
}

std::vector<BoundReport> check_mi(const RunConfig& cfg) {
    std::vector<BoundReport> out;
    std::vector<double> rho_grid;
    for (int i = 0; i <= 9; ++i) rho_grid.push_back(0.1 * i);

    // (a) Closed-form chain per hidden dimension.
    for (std::size_t d : {1u, 8u, 32u}) {
        BoundReport rep;
        rep.name = "theorem3_chain_d" + std::to_string(d);
        double c = calibrate_mi_const(d, rho_grid);
        rep.constants["const"] = c;
        double margin = 1e300;
        bool ok = true;
        for (double rho : rho_grid) {
            double clone = clone_loss_from_correlation(1.0, rho, d);
            double lb = mi_lower_bound(clone, d, c);
            double mi = gaussian_mi(rho, d);
            rep.points.push_back({rho, mi, lb});
            margin = std::min(margin, mi - lb);
            if (mi < lb - 1e-10) ok = false;
        }
        rep.margin = margin;
        rep.pass = ok;
        rep.note = "measured = Gaussian MI, bound = calibrated lower bound; const "
                   "chosen tight at the worst grid point (sigma^2 = 1)";
        out.push_back(std::move(rep));
    }

    // (b) KSG vs closed form at n = 1e5.
    {
        BoundReport rep;
        rep.name = "theorem3_ksg_estimator";
        bool ok = true;
        double worst = 0.0;
        for (double rho : {0.0, 0.4, 0.8}) {
            RngState rng(cfg.seed + static_cast<std::uint64_t>(rho * 100) + 31);
            auto [x, y] = sample_correlated_gaussians(rho, 1.0, 1, 100000, rng);
            double est = estimate_mi_knn(x, y, 4);
            double closed = gaussian_mi(rho, 1);
            rep.points.push_back({rho, est, closed});
            worst = std::max(worst, std::abs(est - closed));
            if (std::abs(est - closed) > 0.05) ok = false;
        }
        rep.constants["k"] = 4;
        rep.constants["n_samples"] = 100000;
        rep.constants["worst_abs_error"] = worst;
        rep.margin = 0.05 - worst;
        rep.pass = ok;
        rep.note = "KSG estimate vs closed form; tolerance 0.05 nats";
        out.push_back(std::move(rep));
    }

    // (c) Activation MI direction: cloning on vs off, per layer, 3 seeds.
    {
        ExpDesign d;
        d.master_tokens = 16384;
        d.distill_steps = 800;
        Corpus master;
        TeacherModel teacher = trained_experiment_teacher(d, cfg, master);
        Corpus sub = prefix_corpus(master, 16384);
        auto [train_part, held] = split_corpus(sub, d.seq + 1);
        Batch held_pool = window_pool(held, d.seq);
        const std::size_t rank = 4;

        auto layer_mi = [&](const StudentModel& s) {
            // Stack held-out activations per layer and estimate MI on the
            // top principal components.
            Dims sd = student_dims(s.teacher_cfg, s.rank);
            ConcreteWeights composed = compose_student(s, teacher);
            std::size_t positions = 0;
            for (const auto& w : held_pool.inputs) positions += w.size();
            std::vector<Matrix> ht(d.layers), hs(d.layers);
            for (std::size_t l = 0; l < d.layers; ++l) {
                ht[l] = Matrix(positions, d.dim);
                hs[l] = Matrix(positions, rank);
            }
            std::size_t row = 0;
            for (const auto& w : held_pool.inputs) {
                ActivationTrace tt = teacher_forward(teacher, w);
                ActivationTrace st = engine::forward(composed, sd, w);
                for (std::size_t l = 0; l < d.layers; ++l)
                    for (std::size_t i = 0; i < w.size(); ++i) {
                        for (std::size_t j = 0; j < d.dim; ++j)
                            ht[l](row + i, j) = tt.h[l](i, j);
                        for (std::size_t j = 0; j < rank; ++j)
                            hs[l](row + i, j) = st.h[l](i, j);
                    }
                row += w.size();
            }
            std::vector<double> mi(d.layers);
            for (std::size_t l = 0; l < d.layers; ++l) {
                Matrix pt = project_top_pcs(ht[l], std::min<std::size_t>(8, d.dim));
                Matrix ps = project_top_pcs(hs[l], std::min<std::size_t>(8, rank));
                mi[l] = estimate_mi_knn(pt, ps, 4);
            }
            return mi;
        };

        std::vector<std::vector<double>> with(d.layers), without(d.layers);
        for (std::uint64_t seed : d.run_seeds) {
            for (bool cloning : {true, false}) {
                RngState srng(seed);
                StudentModel s = init_student(teacher, rank, StudentInit::Svd, srng);
                SgdConfig sc = distill_config(d, seed);
                sc.objective.lambda = cloning ? 1.0 : 0.0;
                Corpus run_corpus = sub;
                train(s, teacher, run_corpus, sc);
                std::vector<double> mi = layer_mi(s);
                for (std::size_t l = 0; l < d.layers; ++l)
                    (cloning ? with[l] : without[l]).push_back(mi[l]);
            }
        }

        BoundReport rep;
        rep.name = "activation_cloning_mi_direction";
        bool ok = true;
        double margin = 1e300;
        for (std::size_t l = 0; l < d.layers; ++l) {
            double w = median3(with[l]);
            double wo = median3(without[l]);
            rep.points.push_back({static_cast<double>(l), w, wo});
            margin = std::min(margin, w - wo);
            if (!(w > wo)) ok = false;
        }
        rep.constants["rank"] = static_cast<double>(rank);
        rep.margin = margin;
        rep.pass = ok;
        rep.note = "measured = per-layer KSG MI with cloning (lambda = 1), bound = "
                   "without (lambda = 0); 3-seed medians on held-out data, top-8 PCs";
        out.push_back(std::move(rep));
    }
    return out;
}

BoundReport check_rank_scaling(const RunConfig& cfg) {
    ExpDesign d;
    Corpus master;
    TeacherModel teacher = trained_experiment_teacher(d, cfg, master);

    BoundReport rep;
    rep.name = "corollary1_rank_scaling";
    std::vector<std::pair<double, double>> sweep;
    for (std::size_t budget : d.budgets) {
        Corpus sub = prefix_corpus(master, budget);
        double best_loss = 1e300;
        std::size_t best_rank = d.ranks.front();
        for (std::size_t r : d.ranks) {
            std::vector<double> vals;
            for (std::uint64_t seed : d.run_seeds) {
                RngState srng(seed);
                StudentModel s = init_student(teacher, r, StudentInit::Svd, srng);
                SgdConfig sc = distill_config(d, seed);
                Corpus run_corpus = sub;
                TrainTrace tr = train(s, teacher, run_corpus, sc);
                vals.push_back(best_val(tr));
            }
            double med = median3(vals);
            if (med < best_loss) {
                best_loss = med;
                best_rank = r;
            }
        }
        sweep.push_back({static_cast<double>(budget), static_cast<double>(best_rank)});
        rep.points.push_back({static_cast<double>(budget),
                              static_cast<double>(best_rank), best_loss});
    }
    RankFit fit = fit_rank_law(sweep);
    rep.constants["slope"] = fit.slope;
    rep.constants["correlation"] = fit.correlation;
    rep.constants["implied_c1_over_c2"] = fit.c1 / fit.c2;
    rep.margin = std::min(fit.slope - 0.35, 0.65 - fit.slope);
    rep.pass = fit.slope >= 0.35 && fit.slope <= 0.65 && fit.correlation >= 0.8;
    rep.note = "points carry (x=token budget, measured=best rank, bound=its median "
               "validation loss); pass requires slope in [0.35, 0.65] and log-log "
               "correlation >= 0.8";
    return rep;
}

int run_verify(const std::string& check, const RunConfig& cfg) {
    std::vector<BoundReport> reports;
    if (check == "gradcheck") reports.push_back(check_gradcheck(cfg));
    else if (check == "lemma1") reports.push_back(check_lemma1(cfg));
    else if (check == "convergence") reports = check_convergence(cfg);
    else if (check == "generalization") reports.push_back(check_generalization(cfg));
    else if (check == "mi") reports = check_mi(cfg);
    else if (check == "rank-scaling") reports.push_back(check_rank_scaling(cfg));
    else throw InvalidArgument("verify: unknown check: " + check);

    bool all_pass = true;
    nlohmann::json file;
    file["check"] = check;
    nlohmann::json arr = nlohmann::json::array();
    for (const BoundReport& r : reports) {
        all_pass = all_pass && r.pass;
        arr.push_back(nlohmann::json::parse(bound_report_json(r)));
        std::printf("[%s] %s margin=%.6g\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.margin);
    }
    file["reports"] = arr;
    file["pass"] = all_pass;

    std::filesystem::create_directories(cfg.out);
    std::string path = cfg.out + "/verify_" + check + ".json";
    std::ofstream f(path);
    require(f.good(), "verify: cannot open " + path);
    f << file.dump(2) << "\n";
    require(f.good(), "verify: write failed for " + path);
    return all_pass ? 0 : 1;
}

}  // namespace lrc
