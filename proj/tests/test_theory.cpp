#include "doctest.h"

#include <cmath>

#include "lrc/theory.hpp"

using namespace lrc;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.vocab_size = 16;
    cfg.num_layers = 2;
    cfg.hidden_dim = 16;
    cfg.num_heads = 4;
    cfg.seq_len = 16;
    return cfg;
}

// Random teacher whose linear maps have geometric singular-value decay, the
// regime Assumption 3 is about.
TeacherModel decaying_teacher(const ModelConfig& cfg, RngState& rng, double decay) {
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

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("lemma1: full rank means zero epsilon and zero deviation") {
    ModelConfig cfg = small_config();
    RngState rng(1);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    Corpus c = generate_markov_corpus(3, 1, cfg.vocab_size, 1024);
    RngState br(4);
    Batch b = sample_batch(c, 2, cfg.seq_len, br);
    auto [eps, dev] = lemma1_deviation(s, t, b, cfg.hidden_dim);
    CHECK(eps == 0.0);
    CHECK(dev == 0.0);
}

TEST_CASE("lemma1: exactly rank-k teacher has zero deviation at r >= k") {
    ModelConfig cfg = small_config();
    RngState rng(5);
    TeacherModel t = init_teacher(cfg, rng);
    // Force every per-layer map to exact rank 3.
    for (auto& l : t.w.layers)
        for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w1, &l.w2})
            *m = truncate_rank(*m, 3).first;
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    Corpus c = generate_markov_corpus(7, 1, cfg.vocab_size, 1024);
    RngState br(8);
    Batch b = sample_batch(c, 2, cfg.seq_len, br);
    auto [eps, dev] = lemma1_deviation(s, t, b, 3);
    CHECK(eps < 1e-7);
    CHECK(dev < 1e-6);
}

TEST_CASE("lemma1: svd-aligned factors see zero deviation at r >= student rank") {
    // Truncation at r >= the student rank preserves the exact singular
    // subspace the svd-initialized factors read, so gradients are unchanged.
    ModelConfig cfg = small_config();
    RngState rng(9);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    Corpus c = generate_markov_corpus(11, 1, cfg.vocab_size, 1024);
    RngState br(12);
    Batch b = sample_batch(c, 2, cfg.seq_len, br);
    auto [eps8, dev8] = lemma1_deviation(s, t, b, 8);
    CHECK(eps8 > 0.0);
    auto [eps2, dev2] = lemma1_deviation(s, t, b, 2);
    CHECK(dev8 < 1e-8 * dev2);
    CHECK(dev2 > 0.0);
}

TEST_CASE("lemma1: deviation grows with epsilon across the rank sweep") {
    ModelConfig cfg = small_config();
    for (std::uint64_t seed : {9ull, 100ull, 200ull}) {
        RngState rng(seed);
        TeacherModel t = decaying_teacher(cfg, rng, 0.75);
        StudentModel s = init_student(t, 4, StudentInit::Random, rng);
        Corpus c = generate_markov_corpus(11, 1, cfg.vocab_size, 2048);
        RngState br(12);
        Batch b = sample_batch(c, 4, cfg.seq_len, br);
        std::vector<double> epss, devs;
        for (std::size_t r : {2u, 4u, 6u, 8u, 10u, 12u, 14u, 16u}) {
            auto [eps, dev] = lemma1_deviation(s, t, b, r);
            epss.push_back(eps);
            devs.push_back(dev);
        }
        CHECK(spearman(epss, devs) >= 0.95);
    }
}

TEST_CASE("convergence bound formula") {
    CHECK(convergence_bound(1, 1, 1, 100, 0, 1) == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(convergence_bound(1, 1, 1, 1, 2, 1) == doctest::Approx(7.0).epsilon(1e-14));
    // Pure 1/T when eps = 0: doubling T halves the bound.
    double b1 = convergence_bound(2, 3, 1, 50, 0, 5);
    double b2 = convergence_bound(2, 3, 1, 100, 0, 5);
    CHECK(b1 == doctest::Approx(2.0 * b2).epsilon(1e-12));
    CHECK_THROWS_AS(convergence_bound(-1, 1, 1, 10, 0, 1), InvalidArgument);
}

TEST_CASE("verify_convergence on the exact quadratic holds at every prefix") {
    // 0.5 theta^T H theta with known top curvature; eta = 1/L, exact
    // gradients, sigma^2 = 0, eps = 0.
    const std::size_t dim = 40;
    const double lmax = 4.0;
    std::vector<double> lam(dim);
    for (std::size_t i = 0; i < dim; ++i)
        lam[i] = lmax * std::pow(0.01, static_cast<double>(i) / (dim - 1));
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
    RngState rng(13);
    std::vector<double> theta0(dim);
    for (double& x : theta0) x = rng.next_gaussian();
    TrainTrace trace = train_flat(oracle, theta0, 2000, 1.0 / lmax);

    ConstantEstimates consts;
    consts.smoothness = lmax;
    consts.grad_variance = 0.0;
    consts.approx_error = 0.0;
    consts.delta0 = trace.initial_loss - trace.best_loss;
    ConvergenceCheck check;
    check.min_prefix = 1;
    check.required_fraction = 1.0;
    check.tolerance = 1e-9 * trace.initial_loss;
    BoundReport rep = verify_convergence(trace, consts, 0.0, check);
    CHECK(rep.pass);
    CHECK(rep.constants.at("fraction_held") == 1.0);
}

TEST_CASE("verify_convergence: loss offset does not change the verdict") {
    const std::size_t dim = 10;
    const double lmax = 2.0;
    for (double offset : {0.0, 5.0}) {
        GradOracle oracle = [&, offset](const std::vector<double>& theta,
                                        std::vector<double>& grad) {
            grad.resize(dim);
            double loss = offset;
            for (std::size_t i = 0; i < dim; ++i) {
                loss += 0.5 * lmax * theta[i] * theta[i];
                grad[i] = lmax * theta[i];
            }
            return loss;
        };
        std::vector<double> theta0(dim, 1.0);
        TrainTrace trace = train_flat(oracle, theta0, 200, 1.0 / lmax);
        ConstantEstimates consts;
        consts.smoothness = lmax;
        consts.delta0 = trace.initial_loss - trace.best_loss;  // offset cancels
        ConvergenceCheck check;
        BoundReport rep = verify_convergence(trace, consts, 0.0, check);
        CHECK(rep.pass);
    }
}

TEST_CASE("verify_convergence rejects short traces") {
    TrainTrace t;
    t.records.resize(50);
    ConstantEstimates consts;
    CHECK_THROWS_AS(verify_convergence(t, consts, 0.0, {}), InvalidArgument);
}

TEST_CASE("covering number log form") {
    CHECK(covering_number_log(1, 1, 1, 1.0, 3.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(covering_number_log(1, 1, 1, 1.0, 3.0 / std::exp(1.0)) ==
          doctest::Approx(3.0).epsilon(1e-12));
    double once = covering_number_log(2, 5, 7, 2.0, 0.5);
    double twice = covering_number_log(4, 5, 7, 2.0, 0.5);
    CHECK(twice == doctest::Approx(2.0 * once).epsilon(1e-12));
    CHECK_THROWS_AS(covering_number_log(1, 1, 1, 1.0, 4.0), InvalidArgument);
}

TEST_CASE("generalization bound formula") {
    const double e2 = std::exp(2.0);
    double v = generalization_bound(2, 4, 4, static_cast<std::size_t>(e2 + 0.5), 1.0,
                                    1.0, 1.0);
    // n rounds to 7; evaluate directly against the closed form at n = 7.
    double n = 7.0;
    CHECK(v == doctest::Approx(2.0 * 8.0 * std::log(n) / std::sqrt(n)).epsilon(1e-12));
    // delta = 1 removes the second term entirely (log 1 = 0).
    double with_delta = generalization_bound(2, 4, 4, 7, 0.1, 1.0, 1.0);
    CHECK(with_delta > v);
    // Doubling r doubles the first term exactly (k2 = 0 isolates it).
    double r1 = generalization_bound(2, 4, 4, 100, 0.5, 1.0, 0.0);
    double r2 = generalization_bound(4, 4, 4, 100, 0.5, 1.0, 0.0);
    CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));
    CHECK_THROWS_AS(generalization_bound(1, 1, 1, 10, 0.0, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(generalization_bound(1, 1, 1, 1, 0.5, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("gaussian mutual information closed form") {
    CHECK(gaussian_mi(0.0, 5) == 0.0);
    CHECK(gaussian_mi(0.8, 1) == doctest::Approx(0.5108256238).epsilon(1e-9));
    CHECK(gaussian_mi(0.6, 3) == gaussian_mi(-0.6, 3));
    CHECK_THROWS_AS(gaussian_mi(1.0, 1), InvalidArgument);
}

TEST_CASE("clone loss closed form and Monte Carlo oracle") {
    CHECK(clone_loss_from_correlation(1.0, 1.0, 8) == 0.0);
    CHECK(clone_loss_from_correlation(1.0, 0.5, 4) == doctest::Approx(4.0));
    CHECK_THROWS_AS(clone_loss_from_correlation(0.0, 0.5, 4), InvalidArgument);

    RngState rng(17);
    auto [x, y] = sample_correlated_gaussians(0.3, 1.0, 8, 100000, rng);
    double mse = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) {
            double d = x(i, j) - y(i, j);
            mse += d * d;
        }
    mse /= static_cast<double>(x.rows);
    double closed = clone_loss_from_correlation(1.0, 0.3, 8);
    CHECK(std::abs(mse - closed) / closed < 0.02);
}

TEST_CASE("mi lower bound shape and calibration") {
    CHECK(mi_lower_bound(0.0, 4, 1.5) ==
          doctest::Approx(std::log(4.0) + 1.5).epsilon(1e-12));
    // Linear in the clone loss with slope -d/2.
    double a = mi_lower_bound(1.0, 6, 0.0);
    double b = mi_lower_bound(2.0, 6, 0.0);
    CHECK(a - b == doctest::Approx(3.0).epsilon(1e-12));

    std::vector<double> grid;
    for (int i = 0; i <= 9; ++i) grid.push_back(0.1 * i);
    for (std::size_t d : {1u, 8u, 32u}) {
        double c = calibrate_mi_const(d, grid);
        double min_margin = 1e300;
        for (double rho : grid) {
            double clone = clone_loss_from_correlation(1.0, rho, d);
            double lb = mi_lower_bound(clone, d, c);
            min_margin = std::min(min_margin, gaussian_mi(rho, d) - lb);
            CHECK(gaussian_mi(rho, d) >= lb - 1e-10);
        }
        CHECK(std::abs(min_margin) < 1e-10);  // tight at the worst grid point
    }
}

TEST_CASE("ksg estimator: independent samples give near-zero MI") {
    RngState rng(19);
    auto [x, y] = sample_correlated_gaussians(0.0, 1.0, 1, 10000, rng);
    double mi = estimate_mi_knn(x, y, 4);
    CHECK(std::abs(mi) < 0.05);
}

TEST_CASE("ksg estimator matches the Gaussian closed form") {
    RngState rng(23);
    auto [x, y] = sample_correlated_gaussians(0.8, 1.0, 1, 100000, rng);
    double mi = estimate_mi_knn(x, y, 4);
    CHECK(std::abs(mi - gaussian_mi(0.8, 1)) < 0.05);
}

TEST_CASE("ksg estimator is invariant to monotone rescaling") {
    RngState rng(29);
    auto [x, y] = sample_correlated_gaussians(0.6, 1.0, 1, 30000, rng);
    double base = estimate_mi_knn(x, y, 4);
    Matrix xs = x, ys = y;
    for (double& v : xs.v) v = std::exp(v);          // strictly increasing
    for (double& v : ys.v) v = v * v * v + 2.0 * v;  // strictly increasing
    double rescaled = estimate_mi_knn(xs, ys, 4);
    CHECK(std::abs(base - rescaled) < 0.02);
}

TEST_CASE("ksg estimator input validation") {
    Matrix x(200, 1), y(200, 1);
    RngState rng(31);
    x = random_gaussian(rng, 200, 1);
    y = random_gaussian(rng, 200, 1);
    CHECK_THROWS_AS(estimate_mi_knn(x, y, 2), InvalidArgument);
    CHECK_THROWS_AS(estimate_mi_knn(x, y, 11), InvalidArgument);
    Matrix z(50, 1);
    CHECK_THROWS_AS(estimate_mi_knn(z, z, 4), InvalidArgument);
    Matrix cst(200, 1);
    CHECK_THROWS_AS(estimate_mi_knn(cst, cst, 4), NumericalFailure);
}

TEST_CASE("pc projection keeps the dominant directions") {
    RngState rng(37);
    // Rank-2 signal in 6 dims plus small noise.
    Matrix basis = random_orthonormal(rng, 6, 2);
    Matrix coef = random_gaussian(rng, 500, 2);
    Matrix data = matmul(coef, transpose(basis));
    for (double& v : data.v) v += 0.01 * rng.next_gaussian();
    Matrix scores = project_top_pcs(data, 2);
    CHECK(scores.rows == 500);
    CHECK(scores.cols == 2);
    // Scores carry nearly all the variance of the data.
    double total = 0.0, kept = 0.0;
    for (double v : data.v) total += v * v;
    for (double v : scores.v) kept += v * v;
    CHECK(kept / total > 0.98);
}

TEST_CASE("optimal rank closed form") {
    CHECK(optimal_rank(4, 1, 25) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(optimal_rank(2, 2, 400) == doctest::Approx(2.0 * optimal_rank(2, 2, 100))
                                         .epsilon(1e-12));
    CHECK_THROWS_AS(optimal_rank(0, 1, 10), InvalidArgument);
    // Convexity: the stationary point beats r*/2 and 2 r*.
    RngState rng(41);
    for (int t = 0; t < 100; ++t) {
        double c1 = 0.1 + 5.0 * rng.next_double();
        double c2 = 0.1 + 5.0 * rng.next_double();
        double n = 10.0 + 1000.0 * rng.next_double();
        double r = optimal_rank(c1, c2, n);
        auto obj = [&](double rr) { return c1 / rr + c2 * rr / n; };
        CHECK(obj(r) <= obj(r / 2) + 1e-12);
        CHECK(obj(r) <= obj(2 * r) + 1e-12);
    }
}

TEST_CASE("rank law fit on exact and noisy synthetic points") {
    std::vector<std::pair<double, double>> exact;
    for (double n : {100.0, 400.0, 1600.0, 6400.0})
        exact.push_back({n, 3.0 * std::sqrt(n)});
    RankFit f = fit_rank_law(exact);
    CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(f.correlation == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f.c1 / f.c2 == doctest::Approx(9.0).epsilon(1e-8));

    RngState rng(43);
    int within = 0;
    const int draws = 100;
    for (int t = 0; t < draws; ++t) {
        std::vector<std::pair<double, double>> noisy;
        for (double n : {100.0, 400.0, 1600.0, 6400.0}) {
            double noise = 1.0 + 0.1 * (2.0 * rng.next_double() - 1.0);
            noisy.push_back({n, 3.0 * std::sqrt(n) * noise});
        }
        double slope = fit_rank_law(noisy).slope;
        if (std::abs(slope - 0.5) <= 0.1) ++within;
    }
    CHECK(within == draws);

    std::vector<std::pair<double, double>> flat = {
        {100.0, 8.0}, {400.0, 8.0}, {1600.0, 8.0}, {6400.0, 8.0}};
    CHECK(fit_rank_law(flat).slope == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_rank_law({{100.0, 2.0}, {200.0, 3.0}}), InvalidArgument);
    CHECK_THROWS_AS(
        fit_rank_law({{100.0, 2.0}, {200.0, 3.0}, {400.0, 0.0}, {800.0, 5.0}}),
        InvalidArgument);
}

TEST_CASE("spearman rank correlation") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {9, 5, 3, 1}) == doctest::Approx(-1.0));
    // Monotone nonlinear map still gives 1.
    CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == doctest::Approx(1.0));
}

TEST_CASE("bound report serializes to json") {
    BoundReport r;
    r.name = "demo";
    r.constants["c"] = 2.5;
    r.points.push_back({1.0, 0.5, 0.9});
    r.margin = 0.4;
    r.pass = true;
    std::string j = bound_report_json(r);
    CHECK(j.find("\"name\": \"demo\"") != std::string::npos);
    CHECK(j.find("\"pass\": true") != std::string::npos);
    CHECK(j.find("\"measured\": 0.5") != std::string::npos);
}

}  // TEST_SUITE
