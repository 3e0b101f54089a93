#include "doctest.h"

#include <cmath>

#include "lrc/lowrank.hpp"
#include "oracles.hpp"

using namespace lrc;

namespace {

Matrix diag(std::initializer_list<double> d) {
    Matrix m(d.size(), d.size());
    std::size_t i = 0;
    for (double x : d) m(i, i) = x, ++i;
    return m;
}

// Random rank-k matrix built from orthonormal factors and given spectrum.
Matrix random_rank_k(RngState& rng, std::size_t m, std::size_t n,
                     const std::vector<double>& sigmas) {
    Matrix u = random_orthonormal(rng, m, sigmas.size());
    Matrix v = random_orthonormal(rng, n, sigmas.size());
    for (std::size_t j = 0; j < sigmas.size(); ++j)
        for (std::size_t i = 0; i < m; ++i) u(i, j) *= sigmas[j];
    return matmul(u, transpose(v));
}

}  // namespace

TEST_SUITE("lowrank") {

TEST_CASE("truncate diag(3,2,1) at rank 2") {
    auto [w, err] = truncate_rank(diag({3, 2, 1}), 2);
    CHECK(err == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(frobenius_norm(sub(w, diag({3, 2, 0}))) < 1e-10);
}

TEST_CASE("full-rank truncation is exact") {
    RngState rng(3);
    Matrix a = random_gaussian(rng, 5, 7);
    auto [w, err] = truncate_rank(a, 5);
    CHECK(err == 0.0);
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(w.v[i] == a.v[i]);
}

TEST_CASE("truncate rejects out-of-range rank") {
    Matrix a = diag({1, 2});
    CHECK_THROWS_AS(truncate_rank(a, 0), InvalidArgument);
    CHECK_THROWS_AS(truncate_rank(a, 3), InvalidArgument);
}

TEST_CASE("truncation error beats random rank-3 candidates") {
    RngState rng(5);
    Matrix a = random_gaussian(rng, 8, 6);
    auto [w, err] = truncate_rank(a, 3);
    CHECK(frobenius_norm(sub(a, w)) == doctest::Approx(err).epsilon(1e-8));
    for (int t = 0; t < 200; ++t) {
        Matrix left = random_gaussian(rng, 8, 3);
        Matrix right = random_gaussian(rng, 3, 6);
        Matrix cand = oracle::matmul(left, right);
        // Scale the candidate optimally toward A to make the probe fair.
        double num = dot(cand, a), den = dot(cand, cand);
        if (den > 0) cand = scale(cand, num / den);
        CHECK(frobenius_norm(sub(a, cand)) >= err - 1e-9);
    }
}

TEST_CASE("Eckart-Young across ranks and shapes") {
    RngState rng(7);
    for (int t = 0; t < 25; ++t) {
        std::size_t m = 2 + rng.next_range(14);
        std::size_t n = 2 + rng.next_range(14);
        Matrix a = random_gaussian(rng, m, n);
        SvdFactors f = svd(a);
        for (std::size_t r = 1; r <= f.s.size(); ++r) {
            auto [w, err] = truncate_rank(f, r, a);
            double tail = 0.0;
            for (std::size_t k = r; k < f.s.size(); ++k) tail += f.s[k] * f.s[k];
            CHECK(std::abs(err - std::sqrt(tail)) < 1e-8);
            CHECK(std::abs(frobenius_norm(sub(a, w)) - err) < 1e-8);
        }
    }
}

TEST_CASE("svd init on identity teacher is identity") {
    RngState rng(9);
    LowRankFactors f = init_projections(Matrix::identity(4), 4, InitMode::Svd, rng);
    Matrix ws = compose_student_weight(f, Matrix::identity(4));
    CHECK(frobenius_norm(sub(ws, Matrix::identity(4))) < 1e-10);
}

TEST_CASE("svd init on diagonal teacher keeps top singular values") {
    RngState rng(11);
    Matrix t = diag({5, 3, 1});
    LowRankFactors f = init_projections(t, 2, InitMode::Svd, rng);
    Matrix ws = compose_student_weight(f, t);
    CHECK(frobenius_norm(sub(ws, diag({5, 3}))) < 1e-10);
}

TEST_CASE("svd init composes to the rank-r truncation") {
    RngState rng(13);
    Matrix t = random_gaussian(rng, 16, 16);
    LowRankFactors f = init_projections(t, 4, InitMode::Svd, rng);
    Matrix ws = compose_student_weight(f, t);
    // P_left^T * W_s * P_right^T reproduces the Eckart-Young truncation.
    Matrix lifted = matmul(matmul(transpose(f.p_left), ws), transpose(f.p_right));
    auto [wr, err] = truncate_rank(t, 4);
    CHECK(frobenius_norm(sub(lifted, wr)) < 1e-8);
}

TEST_CASE("random-orthonormal init has orthonormal factors") {
    RngState rng(15);
    Matrix t = random_gaussian(rng, 10, 6);
    LowRankFactors f = init_projections(t, 3, InitMode::RandomOrthonormal, rng);
    Matrix gl = matmul(f.p_left, transpose(f.p_left));
    Matrix gr = matmul(transpose(f.p_right), f.p_right);
    CHECK(frobenius_norm(sub(gl, Matrix::identity(3))) < 1e-10);
    CHECK(frobenius_norm(sub(gr, Matrix::identity(3))) < 1e-10);
}

TEST_CASE("compose with identity projections returns teacher") {
    RngState rng(17);
    Matrix t = random_gaussian(rng, 5, 5);
    LowRankFactors f;
    f.rank = 5;
    f.teacher_rows = f.teacher_cols = 5;
    f.p_left = Matrix::identity(5);
    f.p_right = Matrix::identity(5);
    Matrix ws = compose_student_weight(f, t);
    for (std::size_t i = 0; i < t.v.size(); ++i) CHECK(ws.v[i] == t.v[i]);
}

TEST_CASE("compose with zero left factor annihilates") {
    RngState rng(19);
    Matrix t = random_gaussian(rng, 6, 6);
    LowRankFactors f;
    f.rank = 2;
    f.teacher_rows = f.teacher_cols = 6;
    f.p_left = Matrix(2, 6);
    RngState r2(20);
    f.p_right = random_gaussian(r2, 6, 2);
    Matrix ws = compose_student_weight(f, t);
    CHECK(frobenius_norm(ws) == 0.0);
}

TEST_CASE("compose matches two-step oracle") {
    RngState rng(21);
    Matrix t = random_gaussian(rng, 8, 8);
    LowRankFactors f;
    f.rank = 3;
    f.teacher_rows = f.teacher_cols = 8;
    f.p_left = random_gaussian(rng, 3, 8);
    f.p_right = random_gaussian(rng, 8, 3);
    Matrix ws = compose_student_weight(f, t);
    Matrix expect = oracle::matmul(oracle::matmul(f.p_left, t), f.p_right);
    double worst = 0.0;
    for (std::size_t i = 0; i < ws.v.size(); ++i)
        worst = std::max(worst, std::abs(ws.v[i] - expect.v[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("projection gradients: zero upstream") {
    RngState rng(23);
    Matrix t = random_gaussian(rng, 6, 6);
    LowRankFactors f = init_projections(t, 2, InitMode::Svd, rng);
    auto [gl, gr] = projection_gradients(Matrix(2, 2), t, f);
    CHECK(frobenius_norm(gl) == 0.0);
    CHECK(frobenius_norm(gr) == 0.0);
}

TEST_CASE("projection gradients: scalar product rule") {
    Matrix t(1, 1), gw(1, 1);
    t(0, 0) = 2.0;
    gw(0, 0) = 1.0;  // loss = W_s
    LowRankFactors f;
    f.rank = 1;
    f.teacher_rows = f.teacher_cols = 1;
    f.p_left = Matrix(1, 1);
    f.p_right = Matrix(1, 1);
    f.p_left(0, 0) = 3.0;
    f.p_right(0, 0) = 5.0;
    auto [gl, gr] = projection_gradients(gw, t, f);
    CHECK(gl(0, 0) == doctest::Approx(10.0));
    CHECK(gr(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("projection gradients match finite differences") {
    RngState rng(29);
    int checked = 0;
    for (int cfg = 0; cfg < 50; ++cfg) {
        std::size_t m = 2 + rng.next_range(6);
        std::size_t n = 2 + rng.next_range(6);
        std::size_t r = 1 + rng.next_range(std::min(m, n));
        Matrix t = random_gaussian(rng, m, n);
        LowRankFactors f = init_projections(t, r, InitMode::RandomOrthonormal, rng);
        Matrix target = random_gaussian(rng, r, r);

        // loss = 0.5 || compose(f) - target ||_F^2 as a function of the
        // flattened (p_left, p_right) vector.
        auto pack = [&](const LowRankFactors& g) {
            std::vector<double> x = g.p_left.v;
            x.insert(x.end(), g.p_right.v.begin(), g.p_right.v.end());
            return x;
        };
        auto loss = [&](const std::vector<double>& x) {
            LowRankFactors g = f;
            std::copy(x.begin(), x.begin() + f.p_left.v.size(), g.p_left.v.begin());
            std::copy(x.begin() + f.p_left.v.size(), x.end(), g.p_right.v.begin());
            Matrix d = sub(compose_student_weight(g, t), target);
            return 0.5 * dot(d, d);
        };
        Matrix grad_ws = sub(compose_student_weight(f, t), target);
        auto [gl, gr] = projection_gradients(grad_ws, t, f);
        std::vector<double> analytic = gl.v;
        analytic.insert(analytic.end(), gr.v.begin(), gr.v.end());
        auto fd = oracle::central_diff(loss, pack(f), 1e-6);
        CHECK(oracle::max_rel_err(analytic, fd) < 1e-6);
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("approximation profile of exactly low-rank teachers") {
    RngState rng(31);
    std::vector<Matrix> layers;
    for (int l = 0; l < 3; ++l)
        layers.push_back(random_rank_k(rng, 9, 7, {4.0, 2.0}));
    ApproxReport rep = approximation_error_profile(layers, {2});
    for (double e : rep.per_layer) CHECK(e < 1e-8);
    CHECK(rep.total < 1e-7);
}

TEST_CASE("approximation profile sums per-layer tail norms") {
    std::vector<Matrix> layers = {diag({3, 2, 1}), diag({4, 1, 0})};
    ApproxReport rep = approximation_error_profile(layers, {2});
    CHECK(rep.per_layer[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.per_layer[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(rep.total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("approximation error non-increasing in rank") {
    RngState rng(37);
    for (int t = 0; t < 10; ++t) {
        std::vector<Matrix> layers = {random_gaussian(rng, 10, 8),
                                      random_gaussian(rng, 8, 8)};
        double prev = -1.0;
        for (std::size_t r = 1; r <= 8; ++r) {
            ApproxReport rep = approximation_error_profile(layers, {r});
            if (prev >= 0.0) CHECK(rep.total <= prev + 1e-10);
            prev = rep.total;
        }
    }
}

TEST_CASE("profile rejects oversized rank") {
    std::vector<Matrix> layers = {diag({1, 2})};
    CHECK_THROWS_AS(approximation_error_profile(layers, {3}), InvalidArgument);
}

}  // TEST_SUITE
