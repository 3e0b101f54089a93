#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lrc/distill.hpp"
#include "lrc/model.hpp"
#include "oracles.hpp"

using namespace lrc;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.vocab_size = 11;
    cfg.num_layers = 2;
    cfg.hidden_dim = 8;
    cfg.num_heads = 2;
    cfg.seq_len = 8;
    cfg.ffn_mult = 4;
    return cfg;
}

Batch tiny_batch(const ModelConfig& cfg, RngState& rng, std::size_t bsz,
                 std::size_t seq) {
    Batch b;
    for (std::size_t i = 0; i < bsz; ++i) {
        std::vector<int> in(seq), tg(seq);
        for (auto& t : in) t = static_cast<int>(rng.next_range(cfg.vocab_size));
        for (auto& t : tg) t = static_cast<int>(rng.next_range(cfg.vocab_size));
        b.inputs.push_back(in);
        b.targets.push_back(tg);
    }
    return b;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    REQUIRE(a.same_shape(b));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i)
        worst = std::max(worst, std::abs(a.v[i] - b.v[i]));
    return worst;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("zero-weight forward reduces to the embedding pathway") {
    ModelConfig cfg = tiny_config();
    RngState rng(1);
    TeacherModel t = init_teacher(cfg, rng);
    // Zero everything except the token embedding.
    for (auto& [name, m] : teacher_param_refs(t))
        if (name != "tok_emb") m->fill(0.0);
    // Keep norms active so the pathway is well-defined.
    for (auto& l : t.w.layers) {
        l.ln1_g.fill(1.0);
        l.ln2_g.fill(1.0);
    }
    t.w.lnf_g.fill(1.0);

    ActivationTrace tr = teacher_forward(t, {3});
    // With a zero head the logits vanish identically.
    for (double x : tr.logits.v) CHECK(x == 0.0);

    // With a nonzero head the logits equal layernorm(embedding row) * head,
    // computed by hand: attention and FFN contribute nothing.
    RngState rng2(2);
    t.w.head = random_gaussian(rng2, cfg.hidden_dim, cfg.vocab_size);
    ActivationTrace tr2 = teacher_forward(t, {3});
    const std::size_t d = cfg.hidden_dim;
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = t.w.tok_emb(3, j);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    for (std::size_t j = 0; j < cfg.vocab_size; ++j) {
        double expect = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            expect += (x[k] - mean) / std::sqrt(var + 1e-8) * t.w.head(k, j);
        CHECK(tr2.logits(0, j) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("attention rows are normalized and causal") {
    ModelConfig cfg = tiny_config();
    RngState rng(3);
    TeacherModel t = init_teacher(cfg, rng);
    std::vector<int> tokens = {1, 4, 2, 7, 0, 3};

    engine::CacheHandle cache;
    engine::forward(t.w, teacher_dims(cfg), tokens, cache.c);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        for (std::size_t h = 0; h < cfg.num_heads; ++h) {
            Matrix p = engine::attention_probs(*cache.c, l, h);
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j <= i; ++j) row += p(i, j);
                CHECK(std::abs(row - 1.0) < 1e-12);
                for (std::size_t j = i + 1; j < tokens.size(); ++j) CHECK(p(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("causal mask: suffix perturbation leaves prefix logits bit-identical") {
    ModelConfig cfg = tiny_config();
    RngState rng(5);
    TeacherModel t = init_teacher(cfg, rng);
    std::vector<int> a = {1, 4, 2, 7, 0, 3, 5, 6};
    std::vector<int> b = a;
    const std::size_t flip = 5;
    b[flip] = (a[flip] + 1) % static_cast<int>(cfg.vocab_size);
    Matrix la = teacher_forward(t, a).logits;
    Matrix lb = teacher_forward(t, b).logits;
    for (std::size_t i = 0; i < flip; ++i)
        for (std::size_t j = 0; j < cfg.vocab_size; ++j) CHECK(la(i, j) == lb(i, j));
    // And the perturbed position itself differs.
    double diff = 0.0;
    for (std::size_t j = 0; j < cfg.vocab_size; ++j)
        diff = std::max(diff, std::abs(la(flip, j) - lb(flip, j)));
    CHECK(diff > 0.0);
}

TEST_CASE("layer norm output is standardized pre-gain") {
    ModelConfig cfg = tiny_config();
    RngState rng(7);
    TeacherModel t = init_teacher(cfg, rng);
    std::vector<int> tokens = {2, 9, 4, 4, 1};
    engine::CacheHandle cache;
    engine::forward(t.w, teacher_dims(cfg), tokens, cache.c);
    ActivationTrace tr = teacher_forward(t, tokens);
    // Reconstruct xhat from a block output via the next layer's saved stats:
    // use the final norm instead (same code path), checking mean/var of the
    // normalized activations through trace.h and fresh normalization.
    for (const Matrix& hmat : tr.h) {
        for (std::size_t i = 0; i < hmat.rows; ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < hmat.cols; ++j) mean += hmat(i, j);
            mean /= static_cast<double>(hmat.cols);
            double var = 0.0;
            for (std::size_t j = 0; j < hmat.cols; ++j) {
                double c = hmat(i, j) - mean;
                var += c * c;
            }
            var /= static_cast<double>(hmat.cols);
            double inv = 1.0 / std::sqrt(var + 1e-8);
            double m2 = 0.0, v2 = 0.0;
            for (std::size_t j = 0; j < hmat.cols; ++j) m2 += (hmat(i, j) - mean) * inv;
            m2 /= static_cast<double>(hmat.cols);
            for (std::size_t j = 0; j < hmat.cols; ++j) {
                double c = (hmat(i, j) - mean) * inv - m2;
                v2 += c * c;
            }
            v2 /= static_cast<double>(hmat.cols);
            CHECK(std::abs(m2) < 1e-6);
            CHECK(std::abs(v2 - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("token id validation") {
    ModelConfig cfg = tiny_config();
    RngState rng(9);
    TeacherModel t = init_teacher(cfg, rng);
    CHECK_THROWS_AS(teacher_forward(t, {static_cast<int>(cfg.vocab_size)}),
                    InvalidArgument);
    CHECK_THROWS_AS(teacher_forward(t, std::vector<int>(cfg.seq_len + 1, 0)),
                    InvalidArgument);
}

TEST_CASE("full-rank identity student reproduces teacher bit-for-bit") {
    ModelConfig cfg = tiny_config();
    RngState rng(11);
    TeacherModel t = init_teacher(cfg, rng);
    RngState rng2(12);
    StudentModel s = init_student(t, cfg.hidden_dim, StudentInit::Identity, rng2);
    std::vector<int> tokens = {1, 5, 3, 8, 2};
    Matrix lt = teacher_forward(t, tokens).logits;
    Matrix ls = student_forward(s, t, tokens).logits;
    REQUIRE(lt.same_shape(ls));
    for (std::size_t i = 0; i < lt.v.size(); ++i) CHECK(lt.v[i] == ls.v[i]);
}

TEST_CASE("student forward is deterministic and well-shaped") {
    ModelConfig cfg = tiny_config();
    RngState rng(13);
    TeacherModel t = init_teacher(cfg, rng);
    RngState ra(14), rb(14);
    StudentModel sa = init_student(t, 4, StudentInit::Svd, ra);
    StudentModel sb = init_student(t, 4, StudentInit::Svd, rb);
    std::vector<int> tokens = {0, 1, 2, 3, 4, 5, 6, 7};
    ActivationTrace ta = student_forward(sa, t, tokens);
    ActivationTrace tb = student_forward(sb, t, tokens);
    CHECK(max_abs_diff(ta.logits, tb.logits) == 0.0);
    REQUIRE(ta.h.size() == cfg.num_layers);
    REQUIRE(ta.a.size() == cfg.num_layers);
    for (const Matrix& hmat : ta.h) {
        CHECK(hmat.rows == tokens.size());
        CHECK(hmat.cols == 4);
    }
    for (double x : ta.logits.v) CHECK(std::isfinite(x));
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
    ModelConfig cfg = tiny_config();
    RngState rng(15);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    std::vector<int> tokens = {1, 2, 3};
    LossGrads lg;
    lg.dlogits = Matrix(tokens.size(), cfg.vocab_size);
    auto grads = student_backward(s, t, tokens, lg);
    for (const Matrix& g : grads) CHECK(frobenius_norm(g) == 0.0);
}

TEST_CASE("teacher stays frozen through student training steps") {
    ModelConfig cfg = tiny_config();
    RngState rng(17);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    Batch b = tiny_batch(cfg, rng, 2, 6);
    std::vector<double> before;
    for (auto& [name, m] : teacher_param_refs(t))
        before.insert(before.end(), m->v.begin(), m->v.end());
    StepResult step = distill_loss_and_grads(s, t, b, {});
    auto refs = student_param_refs(s);
    for (std::size_t i = 0; i < refs.size(); ++i)
        add_inplace(*refs[i].second, step.grads[i], -0.05);
    std::vector<double> after;
    for (auto& [name, m] : teacher_param_refs(t))
        after.insert(after.end(), m->v.begin(), m->v.end());
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
}

TEST_CASE("student gradients match finite differences") {
    ModelConfig cfg = tiny_config();
    RngState rng(19);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    Batch b = tiny_batch(cfg, rng, 2, 5);
    DistillSettings ds;
    ds.lambda = 0.7;
    ds.tau = 2.0;
    double err = grad_check(s, t, b, 1e-5, ds);
    CHECK(err < 1e-5);
}

TEST_CASE("teacher gradients match finite differences") {
    ModelConfig cfg = tiny_config();
    cfg.num_layers = 1;
    RngState rng(21);
    TeacherModel t = init_teacher(cfg, rng);
    Batch b = tiny_batch(cfg, rng, 2, 4);
    TeacherStepResult step = teacher_loss_and_grads(t, b);
    auto refs = teacher_param_refs(t);
    std::vector<double> analytic;
    for (const Matrix& g : step.grads)
        analytic.insert(analytic.end(), g.v.begin(), g.v.end());
    // Flatten, perturb, recompute.
    std::vector<double> theta;
    for (auto& [name, m] : refs) theta.insert(theta.end(), m->v.begin(), m->v.end());
    auto loss_at = [&](const std::vector<double>& x) {
        std::size_t off = 0;
        for (auto& [name, m] : refs) {
            std::copy(x.begin() + static_cast<std::ptrdiff_t>(off),
                      x.begin() + static_cast<std::ptrdiff_t>(off + m->v.size()),
                      m->v.begin());
            off += m->v.size();
        }
        return teacher_loss(t, b);
    };
    auto fd = oracle::central_diff(loss_at, theta, 1e-5);
    loss_at(theta);  // restore
    CHECK(oracle::max_rel_err(analytic, fd) < 1e-5);
}

TEST_CASE("grad check error scales with h^2") {
    ModelConfig cfg = tiny_config();
    cfg.num_layers = 1;
    RngState rng(23);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 2, StudentInit::Svd, rng);
    Batch b = tiny_batch(cfg, rng, 1, 4);
    double e3 = grad_check(s, t, b, 1e-3);
    double e4 = grad_check(s, t, b, 1e-4);
    double e5 = grad_check(s, t, b, 1e-5);
    CHECK(e3 > e4);
    CHECK(e4 > e5);
}

TEST_CASE("parameter compression matches the r(m+n) accounting") {
    ModelConfig cfg;
    cfg.vocab_size = 64;
    cfg.num_layers = 2;
    cfg.hidden_dim = 32;
    cfg.num_heads = 4;
    cfg.seq_len = 64;
    RngState rng(25);
    TeacherModel t = init_teacher(cfg, rng);
    for (std::size_t r : {2u, 4u, 8u}) {
        StudentModel s = init_student(t, r, StudentInit::Svd, rng);
        // Attention projections compose to r x r; their factor pairs must
        // count exactly r(m+n) vs the teacher's m*n.
        const double d = static_cast<double>(cfg.hidden_dim);
        for (const auto& lf : s.layers) {
            for (const LowRankFactors* f : {&lf.q, &lf.k, &lf.v, &lf.o}) {
                double stored = static_cast<double>(f->p_left.size() + f->p_right.size());
                double expect = static_cast<double>(r) * (d + d);
                CHECK(std::abs(stored / expect - 1.0) < 0.02);
            }
        }
        // Whole-model count (layer norms excluded) stays below the teacher's.
        auto srefs = student_param_refs(s);
        auto trefs = teacher_param_refs(t);
        std::size_t s_count = 0, t_count = 0;
        for (auto& [name, m] : srefs)
            if (name.find("ln") == std::string::npos) s_count += m->size();
        for (auto& [name, m] : trefs)
            if (name.find("ln") == std::string::npos) t_count += m->size();
        CHECK(s_count < t_count);
    }
}

TEST_CASE("checkpoint round trip reproduces logits") {
    ModelConfig cfg = tiny_config();
    RngState rng(27);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 4, StudentInit::Svd, rng);
    std::string tp = "/tmp/lrc_test_teacher.ckpt";
    std::string sp = "/tmp/lrc_test_student.ckpt";
    save_teacher(t, tp);
    save_student(s, sp);
    TeacherModel t2 = load_teacher(tp);
    StudentModel s2 = load_student(sp);
    std::vector<int> tokens = {3, 1, 4, 1, 5};
    CHECK(max_abs_diff(teacher_forward(t, tokens).logits,
                       teacher_forward(t2, tokens).logits) == 0.0);
    CHECK(max_abs_diff(student_forward(s, t, tokens).logits,
                       student_forward(s2, t2, tokens).logits) == 0.0);
    std::remove(tp.c_str());
    std::remove(sp.c_str());
}

TEST_CASE("checkpoint bytes are deterministic") {
    ModelConfig cfg = tiny_config();
    RngState ra(29), rb(29);
    TeacherModel a = init_teacher(cfg, ra);
    TeacherModel b = init_teacher(cfg, rb);
    std::string pa = "/tmp/lrc_det_a.ckpt", pb = "/tmp/lrc_det_b.ckpt";
    save_teacher(a, pa);
    save_teacher(b, pb);
    std::ifstream fa(pa, std::ios::binary), fb(pb, std::ios::binary);
    std::vector<char> ba((std::istreambuf_iterator<char>(fa)),
                         std::istreambuf_iterator<char>());
    std::vector<char> bb((std::istreambuf_iterator<char>(fb)),
                         std::istreambuf_iterator<char>());
    CHECK(ba == bb);
    CHECK(!ba.empty());
    std::remove(pa.c_str());
    std::remove(pb.c_str());
}

}  // TEST_SUITE
