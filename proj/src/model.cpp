#include "lrc/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

namespace lrc {

void ModelConfig::validate() const {
    require(vocab_size >= 2, "config: vocab_size must be >= 2");
    require(num_layers >= 1, "config: num_layers must be >= 1");
    require(seq_len >= 1, "config: seq_len must be >= 1");
    require(num_heads >= 1 && hidden_dim % num_heads == 0,
            "config: hidden_dim must be divisible by num_heads");
    require(ffn_mult >= 1, "config: ffn_mult must be >= 1");
}

Dims teacher_dims(const ModelConfig& cfg) {
    return {cfg.vocab_size, cfg.num_layers, cfg.hidden_dim,
            cfg.hidden_dim * cfg.ffn_mult, cfg.num_heads, cfg.seq_len};
}

std::size_t student_heads(const ModelConfig& cfg, std::size_t rank) {
    std::size_t h = std::min(cfg.num_heads, rank);
    while (rank % h != 0) --h;
    return h;
}

Dims student_dims(const ModelConfig& cfg, std::size_t rank) {
    return {cfg.vocab_size, cfg.num_layers, rank, rank * cfg.ffn_mult,
            student_heads(cfg, rank), cfg.seq_len};
}

namespace {

constexpr double kLnEps = 1e-8;

Matrix gaussian_scaled(RngState& rng, std::size_t r, std::size_t c, double std) {
    Matrix m = random_gaussian(rng, r, c);
    for (double& x : m.v) x *= std;
    return m;
}

Matrix ones_row(std::size_t n) {
    Matrix m(1, n);
    m.fill(1.0);
    return m;
}

ConcreteWeights zero_weights(const Dims& d) {
    ConcreteWeights w;
    w.tok_emb = Matrix(d.vocab, d.dim);
    w.pos_emb = Matrix(d.seq_len, d.dim);
    w.layers.resize(d.layers);
    for (auto& l : w.layers) {
        l.wq = Matrix(d.dim, d.dim);
        l.wk = Matrix(d.dim, d.dim);
        l.wv = Matrix(d.dim, d.dim);
        l.wo = Matrix(d.dim, d.dim);
        l.w1 = Matrix(d.dim, d.ffn);
        l.w2 = Matrix(d.ffn, d.dim);
        l.ln1_g = Matrix(1, d.dim);
        l.ln1_b = Matrix(1, d.dim);
        l.ln2_g = Matrix(1, d.dim);
        l.ln2_b = Matrix(1, d.dim);
    }
    w.lnf_g = Matrix(1, d.dim);
    w.lnf_b = Matrix(1, d.dim);
    w.head = Matrix(d.dim, d.vocab);
    return w;
}

// out = g .* (x - mean)/sqrt(var + eps) + b, rowwise; xhat and inv_std saved.
Matrix layernorm_fwd(const Matrix& x, const Matrix& g, const Matrix& b, Matrix& xhat,
                     std::vector<double>& inv_std) {
    const std::size_t n = x.rows, d = x.cols;
    xhat = Matrix(n, d);
    inv_std.assign(n, 0.0);
    Matrix out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += x(i, j);
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double c = x(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        double is = 1.0 / std::sqrt(var + kLnEps);
        inv_std[i] = is;
        for (std::size_t j = 0; j < d; ++j) {
            xhat(i, j) = (x(i, j) - mean) * is;
            out(i, j) = g(0, j) * xhat(i, j) + b(0, j);
        }
    }
    return out;
}

Matrix layernorm_bwd(const Matrix& dout, const Matrix& xhat,
                     const std::vector<double>& inv_std, const Matrix& g, Matrix& dg,
                     Matrix& db) {
    const std::size_t n = dout.rows, d = dout.cols;
    Matrix dx(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double dxh = dout(i, j) * g(0, j);
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xhat(i, j);
            dg(0, j) += dout(i, j) * xhat(i, j);
            db(0, j) += dout(i, j);
        }
        mean_dxhat /= static_cast<double>(d);
        mean_dxhat_xhat /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
            double dxh = dout(i, j) * g(0, j);
            dx(i, j) = inv_std[i] * (dxh - mean_dxhat - xhat(i, j) * mean_dxhat_xhat);
        }
    }
    return dx;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_prime(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
           x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

}  // namespace

namespace engine {

struct LayerCache {
    Matrix x_in;
    Matrix xhat1, n1;
    std::vector<double> inv_std1;
    Matrix q, k, v;
    std::vector<Matrix> probs;  // per head, seq x seq, zero above diagonal
    Matrix ctx;
    Matrix attn;
    Matrix x2;
    Matrix xhat2, n2;
    std::vector<double> inv_std2;
    Matrix f1, act;
    Matrix x3;
};

struct Cache {
    std::vector<LayerCache> layers;
    Matrix x_last;
    Matrix xhatf, nf;
    std::vector<double> inv_stdf;
};

Cache* new_cache() { return new Cache(); }
void free_cache(Cache* c) { delete c; }

Matrix attention_probs(const Cache& cache, std::size_t layer, std::size_t head) {
    require(layer < cache.layers.size(), "attention_probs: layer out of range");
    require(head < cache.layers[layer].probs.size(), "attention_probs: head out of range");
    return cache.layers[layer].probs[head];
}

ActivationTrace forward(const ConcreteWeights& w, const Dims& d,
                        const std::vector<int>& tokens, Cache* cache) {
    const std::size_t seq = tokens.size();
    require(seq >= 1 && seq <= d.seq_len, "forward: sequence length out of range");
    for (int t : tokens)
        require(t >= 0 && static_cast<std::size_t>(t) < d.vocab,
                "forward: token id out of range");
    const std::size_t hd = d.dim / d.heads;
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

    Cache local;
    Cache& c = cache ? *cache : local;
    c.layers.assign(d.layers, LayerCache{});

    Matrix x(seq, d.dim);
    for (std::size_t i = 0; i < seq; ++i)
        for (std::size_t j = 0; j < d.dim; ++j)
            x(i, j) = w.tok_emb(static_cast<std::size_t>(tokens[i]), j) + w.pos_emb(i, j);

    ActivationTrace trace;
    trace.h.reserve(d.layers);
    trace.a.reserve(d.layers);

    for (std::size_t l = 0; l < d.layers; ++l) {
        LayerCache& lc = c.layers[l];
        const LayerWeights& lw = w.layers[l];
        lc.x_in = x;
        lc.n1 = layernorm_fwd(x, lw.ln1_g, lw.ln1_b, lc.xhat1, lc.inv_std1);
        lc.q = matmul(lc.n1, lw.wq);
        lc.k = matmul(lc.n1, lw.wk);
        lc.v = matmul(lc.n1, lw.wv);

        lc.probs.assign(d.heads, Matrix(seq, seq));
        lc.ctx = Matrix(seq, d.dim);
#pragma omp parallel for schedule(static) if (d.heads * seq * seq * hd > 65536)
        for (std::ptrdiff_t hh = 0; hh < static_cast<std::ptrdiff_t>(d.heads); ++hh) {
            const std::size_t h = static_cast<std::size_t>(hh);
            const std::size_t off = h * hd;
            Matrix& p = lc.probs[h];
            for (std::size_t i = 0; i < seq; ++i) {
                // Causal scores over j <= i, stable softmax.
                double maxs = -1e300;
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (std::size_t t = 0; t < hd; ++t)
                        s += lc.q(i, off + t) * lc.k(j, off + t);
                    s *= inv_sqrt_hd;
                    p(i, j) = s;
                    maxs = std::max(maxs, s);
                }
                double z = 0.0;
                for (std::size_t j = 0; j <= i; ++j) {
                    p(i, j) = std::exp(p(i, j) - maxs);
                    z += p(i, j);
                }
                for (std::size_t j = 0; j <= i; ++j) p(i, j) /= z;
                for (std::size_t t = 0; t < hd; ++t) {
                    double s = 0.0;
                    for (std::size_t j = 0; j <= i; ++j) s += p(i, j) * lc.v(j, off + t);
                    lc.ctx(i, off + t) = s;
                }
            }
        }
        lc.attn = matmul(lc.ctx, lw.wo);
        trace.a.push_back(lc.attn);

        lc.x2 = add(x, lc.attn);
        lc.n2 = layernorm_fwd(lc.x2, lw.ln2_g, lw.ln2_b, lc.xhat2, lc.inv_std2);
        lc.f1 = matmul(lc.n2, lw.w1);
        lc.act = lc.f1;
        for (double& v : lc.act.v) v = gelu(v);
        Matrix ffn_out = matmul(lc.act, lw.w2);
        lc.x3 = add(lc.x2, ffn_out);
        trace.h.push_back(lc.x3);
        x = lc.x3;
    }

    c.x_last = x;
    c.nf = layernorm_fwd(x, w.lnf_g, w.lnf_b, c.xhatf, c.inv_stdf);
    trace.logits = matmul(c.nf, w.head);
    check_finite(trace.logits, "forward logits");
    return trace;
}

ConcreteWeights backward(const ConcreteWeights& w, const Dims& d,
                         const std::vector<int>& tokens, const Cache& cache,
                         const LossGrads& grads) {
    const std::size_t seq = tokens.size();
    require(cache.layers.size() == d.layers, "backward: cache/layer mismatch");
    require(grads.dlogits.rows == seq && grads.dlogits.cols == d.vocab,
            "backward: dlogits shape mismatch");
    require(grads.dh.empty() || grads.dh.size() == d.layers,
            "backward: dh layer count mismatch");
    require(grads.da.empty() || grads.da.size() == d.layers,
            "backward: da layer count mismatch");
    const std::size_t hd = d.dim / d.heads;
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

    ConcreteWeights g = zero_weights(d);

    // Head and final norm.
    g.head = matmul(transpose(cache.nf), grads.dlogits);
    Matrix dnf = matmul(grads.dlogits, transpose(w.head));
    Matrix dx = layernorm_bwd(dnf, cache.xhatf, cache.inv_stdf, w.lnf_g, g.lnf_g, g.lnf_b);

    for (std::size_t l = d.layers; l-- > 0;) {
        const LayerCache& lc = cache.layers[l];
        const LayerWeights& lw = w.layers[l];
        LayerWeights& lg = g.layers[l];

        Matrix dx3 = dx;
        if (!grads.dh.empty() && grads.dh[l].rows > 0) add_inplace(dx3, grads.dh[l]);

        // FFN sublayer.
        Matrix dffn = dx3;
        Matrix dact = matmul(dffn, transpose(lw.w2));
        lg.w2 = matmul(transpose(lc.act), dffn);
        Matrix df1 = dact;
        for (std::size_t i = 0; i < df1.v.size(); ++i) df1.v[i] *= gelu_prime(lc.f1.v[i]);
        lg.w1 = matmul(transpose(lc.n2), df1);
        Matrix dn2 = matmul(df1, transpose(lw.w1));
        Matrix dx2 = dx3;
        add_inplace(dx2, layernorm_bwd(dn2, lc.xhat2, lc.inv_std2, lw.ln2_g, lg.ln2_g,
                                       lg.ln2_b));

        // Attention sublayer.
        Matrix dattn = dx2;
        if (!grads.da.empty() && grads.da[l].rows > 0) add_inplace(dattn, grads.da[l]);
        lg.wo = matmul(transpose(lc.ctx), dattn);
        Matrix dctx = matmul(dattn, transpose(lw.wo));

        Matrix dq(seq, d.dim), dk(seq, d.dim), dv(seq, d.dim);
#pragma omp parallel for schedule(static) if (d.heads * seq * seq * hd > 65536)
        for (std::ptrdiff_t hh = 0; hh < static_cast<std::ptrdiff_t>(d.heads); ++hh) {
            const std::size_t h = static_cast<std::size_t>(hh);
            const std::size_t off = h * hd;
            const Matrix& p = lc.probs[h];
            Matrix dscore(seq, seq);
            for (std::size_t i = 0; i < seq; ++i) {
                double dot_pp = 0.0;
                for (std::size_t j = 0; j <= i; ++j) {
                    double dp = 0.0;
                    for (std::size_t t = 0; t < hd; ++t)
                        dp += dctx(i, off + t) * lc.v(j, off + t);
                    dscore(i, j) = dp;
                    dot_pp += p(i, j) * dp;
                }
                for (std::size_t j = 0; j <= i; ++j)
                    dscore(i, j) = p(i, j) * (dscore(i, j) - dot_pp);
            }
            for (std::size_t j = 0; j < seq; ++j) {
                for (std::size_t t = 0; t < hd; ++t) {
                    double sv = 0.0, sk = 0.0;
                    for (std::size_t i = j; i < seq; ++i) {
                        sv += p(i, j) * dctx(i, off + t);
                        sk += dscore(i, j) * lc.q(i, off + t);
                    }
                    dv(j, off + t) = sv;
                    dk(j, off + t) = sk * inv_sqrt_hd;
                }
            }
            for (std::size_t i = 0; i < seq; ++i) {
                for (std::size_t t = 0; t < hd; ++t) {
                    double sq = 0.0;
                    for (std::size_t j = 0; j <= i; ++j)
                        sq += dscore(i, j) * lc.k(j, off + t);
                    dq(i, off + t) = sq * inv_sqrt_hd;
                }
            }
        }

        lg.wq = matmul(transpose(lc.n1), dq);
        lg.wk = matmul(transpose(lc.n1), dk);
        lg.wv = matmul(transpose(lc.n1), dv);
        Matrix dn1 = matmul(dq, transpose(lw.wq));
        add_inplace(dn1, matmul(dk, transpose(lw.wk)));
        add_inplace(dn1, matmul(dv, transpose(lw.wv)));
        dx = dx2;
        add_inplace(dx, layernorm_bwd(dn1, lc.xhat1, lc.inv_std1, lw.ln1_g, lg.ln1_g,
                                      lg.ln1_b));
    }

    // Embedding scatter; serial so duplicate token rows accumulate in order.
    for (std::size_t i = 0; i < seq; ++i) {
        const std::size_t t = static_cast<std::size_t>(tokens[i]);
        for (std::size_t j = 0; j < d.dim; ++j) {
            g.tok_emb(t, j) += dx(i, j);
            g.pos_emb(i, j) += dx(i, j);
        }
    }
    return g;
}

}  // namespace engine

TeacherModel init_teacher(const ModelConfig& cfg, RngState& rng) {
    cfg.validate();
    Dims d = teacher_dims(cfg);
    TeacherModel t;
    t.cfg = cfg;
    t.w = zero_weights(d);
    t.w.tok_emb = gaussian_scaled(rng, d.vocab, d.dim, 0.1);
    t.w.pos_emb = gaussian_scaled(rng, d.seq_len, d.dim, 0.1);
    for (auto& l : t.w.layers) {
        l.wq = gaussian_scaled(rng, d.dim, d.dim, 0.1);
        l.wk = gaussian_scaled(rng, d.dim, d.dim, 0.1);
        l.wv = gaussian_scaled(rng, d.dim, d.dim, 0.1);
        l.wo = gaussian_scaled(rng, d.dim, d.dim, 0.1);
        l.w1 = gaussian_scaled(rng, d.dim, d.ffn, 0.1);
        l.w2 = gaussian_scaled(rng, d.ffn, d.dim, 0.1);
        l.ln1_g = ones_row(d.dim);
        l.ln2_g = ones_row(d.dim);
    }
    t.w.lnf_g = ones_row(d.dim);
    t.w.head = gaussian_scaled(rng, d.dim, d.vocab, 0.1);
    return t;
}

namespace {

LowRankFactors identity_factors(std::size_t m, std::size_t n) {
    LowRankFactors f;
    f.rank = std::min(m, n);
    f.teacher_rows = m;
    f.teacher_cols = n;
    f.p_left = Matrix::identity(m);
    f.p_right = Matrix::identity(n);
    return f;
}

// Rectangular variant of the svd/random initializer: p_left from the top
// r_out left singular vectors, p_right from the top r_in right ones. Slots
// beyond the spectrum length are zero; they receive gradients and wake up
// during training.
LowRankFactors init_factors_rect(const Matrix& teacher, std::size_t r_out,
                                 std::size_t r_in, StudentInit mode, RngState& rng) {
    const std::size_t m = teacher.rows, n = teacher.cols;
    require(r_out <= m && r_in <= n, "init_factors_rect: rank out of range");
    LowRankFactors f;
    f.rank = r_out;
    f.teacher_rows = m;
    f.teacher_cols = n;
    if (mode == StudentInit::Svd) {
        SvdFactors d = svd(teacher);
        f.p_left = Matrix(r_out, m);
        for (std::size_t i = 0; i < r_out; ++i)
            for (std::size_t j = 0; j < m; ++j)
                f.p_left(i, j) = i < d.s.size() ? d.u(j, i) : 0.0;
        f.p_right = Matrix(n, r_in);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < r_in; ++j)
                f.p_right(i, j) = j < d.s.size() ? d.v(i, j) : 0.0;
    } else {
        f.p_left = transpose(random_orthonormal(rng, m, r_out));
        f.p_right = random_orthonormal(rng, n, r_in);
    }
    return f;
}

Matrix top_right_vectors(const Matrix& a, std::size_t r) {
    SvdFactors f = svd(a);
    Matrix v(a.cols, r);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < r; ++j) v(i, j) = f.v(i, j);
    return v;
}

Matrix top_left_vectors(const Matrix& a, std::size_t r) {
    SvdFactors f = svd(a);
    Matrix u(a.rows, r);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < r; ++j) u(i, j) = f.u(i, j);
    return u;
}

}  // namespace

StudentModel init_student(const TeacherModel& teacher, std::size_t rank,
                          StudentInit mode, RngState& rng) {
    const ModelConfig& cfg = teacher.cfg;
    const std::size_t d = cfg.hidden_dim;
    require(rank >= 1 && rank <= d, "init_student: rank out of range");
    if (mode == StudentInit::Identity)
        require(rank == d, "init_student: identity mode requires rank == hidden_dim");

    StudentModel s;
    s.teacher_cfg = cfg;
    s.rank = rank;
    s.heads = student_heads(cfg, rank);
    const std::size_t ffn_t = d * cfg.ffn_mult;
    const std::size_t ffn_r = rank * cfg.ffn_mult;

    if (mode == StudentInit::Identity) {
        s.p_emb = Matrix::identity(d);
        s.p_pos = Matrix::identity(d);
        s.p_head = Matrix::identity(d);
    } else if (mode == StudentInit::Svd) {
        s.p_emb = top_right_vectors(teacher.w.tok_emb, rank);
        s.p_pos = top_right_vectors(teacher.w.pos_emb, rank);
        s.p_head = transpose(top_left_vectors(teacher.w.head, rank));
    } else {
        s.p_emb = random_orthonormal(rng, d, rank);
        s.p_pos = random_orthonormal(rng, d, rank);
        s.p_head = transpose(random_orthonormal(rng, d, rank));
    }

    s.layers.resize(cfg.num_layers);
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        auto& lf = s.layers[l];
        const LayerWeights& lw = teacher.w.layers[l];
        if (mode == StudentInit::Identity) {
            lf.q = identity_factors(d, d);
            lf.k = identity_factors(d, d);
            lf.v = identity_factors(d, d);
            lf.o = identity_factors(d, d);
            lf.f1 = identity_factors(d, ffn_t);
            lf.f2 = identity_factors(ffn_t, d);
            lf.ln1_g = lw.ln1_g;
            lf.ln1_b = lw.ln1_b;
            lf.ln2_g = lw.ln2_g;
            lf.ln2_b = lw.ln2_b;
            lf.up_h = Matrix::identity(d);
            lf.up_a = Matrix::identity(d);
        } else {
            InitMode im = mode == StudentInit::Svd ? InitMode::Svd
                                                   : InitMode::RandomOrthonormal;
            lf.q = init_projections(lw.wq, rank, im, rng);
            lf.k = init_projections(lw.wk, rank, im, rng);
            lf.v = init_projections(lw.wv, rank, im, rng);
            lf.o = init_projections(lw.wo, rank, im, rng);
            lf.f1 = init_factors_rect(lw.w1, rank, ffn_r, mode, rng);
            lf.f2 = init_factors_rect(lw.w2, ffn_r, rank, mode, rng);
            lf.ln1_g = ones_row(rank);
            lf.ln1_b = Matrix(1, rank);
            lf.ln2_g = ones_row(rank);
            lf.ln2_b = Matrix(1, rank);
            lf.up_h = random_orthonormal(rng, d, rank);
            lf.up_a = random_orthonormal(rng, d, rank);
        }
    }
    if (mode == StudentInit::Identity) {
        s.lnf_g = teacher.w.lnf_g;
        s.lnf_b = teacher.w.lnf_b;
    } else {
        s.lnf_g = ones_row(rank);
        s.lnf_b = Matrix(1, rank);
    }
    return s;
}

ConcreteWeights compose_student(const StudentModel& s, const TeacherModel& teacher) {
    Dims d = student_dims(s.teacher_cfg, s.rank);
    ConcreteWeights w;
    w.tok_emb = matmul(teacher.w.tok_emb, s.p_emb);
    w.pos_emb = matmul(teacher.w.pos_emb, s.p_pos);
    w.layers.resize(d.layers);
    for (std::size_t l = 0; l < d.layers; ++l) {
        const auto& lf = s.layers[l];
        const LayerWeights& lw = teacher.w.layers[l];
        LayerWeights& out = w.layers[l];
        out.wq = compose_student_weight(lf.q, lw.wq);
        out.wk = compose_student_weight(lf.k, lw.wk);
        out.wv = compose_student_weight(lf.v, lw.wv);
        out.wo = compose_student_weight(lf.o, lw.wo);
        out.w1 = compose_student_weight(lf.f1, lw.w1);
        out.w2 = compose_student_weight(lf.f2, lw.w2);
        out.ln1_g = lf.ln1_g;
        out.ln1_b = lf.ln1_b;
        out.ln2_g = lf.ln2_g;
        out.ln2_b = lf.ln2_b;
    }
    w.lnf_g = s.lnf_g;
    w.lnf_b = s.lnf_b;
    w.head = matmul(s.p_head, teacher.w.head);
    return w;
}

ActivationTrace teacher_forward(const TeacherModel& t, const std::vector<int>& tokens) {
    return engine::forward(t.w, teacher_dims(t.cfg), tokens);
}

ActivationTrace student_forward(const StudentModel& s, const TeacherModel& teacher,
                                const std::vector<int>& tokens) {
    ConcreteWeights w = compose_student(s, teacher);
    return engine::forward(w, student_dims(s.teacher_cfg, s.rank), tokens);
}

std::vector<Matrix> map_student_grads(const StudentModel& s, const TeacherModel& teacher,
                                      const ConcreteWeights& eg) {
    std::vector<Matrix> out;
    out.push_back(matmul(transpose(teacher.w.tok_emb), eg.tok_emb));  // p_emb
    out.push_back(matmul(transpose(teacher.w.pos_emb), eg.pos_emb));  // p_pos
    for (std::size_t l = 0; l < s.layers.size(); ++l) {
        const auto& lf = s.layers[l];
        const LayerWeights& lw = teacher.w.layers[l];
        auto push_pair = [&](const Matrix& gws, const Matrix& wt, const LowRankFactors& f) {
            auto [gl, gr] = projection_gradients(gws, wt, f);
            out.push_back(std::move(gl));
            out.push_back(std::move(gr));
        };
        push_pair(eg.layers[l].wq, lw.wq, lf.q);
        push_pair(eg.layers[l].wk, lw.wk, lf.k);
        push_pair(eg.layers[l].wv, lw.wv, lf.v);
        push_pair(eg.layers[l].wo, lw.wo, lf.o);
        push_pair(eg.layers[l].w1, lw.w1, lf.f1);
        push_pair(eg.layers[l].w2, lw.w2, lf.f2);
        out.push_back(eg.layers[l].ln1_g);
        out.push_back(eg.layers[l].ln1_b);
        out.push_back(eg.layers[l].ln2_g);
        out.push_back(eg.layers[l].ln2_b);
        out.push_back(Matrix(lf.up_h.rows, lf.up_h.cols));  // filled by the clone loss
        out.push_back(Matrix(lf.up_a.rows, lf.up_a.cols));
    }
    out.push_back(eg.lnf_g);
    out.push_back(eg.lnf_b);
    out.push_back(matmul(eg.head, transpose(teacher.w.head)));  // p_head
    return out;
}

std::vector<Matrix> student_backward(const StudentModel& s, const TeacherModel& teacher,
                                     const std::vector<int>& tokens,
                                     const LossGrads& grads) {
    ConcreteWeights w = compose_student(s, teacher);
    Dims d = student_dims(s.teacher_cfg, s.rank);
    engine::CacheHandle cache;
    engine::forward(w, d, tokens, cache.c);
    ConcreteWeights eg = engine::backward(w, d, tokens, *cache.c, grads);
    return map_student_grads(s, teacher, eg);
}

namespace {

template <typename M>
std::vector<std::pair<std::string, M*>> teacher_refs_impl(M& tok, M& pos,
                                                          auto& layers, M& lnf_g,
                                                          M& lnf_b, M& head) {
    std::vector<std::pair<std::string, M*>> refs;
    refs.emplace_back("tok_emb", &tok);
    refs.emplace_back("pos_emb", &pos);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        refs.emplace_back(p + "wq", &layers[l].wq);
        refs.emplace_back(p + "wk", &layers[l].wk);
        refs.emplace_back(p + "wv", &layers[l].wv);
        refs.emplace_back(p + "wo", &layers[l].wo);
        refs.emplace_back(p + "w1", &layers[l].w1);
        refs.emplace_back(p + "w2", &layers[l].w2);
        refs.emplace_back(p + "ln1_g", &layers[l].ln1_g);
        refs.emplace_back(p + "ln1_b", &layers[l].ln1_b);
        refs.emplace_back(p + "ln2_g", &layers[l].ln2_g);
        refs.emplace_back(p + "ln2_b", &layers[l].ln2_b);
    }
    refs.emplace_back("lnf_g", &lnf_g);
    refs.emplace_back("lnf_b", &lnf_b);
    refs.emplace_back("head", &head);
    return refs;
}

template <typename M, typename S>
std::vector<std::pair<std::string, M*>> student_refs_impl(S& s) {
    std::vector<std::pair<std::string, M*>> refs;
    refs.emplace_back("p_emb", &s.p_emb);
    refs.emplace_back("p_pos", &s.p_pos);
    for (std::size_t l = 0; l < s.layers.size(); ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        auto& lf = s.layers[l];
        auto pair = [&](const std::string& n, auto& f) {
            refs.emplace_back(p + n + ".p_left", &f.p_left);
            refs.emplace_back(p + n + ".p_right", &f.p_right);
        };
        pair("wq", lf.q);
        pair("wk", lf.k);
        pair("wv", lf.v);
        pair("wo", lf.o);
        pair("w1", lf.f1);
        pair("w2", lf.f2);
        refs.emplace_back(p + "ln1_g", &lf.ln1_g);
        refs.emplace_back(p + "ln1_b", &lf.ln1_b);
        refs.emplace_back(p + "ln2_g", &lf.ln2_g);
        refs.emplace_back(p + "ln2_b", &lf.ln2_b);
        refs.emplace_back(p + "up_h", &lf.up_h);
        refs.emplace_back(p + "up_a", &lf.up_a);
    }
    refs.emplace_back("lnf_g", &s.lnf_g);
    refs.emplace_back("lnf_b", &s.lnf_b);
    refs.emplace_back("p_head", &s.p_head);
    return refs;
}

}  // namespace

std::vector<std::pair<std::string, Matrix*>> teacher_param_refs(TeacherModel& t) {
    return teacher_refs_impl<Matrix>(t.w.tok_emb, t.w.pos_emb, t.w.layers, t.w.lnf_g,
                                     t.w.lnf_b, t.w.head);
}
std::vector<std::pair<std::string, const Matrix*>> teacher_param_refs(
    const TeacherModel& t) {
    return teacher_refs_impl<const Matrix>(t.w.tok_emb, t.w.pos_emb, t.w.layers,
                                           t.w.lnf_g, t.w.lnf_b, t.w.head);
}
std::vector<std::pair<std::string, Matrix*>> student_param_refs(StudentModel& s) {
    return student_refs_impl<Matrix>(s);
}
std::vector<std::pair<std::string, const Matrix*>> student_param_refs(
    const StudentModel& s) {
    return student_refs_impl<const Matrix>(s);
}

std::size_t param_count(const std::vector<std::pair<std::string, const Matrix*>>& refs) {
    std::size_t n = 0;
    for (const auto& [name, m] : refs) n += m->size();
    return n;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization.

namespace {

constexpr char kMagic[4] = {'L', 'R', 'C', '1'};

void put_u64(std::ofstream& f, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xFF);
    f.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& f) {
    unsigned char b[8];
    f.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return x;
}

void put_f64(std::ofstream& f, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    f.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& f) {
    std::uint64_t bits = get_u64(f);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void put_tensor(std::ofstream& f, const std::string& name, const Matrix& m) {
    put_u64(f, name.size());
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(f, m.rows);
    put_u64(f, m.cols);
    for (double x : m.v) put_f64(f, x);
}

void write_header(std::ofstream& f, std::uint64_t kind, const ModelConfig& cfg,
                  std::uint64_t rank, std::uint64_t sheads, std::uint64_t count) {
    f.write(kMagic, 4);
    put_u64(f, kind);
    put_u64(f, cfg.vocab_size);
    put_u64(f, cfg.num_layers);
    put_u64(f, cfg.hidden_dim);
    put_u64(f, cfg.num_heads);
    put_u64(f, cfg.seq_len);
    put_u64(f, cfg.ffn_mult);
    put_u64(f, rank);
    put_u64(f, sheads);
    put_u64(f, count);
}

struct Header {
    std::uint64_t kind, rank, sheads, count;
    ModelConfig cfg;
};

Header read_header(std::ifstream& f, const std::string& path) {
    char magic[4];
    f.read(magic, 4);
    require(f.good() && std::memcmp(magic, kMagic, 4) == 0,
            "checkpoint: bad magic in " + path);
    Header h;
    h.kind = get_u64(f);
    h.cfg.vocab_size = get_u64(f);
    h.cfg.num_layers = get_u64(f);
    h.cfg.hidden_dim = get_u64(f);
    h.cfg.num_heads = get_u64(f);
    h.cfg.seq_len = get_u64(f);
    h.cfg.ffn_mult = get_u64(f);
    h.rank = get_u64(f);
    h.sheads = get_u64(f);
    h.count = get_u64(f);
    require(f.good(), "checkpoint: truncated header in " + path);
    return h;
}

template <typename Refs>
void read_tensors(std::ifstream& f, Refs refs, std::uint64_t count,
                  const std::string& path) {
    std::map<std::string, Matrix*> by_name;
    for (auto& [name, m] : refs) by_name[name] = m;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t len = get_u64(f);
        std::string name(len, '\0');
        f.read(name.data(), static_cast<std::streamsize>(len));
        std::uint64_t rows = get_u64(f);
        std::uint64_t cols = get_u64(f);
        auto it = by_name.find(name);
        require(it != by_name.end(), "checkpoint: unknown tensor " + name + " in " + path);
        Matrix& m = *it->second;
        require(m.rows == rows && m.cols == cols,
                "checkpoint: shape mismatch for " + name + " in " + path);
        for (double& x : m.v) x = get_f64(f);
        require(f.good(), "checkpoint: truncated tensor " + name + " in " + path);
    }
}

// Shape-correct student with zeroed tensors, ready to be filled from a file.
StudentModel make_student_shell(const ModelConfig& cfg, std::size_t rank) {
    StudentModel s;
    s.teacher_cfg = cfg;
    s.rank = rank;
    s.heads = student_heads(cfg, rank);
    const std::size_t d = cfg.hidden_dim;
    const std::size_t ffn_t = d * cfg.ffn_mult;
    const std::size_t ffn_r = rank * cfg.ffn_mult;
    s.p_emb = Matrix(d, rank);
    s.p_pos = Matrix(d, rank);
    s.p_head = Matrix(rank, d);
    s.layers.resize(cfg.num_layers);
    for (auto& lf : s.layers) {
        auto shell = [&](std::size_t ro, std::size_t m, std::size_t n, std::size_t ri) {
            LowRankFactors f;
            f.rank = ro;
            f.teacher_rows = m;
            f.teacher_cols = n;
            f.p_left = Matrix(ro, m);
            f.p_right = Matrix(n, ri);
            return f;
        };
        lf.q = shell(rank, d, d, rank);
        lf.k = shell(rank, d, d, rank);
        lf.v = shell(rank, d, d, rank);
        lf.o = shell(rank, d, d, rank);
        lf.f1 = shell(rank, d, ffn_t, ffn_r);
        lf.f2 = shell(ffn_r, ffn_t, d, rank);
        lf.ln1_g = Matrix(1, rank);
        lf.ln1_b = Matrix(1, rank);
        lf.ln2_g = Matrix(1, rank);
        lf.ln2_b = Matrix(1, rank);
        lf.up_h = Matrix(d, rank);
        lf.up_a = Matrix(d, rank);
    }
    s.lnf_g = Matrix(1, rank);
    s.lnf_b = Matrix(1, rank);
    return s;
}

}  // namespace

void save_teacher(const TeacherModel& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "save_teacher: cannot open " + path);
    auto refs = teacher_param_refs(t);
    write_header(f, 0, t.cfg, 0, 0, refs.size());
    for (auto& [name, m] : refs) put_tensor(f, name, *m);
    require(f.good(), "save_teacher: write failed for " + path);
}

TeacherModel load_teacher(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "load_teacher: cannot open " + path);
    Header h = read_header(f, path);
    require(h.kind == 0, "load_teacher: not a teacher checkpoint: " + path);
    h.cfg.validate();
    TeacherModel t;
    t.cfg = h.cfg;
    t.w = zero_weights(teacher_dims(h.cfg));
    read_tensors(f, teacher_param_refs(t), h.count, path);
    return t;
}

void save_student(const StudentModel& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "save_student: cannot open " + path);
    auto refs = student_param_refs(s);
    write_header(f, 1, s.teacher_cfg, s.rank, s.heads, refs.size());
    for (auto& [name, m] : refs) put_tensor(f, name, *m);
    require(f.good(), "save_student: write failed for " + path);
}

StudentModel load_student(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "load_student: cannot open " + path);
    Header h = read_header(f, path);
    require(h.kind == 1, "load_student: not a student checkpoint: " + path);
    h.cfg.validate();
    StudentModel s = make_student_shell(h.cfg, h.rank);
    read_tensors(f, student_param_refs(s), h.count, path);
    return s;
}

}  // namespace lrc
