#include "lrc/distill.hpp"

#include <cmath>

namespace lrc {

namespace {

void accumulate(ConcreteWeights& acc, const ConcreteWeights& g) {
    add_inplace(acc.tok_emb, g.tok_emb);
    add_inplace(acc.pos_emb, g.pos_emb);
    for (std::size_t l = 0; l < acc.layers.size(); ++l) {
        add_inplace(acc.layers[l].wq, g.layers[l].wq);
        add_inplace(acc.layers[l].wk, g.layers[l].wk);
        add_inplace(acc.layers[l].wv, g.layers[l].wv);
        add_inplace(acc.layers[l].wo, g.layers[l].wo);
        add_inplace(acc.layers[l].w1, g.layers[l].w1);
        add_inplace(acc.layers[l].w2, g.layers[l].w2);
        add_inplace(acc.layers[l].ln1_g, g.layers[l].ln1_g);
        add_inplace(acc.layers[l].ln1_b, g.layers[l].ln1_b);
        add_inplace(acc.layers[l].ln2_g, g.layers[l].ln2_g);
        add_inplace(acc.layers[l].ln2_b, g.layers[l].ln2_b);
    }
    add_inplace(acc.lnf_g, g.lnf_g);
    add_inplace(acc.lnf_b, g.lnf_b);
    add_inplace(acc.head, g.head);
}

void scale_weights(ConcreteWeights& w, double s) {
    for (double& x : w.tok_emb.v) x *= s;
    for (double& x : w.pos_emb.v) x *= s;
    for (auto& l : w.layers) {
        for (double& x : l.wq.v) x *= s;
        for (double& x : l.wk.v) x *= s;
        for (double& x : l.wv.v) x *= s;
        for (double& x : l.wo.v) x *= s;
        for (double& x : l.w1.v) x *= s;
        for (double& x : l.w2.v) x *= s;
        for (double& x : l.ln1_g.v) x *= s;
        for (double& x : l.ln1_b.v) x *= s;
        for (double& x : l.ln2_g.v) x *= s;
        for (double& x : l.ln2_b.v) x *= s;
    }
    for (double& x : w.lnf_g.v) x *= s;
    for (double& x : w.lnf_b.v) x *= s;
    for (double& x : w.head.v) x *= s;
}

ConcreteWeights zero_like(const ConcreteWeights& w) {
    ConcreteWeights z = w;
    scale_weights(z, 0.0);
    return z;
}

// Index of the up_h gradient slot for layer l in student_param_refs order:
// p_emb, p_pos, then per layer 12 factor matrices + 4 layer-norm vectors +
// up_h + up_a.
std::size_t up_h_slot(std::size_t layer) { return 2 + layer * 18 + 16; }

// All three terms are always measured; disabled ones carry zero weight in
// the objective value, matching the gradient the step follows.
LossBreakdown weighted_breakdown(double kd, double lm, double clone,
                                 const DistillSettings& cfg) {
    double lambda_eff = cfg.use_clone ? cfg.lambda : 0.0;
    LossBreakdown b = total_loss(kd, lm, clone, lambda_eff, cfg.tau);
    b.total = (cfg.use_kd ? kd : 0.0) + (cfg.use_lm ? lm : 0.0) + lambda_eff * clone;
    return b;
}

}  // namespace

LossBreakdown distill_loss(const StudentModel& s, const TeacherModel& teacher,
                           const Batch& batch, const DistillSettings& cfg) {
    require(!batch.inputs.empty(), "distill: empty batch");
    ConcreteWeights composed = compose_student(s, teacher);
    Dims sd = student_dims(s.teacher_cfg, s.rank);
    double kd = 0.0, lm = 0.0, clone = 0.0;
    for (std::size_t b = 0; b < batch.inputs.size(); ++b) {
        ActivationTrace tt = teacher_forward(teacher, batch.inputs[b]);
        ActivationTrace st = engine::forward(composed, sd, batch.inputs[b]);
        kd += kd_loss(tt.logits, st.logits, cfg.tau).loss;
        lm += lm_loss(st.logits, batch.targets[b]).loss;
        clone += clone_loss(tt, st, s).loss;
    }
    double n = static_cast<double>(batch.inputs.size());
    return weighted_breakdown(kd / n, lm / n, clone / n, cfg);
}

StepResult distill_loss_and_grads(const StudentModel& s, const TeacherModel& teacher,
                                  const Batch& batch, const DistillSettings& cfg) {
    return distill_loss_and_grads_split(s, teacher, teacher, batch, cfg);
}

StepResult distill_loss_and_grads_split(const StudentModel& s,
                                        const TeacherModel& compose_teacher,
                                        const TeacherModel& target_teacher,
                                        const Batch& batch, const DistillSettings& cfg) {
    require(!batch.inputs.empty(), "distill: empty batch");
    require(batch.targets.size() == batch.inputs.size(), "distill: batch shape mismatch");
    ConcreteWeights composed = compose_student(s, compose_teacher);
    Dims sd = student_dims(s.teacher_cfg, s.rank);
    const std::size_t layers = s.layers.size();
    const double inv_n = 1.0 / static_cast<double>(batch.inputs.size());
    const double clone_w = cfg.use_clone ? cfg.lambda : 0.0;

    const std::size_t nb = batch.inputs.size();
    std::vector<double> kds(nb), lms(nb), clones(nb);
    std::vector<ConcreteWeights> per_item(nb);
    std::vector<std::vector<Matrix>> per_item_duh(nb), per_item_dua(nb);

    // Per-sequence passes are independent; the reduction below stays in index
    // order so results do not depend on the thread count.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(nb); ++bi) {
        const std::size_t b = static_cast<std::size_t>(bi);
        const std::vector<int>& tokens = batch.inputs[b];
        ActivationTrace tt = teacher_forward(target_teacher, tokens);
        engine::CacheHandle cache;
        ActivationTrace st = engine::forward(composed, sd, tokens, cache.c);

        KdResult kr = kd_loss(tt.logits, st.logits, cfg.tau);
        LmResult lr = lm_loss(st.logits, batch.targets[b]);
        CloneResult cr = clone_loss(tt, st, s);
        kds[b] = kr.loss;
        lms[b] = lr.loss;
        clones[b] = cr.loss;

        LossGrads lg;
        lg.dlogits = Matrix(st.logits.rows, st.logits.cols);
        if (cfg.use_kd) add_inplace(lg.dlogits, kr.dstudent_logits);
        if (cfg.use_lm) add_inplace(lg.dlogits, lr.dlogits);
        if (clone_w != 0.0) {
            lg.dh.resize(layers);
            lg.da.resize(layers);
            for (std::size_t l = 0; l < layers; ++l) {
                lg.dh[l] = scale(cr.dh_s[l], clone_w);
                lg.da[l] = scale(cr.da_s[l], clone_w);
            }
            per_item_duh[b].resize(layers);
            per_item_dua[b].resize(layers);
            for (std::size_t l = 0; l < layers; ++l) {
                per_item_duh[b][l] = scale(cr.dup_h[l], clone_w);
                per_item_dua[b][l] = scale(cr.dup_a[l], clone_w);
            }
        }
        per_item[b] = engine::backward(composed, sd, tokens, *cache.c, lg);
    }

    double kd = 0.0, lm = 0.0, clone = 0.0;
    ConcreteWeights engine_acc = zero_like(composed);
    std::vector<Matrix> dup_h(layers), dup_a(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        dup_h[l] = Matrix(s.layers[l].up_h.rows, s.layers[l].up_h.cols);
        dup_a[l] = Matrix(s.layers[l].up_a.rows, s.layers[l].up_a.cols);
    }
    for (std::size_t b = 0; b < nb; ++b) {
        kd += kds[b];
        lm += lms[b];
        clone += clones[b];
        accumulate(engine_acc, per_item[b]);
        if (!per_item_duh[b].empty())
            for (std::size_t l = 0; l < layers; ++l) {
                add_inplace(dup_h[l], per_item_duh[b][l]);
                add_inplace(dup_a[l], per_item_dua[b][l]);
            }
    }

    scale_weights(engine_acc, inv_n);
    StepResult out;
    out.grads = map_student_grads(s, compose_teacher, engine_acc);
    for (std::size_t l = 0; l < layers; ++l) {
        out.grads[up_h_slot(l)] = scale(dup_h[l], inv_n);
        out.grads[up_h_slot(l) + 1] = scale(dup_a[l], inv_n);
    }
    out.loss = weighted_breakdown(kd * inv_n, lm * inv_n, clone * inv_n, cfg);
    return out;
}

TeacherStepResult teacher_loss_and_grads(const TeacherModel& t, const Batch& batch) {
    require(!batch.inputs.empty(), "teacher step: empty batch");
    Dims d = teacher_dims(t.cfg);
    const std::size_t nb = batch.inputs.size();
    const double inv_n = 1.0 / static_cast<double>(nb);
    std::vector<double> losses(nb);
    std::vector<ConcreteWeights> per_item(nb);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(nb); ++bi) {
        const std::size_t b = static_cast<std::size_t>(bi);
        engine::CacheHandle cache;
        ActivationTrace tr = engine::forward(t.w, d, batch.inputs[b], cache.c);
        LmResult lr = lm_loss(tr.logits, batch.targets[b]);
        losses[b] = lr.loss;
        LossGrads lg;
        lg.dlogits = lr.dlogits;
        per_item[b] = engine::backward(t.w, d, batch.inputs[b], *cache.c, lg);
    }
    double loss = 0.0;
    ConcreteWeights acc = zero_like(t.w);
    for (std::size_t b = 0; b < nb; ++b) {
        loss += losses[b];
        accumulate(acc, per_item[b]);
    }
    scale_weights(acc, inv_n);

    TeacherStepResult out;
    out.loss = loss * inv_n;
    // Flatten in teacher_param_refs order.
    out.grads.push_back(acc.tok_emb);
    out.grads.push_back(acc.pos_emb);
    for (auto& l : acc.layers) {
        out.grads.push_back(l.wq);
        out.grads.push_back(l.wk);
        out.grads.push_back(l.wv);
        out.grads.push_back(l.wo);
        out.grads.push_back(l.w1);
        out.grads.push_back(l.w2);
        out.grads.push_back(l.ln1_g);
        out.grads.push_back(l.ln1_b);
        out.grads.push_back(l.ln2_g);
        out.grads.push_back(l.ln2_b);
    }
    out.grads.push_back(acc.lnf_g);
    out.grads.push_back(acc.lnf_b);
    out.grads.push_back(acc.head);
    return out;
}

double teacher_loss(const TeacherModel& t, const Batch& batch) {
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.inputs.size(); ++b) {
        ActivationTrace tr = teacher_forward(t, batch.inputs[b]);
        loss += lm_loss(tr.logits, batch.targets[b]).loss;
    }
    return loss / static_cast<double>(batch.inputs.size());
}

double eval_lm_loss_student(const StudentModel& s, const TeacherModel& teacher,
                            const Corpus& c, std::size_t seq_len) {
    Batch b = window_pool(c, seq_len);
    ConcreteWeights composed = compose_student(s, teacher);
    Dims sd = student_dims(s.teacher_cfg, s.rank);
    std::vector<double> losses(b.inputs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(b.inputs.size()); ++i) {
        ActivationTrace tr =
            engine::forward(composed, sd, b.inputs[static_cast<std::size_t>(i)]);
        losses[static_cast<std::size_t>(i)] =
            lm_loss(tr.logits, b.targets[static_cast<std::size_t>(i)]).loss;
    }
    double loss = 0.0;
    for (double l : losses) loss += l;
    return loss / static_cast<double>(b.inputs.size());
}

double eval_lm_loss_teacher(const TeacherModel& t, const Corpus& c, std::size_t seq_len) {
    Batch b = window_pool(c, seq_len);
    std::vector<double> losses(b.inputs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(b.inputs.size()); ++i) {
        ActivationTrace tr = teacher_forward(t, b.inputs[static_cast<std::size_t>(i)]);
        losses[static_cast<std::size_t>(i)] =
            lm_loss(tr.logits, b.targets[static_cast<std::size_t>(i)]).loss;
    }
    double loss = 0.0;
    for (double l : losses) loss += l;
    return loss / static_cast<double>(b.inputs.size());
}

double grad_check(StudentModel& s, const TeacherModel& teacher, const Batch& batch,
                  double h, const DistillSettings& cfg) {
    StepResult step = distill_loss_and_grads(s, teacher, batch, cfg);
    auto refs = student_param_refs(s);
    double worst = 0.0;
    for (std::size_t p = 0; p < refs.size(); ++p) {
        Matrix& m = *refs[p].second;
        for (std::size_t i = 0; i < m.v.size(); ++i) {
            double orig = m.v[i];
            m.v[i] = orig + h;
            double fp = distill_loss(s, teacher, batch, cfg).total;
            m.v[i] = orig - h;
            double fm = distill_loss(s, teacher, batch, cfg).total;
            m.v[i] = orig;
            double cd = (fp - fm) / (2.0 * h);
            double err = std::abs(step.grads[p].v[i] - cd) / std::max(1.0, std::abs(cd));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace lrc
