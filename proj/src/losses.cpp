#include "lrc/losses.hpp"

#include <cmath>

namespace lrc {

namespace {

// Row-wise stable log-softmax.
Matrix log_softmax(const Matrix& z) {
    Matrix out(z.rows, z.cols);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double mx = z(i, 0);
        for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, z(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < z.cols; ++j) sum += std::exp(z(i, j) - mx);
        double lse = mx + std::log(sum);
        for (std::size_t j = 0; j < z.cols; ++j) out(i, j) = z(i, j) - lse;
    }
    return out;
}

}  // namespace

KdResult kd_loss(const Matrix& teacher_logits, const Matrix& student_logits, double tau) {
    require(teacher_logits.same_shape(student_logits), "kd_loss: shape mismatch");
    require(tau > 0.0, "kd_loss: tau must be positive");
    const std::size_t n = teacher_logits.rows, v = teacher_logits.cols;
    Matrix zt = scale(teacher_logits, 1.0 / tau);
    Matrix zs = scale(student_logits, 1.0 / tau);
    Matrix lpt = log_softmax(zt);
    Matrix lps = log_softmax(zs);

    KdResult r;
    r.dstudent_logits = Matrix(n, v);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < v; ++j) {
            double pt = std::exp(lpt(i, j));
            double ps = std::exp(lps(i, j));
            loss += pt * (lpt(i, j) - lps(i, j));
            // d/dz_s of tau^2 * mean_i KL = (tau / n) * (p_s - p_t)
            r.dstudent_logits(i, j) = tau / static_cast<double>(n) * (ps - pt);
        }
    }
    r.loss = tau * tau * loss / static_cast<double>(n);
    return r;
}

LmResult lm_loss(const Matrix& logits, const std::vector<int>& targets) {
    require(targets.size() == logits.rows, "lm_loss: one target per position");
    const std::size_t n = logits.rows, v = logits.cols;
    for (int t : targets)
        require(t >= 0 && static_cast<std::size_t>(t) < v, "lm_loss: target id out of range");
    Matrix lp = log_softmax(logits);
    LmResult r;
    r.dlogits = Matrix(n, v);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = static_cast<std::size_t>(targets[i]);
        loss -= lp(i, t);
        for (std::size_t j = 0; j < v; ++j) {
            double p = std::exp(lp(i, j));
            r.dlogits(i, j) = (p - (j == t ? 1.0 : 0.0)) / static_cast<double>(n);
        }
    }
    r.loss = loss / static_cast<double>(n);
    return r;
}

CloneResult clone_loss(const ActivationTrace& teacher, const ActivationTrace& student,
                       const std::vector<const Matrix*>& up_h,
                       const std::vector<const Matrix*>& up_a) {
    const std::size_t layers = teacher.h.size();
    require(student.h.size() == layers && teacher.a.size() == layers &&
                student.a.size() == layers,
            "clone_loss: trace layer count mismatch");
    require(up_h.size() == layers && up_a.size() == layers,
            "clone_loss: one up-projector pair per layer");
    require(layers >= 1, "clone_loss: empty trace");
    const std::size_t seq = teacher.h[0].rows;
    const std::size_t d = teacher.h[0].cols;
    const double norm = static_cast<double>(layers) * static_cast<double>(seq) *
                        static_cast<double>(d);

    CloneResult r;
    double loss = 0.0;
    for (std::size_t l = 0; l < layers; ++l) {
        auto term = [&](const Matrix& t, const Matrix& s, const Matrix& up,
                        Matrix& ds_out, Matrix& dup_out) {
            Matrix lifted = matmul(s, transpose(up));  // seq x d
            Matrix diff = sub(t, lifted);
            loss += dot(diff, diff);
            ds_out = scale(matmul(diff, up), -2.0 / norm);
            dup_out = scale(matmul(transpose(diff), s), -2.0 / norm);
        };
        Matrix dh, duh, da, dua;
        term(teacher.h[l], student.h[l], *up_h[l], dh, duh);
        term(teacher.a[l], student.a[l], *up_a[l], da, dua);
        r.dh_s.push_back(std::move(dh));
        r.dup_h.push_back(std::move(duh));
        r.da_s.push_back(std::move(da));
        r.dup_a.push_back(std::move(dua));
    }
    r.loss = loss / norm;
    return r;
}

CloneResult clone_loss(const ActivationTrace& teacher, const ActivationTrace& student,
                       const StudentModel& s) {
    std::vector<const Matrix*> uh, ua;
    for (const auto& lf : s.layers) {
        uh.push_back(&lf.up_h);
        ua.push_back(&lf.up_a);
    }
    return clone_loss(teacher, student, uh, ua);
}

LossBreakdown total_loss(double kd, double lm, double clone, double lambda, double tau) {
    LossBreakdown b;
    b.kd = kd;
    b.lm = lm;
    b.clone = clone;
    b.lambda = lambda;
    b.tau = tau;
    b.total = kd + lm + lambda * clone;
    return b;
}

}  // namespace lrc
