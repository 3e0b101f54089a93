#ifndef LRC_MODEL_HPP
#define LRC_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrc/lowrank.hpp"
#include "lrc/matrix.hpp"

namespace lrc {

struct ModelConfig {
    std::size_t vocab_size = 64;
    std::size_t num_layers = 2;
    std::size_t hidden_dim = 32;
    std::size_t num_heads = 4;
    std::size_t seq_len = 64;
    std::size_t ffn_mult = 4;
    void validate() const;
};

// Width-resolved dimensions; the same forward/backward engine runs the
// teacher (dim = hidden_dim) and the composed student (dim = rank).
struct Dims {
    std::size_t vocab = 0;
    std::size_t layers = 0;
    std::size_t dim = 0;
    std::size_t ffn = 0;
    std::size_t heads = 0;
    std::size_t seq_len = 0;
};

// Concrete transformer weights. Vectors (layer-norm gains/biases) are 1 x dim.
struct LayerWeights {
    Matrix wq, wk, wv, wo;  // dim x dim
    Matrix w1;              // dim x ffn
    Matrix w2;              // ffn x dim
    Matrix ln1_g, ln1_b, ln2_g, ln2_b;
};

struct ConcreteWeights {
    Matrix tok_emb;  // vocab x dim
    Matrix pos_emb;  // seq_len x dim
    std::vector<LayerWeights> layers;
    Matrix lnf_g, lnf_b;
    Matrix head;  // dim x vocab
};

// Per-layer hidden states (block outputs) and attention sublayer outputs,
// plus final logits, for one sequence.
struct ActivationTrace {
    std::vector<Matrix> h;  // seq x dim each
    std::vector<Matrix> a;  // seq x dim each
    Matrix logits;          // seq x vocab
};

// Gradients flowing into the network outputs: d(logits) plus optional
// injections at the h^l / a^l taps (empty vectors mean no injection).
struct LossGrads {
    Matrix dlogits;
    std::vector<Matrix> dh;
    std::vector<Matrix> da;
};

struct TeacherModel {
    ModelConfig cfg;
    ConcreteWeights w;
};

enum class StudentInit { Svd, Random, Identity };

// Every linear map of the student is the Eq.-1 style composition
// p_left * W_t * p_right over the frozen teacher weight. FFN maps keep the
// width multiplier: d x 4d composes to r x 4r, 4d x d to 4r x r.
// The embedding/positional tables are right-projected (E_t * P), the output
// head left-projected (P * H_t), untied. Layer norms are the student's own
// full vectors. Up-projectors (d x r) lift student activations into teacher
// space for the clone loss and receive gradients only from it.
struct StudentModel {
    ModelConfig teacher_cfg;
    std::size_t rank = 0;
    std::size_t heads = 0;  // largest h <= teacher heads dividing rank
    Matrix p_emb;           // d x r
    Matrix p_pos;           // d x r
    Matrix p_head;          // r x d
    struct LayerFactors {
        LowRankFactors q, k, v, o;  // r x r composed
        LowRankFactors f1;          // r x ffn_r composed
        LowRankFactors f2;          // ffn_r x r composed
        Matrix ln1_g, ln1_b, ln2_g, ln2_b;  // 1 x r
        Matrix up_h, up_a;                  // d x r
    };
    std::vector<LayerFactors> layers;
    Matrix lnf_g, lnf_b;  // 1 x r
};

Dims teacher_dims(const ModelConfig& cfg);
Dims student_dims(const ModelConfig& cfg, std::size_t rank);
std::size_t student_heads(const ModelConfig& cfg, std::size_t rank);

TeacherModel init_teacher(const ModelConfig& cfg, RngState& rng);
StudentModel init_student(const TeacherModel& teacher, std::size_t rank,
                          StudentInit mode, RngState& rng);

// Composed student weights at width r; recomputed whenever factors change.
ConcreteWeights compose_student(const StudentModel& s, const TeacherModel& teacher);

namespace engine {
// Opaque forward cache consumed by backward.
struct Cache;

ActivationTrace forward(const ConcreteWeights& w, const Dims& d,
                        const std::vector<int>& tokens, Cache* cache = nullptr);

// Gradients w.r.t. every concrete weight for one sequence. `cache` must come
// from a forward over the same weights and tokens.
ConcreteWeights backward(const ConcreteWeights& w, const Dims& d,
                         const std::vector<int>& tokens, const Cache& cache,
                         const LossGrads& grads);

Cache* new_cache();
void free_cache(Cache*);

struct CacheHandle {
    Cache* c;
    CacheHandle() : c(new_cache()) {}
    ~CacheHandle() { free_cache(c); }
    CacheHandle(const CacheHandle&) = delete;
    CacheHandle& operator=(const CacheHandle&) = delete;
};

// Attention probabilities of one layer/head from the last forward into this
// cache (row-softmax over the causal prefix); exposed for tests.
Matrix attention_probs(const Cache& cache, std::size_t layer, std::size_t head);
}  // namespace engine

ActivationTrace teacher_forward(const TeacherModel& t, const std::vector<int>& tokens);
ActivationTrace student_forward(const StudentModel& s, const TeacherModel& teacher,
                                const std::vector<int>& tokens);

// Gradient for every trainable student parameter, aligned with
// student_param_refs order. Teacher weights receive no gradients.
std::vector<Matrix> student_backward(const StudentModel& s, const TeacherModel& teacher,
                                     const std::vector<int>& tokens,
                                     const LossGrads& grads);

// Maps engine-level gradients (w.r.t. composed weights) to factor gradients.
std::vector<Matrix> map_student_grads(const StudentModel& s, const TeacherModel& teacher,
                                      const ConcreteWeights& engine_grads);

// Stable, named parameter orderings used by the optimizer, checkpoints and
// gradient checks.
std::vector<std::pair<std::string, Matrix*>> teacher_param_refs(TeacherModel& t);
std::vector<std::pair<std::string, Matrix*>> student_param_refs(StudentModel& s);
std::vector<std::pair<std::string, const Matrix*>> teacher_param_refs(const TeacherModel& t);
std::vector<std::pair<std::string, const Matrix*>> student_param_refs(const StudentModel& s);

std::size_t param_count(const std::vector<std::pair<std::string, const Matrix*>>& refs);

// Flat binary checkpoints: "LRC1" magic, config as 64-bit LE integers, then
// named tensors (name length, name bytes, rows, cols, row-major f64 LE).
void save_teacher(const TeacherModel& t, const std::string& path);
TeacherModel load_teacher(const std::string& path);
void save_student(const StudentModel& s, const std::string& path);
StudentModel load_student(const std::string& path);

}  // namespace lrc

#endif
