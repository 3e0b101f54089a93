#ifndef LRC_CONFIG_HPP
#define LRC_CONFIG_HPP

#include <string>

#include "lrc/data.hpp"
#include "lrc/model.hpp"
#include "lrc/optim.hpp"

namespace lrc {

// Fully resolvable run description. Flat key=value text format; unknown keys
// are rejected, unset keys fall back to the defaults below.
struct RunConfig {
    // model
    std::size_t vocab_size = 64;
    std::size_t num_layers = 2;
    std::size_t hidden_dim = 32;
    std::size_t num_heads = 4;
    std::size_t seq_len = 64;
    std::size_t ffn_mult = 4;
    // student
    std::size_t rank = 8;
    std::string init = "svd";  // svd | random | identity
    // data
    std::string data = "markov";  // markov | file
    std::string data_path;
    std::size_t corpus_length = 32768;
    std::size_t markov_order = 2;
    std::uint64_t data_seed = 1;
    // training
    std::size_t steps = 500;
    std::size_t batch_size = 8;
    bool lr_auto = true;  // lr=auto resolves to 1/L_hat
    double lr = 0.0;
    std::string optimizer = "sgd";     // sgd | adam
    std::string schedule = "constant";  // constant | cosine
    double lambda_clone = 1.0;
    double tau = 2.0;
    bool kd = true, lm = true, clone = true;
    std::size_t val_every = 25;
    bool full_grad_trace = false;
    bool full_batch = false;
    std::uint64_t seed = 1;
    // io
    std::string teacher;  // teacher checkpoint path (distill, verify)
    std::string out = "out";

    void validate() const;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);
void apply_override(RunConfig& cfg, const std::string& assignment);  // "key=value"

// Canonical form: every key, sorted, one per line. parse(serialize(x))
// serializes back byte-identically.
std::string serialize_config(const RunConfig& cfg);

ModelConfig model_config(const RunConfig& cfg);
SgdConfig sgd_config(const RunConfig& cfg);
StudentInit student_init(const RunConfig& cfg);

// Synthetic corpus from (data_seed, markov_order, vocab_size, corpus_length)
// or byte-level tokenization of data_path.
Corpus build_corpus(const RunConfig& cfg);

}  // namespace lrc

#endif
