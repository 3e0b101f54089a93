#ifndef LRC_DATA_HPP
#define LRC_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrc/matrix.hpp"

namespace lrc {

struct Corpus {
    std::vector<std::int32_t> ids;
    std::size_t vocab_size = 0;
    std::string provenance;  // synthetic parameters or filename + content hash
};

// Next-token batch: targets are the inputs shifted by one.
struct Batch {
    std::vector<std::vector<int>> inputs;
    std::vector<std::vector<int>> targets;
};

// Transition table for a seeded Markov chain over vocab^order contexts;
// row i is the conditional distribution given context i.
Matrix markov_transition(std::uint64_t seed, int order, std::size_t vocab_size);

// Walks the chain from a seeded start; same (transition, seed) gives the
// identical corpus.
Corpus sample_markov(const Matrix& transition, int order, std::size_t vocab_size,
                     std::uint64_t seed, std::size_t length);

Corpus generate_markov_corpus(std::uint64_t seed, int order, std::size_t vocab_size,
                              std::size_t length);

// Byte-level ids 0..255, vocab_size 256.
Corpus char_tokenize(const std::vector<unsigned char>& bytes, const std::string& name);
std::vector<unsigned char> detokenize(const Corpus& c);
Corpus load_text_file(const std::string& path);

// Last 10% (at least min_holdout tokens) held out, never sampled for training.
std::pair<Corpus, Corpus> split_corpus(const Corpus& c, std::size_t min_holdout);

// Uniformly sampled start offsets; no batch crosses the corpus boundary.
Batch sample_batch(const Corpus& c, std::size_t batch_size, std::size_t seq_len,
                   RngState& rng);

// All non-overlapping windows in order; the deterministic evaluation set and
// the finite pool behind the gradient-variance estimator.
Batch window_pool(const Corpus& c, std::size_t seq_len);

// Cache file: "LRCD", vocab_size u64 LE, length u64 LE, ids i32 LE.
void save_corpus(const Corpus& c, const std::string& path);
Corpus load_corpus(const std::string& path);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len);

}  // namespace lrc

#endif
