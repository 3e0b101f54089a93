#include "lrc/data.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace lrc {

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

Matrix markov_transition(std::uint64_t seed, int order, std::size_t vocab_size) {
    require(order == 1 || order == 2, "markov: order must be 1 or 2");
    require(vocab_size >= 2, "markov: vocab_size must be >= 2");
    std::size_t contexts = vocab_size;
    if (order == 2) contexts *= vocab_size;
    RngState rng(seed ^ 0x5bd1e995);
    Matrix t(contexts, vocab_size);
    for (std::size_t i = 0; i < contexts; ++i) {
        // Peaked softmax rows so the chain has learnable structure.
        double mx = -1e300;
        for (std::size_t j = 0; j < vocab_size; ++j) {
            t(i, j) = 1.5 * rng.next_gaussian();
            mx = std::max(mx, t(i, j));
        }
        double z = 0.0;
        for (std::size_t j = 0; j < vocab_size; ++j) {
            t(i, j) = std::exp(t(i, j) - mx);
            z += t(i, j);
        }
        for (std::size_t j = 0; j < vocab_size; ++j) t(i, j) /= z;
    }
    return t;
}

Corpus sample_markov(const Matrix& transition, int order, std::size_t vocab_size,
                     std::uint64_t seed, std::size_t length) {
    require(order == 1 || order == 2, "markov: order must be 1 or 2");
    std::size_t contexts = vocab_size;
    if (order == 2) contexts *= vocab_size;
    require(transition.rows == contexts && transition.cols == vocab_size,
            "markov: transition shape mismatch");
    require(length >= static_cast<std::size_t>(order), "markov: length too short");

    RngState rng(seed);
    Corpus c;
    c.vocab_size = vocab_size;
    c.ids.reserve(length);
    for (int i = 0; i < order; ++i)
        c.ids.push_back(static_cast<std::int32_t>(rng.next_range(vocab_size)));
    while (c.ids.size() < length) {
        std::size_t ctx = static_cast<std::size_t>(c.ids[c.ids.size() - 1]);
        if (order == 2)
            ctx += static_cast<std::size_t>(c.ids[c.ids.size() - 2]) * vocab_size;
        double u = rng.next_double();
        double acc = 0.0;
        std::size_t pick = vocab_size - 1;
        for (std::size_t j = 0; j < vocab_size; ++j) {
            acc += transition(ctx, j);
            if (u < acc) {
                pick = j;
                break;
            }
        }
        c.ids.push_back(static_cast<std::int32_t>(pick));
    }
    return c;
}

Corpus generate_markov_corpus(std::uint64_t seed, int order, std::size_t vocab_size,
                              std::size_t length) {
    Matrix t = markov_transition(seed, order, vocab_size);
    Corpus c = sample_markov(t, order, vocab_size, seed + 1, length);
    c.provenance = "markov:seed=" + std::to_string(seed) +
                   ":order=" + std::to_string(order) +
                   ":vocab=" + std::to_string(vocab_size) +
                   ":len=" + std::to_string(length);
    return c;
}

Corpus char_tokenize(const std::vector<unsigned char>& bytes, const std::string& name) {
    require(!bytes.empty(), "char_tokenize: empty input");
    Corpus c;
    c.vocab_size = 256;
    c.ids.reserve(bytes.size());
    for (unsigned char b : bytes) c.ids.push_back(static_cast<std::int32_t>(b));
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    c.provenance = "file:" + name + ":fnv64:" + hex;
    return c;
}

std::vector<unsigned char> detokenize(const Corpus& c) {
    require(c.vocab_size == 256, "detokenize: not a byte-level corpus");
    std::vector<unsigned char> out;
    out.reserve(c.ids.size());
    for (std::int32_t id : c.ids) {
        require(id >= 0 && id < 256, "detokenize: id out of byte range");
        out.push_back(static_cast<unsigned char>(id));
    }
    return out;
}

Corpus load_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "load_text_file: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return char_tokenize(bytes, path);
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& c, std::size_t min_holdout) {
    std::size_t holdout = std::max(c.ids.size() / 10, min_holdout);
    require(holdout < c.ids.size(), "split_corpus: corpus too small to split");
    std::size_t train_len = c.ids.size() - holdout;
    Corpus train, held;
    train.vocab_size = held.vocab_size = c.vocab_size;
    train.provenance = c.provenance + ":train";
    held.provenance = c.provenance + ":heldout";
    train.ids.assign(c.ids.begin(), c.ids.begin() + static_cast<std::ptrdiff_t>(train_len));
    held.ids.assign(c.ids.begin() + static_cast<std::ptrdiff_t>(train_len), c.ids.end());
    return {std::move(train), std::move(held)};
}

Batch sample_batch(const Corpus& c, std::size_t batch_size, std::size_t seq_len,
                   RngState& rng) {
    require(batch_size >= 1 && seq_len >= 1, "sample_batch: empty shape");
    require(c.ids.size() >= seq_len + 1, "sample_batch: corpus shorter than seq_len + 1");
    Batch b;
    for (std::size_t i = 0; i < batch_size; ++i) {
        std::size_t off = rng.next_range(c.ids.size() - seq_len);
        std::vector<int> in(seq_len), tg(seq_len);
        for (std::size_t j = 0; j < seq_len; ++j) {
            in[j] = c.ids[off + j];
            tg[j] = c.ids[off + j + 1];
        }
        b.inputs.push_back(std::move(in));
        b.targets.push_back(std::move(tg));
    }
    return b;
}

Batch window_pool(const Corpus& c, std::size_t seq_len) {
    require(seq_len >= 1, "window_pool: empty shape");
    require(c.ids.size() >= seq_len + 1, "window_pool: corpus shorter than seq_len + 1");
    Batch b;
    for (std::size_t off = 0; off + seq_len + 1 <= c.ids.size(); off += seq_len) {
        std::vector<int> in(seq_len), tg(seq_len);
        for (std::size_t j = 0; j < seq_len; ++j) {
            in[j] = c.ids[off + j];
            tg[j] = c.ids[off + j + 1];
        }
        b.inputs.push_back(std::move(in));
        b.targets.push_back(std::move(tg));
    }
    return b;
}

namespace {
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
}  // namespace

void save_corpus(const Corpus& c, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "save_corpus: cannot open " + path);
    f.write("LRCD", 4);
    put_u64(f, c.vocab_size);
    put_u64(f, c.ids.size());
    for (std::int32_t id : c.ids) {
        unsigned char b[4];
        std::uint32_t u = static_cast<std::uint32_t>(id);
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
        f.write(reinterpret_cast<const char*>(b), 4);
    }
    require(f.good(), "save_corpus: write failed for " + path);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "load_corpus: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    require(f.good() && std::memcmp(magic, "LRCD", 4) == 0,
            "load_corpus: bad magic in " + path);
    Corpus c;
    c.vocab_size = get_u64(f);
    std::uint64_t n = get_u64(f);
    c.ids.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        std::uint32_t u = 0;
        for (int j = 0; j < 4; ++j) u |= static_cast<std::uint32_t>(b[j]) << (8 * j);
        c.ids[i] = static_cast<std::int32_t>(u);
    }
    require(f.good(), "load_corpus: truncated file " + path);
    c.provenance = "cache:" + path;
    return c;
}

}  // namespace lrc
