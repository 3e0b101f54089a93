#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "lrc/data.hpp"

using namespace lrc;

TEST_SUITE("data") {

TEST_CASE("deterministic transition forces an alternating chain") {
    Matrix t(2, 2);
    t(0, 1) = 1.0;
    t(1, 0) = 1.0;
    Corpus c = sample_markov(t, 1, 2, 9, 64);
    for (std::size_t i = 1; i < c.ids.size(); ++i)
        CHECK(c.ids[i] == 1 - c.ids[i - 1]);
}

TEST_CASE("same seed gives identical corpora") {
    Corpus a = generate_markov_corpus(123, 2, 16, 4096);
    Corpus b = generate_markov_corpus(123, 2, 16, 4096);
    CHECK(a.ids == b.ids);
    CHECK(a.provenance == b.provenance);
}

TEST_CASE("empirical bigram frequencies match the transition matrix") {
    const std::size_t vocab = 8;
    Matrix t = markov_transition(77, 1, vocab);
    Corpus c = sample_markov(t, 1, vocab, 78, 200000);
    Matrix counts(vocab, vocab);
    std::vector<double> row_total(vocab, 0.0);
    for (std::size_t i = 0; i + 1 < c.ids.size(); ++i) {
        counts(static_cast<std::size_t>(c.ids[i]),
               static_cast<std::size_t>(c.ids[i + 1])) += 1.0;
        row_total[static_cast<std::size_t>(c.ids[i])] += 1.0;
    }
    double weighted_tv = 0.0, total = 0.0;
    for (std::size_t i = 0; i < vocab; ++i) {
        if (row_total[i] == 0.0) continue;
        double tv = 0.0;
        for (std::size_t j = 0; j < vocab; ++j)
            tv += std::abs(counts(i, j) / row_total[i] - t(i, j));
        weighted_tv += 0.5 * tv * row_total[i];
        total += row_total[i];
    }
    CHECK(weighted_tv / total < 0.02);
}

TEST_CASE("char tokenizer basics") {
    std::vector<unsigned char> ab = {'a', 'b'};
    Corpus c = char_tokenize(ab, "ab");
    REQUIRE(c.ids.size() == 2);
    CHECK(c.ids[0] == 97);
    CHECK(c.ids[1] == 98);
    CHECK(c.vocab_size == 256);
    CHECK(detokenize(c) == ab);
    CHECK_THROWS_AS(char_tokenize({}, "empty"), InvalidArgument);
}

TEST_CASE("tokenizing n bytes yields n ids") {
    std::vector<unsigned char> big(1 << 20);
    for (std::size_t i = 0; i < big.size(); ++i)
        big[i] = static_cast<unsigned char>(i * 31 % 256);
    Corpus c = char_tokenize(big, "big");
    CHECK(c.ids.size() == (1u << 20));
}

TEST_CASE("batch of a minimal corpus is the whole corpus") {
    Corpus c;
    c.vocab_size = 4;
    c.ids = {0, 1, 2, 3, 1};  // seq_len 4 -> only one possible window
    RngState rng(5);
    Batch b = sample_batch(c, 3, 4, rng);
    for (std::size_t i = 0; i < b.inputs.size(); ++i) {
        CHECK(b.inputs[i] == std::vector<int>({0, 1, 2, 3}));
        CHECK(b.targets[i] == std::vector<int>({1, 2, 3, 1}));
    }
}

TEST_CASE("targets are inputs shifted by one") {
    Corpus c = generate_markov_corpus(9, 1, 8, 512);
    RngState rng(10);
    Batch b = sample_batch(c, 8, 16, rng);
    for (std::size_t i = 0; i < b.inputs.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.inputs[i].size(); ++j)
            CHECK(b.targets[i][j] == b.inputs[i][j + 1]);
}

TEST_CASE("batch streams are seed-deterministic") {
    Corpus c = generate_markov_corpus(9, 1, 8, 512);
    RngState ra(11), rb(11);
    for (int t = 0; t < 5; ++t) {
        Batch a = sample_batch(c, 4, 8, ra);
        Batch b = sample_batch(c, 4, 8, rb);
        CHECK(a.inputs == b.inputs);
        CHECK(a.targets == b.targets);
    }
}

TEST_CASE("batch sampling rejects short corpus") {
    Corpus c;
    c.vocab_size = 4;
    c.ids = {0, 1, 2};
    RngState rng(12);
    CHECK_THROWS_AS(sample_batch(c, 1, 3, rng), InvalidArgument);
}

TEST_CASE("split holds out the tail") {
    Corpus c = generate_markov_corpus(13, 1, 8, 1000);
    auto [train, held] = split_corpus(c, 65);
    CHECK(train.ids.size() == 900);
    CHECK(held.ids.size() == 100);
    for (std::size_t i = 0; i < held.ids.size(); ++i)
        CHECK(held.ids[i] == c.ids[900 + i]);
}

TEST_CASE("corpus cache round trip") {
    Corpus c = generate_markov_corpus(14, 2, 12, 2048);
    std::string path = "/tmp/lrc_test_corpus.bin";
    save_corpus(c, path);
    Corpus d = load_corpus(path);
    CHECK(d.ids == c.ids);
    CHECK(d.vocab_size == c.vocab_size);
    std::remove(path.c_str());
}

}  // TEST_SUITE
