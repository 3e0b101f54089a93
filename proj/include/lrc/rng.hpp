#ifndef LRC_RNG_HPP
#define LRC_RNG_HPP

#include <cstdint>

namespace lrc {

// Counter-based generator (splitmix64 finalizer over seed + counter).
// The (seed, counter) pair fully determines the output sequence, so state
// can be copied, compared, or advanced to a known position on any platform.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    explicit RngState(std::uint64_t seed = 0, std::uint64_t counter = 0)
        : seed(seed), counter(counter) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed + (++counter) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. Consumes exactly two uniforms per call;
    // nothing is cached, so the (seed, counter) contract is preserved.
    double next_gaussian();

    // Uniform in [0, n) without modulo bias (Lemire reduction).
    std::uint64_t next_range(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Derived independent stream; used to hand each parallel worker its own state.
    RngState split(std::uint64_t stream_id) const {
        RngState mixer(seed ^ 0xA5A5A5A55A5A5A5AULL, stream_id * 2654435761ULL);
        return RngState(mixer.next_u64());
    }
};

}  // namespace lrc

#endif
