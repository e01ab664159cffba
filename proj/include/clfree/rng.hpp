// Counter-based deterministic random number generator.
//
// CounterRng is SplitMix64 run in counter mode: output(i) = mix(key + i*GOLDEN).
// Streams are derived from (master seed, stream index) so that independent
// runs get independent, reproducible sequences. All draws are integer-only
// and bit-identical across platforms for a given seed.
#pragma once

#include <cstdint>

namespace clfree {

class CounterRng {
public:
    CounterRng() = default;
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    // Independent stream for run `index` under a master seed.
    static CounterRng stream(std::uint64_t master_seed, std::uint64_t index) {
        return CounterRng(mix(master_seed ^ mix(index + 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (counter_++) * 0x9E3779B97F4A7C15ull;
        return mix(z);
    }

    // Uniform in [0, bound), bound > 0. Rejection sampling keeps the draw
    // exactly uniform and platform-independent.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [0,1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0x5DEECE66Dull;
    std::uint64_t counter_ = 0;
};

} // namespace clfree
