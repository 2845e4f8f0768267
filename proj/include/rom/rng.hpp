#pragma once

// Platform-independent random draws. The standard distributions are
// implementation-defined, so the mappings from raw 64-bit words are spelled out
// here to keep every seeded artifact bit-reproducible.

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace rom {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_{seed} {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [-a, a).
    double symmetric(double a) { return a * (2.0 * uniform() - 1.0); }

    /// Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace rom
