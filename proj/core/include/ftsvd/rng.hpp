#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace ftsvd {

/// Counter-based 64-bit generator: output t is the SplitMix64 finalizer of
/// key + t * golden_gamma. Two generators with different keys are
/// independent streams; `stream(seed, name)` derives the key from a seed and
/// a role name so that adding draws to one role never shifts another.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

    static CounterRng stream(std::uint64_t seed, std::string_view role) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + (++counter_) * golden_gamma); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return double((*this)() >> 11) * 0x1.0p-53; }
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal by Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ftsvd
