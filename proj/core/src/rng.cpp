#include "ftsvd/rng.hpp"

#include <cmath>
#include <numbers>

namespace ftsvd {

CounterRng CounterRng::stream(std::uint64_t seed, std::string_view role) noexcept {
    // FNV-1a over the role name, then mixed with the seed.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : role) {
        h ^= std::uint64_t(static_cast<unsigned char>(c));
        h *= 0x100000001b3ull;
    }
    return CounterRng(mix(mix(seed) ^ h));
}

double CounterRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace ftsvd
