#include "eigenshift/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eigenshift {

std::uint64_t StreamRng::splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t StreamRng::derive_key(std::uint64_t seed_base, std::uint64_t trial, std::uint64_t stream) {
    return splitmix64(splitmix64(splitmix64(seed_base) ^ trial) ^ stream);
}

StreamRng::StreamRng(std::uint64_t seed_base, std::uint64_t trial, std::uint64_t stream)
    : key_(derive_key(seed_base, trial, stream)), engine_(key_) {}

double StreamRng::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double StreamRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double StreamRng::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
    }
}

double StreamRng::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

}  // namespace eigenshift
