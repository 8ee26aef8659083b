#pragma once

#include <cstdint>
#include <random>

namespace eigenshift {

/// Independent random stream keyed by (seed_base, trial, stream).
///
/// Algorithm, pinned for reproducibility:
///   key  = splitmix64(splitmix64(splitmix64(seed_base) ^ trial) ^ stream)
///   bits = std::mt19937_64 seeded with `key` (fully specified by the
///          standard)
///   uniform in (0,1): ((bits >> 11) + 0.5) * 2^-53
///   normal: Box-Muller on two uniforms, cosine branch first, sine branch
///           cached for the next call
///   gamma(shape >= 1): Marsaglia-Tsang on the normals and uniforms above;
///           shape < 1 via the u^(1/shape) boost
/// std distributions are not used because their output is
/// implementation-defined.
class StreamRng {
public:
    StreamRng(std::uint64_t seed_base, std::uint64_t trial, std::uint64_t stream);

    static std::uint64_t splitmix64(std::uint64_t x);
    static std::uint64_t derive_key(std::uint64_t seed_base, std::uint64_t trial, std::uint64_t stream);

    std::uint64_t key() const { return key_; }
    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double normal();
    double gamma(double shape);
    /// +1 or -1 with equal probability.
    double rademacher();

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream identifiers used by the generators.
namespace streams {
inline constexpr std::uint64_t samples = 1;
inline constexpr std::uint64_t goe = 2;
inline constexpr std::uint64_t rotation = 3;
inline constexpr std::uint64_t instance = 4;
}  // namespace streams

}  // namespace eigenshift
