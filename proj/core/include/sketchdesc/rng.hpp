#pragma once

#include <cstdint>
#include <random>

namespace sketchdesc {

/// Seedable, splittable random stream.
///
/// Backed by mt19937_64. `split(stream)` derives an independent child by
/// hashing (seed, stream) through splitmix64, so per-thread or per-seed
/// streams can be created without sharing state.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    engine_type& engine() noexcept { return engine_; }

    Rng split(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL))); }

    static std::uint64_t mix(std::uint64_t z) noexcept;

private:
    std::uint64_t seed_;
    engine_type engine_;
};

}  // namespace sketchdesc
