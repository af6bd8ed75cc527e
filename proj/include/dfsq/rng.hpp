#pragma once

#include <cstdint>
#include <random>

namespace dfsq {

// Deterministic random stream. mt19937_64 has a fully specified output
// sequence, so a given (seed, substream id) pair produces identical draws on
// every platform. Parallel consumers carve substreams by id; substream
// derivation mixes the id through splitmix64 so neighboring ids are
// uncorrelated.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(mix(mix(seed) ^ kPhi)) {}

    static RngStream substream(std::uint64_t seed, std::uint64_t id) {
        return RngStream(mix(mix(seed) ^ mix(id + 1)));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform draw strictly inside (0,1); safe to feed an inverse CDF with
    // infinite endpoints.
    double next_unit() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z += kPhi;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
};

} // namespace dfsq
