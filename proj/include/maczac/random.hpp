#pragma once

#include <cstdint>
#include <random>

namespace maczac {

using Rng = std::mt19937_64;

/// Named noise sources. Each gets its own generator so that changing how one
/// source is consumed never shifts the draws of another.
enum class Stream : std::uint64_t {
    Alice = 1,
    DetectorZ = 2,
    DetectorXPlus = 3,
    DetectorXMinus = 4,
    Drift = 5,
    SourcePhase = 6,
    BackgroundDarks = 7,
};

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x6d61637aU};
    return Rng(seq);
}

inline Rng make_stream(std::uint64_t seed, Stream stream) {
    return make_stream(seed, static_cast<std::uint64_t>(stream));
}

}  // namespace maczac
