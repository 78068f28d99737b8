#pragma once

#include <cstdint>
#include <random>

namespace decrob {

/// Identifies one reproducible random stream: (experiment seed, counter).
/// Any stream can be regenerated in isolation, in any order.
struct StreamId {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    /// A child stream for a sub-purpose (e.g. smoothing samples of one frame).
    constexpr StreamId child(std::uint64_t tag) const noexcept {
        return StreamId{mix(seed ^ 0x9e3779b97f4a7c15ull * (index + 1)), tag};
    }

    static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }
};

using Engine = std::mt19937_64;

inline Engine make_engine(StreamId id) {
    std::seed_seq seq{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32),
                      static_cast<std::uint32_t>(id.index), static_cast<std::uint32_t>(id.index >> 32)};
    return Engine(seq);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t index = 0) { return make_engine(StreamId{seed, index}); }

}  // namespace decrob
