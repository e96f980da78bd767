#pragma once

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so results do not depend on evaluation order or thread
// count.

#include <cstdint>
#include <string_view>

namespace convlab::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
}

constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t value) noexcept {
    return mix64(key ^ mix64(value + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over the bytes of a string, used to turn world ids into keys.
constexpr std::uint64_t hash_name(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Key of the substream identified by (seed, world, stage, trial).
constexpr std::uint64_t substream(std::uint64_t seed, std::string_view world_id, std::uint64_t stage,
                                  std::uint64_t trial) noexcept {
    return combine(combine(combine(mix64(seed), hash_name(world_id)), stage), trial);
}

/// The `index`-th uniform 64-bit draw of stream `key`.
constexpr std::uint64_t draw(std::uint64_t key, std::uint64_t index) noexcept {
    return combine(key, index);
}

} // namespace convlab::rng
