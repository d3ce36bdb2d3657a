#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hetreg {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a, used to turn stream labels into stream ids.
constexpr std::uint64_t label_id(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed splitting rule: the seed of replication `index` in stream `stream`
/// of an experiment with master seed `master` is
///   mix64(mix64(master ^ mix64(stream)) + index).
/// Replication r of experiment e is therefore a pure function of
/// (master, e, r), independent of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
    return mix64(mix64(master ^ mix64(stream)) + index);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                    std::uint64_t index = 0) noexcept {
    return derive_seed(master, label_id(stream), index);
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace hetreg
