#pragma once

#include <cstdint>
#include <random>

namespace sarcf::rng {

// splitmix64 finalizer. Used to turn (seed, tag) pairs into well-mixed
// engine seeds so that logically distinct draws never share a stream.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Named substreams. Each operation that consumes randomness owns a tag,
// so e.g. treatment assignment is independent of the shock vector even
// when both are derived from the same user-facing seed.
enum class Stream : std::uint64_t {
    kCoords = 1,
    kEcon = 2,
    kShocks = 3,
    kAssign = 4,
    kPairs = 5,
};

constexpr std::uint64_t derive(std::uint64_t seed, Stream stream) {
    return mix64(seed + kGolden * (static_cast<std::uint64_t>(stream) + 1));
}

// Per-replication seed: hash of (master seed, replication index). Makes
// replication r reproducible regardless of execution order or worker
// count.
constexpr std::uint64_t rep_seed(std::uint64_t seed, std::uint64_t rep) {
    return mix64(seed ^ mix64(rep + kGolden));
}

inline std::mt19937_64 engine(std::uint64_t seed, Stream stream) {
    return std::mt19937_64(derive(seed, stream));
}

} // namespace sarcf::rng
