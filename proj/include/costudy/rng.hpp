#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace costudy {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Sub-seed for a named consumer of the session seed ("scheduler/agent-1", "router", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Seeded generator with portable draws. The engine is std::mt19937_64; the
// distributions are done here because the standard ones are implementation
// defined and pinned golden values must survive a toolchain change.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next() { return engine_(); }

    // Uniform over [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // Uniform over [0, n).
    std::size_t index(std::size_t n);

    // Uniform over [0, 1) with 53 bits of precision.
    double unit();

    bool chance(double p) { return unit() < p; }

    Rng derive(std::string_view label) const { return Rng(derive_seed(seed_, label)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace costudy
