#pragma once

#include <cstdint>
#include <random>

namespace pear {

// Seeded generator shared by one world. Bounded draws use rejection sampling
// on the raw mt19937_64 stream so results do not depend on the standard
// library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // Uniform in [0, bound). bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

}  // namespace pear
