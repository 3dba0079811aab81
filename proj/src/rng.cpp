#include "pear/rng.hpp"

#include <stdexcept>

namespace pear {

std::uint64_t Rng::uniform(std::uint64_t bound)
{
    if (bound == 0)
        throw std::invalid_argument("Rng::uniform: empty range");
    // 2^64 mod bound, computed without overflow
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold)
            return r % bound;
    }
}

}  // namespace pear
