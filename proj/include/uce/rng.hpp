#pragma once

#include <cstdint>
#include <random>

namespace uce {

/// Reproducible random source used for every seeded quantity in the project.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Doubles and normals are derived here rather than through
/// <random> distributions, which are implementation-defined:
///
///   uniform()  = (next() >> 11) * 2^-53                      in [0, 1)
///   normal()   = sqrt(-2 ln u1) * cos(2 pi u2),
///                u1 = ((next() >> 11) + 1) * 2^-53           in (0, 1]
///                u2 = uniform()
///
/// Each normal() consumes exactly two 64-bit draws; the sine half of the
/// Box-Muller pair is discarded so the stream position never depends on
/// call history.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double normal();

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent stream seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

} // namespace uce
