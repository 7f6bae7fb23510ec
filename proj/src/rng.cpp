#include "uce/rng.hpp"

#include <cmath>
#include <numbers>

namespace uce {

namespace {
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}

double Rng::uniform()
{
    return static_cast<double>(next() >> 11) * kTwoPow53Inv;
}

double Rng::normal()
{
    const double u1 = static_cast<double>((next() >> 11) + 1) * kTwoPow53Inv;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace uce
