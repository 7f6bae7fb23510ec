#pragma once

#include "uce/edit_core.hpp"
#include "uce/rng.hpp"

#include <cmath>

namespace uce::test_support {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = scale * rng.normal();
    return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0)
{
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = scale * rng.normal();
    return v;
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi)
{
    return lo + static_cast<std::size_t>(rng.next() % (hi - lo + 1));
}

struct RandomCase {
    EditPlan plan;
    Matrix w_old;
};

// dims 2..12, 1..5 edits, 0..8 preserves, canon_reg from {0.1, 0.5, 1}
inline RandomCase random_case(std::uint64_t seed)
{
    Rng rng(seed);
    const auto rows = static_cast<Eigen::Index>(pick(rng, 2, 12));
    const auto cols = static_cast<Eigen::Index>(pick(rng, 2, 12));
    const std::size_t n_edits = pick(rng, 1, 5);
    const std::size_t n_preserves = pick(rng, 0, 8);
    static constexpr double regs[] = {0.1, 0.5, 1.0};

    RandomCase out;
    out.w_old = random_matrix(rng, rows, cols, 1.0 / std::sqrt(static_cast<double>(cols)));
    out.plan.canon_reg = regs[rng.next() % 3];
    for (std::size_t i = 0; i < n_edits; ++i) {
        Vector c = random_vector(rng, cols);
        c.normalize();
        out.plan.edits.push_back({c, random_vector(rng, rows), 1.0});
    }
    for (std::size_t j = 0; j < n_preserves; ++j) {
        Vector c = random_vector(rng, cols);
        c.normalize();
        out.plan.preserves.push_back({c, 1.0});
    }
    return out;
}

} // namespace uce::test_support
