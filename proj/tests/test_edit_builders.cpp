#include "uce/edit_builders.hpp"
#include "uce/errors.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace uce;
using uce::test_support::random_matrix;
using uce::test_support::random_vector;

namespace {

Vector v2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

Concept one(std::string name, Vector t)
{
    return make_concept(std::move(name), std::move(t));
}

} // namespace

TEST(BuildErase, SelfAnchorIsNoOp)
{
    Rng rng(1);
    const Matrix w_old = random_matrix(rng, 5, 4);
    Concept c{"c", {random_vector(rng, 4), random_vector(rng, 4)}};
    const auto items = build_erase(w_old, c, c);
    ASSERT_EQ(items.size(), 2u);
    for (const auto& e : items)
        EXPECT_EQ(e.target, w_old * e.input);
    EditPlan plan{items, {}, 0.5};
    EXPECT_EQ(uce_solve(plan, w_old), w_old);
}

TEST(BuildErase, IdentityCopiesAnchor)
{
    const auto items = build_erase(Matrix::Identity(2, 2), one("c", v2(1, 0)), one("a", v2(0, 1)));
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].input, v2(1, 0));
    EXPECT_EQ(items[0].target, v2(0, 1));
    EXPECT_EQ(items[0].weight, 1.0);
}

TEST(BuildErase, ThreeTokensAgainstOne)
{
    Concept c{"c", {v2(1, 0), v2(0, 1), v2(1, 1)}};
    const auto items = build_erase(Matrix::Identity(2, 2), c, one("a", v2(3, 4)));
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].input, v2(1, 1));
    EXPECT_EQ(items[0].target, v2(3, 4));
}

TEST(BuildErase, DimMismatchRejected)
{
    EXPECT_THROW(build_erase(Matrix::Identity(3, 3), one("c", v2(1, 0)), one("a", v2(0, 1))), ValidationError);
}

TEST(BuildModerate, ZeroUnconditionalGivesZeroTarget)
{
    Rng rng(2);
    const Matrix w_old = random_matrix(rng, 3, 2);
    const auto items = build_moderate(w_old, one("c", v2(1, 2)), one("empty", Vector::Zero(2)));
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].target, Vector::Zero(3));
}

TEST(BuildModerate, SelfIsNoOp)
{
    Rng rng(3);
    const Matrix w_old = random_matrix(rng, 3, 3);
    const Concept c = one("c", random_vector(rng, 3));
    EditPlan plan{build_moderate(w_old, c, c), {}, 0.5};
    EXPECT_EQ(uce_solve(plan, w_old), w_old);
}

TEST(BuildModerate, HandArithmetic)
{
    const auto items = build_moderate(2 * Matrix::Identity(2, 2), one("c", v2(1, 0)), one("u", v2(0, 1)));
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].input, v2(1, 0));
    EXPECT_EQ(items[0].target, v2(0, 2));
}

TEST(BuildDebias, ZeroAlphaIsNoOp)
{
    Rng rng(4);
    const Matrix w_old = random_matrix(rng, 4, 4);
    const Concept c = one("c", random_vector(rng, 4));
    const std::vector<Concept> attrs{one("a", random_vector(rng, 4)), one("b", random_vector(rng, 4))};
    const std::vector<double> alphas{0.0, 0.0};
    const auto items = build_debias(w_old, c, attrs, alphas);
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].target, w_old * c.last_token());
    EditPlan plan{items, {}, 0.5};
    EXPECT_LE((uce_solve(plan, w_old) - w_old).norm(), 1e-10);
}

TEST(BuildDebias, HandArithmetic)
{
    const std::vector<Concept> attrs{one("a", v2(0, 1))};
    const std::vector<double> alphas{0.3};
    const auto items = build_debias(Matrix::Identity(2, 2), one("c", v2(1, 0)), attrs, alphas);
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].target, v2(1, 0.3));
}

TEST(BuildDebias, OpposedAttributesAdd)
{
    Rng rng(5);
    const Matrix w_old = random_matrix(rng, 3, 3);
    const Vector a1 = random_vector(rng, 3);
    const Concept c = one("c", random_vector(rng, 3));
    const std::vector<Concept> attrs{one("a1", a1), one("a2", -a1)};
    const std::vector<double> alphas{0.2, -0.2};
    const auto items = build_debias(w_old, c, attrs, alphas);
    const Vector expect = w_old * (c.last_token() + 0.4 * a1);
    EXPECT_LE((items[0].target - expect).norm(), 1e-14);
}

TEST(BuildDebias, MatchesAdditiveForm)
{
    // W (c + sum alpha a) == W c + sum alpha W a
    Rng rng(6);
    const Matrix w_old = random_matrix(rng, 5, 4);
    const Concept c = one("c", random_vector(rng, 4));
    std::vector<Concept> attrs;
    std::vector<double> alphas;
    for (int p = 0; p < 3; ++p) {
        attrs.push_back(one("a" + std::to_string(p), random_vector(rng, 4)));
        alphas.push_back(rng.normal());
    }
    Vector additive = w_old * c.last_token();
    for (int p = 0; p < 3; ++p)
        additive += alphas[static_cast<std::size_t>(p)] * (w_old * attrs[static_cast<std::size_t>(p)].last_token());
    EXPECT_LE((build_debias(w_old, c, attrs, alphas)[0].target - additive).norm(), 1e-12);
}

TEST(BuildDebias, UsesLastTokens)
{
    Concept c{"c", {v2(9, 9), v2(1, 0)}};
    Concept a{"a", {v2(5, 5), v2(0, 1)}};
    const std::vector<Concept> attrs{a};
    const std::vector<double> alphas{0.5};
    const auto items = build_debias(Matrix::Identity(2, 2), c, attrs, alphas);
    ASSERT_EQ(items.size(), 1u);
    EXPECT_EQ(items[0].input, v2(1, 0));
    EXPECT_EQ(items[0].target, v2(1, 0.5));
}

TEST(BuildDebias, LengthMismatchRejected)
{
    const std::vector<Concept> attrs{one("a", v2(0, 1))};
    const std::vector<double> alphas{0.1, 0.2};
    EXPECT_THROW(build_debias(Matrix::Identity(2, 2), one("c", v2(1, 0)), attrs, alphas), ValidationError);
    EXPECT_THROW(build_debias(Matrix::Identity(2, 2), one("c", v2(1, 0)), {}, {}), ValidationError);
}

TEST(Builders, LinearInWOld)
{
    Rng rng(7);
    const Matrix w_old = random_matrix(rng, 4, 3);
    const Concept c{"c", {random_vector(rng, 3), random_vector(rng, 3)}};
    const Concept anchor = one("a", random_vector(rng, 3));
    const std::vector<Concept> attrs{one("x", random_vector(rng, 3)), one("y", random_vector(rng, 3))};
    const std::vector<double> alphas{0.25, -0.75};
    const std::vector<EditMode> modes{EraseMode{anchor}, ModerateMode{anchor}, DebiasMode{attrs, alphas}};
    for (const auto& mode : modes) {
        const auto base = build_edits(w_old, c, mode);
        const auto doubled = build_edits(2.0 * w_old, c, mode);
        ASSERT_EQ(base.size(), doubled.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            EXPECT_EQ(doubled[i].input, base[i].input);
            EXPECT_EQ(doubled[i].target, 2.0 * base[i].target);
        }
    }
}

TEST(Builders, DoNotModifyWOld)
{
    Rng rng(8);
    const Matrix w_old = random_matrix(rng, 3, 3);
    const Matrix copy = w_old;
    const Concept c = one("c", random_vector(rng, 3));
    build_erase(w_old, c, one("a", random_vector(rng, 3)));
    EXPECT_EQ(w_old, copy);
}

TEST(PreserveItems, OnePerToken)
{
    const std::vector<Concept> cs{Concept{"a", {v2(1, 0), v2(0, 1)}}, one("b", v2(1, 1))};
    const auto items = preserve_items(cs, 2.0);
    ASSERT_EQ(items.size(), 3u);
    EXPECT_EQ(items[2].input, v2(1, 1));
    EXPECT_EQ(items[2].weight, 2.0);
}
