#include "uce/edit_core.hpp"
#include "uce/errors.hpp"
#include "uce/metrics.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace uce;
using uce::test_support::random_case;
using uce::test_support::random_matrix;
using uce::test_support::random_vector;

namespace {

Vector v2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

Matrix m2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

EditPlan fixed_point_version(EditPlan plan, const Matrix& w_old)
{
    for (auto& e : plan.edits)
        e.target = w_old * e.input;
    return plan;
}

// Dense C0 equal to the preserve Gram sum plus canon_reg·I.
Matrix preserve_gram(const EditPlan& plan, Eigen::Index cols)
{
    Matrix c0 = plan.canon_reg * Matrix::Identity(cols, cols);
    for (const auto& p : plan.preserves)
        c0 += p.weight * p.input * p.input.transpose();
    return 0.5 * (c0 + c0.transpose());
}

} // namespace

TEST(AssembleMoments, HandExample)
{
    EditPlan plan{{{v2(1, 0), v2(2, 0)}}, {}, 1.0};
    const Moments m = assemble_moments(plan, Matrix::Identity(2, 2));
    EXPECT_EQ(m.gram, m2(2, 0, 0, 1));
    EXPECT_EQ(m.rhs, m2(3, 0, 0, 1));
}

TEST(AssembleMoments, NoEditsSolvesToWOld)
{
    Rng rng(5);
    const Matrix w_old = random_matrix(rng, 3, 4);
    EditPlan plan{{}, {}, 0.7};
    const Moments m = assemble_moments(plan, w_old);
    EXPECT_TRUE(m.gram.isApprox(0.7 * Matrix::Identity(4, 4)));
    EXPECT_TRUE(m.rhs.isApprox(0.7 * w_old));
    EXPECT_LE((solve_moments(m) - w_old).norm(), 1e-12);
}

TEST(AssembleMoments, GramExactlySymmetric)
{
    Rng rng(17);
    const Matrix w_old = random_matrix(rng, 6, 6);
    EditPlan plan;
    plan.canon_reg = 0.3;
    for (int i = 0; i < 4; ++i)
        plan.edits.push_back({random_vector(rng, 6), random_vector(rng, 6), 0.5 + i});
    for (int j = 0; j < 5; ++j)
        plan.preserves.push_back({random_vector(rng, 6), 1.0 + j});
    const Moments m = assemble_moments(plan, w_old);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j)
            EXPECT_EQ(m.gram(i, j), m.gram(j, i));
}

TEST(AssembleMoments, ErrorNamesItemIndex)
{
    EditPlan plan{{{v2(1, 0), v2(1, 1)}, {Vector::Ones(3), v2(0, 0)}}, {}, 1.0};
    try {
        assemble_moments(plan, Matrix::Identity(2, 2));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("edit 1"), std::string::npos) << e.what();
    }
    EditPlan bad_preserve{{{v2(1, 0), v2(1, 1)}}, {{v2(1, 0)}, {v2(0, 1)}, {Vector::Ones(5)}}, 1.0};
    try {
        assemble_moments(bad_preserve, Matrix::Identity(2, 2));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("preserve 2"), std::string::npos) << e.what();
    }
}

TEST(ValidatePlan, RankCompletionRequired)
{
    EditPlan plan{{{v2(1, 0), v2(1, 1)}}, {}, 0.0};
    EXPECT_THROW(validate_plan(plan, Matrix::Identity(2, 2)), ValidationError);
    plan.preserves.push_back({v2(0, 1)});
    EXPECT_NO_THROW(validate_plan(plan, Matrix::Identity(2, 2)));
    plan.canon_reg = -1;
    EXPECT_THROW(validate_plan(plan, Matrix::Identity(2, 2)), ValidationError);
}

TEST(ValidatePlan, NonPositiveWeightRejected)
{
    EditPlan plan{{{v2(1, 0), v2(1, 1), 0.0}}, {}, 1.0};
    EXPECT_THROW(validate_plan(plan, Matrix::Identity(2, 2)), ValidationError);
}

TEST(UceSolve, HandSolved2x2)
{
    // A = diag(2,1), B = [[1,0],[1,1]]  =>  B A^-1 = [[1/2,0],[1/2,1]]
    EditPlan plan{{{v2(1, 0), v2(0, 1)}}, {}, 1.0};
    const Matrix w = uce_solve(plan, Matrix::Identity(2, 2));
    EXPECT_LE((w - m2(0.5, 0, 0.5, 1)).norm(), 1e-15);
    const Moments m = assemble_moments(plan, Matrix::Identity(2, 2));
    EXPECT_EQ(m.rhs, m2(1, 0, 1, 1));
    EXPECT_EQ(m.gram, m2(2, 0, 0, 1));
}

TEST(UceSolve, HandSolvedMatchesGradientDescent)
{
    EditPlan plan{{{v2(1, 0), v2(0, 1)}}, {}, 1.0};
    GradientDescentOptions opt;
    opt.max_steps = 50000;
    opt.learning_rate = 1e-3;
    const Matrix gd = gradient_descent_reference(plan, Matrix::Identity(2, 2), opt);
    EXPECT_LE((gd - uce_solve(plan, Matrix::Identity(2, 2))).norm(), 1e-5);
}

TEST(UceSolve, NoEditsRejected)
{
    EXPECT_THROW(uce_solve(EditPlan{{}, {}, 1.0}, Matrix::Identity(2, 2)), ValidationError);
}

TEST(UceSolve, FixedPointAllSolvers)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto rc = random_case(seed);
        const EditPlan plan = fixed_point_version(rc.plan, rc.w_old);
        EXPECT_LE((uce_solve(plan, rc.w_old) - rc.w_old).norm(), 1e-10) << seed;
        EXPECT_LE((time_solve(plan.edits, rc.w_old, plan.canon_reg) - rc.w_old).norm(), 1e-10) << seed;
        const Matrix delta = memit_delta_solve(plan.edits, rc.w_old, preserve_gram(plan, rc.w_old.cols()));
        EXPECT_LE(delta.norm(), 1e-12) << seed;
    }
}

TEST(UceSolve, NoOpIsBitExact)
{
    const auto rc = random_case(3);
    const EditPlan plan = fixed_point_version(rc.plan, rc.w_old);
    // residuals W_old c - W_old c are exactly zero, so the update is too
    EXPECT_EQ(uce_solve(plan, rc.w_old), rc.w_old);
}

TEST(UceSolve, Stationarity)
{
    for (std::uint64_t seed = 100; seed < 300; ++seed) {
        const auto rc = random_case(seed);
        const Matrix w = uce_solve(rc.plan, rc.w_old);
        EXPECT_LE(relative_gradient_norm(w, rc.plan, rc.w_old), 1e-8) << seed;
    }
}

TEST(UceSolve, GradientMatchesFiniteDifference)
{
    const auto rc = random_case(42);
    Rng rng(1);
    const Matrix w = random_matrix(rng, rc.w_old.rows(), rc.w_old.cols());
    const Matrix g = objective_gradient(w, rc.plan, rc.w_old);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            Matrix wp = w;
            Matrix wm = w;
            wp(i, j) += h;
            wm(i, j) -= h;
            const double fd = (objective_value(wp, rc.plan, rc.w_old) - objective_value(wm, rc.plan, rc.w_old)) / (2 * h);
            EXPECT_NEAR(fd, g(i, j), 1e-5 * (1 + std::abs(fd)));
        }
    }
}

TEST(UceSolve, LocalOptimalityProbe)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rc = random_case(1000 + seed);
        const Matrix w = uce_solve(rc.plan, rc.w_old);
        const double best = objective_value(w, rc.plan, rc.w_old);
        EXPECT_LE(best, objective_value(rc.w_old, rc.plan, rc.w_old));
        Rng rng(seed);
        for (int k = 0; k < 100; ++k) {
            Matrix e = random_matrix(rng, w.rows(), w.cols());
            e *= 1e-3 / e.norm();
            EXPECT_LE(best, objective_value(w + e, rc.plan, rc.w_old)) << seed << "/" << k;
        }
    }
}

TEST(UceSolve, MonteCarloMinimality)
{
    const auto rc = random_case(77);
    const Matrix w = uce_solve(rc.plan, rc.w_old);
    const double best = objective_value(w, rc.plan, rc.w_old);
    Rng rng(77);
    for (int k = 0; k < 1000; ++k) {
        const Matrix probe = random_matrix(rng, w.rows(), w.cols());
        EXPECT_LE(best, objective_value(probe, rc.plan, rc.w_old));
    }
}

TEST(UceSolve, MatchesGradientDescentOracle)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto rc = random_case(500 + seed);
        const Matrix closed = uce_solve(rc.plan, rc.w_old);
        const Matrix gd = gradient_descent_reference(rc.plan, rc.w_old);
        EXPECT_LE((closed - gd).norm(), 1e-5) << seed;
    }
}

TEST(UceSolve, PreservationMonotonicity)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rc = random_case(2000 + seed);
        Rng rng(seed);
        const Vector probe = random_vector(rng, rc.w_old.cols());
        double previous = ((uce_solve(rc.plan, rc.w_old) - rc.w_old) * probe).norm();
        for (double w : {1.0, 10.0, 100.0}) {
            EditPlan plan = rc.plan;
            plan.preserves.push_back({probe, w});
            const double drift = ((uce_solve(plan, rc.w_old) - rc.w_old) * probe).norm();
            EXPECT_LE(drift, previous * (1 + 1e-9) + 1e-12) << seed << " weight " << w;
            previous = drift;
        }
    }
}

TEST(UceSolve, AffineInTargets)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rc = random_case(3000 + seed);
        const Matrix w1 = uce_solve(rc.plan, rc.w_old);
        for (double alpha : {0.0, 0.5, 1.0}) {
            EditPlan plan = rc.plan;
            for (auto& e : plan.edits)
                e.target = alpha * e.target + (1 - alpha) * (rc.w_old * e.input);
            const Matrix wa = uce_solve(plan, rc.w_old);
            EXPECT_LE(relative_gradient_norm(wa, plan, rc.w_old), 1e-8);
            // the solution interpolates linearly between W_old and W(1)
            EXPECT_LE((wa - (alpha * w1 + (1 - alpha) * rc.w_old)).norm(), 1e-10 * (1 + w1.norm()));
        }
    }
}

TEST(UceSolve, JitterRescuesRankDeficient)
{
    // canon_reg 0 and a preserve that spans only half the space: exactly singular
    EditPlan plan{{{v2(1, 0), v2(1, 1)}}, {{v2(1, 0)}}, 0.0};
    const Matrix w = uce_solve(plan, Matrix::Identity(2, 2));
    ASSERT_TRUE(w.allFinite());
    EXPECT_LE(relative_gradient_norm(w, plan, Matrix::Identity(2, 2)), 1e-8);
    // the null direction is left alone
    EXPECT_LE((w.col(1) - Vector::Unit(2, 1)).norm(), 1e-12);
}

TEST(UceSolve, ZeroGramIsSingular)
{
    // jitter scales with the trace, so an all-zero Gram matrix cannot be rescued
    EditPlan plan{{{v2(0, 0), v2(1, 1)}}, {{v2(0, 0)}}, 0.0};
    try {
        uce_solve(plan, Matrix::Identity(2, 2));
        FAIL();
    } catch (const SingularMatrixError& e) {
        EXPECT_EQ(e.smallest_pivot(), 0.0);
        EXPECT_NE(std::string(e.what()).find("pivot"), std::string::npos) << e.what();
    }
}

TEST(TimeSolve, EqualsUceWithoutPreserves)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto rc = random_case(4000 + seed);
        rc.plan.preserves.clear();
        const Matrix a = time_solve(rc.plan.edits, rc.w_old, rc.plan.canon_reg);
        const Matrix b = uce_solve(rc.plan, rc.w_old);
        EXPECT_LE((a - b).norm(), 1e-10) << seed;
    }
}

TEST(TimeSolve, LargeLambdaBarelyMoves)
{
    Rng rng(8);
    const Matrix w_old = random_matrix(rng, 4, 4);
    Vector c = random_vector(rng, 4);
    c.normalize();
    const std::vector<EditItem> edits{{c, random_vector(rng, 4)}};
    const Matrix w = time_solve(edits, w_old, 1e9);
    EXPECT_LE((w - w_old).norm(), 1e-6);
}

TEST(TimeSolve, RejectsBadLambda)
{
    const std::vector<EditItem> edits{{v2(1, 0), v2(0, 1)}};
    EXPECT_THROW(time_solve(edits, Matrix::Identity(2, 2), 0.0), ValidationError);
}

TEST(MemitDelta, EqualsUce)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto rc = random_case(5000 + seed);
        const Matrix c0 = preserve_gram(rc.plan, rc.w_old.cols());
        const Matrix delta = memit_delta_solve(rc.plan.edits, rc.w_old, c0);
        EXPECT_LE((rc.w_old + delta - uce_solve(rc.plan, rc.w_old)).norm(), 1e-9) << seed;
    }
}

TEST(MemitDelta, Random5x5)
{
    Rng rng(55);
    const Matrix w_old = random_matrix(rng, 5, 5);
    EditPlan plan;
    plan.canon_reg = 0.5;
    for (int i = 0; i < 3; ++i)
        plan.edits.push_back({random_vector(rng, 5), random_vector(rng, 5)});
    for (int j = 0; j < 4; ++j)
        plan.preserves.push_back({random_vector(rng, 5)});
    const Matrix delta = memit_delta_solve(plan.edits, w_old, preserve_gram(plan, 5));
    EXPECT_LE((w_old + delta - uce_solve(plan, w_old)).norm(), 1e-9);
}

TEST(MemitDelta, RankOneUpdate)
{
    Rng rng(12);
    const Matrix w_old = random_matrix(rng, 3, 4);
    Vector c = random_vector(rng, 4);
    c.normalize();
    const Vector v = random_vector(rng, 3);
    const std::vector<EditItem> edits{{c, v}};
    const Matrix delta = memit_delta_solve(edits, w_old, 1e-9 * Matrix::Identity(4, 4));
    const Matrix expect = (v - w_old * c) * c.transpose();
    EXPECT_LE((delta - expect).norm(), 1e-6);
}

TEST(MemitDelta, RejectsIndefiniteC0)
{
    const std::vector<EditItem> edits{{v2(1, 0), v2(0, 1)}};
    EXPECT_THROW(memit_delta_solve(edits, Matrix::Identity(2, 2), m2(1, 0, 0, -1)), ValidationError);
    EXPECT_THROW(memit_delta_solve(edits, Matrix::Identity(2, 2), m2(1, 0.5, 0, 1)), ValidationError);
}

TEST(Objective, ZeroAtFixedPoint)
{
    const auto rc = random_case(9);
    EXPECT_EQ(objective_value(rc.w_old, fixed_point_version(rc.plan, rc.w_old), rc.w_old), 0.0);
}

TEST(Objective, HandValue)
{
    EditPlan plan{{{v2(1, 0), v2(0, 1)}}, {}, 0.0};
    EXPECT_EQ(objective_value(Matrix::Identity(2, 2), plan, Matrix::Identity(2, 2)), 2.0);
}

TEST(Objective, DimMismatchRejected)
{
    EditPlan plan{{{v2(1, 0), v2(0, 1)}}, {}, 1.0};
    EXPECT_THROW(objective_value(Matrix::Identity(3, 3), plan, Matrix::Identity(2, 2)), ValidationError);
}
