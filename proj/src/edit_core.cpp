#include "uce/edit_core.hpp"

#include "uce/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace uce {

namespace {

void check_weight(double w, const std::string& where)
{
    if (!(w > 0.0) || !std::isfinite(w))
        throw ValidationError(where + ": weight must be positive and finite");
}

void check_edits(std::span<const EditItem> edits, const Matrix& w_old, const char* who)
{
    for (std::size_t i = 0; i < edits.size(); ++i) {
        const auto& e = edits[i];
        const std::string where = std::string(who) + ": edit " + std::to_string(i);
        if (e.input.size() != w_old.cols())
            throw ValidationError(where + " input dim " + std::to_string(e.input.size()) + " != W cols "
                                  + std::to_string(w_old.cols()));
        if (e.target.size() != w_old.rows())
            throw ValidationError(where + " target dim " + std::to_string(e.target.size()) + " != W rows "
                                  + std::to_string(w_old.rows()));
        require_valid(e.input, where + " input");
        require_valid(e.target, where + " target");
        check_weight(e.weight, where);
    }
}

void check_plan_dims(const EditPlan& plan, const Matrix& w_old, const char* who)
{
    require_valid(w_old, std::string(who) + ": W_old");
    check_edits(plan.edits, w_old, who);
    for (std::size_t j = 0; j < plan.preserves.size(); ++j) {
        const auto& p = plan.preserves[j];
        const std::string where = std::string(who) + ": preserve " + std::to_string(j);
        if (p.input.size() != w_old.cols())
            throw ValidationError(where + " input dim " + std::to_string(p.input.size()) + " != W cols "
                                  + std::to_string(w_old.cols()));
        require_valid(p.input, where + " input");
        check_weight(p.weight, where);
    }
    if (!(plan.canon_reg >= 0.0) || !std::isfinite(plan.canon_reg))
        throw ValidationError(std::string(who) + ": canon_reg must be finite and >= 0");
}

// Adds w·x·x^T to the lower triangle only; mirror_lower() makes it exactly symmetric.
void add_outer_lower(Matrix& gram, const Vector& x, double w)
{
    const Eigen::Index n = x.size();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i)
            gram(i, j) += w * (x(i) * x(j));
}

void mirror_lower(Matrix& gram)
{
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
        for (Eigen::Index i = j + 1; i < gram.rows(); ++i)
            gram(j, i) = gram(i, j);
}

struct Factorization {
    Eigen::LLT<Matrix> llt;
    bool ok = false;
};

Factorization try_cholesky(const Matrix& gram)
{
    Factorization f{Eigen::LLT<Matrix>(gram), false};
    if (f.llt.info() != Eigen::Success)
        return f;
    const auto diag = f.llt.matrixLLT().diagonal().array().square();
    const double max_pivot = diag.maxCoeff();
    const double min_pivot = diag.minCoeff();
    const double floor = static_cast<double>(gram.cols()) * std::numeric_limits<double>::epsilon() * max_pivot;
    f.ok = std::isfinite(max_pivot) && min_pivot > floor;
    return f;
}

double smallest_pivot(const Matrix& gram)
{
    Eigen::LDLT<Matrix> ldlt(gram);
    return ldlt.vectorD().minCoeff();
}

} // namespace

void validate_plan(const EditPlan& plan, const Matrix& w_old)
{
    check_plan_dims(plan, w_old, "plan");
    if (plan.preserves.empty() && !(plan.canon_reg > 0.0))
        throw ValidationError("plan: canon_reg must be > 0 when there are no preserves (rank completion)");
}

Moments assemble_moments(const EditPlan& plan, const Matrix& w_old)
{
    validate_plan(plan, w_old);
    const Eigen::Index cols = w_old.cols();

    Matrix gram = Matrix::Zero(cols, cols);
    Matrix rhs = Matrix::Zero(w_old.rows(), cols);
    for (const auto& e : plan.edits) {
        add_outer_lower(gram, e.input, e.weight);
        rhs.noalias() += (e.weight * e.target) * e.input.transpose();
    }
    for (const auto& p : plan.preserves) {
        add_outer_lower(gram, p.input, p.weight);
        const Vector kept = w_old * p.input;
        rhs.noalias() += (p.weight * kept) * p.input.transpose();
    }
    gram.diagonal().array() += plan.canon_reg;
    rhs += plan.canon_reg * w_old;
    mirror_lower(gram);
    return {std::move(rhs), std::move(gram)};
}

Matrix solve_moments(const Moments& m)
{
    if (m.gram.rows() != m.gram.cols() || m.rhs.cols() != m.gram.rows())
        throw ValidationError("solve_moments: shape mismatch");

    auto f = try_cholesky(m.gram);
    if (!f.ok) {
        const double jitter = 1e-10 * m.gram.trace() / static_cast<double>(m.gram.cols());
        Matrix jittered = m.gram;
        jittered.diagonal().array() += jitter;
        f = try_cholesky(jittered);
        if (!f.ok)
            throw SingularMatrixError("Gram matrix is numerically singular after jitter", smallest_pivot(jittered));
    }
    // W gram = rhs  <=>  gram W^T = rhs^T (gram symmetric)
    Matrix w = f.llt.solve(m.rhs.transpose()).transpose();
    if (!w.allFinite())
        throw SingularMatrixError("solve produced non-finite entries", smallest_pivot(m.gram));
    return w;
}

Matrix uce_solve(const EditPlan& plan, const Matrix& w_old)
{
    if (plan.edits.empty())
        throw ValidationError("uce_solve: plan has no edits");
    Moments m = assemble_moments(plan, w_old);
    // rhs - W_old·gram = sum_i w_i (v_i - W_old c_i) c_i^T, so solving for the
    // update and adding W_old back is the same minimizer. An all-zero residual
    // then gives back W_old bit for bit.
    Matrix residual_moment = Matrix::Zero(w_old.rows(), w_old.cols());
    for (const auto& e : plan.edits) {
        const Vector r = e.target - w_old * e.input;
        residual_moment.noalias() += (e.weight * r) * e.input.transpose();
    }
    return w_old + solve_moments({std::move(residual_moment), std::move(m.gram)});
}

Matrix time_solve(std::span<const EditItem> edits, const Matrix& w_old, double lambda)
{
    require_valid(w_old, "time_solve: W_old");
    if (edits.empty())
        throw ValidationError("time_solve: no edits");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ValidationError("time_solve: lambda must be positive");
    check_edits(edits, w_old, "time_solve");

    const Eigen::Index cols = w_old.cols();
    Matrix gram = lambda * Matrix::Identity(cols, cols);
    Matrix rhs = lambda * w_old;
    for (const auto& e : edits) {
        add_outer_lower(gram, e.input, e.weight);
        rhs.noalias() += (e.weight * e.target) * e.input.transpose();
    }
    mirror_lower(gram);
    return solve_moments({std::move(rhs), std::move(gram)});
}

Matrix memit_delta_solve(std::span<const EditItem> edits, const Matrix& w_old, const Matrix& c0)
{
    require_valid(w_old, "memit_delta_solve: W_old");
    if (edits.empty())
        throw ValidationError("memit_delta_solve: no edits");
    check_edits(edits, w_old, "memit_delta_solve");
    if (c0.rows() != w_old.cols() || c0.cols() != w_old.cols())
        throw ValidationError("memit_delta_solve: C0 must be " + std::to_string(w_old.cols()) + "x"
                              + std::to_string(w_old.cols()));
    require_valid(c0, "memit_delta_solve: C0");

    const double scale = 1.0 + c0.cwiseAbs().maxCoeff();
    if ((c0 - c0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ValidationError("memit_delta_solve: C0 is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c0, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
        throw ValidationError("memit_delta_solve: C0 is not positive semidefinite");

    const Eigen::Index cols = w_old.cols();
    Matrix gram = Matrix::Zero(cols, cols);
    Matrix rhs = Matrix::Zero(w_old.rows(), cols);
    for (const auto& e : edits) {
        add_outer_lower(gram, e.input, e.weight);
        const Vector residual = e.target - w_old * e.input;
        rhs.noalias() += (e.weight * residual) * e.input.transpose();
    }
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = j; i < cols; ++i)
            gram(i, j) += c0(i, j);
    mirror_lower(gram);
    return solve_moments({std::move(rhs), std::move(gram)});
}

double objective_value(const Matrix& w, const EditPlan& plan, const Matrix& w_old)
{
    check_plan_dims(plan, w_old, "objective_value");
    if (w.rows() != w_old.rows() || w.cols() != w_old.cols())
        throw ValidationError("objective_value: W and W_old shapes differ");

    double total = 0.0;
    for (const auto& e : plan.edits)
        total += e.weight * (w * e.input - e.target).squaredNorm();
    const Matrix delta = w - w_old;
    for (const auto& p : plan.preserves)
        total += p.weight * (delta * p.input).squaredNorm();
    total += plan.canon_reg * delta.squaredNorm();
    return total;
}

Matrix objective_gradient(const Matrix& w, const EditPlan& plan, const Matrix& w_old)
{
    if (w.rows() != w_old.rows() || w.cols() != w_old.cols())
        throw ValidationError("objective_gradient: W and W_old shapes differ");
    const Moments m = assemble_moments(plan, w_old);
    return 2.0 * (w * m.gram - m.rhs);
}

double relative_gradient_norm(const Matrix& w, const EditPlan& plan, const Matrix& w_old)
{
    const Moments m = assemble_moments(plan, w_old);
    if (w.rows() != w_old.rows() || w.cols() != w_old.cols())
        throw ValidationError("relative_gradient_norm: W and W_old shapes differ");
    return (2.0 * (w * m.gram - m.rhs)).norm() / (1.0 + m.rhs.norm());
}

} // namespace uce
