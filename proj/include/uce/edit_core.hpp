#pragma once

#include "uce/tensor_io.hpp"

#include <span>
#include <vector>

namespace uce {

/// Scale of the canonical-basis preservation terms when a plan does not set one.
inline constexpr double kDefaultCanonReg = 0.5;

/// Redirect W·input towards target.
struct EditItem {
    Vector input;
    Vector target;
    double weight = 1.0;
};

/// Pin W·input to its pre-edit value W_old·input.
struct PreserveItem {
    Vector input;
    double weight = 1.0;
};

/// Everything the closed-form solver needs besides W_old.
///
/// canon_reg adds canon_reg·||W - W_old||_F^2 to the objective, which is the
/// same as preserving every canonical basis direction with that weight. It
/// must be positive when there are no preserves, otherwise the Gram matrix of
/// a handful of edits is rank deficient.
struct EditPlan {
    std::vector<EditItem> edits;
    std::vector<PreserveItem> preserves;
    double canon_reg = kDefaultCanonReg;
};

/// Normal-equation moments of the editing objective; W_new solves W·gram = rhs.
///
///   rhs  = sum_i w_i v_i c_i^T + sum_j w_j W_old c_j c_j^T + canon_reg·W_old
///   gram = sum_i w_i c_i c_i^T + sum_j w_j c_j c_j^T     + canon_reg·I
struct Moments {
    Matrix rhs;
    Matrix gram;
};

/// Checks dims, weights, finiteness and the rank-completion rule. The error
/// message names the offending item index. Empty edit lists are accepted
/// here; the solvers reject them separately.
void validate_plan(const EditPlan& plan, const Matrix& w_old);

Moments assemble_moments(const EditPlan& plan, const Matrix& w_old);

/// rhs · gram^-1 through a Cholesky factorization of gram (never an explicit
/// inverse). If the factorization fails or a pivot is at roundoff level, the
/// diagonal gets 1e-10·trace(gram)/cols added and one retry is made; a second
/// failure raises SingularMatrixError with the smallest pivot.
Matrix solve_moments(const Moments& m);

/// Globally optimal W for the plan.
Matrix uce_solve(const EditPlan& plan, const Matrix& w_old);

/// (sum v c^T + lambda W_old)(sum c c^T + lambda I)^-1, built directly from
/// the edit list.
Matrix time_solve(std::span<const EditItem> edits, const Matrix& w_old, double lambda);

/// Update in delta form: R C^T (C C^T + c0)^-1 with R = V - W_old C.
/// c0 must be symmetric positive semidefinite (cols x cols).
Matrix memit_delta_solve(std::span<const EditItem> edits, const Matrix& w_old, const Matrix& c0);

/// sum w_i ||W c_i - v_i||^2 + sum w_j ||(W - W_old) c_j||^2 + canon_reg ||W - W_old||_F^2
double objective_value(const Matrix& w, const EditPlan& plan, const Matrix& w_old);

/// Gradient of objective_value with respect to W: 2 (W·gram - rhs).
Matrix objective_gradient(const Matrix& w, const EditPlan& plan, const Matrix& w_old);

/// ||gradient||_F / (1 + ||rhs||_F); zero at the exact optimum.
double relative_gradient_norm(const Matrix& w, const EditPlan& plan, const Matrix& w_old);

} // namespace uce
