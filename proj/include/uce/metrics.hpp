#pragma once

#include "uce/debias_driver.hpp"
#include "uce/edit_core.hpp"
#include "uce/embed_store.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace uce {

/// Printed at the top of every report: these are vector-level drift norms,
/// not image-space quality metrics.
inline constexpr std::string_view kReportScopeNote =
    "vector-level residual and drift norms only; no image-space metric (FID, LPIPS, CLIP) is emulated";

struct EditReport {
    std::vector<double> residuals;       ///< ||W_new c_i - v_i||
    std::vector<double> preserve_drifts; ///< ||(W_new - W_old) c_j||
    std::vector<double> holdout_drifts;  ///< same, last token of each holdout concept
    double objective_before = 0.0;
    double objective_after = 0.0;

    nlohmann::ordered_json to_json() const;
    static EditReport from_json(const nlohmann::json& j);
};

EditReport edit_report(const Matrix& w_old, const Matrix& w_new, const EditPlan& plan,
                       std::span<const Concept> holdout);

/// Field-by-field comparison; returns the names of fields that differ by more
/// than tol (or differ in length), e.g. "residuals[2]".
std::vector<std::string> diff_reports(const EditReport& expected, const EditReport& actual, double tol);

/// Fixed-width text rendering used by the CLI summary.
std::string render_report(const EditReport& report, std::string_view title);

/// |p_desired - p_actual| / p_desired
double delta_bias(double p_actual, double p_desired);

/// delta_bias evaluated on the attribute with the largest actual share.
double majority_delta_bias(const RatioVector& actual, const RatioVector& desired);

/// Mean of majority_delta_bias over concepts.
double mean_delta_bias(std::span<const RatioVector> actual, std::span<const RatioVector> desired);

/// softmax(q K^T) V with a plain row-wise softmax (no 1/sqrt(d) scaling).
Matrix toy_attention(const Matrix& q, const Matrix& keys, const Matrix& values);

/// The attention weights alone; each row sums to 1.
Matrix attention_weights(const Matrix& q, const Matrix& keys);

struct GradientDescentOptions {
    std::size_t max_steps = 100000;
    std::optional<double> learning_rate; ///< default 0.5 / Gershgorin bound of the Gram matrix
    double gradient_tolerance = 1e-10;   ///< stop once ||grad||_F drops below this
};

/// Full-batch gradient descent on the editing objective starting from W_old.
///
/// Deliberately shares no code with the closed-form path: the gradient is
/// accumulated term by term from the plan items, and nothing is factorized.
/// Throws DivergenceError if the objective rises 10 steps in a row.
Matrix gradient_descent_reference(const EditPlan& plan, const Matrix& w_old, const GradientDescentOptions& options = {});

} // namespace uce
