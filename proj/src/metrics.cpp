#include "uce/metrics.hpp"

#include "uce/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace uce {

nlohmann::ordered_json EditReport::to_json() const
{
    nlohmann::ordered_json j;
    j["note"] = std::string(kReportScopeNote);
    j["residuals"] = residuals;
    j["preserve_drifts"] = preserve_drifts;
    j["holdout_drifts"] = holdout_drifts;
    j["objective_before"] = objective_before;
    j["objective_after"] = objective_after;
    return j;
}

EditReport EditReport::from_json(const nlohmann::json& j)
{
    EditReport r;
    try {
        r.residuals = j.at("residuals").get<std::vector<double>>();
        r.preserve_drifts = j.at("preserve_drifts").get<std::vector<double>>();
        r.holdout_drifts = j.at("holdout_drifts").get<std::vector<double>>();
        r.objective_before = j.at("objective_before").get<double>();
        r.objective_after = j.at("objective_after").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("report: ") + e.what());
    }
    return r;
}

EditReport edit_report(const Matrix& w_old, const Matrix& w_new, const EditPlan& plan,
                       std::span<const Concept> holdout)
{
    if (w_new.rows() != w_old.rows() || w_new.cols() != w_old.cols())
        throw ValidationError("edit_report: W_new and W_old shapes differ");
    require_valid(w_new, "edit_report: W_new");

    EditReport r;
    r.objective_before = objective_value(w_old, plan, w_old);
    r.objective_after = objective_value(w_new, plan, w_old);
    for (const auto& e : plan.edits)
        r.residuals.push_back((w_new * e.input - e.target).norm());
    const Matrix delta = w_new - w_old;
    for (const auto& p : plan.preserves)
        r.preserve_drifts.push_back((delta * p.input).norm());
    for (const auto& h : holdout) {
        if (static_cast<Eigen::Index>(h.dim()) != w_old.cols())
            throw ValidationError("edit_report: holdout \"" + h.name + "\" dim mismatch");
        r.holdout_drifts.push_back((delta * h.last_token()).norm());
    }
    return r;
}

std::vector<std::string> diff_reports(const EditReport& expected, const EditReport& actual, double tol)
{
    std::vector<std::string> bad;
    auto cmp_list = [&](const char* name, const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) {
            bad.push_back(std::string(name) + ".length");
            return;
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!(std::abs(a[i] - b[i]) <= tol))
                bad.push_back(std::string(name) + "[" + std::to_string(i) + "]");
    };
    cmp_list("residuals", expected.residuals, actual.residuals);
    cmp_list("preserve_drifts", expected.preserve_drifts, actual.preserve_drifts);
    cmp_list("holdout_drifts", expected.holdout_drifts, actual.holdout_drifts);
    if (!(std::abs(expected.objective_before - actual.objective_before) <= tol))
        bad.emplace_back("objective_before");
    if (!(std::abs(expected.objective_after - actual.objective_after) <= tol))
        bad.emplace_back("objective_after");
    return bad;
}

std::string render_report(const EditReport& report, std::string_view title)
{
    std::ostringstream out;
    char line[128];
    out << "# " << title << "\n# " << kReportScopeNote << "\n";
    std::snprintf(line, sizeof line, "%-18s %8s %14s %14s %14s\n", "quantity", "count", "mean", "max", "");
    out << line;
    auto row = [&](const char* name, const std::vector<double>& xs) {
        double mean = 0.0;
        double mx = 0.0;
        for (double x : xs) {
            mean += x;
            mx = std::max(mx, x);
        }
        if (!xs.empty())
            mean /= static_cast<double>(xs.size());
        std::snprintf(line, sizeof line, "%-18s %8zu %14.6e %14.6e\n", name, xs.size(), mean, mx);
        out << line;
    };
    row("edit residual", report.residuals);
    row("preserve drift", report.preserve_drifts);
    row("holdout drift", report.holdout_drifts);
    std::snprintf(line, sizeof line, "%-18s %8s %14.6e\n", "objective before", "", report.objective_before);
    out << line;
    std::snprintf(line, sizeof line, "%-18s %8s %14.6e\n", "objective after", "", report.objective_after);
    out << line;
    return out.str();
}

double delta_bias(double p_actual, double p_desired)
{
    if (!(p_actual >= 0.0 && p_actual <= 1.0))
        throw ValidationError("delta_bias: p_actual must be in [0,1]");
    if (!(p_desired > 0.0 && p_desired <= 1.0))
        throw ValidationError("delta_bias: p_desired must be in (0,1]");
    return std::abs(p_desired - p_actual) / p_desired;
}

double majority_delta_bias(const RatioVector& actual, const RatioVector& desired)
{
    if (actual.size() != desired.size())
        throw ValidationError("majority_delta_bias: length mismatch");
    std::size_t major = 0;
    for (std::size_t p = 1; p < actual.size(); ++p)
        if (actual[p] > actual[major])
            major = p;
    return delta_bias(actual[major], desired[major]);
}

double mean_delta_bias(std::span<const RatioVector> actual, std::span<const RatioVector> desired)
{
    if (actual.size() != desired.size() || actual.empty())
        throw ValidationError("mean_delta_bias: need matching, non-empty lists");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sum += majority_delta_bias(actual[i], desired[i]);
    return sum / static_cast<double>(actual.size());
}

Matrix attention_weights(const Matrix& q, const Matrix& keys)
{
    if (q.cols() != keys.cols())
        throw ValidationError("toy_attention: query dim " + std::to_string(q.cols()) + " != key dim "
                              + std::to_string(keys.cols()));
    require_valid(q, "toy_attention: q");
    require_valid(keys, "toy_attention: K");

    Matrix logits = q * keys.transpose();
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
    }
    return logits;
}

Matrix toy_attention(const Matrix& q, const Matrix& keys, const Matrix& values)
{
    if (keys.rows() != values.rows())
        throw ValidationError("toy_attention: " + std::to_string(keys.rows()) + " keys but "
                              + std::to_string(values.rows()) + " values");
    require_valid(values, "toy_attention: V");
    return attention_weights(q, keys) * values;
}

namespace {

// Objective and gradient accumulated straight from the plan items.
double reference_objective(const Matrix& w, const EditPlan& plan, const Matrix& w_old)
{
    double total = 0.0;
    for (const auto& e : plan.edits)
        total += e.weight * (w * e.input - e.target).squaredNorm();
    for (const auto& p : plan.preserves)
        total += p.weight * (w * p.input - w_old * p.input).squaredNorm();
    total += plan.canon_reg * (w - w_old).squaredNorm();
    return total;
}

void reference_gradient(const Matrix& w, const EditPlan& plan, const Matrix& w_old, Matrix& grad)
{
    grad = 2.0 * plan.canon_reg * (w - w_old);
    for (const auto& e : plan.edits)
        grad.noalias() += (2.0 * e.weight * (w * e.input - e.target)) * e.input.transpose();
    for (const auto& p : plan.preserves)
        grad.noalias() += (2.0 * p.weight * (w * p.input - w_old * p.input)) * p.input.transpose();
}

double gershgorin_bound(const EditPlan& plan, Eigen::Index cols)
{
    Matrix gram = plan.canon_reg * Matrix::Identity(cols, cols);
    for (const auto& e : plan.edits)
        gram.noalias() += e.weight * e.input * e.input.transpose();
    for (const auto& p : plan.preserves)
        gram.noalias() += p.weight * p.input * p.input.transpose();
    return gram.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace

Matrix gradient_descent_reference(const EditPlan& plan, const Matrix& w_old, const GradientDescentOptions& options)
{
    validate_plan(plan, w_old);

    double lr = 0.0;
    if (options.learning_rate) {
        lr = *options.learning_rate;
    } else {
        const double bound = gershgorin_bound(plan, w_old.cols());
        if (!(bound > 0.0))
            throw ValidationError("gradient_descent_reference: objective has no curvature");
        lr = 0.5 / bound;
    }
    if (!(lr > 0.0) || !std::isfinite(lr))
        throw ValidationError("gradient_descent_reference: learning rate must be positive");

    Matrix w = w_old;
    Matrix grad(w_old.rows(), w_old.cols());
    double previous = reference_objective(w, plan, w_old);
    int rising = 0;
    for (std::size_t step = 0; step < options.max_steps; ++step) {
        reference_gradient(w, plan, w_old, grad);
        if (grad.norm() < options.gradient_tolerance)
            break;
        w -= lr * grad;
        const double current = reference_objective(w, plan, w_old);
        rising = current > previous ? rising + 1 : 0;
        if (rising >= 10 || !std::isfinite(current))
            throw DivergenceError("gradient descent diverged at step " + std::to_string(step)
                                  + "; try a smaller learning rate");
        previous = current;
    }
    return w;
}

} // namespace uce
