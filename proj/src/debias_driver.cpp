#include "uce/debias_driver.hpp"

#include "uce/edit_builders.hpp"
#include "uce/errors.hpp"
#include "uce/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

namespace uce {

RatioVector::RatioVector(std::vector<double> probs) : probs_(std::move(probs))
{
    if (probs_.empty())
        throw ValidationError("ratio vector must have at least one entry");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (!(probs_[i] >= 0.0 && probs_[i] <= 1.0))
            throw ValidationError("ratio " + std::to_string(i) + " outside [0,1]");
        sum += probs_[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("ratios must sum to 1, got " + std::to_string(sum));
}

RatioVector RatioVector::uniform(std::size_t p)
{
    if (p == 0)
        throw ValidationError("uniform ratio over zero attributes");
    return RatioVector(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

double RatioVector::max_deviation(const RatioVector& other) const
{
    if (other.size() != size())
        throw ValidationError("ratio vectors differ in length");
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        worst = std::max(worst, std::abs(probs_[i] - other.probs_[i]));
    return worst;
}

std::vector<double> compute_alpha(const RatioVector& current, const RatioVector& desired, double eta)
{
    if (current.size() != desired.size())
        throw ValidationError("compute_alpha: " + std::to_string(current.size()) + " current ratios vs "
                              + std::to_string(desired.size()) + " desired");
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw ValidationError("compute_alpha: eta must be positive");
    std::vector<double> alpha(current.size());
    for (std::size_t p = 0; p < alpha.size(); ++p)
        alpha[p] = eta * (current[p] - desired[p]);
    return alpha;
}

SyntheticRatioOracle::SyntheticRatioOracle(Matrix frozen_w_v, double temperature, double noise_scale)
    : frozen_(std::move(frozen_w_v)), temperature_(temperature), noise_scale_(noise_scale)
{
    require_valid(frozen_, "synthetic oracle: frozen W_v");
    if (!(temperature_ > 0.0))
        throw ValidationError("synthetic oracle: temperature must be positive");
    if (!(noise_scale_ >= 0.0))
        throw ValidationError("synthetic oracle: noise scale must be >= 0");
}

RatioVector SyntheticRatioOracle::operator()(const std::optional<Matrix>& /*w_k*/, const Matrix& w_v,
                                             const Concept& concept_, std::span<const Concept> attributes,
                                             std::size_t n_samples, std::uint64_t seed) const
{
    if (attributes.empty())
        throw ValidationError("synthetic oracle: no attributes");
    if (n_samples < 1)
        throw ValidationError("synthetic oracle: n_samples must be >= 1");
    if (w_v.rows() != frozen_.rows() || w_v.cols() != frozen_.cols())
        throw ValidationError("synthetic oracle: W_v shape differs from the frozen matrix");
    if (static_cast<Eigen::Index>(concept_.dim()) != w_v.cols())
        throw ValidationError("synthetic oracle: concept \"" + concept_.name + "\" dim mismatch");

    Matrix anchors(w_v.rows(), static_cast<Eigen::Index>(attributes.size()));
    for (std::size_t p = 0; p < attributes.size(); ++p) {
        if (static_cast<Eigen::Index>(attributes[p].dim()) != w_v.cols())
            throw ValidationError("synthetic oracle: attribute \"" + attributes[p].name + "\" dim mismatch");
        anchors.col(static_cast<Eigen::Index>(p)) = frozen_ * attributes[p].last_token();
    }
    const Vector out = w_v * concept_.last_token();

    Rng rng(seed);
    std::vector<std::size_t> tally(attributes.size(), 0);
    Vector noisy(out.size());
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < out.size(); ++i)
            noisy(i) = out(i) + noise_scale_ * rng.normal();
        const Vector scores = (anchors.transpose() * noisy) / temperature_;
        Eigen::Index best = 0;
        for (Eigen::Index p = 1; p < scores.size(); ++p)
            if (scores(p) > scores(best))
                best = p;
        ++tally[static_cast<std::size_t>(best)];
    }

    std::vector<double> probs(tally.size());
    for (std::size_t p = 0; p < tally.size(); ++p)
        probs[p] = static_cast<double>(tally[p]) / static_cast<double>(n_samples);
    return RatioVector(std::move(probs));
}

namespace {

void check_inputs(const std::optional<Matrix>& w_k, const Matrix& w_v, std::span<const Concept> edit_concepts,
                  std::span<const Concept> preserve_concepts, std::span<const Concept> attributes,
                  std::span<const RatioVector> desired, const DebiasOptions& opt)
{
    require_valid(w_v, "debias_loop: W_v");
    if (w_k) {
        require_valid(*w_k, "debias_loop: W_k");
        if (w_k->cols() != w_v.cols())
            throw ValidationError("debias_loop: W_k and W_v take inputs of different dims");
    }
    if (edit_concepts.empty())
        throw ValidationError("debias_loop: edit list is empty");
    if (attributes.empty())
        throw ValidationError("debias_loop: attribute list is empty");
    if (!desired.empty() && desired.size() != edit_concepts.size())
        throw ValidationError("debias_loop: desired ratios given for " + std::to_string(desired.size())
                              + " concepts, expected " + std::to_string(edit_concepts.size()));
    for (const auto& d : desired)
        if (d.size() != attributes.size())
            throw ValidationError("debias_loop: desired ratio length differs from attribute count");
    if (!(opt.eta > 0.0))
        throw ValidationError("debias_loop: eta must be positive");
    if (!(opt.threshold >= 0.0))
        throw ValidationError("debias_loop: threshold must be >= 0");
    if (opt.n_samples < 1)
        throw ValidationError("debias_loop: n_samples must be >= 1");

    std::unordered_set<std::string> names;
    for (const auto& c : edit_concepts)
        if (!names.insert(c.name).second)
            throw ValidationError("debias_loop: concept \"" + c.name + "\" listed twice");
    for (const auto& c : preserve_concepts)
        if (!names.insert(c.name).second)
            throw ValidationError("debias_loop: concept \"" + c.name + "\" is both edited and preserved");
    for (const auto& c : edit_concepts)
        if (static_cast<Eigen::Index>(c.dim()) != w_v.cols())
            throw ValidationError("debias_loop: concept \"" + c.name + "\" dim mismatch");
}

} // namespace

DebiasResult debias_loop(std::optional<Matrix> w_k, Matrix w_v, std::span<const Concept> edit_concepts,
                         std::span<const Concept> preserve_concepts, std::span<const Concept> attributes,
                         std::span<const RatioVector> desired, const DebiasOptions& options,
                         const RatioOracle& oracle)
{
    check_inputs(w_k, w_v, edit_concepts, preserve_concepts, attributes, desired, options);

    const std::optional<Matrix> frozen_k = w_k;
    const Matrix frozen_v = w_v;

    DebiasResult result;
    std::vector<Concept> preserved(preserve_concepts.begin(), preserve_concepts.end());
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < edit_concepts.size(); ++i) {
        active.push_back(i);
        result.state.edit_list.push_back(edit_concepts[i].name);
        result.state.alphas[edit_concepts[i].name].assign(attributes.size(), 0.0);
    }
    for (const auto& c : preserve_concepts)
        result.state.preserve_list.push_back(c.name);

    const RatioVector uniform = RatioVector::uniform(attributes.size());
    auto target_of = [&](std::size_t i) -> const RatioVector& { return desired.empty() ? uniform : desired[i]; };

    for (std::size_t round = 0; round < options.max_iters; ++round) {
        result.state.iteration = round + 1;
        const std::uint64_t round_seed = mix_seed(options.seed, round);

        std::vector<std::size_t> still_active;
        for (std::size_t i : active) {
            const Concept& c = edit_concepts[i];
            const RatioVector current = oracle(w_k, w_v, c, attributes, options.n_samples, round_seed);
            if (current.size() != attributes.size())
                throw ValidationError("debias_loop: oracle returned " + std::to_string(current.size())
                                      + " ratios for " + std::to_string(attributes.size()) + " attributes");
            const RatioVector& want = target_of(i);

            TraceRecord rec{round + 1, c.name, current.probs(), want.probs(), {}, false};
            if (current.max_deviation(want) < options.threshold) {
                rec.alpha.assign(attributes.size(), 0.0);
                rec.converged = true;
                preserved.push_back(c);
                result.state.preserve_list.push_back(c.name);
                std::erase(result.state.edit_list, c.name);
            } else {
                rec.alpha = compute_alpha(current, want, options.eta);
                auto& cum = result.state.alphas[c.name];
                for (std::size_t p = 0; p < cum.size(); ++p)
                    cum[p] -= rec.alpha[p];
                still_active.push_back(i);
            }
            result.trace.push_back(std::move(rec));
        }
        active = std::move(still_active);
        if (active.empty()) {
            result.converged = true;
            break;
        }

        const auto preserves = preserve_items(preserved);
        auto solve = [&](const Matrix& frozen, const Matrix& current) {
            EditPlan plan{{}, preserves, options.canon_reg};
            for (std::size_t i : active) {
                const auto& alpha = result.state.alphas[edit_concepts[i].name];
                auto items = build_debias(frozen, edit_concepts[i], attributes, alpha);
                plan.edits.insert(plan.edits.end(), items.begin(), items.end());
            }
            return uce_solve(plan, current);
        };
        w_v = solve(frozen_v, w_v);
        ++result.value_solves;
        if (w_k) {
            w_k = solve(*frozen_k, *w_k);
            ++result.key_solves;
        }
    }

    result.w_k = std::move(w_k);
    result.w_v = std::move(w_v);
    return result;
}

void write_trace_jsonl(std::span<const TraceRecord> trace, std::ostream& out)
{
    for (const auto& r : trace) {
        nlohmann::ordered_json j;
        j["iteration"] = r.iteration;
        j["concept"] = r.concept_name;
        j["ratios"] = r.ratios;
        j["desired"] = r.desired;
        j["alpha"] = r.alpha;
        j["converged"] = r.converged;
        out << j.dump() << '\n';
    }
}

} // namespace uce
