#pragma once

#include "uce/edit_core.hpp"
#include "uce/embed_store.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace uce {

/// Per-attribute probabilities; entries in [0,1], summing to 1 within 1e-9.
class RatioVector {
public:
    explicit RatioVector(std::vector<double> probs);

    /// 1/p for each of p attributes.
    static RatioVector uniform(std::size_t p);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

    /// max_p |a_p - b_p|
    double max_deviation(const RatioVector& other) const;

private:
    std::vector<double> probs_;
};

/// Measures how often each attribute shows up for a concept under the current
/// matrices. Must be a pure function of its arguments.
using RatioOracle = std::function<RatioVector(const std::optional<Matrix>& w_k, const Matrix& w_v,
                                              const Concept& concept_, std::span<const Concept> attributes,
                                              std::size_t n_samples, std::uint64_t seed)>;

/// alpha_p = eta (current_p - desired_p)
std::vector<double> compute_alpha(const RatioVector& current, const RatioVector& desired, double eta);

/// Stand-in for "generate images and classify them".
///
/// For each of n_samples draws, noise z ~ N(0, noise_scale^2 I) (output
/// space, Rng(seed)) is added to W_v·c_last, and the sample is credited to
///   argmax_p <W_v c_last + z, W_frozen a_p> / temperature
/// with ties going to the lowest index. W_frozen is the value matrix captured
/// before any edit so attribute anchors do not move across iterations.
class SyntheticRatioOracle {
public:
    explicit SyntheticRatioOracle(Matrix frozen_w_v, double temperature = 1.0, double noise_scale = 0.05);

    RatioVector operator()(const std::optional<Matrix>& w_k, const Matrix& w_v, const Concept& concept_,
                           std::span<const Concept> attributes, std::size_t n_samples, std::uint64_t seed) const;

private:
    Matrix frozen_;
    double temperature_;
    double noise_scale_;
};

struct DebiasOptions {
    double eta = 0.5;
    double threshold = 0.05;
    std::size_t max_iters = 50;
    std::size_t n_samples = 200;
    std::uint64_t seed = 0;
    double canon_reg = kDefaultCanonReg;
};

struct DebiasState {
    std::vector<std::string> edit_list;
    std::vector<std::string> preserve_list;
    std::map<std::string, std::vector<double>> alphas; ///< accumulated, per edited concept
    std::size_t iteration = 0;                         ///< measurement rounds performed
};

/// One row of the trace: a concept measured in a given round.
struct TraceRecord {
    std::size_t iteration;
    std::string concept_name;
    std::vector<double> ratios;
    std::vector<double> desired;
    std::vector<double> alpha; ///< step taken this round (zero when converged)
    bool converged;
};

struct DebiasResult {
    std::optional<Matrix> w_k;
    Matrix w_v;
    DebiasState state;
    std::vector<TraceRecord> trace;
    bool converged = false;
    std::size_t key_solves = 0;
    std::size_t value_solves = 0;
};

/// Iterative debiasing.
///
/// Each round measures every concept still in the edit list. Concepts within
/// `threshold` of their desired ratios move to the preserve list. For the
/// rest, alpha_cum -= compute_alpha(...) and the targets are rebuilt from the
/// frozen pre-edit matrices as W_frozen (c + sum alpha_cum_p a_p). Both
/// matrices are then re-solved from their current values with the remaining
/// edits and the (growing) preserve list. The loop ends when the edit list
/// empties or after max_iters rounds; the latter is reported through
/// `converged == false`, never thrown.
///
/// `desired` holds one RatioVector per edit concept, or is empty for uniform.
DebiasResult debias_loop(std::optional<Matrix> w_k, Matrix w_v, std::span<const Concept> edit_concepts,
                         std::span<const Concept> preserve_concepts, std::span<const Concept> attributes,
                         std::span<const RatioVector> desired, const DebiasOptions& options,
                         const RatioOracle& oracle);

/// One JSON object per line: iteration, concept, ratios, desired, alpha, converged.
void write_trace_jsonl(std::span<const TraceRecord> trace, std::ostream& out);

} // namespace uce
