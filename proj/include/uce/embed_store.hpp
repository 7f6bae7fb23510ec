#pragma once

#include "uce/tensor_io.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace uce {

/// A named sequence of token embeddings, all of the same dimension.
struct Concept {
    std::string name;
    std::vector<Vector> tokens;

    std::size_t dim() const { return tokens.empty() ? 0 : static_cast<std::size_t>(tokens.front().size()); }
    const Vector& last_token() const;
};

/// Builds a one-token concept.
Concept make_concept(std::string name, Vector token);

/// Name-indexed set of concepts sharing one embedding dimension.
/// Iteration order is insertion order, which is also the serialization order.
class EmbeddingCatalog {
public:
    explicit EmbeddingCatalog(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return concepts_.size(); }
    bool empty() const { return concepts_.empty(); }

    /// Throws ValidationError on duplicate name, empty token list, wrong dim
    /// or non-finite values.
    void add(Concept c);

    bool contains(const std::string& name) const;
    const Concept& at(const std::string& name) const;

    /// Resolves a list of names; the error names the first unknown one.
    std::vector<Concept> select(std::span<const std::string> names) const;

    const std::vector<Concept>& concepts() const { return concepts_; }

private:
    std::size_t dim_;
    std::vector<Concept> concepts_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Deterministic stand-in for text-encoder embeddings: each name gets one
/// token drawn from N(0, I) with Rng(seed), in list order, then scaled to
/// unit L2 norm. Requires dim >= 2 and unique, non-empty names.
EmbeddingCatalog synth_catalog(std::span<const std::string> names, std::size_t dim, std::uint64_t seed);

/// Pairs tokens from the end: last with last, second-last with second-last,
/// for min(len) pairs. Leading surplus tokens of the longer side are dropped.
std::vector<std::pair<Vector, Vector>> align_tokens(const Concept& source, const Concept& dest);

} // namespace uce
