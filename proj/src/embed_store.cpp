#include "uce/embed_store.hpp"

#include "uce/errors.hpp"
#include "uce/rng.hpp"

#include <algorithm>
#include <unordered_set>

namespace uce {

const Vector& Concept::last_token() const
{
    if (tokens.empty())
        throw ValidationError("concept \"" + name + "\" has no tokens");
    return tokens.back();
}

Concept make_concept(std::string name, Vector token)
{
    Concept c{std::move(name), {}};
    c.tokens.push_back(std::move(token));
    return c;
}

EmbeddingCatalog::EmbeddingCatalog(std::size_t dim) : dim_(dim)
{
    if (dim < 1)
        throw ValidationError("catalog dim must be >= 1");
}

void EmbeddingCatalog::add(Concept c)
{
    if (index_.contains(c.name))
        throw ValidationError("duplicate concept name \"" + c.name + "\"");
    if (c.tokens.empty())
        throw ValidationError("concept \"" + c.name + "\" has no tokens");
    for (const auto& t : c.tokens) {
        if (static_cast<std::size_t>(t.size()) != dim_)
            throw ValidationError("concept \"" + c.name + "\" has token dim " + std::to_string(t.size())
                                  + ", catalog dim is " + std::to_string(dim_));
        require_valid(t, "concept \"" + c.name + "\"");
    }
    index_.emplace(c.name, concepts_.size());
    concepts_.push_back(std::move(c));
}

bool EmbeddingCatalog::contains(const std::string& name) const
{
    return index_.contains(name);
}

const Concept& EmbeddingCatalog::at(const std::string& name) const
{
    auto it = index_.find(name);
    if (it == index_.end())
        throw ValidationError("unknown concept \"" + name + "\"");
    return concepts_[it->second];
}

std::vector<Concept> EmbeddingCatalog::select(std::span<const std::string> names) const
{
    std::vector<Concept> out;
    out.reserve(names.size());
    for (const auto& n : names)
        out.push_back(at(n));
    return out;
}

EmbeddingCatalog synth_catalog(std::span<const std::string> names, std::size_t dim, std::uint64_t seed)
{
    if (dim < 2)
        throw ValidationError("synth_catalog: dim must be >= 2, got " + std::to_string(dim));
    if (names.empty())
        throw ValidationError("synth_catalog: names must be non-empty");

    Rng rng(seed);
    EmbeddingCatalog catalog(dim);
    for (const auto& name : names) {
        Vector v(static_cast<Eigen::Index>(dim));
        for (auto& x : v)
            x = rng.normal();
        v /= v.norm();
        catalog.add(make_concept(name, std::move(v)));
    }
    return catalog;
}

std::vector<std::pair<Vector, Vector>> align_tokens(const Concept& source, const Concept& dest)
{
    if (source.tokens.empty() || dest.tokens.empty())
        throw ValidationError("align_tokens: concepts must have at least one token");
    if (source.dim() != dest.dim())
        throw ValidationError("align_tokens: dim mismatch between \"" + source.name + "\" (" + std::to_string(source.dim())
                              + ") and \"" + dest.name + "\" (" + std::to_string(dest.dim()) + ")");

    const std::size_t k = std::min(source.tokens.size(), dest.tokens.size());
    const std::size_t src_skip = source.tokens.size() - k;
    const std::size_t dst_skip = dest.tokens.size() - k;
    std::vector<std::pair<Vector, Vector>> pairs;
    pairs.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        pairs.emplace_back(source.tokens[src_skip + i], dest.tokens[dst_skip + i]);
    return pairs;
}

} // namespace uce
