#include "uce/edit_builders.hpp"

#include "uce/errors.hpp"

#include <cmath>
#include <string>

namespace uce {

namespace {

void check_concept(const Matrix& w_old, const Concept& c, const char* who)
{
    require_valid(w_old, std::string(who) + ": W_old");
    if (c.tokens.empty())
        throw ValidationError(std::string(who) + ": concept \"" + c.name + "\" has no tokens");
    for (const auto& t : c.tokens)
        if (t.size() != w_old.cols())
            throw ValidationError(std::string(who) + ": concept \"" + c.name + "\" token dim "
                                  + std::to_string(t.size()) + " != W cols " + std::to_string(w_old.cols()));
}

std::vector<EditItem> redirect(const Matrix& w_old, const Concept& source, const Concept& dest, const char* who)
{
    check_concept(w_old, source, who);
    check_concept(w_old, dest, who);
    std::vector<EditItem> items;
    for (auto& [src, dst] : align_tokens(source, dest))
        items.push_back({std::move(src), w_old * dst, 1.0});
    return items;
}

} // namespace

std::vector<EditItem> build_erase(const Matrix& w_old, const Concept& concept_, const Concept& anchor)
{
    return redirect(w_old, concept_, anchor, "build_erase");
}

std::vector<EditItem> build_moderate(const Matrix& w_old, const Concept& concept_, const Concept& unconditional)
{
    return redirect(w_old, concept_, unconditional, "build_moderate");
}

std::vector<EditItem> build_debias(const Matrix& w_old, const Concept& concept_, std::span<const Concept> attributes,
                                   std::span<const double> alphas)
{
    check_concept(w_old, concept_, "build_debias");
    if (attributes.empty())
        throw ValidationError("build_debias: at least one attribute is required");
    if (attributes.size() != alphas.size())
        throw ValidationError("build_debias: " + std::to_string(attributes.size()) + " attributes but "
                              + std::to_string(alphas.size()) + " alphas");

    Vector shifted = concept_.last_token();
    for (std::size_t p = 0; p < attributes.size(); ++p) {
        check_concept(w_old, attributes[p], "build_debias");
        if (!std::isfinite(alphas[p]))
            throw ValidationError("build_debias: alpha " + std::to_string(p) + " is not finite");
        shifted += alphas[p] * attributes[p].last_token();
    }
    return {EditItem{concept_.last_token(), w_old * shifted, 1.0}};
}

std::vector<EditItem> build_edits(const Matrix& w_old, const Concept& concept_, const EditMode& mode)
{
    struct Visitor {
        const Matrix& w;
        const Concept& c;
        std::vector<EditItem> operator()(const EraseMode& m) const { return build_erase(w, c, m.anchor); }
        std::vector<EditItem> operator()(const ModerateMode& m) const { return build_moderate(w, c, m.unconditional); }
        std::vector<EditItem> operator()(const DebiasMode& m) const
        {
            return build_debias(w, c, m.attributes, m.alphas);
        }
    };
    return std::visit(Visitor{w_old, concept_}, mode);
}

std::vector<PreserveItem> preserve_items(std::span<const Concept> concepts, double weight)
{
    std::vector<PreserveItem> items;
    for (const auto& c : concepts)
        for (const auto& t : c.tokens)
            items.push_back({t, weight});
    return items;
}

} // namespace uce
