#pragma once

#include "uce/edit_core.hpp"
#include "uce/embed_store.hpp"

#include <span>
#include <variant>
#include <vector>

namespace uce {

/// Redirect to W_old·anchor (token-aligned from the end).
std::vector<EditItem> build_erase(const Matrix& w_old, const Concept& concept_, const Concept& anchor);

/// Redirect to W_old·unconditional; same alignment as erase.
std::vector<EditItem> build_moderate(const Matrix& w_old, const Concept& concept_, const Concept& unconditional);

/// Shift the concept's last token along attribute directions:
///   target = W_old (c + sum_p alpha_p a_p)
/// where a_p is the last token of attribute p.
std::vector<EditItem> build_debias(const Matrix& w_old, const Concept& concept_, std::span<const Concept> attributes,
                                   std::span<const double> alphas);

struct EraseMode {
    Concept anchor;
};
struct ModerateMode {
    Concept unconditional;
};
struct DebiasMode {
    std::vector<Concept> attributes;
    std::vector<double> alphas;
};
using EditMode = std::variant<EraseMode, ModerateMode, DebiasMode>;

std::vector<EditItem> build_edits(const Matrix& w_old, const Concept& concept_, const EditMode& mode);

/// One PreserveItem per token of each concept.
std::vector<PreserveItem> preserve_items(std::span<const Concept> concepts, double weight = 1.0);

} // namespace uce
