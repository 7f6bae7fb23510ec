#pragma once

#include "uce/debias_driver.hpp"
#include "uce/edit_core.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace uce::cli {

/// Process exit codes; fixed so shell pipelines can branch on them.
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kValidation = 2,
    kSingular = 3,
    kNotConverged = 4,
    kVerifyMismatch = 5,
};

enum class Mode { Erase, Moderate, Debias };

/// Parsed edit spec document. Matrix paths are resolved against the spec
/// file's directory.
struct EditSpec {
    Mode mode = Mode::Erase;
    std::filesystem::path w_v_path;
    std::optional<std::filesystem::path> w_k_path;
    std::vector<std::string> edit;
    std::vector<std::string> preserve;
    std::vector<std::string> holdout;
    std::vector<std::string> anchors;    ///< erase: one per edit concept
    std::string unconditional;           ///< moderate
    std::vector<std::string> attributes; ///< debias
    std::map<std::string, std::vector<double>> desired;
    double canon_reg = kDefaultCanonReg;
    double eta = 0.5;
    double threshold = 0.05;
    std::size_t max_iters = 50;
    std::uint64_t seed = 0;
    std::size_t n_samples = 200;
    double temperature = 1.0;
};

/// Throws ValidationError naming the offending field.
EditSpec parse_edit_spec(const nlohmann::json& doc, const std::filesystem::path& base_dir);
EditSpec load_edit_spec(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace uce::cli
