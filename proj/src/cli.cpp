#include "uce/cli.hpp"

#include "uce/edit_builders.hpp"
#include "uce/embed_store.hpp"
#include "uce/errors.hpp"
#include "uce/metrics.hpp"
#include "uce/rng.hpp"
#include "uce/tensor_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace uce::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- logging

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

class Log {
public:
    Log(std::ostream& sink, bool as_json) : sink_(sink), json_(as_json)
    {
        if (const char* env = std::getenv("UCE_LOG")) {
            const std::string v = env;
            if (v == "error")
                level_ = Level::Error;
            else if (v == "warn")
                level_ = Level::Warn;
            else if (v == "info")
                level_ = Level::Info;
            else if (v == "debug")
                level_ = Level::Debug;
        }
    }

    void error(const std::string& msg) { emit(Level::Error, "error", msg); }
    void warn(const std::string& msg) { emit(Level::Warn, "warn", msg); }
    void info(const std::string& msg) { emit(Level::Info, "info", msg); }

private:
    void emit(Level lvl, const char* name, const std::string& msg)
    {
        if (lvl > level_)
            return;
        if (json_)
            sink_ << json{{"level", name}, {"msg", msg}}.dump() << '\n';
        else
            sink_ << "uce: " << name << ": " << msg << '\n';
    }

    std::ostream& sink_;
    bool json_;
    Level level_ = Level::Warn;
};

// ---------------------------------------------------------------- spec parsing

const std::set<std::string> kSpecKeys = {
    "mode",      "w_v",       "w_k",        "edit",      "preserve", "holdout",   "anchor",      "anchors",
    "unconditional", "attributes", "desired", "canon_reg", "eta",      "threshold", "max_iters", "seed",
    "n_samples", "temperature",
};

std::vector<std::string> string_list(const json& doc, const char* key, bool required)
{
    if (!doc.contains(key)) {
        if (required)
            throw ValidationError(std::string("spec: missing field \"") + key + "\"");
        return {};
    }
    const auto& v = doc[key];
    if (!v.is_array())
        throw ValidationError(std::string("spec: field \"") + key + "\" must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string())
            throw ValidationError(std::string("spec: field \"") + key + "\" must be an array of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

double number(const json& doc, const char* key, double fallback)
{
    if (!doc.contains(key))
        return fallback;
    if (!doc[key].is_number())
        throw ValidationError(std::string("spec: field \"") + key + "\" must be a number");
    const double v = doc[key].get<double>();
    if (!std::isfinite(v))
        throw ValidationError(std::string("spec: field \"") + key + "\" must be finite");
    return v;
}

std::uint64_t count(const json& doc, const char* key, std::uint64_t fallback)
{
    if (!doc.contains(key))
        return fallback;
    if (!doc[key].is_number_unsigned() && !(doc[key].is_number_integer() && doc[key].get<std::int64_t>() >= 0))
        throw ValidationError(std::string("spec: field \"") + key + "\" must be a non-negative integer");
    return doc[key].get<std::uint64_t>();
}

} // namespace

EditSpec parse_edit_spec(const json& doc, const fs::path& base_dir)
{
    if (!doc.is_object())
        throw ValidationError("spec: top level must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!kSpecKeys.contains(key))
            throw ValidationError("spec: unknown field \"" + key + "\"");

    EditSpec s;
    if (!doc.contains("mode") || !doc["mode"].is_string())
        throw ValidationError("spec: missing string field \"mode\"");
    const auto mode = doc["mode"].get<std::string>();
    if (mode == "erase")
        s.mode = Mode::Erase;
    else if (mode == "moderate")
        s.mode = Mode::Moderate;
    else if (mode == "debias")
        s.mode = Mode::Debias;
    else
        throw ValidationError("spec: field \"mode\" must be erase, moderate or debias");

    if (!doc.contains("w_v") || !doc["w_v"].is_string())
        throw ValidationError("spec: missing string field \"w_v\"");
    s.w_v_path = base_dir / doc["w_v"].get<std::string>();
    if (doc.contains("w_k")) {
        if (!doc["w_k"].is_string())
            throw ValidationError("spec: field \"w_k\" must be a string");
        s.w_k_path = base_dir / doc["w_k"].get<std::string>();
    }

    s.edit = string_list(doc, "edit", true);
    if (s.edit.empty())
        throw ValidationError("spec: field \"edit\" must name at least one concept");
    s.preserve = string_list(doc, "preserve", false);
    s.holdout = string_list(doc, "holdout", false);

    s.canon_reg = number(doc, "canon_reg", s.canon_reg);
    if (s.canon_reg < 0.0)
        throw ValidationError("spec: field \"canon_reg\" must be >= 0");
    s.eta = number(doc, "eta", s.eta);
    if (!(s.eta > 0.0))
        throw ValidationError("spec: field \"eta\" must be > 0");
    s.threshold = number(doc, "threshold", s.threshold);
    if (s.threshold < 0.0)
        throw ValidationError("spec: field \"threshold\" must be >= 0");
    s.temperature = number(doc, "temperature", s.temperature);
    if (!(s.temperature > 0.0))
        throw ValidationError("spec: field \"temperature\" must be > 0");
    s.max_iters = count(doc, "max_iters", s.max_iters);
    s.seed = count(doc, "seed", s.seed);
    s.n_samples = count(doc, "n_samples", s.n_samples);
    if (s.n_samples < 1)
        throw ValidationError("spec: field \"n_samples\" must be >= 1");

    switch (s.mode) {
    case Mode::Erase:
        if (doc.contains("anchors")) {
            s.anchors = string_list(doc, "anchors", true);
            if (s.anchors.size() != s.edit.size())
                throw ValidationError("spec: field \"anchors\" must have one entry per edit concept");
        } else if (doc.contains("anchor") && doc["anchor"].is_string()) {
            s.anchors.assign(s.edit.size(), doc["anchor"].get<std::string>());
        } else {
            throw ValidationError("spec: erase mode requires \"anchor\" (string) or \"anchors\"");
        }
        break;
    case Mode::Moderate:
        if (!doc.contains("unconditional") || !doc["unconditional"].is_string())
            throw ValidationError("spec: moderate mode requires string field \"unconditional\"");
        s.unconditional = doc["unconditional"].get<std::string>();
        break;
    case Mode::Debias:
        s.attributes = string_list(doc, "attributes", true);
        if (s.attributes.empty())
            throw ValidationError("spec: field \"attributes\" must name at least one concept");
        if (doc.contains("desired")) {
            const auto& d = doc["desired"];
            auto as_ratios = [&](const json& arr, const std::string& who) {
                if (!arr.is_array() || arr.size() != s.attributes.size())
                    throw ValidationError("spec: field \"desired\"" + who + " must list one ratio per attribute");
                std::vector<double> r;
                for (const auto& x : arr) {
                    if (!x.is_number())
                        throw ValidationError("spec: field \"desired\"" + who + " must hold numbers");
                    r.push_back(x.get<double>());
                }
                RatioVector check(r);
                return r;
            };
            if (d.is_array()) {
                const auto r = as_ratios(d, "");
                for (const auto& name : s.edit)
                    s.desired[name] = r;
            } else if (d.is_object()) {
                for (const auto& [name, arr] : d.items()) {
                    if (std::find(s.edit.begin(), s.edit.end(), name) == s.edit.end())
                        throw ValidationError("spec: field \"desired\" names \"" + name + "\", which is not edited");
                    s.desired[name] = as_ratios(arr, "." + name);
                }
            } else {
                throw ValidationError("spec: field \"desired\" must be an array or an object");
            }
        }
        break;
    }
    return s;
}

EditSpec load_edit_spec(const fs::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw ValidationError("spec: cannot open " + path.string());
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("spec: malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_edit_spec(doc, path.parent_path());
}

namespace {

// ---------------------------------------------------------------- shared plumbing

struct Inputs {
    EditSpec spec;
    EmbeddingCatalog catalog;
    Matrix w_v;
    std::optional<Matrix> w_k;
};

void require_names(const EmbeddingCatalog& catalog, const std::vector<std::string>& names, const char* field)
{
    for (const auto& n : names)
        if (!catalog.contains(n))
            throw ValidationError(std::string("spec: field \"") + field + "\" names unknown concept \"" + n + "\"");
}

Inputs load_inputs(const fs::path& spec_path, const fs::path& catalog_path, std::optional<std::uint64_t> seed)
{
    EditSpec spec = load_edit_spec(spec_path);
    if (seed)
        spec.seed = *seed;
    EmbeddingCatalog catalog = load_catalog_file(catalog_path);

    require_names(catalog, spec.edit, "edit");
    require_names(catalog, spec.preserve, "preserve");
    require_names(catalog, spec.holdout, "holdout");
    require_names(catalog, spec.anchors, "anchor");
    require_names(catalog, spec.attributes, "attributes");
    if (spec.mode == Mode::Moderate)
        require_names(catalog, {spec.unconditional}, "unconditional");

    Matrix w_v = load_matrix_file(spec.w_v_path).values;
    std::optional<Matrix> w_k;
    if (spec.w_k_path)
        w_k = load_matrix_file(*spec.w_k_path).values;
    if (static_cast<std::size_t>(w_v.cols()) != catalog.dim())
        throw ValidationError("W_v has " + std::to_string(w_v.cols()) + " columns, catalog dim is "
                              + std::to_string(catalog.dim()));
    if (w_k && static_cast<std::size_t>(w_k->cols()) != catalog.dim())
        throw ValidationError("W_k has " + std::to_string(w_k->cols()) + " columns, catalog dim is "
                              + std::to_string(catalog.dim()));
    return {std::move(spec), std::move(catalog), std::move(w_v), std::move(w_k)};
}

/// Plan for one matrix. For debias specs `alphas` supplies the accumulated
/// coefficients per edited concept.
EditPlan build_plan(const Inputs& in, const Matrix& w_old, const std::map<std::string, std::vector<double>>* alphas)
{
    EditPlan plan;
    plan.canon_reg = in.spec.canon_reg;
    const auto attributes = in.catalog.select(in.spec.attributes);
    for (std::size_t i = 0; i < in.spec.edit.size(); ++i) {
        const Concept& c = in.catalog.at(in.spec.edit[i]);
        std::vector<EditItem> items;
        switch (in.spec.mode) {
        case Mode::Erase:
            items = build_erase(w_old, c, in.catalog.at(in.spec.anchors[i]));
            break;
        case Mode::Moderate:
            items = build_moderate(w_old, c, in.catalog.at(in.spec.unconditional));
            break;
        case Mode::Debias: {
            auto it = alphas ? alphas->find(c.name) : decltype(alphas->end()){};
            if (!alphas || it == alphas->end())
                throw ValidationError("state: no alphas recorded for \"" + c.name + "\"");
            items = build_debias(w_old, c, attributes, it->second);
            break;
        }
        }
        plan.edits.insert(plan.edits.end(), items.begin(), items.end());
    }
    plan.preserves = preserve_items(in.catalog.select(in.spec.preserve));
    return plan;
}

std::string matrix_bytes(const Matrix& m)
{
    std::ostringstream buf(std::ios::binary);
    save_matrix(m, buf, Dtype::F64);
    return buf.str();
}

/// Files are staged in memory and only written once everything succeeded.
class OutputSet {
public:
    void add(std::string name, std::string bytes) { files_.emplace_back(std::move(name), std::move(bytes)); }

    void commit(const fs::path& dir) const
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create output directory " + dir.string(), 0);
        for (const auto& [name, bytes] : files_)
            write_file_atomic(dir / name, bytes);
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

struct Reports {
    EditReport value;
    std::optional<EditReport> key;
};

nlohmann::ordered_json reports_json(const Reports& r, Mode mode)
{
    nlohmann::ordered_json j;
    j["note"] = std::string(kReportScopeNote);
    j["mode"] = mode == Mode::Erase ? "erase" : mode == Mode::Moderate ? "moderate" : "debias";
    j["value"] = r.value.to_json();
    if (r.key)
        j["key"] = r.key->to_json();
    return j;
}

std::string dump_pretty(const nlohmann::ordered_json& j)
{
    return j.dump(2) + "\n";
}

std::string summary_text(const Reports& r)
{
    std::string s = render_report(r.value, "value projection (W_v)");
    if (r.key)
        s += "\n" + render_report(*r.key, "key projection (W_k)");
    return s;
}

Reports compute_reports(const Inputs& in, const Matrix& new_v, const std::optional<Matrix>& new_k,
                        const std::map<std::string, std::vector<double>>* alphas)
{
    const auto holdout = in.catalog.select(in.spec.holdout);
    Reports r{edit_report(in.w_v, new_v, build_plan(in, in.w_v, alphas), holdout), std::nullopt};
    if (in.w_k && new_k)
        r.key = edit_report(*in.w_k, *new_k, build_plan(in, *in.w_k, alphas), holdout);
    return r;
}

// ---------------------------------------------------------------- commands

struct CommonArgs {
    std::string spec;
    std::string catalog;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int cmd_edit(const CommonArgs& a, Log& log, std::ostream& out)
{
    Inputs in = load_inputs(a.spec, a.catalog, a.seed);
    if (in.spec.mode == Mode::Debias)
        throw ValidationError("spec: mode \"debias\" is handled by the debias command");
    if (!in.w_k)
        log.warn("no W_k given; only the value projection is edited");

    const Matrix new_v = uce_solve(build_plan(in, in.w_v, nullptr), in.w_v);
    std::optional<Matrix> new_k;
    if (in.w_k)
        new_k = uce_solve(build_plan(in, *in.w_k, nullptr), *in.w_k);
    const Reports reports = compute_reports(in, new_v, new_k, nullptr);

    OutputSet files;
    files.add("W_v.bin", matrix_bytes(new_v));
    if (new_k)
        files.add("W_k.bin", matrix_bytes(*new_k));
    files.add("report.json", dump_pretty(reports_json(reports, in.spec.mode)));
    const std::string summary = summary_text(reports);
    files.add("summary.txt", summary);
    files.commit(a.out);
    out << summary;
    log.info("wrote edited matrices and report to " + a.out);
    return kOk;
}

nlohmann::ordered_json state_json(const DebiasResult& r)
{
    nlohmann::ordered_json j;
    j["converged"] = r.converged;
    j["iterations"] = r.state.iteration;
    j["edit_list"] = r.state.edit_list;
    j["preserve_list"] = r.state.preserve_list;
    j["alphas"] = r.state.alphas;
    j["value_solves"] = r.value_solves;
    j["key_solves"] = r.key_solves;
    return j;
}

int cmd_debias(const CommonArgs& a, Log& log, std::ostream& out)
{
    Inputs in = load_inputs(a.spec, a.catalog, a.seed);
    if (in.spec.mode != Mode::Debias)
        throw ValidationError("spec: debias command needs mode \"debias\"");
    if (!in.w_k)
        log.warn("no W_k given; only the value projection is edited");

    const auto edit = in.catalog.select(in.spec.edit);
    const auto preserve = in.catalog.select(in.spec.preserve);
    const auto attributes = in.catalog.select(in.spec.attributes);
    std::vector<RatioVector> desired;
    for (const auto& name : in.spec.edit) {
        auto it = in.spec.desired.find(name);
        desired.push_back(it == in.spec.desired.end() ? RatioVector::uniform(attributes.size())
                                                      : RatioVector(it->second));
    }

    DebiasOptions opt;
    opt.eta = in.spec.eta;
    opt.threshold = in.spec.threshold;
    opt.max_iters = in.spec.max_iters;
    opt.n_samples = in.spec.n_samples;
    opt.seed = in.spec.seed;
    opt.canon_reg = in.spec.canon_reg;
    const SyntheticRatioOracle oracle(in.w_v, in.spec.temperature);

    const DebiasResult result = debias_loop(in.w_k, in.w_v, edit, preserve, attributes, desired, opt, oracle);
    const Reports reports = compute_reports(in, result.w_v, result.w_k, &result.state.alphas);

    std::ostringstream trace;
    write_trace_jsonl(result.trace, trace);

    OutputSet files;
    files.add("W_v.bin", matrix_bytes(result.w_v));
    if (result.w_k)
        files.add("W_k.bin", matrix_bytes(*result.w_k));
    files.add("trace.jsonl", trace.str());
    files.add("state.json", dump_pretty(state_json(result)));
    files.add("report.json", dump_pretty(reports_json(reports, in.spec.mode)));
    std::string summary = summary_text(reports);
    summary += "\n# debias: " + std::string(result.converged ? "converged" : "NOT converged") + " after "
               + std::to_string(result.state.iteration) + " round(s)\n";
    files.add("summary.txt", summary);
    files.commit(a.out);
    out << summary;

    if (!result.converged) {
        log.error("debias loop did not converge within " + std::to_string(in.spec.max_iters) + " rounds; "
                  + std::to_string(result.state.edit_list.size()) + " concept(s) left");
        return kNotConverged;
    }
    return kOk;
}

int cmd_verify(const CommonArgs& a, Log& log, std::ostream& out)
{
    Inputs in = load_inputs(a.spec, a.catalog, a.seed);
    const fs::path dir = a.out;

    const Matrix new_v = load_matrix_file(dir / "W_v.bin").values;
    std::optional<Matrix> new_k;
    if (in.w_k)
        new_k = load_matrix_file(dir / "W_k.bin").values;
    if (new_v.rows() != in.w_v.rows() || new_v.cols() != in.w_v.cols())
        throw ValidationError("W_v.bin shape differs from the input W_v");
    if (new_k && (new_k->rows() != in.w_k->rows() || new_k->cols() != in.w_k->cols()))
        throw ValidationError("W_k.bin shape differs from the input W_k");

    std::map<std::string, std::vector<double>> alphas;
    if (in.spec.mode == Mode::Debias) {
        json state;
        try {
            state = json::parse(read_file(dir / "state.json"));
            alphas = state.at("alphas").get<std::map<std::string, std::vector<double>>>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("state.json: ") + e.what());
        }
    }
    const Reports actual = compute_reports(in, new_v, new_k, in.spec.mode == Mode::Debias ? &alphas : nullptr);

    json stored;
    try {
        stored = json::parse(read_file(dir / "report.json"));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("report.json: ") + e.what());
    }
    std::vector<std::string> mismatched;
    auto check = [&](const char* section, const EditReport& recomputed) {
        if (!stored.contains(section)) {
            mismatched.push_back(std::string(section) + " (missing)");
            return;
        }
        for (const auto& f : diff_reports(EditReport::from_json(stored[section]), recomputed, 1e-9))
            mismatched.push_back(std::string(section) + "." + f);
    };
    check("value", actual.value);
    if (actual.key)
        check("key", *actual.key);
    else if (stored.contains("key"))
        mismatched.emplace_back("key (unexpected)");

    if (!mismatched.empty()) {
        out << "verify: MISMATCH in " << mismatched.size() << " field(s)\n";
        for (const auto& m : mismatched)
            out << "  " << m << '\n';
        log.error("stored report does not match the matrices");
        return kVerifyMismatch;
    }
    out << "verify: OK\n";
    return kOk;
}

int cmd_inspect(const std::string& path, std::ostream& out)
{
    const StoredMatrix m = load_matrix_file(path);
    char line[160];
    std::snprintf(line, sizeof line, "%lld×%lld %s, fro=%.17g\n", static_cast<long long>(m.values.rows()),
                  static_cast<long long>(m.values.cols()), std::string(dtype_name(m.dtype)).c_str(),
                  m.values.norm());
    out << line;
    std::snprintf(line, sizeof line, "min=%.17g max=%.17g\n", m.values.minCoeff(), m.values.maxCoeff());
    out << line;
    return kOk;
}

struct SynthArgs {
    std::vector<std::string> names;
    std::size_t dim = 8;
    std::size_t rows = 0;
    double scale = 0.5;
    std::string out;
    std::uint64_t seed = 0;
};

/// Random projection with N(0, scale^2 / cols) entries from Rng(mix_seed(seed, stream)).
Matrix synth_matrix(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed, std::uint64_t stream)
{
    Rng rng(mix_seed(seed, stream));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const double s = scale / std::sqrt(static_cast<double>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = s * rng.normal();
    return m;
}

int cmd_synth(const SynthArgs& a, Log& log)
{
    if (!(a.scale > 0.0))
        throw ValidationError("--scale must be > 0");
    const EmbeddingCatalog catalog = synth_catalog(a.names, a.dim, a.seed);
    const std::size_t rows = a.rows ? a.rows : a.dim;
    std::ostringstream cat;
    save_catalog(catalog, cat);

    OutputSet files;
    files.add("catalog.json", cat.str());
    files.add("W_v.bin", matrix_bytes(synth_matrix(rows, a.dim, a.scale, a.seed, 1)));
    files.add("W_k.bin", matrix_bytes(synth_matrix(rows, a.dim, a.scale, a.seed, 2)));
    files.commit(a.out);
    log.info("wrote synthetic catalog and matrices to " + a.out);
    return kOk;
}

int classify(const std::exception& e, Log& log)
{
    log.error(e.what());
    if (dynamic_cast<const SingularMatrixError*>(&e))
        return kSingular;
    if (dynamic_cast<const DivergenceError*>(&e))
        return kInternal;
    if (dynamic_cast<const Error*>(&e) || dynamic_cast<const json::exception*>(&e))
        return kValidation;
    return kInternal;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Closed-form concept editing of linear projection layers"};
    app.require_subcommand(1);
    bool json_logs = false;
    app.add_flag("--json-logs", json_logs, "Emit log lines as JSON objects");

    CommonArgs common;
    std::uint64_t seed_value = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", common.spec, "Edit spec (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--catalog", common.catalog, "Embedding catalog (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "Output directory")->required();
        sub->add_option("--seed", seed_value, "Override the seed in the edit spec");
        sub->add_flag("--json-logs", json_logs, "Emit log lines as JSON objects");
    };

    auto* edit = app.add_subcommand("edit", "Apply an erase/moderate spec");
    add_common(edit);
    auto* debias = app.add_subcommand("debias", "Run the iterative debiasing loop");
    add_common(debias);
    auto* verify = app.add_subcommand("verify", "Recompute the report in --out and compare with the stored one");
    add_common(verify);

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Print header and statistics of a matrix file");
    inspect->add_option("path", inspect_path, "Matrix file")->required();
    inspect->add_flag("--json-logs", json_logs, "Emit log lines as JSON objects");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Write a synthetic catalog and random W_k/W_v");
    synth->add_option("--names", synth_args.names, "Concept names")->required()->delimiter(',');
    synth->add_option("--dim", synth_args.dim, "Embedding dimension");
    synth->add_option("--rows", synth_args.rows, "Output dimension (default: dim)");
    synth->add_option("--scale", synth_args.scale, "Matrix entry scale (std = scale/sqrt(dim))");
    synth->add_option("--seed", synth_args.seed, "Seed");
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->add_flag("--json-logs", json_logs, "Emit log lines as JSON objects");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    Log log(err, json_logs);
    for (auto* sub : {edit, debias, verify})
        if (sub->parsed() && sub->count("--seed"))
            common.seed = seed_value;

    try {
        if (edit->parsed())
            return cmd_edit(common, log, out);
        if (debias->parsed())
            return cmd_debias(common, log, out);
        if (verify->parsed())
            return cmd_verify(common, log, out);
        if (inspect->parsed())
            return cmd_inspect(inspect_path, out);
        if (synth->parsed())
            return cmd_synth(synth_args, log);
    } catch (const std::exception& e) {
        return classify(e, log);
    }
    return kInternal;
}

} // namespace uce::cli
