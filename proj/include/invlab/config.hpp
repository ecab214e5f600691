#pragma once

// Experiment configuration: one JSON document with an explicit schema
// version. Loading validates everything it can and reports the complete list
// of problems, not just the first; unknown keys are rejected so typos cannot
// silently change an experiment.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "invlab/demand.hpp"
#include "invlab/model.hpp"

namespace invlab {

constexpr int kConfigSchemaVersion = 1;

struct ComparePolicy {
    std::string kind;    // never_order | fixed_base_stock | myopic
    double level = 0.0;  // fixed_base_stock only
};

struct ExperimentConfig {
    ModelParams params;            // n is filled per run from `horizons`
    DemandSpec demand;
    std::vector<int> horizons;
    std::size_t replications = 1000;
    std::uint64_t master_seed = 1;
    double grid_step = 0.0;        // 0 = default J/256
    std::size_t retained_trajectories = 0;
    std::string output_directory = "out";
    std::vector<std::string> formats = {"csv", "json"};
    std::vector<ComparePolicy> compare = {{"never_order", 0.0},
                                          {"fixed_base_stock", 0.9}};
};

struct ConfigError {
    std::string path;  // dotted key path, or "parse"
    std::string message;
};

struct ConfigLoad {
    std::optional<ExperimentConfig> config;
    std::vector<ConfigError> errors;

    [[nodiscard]] bool ok() const { return config.has_value() && errors.empty(); }
    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        for (const auto& e : errors) os << e.path << ": " << e.message << "\n";
        return os.str();
    }
};

namespace detail {

inline void line_col_of(const std::string& text, std::size_t byte, int& line, int& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           const std::vector<std::string>& known,
                           std::vector<ConfigError>& errors) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = false;
        for (const auto& k : known)
            if (it.key() == k) {
                found = true;
                break;
            }
        if (!found) errors.push_back({where, "unknown key '" + it.key() + "'"});
    }
}

template <typename T>
std::optional<T> take(const nlohmann::json& obj, const std::string& where,
                      const std::string& key, bool required,
                      std::vector<ConfigError>& errors) {
    if (!obj.contains(key)) {
        if (required) errors.push_back({where + "." + key, "missing required key"});
        return std::nullopt;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        errors.push_back({where + "." + key, "wrong type"});
        return std::nullopt;
    }
}

}  // namespace detail

inline ConfigLoad parse_config(const std::string& text) {
    ConfigLoad out;
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        int line = 0, col = 0;
        detail::line_col_of(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
        out.errors.push_back({"parse", "line " + std::to_string(line) + " column " +
                                           std::to_string(col) + ": " + e.what()});
        return out;
    }
    if (!root.is_object()) {
        out.errors.push_back({"parse", "top level must be an object"});
        return out;
    }
    auto& errors = out.errors;
    detail::reject_unknown(root, "config",
                           {"schema_version", "params", "demand", "run", "output", "compare"},
                           errors);

    ExperimentConfig cfg;
    if (auto v = detail::take<int>(root, "config", "schema_version", true, errors)) {
        if (*v != kConfigSchemaVersion)
            errors.push_back({"config.schema_version",
                              "unsupported version " + std::to_string(*v) + ", expected " +
                                  std::to_string(kConfigSchemaVersion)});
    }

    // ---- params ----
    if (root.contains("params") && root["params"].is_object()) {
        const auto& p = root["params"];
        detail::reject_unknown(p, "params", {"c", "c_h", "c_p", "q", "x0"}, errors);
        if (auto v = detail::take<double>(p, "params", "c", true, errors)) cfg.params.c = *v;
        if (auto v = detail::take<double>(p, "params", "c_h", true, errors)) cfg.params.c_h = *v;
        if (auto v = detail::take<double>(p, "params", "c_p", true, errors)) cfg.params.c_p = *v;
        if (auto v = detail::take<double>(p, "params", "q", true, errors)) cfg.params.q = *v;
        if (auto v = detail::take<double>(p, "params", "x0", false, errors)) cfg.params.x0 = *v;
        if (!(cfg.params.c > 0.0)) errors.push_back({"params.c", "ordering cost must be positive"});
        if (!(cfg.params.c < cfg.params.c_p))
            errors.push_back({"params.c_p",
                              "ordering cost c must be strictly smaller than the backlog "
                              "penalty rate c_p"});
        if (!(cfg.params.c_h > 0.0))
            errors.push_back({"params.c_h", "holding cost must be positive"});
        if (!(cfg.params.q >= 0.0 && cfg.params.q <= 1.0))
            errors.push_back({"params.q", "must lie in [0,1]"});
        if (!(cfg.params.x0 >= 0.0)) errors.push_back({"params.x0", "must be >= 0"});
    } else {
        errors.push_back({"params", "missing required block"});
    }

    // ---- demand ----
    if (root.contains("demand") && root["demand"].is_object()) {
        const auto& d = root["demand"];
        detail::reject_unknown(d, "demand",
                               {"family", "a", "b", "mode", "a2", "b2", "w1", "M"}, errors);
        const auto fam = detail::take<std::string>(d, "demand", "family", true, errors);
        if (fam) {
            if (*fam == "uniform")
                cfg.demand.family = DemandFamily::Uniform;
            else if (*fam == "triangular")
                cfg.demand.family = DemandFamily::Triangular;
            else if (*fam == "polybump")
                cfg.demand.family = DemandFamily::PolyBump;
            else if (*fam == "uniform_mixture")
                cfg.demand.family = DemandFamily::UniformMixture;
            else
                errors.push_back({"demand.family", "unknown family '" + *fam + "'"});
        }
        if (auto v = detail::take<double>(d, "demand", "a", true, errors)) cfg.demand.a = *v;
        if (auto v = detail::take<double>(d, "demand", "b", true, errors)) cfg.demand.b = *v;
        if (auto v = detail::take<double>(d, "demand", "mode", false, errors)) cfg.demand.mode = *v;
        if (auto v = detail::take<double>(d, "demand", "a2", false, errors)) cfg.demand.a2 = *v;
        if (auto v = detail::take<double>(d, "demand", "b2", false, errors)) cfg.demand.b2 = *v;
        if (auto v = detail::take<double>(d, "demand", "w1", false, errors)) cfg.demand.w1 = *v;
        if (auto v = detail::take<int>(d, "demand", "M", false, errors))
            cfg.demand.M = *v;
        else
            cfg.demand.M = DemandSpec::default_cells(cfg.demand.support_hi());
        if (!(cfg.demand.a >= 0.0 && cfg.demand.a < cfg.demand.b))
            errors.push_back({"demand", "require 0 <= a < b"});
        if (cfg.demand.M < 64) errors.push_back({"demand.M", "need at least 64 cells"});
        if (cfg.demand.family == DemandFamily::Triangular &&
            !(cfg.demand.mode >= cfg.demand.a && cfg.demand.mode <= cfg.demand.b))
            errors.push_back({"demand.mode", "must lie in [a,b]"});
        if (cfg.demand.family == DemandFamily::UniformMixture &&
            !(cfg.demand.a2 >= 0.0 && cfg.demand.a2 < cfg.demand.b2))
            errors.push_back({"demand", "require 0 <= a2 < b2"});
    } else {
        errors.push_back({"demand", "missing required block"});
    }

    // ---- run ----
    if (root.contains("run") && root["run"].is_object()) {
        const auto& r = root["run"];
        detail::reject_unknown(r, "run",
                               {"horizons", "replications", "master_seed", "grid_step",
                                "retained_trajectories"},
                               errors);
        if (auto v = detail::take<std::vector<int>>(r, "run", "horizons", true, errors)) {
            cfg.horizons = *v;
            if (cfg.horizons.empty()) errors.push_back({"run.horizons", "must be non-empty"});
            for (std::size_t i = 0; i < cfg.horizons.size(); ++i) {
                if (cfg.horizons[i] < 1)
                    errors.push_back({"run.horizons", "horizons must be >= 1"});
                if (i > 0 && cfg.horizons[i] <= cfg.horizons[i - 1])
                    errors.push_back({"run.horizons", "must be strictly increasing"});
            }
        }
        if (auto v = detail::take<std::int64_t>(r, "run", "replications", false, errors)) {
            if (*v < 1)
                errors.push_back({"run.replications", "must be >= 1"});
            else
                cfg.replications = static_cast<std::size_t>(*v);
        }
        if (auto v = detail::take<std::uint64_t>(r, "run", "master_seed", false, errors))
            cfg.master_seed = *v;
        if (auto v = detail::take<double>(r, "run", "grid_step", false, errors)) {
            if (!(*v > 0.0))
                errors.push_back({"run.grid_step", "must be positive"});
            else
                cfg.grid_step = *v;
        }
        if (auto v = detail::take<std::int64_t>(r, "run", "retained_trajectories", false, errors)) {
            if (*v < 0)
                errors.push_back({"run.retained_trajectories", "must be >= 0"});
            else
                cfg.retained_trajectories = static_cast<std::size_t>(*v);
        }
    } else {
        errors.push_back({"run", "missing required block"});
    }

    // ---- output ----
    if (root.contains("output")) {
        const auto& o = root["output"];
        if (!o.is_object()) {
            errors.push_back({"output", "must be an object"});
        } else {
            detail::reject_unknown(o, "output", {"directory", "formats"}, errors);
            if (auto v = detail::take<std::string>(o, "output", "directory", true, errors))
                cfg.output_directory = *v;
            if (auto v = detail::take<std::vector<std::string>>(o, "output", "formats", false,
                                                                errors)) {
                cfg.formats = *v;
                for (const auto& f : cfg.formats)
                    if (f != "csv" && f != "json")
                        errors.push_back({"output.formats", "unknown format '" + f + "'"});
            }
        }
    }

    // ---- compare ----
    if (root.contains("compare")) {
        const auto& c = root["compare"];
        if (!c.is_object()) {
            errors.push_back({"compare", "must be an object"});
        } else {
            detail::reject_unknown(c, "compare", {"policies"}, errors);
            if (c.contains("policies")) {
                cfg.compare.clear();
                if (!c["policies"].is_array()) {
                    errors.push_back({"compare.policies", "must be an array"});
                } else {
                    for (const auto& e : c["policies"]) {
                        if (!e.is_object()) {
                            errors.push_back({"compare.policies", "entries must be objects"});
                            continue;
                        }
                        detail::reject_unknown(e, "compare.policies", {"kind", "level"}, errors);
                        ComparePolicy cp;
                        if (auto v = detail::take<std::string>(e, "compare.policies", "kind", true,
                                                               errors))
                            cp.kind = *v;
                        if (auto v =
                                detail::take<double>(e, "compare.policies", "level", false, errors))
                            cp.level = *v;
                        if (cp.kind != "never_order" && cp.kind != "fixed_base_stock" &&
                            cp.kind != "myopic")
                            errors.push_back(
                                {"compare.policies", "unknown policy kind '" + cp.kind + "'"});
                        cfg.compare.push_back(cp);
                    }
                }
            }
        }
    }

    if (errors.empty()) out.config = cfg;
    return out;
}

inline ConfigLoad load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        ConfigLoad out;
        out.errors.push_back({"file", "cannot open '" + path + "'"});
        return out;
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

}  // namespace invlab
