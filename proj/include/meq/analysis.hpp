#ifndef MEQ_ANALYSIS_HPP
#define MEQ_ANALYSIS_HPP

#include <meq/catalog.hpp>
#include <meq/ergodic_averages.hpp>
#include <meq/property_checks.hpp>
#include <meq/proximality.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace meq {

inline constexpr const char* tool_name = "meqlab";
inline constexpr const char* tool_version = "1.0.0";

/// Invalid experiment configuration; `field()` is the dotted path of the offending key.
class config_error : public std::invalid_argument
{
public:
    config_error(std::string field, const std::string& message)
        : std::invalid_argument("config field '" + field + "': " + message), field_(std::move(field))
    {
    }

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline const std::vector<std::string>& analysis_properties()
{
    static const std::vector<std::string> names{"equicontinuous", "mean_eq",           "eq_in_mean",     "weyl_mean_eq",
                                                "theorem_3_8",    "theorem_5_1",       "theorem_5_3",    "unique_ergodicity",
                                                "pair_relations", "product_closure",   "averaged_equicontinuity"};
    return names;
}

struct experiment_config
{
    std::vector<std::string> systems;
    std::vector<std::string> properties;
    std::uint64_t rng_seed = 0;
    std::string output_dir;
    std::string format = "json";
    scan_config scan;
    uniform_window_config windows;
    ue_config ue;
    std::vector<double> relation_eps = default_relation_eps();
    std::size_t relation_horizon = 10000;
    search_budget budget;
    double averaged_eps = 0.1;
    std::size_t averaged_horizon = 10000;
};

namespace detail {

inline std::size_t positive_size(const nlohmann::json& j, const std::string& field)
{
    if (!j.is_number_integer() || j.get<long long>() <= 0) {
        throw config_error(field, "must be a positive integer");
    }
    return j.get<std::size_t>();
}

inline std::vector<double> decreasing_reals(const nlohmann::json& j, const std::string& field)
{
    if (!j.is_array() || j.empty()) {
        throw config_error(field, "must be a non-empty array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number() || !(v.get<double>() > 0.0)) {
            throw config_error(field, "entries must be positive numbers");
        }
        out.push_back(v.get<double>());
    }
    for (std::size_t k = 1; k < out.size(); ++k) {
        if (!(out[k] < out[k - 1])) {
            throw config_error(field, "entries must be strictly decreasing");
        }
    }
    return out;
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const std::string& field)
{
    if (!j.is_array() || j.empty()) {
        throw config_error(field, "must be a non-empty array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) {
            throw config_error(field, "entries must be strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace detail

/// Parses and validates an experiment config. Unknown keys are rejected.
inline experiment_config parse_config(const nlohmann::json& j, const std::vector<entry_ptr>& catalog)
{
    if (!j.is_object()) {
        throw config_error("<root>", "must be a JSON object");
    }
    static const std::set<std::string> top{"systems", "properties", "rng_seed", "output_dir", "format", "grids"};
    for (const auto& [k, v] : j.items()) {
        if (!top.count(k)) {
            throw config_error(k, "unknown key");
        }
    }
    experiment_config c;
    if (!j.contains("systems")) {
        throw config_error("systems", "missing");
    }
    c.systems = detail::string_list(j["systems"], "systems");
    for (const auto& s : c.systems) {
        const bool known = std::any_of(catalog.begin(), catalog.end(), [&](const entry_ptr& e) { return e->id == s; });
        if (!known) {
            throw config_error("systems", "unknown system id '" + s + "'");
        }
    }
    if (!j.contains("properties")) {
        throw config_error("properties", "missing");
    }
    c.properties = detail::string_list(j["properties"], "properties");
    for (const auto& p : c.properties) {
        const auto& names = analysis_properties();
        if (std::find(names.begin(), names.end(), p) == names.end()) {
            throw config_error("properties", "unknown property '" + p + "'");
        }
    }
    if (!j.contains("rng_seed")) {
        throw config_error("rng_seed", "missing (a seed is mandatory for reproducibility)");
    }
    if (!j["rng_seed"].is_number_unsigned() && !(j["rng_seed"].is_number_integer() && j["rng_seed"].get<long long>() >= 0)) {
        throw config_error("rng_seed", "must be a non-negative integer");
    }
    c.rng_seed = j["rng_seed"].get<std::uint64_t>();
    c.scan.seed = c.rng_seed;
    c.ue.seed = c.rng_seed;
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) {
            throw config_error("output_dir", "must be a string");
        }
        c.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("format")) {
        if (!j["format"].is_string()) {
            throw config_error("format", "must be one of json, csv, both");
        }
        c.format = j["format"].get<std::string>();
        if (c.format != "json" && c.format != "csv" && c.format != "both") {
            throw config_error("format", "must be one of json, csv, both");
        }
    }
    if (j.contains("grids")) {
        const auto& g = j["grids"];
        if (!g.is_object()) {
            throw config_error("grids", "must be an object");
        }
        for (const auto& [k, v] : g.items()) {
            const std::string f = "grids." + k;
            if (k == "eps") {
                c.scan.eps_grid = detail::decreasing_reals(v, f);
            } else if (k == "delta") {
                c.scan.delta_grid = detail::decreasing_reals(v, f);
            } else if (k == "pair_budget") {
                c.scan.pair_budget = detail::positive_size(v, f);
            } else if (k == "horizon") {
                c.scan.numeric_horizon = detail::positive_size(v, f);
            } else if (k == "symbolic_horizon") {
                c.scan.symbolic_horizon = detail::positive_size(v, f);
            } else if (k == "window_horizon") {
                c.windows.horizon = detail::positive_size(v, f);
            } else if (k == "window_eps") {
                c.windows.eps = detail::decreasing_reals(v, f);
            } else if (k == "ue_horizon") {
                c.ue.horizon = detail::positive_size(v, f);
            } else if (k == "relation_eps") {
                c.relation_eps = detail::decreasing_reals(v, f);
            } else if (k == "relation_horizon") {
                c.relation_horizon = detail::positive_size(v, f);
            } else if (k == "search_candidates") {
                c.budget.candidates = detail::positive_size(v, f);
            } else if (k == "search_max_time") {
                c.budget.max_time = detail::positive_size(v, f);
            } else {
                throw config_error(f, "unknown key");
            }
        }
        for (const auto* h : {&c.scan.numeric_horizon, &c.scan.symbolic_horizon, &c.windows.horizon, &c.relation_horizon}) {
            if (*h < 16) {
                throw config_error("grids", "horizons must be at least 16");
            }
        }
    }
    return c;
}

inline nlohmann::json to_json(const experiment_config& c)
{
    return {{"systems", c.systems},
            {"properties", c.properties},
            {"rng_seed", c.rng_seed},
            {"format", c.format},
            {"grids",
             {{"eps", c.scan.eps_grid},
              {"delta", c.scan.delta_grid},
              {"pair_budget", c.scan.pair_budget},
              {"horizon", c.scan.numeric_horizon},
              {"symbolic_horizon", c.scan.symbolic_horizon},
              {"window_horizon", c.windows.horizon},
              {"window_eps", c.windows.eps},
              {"ue_horizon", c.ue.horizon},
              {"relation_eps", c.relation_eps},
              {"relation_horizon", c.relation_horizon},
              {"search_candidates", c.budget.candidates},
              {"search_max_time", c.budget.max_time}}}};
}

struct analysis_result
{
    nlohmann::json report;
    bool contradiction = false;
    /// Human-readable table: one row per (system, property, ε).
    std::string summary;
};

namespace detail {

inline void add_series(nlohmann::json& series, const std::string& name, const curve& c)
{
    nlohmann::json xs = nlohmann::json::array();
    nlohmann::json ys = nlohmann::json::array();
    for (const auto& p : c) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    series[name] = {{"x", xs}, {"y", ys}};
}

inline std::string format_delta(const eps_result& r)
{
    std::ostringstream os;
    if (r.found_delta) {
        os << *r.found_delta;
    } else if (r.refutation) {
        os << "none (witness estimate " << std::setprecision(4) << r.refutation->estimate << ")";
    } else {
        os << "none";
    }
    return os.str();
}

inline bool wants(const experiment_config& c, const std::string& p)
{
    return std::find(c.properties.begin(), c.properties.end(), p) != c.properties.end();
}

inline nlohmann::json expected_json(const catalog_entry& e)
{
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : e.expected) {
        out[k] = to_string(v);
    }
    return out;
}

inline nlohmann::json flags_json(const system_flags& f)
{
    return {{"transitive", f.transitive},
            {"minimal", f.minimal},
            {"weakly_mixing", f.weakly_mixing},
            {"uniquely_ergodic", f.uniquely_ergodic},
            {"isometry", f.isometry}};
}

inline nlohmann::json ue_json(const unique_ergodicity_report& r)
{
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : r.curves) {
        curves.push_back({{"f", c.f_id}, {"tail_max", c.tail_max}, {"tail_min", c.tail_min}, {"spread", curve_json(c.spread)}});
    }
    nlohmann::json j{{"outcome", to_string(r.outcome)},
                     {"limit_spread_estimate", r.limit_spread_estimate},
                     {"curves", curves},
                     {"sample_points", r.sample_points}};
    if (r.refutation) {
        j["refutation"] = {{"f", r.refutation->f_id},
                           {"point_a", r.refutation->point_a},
                           {"point_b", r.refutation->point_b},
                           {"n", r.refutation->n},
                           {"difference", r.refutation->difference}};
    } else {
        j["refutation"] = nullptr;
    }
    return j;
}

} // namespace detail

/**
 * Runs every requested check on every requested system and assembles the report. The report is
 * a deterministic function of the config except for the top-level "timestamp" object.
 */
inline analysis_result run_analysis(const experiment_config& cfg, const std::vector<entry_ptr>& catalog)
{
    const auto started = std::chrono::steady_clock::now();
    analysis_result res;
    nlohmann::json systems = nlohmann::json::array();
    nlohmann::json series = nlohmann::json::object();
    nlohmann::json contradictions = nlohmann::json::array();
    std::ostringstream check_lines;
    std::ostringstream table;
    table << std::left << std::setw(24) << "system" << std::setw(16) << "property" << std::setw(12) << "eps" << std::setw(18)
          << "outcome" << "delta(eps)\n";

    for (const auto& id : cfg.systems) {
        const auto entry = find_entry(catalog, id);
        nlohmann::json sj{{"id", entry->id},
                          {"description", entry->description},
                          {"expected", detail::expected_json(*entry)},
                          {"expectation_level", entry->expectation_level},
                          {"flags", detail::flags_json(entry->flags)}};

        std::vector<property_kind> props;
        for (auto p : all_properties) {
            if (detail::wants(cfg, to_string(p))) {
                props.push_back(p);
            }
        }
        auto need = [&](property_kind p) {
            if (std::find(props.begin(), props.end(), p) == props.end()) {
                props.push_back(p);
            }
        };
        if (detail::wants(cfg, "theorem_3_8")) {
            need(property_kind::mean_eq);
            need(property_kind::eq_in_mean);
        }
        if (detail::wants(cfg, "theorem_5_1")) {
            need(property_kind::mean_eq);
            need(property_kind::weyl_mean_eq);
        }
        if (detail::wants(cfg, "theorem_5_3") || detail::wants(cfg, "unique_ergodicity")) {
            need(property_kind::mean_eq);
        }
        std::sort(props.begin(), props.end());

        std::map<property_kind, system_verdict> verdicts;
        nlohmann::json vj = nlohmann::json::array();
        if (!props.empty()) {
            for (auto& v : scan_moduli(*entry, props, cfg.scan)) {
                const std::string base = entry->id + "/" + to_string(v.property);
                curve cells;
                for (std::size_t c = 0; c < v.scan.delta_grid.size(); ++c) {
                    cells.push_back({v.scan.delta_grid[c], v.scan.cell_max[c]});
                }
                detail::add_series(series, base + "/cell_max", cells);
                for (const auto& r : v.scan.per_eps) {
                    if (r.refutation && !series.contains(base + "/witness")) {
                        detail::add_series(series, base + "/witness", r.refutation->partials);
                    }
                    table << std::left << std::setw(24) << entry->id << std::setw(16) << to_string(v.property) << std::setw(12)
                          << r.eps << std::setw(18) << to_string(v.outcome) << detail::format_delta(r) << '\n';
                }
                vj.push_back(to_json(v));
                verdicts.emplace(v.property, std::move(v));
            }
        }
        sj["verdicts"] = vj;
        sj["evaluated_on"] = effective_entry(*entry, cfg.scan.numeric_horizon).id;

        nlohmann::json checks = nlohmann::json::array();
        auto record = [&](const cross_check_report& r) {
            if (r.status == cross_status::contradiction) {
                res.contradiction = true;
                contradictions.push_back(r.name + ":" + r.system_id);
            }
            checks.push_back(to_json(r));
            check_lines << std::left << std::setw(24) << entry->id << std::setw(32) << r.name << to_string(r.status) << '\n';
        };
        if (detail::wants(cfg, "theorem_3_8")) {
            record(equivalence_report("mean_eq_vs_eq_in_mean", entry->id, verdicts.at(property_kind::mean_eq),
                                      verdicts.at(property_kind::eq_in_mean)));
        }
        if (detail::wants(cfg, "theorem_5_1")) {
            record(equivalence_report("mean_eq_vs_weyl_mean_eq", entry->id, verdicts.at(property_kind::mean_eq),
                                      verdicts.at(property_kind::weyl_mean_eq)));
        }
        if (detail::wants(cfg, "theorem_5_3")) {
            const auto& mv = verdicts.at(property_kind::mean_eq);
            if (mv.outcome == verdict_outcome::certified_at_scale) {
                const auto rep = check_theorem_5_3(*entry, mv, cfg.scan, cfg.windows);
                auto j = to_json(rep);
                j["status"] = rep.passed ? "Consistent" : "Inconclusive";
                for (const auto& e : rep.per_eps) {
                    std::ostringstream name;
                    name << entry->id << "/uniform_windows/eps=" << e.eps;
                    detail::add_series(series, name.str(), e.bound_curve);
                }
                checks.push_back(j);
            } else {
                checks.push_back({{"name", "uniform_window_bound"},
                                  {"system", entry->id},
                                  {"status", "PreconditionNotMet"},
                                  {"details", {{"mean_eq", to_string(mv.outcome)}}}});
            }
        }
        if (detail::wants(cfg, "unique_ergodicity")) {
            const auto ue = run_unique_ergodicity(*entry, cfg.ue);
            sj["unique_ergodicity"] = detail::ue_json(ue);
            for (const auto& c : ue.curves) {
                detail::add_series(series, entry->id + "/ue/" + c.f_id + "/spread", c.spread);
            }
            record(check_mean_eq_unique_ergodicity(*entry, verdicts.at(property_kind::mean_eq), ue));
        } else {
            sj["unique_ergodicity"] = nullptr;
        }
        if (detail::wants(cfg, "product_closure") && entry->factors.size() == 2) {
            record(check_product_closure(find_entry(catalog, entry->factors[0]), find_entry(catalog, entry->factors[1]), cfg.scan));
        }
        sj["cross_checks"] = checks;

        nlohmann::json pairs = nlohmann::json::array();
        if (detail::wants(cfg, "pair_relations")) {
            const auto& eff = effective_entry(*entry, cfg.relation_horizon);
            const auto& sys = *eff.system;
            const auto lengths = default_window_lengths(cfg.relation_horizon);
            for (const auto& ex : eff.example_pairs) {
                nlohmann::json pj{{"label", ex.label}, {"evaluated_on", eff.id}};
                pj["P"] = to_json(proximal_test(sys, ex.x, ex.y, cfg.relation_eps, cfg.relation_horizon));
                pj["BP"] = to_json(banach_proximal_test(sys, ex.x, ex.y, cfg.relation_eps, cfg.relation_horizon, lengths));
                pj["Q"] = to_json(regionally_proximal_test(sys, ex.x, ex.y, cfg.relation_eps, cfg.budget, cfg.rng_seed));
                const auto qme = mean_sensitive_pair_scan(sys, ex.x, ex.y, cfg.relation_eps, {}, {0.5, 0.25, 0.125}, cfg.budget,
                                                          cfg.rng_seed);
                nlohmann::json per_tau = nlohmann::json::array();
                for (std::size_t t = 0; t < qme.taus.size(); ++t) {
                    per_tau.push_back({{"tau", qme.taus[t]},
                                       {"best_c", qme.best_c[t] ? nlohmann::json(*qme.best_c[t]) : nlohmann::json(nullptr)},
                                       {"verdict", to_json(qme.verdicts[t])}});
                }
                pj["Q_me"] = {{"outcome", to_string(qme.outcome)}, {"eps", qme.eps}, {"c_grid", qme.c_grid}, {"per_tau", per_tau}};
                pairs.push_back(std::move(pj));
            }
        }
        sj["pair_verdicts"] = pairs;

        if (detail::wants(cfg, "averaged_equicontinuity")) {
            nlohmann::json aj = nlohmann::json::array();
            for (const auto& f : entry->observables) {
                const auto r = averaged_function_equicontinuity(*entry, f, cfg.averaged_eps,
                                                                std::min(cfg.averaged_horizon, cfg.scan.numeric_horizon), cfg.scan);
                detail::add_series(series, entry->id + "/averaged/" + f.id + "/modulus", r.modulus);
                aj.push_back(to_json(r));
            }
            sj["averaged_equicontinuity"] = aj;
        }
        systems.push_back(std::move(sj));
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const std::time_t now = std::time(nullptr);
    char utc[32];
    std::strftime(utc, sizeof utc, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));

    res.report = {{"tool", tool_name},
                  {"tool_version", tool_version},
                  {"config", to_json(cfg)},
                  {"systems", systems},
                  {"series", series},
                  {"contradictions", contradictions},
                  {"timestamp", {{"utc", utc}, {"wall_time_s", wall}}}};
    res.summary = table.str();
    if (!check_lines.str().empty()) {
        res.summary += "\ncross-checks\n" + check_lines.str();
    }
    return res;
}

/// Serialized report; the only nondeterministic content is the "timestamp" object.
inline std::string dump_report(const nlohmann::json& report)
{
    return report.dump(2) + "\n";
}

inline std::string sanitize_name(const std::string& s)
{
    std::string out;
    for (char ch : s) {
        out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.') ? ch : '_';
    }
    return out;
}

inline std::string series_csv(const nlohmann::json& series, const std::vector<std::string>& names)
{
    std::ostringstream os;
    os.precision(17);
    const bool many = names.size() > 1;
    os << (many ? "series,x,y\n" : "x,y\n");
    for (const auto& n : names) {
        const auto& s = series.at(n);
        for (std::size_t k = 0; k < s["x"].size(); ++k) {
            if (many) {
                os << n << ',';
            }
            os << s["x"][k].get<double>() << ',' << s["y"][k].get<double>() << '\n';
        }
    }
    return os.str();
}

/// Writes report.json and, for csv/both, one CSV per series plus summary.csv.
inline void write_outputs(const analysis_result& res, const experiment_config& cfg, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        out << dump_report(res.report);
        if (!out) {
            throw std::runtime_error("cannot write " + (dir / "report.json").string());
        }
    }
    if (cfg.format == "csv" || cfg.format == "both") {
        const auto sdir = dir / "series";
        std::filesystem::create_directories(sdir);
        for (const auto& [name, s] : res.report["series"].items()) {
            std::ofstream out(sdir / (sanitize_name(name) + ".csv"), std::ios::binary);
            out << series_csv(res.report["series"], {name});
        }
        std::ofstream sum(dir / "summary.csv", std::ios::binary);
        sum.precision(17);
        sum << "system,property,outcome,eps,found_delta,max_estimate\n";
        for (const auto& s : res.report["systems"]) {
            for (const auto& v : s["verdicts"]) {
                for (const auto& r : v["per_eps"]) {
                    sum << s["id"].get<std::string>() << ',' << v["property"].get<std::string>() << ','
                        << v["outcome"].get<std::string>() << ',' << r["eps"].get<double>() << ',';
                    if (!r["found_delta"].is_null()) {
                        sum << r["found_delta"].get<double>();
                    }
                    sum << ',' << r["max_estimate"].get<double>() << '\n';
                }
            }
        }
    }
}

/// Series names matching a selector: exact name, else every name containing the selector.
inline std::vector<std::string> select_series(const nlohmann::json& report, const std::string& selector)
{
    if (!report.contains("series") || !report["series"].is_object()) {
        throw std::invalid_argument("report has no series section");
    }
    const auto& series = report["series"];
    std::vector<std::string> names;
    for (const auto& [name, s] : series.items()) {
        names.push_back(name);
    }
    if (selector.empty()) {
        return names;
    }
    if (series.contains(selector)) {
        return {selector};
    }
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (n.find(selector) != std::string::npos) {
            out.push_back(n);
        }
    }
    if (out.empty()) {
        if (selector.find("witness") != std::string::npos) {
            throw std::out_of_range("no witness series");
        }
        throw std::out_of_range("no series matching '" + selector + "'");
    }
    return out;
}

} // namespace meq

#endif
