#ifndef MEQ_PROPERTY_CHECKS_HPP
#define MEQ_PROPERTY_CHECKS_HPP

#include <meq/catalog.hpp>
#include <meq/densities.hpp>
#include <meq/ergodic_averages.hpp>
#include <meq/mean_metrics.hpp>
#include <meq/numeric.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace meq {

enum class property_kind { equicontinuous, mean_eq, eq_in_mean, weyl_mean_eq };

inline constexpr std::array<property_kind, 4> all_properties{property_kind::equicontinuous, property_kind::mean_eq,
                                                             property_kind::eq_in_mean, property_kind::weyl_mean_eq};

inline const char* to_string(property_kind p)
{
    switch (p) {
    case property_kind::equicontinuous: return "equicontinuous";
    case property_kind::mean_eq: return "mean_eq";
    case property_kind::eq_in_mean: return "eq_in_mean";
    case property_kind::weyl_mean_eq: return "weyl_mean_eq";
    }
    return "unknown";
}

inline property_kind parse_property(const std::string& s)
{
    for (auto p : all_properties) {
        if (s == to_string(p)) {
            return p;
        }
    }
    throw std::invalid_argument("unknown property '" + s + "'");
}

inline std::vector<double> dyadic_grid(int first, int last)
{
    std::vector<double> out;
    for (int k = first; k <= last; ++k) {
        out.push_back(std::ldexp(1.0, -k));
    }
    return out;
}

struct scan_config
{
    std::vector<double> eps_grid = dyadic_grid(1, 6);
    std::vector<double> delta_grid = dyadic_grid(1, 20);
    std::size_t pair_budget = 64;
    std::size_t numeric_horizon = 100000;
    std::size_t symbolic_horizon = 1000000;
    std::uint64_t seed = 1;
    /// A refutation must persist as δ shrinks: the best estimate in the finest δ cell has to keep
    /// at least this fraction of the best estimate over the finer half of the grid.
    double persistence = 0.75;
};

inline void validate(const scan_config& cfg)
{
    auto decreasing = [](const std::vector<double>& g, const char* name) {
        if (g.empty()) {
            throw std::invalid_argument(std::string(name) + ": empty grid");
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!(g[k] > 0.0) || (k > 0 && !(g[k] < g[k - 1]))) {
                throw std::invalid_argument(std::string(name) + ": grid must be positive and strictly decreasing");
            }
        }
    };
    decreasing(cfg.eps_grid, "eps_grid");
    decreasing(cfg.delta_grid, "delta_grid");
    if (cfg.pair_budget == 0 || cfg.numeric_horizon < 4 || cfg.symbolic_horizon < 4) {
        throw std::invalid_argument("scan_config: pair_budget ≥ 1 and horizons ≥ 4 required");
    }
}

/// The entry whose system is actually iterated: the exact twin when the horizon exceeds the trusted one.
inline const catalog_entry& effective_entry(const catalog_entry& entry, std::size_t horizon)
{
    if (entry.twin && entry.trusted_horizon > 0 && horizon > entry.trusted_horizon) {
        return *entry.twin;
    }
    return entry;
}

inline std::size_t horizon_for(const catalog_entry& entry, const scan_config& cfg)
{
    const auto& e = effective_entry(entry, cfg.numeric_horizon);
    return e.system->is_symbolic_like() ? cfg.symbolic_horizon : cfg.numeric_horizon;
}

struct refutation_witness
{
    point x;
    point y;
    double distance = 0.0;
    double estimate = 0.0;
    double noise = 0.0;
    double cell_delta = 0.0;
    std::uint64_t seed = 0;
    std::string estimator;
    curve partials;
    bool margin_ok = false;
    bool persistent = false;
};

struct eps_result
{
    double eps = 0.0;
    std::optional<double> found_delta;
    std::size_t pairs_checked = 0;
    double max_estimate = 0.0;
    std::optional<refutation_witness> refutation;
};

struct modulus_scan
{
    property_kind property = property_kind::mean_eq;
    std::string system_id;
    std::string evaluated_on;
    std::vector<double> eps_grid;
    std::vector<double> delta_grid;
    std::vector<eps_result> per_eps;
    /// Largest estimate among pairs sampled in each δ cell.
    std::vector<double> cell_max;
    std::size_t sample_budget = 0;
    std::size_t horizon = 0;
};

enum class verdict_outcome { certified_at_scale, refuted, inconclusive };

inline const char* to_string(verdict_outcome o)
{
    switch (o) {
    case verdict_outcome::certified_at_scale: return "CertifiedAtScale";
    case verdict_outcome::refuted: return "Refuted";
    case verdict_outcome::inconclusive: return "Inconclusive";
    }
    return "unknown";
}

struct system_verdict
{
    property_kind property = property_kind::mean_eq;
    verdict_outcome outcome = verdict_outcome::inconclusive;
    modulus_scan scan;
    std::string notes;
};

inline nlohmann::json curve_json(const curve& c)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : c) {
        out.push_back({p.x, p.y});
    }
    return out;
}

inline nlohmann::json to_json(const refutation_witness& w)
{
    return {{"x", describe(w.x)},         {"y", describe(w.y)},       {"distance", w.distance},
            {"estimate", w.estimate},     {"noise", w.noise},         {"cell_delta", w.cell_delta},
            {"seed", w.seed},             {"estimator", w.estimator}, {"margin_ok", w.margin_ok},
            {"persistent", w.persistent}, {"partials", curve_json(w.partials)}};
}

inline nlohmann::json to_json(const system_verdict& v)
{
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : v.scan.per_eps) {
        per.push_back({{"eps", r.eps},
                       {"found_delta", r.found_delta ? nlohmann::json(*r.found_delta) : nlohmann::json(nullptr)},
                       {"pairs_checked", r.pairs_checked},
                       {"max_estimate", r.max_estimate},
                       {"refutation", r.refutation ? to_json(*r.refutation) : nlohmann::json(nullptr)}});
    }
    return {{"property", to_string(v.property)},
            {"outcome", to_string(v.outcome)},
            {"system", v.scan.system_id},
            {"evaluated_on", v.scan.evaluated_on},
            {"horizon", v.scan.horizon},
            {"pair_budget", v.scan.sample_budget},
            {"eps_grid", v.scan.eps_grid},
            {"delta_grid", v.scan.delta_grid},
            {"cell_max", v.scan.cell_max},
            {"per_eps", per},
            {"notes", v.notes}};
}

namespace detail {

struct estimate_value
{
    double value = 0.0;
    double noise = 0.0;
};

struct pair_sample
{
    std::size_t cell = 0;
    std::uint64_t seed = 0;
    double distance = 0.0;
    std::array<estimate_value, 4> est{};
};

inline std::uint64_t pair_seed(std::uint64_t base, std::size_t cell, std::size_t j)
{
    return (mix_seed(base, cell, j >> 1) << 1) | (j & 1);
}

struct estimator_plan
{
    std::size_t horizon = 0;
    std::vector<std::size_t> schedule;
    std::vector<std::size_t> window_lengths;
};

inline estimator_plan make_plan(std::size_t horizon)
{
    return {horizon, geometric_schedule(horizon), default_window_lengths(horizon)};
}

inline estimate_value estimate_from_trace(property_kind p, std::span<const double> trace, const estimator_plan& plan)
{
    switch (p) {
    case property_kind::equicontinuous: return {*std::max_element(trace.begin(), trace.end()), 0.0};
    case property_kind::mean_eq: {
        const auto e = besicovitch_from_trace(trace, plan.schedule);
        return {e.value, e.noise};
    }
    case property_kind::eq_in_mean: return {sup_dbar_from_trace(trace).value, 0.0};
    case property_kind::weyl_mean_eq: {
        const auto e = weyl_from_trace(trace, plan.window_lengths);
        return {e.value, e.noise};
    }
    }
    return {};
}

inline curve partials_from_trace(property_kind p, std::span<const double> trace, const estimator_plan& plan, std::string& name)
{
    switch (p) {
    case property_kind::equicontinuous: {
        name = "running_max_distance";
        curve c;
        double best = 0.0;
        std::size_t next = 0;
        for (std::size_t n = 1; n <= trace.size(); ++n) {
            best = std::max(best, trace[n - 1]);
            if (next < plan.schedule.size() && plan.schedule[next] == n) {
                c.push_back({static_cast<double>(n), best});
                ++next;
            }
        }
        return c;
    }
    case property_kind::mean_eq: name = to_string(metric_kind::besicovitch_limsup); return besicovitch_from_trace(trace, plan.schedule).partials;
    case property_kind::eq_in_mean: name = to_string(metric_kind::sup_over_all_n); return sup_dbar_from_trace(trace).partials;
    case property_kind::weyl_mean_eq: name = to_string(metric_kind::weyl_limsup); return weyl_from_trace(trace, plan.window_lengths).partials;
    }
    return {};
}

} // namespace detail

/**
 * Modulus scans for several properties from one set of sampled pairs.
 *
 * For every δ cell, `pair_budget` pairs with d < δ are sampled (random and adversarial seeds
 * alternate) and each pair's distance trace is computed once. For each ε the reported δ is the
 * largest grid value such that every sampled pair with d(x,y) < δ has estimate < ε. When no δ
 * works, the pair with the largest margin among the pairs closer than the finest δ becomes the
 * refutation candidate. The outcome is Refuted only when that candidate clears ε by twice its
 * diagnosed noise and its cell maximum does not decay across the finer half of the δ grid.
 */
inline std::vector<system_verdict> scan_moduli(const catalog_entry& entry, std::span<const property_kind> props,
                                               const scan_config& cfg)
{
    validate(cfg);
    if (props.empty()) {
        throw std::invalid_argument("scan_moduli: no properties requested");
    }
    const auto& eff = effective_entry(entry, cfg.numeric_horizon);
    const auto& sys = *eff.system;
    if (!sys.caps().can_sample_points || !sys.caps().can_sample_near) {
        throw std::logic_error("scan_moduli: system '" + sys.id() + "' does not support pair sampling");
    }
    const std::size_t horizon = horizon_for(entry, cfg);
    const auto plan = detail::make_plan(horizon);

    std::vector<std::size_t> cells;
    for (std::size_t c = 0; c < cfg.delta_grid.size(); ++c) {
        if (cfg.delta_grid[c] > sys.resolution()) {
            cells.push_back(c);
        }
    }
    const std::size_t total = cells.size() * cfg.pair_budget;
    std::vector<detail::pair_sample> samples(total);
    parallel_for(total, [&](std::size_t k) {
        const std::size_t c = cells[k / cfg.pair_budget];
        const std::size_t j = k % cfg.pair_budget;
        auto& s = samples[k];
        s.cell = c;
        s.seed = detail::pair_seed(cfg.seed, c, j);
        const auto [x, y] = sample_pair_near_diagonal(eff, cfg.delta_grid[c], s.seed);
        const auto trace = orbit_distance_trace(sys, x, y, horizon);
        s.distance = trace[0];
        for (auto p : props) {
            s.est[static_cast<std::size_t>(p)] = detail::estimate_from_trace(p, trace, plan);
        }
    });

    std::vector<system_verdict> out;
    for (auto p : props) {
        const auto pi = static_cast<std::size_t>(p);
        system_verdict v;
        v.property = p;
        auto& scan = v.scan;
        scan.property = p;
        scan.system_id = entry.id;
        scan.evaluated_on = eff.id;
        scan.eps_grid = cfg.eps_grid;
        scan.delta_grid = cfg.delta_grid;
        scan.sample_budget = cfg.pair_budget;
        scan.horizon = horizon;
        scan.cell_max.assign(cfg.delta_grid.size(), 0.0);
        for (const auto& s : samples) {
            scan.cell_max[s.cell] = std::max(scan.cell_max[s.cell], s.est[pi].value);
        }
        const double finest = cells.empty() ? 0.0 : cfg.delta_grid[cells.back()];
        double upper_half_max = 0.0;
        for (std::size_t k = cells.size() / 2; k < cells.size(); ++k) {
            upper_half_max = std::max(upper_half_max, scan.cell_max[cells[k]]);
        }
        const bool persistent = !cells.empty() && scan.cell_max[cells.back()] >= cfg.persistence * upper_half_max;

        bool all_found = true;
        bool any_refuted = false;
        for (double eps : cfg.eps_grid) {
            eps_result r;
            r.eps = eps;
            for (std::size_t c : cells) {
                const double delta = cfg.delta_grid[c];
                double worst = 0.0;
                std::size_t n = 0;
                bool ok = true;
                for (const auto& s : samples) {
                    if (s.distance < delta) {
                        ++n;
                        worst = std::max(worst, s.est[pi].value);
                        ok = ok && s.est[pi].value < eps;
                    }
                }
                if (ok && n > 0) {
                    r.found_delta = delta;
                    r.pairs_checked = n;
                    r.max_estimate = worst;
                    break;
                }
            }
            if (!r.found_delta) {
                all_found = false;
                const detail::pair_sample* best = nullptr;
                for (const auto& s : samples) {
                    if (s.distance < finest) {
                        ++r.pairs_checked;
                        r.max_estimate = std::max(r.max_estimate, s.est[pi].value);
                        const double margin = s.est[pi].value - 2.0 * s.est[pi].noise;
                        if (!best || margin > best->est[pi].value - 2.0 * best->est[pi].noise) {
                            best = &s;
                        }
                    }
                }
                if (best) {
                    const auto [x, y] = sample_pair_near_diagonal(eff, cfg.delta_grid[best->cell], best->seed);
                    const auto trace = orbit_distance_trace(sys, x, y, horizon);
                    refutation_witness w{x, y, best->distance, best->est[pi].value, best->est[pi].noise, cfg.delta_grid[best->cell],
                                         best->seed, {}, {}, false, persistent};
                    w.partials = detail::partials_from_trace(p, trace, plan, w.estimator);
                    w.margin_ok = w.estimate >= eps + 2.0 * w.noise;
                    any_refuted = any_refuted || (w.margin_ok && w.persistent);
                    r.refutation = std::move(w);
                }
            }
            scan.per_eps.push_back(std::move(r));
        }
        v.outcome = all_found ? verdict_outcome::certified_at_scale
                              : (any_refuted ? verdict_outcome::refuted : verdict_outcome::inconclusive);
        v.notes = std::string(to_string(v.outcome)) + " at horizon " + std::to_string(horizon) + " with "
                + std::to_string(cfg.pair_budget) + " pairs per δ cell over " + std::to_string(cells.size())
                + " cells; a finite-scale verdict, not a proof";
        out.push_back(std::move(v));
    }
    return out;
}

inline system_verdict scan_modulus(const catalog_entry& entry, property_kind p, const scan_config& cfg)
{
    const std::array<property_kind, 1> props{p};
    return scan_moduli(entry, props, cfg).front();
}

// ---------------------------------------------------------------------------------------------
// Cross-checks between equivalent properties.
// ---------------------------------------------------------------------------------------------

enum class cross_status { consistent, contradiction, inconclusive, not_applicable };

inline const char* to_string(cross_status s)
{
    switch (s) {
    case cross_status::consistent: return "Consistent";
    case cross_status::contradiction: return "Contradiction";
    case cross_status::inconclusive: return "Inconclusive";
    case cross_status::not_applicable: return "NotApplicable";
    }
    return "unknown";
}

struct cross_check_report
{
    std::string name;
    std::string system_id;
    std::vector<std::pair<std::string, std::string>> outcomes; ///< (label, outcome)
    cross_status status = cross_status::inconclusive;
    nlohmann::json details;
};

inline nlohmann::json to_json(const cross_check_report& r)
{
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : r.outcomes) {
        o[k] = v;
    }
    return {{"name", r.name}, {"system", r.system_id}, {"outcomes", o}, {"status", to_string(r.status)}, {"details", r.details}};
}

inline cross_status equivalence_status(verdict_outcome a, verdict_outcome b)
{
    if (a == verdict_outcome::inconclusive || b == verdict_outcome::inconclusive) {
        return cross_status::inconclusive;
    }
    return a == b ? cross_status::consistent : cross_status::contradiction;
}

inline cross_check_report equivalence_report(std::string name, const std::string& system_id, const system_verdict& a,
                                             const system_verdict& b)
{
    cross_check_report r;
    r.name = std::move(name);
    r.system_id = system_id;
    r.outcomes = {{to_string(a.property), to_string(a.outcome)}, {to_string(b.property), to_string(b.outcome)}};
    r.status = equivalence_status(a.outcome, b.outcome);
    return r;
}

/// Mean equicontinuity versus equicontinuity in the mean.
inline cross_check_report check_theorem_3_8(const catalog_entry& entry, const scan_config& cfg)
{
    const std::array<property_kind, 2> props{property_kind::mean_eq, property_kind::eq_in_mean};
    const auto v = scan_moduli(entry, props, cfg);
    return equivalence_report("mean_eq_vs_eq_in_mean", entry.id, v[0], v[1]);
}

/// Mean equicontinuity versus Weyl mean equicontinuity.
inline cross_check_report check_theorem_5_1(const catalog_entry& entry, const scan_config& cfg)
{
    const std::array<property_kind, 2> props{property_kind::mean_eq, property_kind::weyl_mean_eq};
    const auto v = scan_moduli(entry, props, cfg);
    return equivalence_report("mean_eq_vs_weyl_mean_eq", entry.id, v[0], v[1]);
}

struct uniform_window_entry
{
    double eps = 0.0;
    std::optional<double> delta;
    std::optional<std::size_t> n;
    double bound = 0.0;
    std::size_t pairs = 0;
    /// (N, max over pooled pairs of the largest window average with length ≥ N) at the chosen δ.
    curve bound_curve;
};

struct uniform_window_report
{
    std::string system_id;
    std::size_t horizon = 0;
    std::size_t pair_budget = 0;
    std::vector<uniform_window_entry> per_eps;
    bool passed = false;
};

inline nlohmann::json to_json(const uniform_window_report& r)
{
    nlohmann::json per = nlohmann::json::array();
    for (const auto& e : r.per_eps) {
        per.push_back({{"eps", e.eps},
                       {"delta", e.delta ? nlohmann::json(*e.delta) : nlohmann::json(nullptr)},
                       {"N", e.n ? nlohmann::json(*e.n) : nlohmann::json(nullptr)},
                       {"bound", e.bound},
                       {"pairs", e.pairs},
                       {"bound_curve", curve_json(e.bound_curve)}});
    }
    return {{"name", "uniform_window_bound"}, {"system", r.system_id}, {"horizon", r.horizon},
            {"pair_budget", r.pair_budget}, {"per_eps", per},         {"passed", r.passed}};
}

struct uniform_window_config
{
    std::vector<double> eps = dyadic_grid(1, 4);
    std::size_t horizon = 100000;
    std::size_t max_steps = 8;
};

/**
 * Uniform window bound: for each ε, find δ and N so that every sampled pair with d < δ has all
 * window averages of length ≥ N (any start) below ε. Starts from the mean-equicontinuity modulus
 * and refines δ for at most `max_steps` grid steps. Requires a certified mean_eq verdict.
 */
inline uniform_window_report check_theorem_5_3(const catalog_entry& entry, const system_verdict& mean_verdict,
                                               const scan_config& cfg, const uniform_window_config& ucfg = {})
{
    if (mean_verdict.property != property_kind::mean_eq || mean_verdict.outcome != verdict_outcome::certified_at_scale) {
        throw std::logic_error("check_theorem_5_3: system '" + entry.id + "' is not certified mean equicontinuous");
    }
    validate(cfg);
    const auto& eff = effective_entry(entry, ucfg.horizon);
    const auto& sys = *eff.system;
    const std::size_t horizon = ucfg.horizon;
    const auto lengths = sampled_window_lengths(1, horizon);
    std::vector<std::size_t> grid_n;
    for (std::size_t n = 1; n <= horizon; n *= 2) {
        grid_n.push_back(n);
    }

    struct cell_pairs
    {
        bool done = false;
        std::vector<double> distance;
        std::vector<std::vector<double>> suffix_max; ///< per pair, per grid N
    };
    std::vector<cell_pairs> cache(cfg.delta_grid.size());
    auto ensure = [&](std::size_t c) {
        auto& cell = cache[c];
        if (cell.done) {
            return;
        }
        cell.distance.assign(cfg.pair_budget, 0.0);
        cell.suffix_max.assign(cfg.pair_budget, std::vector<double>(grid_n.size(), 0.0));
        parallel_for(cfg.pair_budget, [&](std::size_t j) {
            const auto [x, y] = sample_pair_near_diagonal(eff, cfg.delta_grid[c], detail::pair_seed(cfg.seed, c, j));
            const auto trace = orbit_distance_trace(sys, x, y, horizon);
            cell.distance[j] = trace[0];
            const auto prefix = prefix_sums(trace);
            std::vector<double> m(lengths.size());
            for (std::size_t k = 0; k < lengths.size(); ++k) {
                m[k] = window_averages(prefix, lengths[k]).max_average;
            }
            for (std::size_t g = 0; g < grid_n.size(); ++g) {
                double w = 0.0;
                for (std::size_t k = 0; k < lengths.size(); ++k) {
                    if (lengths[k] >= grid_n[g]) {
                        w = std::max(w, m[k]);
                    }
                }
                cell.suffix_max[j][g] = w;
            }
        });
        cell.done = true;
    };

    uniform_window_report rep;
    rep.system_id = entry.id;
    rep.horizon = horizon;
    rep.pair_budget = cfg.pair_budget;
    rep.passed = true;
    for (double eps : ucfg.eps) {
        uniform_window_entry ue;
        ue.eps = eps;
        std::size_t start = 0;
        for (const auto& r : mean_verdict.scan.per_eps) {
            if (r.eps == eps && r.found_delta) {
                start = static_cast<std::size_t>(std::find(cfg.delta_grid.begin(), cfg.delta_grid.end(), *r.found_delta)
                                                 - cfg.delta_grid.begin());
            }
        }
        for (std::size_t c = start; c < cfg.delta_grid.size() && c <= start + ucfg.max_steps && !ue.n; ++c) {
            if (!(cfg.delta_grid[c] > sys.resolution())) {
                break;
            }
            const double delta = cfg.delta_grid[c];
            std::vector<double> w(grid_n.size(), 0.0);
            std::size_t pooled = 0;
            ensure(c);
            for (std::size_t cc = 0; cc < cache.size(); ++cc) {
                if (!cache[cc].done) {
                    continue;
                }
                for (std::size_t j = 0; j < cache[cc].distance.size(); ++j) {
                    if (cache[cc].distance[j] < delta) {
                        ++pooled;
                        for (std::size_t g = 0; g < grid_n.size(); ++g) {
                            w[g] = std::max(w[g], cache[cc].suffix_max[j][g]);
                        }
                    }
                }
            }
            for (std::size_t g = 0; g < grid_n.size(); ++g) {
                if (w[g] < eps) {
                    ue.delta = delta;
                    ue.n = grid_n[g];
                    ue.bound = w[g];
                    ue.pairs = pooled;
                    for (std::size_t h = 0; h < grid_n.size(); ++h) {
                        ue.bound_curve.push_back({static_cast<double>(grid_n[h]), w[h]});
                    }
                    break;
                }
            }
        }
        rep.passed = rep.passed && ue.n.has_value();
        rep.per_eps.push_back(std::move(ue));
    }
    return rep;
}

/**
 * Product closure: the product's mean_eq outcome must be Certified iff both factors are, and
 * Refuted iff either factor is.
 */
inline cross_check_report check_product_closure(const entry_ptr& a, const entry_ptr& b, const scan_config& cfg)
{
    const auto prod = make_product_entry(a, b);
    const auto va = scan_modulus(*a, property_kind::mean_eq, cfg);
    const auto vb = scan_modulus(*b, property_kind::mean_eq, cfg);
    const auto vp = scan_modulus(*prod, property_kind::mean_eq, cfg);
    cross_check_report r;
    r.name = "product_closure";
    r.system_id = prod->id;
    r.outcomes = {{a->id, to_string(va.outcome)}, {b->id, to_string(vb.outcome)}, {prod->id, to_string(vp.outcome)}};
    const bool any_inconclusive = va.outcome == verdict_outcome::inconclusive || vb.outcome == verdict_outcome::inconclusive
                               || vp.outcome == verdict_outcome::inconclusive;
    if (any_inconclusive) {
        r.status = cross_status::inconclusive;
    } else {
        const bool both_certified = va.outcome == verdict_outcome::certified_at_scale && vb.outcome == verdict_outcome::certified_at_scale;
        const bool expected_certified = both_certified;
        const bool product_certified = vp.outcome == verdict_outcome::certified_at_scale;
        r.status = expected_certified == product_certified ? cross_status::consistent : cross_status::contradiction;
    }
    r.details = {{"product", to_json(vp)}};
    return r;
}

/// Every transitive system certified mean equicontinuous must look uniquely ergodic.
inline cross_check_report check_mean_eq_unique_ergodicity(const catalog_entry& entry, const system_verdict& mean_verdict,
                                                          const unique_ergodicity_report& ue)
{
    cross_check_report r;
    r.name = "mean_eq_transitive_implies_ue";
    r.system_id = entry.id;
    r.outcomes = {{"mean_eq", to_string(mean_verdict.outcome)}, {"unique_ergodicity", to_string(ue.outcome)}};
    if (!entry.flags.transitive || mean_verdict.outcome != verdict_outcome::certified_at_scale) {
        r.status = cross_status::not_applicable;
    } else if (ue.outcome == ue_outcome::consistent_with_ue) {
        r.status = cross_status::consistent;
    } else if (ue.outcome == ue_outcome::refuted_ue) {
        r.status = cross_status::contradiction;
    } else {
        r.status = cross_status::inconclusive;
    }
    return r;
}

struct ue_config
{
    std::size_t horizon = 100000;
    std::size_t sample_points = 8;
    std::uint64_t seed = 1;
    ue_tolerances tol;
};

/// Unique-ergodicity probe on an entry: its example-pair points plus sampled points.
inline unique_ergodicity_report run_unique_ergodicity(const catalog_entry& entry, const ue_config& cfg)
{
    const auto& eff = effective_entry(entry, cfg.horizon);
    const auto& sys = *eff.system;
    std::vector<point> pts;
    for (const auto& ex : eff.example_pairs) {
        pts.push_back(ex.x);
        pts.push_back(ex.y);
    }
    rng_t rng(mix_seed(cfg.seed, 0x0e));
    for (std::size_t k = 0; k < cfg.sample_points; ++k) {
        pts.push_back(sys.sample_point(rng));
    }
    const auto schedule = geometric_schedule(cfg.horizon);
    return unique_ergodicity_check(sys, eff.observables, pts, schedule, cfg.tol);
}

struct averaged_equicontinuity_report
{
    std::string system_id;
    std::string f_id;
    double eps = 0.0;
    std::size_t horizon = 0;
    std::optional<double> found_delta;
    /// (δ, max over pooled pairs of sup_n |f_n(x) - f_n(y)|)
    curve modulus;
    bool uniform = false;
    std::optional<std::pair<point, point>> witness;
    double witness_value = 0.0;
};

inline nlohmann::json to_json(const averaged_equicontinuity_report& r)
{
    nlohmann::json j{{"system", r.system_id}, {"f", r.f_id},          {"eps", r.eps},
                     {"horizon", r.horizon},  {"uniform", r.uniform}, {"modulus", curve_json(r.modulus)},
                     {"found_delta", r.found_delta ? nlohmann::json(*r.found_delta) : nlohmann::json(nullptr)}};
    if (r.witness) {
        j["witness"] = {{"x", describe(r.witness->first)}, {"y", describe(r.witness->second)}, {"value", r.witness_value}};
    }
    return j;
}

/**
 * Equicontinuity modulus of the averages f_n, uniformly over n ≤ horizon: the largest grid δ with
 * sup_n |f_n(x) - f_n(y)| < ε for every sampled pair with d(x,y) < δ.
 */
inline averaged_equicontinuity_report averaged_function_equicontinuity(const catalog_entry& entry, const observable& f,
                                                                       double eps, std::size_t horizon, const scan_config& cfg)
{
    validate(cfg);
    if (!(eps > 0.0) || horizon == 0) {
        throw std::invalid_argument("averaged_function_equicontinuity: eps > 0 and horizon ≥ 1 required");
    }
    const auto& sys = *entry.system;
    struct sample
    {
        double distance = 0.0;
        double value = 0.0;
        std::size_t cell = 0;
        std::uint64_t seed = 0;
    };
    std::vector<std::size_t> cells;
    for (std::size_t c = 0; c < cfg.delta_grid.size(); ++c) {
        if (cfg.delta_grid[c] > sys.resolution()) {
            cells.push_back(c);
        }
    }
    std::vector<sample> samples(cells.size() * cfg.pair_budget);
    parallel_for(samples.size(), [&](std::size_t k) {
        const std::size_t c = cells[k / cfg.pair_budget];
        auto& s = samples[k];
        s.cell = c;
        s.seed = detail::pair_seed(cfg.seed, c, k % cfg.pair_budget);
        const auto [x, y] = sample_pair_near_diagonal(entry, cfg.delta_grid[c], s.seed);
        s.distance = sys.distance(x, y);
        const auto fx = observable_trace(sys, f, x, horizon);
        const auto fy = observable_trace(sys, f, y, horizon);
        compensated_sum sx, sy;
        for (std::size_t i = 0; i < horizon; ++i) {
            sx += fx[i];
            sy += fy[i];
            s.value = std::max(s.value, std::abs(sx.value() - sy.value()) / static_cast<double>(i + 1));
        }
    });
    averaged_equicontinuity_report r;
    r.system_id = entry.id;
    r.f_id = f.id;
    r.eps = eps;
    r.horizon = horizon;
    for (std::size_t c : cells) {
        const double delta = cfg.delta_grid[c];
        double worst = 0.0;
        for (const auto& s : samples) {
            if (s.distance < delta) {
                worst = std::max(worst, s.value);
            }
        }
        r.modulus.push_back({delta, worst});
        if (!r.found_delta && worst < eps) {
            r.found_delta = delta;
        }
    }
    r.uniform = r.found_delta.has_value();
    if (!r.uniform && !samples.empty()) {
        const sample* best = nullptr;
        const double finest = cfg.delta_grid[cells.back()];
        for (const auto& s : samples) {
            if (s.distance < finest && (!best || s.value > best->value)) {
                best = &s;
            }
        }
        if (best) {
            r.witness = sample_pair_near_diagonal(entry, cfg.delta_grid[best->cell], best->seed);
            r.witness_value = best->value;
        }
    }
    return r;
}

} // namespace meq

#endif
