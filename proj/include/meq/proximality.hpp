#ifndef MEQ_PROXIMALITY_HPP
#define MEQ_PROXIMALITY_HPP

#include <meq/densities.hpp>
#include <meq/numeric.hpp>
#include <meq/state_space.hpp>
#include <meq/trace.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace meq {

enum class relation { proximal, banach_proximal, regionally_proximal, mean_sensitive };

inline const char* to_string(relation r)
{
    switch (r) {
    case relation::proximal: return "P";
    case relation::banach_proximal: return "BP";
    case relation::regionally_proximal: return "Q";
    case relation::mean_sensitive: return "Q_me";
    }
    return "unknown";
}

enum class pair_outcome { holds, fails, inconclusive };

inline const char* to_string(pair_outcome o)
{
    switch (o) {
    case pair_outcome::holds: return "Holds";
    case pair_outcome::fails: return "Fails";
    case pair_outcome::inconclusive: return "Inconclusive";
    }
    return "unknown";
}

struct window_witness
{
    std::size_t length = 0;
    std::size_t start = 0;
    double fraction = 0.0;
};

/// Evidence for one ε. `time` is the achieving n (P, Q) or the averaging length (Q_me).
struct relation_witness
{
    double eps = 0.0;
    bool found = false;
    std::size_t time = 0;
    std::optional<point> x_aux;
    std::optional<point> y_aux;
    /// Distance reached (P, Q), exceptional upper Banach estimate (BP), or visit frequency (Q_me).
    double achieved = 0.0;
    std::size_t candidates_tried = 0;
    std::vector<window_witness> windows;
};

struct search_budget
{
    std::size_t candidates = 256;
    std::size_t max_time = 4096;
};

/// Analytic statement that a search cannot succeed, independent of the budget.
struct impossibility_certificate
{
    std::string kind;
    std::string statement;
    std::vector<double> eps;
};

struct pair_verdict
{
    relation rel = relation::proximal;
    point x;
    point y;
    pair_outcome outcome = pair_outcome::inconclusive;
    std::vector<relation_witness> witnesses;
    nlohmann::json parameters;
    std::optional<impossibility_certificate> certificate;
};

inline nlohmann::json to_json(const pair_verdict& v)
{
    nlohmann::json ws = nlohmann::json::array();
    for (const auto& w : v.witnesses) {
        nlohmann::json j{{"eps", w.eps}, {"found", w.found}, {"time", w.time}, {"achieved", w.achieved},
                         {"candidates_tried", w.candidates_tried}};
        if (w.x_aux) {
            j["x_aux"] = describe(*w.x_aux);
        }
        if (w.y_aux) {
            j["y_aux"] = describe(*w.y_aux);
        }
        if (!w.windows.empty()) {
            nlohmann::json wins = nlohmann::json::array();
            for (const auto& b : w.windows) {
                wins.push_back({{"length", b.length}, {"start", b.start}, {"fraction", b.fraction}});
            }
            j["windows"] = wins;
        }
        ws.push_back(std::move(j));
    }
    nlohmann::json out{{"relation", to_string(v.rel)},
                       {"x", describe(v.x)},
                       {"y", describe(v.y)},
                       {"outcome", to_string(v.outcome)},
                       {"witnesses", ws},
                       {"parameters", v.parameters}};
    if (v.certificate) {
        out["certificate"] = {{"kind", v.certificate->kind}, {"statement", v.certificate->statement}, {"eps", v.certificate->eps}};
    } else {
        out["certificate"] = nullptr;
    }
    return out;
}

namespace detail {

inline void require_eps_list(std::span<const double> eps, const char* what)
{
    if (eps.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty eps list");
    }
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0.0) || (k > 0 && !(eps[k] < eps[k - 1]))) {
            throw std::invalid_argument(std::string(what) + ": eps list must be positive and strictly decreasing");
        }
    }
}

inline bool same_point(const dynamical_system& sys, const point& x, const point& y)
{
    return sys.distance(x, y) == 0.0 && fingerprint(x) == fingerprint(y);
}

/// Orders a pair canonically so randomized searches are symmetric under swap.
inline bool needs_swap(const point& x, const point& y)
{
    return fingerprint(y) < fingerprint(x);
}

inline void swap_witnesses(pair_verdict& v)
{
    std::swap(v.x, v.y);
    for (auto& w : v.witnesses) {
        std::swap(w.x_aux, w.y_aux);
    }
}

} // namespace detail

/// Default ε schedule {2^-2, ..., 2^-10}.
inline std::vector<double> default_relation_eps()
{
    std::vector<double> out;
    for (int k = 2; k <= 10; ++k) {
        out.push_back(std::ldexp(1.0, -k));
    }
    return out;
}

/**
 * P: for every ε some n in [1, horizon] has d(T^n x, T^n y) < ε. The witness is the first such n.
 * A finite horizon cannot refute existence, so a miss is Inconclusive with the minimum distance seen.
 */
inline pair_verdict proximal_test(const dynamical_system& sys, const point& x, const point& y, std::span<const double> eps_list,
                                  std::size_t horizon)
{
    detail::require_eps_list(eps_list, "proximal_test");
    if (horizon == 0) {
        throw std::invalid_argument("proximal_test: horizon must be at least 1");
    }
    const auto trace = orbit_distance_trace(sys, x, y, horizon + 1);
    pair_verdict v;
    v.rel = relation::proximal;
    v.x = x;
    v.y = y;
    v.parameters = {{"eps", std::vector<double>(eps_list.begin(), eps_list.end())}, {"horizon", horizon}};
    double min_d = std::numeric_limits<double>::infinity();
    std::size_t arg_min = 1;
    for (std::size_t n = 1; n <= horizon; ++n) {
        if (trace[n] < min_d) {
            min_d = trace[n];
            arg_min = n;
        }
    }
    bool all = true;
    for (double eps : eps_list) {
        relation_witness w;
        w.eps = eps;
        for (std::size_t n = 1; n <= horizon; ++n) {
            if (trace[n] < eps) {
                w.found = true;
                w.time = n;
                w.achieved = trace[n];
                break;
            }
        }
        if (!w.found) {
            w.time = arg_min;
            w.achieved = min_d;
        }
        all = all && w.found;
        v.witnesses.push_back(std::move(w));
    }
    v.outcome = all ? pair_outcome::holds : pair_outcome::inconclusive;
    return v;
}

struct banach_proximal_params
{
    double holds_tolerance = 0.01;
    double fails_threshold = 0.1;
};

/**
 * BP: the exceptional times {i : d(T^i x, T^i y) ≥ ε} have Banach density zero.
 * Holds when every upper Banach estimate is within tolerance; Fails when for some ε every window
 * length carries an explicit window with exceptional fraction ≥ the threshold.
 */
inline pair_verdict banach_proximal_test(const dynamical_system& sys, const point& x, const point& y,
                                         std::span<const double> eps_list, std::size_t horizon,
                                         std::span<const std::size_t> window_lengths, banach_proximal_params params = {})
{
    detail::require_eps_list(eps_list, "banach_proximal_test");
    const auto trace = orbit_distance_trace(sys, x, y, horizon);
    pair_verdict v;
    v.rel = relation::banach_proximal;
    v.x = x;
    v.y = y;
    v.parameters = {{"eps", std::vector<double>(eps_list.begin(), eps_list.end())},
                    {"horizon", horizon},
                    {"window_lengths", std::vector<std::size_t>(window_lengths.begin(), window_lengths.end())},
                    {"holds_tolerance", params.holds_tolerance},
                    {"fails_threshold", params.fails_threshold}};
    bool all_small = true;
    bool any_bad = false;
    for (double eps : eps_list) {
        const auto exceptional = index_trace::from_predicate(trace.size(), [&](std::size_t i) { return trace[i] >= eps; });
        const auto ban = banach_density_estimate(exceptional, window_lengths);
        relation_witness w;
        w.eps = eps;
        w.achieved = ban.upper;
        w.found = ban.upper <= params.holds_tolerance;
        bool bad_family = true;
        for (const auto& ext : ban.per_length) {
            bad_family = bad_family && ext.max_fraction >= params.fails_threshold;
        }
        if (bad_family) {
            for (const auto& ext : ban.per_length) {
                w.windows.push_back({ext.length, ext.argmax, ext.max_fraction});
            }
        }
        all_small = all_small && w.found;
        any_bad = any_bad || bad_family;
        v.witnesses.push_back(std::move(w));
    }
    v.outcome = all_small ? pair_outcome::holds : (any_bad ? pair_outcome::fails : pair_outcome::inconclusive);
    return v;
}

inline pair_verdict banach_proximal_test(const dynamical_system& sys, const point& x, const point& y,
                                         std::span<const double> eps_list, std::size_t horizon)
{
    const auto lengths = default_window_lengths(horizon);
    return banach_proximal_test(sys, x, y, eps_list, horizon, lengths);
}

namespace detail {

/// First n in [1, max_time] with d(T^n a, T^n b) < eps, or 0.
inline std::size_t first_close_time(const dynamical_system& sys, const point& a, const point& b, double eps, std::size_t max_time,
                                    double* dist)
{
    const auto trace = orbit_distance_trace(sys, a, b, max_time + 1);
    for (std::size_t n = 1; n <= max_time; ++n) {
        if (trace[n] < eps) {
            *dist = trace[n];
            return n;
        }
    }
    return 0;
}

inline pair_verdict regionally_proximal_canonical(const dynamical_system& sys, const point& x, const point& y, double eps,
                                                  search_budget budget, std::uint64_t seed)
{
    pair_verdict v;
    v.rel = relation::regionally_proximal;
    v.x = x;
    v.y = y;
    v.parameters = {{"eps", eps}, {"candidates", budget.candidates}, {"max_time", budget.max_time}, {"seed", seed}};
    relation_witness w;
    w.eps = eps;
    w.achieved = std::numeric_limits<double>::infinity();

    auto accept = [&](const point& xa, const point& ya) {
        if (!(sys.distance(x, xa) < eps && sys.distance(y, ya) < eps)) {
            return false;
        }
        double d = 0.0;
        const std::size_t n = first_close_time(sys, xa, ya, eps, budget.max_time, &d);
        ++w.candidates_tried;
        if (n == 0) {
            return false;
        }
        w.found = true;
        w.time = n;
        w.achieved = d;
        w.x_aux = xa;
        w.y_aux = ya;
        return true;
    };

    bool done = accept(x, y);
    if (!done && sys.caps().can_splice) {
        // shared tail: T^k x' = T^k y'
        rng_t rng(mix_seed(seed, 0x7a11));
        const point tail = sys.sample_point(rng);
        for (std::size_t k = 1; k <= 64 && k <= budget.max_time && !done; ++k) {
            const point xa = sys.splice(x, k, tail);
            const point ya = sys.splice(y, k, tail);
            if (sys.distance(x, xa) < eps && sys.distance(y, ya) < eps) {
                done = accept(xa, ya);
            }
        }
    }
    if (!done && sys.caps().can_sample_near) {
        for (std::size_t c = 0; c < budget.candidates && !done; ++c) {
            rng_t rng(mix_seed(seed, c, 0x9e0));
            const point xa = sys.sample_near(x, eps, rng);
            const point ya = sys.sample_near(y, eps, rng);
            done = accept(xa, ya);
        }
    }
    v.outcome = w.found ? pair_outcome::holds : pair_outcome::inconclusive;
    v.witnesses.push_back(std::move(w));
    return v;
}

} // namespace detail

/**
 * Q: search x' ∈ B(x,ε), y' ∈ B(y,ε) and n in [1, max_time] with d(T^n x', T^n y') < ε.
 * Candidates: the pair itself, shared-tail splices when the space allows them, then random
 * near-samples. For isometries with d(x,y) > 3ε an impossibility certificate is attached.
 */
inline pair_verdict regionally_proximal_test(const dynamical_system& sys, const point& x, const point& y, double eps,
                                             search_budget budget = {}, std::uint64_t seed = 1)
{
    if (!(eps > 0.0)) {
        throw std::invalid_argument("regionally_proximal_test: eps must be positive");
    }
    if (!sys.caps().can_sample_near) {
        throw std::logic_error("regionally_proximal_test: system '" + sys.id() + "' cannot sample near points");
    }
    require_member(sys, x, "regionally_proximal_test");
    require_member(sys, y, "regionally_proximal_test");
    const bool swap = detail::needs_swap(x, y);
    auto v = swap ? detail::regionally_proximal_canonical(sys, y, x, eps, budget, seed)
                  : detail::regionally_proximal_canonical(sys, x, y, eps, budget, seed);
    if (swap) {
        detail::swap_witnesses(v);
    }
    const double d = sys.distance(x, y);
    if (sys.is_isometry() && d > 3.0 * eps) {
        v.certificate = impossibility_certificate{
            "isometry", "d(T^n x', T^n y') = d(x', y') ≥ d(x,y) - 2ε > ε for all n", {eps}};
    }
    return v;
}

/// Q over an ε list: Holds iff every ε holds; witnesses and certificates are concatenated.
inline pair_verdict regionally_proximal_test(const dynamical_system& sys, const point& x, const point& y,
                                             std::span<const double> eps_list, search_budget budget = {}, std::uint64_t seed = 1)
{
    detail::require_eps_list(eps_list, "regionally_proximal_test");
    pair_verdict v;
    v.rel = relation::regionally_proximal;
    v.x = x;
    v.y = y;
    v.parameters = {{"eps", std::vector<double>(eps_list.begin(), eps_list.end())},
                    {"candidates", budget.candidates},
                    {"max_time", budget.max_time},
                    {"seed", seed}};
    bool all = true;
    for (double eps : eps_list) {
        auto one = regionally_proximal_test(sys, x, y, eps, budget, seed);
        all = all && one.outcome == pair_outcome::holds;
        v.witnesses.push_back(std::move(one.witnesses.front()));
        if (one.certificate) {
            if (!v.certificate) {
                v.certificate = one.certificate;
                v.certificate->eps.clear();
            }
            v.certificate->eps.push_back(eps);
        }
    }
    v.outcome = all ? pair_outcome::holds : pair_outcome::inconclusive;
    return v;
}

namespace detail {

/// Best visit frequency (1/n)#{i<n : d(T^i x', x) < τ, d(T^i y', y) < τ} over n ≤ max_time.
inline std::pair<double, std::size_t> best_visit_frequency(const dynamical_system& sys, const point& x, const point& y,
                                                           const point& xa, const point& ya, double tau, std::size_t max_time)
{
    point a = xa;
    point b = ya;
    std::size_t hits = 0;
    double best = 0.0;
    std::size_t best_n = 1;
    for (std::size_t i = 0; i < max_time; ++i) {
        if (sys.distance(a, x) < tau && sys.distance(b, y) < tau) {
            ++hits;
        }
        const double f = static_cast<double>(hits) / static_cast<double>(i + 1);
        if (f > best) {
            best = f;
            best_n = i + 1;
        }
        if (i + 1 < max_time) {
            a = sys.step(a);
            b = sys.step(b);
        }
    }
    return {best, best_n};
}

inline bool lex_less_prefix(const symbolic_point& a, const symbolic_point& b, std::size_t k)
{
    for (std::size_t i = 0; i < k; ++i) {
        if (a[i] != b[i]) {
            return a[i] < b[i];
        }
    }
    return false;
}

inline pair_verdict mean_sensitive_canonical(const dynamical_system& sys, const point& x, const point& y, double tau, double c,
                                             std::span<const double> eps_schedule, search_budget budget, std::uint64_t seed)
{
    pair_verdict v;
    v.rel = relation::mean_sensitive;
    v.x = x;
    v.y = y;
    v.parameters = {{"tau", tau},
                    {"c", c},
                    {"eps", std::vector<double>(eps_schedule.begin(), eps_schedule.end())},
                    {"candidates", budget.candidates},
                    {"max_time", budget.max_time},
                    {"seed", seed}};
    if (same_point(sys, x, y)) {
        for (double eps : eps_schedule) {
            relation_witness w;
            w.eps = eps;
            w.found = true;
            w.time = 1;
            w.achieved = 1.0;
            w.x_aux = x;
            w.y_aux = y;
            v.witnesses.push_back(std::move(w));
        }
        v.outcome = pair_outcome::holds;
        v.parameters["diagonal"] = true;
        return v;
    }
    const bool symbolic_splice = sys.caps().can_splice && x.holds<symbolic_point>() && y.holds<symbolic_point>();
    bool all = true;
    for (std::size_t e = 0; e < eps_schedule.size(); ++e) {
        const double eps = eps_schedule[e];
        relation_witness w;
        w.eps = eps;
        auto consider = [&](const point& xa, const point& ya) {
            if (!(sys.distance(xa, ya) < eps)) {
                return false;
            }
            ++w.candidates_tried;
            const auto [freq, n] = best_visit_frequency(sys, x, y, xa, ya, tau, budget.max_time);
            if (freq > w.achieved || !w.x_aux) {
                w.achieved = freq;
                w.time = n;
                w.x_aux = xa;
                w.y_aux = ya;
            }
            w.found = freq > c;
            return w.found;
        };
        bool done = false;
        if (symbolic_splice) {
            // x' = w·x, y' = w·y with w the lexicographically smaller of the two K-prefixes
            const auto& xs = x.as<symbolic_point>();
            const auto& ys = y.as<symbolic_point>();
            for (std::size_t k = 1; k <= 64 && !done; ++k) {
                const point& head = lex_less_prefix(ys, xs, k) ? y : x;
                const point xa = sys.splice(head, k, x);
                const point ya = sys.splice(head, k, y);
                if (sys.distance(xa, ya) < eps) {
                    done = consider(xa, ya);
                    break;
                }
            }
        }
        if (!done && sys.caps().can_sample_near) {
            for (std::size_t k = 0; k < budget.candidates && !done; ++k) {
                rng_t rng(mix_seed(seed, e, k));
                const point& base = (k % 2 == 0) ? x : y;
                const point xa = sys.sample_near(base, tau, rng);
                const point ya = sys.sample_near(xa, eps, rng);
                done = (k % 2 == 0) ? consider(xa, ya) : consider(ya, xa);
            }
        }
        all = all && w.found;
        v.witnesses.push_back(std::move(w));
    }
    v.outcome = all ? pair_outcome::holds : pair_outcome::inconclusive;
    return v;
}

} // namespace detail

/**
 * Q_me at fixed (τ, c): for every ε in the schedule, search x', y' with d(x',y') < ε whose orbits
 * visit the τ-balls around x and y simultaneously with frequency > c for some n ≤ max_time.
 * Never Fails; for isometries an impossibility certificate covers every ε < d(x,y) - 2τ.
 */
inline pair_verdict mean_sensitive_pair_test(const dynamical_system& sys, const point& x, const point& y, double tau, double c,
                                             std::span<const double> eps_schedule, search_budget budget = {},
                                             std::uint64_t seed = 1)
{
    if (!(tau > 0.0)) {
        throw std::invalid_argument("mean_sensitive_pair_test: tau must be positive");
    }
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("mean_sensitive_pair_test: c must lie in (0, 1)");
    }
    detail::require_eps_list(eps_schedule, "mean_sensitive_pair_test");
    require_member(sys, x, "mean_sensitive_pair_test");
    require_member(sys, y, "mean_sensitive_pair_test");
    const bool swap = detail::needs_swap(x, y);
    auto v = swap ? detail::mean_sensitive_canonical(sys, y, x, tau, c, eps_schedule, budget, seed)
                  : detail::mean_sensitive_canonical(sys, x, y, tau, c, eps_schedule, budget, seed);
    if (swap) {
        detail::swap_witnesses(v);
    }
    if (sys.is_isometry()) {
        const double d = sys.distance(x, y);
        std::vector<double> covered;
        for (double eps : eps_schedule) {
            if (eps < d - 2.0 * tau) {
                covered.push_back(eps);
            }
        }
        if (!covered.empty()) {
            v.certificate = impossibility_certificate{
                "isometry", "d(x,y) ≤ d(T^i x', x) + d(T^i x', T^i y') + d(T^i y', y) < 2τ + ε, so no visit is possible", covered};
        }
    }
    return v;
}

struct mean_sensitive_scan
{
    std::vector<double> taus;
    std::vector<double> eps; ///< the ε schedule actually used
    std::vector<double> c_grid;
    /// Per τ: the largest c in the grid that held, if any.
    std::vector<std::optional<double>> best_c;
    std::vector<pair_verdict> verdicts; ///< the deciding verdict per τ
    pair_outcome outcome = pair_outcome::inconclusive;
};

inline std::vector<double> default_tau_grid(const dynamical_system& sys)
{
    return {sys.diameter_bound() / 8.0, sys.diameter_bound() / 16.0};
}

/**
 * Q_me over a τ grid, taking for each τ the largest c in the grid that holds for every ε.
 * With τ ≥ d(x,y)/2 and ε ≥ d(x,y)/2 the visit condition can already hold at n = 1, so for an
 * off-diagonal pair the grids are extended with τ = ε = d(x,y)/4 when those are finer.
 */
inline mean_sensitive_scan mean_sensitive_pair_scan(const dynamical_system& sys, const point& x, const point& y,
                                                    std::span<const double> eps_schedule, std::vector<double> taus = {},
                                                    std::vector<double> c_grid = {0.5, 0.25, 0.125}, search_budget budget = {},
                                                    std::uint64_t seed = 1)
{
    if (taus.empty()) {
        taus = default_tau_grid(sys);
    }
    if (c_grid.empty()) {
        throw std::invalid_argument("mean_sensitive_pair_scan: empty c grid");
    }
    detail::require_eps_list(eps_schedule, "mean_sensitive_pair_scan");
    std::vector<double> eps(eps_schedule.begin(), eps_schedule.end());
    const double quarter = sys.distance(x, y) / 4.0;
    if (quarter > 0.0) {
        if (quarter < *std::min_element(taus.begin(), taus.end())) {
            taus.push_back(quarter);
        }
        if (quarter < eps.back()) {
            eps.push_back(quarter);
        }
    }
    std::sort(c_grid.begin(), c_grid.end(), std::greater<>());
    mean_sensitive_scan s;
    s.taus = taus;
    s.eps = eps;
    s.c_grid = c_grid;
    bool all = true;
    for (double tau : taus) {
        std::optional<double> best;
        std::optional<pair_verdict> last;
        for (double c : c_grid) {
            auto v = mean_sensitive_pair_test(sys, x, y, tau, c, eps, budget, seed);
            const bool ok = v.outcome == pair_outcome::holds;
            last = std::move(v);
            if (ok) {
                best = c;
                break;
            }
        }
        all = all && best.has_value();
        s.best_c.push_back(best);
        s.verdicts.push_back(std::move(*last));
    }
    s.outcome = all ? pair_outcome::holds : pair_outcome::inconclusive;
    return s;
}

} // namespace meq

#endif
