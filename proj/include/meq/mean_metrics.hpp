#ifndef MEQ_MEAN_METRICS_HPP
#define MEQ_MEAN_METRICS_HPP

#include <meq/densities.hpp>
#include <meq/numeric.hpp>
#include <meq/state_space.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace meq {

enum class metric_kind { prefix_at_n, besicovitch_limsup, sup_over_all_n, weyl_limsup };

inline const char* to_string(metric_kind k)
{
    switch (k) {
    case metric_kind::prefix_at_n: return "prefix_at_n";
    case metric_kind::besicovitch_limsup: return "besicovitch_limsup";
    case metric_kind::sup_over_all_n: return "sup_over_all_n";
    case metric_kind::weyl_limsup: return "weyl_limsup";
    }
    return "unknown";
}

/// Extremal averages of a real trace over windows of one length.
struct window_average_extremes
{
    std::size_t length = 0;
    double min_average = 0.0;
    double max_average = 0.0;
    std::size_t argmax = 0;
};

struct mean_metric_estimate
{
    metric_kind kind = metric_kind::prefix_at_n;
    double value = 0.0;
    std::size_t horizon = 0;
    /// (n, d̄_n) for prefix kinds, (L, max window average) for Weyl.
    curve partials;
    /// Diagnosed estimator noise: spread of the partials over the tail half (0 for exact suprema).
    double noise = 0.0;
    /// Weyl only: per-length window statistics.
    std::vector<window_average_extremes> windows;
    nlohmann::json pair;
};

inline nlohmann::json to_json(const mean_metric_estimate& e)
{
    nlohmann::json partials = nlohmann::json::array();
    for (const auto& p : e.partials) {
        partials.push_back({p.x, p.y});
    }
    return {{"kind", to_string(e.kind)},
            {"value", e.value},
            {"horizon", e.horizon},
            {"noise", e.noise},
            {"partials", partials},
            {"pair_descriptor", e.pair}};
}

// ---------------------------------------------------------------------------------------------
// Trace-level estimators. These are what the system-level functions below and the modulus
// scans run on, so one orbit pass can feed several estimators.
// ---------------------------------------------------------------------------------------------

inline double average_prefix(std::span<const double> trace, std::size_t n)
{
    if (n == 0 || n > trace.size()) {
        throw std::invalid_argument("average_prefix: n must lie in [1, N]");
    }
    compensated_sum s;
    for (std::size_t i = 0; i < n; ++i) {
        s += trace[i];
    }
    return s.value() / static_cast<double>(n);
}

inline mean_metric_estimate besicovitch_from_trace(std::span<const double> trace, std::span<const std::size_t> schedule)
{
    require_increasing(schedule, "besicovitch_estimate");
    if (schedule.front() == 0 || schedule.back() > trace.size()) {
        throw std::invalid_argument("besicovitch_estimate: schedule must lie in [1, N]");
    }
    mean_metric_estimate e;
    e.kind = metric_kind::besicovitch_limsup;
    e.horizon = schedule.back();
    compensated_sum s;
    std::size_t i = 0;
    for (std::size_t n : schedule) {
        for (; i < n; ++i) {
            s += trace[i];
        }
        e.partials.push_back({static_cast<double>(n), s.value() / static_cast<double>(n)});
    }
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = tail_half_begin(e.partials.size()); k < e.partials.size(); ++k) {
        hi = std::max(hi, e.partials[k].y);
        lo = std::min(lo, e.partials[k].y);
    }
    e.value = hi;
    e.noise = hi - lo;
    return e;
}

/// max over 1 ≤ n ≤ N of d̄_n; partials record the running maximum along a geometric schedule.
inline mean_metric_estimate sup_dbar_from_trace(std::span<const double> trace)
{
    if (trace.empty()) {
        throw std::invalid_argument("sup_dbar: empty trace");
    }
    mean_metric_estimate e;
    e.kind = metric_kind::sup_over_all_n;
    e.horizon = trace.size();
    const auto schedule = geometric_schedule(trace.size());
    std::size_t next = 0;
    compensated_sum s;
    double best = 0.0;
    for (std::size_t n = 1; n <= trace.size(); ++n) {
        s += trace[n - 1];
        best = std::max(best, s.value() / static_cast<double>(n));
        if (next < schedule.size() && schedule[next] == n) {
            e.partials.push_back({static_cast<double>(n), best});
            ++next;
        }
    }
    e.value = best;
    return e;
}

/// Window statistics for length L via extended-precision prefix sums.
inline window_average_extremes window_averages(std::span<const long double> prefix, std::size_t length)
{
    const std::size_t n = prefix.size() - 1;
    if (length == 0 || length > n) {
        throw std::invalid_argument("window_averages: window length must lie in [1, N]");
    }
    long double hi = -1.0L, lo = std::numeric_limits<long double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j + length <= n; ++j) {
        const long double w = prefix[j + length] - prefix[j];
        if (w > hi) {
            hi = w;
            arg = j;
        }
        lo = std::min(lo, w);
    }
    const long double l = static_cast<long double>(length);
    return {length, static_cast<double>(lo / l), static_cast<double>(hi / l), arg};
}

inline mean_metric_estimate weyl_from_trace(std::span<const double> trace, std::span<const std::size_t> window_lengths)
{
    require_increasing(window_lengths, "weyl_estimate");
    if (window_lengths.front() == 0 || window_lengths.back() > trace.size()) {
        throw std::invalid_argument("weyl_estimate: window lengths must lie in [1, N]");
    }
    const auto prefix = prefix_sums(trace);
    mean_metric_estimate e;
    e.kind = metric_kind::weyl_limsup;
    e.horizon = trace.size();
    for (std::size_t L : window_lengths) {
        e.windows.push_back(window_averages(prefix, L));
        e.partials.push_back({static_cast<double>(L), e.windows.back().max_average});
    }
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = tail_half_begin(e.partials.size()); k < e.partials.size(); ++k) {
        hi = std::max(hi, e.partials[k].y);
        lo = std::min(lo, e.partials[k].y);
    }
    e.value = e.partials.back().y;
    e.noise = hi - lo;
    return e;
}

/// Window lengths sampled for uniform window bounds: powers of two and their 3/2 multiples in
/// [n_min, n_max], always including both ends.
inline std::vector<std::size_t> sampled_window_lengths(std::size_t n_min, std::size_t n_max)
{
    std::vector<std::size_t> out{n_min};
    for (std::size_t p = 1; p <= n_max; p *= 2) {
        for (std::size_t v : {p, p + p / 2}) {
            if (v > n_min && v < n_max) {
                out.push_back(v);
            }
        }
        if (p > n_max / 2) {
            break;
        }
    }
    if (n_max > n_min) {
        out.push_back(n_max);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// max over sampled n ∈ [n_min, n_max] and all j with j + n ≤ N of the window average over [j, j+n).
inline double windowed_uniform_bound_from_trace(std::span<const double> trace, std::size_t n_min, std::size_t n_max)
{
    if (n_min == 0 || n_min > n_max) {
        throw std::invalid_argument("windowed_uniform_bound: need 1 ≤ N_min ≤ N");
    }
    if (n_max > trace.size()) {
        throw std::invalid_argument("windowed_uniform_bound: horizon too small");
    }
    const auto prefix = prefix_sums(trace);
    double best = 0.0;
    for (std::size_t L : sampled_window_lengths(n_min, n_max)) {
        best = std::max(best, window_averages(prefix, L).max_average);
    }
    return best;
}

// ---------------------------------------------------------------------------------------------
// System-level operations.
// ---------------------------------------------------------------------------------------------

inline nlohmann::json pair_descriptor(const point& x, const point& y)
{
    return {{"x", describe(x)}, {"y", describe(y)}};
}

/// d̄_n(x,y) = (1/n) Σ_{i<n} d(T^i x, T^i y).
inline double dbar_n(const dynamical_system& sys, const point& x, const point& y, std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("dbar_n: n must be at least 1");
    }
    const auto trace = orbit_distance_trace(sys, x, y, n);
    return average_prefix(trace, n);
}

inline mean_metric_estimate besicovitch_estimate(const dynamical_system& sys, const point& x, const point& y,
                                                 std::span<const std::size_t> schedule)
{
    require_increasing(schedule, "besicovitch_estimate");
    const auto trace = orbit_distance_trace(sys, x, y, schedule.back());
    auto e = besicovitch_from_trace(trace, schedule);
    e.pair = pair_descriptor(x, y);
    return e;
}

inline mean_metric_estimate sup_dbar(const dynamical_system& sys, const point& x, const point& y, std::size_t horizon)
{
    const auto trace = orbit_distance_trace(sys, x, y, horizon);
    auto e = sup_dbar_from_trace(trace);
    e.pair = pair_descriptor(x, y);
    return e;
}

inline mean_metric_estimate weyl_estimate(const dynamical_system& sys, const point& x, const point& y,
                                          std::span<const std::size_t> window_lengths, std::size_t horizon)
{
    require_increasing(window_lengths, "weyl_estimate");
    if (window_lengths.back() > horizon) {
        throw std::invalid_argument("weyl_estimate: window length exceeds horizon");
    }
    const auto trace = orbit_distance_trace(sys, x, y, horizon);
    auto e = weyl_from_trace(trace, window_lengths);
    e.pair = pair_descriptor(x, y);
    return e;
}

inline double windowed_uniform_bound(const dynamical_system& sys, const point& x, const point& y, std::size_t n_min,
                                     std::size_t n_max, std::size_t horizon)
{
    if (n_max > horizon) {
        throw std::invalid_argument("windowed_uniform_bound: horizon too small");
    }
    const auto trace = orbit_distance_trace(sys, x, y, horizon);
    return windowed_uniform_bound_from_trace(trace, n_min, n_max);
}

} // namespace meq

#endif
