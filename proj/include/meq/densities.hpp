#ifndef MEQ_DENSITIES_HPP
#define MEQ_DENSITIES_HPP

#include <meq/numeric.hpp>
#include <meq/trace.hpp>

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace meq {

/// #(F ∩ [m, n]) / (n - m + 1).
inline double window_fraction(const index_trace& trace, std::size_t m, std::size_t n)
{
    if (m > n || n >= trace.size()) {
        throw std::out_of_range("window_fraction: window [" + std::to_string(m) + ", " + std::to_string(n)
                                + "] outside trace of length " + std::to_string(trace.size()));
    }
    std::size_t hits = 0;
    for (std::size_t i = m; i <= n; ++i) {
        hits += trace[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(n - m + 1);
}

/// A point of a density curve: x is a prefix length or window length.
struct curve_point
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const curve_point&, const curve_point&) = default;
};

using curve = std::vector<curve_point>;

struct density_interval
{
    double lower = 0.0;
    double upper = 0.0;
    /// Prefix average #(F ∩ [0,n-1])/n at each scheduled n.
    curve partials;
};

/**
 * liminf / limsup estimator for the ordinary density: min and max of the prefix averages over the
 * final half of the schedule.
 */
inline density_interval density_estimate(const index_trace& trace, std::span<const std::size_t> schedule)
{
    require_increasing(schedule, "density_estimate");
    if (schedule.front() == 0 || schedule.back() > trace.size()) {
        throw std::invalid_argument("density_estimate: schedule must lie in [1, N]");
    }
    density_interval out;
    std::size_t hits = 0;
    std::size_t i = 0;
    for (std::size_t n : schedule) {
        for (; i < n; ++i) {
            hits += trace[i] ? 1 : 0;
        }
        out.partials.push_back({static_cast<double>(n), static_cast<double>(hits) / static_cast<double>(n)});
    }
    out.lower = std::numeric_limits<double>::infinity();
    out.upper = -std::numeric_limits<double>::infinity();
    for (std::size_t k = tail_half_begin(out.partials.size()); k < out.partials.size(); ++k) {
        out.lower = std::min(out.lower, out.partials[k].y);
        out.upper = std::max(out.upper, out.partials[k].y);
    }
    return out;
}

inline density_interval density_estimate(const index_trace& trace)
{
    const auto schedule = geometric_schedule(trace.size());
    return density_estimate(trace, schedule);
}

/// Extremal window averages for one window length.
struct window_extremes
{
    std::size_t length = 0;
    double min_fraction = 0.0;
    double max_fraction = 0.0;
    std::size_t argmin = 0; ///< start of a minimizing window
    std::size_t argmax = 0; ///< start of a maximizing window
};

/// Sliding pass over all windows [j, j+L) ⊂ [0, N); ties resolve to the earliest start.
inline window_extremes sliding_window_extremes(const index_trace& trace, std::size_t length)
{
    if (length == 0 || length > trace.size()) {
        throw std::invalid_argument("sliding_window_extremes: window length must lie in [1, N]");
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < length; ++i) {
        count += trace[i] ? 1 : 0;
    }
    std::size_t lo = count, hi = count, arg_lo = 0, arg_hi = 0;
    for (std::size_t j = 1; j + length <= trace.size(); ++j) {
        count += trace[j + length - 1] ? 1 : 0;
        count -= trace[j - 1] ? 1 : 0;
        if (count < lo) {
            lo = count;
            arg_lo = j;
        }
        if (count > hi) {
            hi = count;
            arg_hi = j;
        }
    }
    const double l = static_cast<double>(length);
    return {length, static_cast<double>(lo) / l, static_cast<double>(hi) / l, arg_lo, arg_hi};
}

struct banach_interval
{
    double lower = 0.0;
    double upper = 0.0;
    std::vector<window_extremes> per_length;
};

/**
 * Banach density estimate: for each window length L the extremal window averages, with the
 * values at the largest L as the point estimates.
 */
inline banach_interval banach_density_estimate(const index_trace& trace, std::span<const std::size_t> window_lengths)
{
    require_increasing(window_lengths, "banach_density_estimate");
    if (window_lengths.front() == 0 || window_lengths.back() > trace.size()) {
        throw std::invalid_argument("banach_density_estimate: window lengths must lie in [1, N]");
    }
    banach_interval out;
    out.per_length.resize(window_lengths.size());
    parallel_for(window_lengths.size(), [&](std::size_t k) { out.per_length[k] = sliding_window_extremes(trace, window_lengths[k]); });
    out.lower = out.per_length.back().min_fraction;
    out.upper = out.per_length.back().max_fraction;
    return out;
}

/// Default Banach window schedule: L = 2^j up to N/4.
inline std::vector<std::size_t> default_window_lengths(std::size_t horizon)
{
    return dyadic_lengths(std::max<std::size_t>(1, horizon / 4));
}

inline banach_interval banach_density_estimate(const index_trace& trace)
{
    const auto lengths = default_window_lengths(trace.size());
    return banach_density_estimate(trace, lengths);
}

/**
 * All four density statistics of a truncated index set.
 *
 * Prefixes [0, n-1] are themselves windows, so the Banach extremes range over both the scheduled
 * prefix windows and the length-L sliding windows. This keeps
 * lower_banach ≤ lower_density ≤ upper_density ≤ upper_banach exact at finite horizon.
 */
struct density_estimate_report
{
    double lower_density = 0.0;
    double upper_density = 0.0;
    double lower_banach = 0.0;
    double upper_banach = 0.0;
    std::size_t horizon = 0;
    std::vector<std::size_t> window_schedule;
    std::vector<window_extremes> partials;
    curve prefix_partials;
};

inline density_estimate_report estimate_densities(const index_trace& trace, std::span<const std::size_t> prefix_schedule,
                                                  std::span<const std::size_t> window_lengths)
{
    const auto dens = density_estimate(trace, prefix_schedule);
    const auto ban = banach_density_estimate(trace, window_lengths);
    density_estimate_report r;
    r.lower_density = dens.lower;
    r.upper_density = dens.upper;
    r.lower_banach = std::min(ban.lower, dens.lower);
    r.upper_banach = std::max(ban.upper, dens.upper);
    r.horizon = trace.size();
    r.window_schedule.assign(window_lengths.begin(), window_lengths.end());
    r.partials = ban.per_length;
    r.prefix_partials = dens.partials;
    return r;
}

inline density_estimate_report estimate_densities(const index_trace& trace)
{
    const auto schedule = geometric_schedule(trace.size());
    const auto lengths = default_window_lengths(trace.size());
    return estimate_densities(trace, schedule, lengths);
}

} // namespace meq

#endif
