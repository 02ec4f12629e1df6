#ifndef MEQ_ERGODIC_AVERAGES_HPP
#define MEQ_ERGODIC_AVERAGES_HPP

#include <meq/densities.hpp>
#include <meq/mean_metrics.hpp>
#include <meq/numeric.hpp>
#include <meq/state_space.hpp>
#include <meq/systems.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace meq {

/// A continuous real function on X with a declared sup-norm bound ‖f‖.
struct observable
{
    std::string id;
    std::function<double(const point&)> eval;
    double bound = 1.0;
};

inline observable constant_observable(double c)
{
    return {"const", [c](const point&) { return c; }, std::abs(c)};
}

/// cos(2π x_j) / sin(2π x_j) on a real coordinate.
inline observable trig_observable(bool cosine, std::size_t coord = 0)
{
    const std::string name = std::string(cosine ? "cos" : "sin") + "2pi_x" + std::to_string(coord);
    return {name,
            [cosine, coord](const point& p) {
                const double x = p.as<real_point>().coords.at(coord);
                return cosine ? std::cos(2.0 * std::numbers::pi * x) : std::sin(2.0 * std::numbers::pi * x);
            },
            1.0};
}

inline observable identity_observable(std::size_t coord = 0, double bound = 1.0)
{
    return {"x" + std::to_string(coord), [coord](const point& p) { return p.as<real_point>().coords.at(coord); }, bound};
}

/// First symbol; continuous because cylinders are clopen.
inline observable first_symbol_observable()
{
    return {"x_0", [](const point& p) { return static_cast<double>(p.as<symbolic_point>()[0]); }, 1.0};
}

/// Σ_{k<depth} x_k 2^{-(k+1)}: a 2^{-k}-Lipschitz prefix reading.
inline observable weighted_prefix_observable(std::size_t depth = 24)
{
    return {"weighted_prefix",
            [depth](const point& p) {
                const auto& s = p.as<symbolic_point>();
                double v = 0.0;
                double w = 0.5;
                for (std::size_t k = 0; k < depth; ++k, w *= 0.5) {
                    v += w * s[k];
                }
                return v;
            },
            1.0};
}

/// cos/sin(2π · decoded value) for binary-coded doubling points.
inline observable decoded_trig_observable(bool cosine)
{
    return {std::string(cosine ? "cos" : "sin") + "2pi_decoded",
            [cosine](const point& p) {
                const double x = binary_doubling_system::decode(p);
                return cosine ? std::cos(2.0 * std::numbers::pi * x) : std::sin(2.0 * std::numbers::pi * x);
            },
            1.0};
}

inline observable finite_id_observable(std::size_t size)
{
    const double scale = size > 1 ? 1.0 / static_cast<double>(size - 1) : 1.0;
    return {"normalized_id", [scale](const point& p) { return scale * static_cast<double>(p.as<finite_point>().id); }, 1.0};
}

/// f ∘ π_k for a product point.
inline observable component_observable(const observable& f, std::size_t k)
{
    auto inner = f.eval;
    return {"c" + std::to_string(k) + ":" + f.id, [inner, k](const point& p) { return inner(p.as<product_point>().parts.at(k)); },
            f.bound};
}

/// f(T^i x) for i < n.
inline std::vector<double> observable_trace(const dynamical_system& sys, const observable& f, const point& x, std::size_t n)
{
    require_member(sys, x, "observable_trace");
    std::vector<double> v(n);
    point p = x;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = f.eval(p);
        if (i + 1 < n) {
            p = sys.step(p);
        }
    }
    return v;
}

struct birkhoff_series
{
    std::string f_id;
    nlohmann::json base;
    std::vector<std::size_t> schedule;
    std::vector<double> values;
};

/// f_n(x) = (1/n) Σ_{i<n} f(T^i x) at each scheduled n, from one orbit pass.
inline birkhoff_series birkhoff(const dynamical_system& sys, const observable& f, const point& x,
                                std::span<const std::size_t> schedule)
{
    require_increasing(schedule, "birkhoff");
    if (schedule.front() == 0) {
        throw std::invalid_argument("birkhoff: schedule must start at n ≥ 1");
    }
    require_member(sys, x, "birkhoff");
    birkhoff_series out{f.id, describe(x), {schedule.begin(), schedule.end()}, {}};
    compensated_sum s;
    point p = x;
    std::size_t i = 0;
    for (std::size_t n : schedule) {
        for (; i < n; ++i) {
            s += f.eval(p);
            p = sys.step(p);
        }
        out.values.push_back(s.value() / static_cast<double>(n));
    }
    return out;
}

inline std::string to_csv(const birkhoff_series& series)
{
    std::ostringstream os;
    os.precision(17);
    os << "n,value\n";
    for (std::size_t k = 0; k < series.schedule.size(); ++k) {
        os << series.schedule[k] << ',' << series.values[k] << '\n';
    }
    return os.str();
}

enum class ue_outcome { consistent_with_ue, refuted_ue, inconclusive };

inline const char* to_string(ue_outcome o)
{
    switch (o) {
    case ue_outcome::consistent_with_ue: return "ConsistentWithUE";
    case ue_outcome::refuted_ue: return "RefutedUE";
    case ue_outcome::inconclusive: return "Inconclusive";
    }
    return "unknown";
}

struct ue_tolerances
{
    double tail_tolerance = 0.02;
    double refute_margin = 0.2;
};

struct ue_refutation
{
    std::string f_id;
    std::size_t point_a = 0; ///< index into the sample set
    std::size_t point_b = 0;
    std::size_t n = 0;
    double difference = 0.0;
};

struct ue_observable_curve
{
    std::string f_id;
    curve spread; ///< (n, max_x f_n(x) - min_x f_n(x))
    double tail_max = 0.0;
    double tail_min = 0.0;
};

struct unique_ergodicity_report
{
    std::vector<ue_observable_curve> curves;
    double limit_spread_estimate = 0.0; ///< largest tail-max spread over all observables
    ue_outcome outcome = ue_outcome::inconclusive;
    std::optional<ue_refutation> refutation;
    std::vector<nlohmann::json> sample_points;
};

/**
 * Uniform convergence of Birkhoff averages to a constant, probed on a finite point sample.
 * ConsistentWithUE when every observable's spread stays within tolerance over the schedule tail;
 * RefutedUE when some observable's spread stays above the margin over the whole tail.
 */
inline unique_ergodicity_report unique_ergodicity_check(const dynamical_system& sys, std::span<const observable> fs,
                                                        std::span<const point> points, std::span<const std::size_t> schedule,
                                                        ue_tolerances tol = {})
{
    if (points.size() < 2) {
        throw std::invalid_argument("unique_ergodicity_check: need at least two sample points");
    }
    if (fs.empty()) {
        throw std::invalid_argument("unique_ergodicity_check: empty observable list");
    }
    require_increasing(schedule, "unique_ergodicity_check");

    unique_ergodicity_report r;
    for (const auto& p : points) {
        r.sample_points.push_back(describe(p));
    }
    std::vector<std::vector<birkhoff_series>> series(fs.size(), std::vector<birkhoff_series>(points.size()));
    parallel_for(fs.size() * points.size(), [&](std::size_t cell) {
        const std::size_t f = cell / points.size();
        const std::size_t p = cell % points.size();
        series[f][p] = birkhoff(sys, fs[f], points[p], schedule);
    });

    bool all_within = true;
    for (std::size_t f = 0; f < fs.size(); ++f) {
        ue_observable_curve c;
        c.f_id = fs[f].id;
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            double lo = series[f][0].values[k], hi = lo;
            for (std::size_t p = 1; p < points.size(); ++p) {
                lo = std::min(lo, series[f][p].values[k]);
                hi = std::max(hi, series[f][p].values[k]);
            }
            c.spread.push_back({static_cast<double>(schedule[k]), hi - lo});
        }
        c.tail_max = 0.0;
        c.tail_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = tail_half_begin(c.spread.size()); k < c.spread.size(); ++k) {
            c.tail_max = std::max(c.tail_max, c.spread[k].y);
            c.tail_min = std::min(c.tail_min, c.spread[k].y);
        }
        r.limit_spread_estimate = std::max(r.limit_spread_estimate, c.tail_max);
        all_within = all_within && c.tail_max <= tol.tail_tolerance;
        if (c.tail_min >= tol.refute_margin && !r.refutation) {
            const std::size_t last = schedule.size() - 1;
            std::size_t a = 0, b = 0;
            for (std::size_t p = 1; p < points.size(); ++p) {
                if (series[f][p].values[last] < series[f][a].values[last]) {
                    a = p;
                }
                if (series[f][p].values[last] > series[f][b].values[last]) {
                    b = p;
                }
            }
            r.refutation = ue_refutation{fs[f].id, a, b, schedule[last], series[f][b].values[last] - series[f][a].values[last]};
        }
        r.curves.push_back(std::move(c));
    }
    if (r.refutation) {
        r.outcome = ue_outcome::refuted_ue;
    } else if (all_within) {
        r.outcome = ue_outcome::consistent_with_ue;
    }
    return r;
}

struct window_independence_report
{
    std::string f_id;
    double prefix_average = 0.0; ///< f_N(x) at the horizon
    curve deviation;             ///< (L, max_j |window average over [j,j+L) - f_N(x)|)
    double tolerance = 0.02;
    bool converges = false;      ///< deviation at the largest L within tolerance
};

/// Compares every length-L window average along the orbit with the full-horizon average.
inline window_independence_report window_average_independence(const dynamical_system& sys, const observable& f,
                                                              const point& x, std::span<const std::size_t> window_lengths,
                                                              std::size_t horizon, double tolerance = 0.02)
{
    require_increasing(window_lengths, "window_average_independence");
    if (window_lengths.back() > horizon) {
        throw std::invalid_argument("window_average_independence: window length exceeds horizon");
    }
    const auto values = observable_trace(sys, f, x, horizon);
    const auto prefix = prefix_sums(values);
    window_independence_report r;
    r.f_id = f.id;
    r.tolerance = tolerance;
    r.prefix_average = static_cast<double>(prefix.back() / static_cast<long double>(horizon));
    for (std::size_t L : window_lengths) {
        const auto w = window_averages(prefix, L);
        const double dev = std::max(std::abs(w.max_average - r.prefix_average), std::abs(w.min_average - r.prefix_average));
        r.deviation.push_back({static_cast<double>(L), dev});
    }
    r.converges = r.deviation.back().y <= tolerance;
    return r;
}

} // namespace meq

#endif
