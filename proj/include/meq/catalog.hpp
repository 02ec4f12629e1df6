#ifndef MEQ_CATALOG_HPP
#define MEQ_CATALOG_HPP

#include <meq/ergodic_averages.hpp>
#include <meq/sequences.hpp>
#include <meq/state_space.hpp>
#include <meq/systems.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace meq {

enum class expectation { yes, no, unknown };

inline const char* to_string(expectation e)
{
    switch (e) {
    case expectation::yes: return "True";
    case expectation::no: return "False";
    case expectation::unknown: return "Unknown";
    }
    return "Unknown";
}

struct system_flags
{
    bool transitive = false;
    bool minimal = false;
    bool weakly_mixing = false;
    bool uniquely_ergodic = false;
    bool isometry = false;
};

inline const std::vector<std::string>& flag_names()
{
    static const std::vector<std::string> names{"transitive", "minimal", "weakly_mixing", "uniquely_ergodic", "isometry"};
    return names;
}

inline bool flag_value(const system_flags& f, const std::string& name)
{
    if (name == "transitive") return f.transitive;
    if (name == "minimal") return f.minimal;
    if (name == "weakly_mixing") return f.weakly_mixing;
    if (name == "uniquely_ergodic") return f.uniquely_ergodic;
    if (name == "isometry") return f.isometry;
    throw std::invalid_argument("unknown flag '" + name + "'");
}

using point_pair = std::pair<point, point>;

/// Adversarial pair family: a pair with d < delta, varied by index, or nothing when the family
/// cannot reach that scale.
using seed_family = std::function<std::optional<point_pair>(double delta, std::uint64_t index)>;

struct pair_example
{
    std::string label;
    point x;
    point y;
};

/**
 * A classified system. Expected classifications are metadata for the acceptance harness and
 * reports; estimators never read them.
 */
struct catalog_entry
{
    std::string id;
    std::string description;
    system_ptr system;
    std::map<std::string, expectation> expected;
    /// "proved" for textbook facts, "expected" for literature-informed classifications,
    /// "expected-external" when the source lies outside the mean-equicontinuity literature used here.
    std::string expectation_level = "proved";
    system_flags flags;
    std::vector<seed_family> adversarial_seeds;
    std::vector<std::string> certificates;
    /// Exact symbolic twin used beyond `trusted_horizon` iterations (0 = no limit).
    std::shared_ptr<const catalog_entry> twin;
    std::size_t trusted_horizon = 0;
    std::vector<observable> observables;
    std::vector<pair_example> example_pairs;
    std::vector<std::string> factors;
};

using entry_ptr = std::shared_ptr<const catalog_entry>;

struct catalog_config
{
    long double golden_alpha = 0.6180339887498948482045868343656381L; // (√5 - 1)/2
    double rational_alpha = 1.0 / 3.0;
    double squaring_upper = 0.99;
    std::size_t symbolic_depth = shift_system::default_depth;
    std::size_t finite_size = 5;
    /// Doubling in double precision keeps 53 - h bits after h steps; 33 steps keep 2^-20 agreement.
    std::size_t doubling_trusted_horizon = 33;
};

inline const std::vector<std::string>& property_names()
{
    static const std::vector<std::string> names{"equicontinuous", "mean_eq", "eq_in_mean", "weyl_mean_eq"};
    return names;
}

inline std::map<std::string, expectation> all_expected(expectation eq, expectation mean)
{
    return {{"equicontinuous", eq}, {"mean_eq", mean}, {"eq_in_mean", mean}, {"weyl_mean_eq", mean}};
}

namespace detail {

inline std::vector<observable> circle_observables()
{
    return {trig_observable(true), trig_observable(false)};
}

inline std::vector<observable> symbolic_observables()
{
    return {first_symbol_observable(), weighted_prefix_observable()};
}

inline std::vector<std::vector<double>> cycle_metric(std::size_t n)
{
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    const double half = static_cast<double>(n / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t g = i > j ? i - j : j - i;
            d[i][j] = static_cast<double>(std::min(g, n - g)) / half;
        }
    }
    return d;
}

inline std::vector<std::vector<double>> line_metric(std::size_t n)
{
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            d[i][j] = std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(n - 1);
        }
    }
    return d;
}

} // namespace detail

/// Product entry: classifications are the AND of the factors'.
inline entry_ptr make_product_entry(const entry_ptr& a, const entry_ptr& b, std::string id = {})
{
    if (id.empty()) {
        id = a->id + "_x_" + b->id;
    }
    auto e = std::make_shared<catalog_entry>();
    e->id = id;
    e->description = "product " + a->id + " × " + b->id + " with the max metric";
    e->system = std::make_shared<product_system>(id, std::vector<system_ptr>{a->system, b->system});
    for (const auto& prop : property_names()) {
        const auto ea = a->expected.count(prop) ? a->expected.at(prop) : expectation::unknown;
        const auto eb = b->expected.count(prop) ? b->expected.at(prop) : expectation::unknown;
        if (ea == expectation::no || eb == expectation::no) {
            e->expected[prop] = expectation::no;
        } else if (ea == expectation::yes && eb == expectation::yes) {
            e->expected[prop] = expectation::yes;
        } else {
            e->expected[prop] = expectation::unknown;
        }
    }
    e->expectation_level = (a->expectation_level == "proved" && b->expectation_level == "proved") ? "proved" : "expected";
    e->flags.isometry = a->flags.isometry && b->flags.isometry;
    if (e->flags.isometry) {
        e->certificates.push_back("isometry");
    }
    e->factors = {a->id, b->id};
    const std::vector<entry_ptr> parts{a, b};
    for (std::size_t k = 0; k < parts.size(); ++k) {
        for (const auto& fam : parts[k]->adversarial_seeds) {
            const auto sys_other = parts[1 - k]->system;
            e->adversarial_seeds.push_back([fam, k, sys_other](double delta, std::uint64_t index) -> std::optional<point_pair> {
                auto p = fam(delta, index);
                if (!p) {
                    return std::nullopt;
                }
                rng_t rng(mix_seed(index, 0x51ed));
                point q = sys_other->sample_point(rng);
                std::vector<point> xs(2), ys(2);
                xs[k] = p->first;
                ys[k] = p->second;
                xs[1 - k] = q;
                ys[1 - k] = q;
                return point_pair{make_product(std::move(xs)), make_product(std::move(ys))};
            });
        }
        for (const auto& f : parts[k]->observables) {
            e->observables.push_back(component_observable(f, k));
        }
    }
    return e;
}

/**
 * Default catalog: rotations, doubling map (numeric and binary-coded), full shift, Sturmian and
 * Thue–Morse subshifts, squaring maps, products, and two finite toy systems.
 */
inline std::vector<entry_ptr> build_catalog(const catalog_config& cfg = {})
{
    if (!(cfg.squaring_upper > 0.0 && cfg.squaring_upper < 1.0)) {
        throw std::invalid_argument("catalog: squaring_upper must lie in (0, 1)");
    }
    if (cfg.finite_size < 2 || cfg.symbolic_depth < 8) {
        throw std::invalid_argument("catalog: finite_size ≥ 2 and symbolic_depth ≥ 8 required");
    }
    const double golden = static_cast<double>(cfg.golden_alpha);
    std::vector<entry_ptr> out;

    // (a) irrational rotation
    auto rot = std::make_shared<catalog_entry>();
    rot->id = "rotation_golden";
    rot->description = "circle rotation x ↦ x + (√5-1)/2 mod 1";
    rot->system = std::make_shared<circle_rotation>(rot->id, golden);
    rot->expected = all_expected(expectation::yes, expectation::yes);
    rot->flags = {true, true, false, true, true};
    rot->certificates = {"isometry"};
    rot->observables = detail::circle_observables();
    rot->example_pairs = {{"quarter", make_real(0.0), make_real(0.25)}, {"close", make_real(0.1), make_real(0.1 + 1.0 / 64)}};
    out.push_back(rot);

    // (b) rational rotation
    auto rat = std::make_shared<catalog_entry>();
    rat->id = "rotation_third";
    rat->description = "circle rotation x ↦ x + 1/3 mod 1 (every orbit periodic)";
    rat->system = std::make_shared<circle_rotation>(rat->id, cfg.rational_alpha);
    rat->expected = all_expected(expectation::yes, expectation::yes);
    rat->flags = {false, false, false, false, true};
    rat->certificates = {"isometry"};
    rat->observables = detail::circle_observables();
    rat->example_pairs = {{"sixth", make_real(0.0), make_real(1.0 / 6)}};
    out.push_back(rat);

    // (c) doubling map and its exact binary coding
    auto twin = std::make_shared<catalog_entry>();
    twin->id = "doubling_binary";
    twin->description = "doubling map on binary expansions (exact coding of x ↦ 2x mod 1)";
    twin->system = std::make_shared<binary_doubling_system>(twin->id);
    twin->expected = all_expected(expectation::no, expectation::no);
    twin->flags = {true, false, true, false, false};
    twin->observables = {decoded_trig_observable(true), decoded_trig_observable(false)};
    twin->adversarial_seeds.push_back([](double delta, std::uint64_t index) -> std::optional<point_pair> {
        if (!(delta > std::ldexp(1.0, -58))) {
            return std::nullopt;
        }
        const auto k = static_cast<std::size_t>(std::ceil(-std::log2(std::min(delta, 1.0)))) + 1 + index % 4;
        auto zero = word_sequence::make("", "0");
        std::vector<symbol_t> head(k, 0);
        auto y = std::make_shared<spliced_sequence>(std::move(head), std::make_shared<hashed_sequence>(mix_seed(index, 0xd0b1)), 0);
        return point_pair{make_symbolic(zero), make_symbolic(y)};
    });
    twin->example_pairs = {{"zero_vs_generic", make_symbolic(word_sequence::make("", "0")),
                            make_symbolic(std::make_shared<hashed_sequence>(0x5eed))}};
    out.push_back(twin);

    auto dbl = std::make_shared<catalog_entry>();
    dbl->id = "doubling";
    dbl->description = "doubling map x ↦ 2x mod 1 in double precision; exact binary twin beyond the trusted horizon";
    dbl->system = std::make_shared<doubling_map>(dbl->id);
    dbl->expected = twin->expected;
    dbl->flags = twin->flags;
    dbl->observables = detail::circle_observables();
    dbl->twin = twin;
    dbl->trusted_horizon = cfg.doubling_trusted_horizon;
    dbl->example_pairs = {{"zero_vs_point3", make_real(0.0), make_real(0.3)}};
    out.push_back(dbl);

    // (d) full shift
    auto fs = std::make_shared<catalog_entry>();
    fs->id = "full_shift";
    fs->description = "full shift on {0,1} with d = 2^-(first mismatch)";
    auto fs_sys = std::make_shared<full_shift>(fs->id, 2, cfg.symbolic_depth);
    fs->system = fs_sys;
    fs->expected = all_expected(expectation::no, expectation::no);
    fs->flags = {true, false, true, false, false};
    fs->observables = detail::symbolic_observables();
    fs->adversarial_seeds.push_back([fs_sys](double delta, std::uint64_t index) -> std::optional<point_pair> {
        // (0^∞, 0^k 1^∞)
        const std::size_t k0 = fs_sys->prefix_for_radius(delta);
        const std::size_t k = std::min(k0 + index % 8, fs_sys->depth() - 1);
        if (std::ldexp(1.0, -static_cast<int>(k)) >= delta) {
            return std::nullopt;
        }
        return point_pair{make_symbolic(word_sequence::make("", "0")), make_symbolic(word_sequence::make(std::string(k, '0'), "1"))};
    });
    fs->example_pairs = {{"zeros_vs_ones", make_symbolic(word_sequence::make("", "0")), make_symbolic(word_sequence::make("", "1"))},
                         {"eventually_equal", make_symbolic(word_sequence::make("", "0")), make_symbolic(word_sequence::make("0001", "0"))},
                         {"zeros_vs_alternating", make_symbolic(word_sequence::make("", "0")), make_symbolic(word_sequence::make("", "01"))}};
    out.push_back(fs);

    // (e) Sturmian subshift coding (a)
    auto st = std::make_shared<catalog_entry>();
    st->id = "sturmian_golden";
    st->description = "Sturmian subshift: coding of the golden rotation by [0,1-α), [1-α,1)";
    auto st_sys = std::make_shared<sturmian_shift>(st->id, cfg.golden_alpha, cfg.symbolic_depth);
    st->system = st_sys;
    st->expected = all_expected(expectation::no, expectation::yes);
    st->expectation_level = "expected";
    st->flags = {true, true, false, true, false};
    st->observables = detail::symbolic_observables();
    st->example_pairs = {{"nearby_codings", st_sys->coding_of(0.2L), st_sys->coding_of(0.2L + 1e-6L)}};
    out.push_back(st);

    // (f) Thue–Morse
    auto tm = std::make_shared<catalog_entry>();
    tm->id = "thue_morse";
    tm->description = "Prouhet–Thue–Morse substitution subshift (orbit of t)";
    auto tm_sys = std::make_shared<thue_morse_shift>(tm->id, cfg.symbolic_depth);
    tm->system = tm_sys;
    tm->expected = all_expected(expectation::no, expectation::no);
    tm->expectation_level = "expected-external";
    tm->flags = {true, true, false, true, false};
    tm->observables = detail::symbolic_observables();
    tm->adversarial_seeds.push_back([tm_sys](double delta, std::uint64_t index) -> std::optional<point_pair> {
        // σ^{2^j} t and σ^{2^{j+1}} t agree on exactly 2^j symbols, yet differ on a 2/3 fraction of indices
        const std::size_t k0 = tm_sys->prefix_for_radius(delta);
        std::size_t j = 0;
        while ((std::size_t{1} << j) < k0) {
            ++j;
        }
        j += index % 2;
        if ((std::size_t{1} << j) >= tm_sys->depth()) {
            return std::nullopt;
        }
        return point_pair{tm_sys->at_offset(std::uint64_t{1} << j), tm_sys->at_offset(std::uint64_t{1} << (j + 1))};
    });
    out.push_back(tm);

    // (g) squaring map on [0, b], b < 1
    auto sq = std::make_shared<catalog_entry>();
    sq->id = "squaring";
    sq->description = "squaring map x ↦ x² on [0, " + std::to_string(cfg.squaring_upper).substr(0, 4) + "]; every orbit tends to 0";
    sq->system = std::make_shared<squaring_map>(sq->id, cfg.squaring_upper);
    sq->expected = all_expected(expectation::yes, expectation::yes);
    sq->flags = {false, false, false, true, false};
    sq->observables = {identity_observable(0, 1.0), trig_observable(true)};
    sq->example_pairs = {{"half_vs_point6", make_real(0.5), make_real(0.6)}};
    out.push_back(sq);

    // squaring map on the full [0,1]: the repelling fixed point 1 breaks mean equicontinuity
    auto squ = std::make_shared<catalog_entry>();
    squ->id = "squaring_unit";
    squ->description = "squaring map x ↦ x² on [0,1]; pairs (1, 1-u) separate in the mean";
    squ->system = std::make_shared<squaring_map>(squ->id, 1.0);
    squ->expected = all_expected(expectation::no, expectation::no);
    squ->flags = {false, false, false, false, false};
    squ->observables = {identity_observable(0, 1.0), trig_observable(true)};
    squ->adversarial_seeds.push_back([](double delta, std::uint64_t index) -> std::optional<point_pair> {
        const double u = std::ldexp(delta, -static_cast<int>(1 + index % 8));
        if (!(u > 1e-15)) {
            return std::nullopt;
        }
        return point_pair{make_real(1.0), make_real(1.0 - u)};
    });
    squ->example_pairs = {{"one_vs_near_one", make_real(1.0), make_real(1.0 - 1e-3)}};
    out.push_back(squ);

    // (h) products
    auto rxs = std::const_pointer_cast<catalog_entry>(make_product_entry(rot, sq, "rotation_x_squaring"));
    rxs->flags.uniquely_ergodic = true;
    out.push_back(rxs);

    auto rot2 = std::make_shared<catalog_entry>(*rot);
    rot2->id = "rotation_sqrt2";
    rot2->description = "circle rotation x ↦ x + √2 - 1 mod 1";
    rot2->system = std::make_shared<circle_rotation>(rot2->id, std::sqrt(2.0) - 1.0);
    rot2->example_pairs.clear();
    auto rxr = std::const_pointer_cast<catalog_entry>(make_product_entry(rot, rot2, "rotation_x_rotation"));
    rxr->flags.transitive = true; // α and β rationally independent: minimal torus rotation
    rxr->flags.minimal = true;
    rxr->flags.uniquely_ergodic = true;
    out.push_back(rxr);

    out.push_back(make_product_entry(rot, fs, "rotation_x_full_shift"));
    out.push_back(make_product_entry(sq, st, "squaring_x_sturmian"));

    // (i) finite toys
    const std::size_t n = cfg.finite_size;
    auto cyc = std::make_shared<catalog_entry>();
    cyc->id = "finite_cycle";
    cyc->description = "cyclic permutation of " + std::to_string(n) + " points with the cycle metric";
    std::vector<std::size_t> succ(n);
    for (std::size_t i = 0; i < n; ++i) {
        succ[i] = (i + 1) % n;
    }
    cyc->system = std::make_shared<finite_system>(cyc->id, detail::cycle_metric(n), succ, true);
    cyc->expected = all_expected(expectation::yes, expectation::yes);
    cyc->flags = {true, true, false, true, true};
    cyc->certificates = {"isometry"};
    cyc->observables = {finite_id_observable(n)};
    cyc->example_pairs = {{"neighbours", make_finite(0), make_finite(1)}};
    out.push_back(cyc);

    auto con = std::make_shared<catalog_entry>();
    con->id = "finite_contraction";
    con->description = "i ↦ max(i-1, 0) on " + std::to_string(n) + " points of a line";
    std::vector<std::size_t> down(n);
    for (std::size_t i = 0; i < n; ++i) {
        down[i] = i == 0 ? 0 : i - 1;
    }
    con->system = std::make_shared<finite_system>(con->id, detail::line_metric(n), down, false);
    con->expected = all_expected(expectation::yes, expectation::yes);
    con->flags = {false, false, false, true, false};
    con->observables = {finite_id_observable(n)};
    con->example_pairs = {{"ends", make_finite(0), make_finite(n - 1)}};
    out.push_back(con);

    return out;
}

inline entry_ptr find_entry(const std::vector<entry_ptr>& catalog, const std::string& id)
{
    for (const auto& e : catalog) {
        if (e->id == id) {
            return e;
        }
    }
    throw std::invalid_argument("unknown system id '" + id + "'");
}

/// Even seeds draw a random pair; odd seeds use an adversarial family when the entry has one.
inline point_pair sample_pair_near_diagonal(const catalog_entry& entry, double delta, std::uint64_t seed)
{
    const auto& sys = *entry.system;
    if (!(delta > sys.resolution())) {
        throw std::domain_error("sample_pair_near_diagonal: delta below the representable resolution of " + entry.id);
    }
    if ((seed & 1) && !entry.adversarial_seeds.empty()) {
        const std::uint64_t s = seed >> 1;
        const auto& fam = entry.adversarial_seeds[s % entry.adversarial_seeds.size()];
        if (auto p = fam(delta, s / entry.adversarial_seeds.size())) {
            if (sys.distance(p->first, p->second) < delta) {
                return *p;
            }
        }
    }
    rng_t rng(mix_seed(seed, 0xc0ffee));
    point x = sys.sample_point(rng);
    point y = sys.sample_near(x, delta, rng);
    return {std::move(x), std::move(y)};
}

} // namespace meq

#endif
