// Acceptance harness: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--only N]... [--expect-fail N:system_id]...
// A failure counts as known only when every failing item it reports is listed for that criterion.
// Exit status counts the other failures. Known failures still print FAIL.

#include "oracles.hpp"

#include <meq/analysis.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace meq;

namespace {

struct outcome
{
    bool pass = false;
    std::string detail;
    /// Failing items (system ids, or tags such as "runtime"), when the criterion itemizes them.
    std::set<std::string> failing = {};
};

const std::vector<entry_ptr>& catalog()
{
    static const auto c = build_catalog();
    return c;
}

const catalog_entry& entry(const std::string& id) { return *find_entry(catalog(), id); }

point word(const std::string& prefix, const std::string& period) { return make_symbolic(word_sequence::make(prefix, period)); }

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

outcome isometry_exactness()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto& e = entry("rotation_golden");
    const auto& sys = *e.system;
    rng_t rng(101);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto x = sys.sample_point(rng), y = sys.sample_point(rng);
        const double d = sys.distance(x, y);
        const auto t = orbit_distance_trace(sys, x, y, 10000);
        const auto prefix = prefix_sums(t);
        for (std::size_t n = 1; n <= t.size(); ++n) {
            worst = std::max(worst, std::abs(static_cast<double>(prefix[n] / static_cast<long double>(n)) - d));
        }
    }
    const scan_config cfg;
    const auto v = scan_modulus(e, property_kind::mean_eq, cfg);
    bool modulus_ok = v.outcome == verdict_outcome::certified_at_scale;
    for (const auto& r : v.scan.per_eps) {
        double expect = 0.0;
        for (double d : cfg.delta_grid) {
            if (d <= r.eps) {
                expect = d;
                break;
            }
        }
        modulus_ok = modulus_ok && r.found_delta && *r.found_delta == expect;
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && modulus_ok && secs < 5.0,
            "max |dbar_n - d| = " + fmt(worst) + ", modulus " + (modulus_ok ? "exact" : "wrong") + ", " + fmt(secs) + " s"};
}

outcome oracle_equivalence()
{
    rng_t rng(202);
    double worst_window = 0.0, worst_dbar = 0.0, worst_birkhoff = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 16 + rng() % 9985;
        std::bernoulli_distribution bit(uniform01(rng));
        std::vector<std::uint8_t> bits(n);
        for (auto& b : bits) {
            b = bit(rng);
        }
        const index_trace t(bits);
        for (std::size_t len : {std::size_t{1}, std::size_t{17}, std::size_t{256} % n + 1, n / 8 + 1}) {
            const auto w = sliding_window_extremes(t, len);
            const auto [lo, hi] = oracle::window_extremes(t, len);
            worst_window = std::max({worst_window, std::abs(w.min_fraction - lo), std::abs(w.max_fraction - hi)});
        }
    }
    int orbits = 0;
    while (orbits < 50) {
        const auto& e = *catalog()[rng() % catalog().size()];
        const auto& sys = *e.system;
        if (e.observables.empty()) {
            continue;
        }
        ++orbits;
        const std::size_t n = 16 + rng() % 9985;
        const auto x = sys.sample_point(rng);
        const auto y = sys.caps().can_sample_near && orbits % 2 ? sys.sample_near(x, 0.01, rng) : sys.sample_point(rng);
        const auto schedule = geometric_schedule(n);
        const auto est = besicovitch_estimate(sys, x, y, schedule);
        for (const auto& p : est.partials) {
            const auto m = static_cast<std::size_t>(p.x);
            worst_dbar = std::max(worst_dbar, std::abs(p.y - static_cast<double>(oracle::dbar(sys, x, y, m))));
        }
        const auto& f = e.observables[rng() % e.observables.size()];
        const auto b = birkhoff(sys, f, x, schedule);
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            worst_birkhoff = std::max(worst_birkhoff, std::abs(b.values[k] - static_cast<double>(oracle::birkhoff(sys, f.eval, x, schedule[k]))));
        }
    }
    const double worst = std::max({worst_window, worst_dbar, worst_birkhoff});
    return {worst <= 1e-10, "max deviation: windows " + fmt(worst_window) + ", dbar " + fmt(worst_dbar) + ", birkhoff " + fmt(worst_birkhoff)};
}

outcome separation_fixture()
{
    const std::size_t n = oracle::factorial(10);
    const auto iv = oracle::factorial_intervals(10);
    const auto t = parse_runs(oracle::runs_text(iv, n));
    const bool same = t == oracle::from_intervals(iv, n);
    const auto d = density_estimate(t);
    const std::vector<std::size_t> lengths{1, 2, 4, 8};
    const auto b = banach_density_estimate(t, lengths);
    // direct enumeration: [8!, 8!+8) is a full window of length 8
    const bool full_window = oracle::window_fraction(t, oracle::factorial(8), 8) == 1.0;
    return {same && d.upper <= 0.01 && b.upper == 1.0 && full_window,
            "density upper " + fmt(d.upper) + ", Banach upper " + fmt(b.upper)};
}

outcome refutation_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto& e = entry("full_shift");
    const auto& sys = *e.system;
    const auto schedule = geometric_schedule(10000);
    double min_est = 1.0;
    bool dist_ok = true;
    for (std::size_t k = 5; k <= 20; ++k) {
        const auto x = word("", "0");
        const auto y = word(std::string(k, '0'), "1");
        dist_ok = dist_ok && sys.distance(x, y) == std::ldexp(1.0, -static_cast<int>(k));
        min_est = std::min(min_est, besicovitch_estimate(sys, x, y, schedule).value);
    }
    scan_config cfg;
    cfg.symbolic_horizon = 10000;
    const std::array<property_kind, 3> props{property_kind::mean_eq, property_kind::eq_in_mean, property_kind::weyl_mean_eq};
    const auto v = scan_moduli(e, props, cfg);
    bool all_refuted = true;
    for (const auto& verdict : v) {
        const auto& half = verdict.scan.per_eps.front();
        all_refuted = all_refuted && verdict.outcome == verdict_outcome::refuted && half.eps == 0.5 && half.refutation
                   && half.refutation->margin_ok;
    }
    const double secs = seconds_since(t0);
    return {dist_ok && min_est >= 0.9 && all_refuted && secs < 30.0,
            "min family estimate " + fmt(min_est) + ", three scans " + (all_refuted ? "Refuted" : "disagree") + ", " + fmt(secs) + " s"};
}

struct certification_state
{
    std::map<std::string, std::vector<system_verdict>> verdicts;
    bool computed = false;
};

certification_state& certification()
{
    static certification_state s;
    return s;
}

const std::vector<std::string> certified_systems{"rotation_golden", "squaring", "sturmian_golden", "rotation_x_squaring"};

void ensure_certification_scans()
{
    auto& s = certification();
    if (s.computed) {
        return;
    }
    const scan_config cfg;
    const std::array<property_kind, 3> props{property_kind::mean_eq, property_kind::eq_in_mean, property_kind::weyl_mean_eq};
    for (const auto& id : certified_systems) {
        s.verdicts[id] = scan_moduli(entry(id), props, cfg);
    }
    s.computed = true;
}

outcome certification_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    ensure_certification_scans();
    const auto& s = certification();
    std::string failed;
    bool contradiction = false;
    for (const auto& id : certified_systems) {
        const auto& v = s.verdicts.at(id);
        for (const auto& verdict : v) {
            if (verdict.outcome != verdict_outcome::certified_at_scale) {
                std::size_t certified_eps = 0;
                for (const auto& r : verdict.scan.per_eps) {
                    certified_eps += r.found_delta ? 1 : 0;
                }
                failed += " " + id + "/" + to_string(verdict.property) + "=" + to_string(verdict.outcome) + "(" + std::to_string(certified_eps)
                        + "/" + std::to_string(verdict.scan.per_eps.size()) + " eps)";
            }
        }
        contradiction = contradiction || equivalence_report("", id, v[0], v[1]).status == cross_status::contradiction
                     || equivalence_report("", id, v[0], v[2]).status == cross_status::contradiction;
    }
    const double secs = seconds_since(t0);
    const bool pass = failed.empty() && !contradiction && secs < 600.0;
    std::set<std::string> failing;
    for (const auto& id : certified_systems) {
        if (failed.find(" " + id + "/") != std::string::npos) {
            failing.insert(id);
        }
    }
    if (contradiction) {
        failing.insert("contradiction");
    }
    if (secs >= 600.0) {
        failing.insert("runtime");
    }
    return {pass, (failed.empty() ? std::string("all certified") : "not certified:" + failed) + (contradiction ? ", contradiction" : ", no contradiction")
                      + ", " + fmt(secs) + " s",
            failing};
}

outcome uniform_window_suite()
{
    ensure_certification_scans();
    const scan_config cfg;
    std::string failed;
    std::set<std::string> failing;
    for (const auto& id : certified_systems) {
        const auto& mean = certification().verdicts.at(id).front();
        if (mean.outcome != verdict_outcome::certified_at_scale) {
            failed += " " + id + "(mean_eq " + to_string(mean.outcome) + ")";
            failing.insert(id);
            continue;
        }
        const auto r = check_theorem_5_3(entry(id), mean, cfg);
        for (const auto& e : r.per_eps) {
            if (!(e.delta && e.n && e.bound < e.eps)) {
                failed += " " + id + "(eps " + fmt(e.eps) + ")";
                failing.insert(id);
            }
        }
    }
    return {failed.empty(), failed.empty() ? "(delta, N) found for every system and eps" : "missing:" + failed, failing};
}

outcome unique_ergodicity_suite()
{
    const std::vector<std::size_t> at{100000};
    const auto& rot = entry("rotation_golden");
    rng_t rng(303);
    std::vector<point> pts{make_real(0.0)};
    for (int k = 0; k < 7; ++k) {
        pts.push_back(rot.system->sample_point(rng));
    }
    const std::vector<observable> trig{trig_observable(true), trig_observable(false)};
    const auto r = unique_ergodicity_check(*rot.system, trig, pts, geometric_schedule(100000));
    double rot_spread = 0.0;
    for (const auto& c : r.curves) {
        rot_spread = std::max(rot_spread, c.spread.back().y);
    }
    const bool rot_ok = r.outcome == ue_outcome::consistent_with_ue && rot_spread <= 0.02;

    const auto& twin = *entry("doubling").twin;
    const std::vector<point> dpts{word("", "0"), twin.system->sample_point(rng)};
    const std::vector<observable> dobs{decoded_trig_observable(true)};
    const auto d = unique_ergodicity_check(*twin.system, dobs, dpts, geometric_schedule(100000));
    const bool dbl_ok = d.outcome == ue_outcome::refuted_ue && d.refutation && d.refutation->difference >= 0.9;

    // every transitive system certified mean equicontinuous must look uniquely ergodic
    scan_config cfg;
    cfg.symbolic_horizon = 100000;
    std::string bad;
    std::size_t checked = 0;
    for (const auto& e : catalog()) {
        if (!e->flags.transitive) {
            continue;
        }
        const auto v = scan_modulus(*e, property_kind::mean_eq, cfg);
        if (v.outcome != verdict_outcome::certified_at_scale) {
            continue;
        }
        ++checked;
        const auto ue = run_unique_ergodicity(*e, ue_config{});
        if (check_mean_eq_unique_ergodicity(*e, v, ue).status != cross_status::consistent) {
            bad += " " + e->id;
        }
    }
    return {rot_ok && dbl_ok && bad.empty() && checked > 0,
            "rotation spread " + fmt(rot_spread) + ", doubling spread " + fmt(d.refutation ? d.refutation->difference : 0.0) + ", "
                + std::to_string(checked) + " certified transitive systems" + (bad.empty() ? " consistent" : ", inconsistent:" + bad)};
}

outcome mean_sensitive_suite()
{
    const auto eps = default_relation_eps();
    const auto& fs = *entry("full_shift").system;
    const auto s = mean_sensitive_pair_scan(fs, word("", "0"), word("", "1"), eps);
    bool fs_ok = s.outcome == pair_outcome::holds;
    double min_freq = 1.0;
    for (const auto& v : s.verdicts) {
        for (const auto& w : v.witnesses) {
            fs_ok = fs_ok && w.found && w.achieved > 0.5;
            min_freq = std::min(min_freq, w.achieved);
        }
    }
    const auto& rot = *entry("rotation_golden").system;
    rng_t rng(404);
    bool rot_ok = true;
    std::size_t full_cover = 0;
    for (int k = 0; k < 20; ++k) {
        const auto x = rot.sample_point(rng);
        const double d = k < 10 ? 0.4 + 0.1 * uniform01(rng) : 0.4 * uniform01(rng) + 1e-6;
        const auto y = make_real(reduce_mod1(x.as<real_point>().coords[0] + d));
        const auto r = mean_sensitive_pair_scan(rot, x, y, eps, {}, {0.5, 0.25, 0.125}, search_budget{32, 2048}, k);
        rot_ok = rot_ok && r.outcome == pair_outcome::inconclusive;
        bool certified = false;
        for (std::size_t t = 0; t < r.taus.size(); ++t) {
            // a coarse τ ≥ d/2 can hold on its own; membership needs every τ
            const auto& v = r.verdicts[t];
            certified = certified || v.certificate.has_value();
            if (rot.distance(x, y) > 2.0 * r.taus[t] + r.eps.front()) {
                rot_ok = rot_ok && v.certificate && v.certificate->eps.size() == r.eps.size();
                full_cover += 1;
            }
        }
        rot_ok = rot_ok && certified;
    }
    return {fs_ok && rot_ok && full_cover > 0,
            "full shift min frequency " + fmt(min_freq) + ", rotation " + (rot_ok ? "all Inconclusive" : "unexpected Holds") + ", "
                + std::to_string(full_cover) + " fully certified searches"};
}

outcome containment_suite()
{
    const std::vector<double> eps{0.25, 0.0625};
    const search_budget budget{16, 2048};
    rng_t rng(505);
    std::size_t pairs = 0, violations = 0, bp = 0, p = 0;
    while (pairs < 200) {
        const auto& e = *catalog()[rng() % catalog().size()];
        const auto& sys = *e.system;
        const auto x = sys.sample_point(rng);
        const auto y = sys.caps().can_sample_near && pairs % 2 ? sys.sample_near(x, 0.01, rng) : sys.sample_point(rng);
        ++pairs;
        const bool bp_holds = banach_proximal_test(sys, x, y, eps, budget.max_time).outcome == pair_outcome::holds;
        const bool p_holds = proximal_test(sys, x, y, eps, budget.max_time).outcome == pair_outcome::holds;
        bp += bp_holds ? 1 : 0;
        p += p_holds ? 1 : 0;
        if (bp_holds && !p_holds) {
            ++violations;
        }
        if (p_holds && regionally_proximal_test(sys, x, y, eps, budget).outcome != pair_outcome::holds) {
            ++violations;
        }
    }
    const auto& sq = *entry("squaring").system;
    const auto all_eps = default_relation_eps();
    std::size_t sq_holds = 0;
    for (auto [a, b] : {std::pair{0.5, 0.6}, {0.1, 0.9}, {0.3, 0.7}, {0.0, 0.95}, {0.8, 0.81}}) {
        sq_holds += banach_proximal_test(sq, make_real(a), make_real(b), all_eps, 10000).outcome == pair_outcome::holds ? 1 : 0;
    }
    return {violations == 0 && sq_holds == 5,
            std::to_string(violations) + " containment violations over 200 pairs (" + std::to_string(bp) + " BP, " + std::to_string(p)
                + " P), squaring BP " + std::to_string(sq_holds) + "/5"};
}

outcome reproducibility_suite()
{
    const std::filesystem::path base = std::filesystem::temp_directory_path() / "meq_acceptance_repro";
    std::filesystem::remove_all(base);
    const std::string config = std::string(MEQ_SOURCE_DIR) + "/configs/reproducibility.json";
    std::string dumps[2];
    for (int run = 0; run < 2; ++run) {
        const auto dir = base / ("run" + std::to_string(run));
        const std::string cmd = std::string("\"") + MEQLAB_PATH + "\" analyze --config \"" + config + "\" --out \"" + dir.string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            return {false, "analyze run " + std::to_string(run) + " failed"};
        }
        std::ifstream in(dir / "report.json");
        auto j = nlohmann::json::parse(in);
        j.erase("timestamp");
        dumps[run] = j.dump(2);
    }
    std::filesystem::remove_all(base);
    return {dumps[0] == dumps[1], dumps[0] == dumps[1] ? "reports identical (" + std::to_string(dumps[0].size()) + " bytes)" : "reports differ"};
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> only;
    std::map<int, std::set<std::string>> expect_fail;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else if (a == "--expect-fail" && i + 1 < argc) {
            const std::string v = argv[++i];
            const auto colon = v.find(':');
            if (colon == std::string::npos) {
                std::cerr << "acceptance: --expect-fail needs N:system_id\n";
                return 64;
            }
            expect_fail[std::atoi(v.substr(0, colon).c_str())].insert(v.substr(colon + 1));
        } else {
            std::cerr << "usage: acceptance [--only N]... [--expect-fail N:system_id]...\n";
            return 64;
        }
    }
    const std::vector<std::pair<const char*, outcome (*)()>> criteria{
        {"isometry exactness", isometry_exactness},
        {"oracle equivalence", oracle_equivalence},
        {"separation fixture", separation_fixture},
        {"refutation suite", refutation_suite},
        {"certification suite", certification_suite},
        {"uniform window bound", uniform_window_suite},
        {"unique ergodicity", unique_ergodicity_suite},
        {"mean sensitive pairs", mean_sensitive_suite},
        {"proximality containments", containment_suite},
        {"reproducibility", reproducibility_suite},
    };
    int unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.count(id)) {
            continue;
        }
        outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        bool known = !o.failing.empty() && expect_fail.count(id) > 0;
        for (const auto& f : o.failing) {
            known = known && expect_fail[id].count(f) > 0;
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << criteria[k].first << ": " << o.detail
                  << (!o.pass && known ? " [known, see README limitations]" : "") << std::endl;
        if (!o.pass && !known) {
            ++unexpected;
        }
    }
    return unexpected == 0 ? 0 : 1;
}
