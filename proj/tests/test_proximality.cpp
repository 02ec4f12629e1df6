#include <meq/catalog.hpp>
#include <meq/proximality.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace meq;

namespace {

const std::vector<entry_ptr>& catalog()
{
    static const auto c = build_catalog();
    return c;
}

point word(const std::string& prefix, const std::string& period) { return make_symbolic(word_sequence::make(prefix, period)); }

/// Two-point space without any sampling support.
class bare_system final : public dynamical_system
{
public:
    bare_system() : dynamical_system("bare", space_kind::finite, 1.0) {}
    capabilities caps() const override { return {}; }
    bool contains(const point& p) const override { return p.holds<finite_point>() && p.as<finite_point>().id < 2; }
    double distance(const point& a, const point& b) const override
    {
        return a.as<finite_point>().id == b.as<finite_point>().id ? 0.0 : 1.0;
    }
    point step(const point& p) const override { return p; }
};

} // namespace

TEST(Proximal, EventuallyEqualPairHoldsAtFirstMeeting)
{
    full_shift fs("fs");
    const std::vector<double> eps{0.25, 1e-3};
    const auto v = proximal_test(fs, word("", "0"), word("0001", "0"), eps, 100);
    EXPECT_EQ(v.outcome, pair_outcome::holds);
    for (const auto& w : v.witnesses) {
        EXPECT_TRUE(w.found);
        EXPECT_EQ(w.time, 4u);
    }
}

TEST(Proximal, DistantFixedPointsAreInconclusive)
{
    full_shift fs("fs");
    const std::vector<double> eps{0.25};
    const auto v = proximal_test(fs, word("", "0"), word("", "1"), eps, 100);
    EXPECT_EQ(v.outcome, pair_outcome::inconclusive);
    EXPECT_DOUBLE_EQ(v.witnesses[0].achieved, 1.0);
}

TEST(BanachProximal, SquaringPairHolds)
{
    const auto& sys = *find_entry(catalog(), "squaring")->system;
    const auto eps = default_relation_eps();
    const auto v = banach_proximal_test(sys, make_real(0.5), make_real(0.6), eps, 10000);
    EXPECT_EQ(v.outcome, pair_outcome::holds);
}

TEST(BanachProximal, AlternatingPairFailsWithWindows)
{
    full_shift fs("fs");
    const std::vector<double> eps{0.4};
    const auto v = banach_proximal_test(fs, word("", "0"), word("", "01"), eps, 4096);
    ASSERT_EQ(v.outcome, pair_outcome::fails);
    const auto& w = v.witnesses[0];
    EXPECT_FALSE(w.windows.empty());
    for (const auto& win : w.windows) {
        EXPECT_GE(win.fraction, 0.1);
    }
}

TEST(RegionallyProximal, SharedTailSpliceHolds)
{
    for (const char* id : {"full_shift", "doubling_binary"}) {
        const auto& sys = *find_entry(catalog(), id)->system;
        const auto v = regionally_proximal_test(sys, word("", "0"), word("", "1"), 0.25);
        ASSERT_EQ(v.outcome, pair_outcome::holds) << id;
        const auto& w = v.witnesses[0];
        ASSERT_TRUE(w.x_aux && w.y_aux);
        EXPECT_LT(sys.distance(*w.x_aux, word("", "0")), 0.25);
        EXPECT_LT(sys.distance(*w.y_aux, word("", "1")), 0.25);
        EXPECT_LT(sys.distance(iterate(sys, *w.x_aux, w.time), iterate(sys, *w.y_aux, w.time)), 0.25);
    }
}

TEST(RegionallyProximal, RotationGetsIsometryCertificate)
{
    const auto& sys = *find_entry(catalog(), "rotation_golden")->system;
    const auto v = regionally_proximal_test(sys, make_real(0.0), make_real(0.4), 0.05, search_budget{16, 256});
    EXPECT_EQ(v.outcome, pair_outcome::inconclusive);
    ASSERT_TRUE(v.certificate.has_value());
    EXPECT_EQ(v.certificate->kind, "isometry");
}

TEST(RegionallyProximal, SwapSymmetry)
{
    const auto& sys = *find_entry(catalog(), "full_shift")->system;
    rng_t rng(4);
    for (int k = 0; k < 10; ++k) {
        const auto x = sys.sample_point(rng), y = sys.sample_point(rng);
        const auto a = regionally_proximal_test(sys, x, y, 0.125, search_budget{16, 512}, 3);
        const auto b = regionally_proximal_test(sys, y, x, 0.125, search_budget{16, 512}, 3);
        ASSERT_EQ(a.outcome, b.outcome);
        const auto& wa = a.witnesses[0];
        const auto& wb = b.witnesses[0];
        EXPECT_EQ(wa.time, wb.time);
        if (wa.x_aux) {
            EXPECT_EQ(fingerprint(*wa.x_aux), fingerprint(*wb.y_aux));
            EXPECT_EQ(fingerprint(*wa.y_aux), fingerprint(*wb.x_aux));
        }
    }
}

TEST(RegionallyProximal, LargerBudgetNeverLosesAHold)
{
    const auto& sys = *find_entry(catalog(), "sturmian_golden")->system;
    rng_t rng(8);
    std::size_t gained = 0;
    for (int k = 0; k < 20; ++k) {
        const auto x = sys.sample_point(rng), y = sys.sample_point(rng);
        const auto small = regionally_proximal_test(sys, x, y, 0.125, search_budget{1, 8}, 1);
        const auto large = regionally_proximal_test(sys, x, y, 0.125, search_budget{64, 8}, 1);
        if (small.outcome == pair_outcome::holds) {
            EXPECT_EQ(large.outcome, pair_outcome::holds);
        }
        gained += small.outcome != large.outcome ? 1 : 0;
    }
    EXPECT_GT(gained, 0u);
}

TEST(RegionallyProximal, RequiresNearSampling)
{
    bare_system sys;
    EXPECT_THROW(regionally_proximal_test(sys, make_finite(0), make_finite(1), 0.1), std::logic_error);
}

TEST(MeanSensitive, FixedPointsOfFullShiftHold)
{
    const auto& sys = *find_entry(catalog(), "full_shift")->system;
    const auto eps = default_relation_eps();
    const auto v = mean_sensitive_pair_test(sys, word("", "0"), word("", "1"), 0.125, 0.5, eps);
    ASSERT_EQ(v.outcome, pair_outcome::holds);
    for (const auto& w : v.witnesses) {
        EXPECT_TRUE(w.found);
        EXPECT_GT(w.achieved, 0.5);
        ASSERT_TRUE(w.x_aux && w.y_aux);
        EXPECT_LT(sys.distance(*w.x_aux, *w.y_aux), w.eps);
    }
}

TEST(MeanSensitive, RotationIsInconclusiveWithCertificate)
{
    const auto& sys = *find_entry(catalog(), "rotation_golden")->system;
    const auto eps = default_relation_eps();
    const auto s = mean_sensitive_pair_scan(sys, make_real(0.0), make_real(0.4), eps, {}, {0.5, 0.25, 0.125}, search_budget{16, 1024});
    EXPECT_EQ(s.outcome, pair_outcome::inconclusive);
    for (const auto& v : s.verdicts) {
        EXPECT_EQ(v.outcome, pair_outcome::inconclusive);
        ASSERT_TRUE(v.certificate.has_value());
        EXPECT_EQ(v.certificate->eps.size(), eps.size());
    }
}

TEST(MeanSensitive, DiagonalPairHolds)
{
    const auto& sys = *find_entry(catalog(), "rotation_golden")->system;
    const std::vector<double> eps{0.1};
    EXPECT_EQ(mean_sensitive_pair_test(sys, make_real(0.3), make_real(0.3), 0.05, 0.5, eps).outcome, pair_outcome::holds);
}

TEST(MeanSensitive, SwapSymmetry)
{
    const auto& sys = *find_entry(catalog(), "full_shift")->system;
    const std::vector<double> eps{0.25, 0.0625};
    const auto a = mean_sensitive_pair_test(sys, word("", "0"), word("1", "0"), 0.125, 0.25, eps, search_budget{8, 512});
    const auto b = mean_sensitive_pair_test(sys, word("1", "0"), word("", "0"), 0.125, 0.25, eps, search_budget{8, 512});
    ASSERT_EQ(a.outcome, b.outcome);
    for (std::size_t k = 0; k < a.witnesses.size(); ++k) {
        EXPECT_DOUBLE_EQ(a.witnesses[k].achieved, b.witnesses[k].achieved);
    }
}

TEST(MeanSensitive, RejectsBadParameters)
{
    const auto& sys = *find_entry(catalog(), "full_shift")->system;
    const std::vector<double> eps{0.1};
    EXPECT_THROW(mean_sensitive_pair_test(sys, word("", "0"), word("", "1"), 0.0, 0.5, eps), std::invalid_argument);
    EXPECT_THROW(mean_sensitive_pair_test(sys, word("", "0"), word("", "1"), 0.1, 1.0, eps), std::invalid_argument);
}

TEST(Relations, ContainmentChainOnSampledPairs)
{
    const auto eps = std::vector<double>{0.25, 0.0625};
    const search_budget budget{16, 2048};
    rng_t rng(77);
    std::size_t pairs = 0, p_holds = 0;
    while (pairs < 200) {
        const auto& e = *catalog()[rng() % catalog().size()];
        const auto& sys = *e.system;
        if (!sys.caps().can_sample_points) {
            continue;
        }
        const auto x = sys.sample_point(rng);
        const auto y = sys.caps().can_sample_near && pairs % 2 ? sys.sample_near(x, 0.01, rng) : sys.sample_point(rng);
        ++pairs;
        const auto bp = banach_proximal_test(sys, x, y, eps, budget.max_time);
        const auto p = proximal_test(sys, x, y, eps, budget.max_time);
        if (bp.outcome == pair_outcome::holds) {
            EXPECT_EQ(p.outcome, pair_outcome::holds) << e.id;
        }
        if (p.outcome == pair_outcome::holds && sys.caps().can_sample_near) {
            ++p_holds;
            EXPECT_EQ(regionally_proximal_test(sys, x, y, eps, budget).outcome, pair_outcome::holds) << e.id;
        }
    }
    EXPECT_GT(p_holds, 0u);
}
