#include <meq/catalog.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace meq;

namespace {

const std::vector<entry_ptr>& catalog()
{
    static const auto c = build_catalog();
    return c;
}

} // namespace

TEST(Catalog, IdsAreUniqueAndCoverTheFixtures)
{
    std::set<std::string> ids;
    for (const auto& e : catalog()) {
        EXPECT_TRUE(ids.insert(e->id).second) << e->id;
        EXPECT_EQ(e->expected.size(), property_names().size()) << e->id;
        EXPECT_FALSE(e->description.empty());
    }
    for (const char* id : {"rotation_golden", "rotation_third", "doubling", "doubling_binary", "full_shift", "sturmian_golden",
                           "thue_morse", "squaring", "squaring_unit", "rotation_x_squaring", "finite_cycle"}) {
        EXPECT_TRUE(ids.count(id)) << id;
    }
    EXPECT_THROW(find_entry(catalog(), "no_such_system"), std::invalid_argument);
}

TEST(Catalog, ExpectationsAreConsistent)
{
    for (const auto& e : catalog()) {
        const auto eq = e->expected.at("equicontinuous");
        const auto mean = e->expected.at("mean_eq");
        // equicontinuity implies mean equicontinuity; the three mean notions coincide
        if (eq == expectation::yes) {
            EXPECT_EQ(mean, expectation::yes) << e->id;
        }
        EXPECT_EQ(e->expected.at("eq_in_mean"), mean) << e->id;
        EXPECT_EQ(e->expected.at("weyl_mean_eq"), mean) << e->id;
        if (e->flags.isometry) {
            EXPECT_TRUE(e->system->is_isometry()) << e->id;
        }
    }
    EXPECT_EQ(find_entry(catalog(), "sturmian_golden")->expectation_level, "expected");
    EXPECT_EQ(find_entry(catalog(), "rotation_golden")->expectation_level, "proved");
}

TEST(Catalog, ProductExpectationIsConjunction)
{
    const auto a = find_entry(catalog(), "rotation_golden");
    const auto b = find_entry(catalog(), "full_shift");
    const auto p = make_product_entry(a, b);
    EXPECT_EQ(p->expected.at("mean_eq"), expectation::no);
    EXPECT_EQ(p->factors, (std::vector<std::string>{a->id, b->id}));
    const auto q = make_product_entry(a, find_entry(catalog(), "squaring"));
    EXPECT_EQ(q->expected.at("mean_eq"), expectation::yes);
}

TEST(Catalog, NearDiagonalPairsRespectDelta)
{
    for (const auto& e : catalog()) {
        const auto& sys = *e->system;
        if (!sys.caps().can_sample_near) {
            continue;
        }
        for (double delta : {0.5, 1e-2, 1e-5}) {
            if (delta <= sys.resolution()) {
                continue;
            }
            for (std::uint64_t seed = 0; seed < 16; ++seed) {
                const auto [x, y] = sample_pair_near_diagonal(*e, delta, seed);
                EXPECT_LT(sys.distance(x, y), delta) << e->id << " seed " << seed;
                EXPECT_TRUE(sys.contains(x) && sys.contains(y)) << e->id;
                const auto [x2, y2] = sample_pair_near_diagonal(*e, delta, seed);
                EXPECT_EQ(fingerprint(x), fingerprint(x2));
                EXPECT_EQ(fingerprint(y), fingerprint(y2));
            }
        }
    }
}

TEST(Catalog, BelowResolutionIsRejected)
{
    const auto& e = *find_entry(catalog(), "full_shift");
    EXPECT_THROW(sample_pair_near_diagonal(e, e.system->resolution() / 2, 1), std::domain_error);
}

TEST(Catalog, FlagsAndLabels)
{
    EXPECT_EQ(std::string(to_string(expectation::yes)), "True");
    EXPECT_EQ(std::string(to_string(expectation::unknown)), "Unknown");
    const auto& r = *find_entry(catalog(), "rotation_golden");
    EXPECT_TRUE(flag_value(r.flags, "minimal"));
    EXPECT_TRUE(flag_value(r.flags, "uniquely_ergodic"));
    EXPECT_FALSE(flag_value(find_entry(catalog(), "doubling")->flags, "uniquely_ergodic"));
    EXPECT_THROW(flag_value(r.flags, "shiny"), std::invalid_argument);
}

TEST(Catalog, DoublingUsesTwinBeyondTrustedHorizon)
{
    const auto& d = *find_entry(catalog(), "doubling");
    ASSERT_TRUE(d.twin);
    EXPECT_EQ(d.trusted_horizon, catalog_config{}.doubling_trusted_horizon);
}
