#include "oracles.hpp"

#include <meq/densities.hpp>

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

using namespace meq;

TEST(Densities, WindowFractionCountsHits)
{
    const auto t = index_trace::from_predicate(100, [](std::size_t i) { return i % 2 == 0; });
    EXPECT_DOUBLE_EQ(window_fraction(t, 0, 9), 0.5);
    EXPECT_DOUBLE_EQ(window_fraction(t, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(window_fraction(t, 1, 1), 0.0);
    EXPECT_DOUBLE_EQ(window_fraction(t, 0, 2), 2.0 / 3.0);
    EXPECT_THROW(window_fraction(t, 5, 4), std::out_of_range);
    EXPECT_THROW(window_fraction(t, 0, 100), std::out_of_range);
}

TEST(Densities, SquaresHaveDensityZero)
{
    const std::size_t n = 1000000;
    const auto t = index_trace::from_predicate(n, [](std::size_t i) {
        const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(i))));
        return r * r == i;
    });
    const auto small = density_estimate(index_trace::from_predicate(100, [&](std::size_t i) { return t[i]; }),
                                        std::vector<std::size_t>{100});
    EXPECT_DOUBLE_EQ(small.upper, 0.10); // 0,1,4,...,81
    const auto d = density_estimate(t);
    // the prefix fraction at n = N is about 1/sqrt(N)
    EXPECT_LE(d.partials.back().y, 0.002);
    // the estimate is the max over the tail half of the schedule, about 1/sqrt(n) at its first point
    const auto schedule = geometric_schedule(n);
    double brute = 0.0;
    for (std::size_t k = schedule.size() / 2; k < schedule.size(); ++k) {
        const std::size_t m = schedule[k];
        brute = std::max(brute, std::ceil(std::sqrt(static_cast<double>(m))) / static_cast<double>(m));
    }
    EXPECT_DOUBLE_EQ(d.upper, brute);
    EXPECT_GE(d.lower, 0.0);
}

TEST(Densities, EvensHaveDensityHalf)
{
    const auto t = index_trace::from_predicate(100000, [](std::size_t i) { return i % 2 == 0; });
    const auto d = density_estimate(t);
    EXPECT_NEAR(d.lower, 0.5, 1e-3);
    EXPECT_NEAR(d.upper, 0.5, 1e-3);
    const auto b = banach_density_estimate(t);
    EXPECT_NEAR(b.lower, 0.5, 1e-3);
    EXPECT_NEAR(b.upper, 0.5, 1e-3);
}

TEST(Densities, DyadicBlocksOscillateBetweenThirds)
{
    // F = ∪ [4^k, 2·4^k): prefix density swings between 1/3 and 2/3
    const std::size_t n = std::size_t{1} << 24;
    const auto t = index_trace::from_predicate(n, [](std::size_t i) { return i > 0 && std::bit_width(i) % 2 == 1; });
    std::vector<std::size_t> powers;
    for (std::size_t p = 1; p <= n; p *= 2) {
        powers.push_back(p);
    }
    // oracle: counts at 4^k and 2·4^k are geometric sums
    const double at_even = (std::pow(4.0, 12) - 1.0) / 3.0 / std::pow(2.0, 24);
    const double at_odd = (std::pow(4.0, 12) - 1.0) / 3.0 / std::pow(2.0, 23);
    EXPECT_NEAR(window_fraction(t, 0, n - 1), at_even, 1e-12);
    EXPECT_NEAR(window_fraction(t, 0, n / 2 - 1), at_odd, 1e-12);
    const auto d = density_estimate(t, powers);
    EXPECT_NEAR(d.lower, 1.0 / 3.0, 0.05);
    EXPECT_NEAR(d.upper, 2.0 / 3.0, 0.05);
}

TEST(Densities, FactorialSetSeparatesDensityFromBanachDensity)
{
    const std::size_t n = oracle::factorial(10);
    const auto iv = oracle::factorial_intervals(10);
    const auto t = parse_runs(oracle::runs_text(iv, n));
    ASSERT_EQ(t.size(), n);
    EXPECT_EQ(t, oracle::from_intervals(iv, n));
    const auto d = density_estimate(t);
    EXPECT_LE(d.upper, 0.01);
    const std::vector<std::size_t> lengths{1, 2, 4, 8};
    const auto b = banach_density_estimate(t, lengths);
    EXPECT_EQ(b.upper, 1.0);
    EXPECT_EQ(b.per_length.back().length, 8u);
    const std::size_t start = b.per_length.back().argmax;
    EXPECT_EQ(oracle::window_fraction(t, start, 8), 1.0);
}

TEST(Densities, SlidingWindowMatchesBruteForce)
{
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 1 + rng() % 2000;
        const double p = static_cast<double>(rng() % 1000) / 1000.0;
        std::bernoulli_distribution bit(p);
        std::vector<std::uint8_t> bits(n);
        for (auto& b : bits) {
            b = bit(rng);
        }
        const index_trace t(bits);
        for (std::size_t len : {std::size_t{1}, std::size_t{2}, n / 3 + 1, n}) {
            const auto w = sliding_window_extremes(t, len);
            const auto [lo, hi] = oracle::window_extremes(t, len);
            EXPECT_NEAR(w.min_fraction, lo, 1e-10);
            EXPECT_NEAR(w.max_fraction, hi, 1e-10);
            EXPECT_NEAR(oracle::window_fraction(t, w.argmax, len), hi, 1e-10);
            EXPECT_NEAR(oracle::window_fraction(t, w.argmin, len), lo, 1e-10);
        }
    }
}

TEST(Densities, EstimatesAreOrderedAndBounded)
{
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 256 + rng() % 20000;
        std::bernoulli_distribution bit(static_cast<double>(rng() % 100) / 100.0);
        std::vector<std::uint8_t> bits(n);
        for (auto& b : bits) {
            b = bit(rng);
        }
        const auto r = estimate_densities(index_trace(bits));
        EXPECT_LE(0.0, r.lower_banach);
        EXPECT_LE(r.lower_banach, r.lower_density + 1e-12);
        EXPECT_LE(r.lower_density, r.upper_density);
        EXPECT_LE(r.upper_density, r.upper_banach + 1e-12);
        EXPECT_LE(r.upper_banach, 1.0);
    }
}

TEST(Densities, RunsRoundTrip)
{
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::uint8_t> bits(rng() % 500 + 1);
        for (auto& b : bits) {
            b = rng() % 3 == 0;
        }
        const index_trace t(bits);
        EXPECT_EQ(parse_runs(to_runs(t)), t);
    }
    EXPECT_THROW(parse_runs(""), std::invalid_argument);
    EXPECT_THROW(parse_runs("3 x 2"), std::invalid_argument);
    EXPECT_THROW(parse_runs("3 -2"), std::invalid_argument);
}

TEST(Densities, RejectsBadSchedules)
{
    const index_trace t(10, true);
    EXPECT_THROW(density_estimate(t, std::vector<std::size_t>{0, 5}), std::invalid_argument);
    EXPECT_THROW(density_estimate(t, std::vector<std::size_t>{5, 3}), std::invalid_argument);
    EXPECT_THROW(density_estimate(t, std::vector<std::size_t>{11}), std::invalid_argument);
    EXPECT_THROW(banach_density_estimate(t, std::vector<std::size_t>{20}), std::invalid_argument);
}
