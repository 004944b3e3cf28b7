#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "riskmenu/quadrature.hpp"
#include "riskmenu/welfare_bounds.hpp"

using namespace riskmenu;

namespace {

const auto kU = TypeDistribution::uniform(1.0, 10.0);
const auto kTwo = TypeDistribution::two_point(1.0, 10.0, 0.5);
const MarketParams kMarket(0.02, 0.06, 0.2, 3.0);

// (1/T) E[log CE(gamma, m*(G(gamma)))] by quadrature over the cells of G.
double direct_rate(const MarketParams& mp, const TypeDistribution& F, const ImpliedRiskAversionFn& G,
                   const std::vector<double>& breaks) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        total += interval_integral(
            F, [&](double g) { return log_certainty_equivalent(mp, g, merton_fraction(mp, G(g))); },
            breaks[i], breaks[i + 1], i + 2 == breaks.size());
    return total / mp.T();
}

} // namespace

TEST(WelfareRate, DegenerateAndIdentity) {
    const double sr = kMarket.sharpe_ratio();
    const auto P = TypeDistribution::point(4.0);
    EXPECT_NEAR(welfare_rate(kMarket, P, ImpliedRiskAversionFn::constant(4.0, 4.0, 4.0)),
                kMarket.r() + 0.5 * sr * sr / 4.0, 1e-15);
    EXPECT_NEAR(welfare_rate(kMarket, kU, ImpliedRiskAversionFn::identity()),
                kMarket.r() + 0.5 * sr * sr * std::log(10.0) / 9.0, 1e-15);
}

TEST(WelfareRate, MatchesDirectQuadratureAtOptimalStep) {
    const auto sol = solve_grouping(kMarket, kU, PlannerPreferences::logarithmic(), 2);
    const auto G = ImpliedRiskAversionFn::step(sol.partition, sol.targeted_types);
    EXPECT_NEAR(welfare_rate(kMarket, kU, G), direct_rate(kMarket, kU, G, sol.partition.boundaries()), 1e-10);
    const auto I = ImpliedRiskAversionFn::identity();
    EXPECT_NEAR(welfare_rate(kMarket, kU, I), direct_rate(kMarket, kU, I, {1.0, 10.0}), 1e-10);
}

TEST(EStar, KnownValues) {
    EXPECT_NEAR(e_star(kU, Partition({1.0, 10.0})), 1.0 / 5.5, 1e-15);
    const auto P = TypeDistribution::point(2.0);
    EXPECT_NEAR(e_star(P, Partition({2.0, 2.0})), 0.5, 1e-15);
    EXPECT_NEAR(e_star(P, Partition({1.0, 2.0, 3.0}), EmptyCells::contribute_zero), 0.5, 1e-15);
    EXPECT_THROW(e_star(P, Partition({1.0, 1.5, 3.0})), ZeroMassError);

    const double s = std::sqrt(10.0);
    const double P1 = (s - 1.0) / 9.0, M1 = (10.0 - 1.0) / 18.0;
    const double P2 = (10.0 - s) / 9.0, M2 = (100.0 - 10.0) / 18.0;
    const double exact = P1 * P1 / M1 + P2 * P2 / M2;
    const auto geo = geometric_partition(1.0, 10.0, 2);
    EXPECT_NEAR(e_star(kU, geo), exact, 1e-14);
    double quad = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double mass = quadrature::integrate([](double) { return 1.0 / 9.0; }, geo[i], geo[i + 1]);
        const double first = quadrature::integrate([](double g) { return g / 9.0; }, geo[i], geo[i + 1]);
        quad += mass * mass / first;
    }
    EXPECT_NEAR(e_star(kU, geo), quad, 1e-10);
}

TEST(EStarInfinity, KnownValues) {
    EXPECT_DOUBLE_EQ(e_star_infinity(TypeDistribution::point(2.0)), 0.5);
    EXPECT_NEAR(e_star_infinity(kU), std::log(10.0) / 9.0, 1e-15);
    EXPECT_NEAR(e_star_infinity(kTwo), 0.55, 1e-15);
}

TEST(BoundFactor, PrintedConstants) {
    EXPECT_NEAR(bound_factor(1.0, 10.0, 1), 3.025, 1e-12);
    EXPECT_NEAR(bound_factor(1.0, 10.0, 2), 1.3696, 5e-5);
    EXPECT_NEAR(bound_factor(1.0, 10.0, 4), 1.0852, 5e-5);
    EXPECT_DOUBLE_EQ(bound_factor(3.0, 3.0, 2), 1.0);
}

TEST(BoundFactor, MonotoneInMenuSizeAndScaleFree) {
    double prev = INFINITY;
    for (std::size_t n = 1; n <= 50; ++n) {
        const double f = bound_factor(1.0, 10.0, n);
        EXPECT_LT(f, prev);
        EXPECT_GT(f, 1.0);
        prev = f;
        for (double lambda : {0.1, 7.0}) EXPECT_NEAR(bound_factor(lambda, 10.0 * lambda, n), f, 1e-14);
    }
    EXPECT_NEAR(bound_factor(1.0, 10.0, 100000), 1.0, 1e-9);
}

TEST(MinMenuSize, KnownValues) {
    EXPECT_NEAR(min_menu_size(1.0, 10.0, 3.025), std::log(10.0) / std::log(9.1), 1e-14);
    EXPECT_NEAR(min_menu_size(1.0, 10.0, 3.025), 1.042, 1e-3);
    EXPECT_EQ(min_menu_size(2.0, 2.0, 1.5), 0.0);
    EXPECT_TRUE(std::isinf(min_menu_size(1.0, 10.0, 1.0)));
    EXPECT_THROW(min_menu_size(1.0, 10.0, 0.9), DomainError);
    // Any menu at least as large as the bound keeps the bound factor below R.
    for (double R : {1.05, 1.2, 1.5, 2.0, 3.025})
        for (double q : {2.0, 10.0, 1000.0}) {
            const auto n = static_cast<std::size_t>(std::ceil(min_menu_size(1.0, q, R)));
            EXPECT_LE(bound_factor(1.0, q, std::max<std::size_t>(n, 1)), R + 1e-12);
        }
}

TEST(MinMenuSize, MonotoneInToleranceAndSpread) {
    for (double R = 1.1; R < 5.0; R += 0.1) EXPECT_GT(min_menu_size(1.0, 10.0, R), min_menu_size(1.0, 10.0, R + 0.1));
    for (double q = 2.0; q < 1000.0; q *= 2.0) EXPECT_LT(min_menu_size(1.0, q, 1.5), min_menu_size(1.0, 2.0 * q, 1.5));
}

TEST(SharpnessWitness, AttainsBoundOnlyAtTwoPointLaw) {
    const auto w = sharpness_witness(1.0, 10.0);
    EXPECT_LT(w.gap, 1e-12);
    EXPECT_NEAR(e_star_infinity(w.distribution), 0.55, 1e-15);
    EXPECT_NEAR(mean(w.distribution), 5.5, 1e-15);
    EXPECT_NEAR(e_star_infinity(w.distribution) * mean(w.distribution), bound_factor(1.0, 10.0, 1), 1e-12);
    EXPECT_LT(sharpness_witness(1.0, 1.0 + 1e-6).gap, 1e-12);
    const double ratio = e_star_infinity(kU) * mean(kU);
    EXPECT_NEAR(ratio, 5.5 * std::log(10.0) / 9.0, 1e-14);
    EXPECT_NEAR(ratio, 1.4071, 1e-4);
    EXPECT_LT(ratio, 3.025);
}

class BoundSandwich : public ::testing::TestWithParam<std::size_t> {};

TEST_P(BoundSandwich, HoldsForUniformAndTwoPoint) {
    const std::size_t n = GetParam();
    for (const auto& F : {kU, kTwo}) {
        const auto rep = bound_report(F, n);
        const double e1 = 1.0 / mean(F);
        EXPECT_LE(e1, rep.e_value + 1e-15);
        EXPECT_LE(rep.e_value, rep.e_infinity + 1e-15);
        EXPECT_LE(rep.e_infinity, rep.bound_factor * rep.e_value + 1e-12);
        EXPECT_LE(rep.ratio, rep.bound_factor + 1e-12);
        EXPECT_GE(rep.bound_factor, 1.0);
    }
}

INSTANTIATE_TEST_SUITE_P(MenuSizes, BoundSandwich, ::testing::Values(1, 2, 3, 4));

TEST(BoundProperties, OptimalPartitionBeatsGeometric) {
    const auto F = TypeDistribution::density({{1.0, 2.0}, {2.0, 1.0}, {10.0, 0.2}});
    for (std::size_t n = 2; n <= 4; ++n) {
        const auto sol = solve_grouping(kMarket, F, PlannerPreferences::logarithmic(), n);
        EXPECT_GE(e_star(F, sol.partition), e_star(F, geometric_partition(1.0, 10.0, n)) - 1e-12);
    }
}

TEST(BoundProperties, OptimalStepRateEqualsEStar) {
    const double sr = kMarket.sharpe_ratio();
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto sol = solve_grouping(kMarket, kU, PlannerPreferences::logarithmic(), n);
        const auto G = ImpliedRiskAversionFn::step(sol.partition, sol.targeted_types);
        EXPECT_NEAR(welfare_rate(kMarket, kU, G), kMarket.r() + 0.5 * sr * sr * e_star(kU, sol.partition), 1e-10);
    }
}

TEST(BoundProperties, TwoCellEStarMatchesExhaustiveSearch) {
    const auto F = TypeDistribution::density({{1.0, 2.0}, {2.0, 1.0}, {10.0, 0.2}});
    const double e2 = bound_report(F, 2).e_value;
    double best = 0.0;
    for (int k = 1; k < 9000; ++k) best = std::max(best, e_star(F, Partition({1.0, 1.0 + 1e-3 * k, 10.0})));
    EXPECT_LE(best, e2 + 1e-12);
    EXPECT_GE(best, e2 - 1e-6);
}
