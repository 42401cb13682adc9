#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace xtq;

TEST(BoundG, DirectFormula) {
    const double expect = std::sqrt(std::log(40.0) / 20000.0);
    EXPECT_NEAR(bound_g(1, 10000, 1.0, 0.05), expect, 1e-15);
    EXPECT_NEAR(bound_g(1, 10000, 1.0, 0.05), 0.013585, 1e-5);
}

TEST(BoundG, Monotone) {
    EXPECT_LT(bound_g(10, 5000, 0.1, 1.0), bound_g(10, 5000, 0.1, 0.05));
    EXPECT_NEAR(bound_g(10, 10000, 0.1, 0.1) / bound_g(10, 5000, 0.1, 0.1), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_THROW(bound_g(0.5, 100, 0.1, 0.1), DomainError);
    EXPECT_THROW(bound_g(10, 100, 0.0, 0.1), DomainError);
    EXPECT_THROW(bound_g(10, 100, 0.1, 0.0), DomainError);
}

TEST(BoundT, DirectFormula) {
    EXPECT_NEAR(bound_T(1, 10000, 0.0, 0.05), std::sqrt(std::log(40.0) / 20000.0), 1e-15);
}

TEST(BoundT, Scaling) {
    const double M = 50, a = 0.1;
    const double ratio = bound_T(4 * M, 1e6, 0.02, a) / bound_T(M, 1e6, 0.02, a);
    const double expect = 8.0 * std::sqrt(std::log(2 * 16 * M * M / a) / std::log(2 * M * M / a));
    EXPECT_NEAR(ratio, expect, 1e-12);
    EXPECT_NEAR(bound_T(M, 4e6, 0.02, a) / bound_T(M, 1e6, 0.02, a), 0.5, 1e-14);
}

TEST(TheoremBound, NumericalTermVanishes) {
    BoundInputs in{192, 620000, 0.1, 0.02, 0.9, 0.2, 0.85, 400};
    auto b = theorem_bound(in);
    EXPECT_LT(b.numerical, 1e-12);
    EXPECT_NEAR(b.total, b.statistical, 1e-12);
    EXPECT_NEAR(b.stat_g, bound_g(192, 620000, 0.02, 0.1), 1e-12);
    EXPECT_NEAR(b.stat_T, bound_T(192, 620000, 0.02, 0.1), 1e-10);
}

TEST(TheoremBound, VacuousAtSeasonScale) {
    BoundInputs in;
    in.M = 192;
    in.N = 620000;
    in.p_g = 0.02;
    in.alpha = 0.10;
    in.t_inf_true = 0.9;
    EXPECT_GE(theorem_bound(in).total, 1.0);
}

TEST(TheoremBound, Crossover) {
    const double m_star = stat_crossover_m(0.02, 0.1);
    EXPECT_GT(m_star, 1.0);
    EXPECT_LT(m_star, 20.0);
    BoundInputs in;
    in.N = 1e6;
    in.M = std::max(1.0, m_star / 2);
    auto lo = theorem_bound(in);
    EXPECT_GT(lo.stat_g, lo.stat_T);
    in.M = m_star * 2;
    auto hi = theorem_bound(in);
    EXPECT_LT(hi.stat_g, hi.stat_T);
}

TEST(TheoremBound, Underpowered) {
    BoundInputs in;
    in.M = 1000;
    in.N = 10000;
    EXPECT_TRUE(theorem_bound(in).underpowered);
    in.N = 1e9;
    EXPECT_FALSE(theorem_bound(in).underpowered);
}

TEST(ApproxBound, SpotValueAndMonotonicity) {
    const double M = 192, N = 620000, pg = 0.02, a = 0.1, t = 0.9;
    const double expect = (1 / std::sqrt(pg) + 1) / (1 - t) * std::pow(M, 1.5) * std::sqrt(std::log(2 * M * M / a) / (2 * N));
    EXPECT_NEAR(approx_bound(M, N, pg, a, t), expect, 1e-9);
    for (double m = 10; m < 1000; m *= 1.5) {
        EXPECT_LT(approx_bound(m, N, pg, a, t), approx_bound(m * 1.1, N, pg, a, t));
        EXPECT_GT(approx_bound(m, N, pg, a, t), approx_bound(m, N * 1.1, pg, a, t));
    }
    for (double alpha : {0.01, 0.1, 0.5, 0.9}) EXPECT_LT(approx_bound(M, N, pg, 1.0, t), approx_bound(M, N, pg, alpha, t));
}

TEST(StatisticalSplit, InequalityHoldsOnSampledModels) {
    auto truth = prepare_truth(synthetic_truth(PitchGrid(4, 3)));
    for (int rep = 0; rep < 30; ++rep) {
        auto d = run_replicate_detailed(truth, 5000 + 2000 * rep, derive_seed({17, static_cast<std::uint64_t>(rep)}));
        auto split = statistical_split(truth.condensed, d.condensed, d.xt.xt);
        const double lhs = inf_distance(truth.xt.xt, d.xt.xt);
        EXPECT_LE(lhs, split.rhs + 1e-9) << rep;
        EXPECT_LE(split.rhs, split.rhs_loose + 1e-12);
    }
}

TEST(Coverage, CountsExtremes) {
    StateCounts c(3);
    c.add_shot(0, false);
    c.add_turnover(0);
    c.add_turnover(1);
    c.compact();
    auto cov = coverage(c);
    EXPECT_EQ(cov.max_visits, 2);
    EXPECT_EQ(cov.min_visits, 0);
    EXPECT_EQ(cov.unvisited_states, 1);
    EXPECT_EQ(cov.states_without_shots, 2);
}
