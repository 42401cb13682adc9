#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace xtq;

namespace {

std::vector<ReplicateRecord> law_records(const ErrorLaw& law, int per_cell, std::uint64_t seed,
                                         std::vector<int> ms = {48, 80, 108, 154, 192, 300, 432},
                                         std::vector<std::int64_t> ns = {100000, 370000, 1300000, 3000000, 10000000}) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> eps(0.0, std::sqrt(law.sigma2));
    std::vector<ReplicateRecord> out;
    for (int m : ms) {
        for (auto n : ns) {
            for (int r = 0; r < per_cell; ++r) {
                ReplicateRecord rec;
                rec.M = m;
                rec.N = n;
                rec.replicate_id = r;
                rec.model_error = std::exp(law.log_median(m, static_cast<double>(n)) + (law.sigma2 > 0 ? eps(gen) : 0.0));
                rec.passes_filter = true;
                out.push_back(rec);
            }
        }
    }
    return out;
}

}  // namespace

TEST(FitErrorLaw, RecoversKnownLaw) {
    ErrorLaw truth;  // reference coefficients
    auto recs = law_records(truth, 30, 1);
    auto [law, diag] = fit_error_law(recs);
    EXPECT_NEAR(law.c, truth.c, 3 * diag.coef_stderr[0]);
    EXPECT_NEAR(law.alpha_m, truth.alpha_m, 3 * diag.coef_stderr[1]);
    EXPECT_NEAR(law.beta_n, truth.beta_n, 3 * diag.coef_stderr[2]);
    EXPECT_NEAR(law.sigma2, truth.sigma2, 0.03);
    EXPECT_GE(diag.r2, 0.8);
    EXPECT_EQ(law.source, "fitted");
    EXPECT_EQ(diag.n_obs, recs.size());
    EXPECT_EQ(diag.qq_pairs.size(), recs.size());
}

TEST(FitErrorLaw, ZeroNoiseExact) {
    ErrorLaw truth{-1.5, 0.9, 1.1, 0.0, 0.02, ""};
    auto [law, diag] = fit_error_law(law_records(truth, 1, 2));
    EXPECT_NEAR(law.c, -1.5, 1e-9);
    EXPECT_NEAR(law.alpha_m, 0.9, 1e-10);
    EXPECT_NEAR(law.beta_n, 1.1, 1e-10);
    EXPECT_NEAR(diag.r2, 1.0, 1e-12);
    for (double r : diag.residuals) EXPECT_NEAR(r, 0.0, 1e-10);
    auto table = residuals_by_group(diag);
    for (const auto& g : table.by_M) EXPECT_NEAR(g.variance, 0.0, 1e-18);
}

TEST(FitErrorLaw, FilterAndZerosExcluded) {
    auto recs = law_records(ErrorLaw{}, 2, 3);
    recs[0].passes_filter = false;
    recs[1].model_error = 0.0;
    auto [law, diag] = fit_error_law(recs);
    EXPECT_EQ(diag.excluded_by_filter, 1u);
    EXPECT_EQ(diag.dropped_zero, 1u);
    EXPECT_EQ(diag.n_obs, recs.size() - 2);
}

TEST(FitErrorLaw, RankDeficiency) {
    EXPECT_THROW(fit_error_law(law_records(ErrorLaw{}, 5, 4, {192})), ValidationError);
    EXPECT_THROW(fit_error_law(law_records(ErrorLaw{}, 5, 4, {48, 192}, {620000})), ValidationError);
    EXPECT_THROW(fit_error_law(law_records(ErrorLaw{}, 1, 4, {48}, {100000})), ValidationError);
}

TEST(ResidualsByGroup, Homoscedastic) {
    auto recs = law_records(ErrorLaw{}, 60, 5, {48, 108, 192, 432}, {100000, 370000, 1300000, 3000000});
    auto [law, diag] = fit_error_law(recs);
    auto t = residuals_by_group(diag);
    ASSERT_EQ(t.by_M.size(), 4u);
    ASSERT_EQ(t.by_N.size(), 4u);
    EXPECT_LT(t.variance_ratio_M, 2.0);
    EXPECT_LT(t.variance_ratio_N, 2.0);
}

TEST(ResidualsByGroup, SmallGroupFlagged) {
    auto recs = law_records(ErrorLaw{}, 10, 6, {48, 108}, {100000, 1300000});
    auto extra = law_records(ErrorLaw{}, 3, 7, {300}, {100000});
    recs.insert(recs.end(), extra.begin(), extra.end());
    auto [law, diag] = fit_error_law(recs);
    auto t = residuals_by_group(diag);
    bool seen = false;
    for (const auto& g : t.by_M) {
        if (g.key == 300) {
            EXPECT_TRUE(g.flagged);
            seen = true;
        } else {
            EXPECT_FALSE(g.flagged);
        }
    }
    EXPECT_TRUE(seen);
}

TEST(ClusterSampleSizes, OnePercent) {
    std::vector<std::int64_t> ns{100000, 100400, 370000, 370900, 100100};
    auto l = cluster_sample_sizes(ns);
    EXPECT_EQ(l, (std::vector<std::int64_t>{100000, 100000, 370000, 370000, 100000}));
}

TEST(Pearson, Basics) {
    std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
    EXPECT_NEAR(pearson(a, b), 1.0, 1e-15);
    EXPECT_NEAR(pearson(a, c), -1.0, 1e-15);
}

TEST(LawQuantile, Examples) {
    ErrorLaw law;
    EXPECT_NEAR(law_quantile(law, 192, 620000, 0.5), std::exp(law.log_median(192, 620000)), 1e-15);
    EXPECT_NEAR(law.log_median(192, 620000), -3.6284, 5e-4);
    EXPECT_NEAR(law_quantile(law, 192, 620000, 0.5), 0.0265, 5e-4);
    double prev = 0.0;
    for (double q = 0.01; q < 1.0; q += 0.01) {
        const double v = law_quantile(law, 192, 620000, q);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_THROW(law_quantile(law, 192, 620000, 1.0), DomainError);
}

TEST(Normal, CdfAndQuantile) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.2816), 0.90, 1e-4);
    for (double z = -5.0; z <= 5.0; z += 0.05) EXPECT_NEAR(normal_quantile(normal_cdf(z)), z, 1e-6);
    EXPECT_THROW(normal_quantile(0.0), DomainError);
    EXPECT_THROW(normal_quantile(1.0), DomainError);
}
