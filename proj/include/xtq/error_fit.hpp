#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xtq/error.hpp"
#include "xtq/normal.hpp"
#include "xtq/simulator.hpp"

namespace xtq {

/// Lognormal law of the model error:
///   log(error) = c + alpha_m log(M) - beta_n log(sqrt(N)) + eps,  eps ~ N(0, sigma2)
struct ErrorLaw {
    double c = -2.0916;
    double alpha_m = 1.0100;
    double beta_n = 1.0267;
    double sigma2 = 0.1782;
    double me_max = 0.0192;
    std::string source = "paper-table-4";

    double sigma() const { return std::sqrt(sigma2); }

    /// Mean of log(error) at (M, N).
    double log_median(double M, double N) const {
        return c + alpha_m * std::log(M) - beta_n * std::log(std::sqrt(N));
    }

    void validate() const {
        if (!(sigma2 >= 0.0)) throw ValidationError("law sigma2 must be >= 0");
        if (!(me_max > 0.0)) throw ValidationError("law me_max must be > 0");
        if (!std::isfinite(c) || !std::isfinite(alpha_m) || !std::isfinite(beta_n)) {
            throw ValidationError("law coefficients must be finite");
        }
    }
};

/// Reference law: OLS fit on 76 000 filtered simulated models trained from league data.
inline ErrorLaw reference_law() { return ErrorLaw{}; }

struct FitDiagnostics {
    double r2 = 0.0;
    double adj_r2 = 0.0;
    std::size_t n_obs = 0;
    std::size_t dropped_zero = 0;       // records with model_error == 0
    std::size_t excluded_by_filter = 0;
    std::array<double, 3> coef_stderr{};  // c, alpha_m, beta_n
    std::vector<double> residuals;
    std::vector<double> fitted;
    std::vector<std::pair<double, double>> qq_pairs;  // (theoretical, standardized residual)
    double pearson_err_g = 0.0;
    double pearson_err_T_weighted = 0.0;
    std::vector<int> obs_M;
    std::vector<std::int64_t> obs_N;
};

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    if (a.size() != b.size() || a.size() < 2) return 0.0;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

/// Clusters sample sizes that differ by less than 1% (replicates overshoot their
/// nominal N by up to one chain). Returns the cluster label (its smallest N) per input.
inline std::vector<std::int64_t> cluster_sample_sizes(std::span<const std::int64_t> ns) {
    std::vector<std::int64_t> sorted(ns.begin(), ns.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::map<std::int64_t, std::int64_t> label;
    std::int64_t current = -1;
    std::int64_t prev = -1;
    for (auto n : sorted) {
        if (current < 0 || static_cast<double>(n - prev) > 0.01 * static_cast<double>(prev)) current = n;
        label[n] = current;
        prev = n;
    }
    std::vector<std::int64_t> out;
    out.reserve(ns.size());
    for (auto n : ns) out.push_back(label[n]);
    return out;
}

/// OLS of log(model_error) on [1, log M, -log sqrt N] over records passing the
/// 445-filter, solved through a modified Gram-Schmidt QR of the design.
inline std::pair<ErrorLaw, FitDiagnostics> fit_error_law(std::span<const ReplicateRecord> records) {
    FitDiagnostics diag;
    std::vector<const ReplicateRecord*> used;
    for (const auto& r : records) {
        if (!r.passes_filter) {
            ++diag.excluded_by_filter;
            continue;
        }
        if (!(r.model_error > 0.0)) {
            ++diag.dropped_zero;
            continue;
        }
        used.push_back(&r);
    }
    if (used.size() < 10) {
        throw ValidationError("error-law fit needs at least 10 filtered records with positive error, got " +
                              std::to_string(used.size()));
    }
    {
        std::vector<std::int64_t> ns;
        std::vector<int> ms;
        for (auto* r : used) {
            ns.push_back(r->N);
            ms.push_back(r->M);
        }
        auto labels = cluster_sample_sizes(ns);
        std::sort(labels.begin(), labels.end());
        std::sort(ms.begin(), ms.end());
        if (std::unique(ms.begin(), ms.end()) - ms.begin() < 2) {
            throw ValidationError("rank-deficient design: all records share one grid size M");
        }
        if (std::unique(labels.begin(), labels.end()) - labels.begin() < 2) {
            throw ValidationError("rank-deficient design: all records share one sample size N");
        }
    }

    const std::size_t n = used.size();
    std::array<std::vector<double>, 3> q;
    for (auto& col : q) col.resize(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[0][i] = 1.0;
        q[1][i] = std::log(static_cast<double>(used[i]->M));
        q[2][i] = -0.5 * std::log(static_cast<double>(used[i]->N));
        y[i] = std::log(used[i]->model_error);
    }
    std::array<std::array<double, 3>, 3> R{};
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += q[k][i] * q[j][i];
            R[k][j] = dot;
            for (std::size_t i = 0; i < n; ++i) q[j][i] -= dot * q[k][i];
        }
        double norm = 0.0;
        for (double v : q[j]) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-10 * std::sqrt(static_cast<double>(n))) throw ValidationError("rank-deficient design");
        R[j][j] = norm;
        for (double& v : q[j]) v /= norm;
    }
    std::array<double, 3> qty{};
    for (int j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < n; ++i) qty[j] += q[j][i] * y[i];
    }
    std::array<double, 3> beta{};
    for (int j = 2; j >= 0; --j) {
        double acc = qty[j];
        for (int k = j + 1; k < 3; ++k) acc -= R[j][k] * beta[k];
        beta[j] = acc / R[j][j];
    }

    diag.n_obs = n;
    diag.residuals.resize(n);
    diag.fitted.resize(n);
    double rss = 0.0;
    const double ymean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double tss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = beta[0] + beta[1] * std::log(static_cast<double>(used[i]->M)) -
                         beta[2] * 0.5 * std::log(static_cast<double>(used[i]->N));
        diag.fitted[i] = f;
        diag.residuals[i] = y[i] - f;
        rss += diag.residuals[i] * diag.residuals[i];
        tss += (y[i] - ymean) * (y[i] - ymean);
    }
    ErrorLaw law;
    law.c = beta[0];
    law.alpha_m = beta[1];
    law.beta_n = beta[2];
    law.sigma2 = rss / static_cast<double>(n - 3);
    law.source = "fitted";
    diag.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    diag.adj_r2 = 1.0 - (1.0 - diag.r2) * static_cast<double>(n - 1) / static_cast<double>(n - 3);

    // Var(beta) = sigma2 (R^T R)^{-1} = sigma2 R^{-1} R^{-T}
    std::array<std::array<double, 3>, 3> rinv{};
    for (int j = 0; j < 3; ++j) {
        rinv[j][j] = 1.0 / R[j][j];
        for (int i = j - 1; i >= 0; --i) {
            double acc = 0.0;
            for (int k = i + 1; k <= j; ++k) acc += R[i][k] * rinv[k][j];
            rinv[i][j] = -acc / R[i][i];
        }
    }
    for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        for (int k = j; k < 3; ++k) v += rinv[j][k] * rinv[j][k];
        diag.coef_stderr[j] = std::sqrt(law.sigma2 * v);
    }

    const double sd = std::sqrt(law.sigma2);
    std::vector<double> standardized(diag.residuals);
    for (double& r : standardized) r = sd > 0.0 ? r / sd : 0.0;
    std::sort(standardized.begin(), standardized.end());
    diag.qq_pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        diag.qq_pairs.emplace_back(normal_quantile(p), standardized[i]);
    }

    std::vector<double> me, eg, etw;
    for (auto* r : used) {
        me.push_back(r->model_error);
        eg.push_back(r->err_g);
        etw.push_back(r->err_T_weighted);
        diag.obs_M.push_back(r->M);
        diag.obs_N.push_back(r->N);
    }
    diag.pearson_err_g = pearson(me, eg);
    diag.pearson_err_T_weighted = pearson(me, etw);
    return {law, diag};
}

struct GroupResiduals {
    std::int64_t key = 0;  // M, or the smallest N of the cluster
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    bool flagged = false;   // fewer than 5 observations
};

struct ResidualTable {
    std::vector<GroupResiduals> by_M;
    std::vector<GroupResiduals> by_N;
    double variance_ratio_M = 1.0;  // max/min group variance over unflagged groups
    double variance_ratio_N = 1.0;
};

namespace detail {

inline std::vector<GroupResiduals> group_residuals(std::span<const double> residuals,
                                                   std::span<const std::int64_t> keys, double& ratio) {
    std::map<std::int64_t, std::vector<double>> groups;
    for (std::size_t i = 0; i < residuals.size(); ++i) groups[keys[i]].push_back(residuals[i]);
    std::vector<GroupResiduals> out;
    double vmin = 0.0, vmax = 0.0;
    bool any = false;
    for (const auto& [key, vals] : groups) {
        GroupResiduals g;
        g.key = key;
        g.count = vals.size();
        g.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
        double ss = 0.0;
        for (double v : vals) ss += (v - g.mean) * (v - g.mean);
        g.variance = vals.size() > 1 ? ss / static_cast<double>(vals.size() - 1) : 0.0;
        g.flagged = vals.size() < 5;
        if (!g.flagged) {
            vmin = any ? std::min(vmin, g.variance) : g.variance;
            vmax = any ? std::max(vmax, g.variance) : g.variance;
            any = true;
        }
        out.push_back(g);
    }
    ratio = (any && vmin > 0.0) ? vmax / vmin : 1.0;
    return out;
}

}  // namespace detail

/// Residual mean and variance per grid size and per sample-size cluster.
inline ResidualTable residuals_by_group(const FitDiagnostics& diag) {
    ResidualTable t;
    std::vector<std::int64_t> mkeys(diag.obs_M.begin(), diag.obs_M.end());
    t.by_M = detail::group_residuals(diag.residuals, mkeys, t.variance_ratio_M);
    auto nkeys = cluster_sample_sizes(diag.obs_N);
    t.by_N = detail::group_residuals(diag.residuals, nkeys, t.variance_ratio_N);
    return t;
}

/// Quantile q of the lognormal error at (M, N).
inline double law_quantile(const ErrorLaw& law, double M, double N, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    if (!(M >= 1.0 && N >= 1.0)) throw DomainError("M and N must be >= 1");
    return std::exp(law.log_median(M, N) + normal_quantile(q) * law.sigma());
}

}  // namespace xtq
