#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "xtq/error.hpp"
#include "xtq/estimator.hpp"
#include "xtq/sparse.hpp"

namespace xtq {

/// Inputs to the combined model-error bound. Defaults follow the usual
/// shot share (2% of events) and a 90% confidence level.
struct BoundInputs {
    double M = 192;
    double N = 620'000;
    double alpha = 0.10;
    double p_g = 0.02;
    double t_inf_true = 0.9;
    double g_inf_hat = 0.0;
    double t_inf_hat = 0.0;
    int k = 1;
};

struct BoundBreakdown {
    double stat_g = 0.0;
    double stat_T = 0.0;
    double statistical = 0.0;
    double numerical = 0.0;
    double total = 0.0;
    double samples_per_state_g = 0.0;  // p_g N / M
    double samples_per_state_T = 0.0;  // (1 - p_g) N / M
    bool underpowered = false;         // fewer than one sample per state for either estimate
};

namespace detail {

inline void check_counts(double M, double N, double alpha) {
    if (!(M >= 1.0)) throw DomainError("M must be >= 1");
    if (!(N > 0.0)) throw DomainError("N must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
}

inline void check_norm(double t, const char* what) {
    if (!(t >= 0.0 && t < 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1)");
}

}  // namespace detail

inline double samples_per_state_g(double M, double N, double p_g) { return p_g * N / M; }
inline double samples_per_state_T(double M, double N, double p_g) { return (1.0 - p_g) * N / M; }

/// Hoeffding + union bound over M entries of g, each an average of p_g N / M Bernoullis.
inline double bound_g(double M, double N, double p_g, double alpha) {
    detail::check_counts(M, N, alpha);
    if (!(p_g > 0.0 && p_g <= 1.0)) throw DomainError("p_g must lie in (0, 1]");
    return std::sqrt(std::log(2.0 * M / alpha) / (2.0 * samples_per_state_g(M, N, p_g)));
}

/// Hoeffding + union bound over the M^2 entries of T, summed along a row.
inline double bound_T(double M, double N, double p_g, double alpha) {
    detail::check_counts(M, N, alpha);
    if (!(p_g >= 0.0 && p_g < 1.0)) throw DomainError("p_g must lie in [0, 1)");
    return M * std::sqrt(std::log(2.0 * M * M / alpha) / (2.0 * samples_per_state_T(M, N, p_g)));
}

inline BoundBreakdown theorem_bound(const BoundInputs& in) {
    detail::check_norm(in.t_inf_true, "||T||_inf");
    detail::check_norm(in.t_inf_hat, "||T_hat||_inf");
    detail::check_counts(in.M, in.N, in.alpha);
    if (!(in.p_g > 0.0 && in.p_g < 1.0)) throw DomainError("p_g must lie in (0, 1)");
    if (in.k < 1) throw DomainError("k must be >= 1");
    BoundBreakdown b;
    const double M = in.M;
    const double N = in.N;
    b.stat_g = std::sqrt(M) * std::sqrt(std::log(2.0 * M / in.alpha) / (2.0 * N)) / std::sqrt(in.p_g);
    b.stat_T = M * std::sqrt(M) * std::sqrt(std::log(2.0 * M * M / in.alpha) / (2.0 * N)) / std::sqrt(1.0 - in.p_g);
    b.statistical = (b.stat_g + b.stat_T) / (1.0 - in.t_inf_true);
    b.numerical = in.g_inf_hat * std::pow(in.t_inf_hat, in.k) / (1.0 - in.t_inf_hat);
    b.total = b.statistical + b.numerical;
    b.samples_per_state_g = samples_per_state_g(M, N, in.p_g);
    b.samples_per_state_T = samples_per_state_T(M, N, in.p_g);
    b.underpowered = b.samples_per_state_g < 1.0 || b.samples_per_state_T < 1.0;
    return b;
}

/// Leading-order form: (p_g^{-1/2} + 1) / (1 - ||T||) * M^{3/2} sqrt(log(2M^2/alpha) / 2N).
inline double approx_bound(double M, double N, double p_g, double alpha, double t_inf) {
    detail::check_norm(t_inf, "||T||_inf");
    detail::check_counts(M, N, alpha);
    if (!(p_g > 0.0 && p_g < 1.0)) throw DomainError("p_g must lie in (0, 1)");
    return (1.0 / std::sqrt(p_g) + 1.0) / (1.0 - t_inf) * M * std::sqrt(M) *
           std::sqrt(std::log(2.0 * M * M / alpha) / (2.0 * N));
}

/// Grid size at which the transition term overtakes the goal term (N cancels).
inline double stat_crossover_m(double p_g, double alpha) {
    auto diff = [&](double M) {
        BoundInputs in;
        in.M = M;
        in.N = 1.0;
        in.alpha = alpha;
        in.p_g = p_g;
        in.t_inf_true = 0.0;
        auto b = theorem_bound(in);
        return b.stat_T - b.stat_g;
    };
    double lo = 1.0;
    double hi = 1e7;
    if (diff(lo) >= 0.0) return lo;
    for (int i = 0; i < 200 && hi - lo > 1e-10 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (diff(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Right side of the statistical split:
/// (||g - g_hat|| + ||(T - T_hat) xT_hat||) / (1 - ||T||).
struct StatisticalSplit {
    double err_g = 0.0;
    double err_T = 0.0;           // ||T - T_hat||_inf
    double err_T_weighted = 0.0;  // ||(T - T_hat) xT_hat||_inf
    double rhs = 0.0;
    double rhs_loose = 0.0;       // with ||T - T_hat|| * ||xT_hat|| in place of the weighted term
};

inline StatisticalSplit statistical_split(const CondensedModel& truth, const CondensedModel& estimate,
                                          std::span<const double> xt_hat) {
    detail::check_norm(truth.t_inf, "||T||_inf");
    StatisticalSplit s;
    s.err_g = inf_distance(truth.g, estimate.g);
    s.err_T = difference_inf_norm(truth.T, estimate.T);
    s.err_T_weighted = weighted_difference_norm(truth.T, estimate.T, xt_hat);
    s.rhs = (s.err_g + s.err_T_weighted) / (1.0 - truth.t_inf);
    s.rhs_loose = (s.err_g + s.err_T * inf_norm(xt_hat)) / (1.0 - truth.t_inf);
    return s;
}

/// How far the observed visits are from the uniform-visits assumption.
struct SampleCoverage {
    std::int64_t min_visits = 0;
    std::int64_t max_visits = 0;
    double mean_visits = 0.0;
    std::int64_t min_shots = 0;
    std::int64_t max_shots = 0;
    int states_without_shots = 0;
    int unvisited_states = 0;
};

inline SampleCoverage coverage(const StateCounts& c) {
    SampleCoverage out;
    if (c.size() == 0) return out;
    out.min_visits = out.max_visits = c.visits(0);
    out.min_shots = out.max_shots = c.shots(0);
    double total = 0.0;
    for (int s = 0; s < c.size(); ++s) {
        out.min_visits = std::min(out.min_visits, c.visits(s));
        out.max_visits = std::max(out.max_visits, c.visits(s));
        out.min_shots = std::min(out.min_shots, c.shots(s));
        out.max_shots = std::max(out.max_shots, c.shots(s));
        out.states_without_shots += c.shots(s) == 0;
        out.unvisited_states += c.visits(s) == 0;
        total += static_cast<double>(c.visits(s));
    }
    out.mean_visits = total / c.size();
    return out;
}

}  // namespace xtq
