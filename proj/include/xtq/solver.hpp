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

struct XtModel {
    PitchGrid grid;
    std::vector<double> xt;
    int iterations = 0;
    double threshold = 0.0;
    double certified_bound = 0.0;  // g_inf * t_inf^k / (1 - t_inf)
    double g_inf = 0.0;
    double t_inf = 0.0;
};

struct SolveReport {
    bool converged = false;
    double final_delta = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double eps_stop = 1e-12;
    int max_iter = 10'000;
    // Keep iterating after the delta stop until the a-priori bound is this small. 0 disables.
    double bound_target = 1e-9;
};

/// Upper bound on ||xT - xT^(k)||_inf after k value-iteration steps.
inline double truncation_bound(double g_inf, double t_inf, int k) {
    if (!(t_inf >= 0.0 && t_inf < 1.0)) throw DomainError("truncation bound needs 0 <= ||T||_inf < 1");
    if (k < 1) throw DomainError("truncation bound needs k >= 1");
    return g_inf * std::pow(t_inf, k) / (1.0 - t_inf);
}

namespace detail {

inline void require_contracting(const CondensedModel& model) {
    if (model.t_inf < 1.0) return;
    std::string offenders;
    int listed = 0;
    for (int s = 0; s < model.size(); ++s) {
        if (model.T.row_sum(s) >= 1.0) {
            if (listed++ < 20) offenders += (offenders.empty() ? "" : ", ") + std::to_string(s);
        }
    }
    throw InfeasibleModel("||T||_inf = " + std::to_string(model.t_inf) + " >= 1; states with no exit: " + offenders);
}

}  // namespace detail

/// Value iteration xT <- g + T xT starting from xT = g, stopping on the inf-norm
/// step size. `observe(k, iterate)` is called for every iterate, starting at k = 1.
template <class Observer>
std::pair<XtModel, SolveReport> value_iterate(const CondensedModel& model, SolveOptions opts, Observer&& observe) {
    if (!(opts.eps_stop > 0.0)) throw ValidationError("eps_stop must be positive");
    if (opts.max_iter < 1) throw ValidationError("max_iter must be at least 1");
    if (!(opts.bound_target >= 0.0)) throw ValidationError("bound_target must be non-negative");
    detail::require_contracting(model);

    const auto n = model.g.size();
    const double g_inf = inf_norm(model.g);
    auto bound_ok = [&](int k) {
        return opts.bound_target == 0.0 || truncation_bound(g_inf, model.t_inf, k) <= opts.bound_target;
    };
    std::vector<double> current = model.g;
    std::vector<double> next(n);
    int k = 1;
    observe(k, std::span<const double>(current));
    double delta = inf_norm(current);  // xT^(0) = 0
    bool stopped = delta <= opts.eps_stop;
    while (!(stopped && bound_ok(k)) && k < opts.max_iter) {
        model.T.multiply(current, next);
        delta = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            next[s] += model.g[s];
            delta = std::max(delta, std::abs(next[s] - current[s]));
        }
        current.swap(next);
        ++k;
        stopped = stopped || delta <= opts.eps_stop;
        observe(k, std::span<const double>(current));
    }

    XtModel out;
    out.grid = model.grid;
    out.xt = std::move(current);
    for (double& v : out.xt) v = std::clamp(v, 0.0, 1.0);
    out.iterations = k;
    out.threshold = opts.eps_stop;
    out.g_inf = g_inf;
    out.t_inf = model.t_inf;
    out.certified_bound = truncation_bound(out.g_inf, out.t_inf, k);
    SolveReport report{stopped, delta, k};
    return {std::move(out), report};
}

inline std::pair<XtModel, SolveReport> value_iterate(const CondensedModel& model, SolveOptions opts = {}) {
    return value_iterate(model, opts, [](int, std::span<const double>) {});
}

/// Dense solve of (I - T) xT = g by Gaussian elimination with partial pivoting.
inline std::vector<double> direct_solve(const CondensedModel& model) {
    const int n = model.size();
    if (n > 2000) throw ValidationError("direct_solve is dense; M must be <= 2000");
    detail::require_contracting(model);
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * n + c]; };
    for (int r = 0; r < n; ++r) {
        at(r, r) = 1.0;
        auto cs = model.T.row_cols(r);
        auto vs = model.T.row_vals(r);
        for (std::size_t k = 0; k < cs.size(); ++k) at(r, cs[k]) -= vs[k];
    }
    std::vector<double> b = model.g;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
        }
        if (std::abs(at(pivot, col)) < 1e-300) throw InfeasibleModel("singular system in direct_solve");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(at(col, c), at(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / at(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = at(r, col) * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) at(r, c) -= f * at(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= at(r, c) * x[c];
        x[r] = acc / at(r, r);
    }
    return x;
}

/// ||(I - T) x - g||_inf
inline double residual_norm(const CondensedModel& model, std::span<const double> x) {
    std::vector<double> tx = model.T.multiply(x);
    double best = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) best = std::max(best, std::abs(x[s] - tx[s] - model.g[s]));
    return best;
}

}  // namespace xtq
