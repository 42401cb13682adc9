#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xtq/error.hpp"
#include "xtq/error_fit.hpp"
#include "xtq/grid.hpp"
#include "xtq/normal.hpp"

namespace xtq {

/// Events in one league season, for human-readable output only.
inline constexpr double kEventsPerSeason = 620'000.0;

struct PlanVerdict {
    double probability_acceptable = 0.0;  // P(error <= me_max)
    double q_error = 0.0;                 // error quantile at target_prob
    double target_prob = 0.9;
    bool acceptable = false;              // q_error <= me_max
};

/// Probability that a model with M states trained on N events is within me_max.
inline PlanVerdict quality_check(const ErrorLaw& law, double M, double N, double target_prob = 0.90) {
    if (!(M >= 1.0 && N >= 1.0)) throw ValidationError("M and N must be >= 1");
    law.validate();
    const double mu = law.log_median(M, N);
    const double sigma = law.sigma();
    PlanVerdict v;
    v.target_prob = target_prob;
    const double gap = std::log(law.me_max) - mu;
    if (sigma > 0.0) v.probability_acceptable = normal_cdf(gap / sigma);
    else v.probability_acceptable = gap >= 0.0 ? 1.0 : 0.0;
    v.q_error = std::exp(mu + normal_quantile(target_prob) * sigma);
    v.acceptable = v.q_error <= law.me_max;
    return v;
}

class NoAcceptableGrid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridCandidate {
    PitchGrid grid;
    double q_error = 0.0;
    bool acceptable = false;
};

struct GridChoice {
    PitchGrid grid;
    std::vector<GridCandidate> candidates;
};

/// Finest candidate grid whose error quantile at target_prob stays within me_max.
inline GridChoice select_grid(const ErrorLaw& law, double N, std::span<const PitchGrid> candidates,
                              double target_prob = 0.90) {
    if (candidates.empty()) throw ValidationError("select_grid needs at least one candidate");
    GridChoice out;
    int best = -1;
    std::string listing;
    for (const auto& g : candidates) {
        const double q = law_quantile(law, g.size(), N, target_prob);
        const bool ok = q <= law.me_max;
        out.candidates.push_back({g, q, ok});
        listing += "\n  " + g.label() + " (M=" + std::to_string(g.size()) + "): q=" + std::to_string(q);
        if (ok && (best < 0 || g.size() > out.candidates[best].grid.size())) {
            best = static_cast<int>(out.candidates.size()) - 1;
        }
    }
    if (best < 0) {
        throw NoAcceptableGrid("no candidate grid keeps the error quantile within me_max=" + std::to_string(law.me_max) +
                               listing);
    }
    out.grid = out.candidates[best].grid;
    return out;
}

/// Smallest N for which the target_prob error quantile at M is within me_max.
inline std::int64_t required_n(const ErrorLaw& law, double M, double target_prob = 0.90) {
    if (!(M >= 1.0)) throw ValidationError("M must be >= 1");
    if (!(law.beta_n > 0.0)) throw DomainError("beta_n <= 0: more data never lowers the error");
    const double z = normal_quantile(target_prob);
    const double log_n = (law.c + law.alpha_m * std::log(M) + z * law.sigma() - std::log(law.me_max)) / (law.beta_n / 2.0);
    if (log_n <= 0.0) return 1;
    const double n = std::exp(log_n);
    if (n > 9e18) throw DomainError("required N overflows");
    // absorb rounding so an exact N_0 maps back to N_0
    return static_cast<std::int64_t>(std::ceil(n * (1.0 - 1e-12)));
}

enum class SweepAxis { M, N };

struct QuantileCurve {
    SweepAxis axis = SweepAxis::N;
    double fixed = 0.0;
    std::vector<double> sweep;
    std::vector<double> q_levels;
    std::vector<std::vector<double>> values;  // values[i][j]: sweep[i], q_levels[j]
    double me_max = 0.0;
};

inline QuantileCurve quantile_curve(const ErrorLaw& law, SweepAxis axis, double fixed, std::span<const double> sweep,
                                    std::span<const double> q_levels) {
    if (sweep.empty()) throw ValidationError("quantile curve needs a nonempty sweep");
    if (q_levels.empty()) throw ValidationError("quantile curve needs at least one quantile level");
    QuantileCurve c;
    c.axis = axis;
    c.fixed = fixed;
    c.sweep.assign(sweep.begin(), sweep.end());
    c.q_levels.assign(q_levels.begin(), q_levels.end());
    c.me_max = law.me_max;
    for (double x : sweep) {
        std::vector<double> row;
        for (double q : q_levels) {
            row.push_back(axis == SweepAxis::M ? law_quantile(law, x, fixed, q) : law_quantile(law, fixed, x, q));
        }
        c.values.push_back(std::move(row));
    }
    return c;
}

/// Grid sizes of the standard simulation study (roughly 4:3 proportions).
inline std::vector<PitchGrid> standard_grids() {
    return {{8, 6},   {10, 8},  {12, 9},  {14, 11}, {16, 12}, {20, 15}, {24, 18},
            {28, 21}, {32, 24}, {40, 30}, {48, 36}, {56, 42}, {64, 48}};
}

}  // namespace xtq
