#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xtq/bounds.hpp"
#include "xtq/error.hpp"
#include "xtq/estimator.hpp"
#include "xtq/parallel.hpp"
#include "xtq/ratings.hpp"
#include "xtq/rng.hpp"
#include "xtq/sampler.hpp"
#include "xtq/solver.hpp"

namespace xtq {

/// Ground truth shared read-only by every replicate.
struct TruthModel {
    GenerativeModel gen;
    ChainSampler sampler;
    CondensedModel condensed;
    XtModel xt;
};

inline TruthModel prepare_truth(GenerativeModel gen, SolveOptions opts = {}) {
    ChainSampler sampler(gen);
    CondensedModel condensed = condense(gen);
    XtModel xt = value_iterate(condensed, opts).first;
    return TruthModel{std::move(gen), std::move(sampler), std::move(condensed), std::move(xt)};
}

/// The grid/data regimes kept for the error-law fit: M^{3/2} log(M) / sqrt(N) < 445.
inline double filter_statistic(double M, double N) { return M * std::sqrt(M) * std::log(M) / std::sqrt(N); }
inline bool passes_filter(double M, double N) { return filter_statistic(M, N) < 445.0; }

struct ReplicateRecord {
    int M = 0;
    std::int64_t N = 0;  // events actually sampled
    int replicate_id = 0;
    double model_error = 0.0;     // ||xT - xT_hat||_inf over surviving states
    double err_g = 0.0;           // ||g - g_hat||_inf
    double err_T = 0.0;           // ||T - T_hat||_inf
    double err_T_weighted = 0.0;  // ||(T - T_hat) xT_hat||_inf
    bool passes_filter = false;
    std::int64_t n_target = 0;
    int dropped_states = 0;

    friend bool operator==(const ReplicateRecord&, const ReplicateRecord&) = default;
};

inline PossessionChain sample_chain(const ChainSampler& sampler, const PitchGrid& grid, Rng& rng) {
    ChainBuildingSink sink{grid, {}};
    sampler.sample(rng, sink);
    return std::move(sink.chain);
}

inline PossessionChain sample_chain(const GenerativeModel& gen, Rng& rng) {
    return sample_chain(ChainSampler(gen), gen.grid, rng);
}

/// Chains drawn until at least n_events events exist; the last chain is kept whole.
inline std::vector<PossessionChain> sample_dataset(const GenerativeModel& gen, std::int64_t n_events, std::uint64_t seed) {
    std::vector<PossessionChain> chains;
    if (n_events <= 0) return chains;
    ChainSampler sampler(gen);
    Rng rng(seed);
    std::int64_t total = 0;
    while (total < n_events) {
        chains.push_back(sample_chain(sampler, gen.grid, rng));
        total += static_cast<std::int64_t>(chains.back().events.size());
    }
    return chains;
}

/// Same draw as sample_dataset, accumulated straight into counts.
inline StateCounts sample_counts(const ChainSampler& sampler, std::int64_t n_events, std::uint64_t seed) {
    StateCounts counts(sampler.size());
    if (n_events > 0) {
        Rng rng(seed);
        CountingSink sink{counts};
        std::int64_t total = 0;
        while (total < n_events) total += sampler.sample(rng, sink);
    }
    counts.compact();
    return counts;
}

/// A replicate with the estimated model kept for inspection.
struct ReplicateDetail {
    ReplicateRecord record;
    GenerativeModel estimated;
    CondensedModel condensed;
    XtModel xt;
    StateCounts counts;
};

inline ReplicateDetail run_replicate_detailed(const TruthModel& truth, std::int64_t n_events, std::uint64_t seed,
                                              int replicate_id = 0) {
    const auto& grid = truth.gen.grid;
    ReplicateDetail d;
    d.counts = sample_counts(truth.sampler, n_events, seed);
    d.estimated = estimate(d.counts, grid);
    d.condensed = condense(d.estimated);
    d.xt = value_iterate(d.condensed).first;

    auto& r = d.record;
    r.M = grid.size();
    r.N = d.counts.total_events();
    r.n_target = n_events;
    r.replicate_id = replicate_id;
    r.dropped_states = static_cast<int>(d.estimated.dropped.size());
    std::vector<char> dropped(static_cast<std::size_t>(grid.size()), 0);
    for (int s : d.estimated.dropped) dropped[s] = 1;
    for (int s = 0; s < grid.size(); ++s) {
        if (!dropped[s]) r.model_error = std::max(r.model_error, std::abs(truth.xt.xt[s] - d.xt.xt[s]));
    }
    r.err_g = inf_distance(truth.condensed.g, d.condensed.g);
    r.err_T = difference_inf_norm(truth.condensed.T, d.condensed.T);
    r.err_T_weighted = weighted_difference_norm(truth.condensed.T, d.condensed.T, d.xt.xt);
    r.passes_filter = passes_filter(r.M, static_cast<double>(std::max<std::int64_t>(r.N, 1)));
    return d;
}

/// Sample, count, estimate, condense, solve, and compare against the truth.
inline ReplicateRecord run_replicate(const TruthModel& truth, std::int64_t n_events, std::uint64_t seed,
                                     int replicate_id = 0) {
    return run_replicate_detailed(truth, n_events, seed, replicate_id).record;
}

inline ReplicateRecord run_replicate(const GenerativeModel& gen_truth, const XtModel& xt_truth, std::int64_t n_events,
                                     std::uint64_t seed) {
    TruthModel truth{gen_truth, ChainSampler(gen_truth), condense(gen_truth), xt_truth};
    return run_replicate(truth, n_events, seed);
}

struct StudyPlan {
    std::vector<PitchGrid> grids;
    std::vector<std::int64_t> n_values;
    int replicates = 1;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (grids.empty()) throw ValidationError("study plan needs at least one grid");
        if (n_values.empty()) throw ValidationError("study plan needs at least one N");
        if (replicates < 1) throw ValidationError("study plan needs replicates >= 1");
        for (auto n : n_values) {
            if (n < 0) throw ValidationError("study plan N must be >= 0");
        }
    }

    std::size_t total_records() const { return grids.size() * n_values.size() * static_cast<std::size_t>(replicates); }
};

inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t grid_idx, std::size_t n_idx, int replicate) {
    return derive_seed({master, grid_idx, n_idx, static_cast<std::uint64_t>(replicate)});
}

struct StudyOptions {
    int jobs = 1;
    /// Nonzero: execute jobs in a seeded random order (results are unaffected).
    std::uint64_t shuffle_order = 0;
};

/// One record per (grid, N, replicate), ordered by that key. Each replicate's seed is
/// derived from its key, so output is independent of worker count and schedule.
inline std::vector<ReplicateRecord> run_study(const StudyPlan& plan, std::span<const TruthModel> truths,
                                              StudyOptions opts = {}) {
    plan.validate();
    if (truths.size() != plan.grids.size()) throw ValidationError("need exactly one truth model per grid");
    for (std::size_t gi = 0; gi < truths.size(); ++gi) {
        if (!(truths[gi].gen.grid == plan.grids[gi])) {
            throw ValidationError("truth model grid does not match plan grid " + plan.grids[gi].label());
        }
    }
    const std::size_t per_grid = plan.n_values.size() * static_cast<std::size_t>(plan.replicates);
    const std::size_t total = plan.total_records();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    if (opts.shuffle_order != 0) {
        Rng rng(opts.shuffle_order);
        for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    std::vector<ReplicateRecord> out(total);
    parallel_for(total, opts.jobs, [&](std::size_t k) {
        const std::size_t job = order[k];
        const std::size_t gi = job / per_grid;
        const std::size_t ni = (job % per_grid) / static_cast<std::size_t>(plan.replicates);
        const int rep = static_cast<int>(job % static_cast<std::size_t>(plan.replicates));
        out[job] = run_replicate(truths[gi], plan.n_values[ni], replicate_seed(plan.master_seed, gi, ni, rep), rep);
    });
    return out;
}

struct QuartileReplicate {
    std::int64_t N = 0;
    int replicate_id = 0;
    double model_error = 0.0;
    int n_players = 0;
    int n_wrong_quartile = 0;
    int max_quartile_change = 0;

    friend bool operator==(const QuartileReplicate&, const QuartileReplicate&) = default;
};

/// Quartiles of the cohort under the reference and the estimated xT values, compared.
inline QuartileReplicate compare_quartiles(std::span<const double> xt_truth, std::span<const double> xt_est,
                                           std::span<const PlayerActions> players) {
    std::vector<double> ref(players.size());
    std::vector<double> est(players.size());
    for (std::size_t i = 0; i < players.size(); ++i) {
        ref[i] = xt_per90(xt_truth, players[i]);
        est[i] = xt_per90(xt_est, players[i]);
    }
    auto qr = rank_cohort(ref).quartile;
    auto qe = rank_cohort(est).quartile;
    QuartileReplicate out;
    out.n_players = static_cast<int>(players.size());
    for (std::size_t i = 0; i < players.size(); ++i) {
        const int change = std::abs(qr[i] - qe[i]);
        out.n_wrong_quartile += change != 0;
        out.max_quartile_change = std::max(out.max_quartile_change, change);
    }
    return out;
}

/// Resamples models from the truth and measures how many cohort players change quartile.
/// Player move sets stay fixed; only the model varies.
inline std::vector<QuartileReplicate> run_quartile_study(const TruthModel& truth, std::span<const PlayerActions> players,
                                                         std::span<const std::int64_t> n_values, int replicates,
                                                         std::uint64_t seed, int jobs = 1) {
    if (players.size() < 8) throw ValidationError("quartile study needs a cohort of at least 8 players");
    if (replicates < 1) throw ValidationError("quartile study needs replicates >= 1");
    const int m = truth.gen.grid.size();
    for (const auto& p : players) {
        if (!(p.minutes > 0.0)) throw ValidationError("player " + p.player_id + " has no minutes");
        for (auto [b, a] : p.moves) {
            if (b < 0 || b >= m || a >= m) throw ValidationError("player " + p.player_id + " has a move outside the grid");
        }
    }
    const std::size_t total = n_values.size() * static_cast<std::size_t>(replicates);
    std::vector<QuartileReplicate> out(total);
    parallel_for(total, jobs, [&](std::size_t job) {
        const std::size_t ni = job / static_cast<std::size_t>(replicates);
        const int rep = static_cast<int>(job % static_cast<std::size_t>(replicates));
        auto detail = run_replicate_detailed(truth, n_values[ni], derive_seed({seed, 0x71, ni, static_cast<std::uint64_t>(rep)}), rep);
        QuartileReplicate q = compare_quartiles(truth.xt.xt, detail.xt.xt, players);
        q.N = detail.record.N;
        q.replicate_id = rep;
        q.model_error = detail.record.model_error;
        out[job] = q;
    });
    return out;
}

/// Linear-interpolation percentile (the common "type 7" definition); q in [0, 1].
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw ValidationError("percentile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct MeMaxBin {
    std::size_t count = 0;
    double min_error = 0.0;
    double max_error = 0.0;
    double median_error = 0.0;
    double median_wrong_frac = 0.0;
    double p10_wrong_frac = 0.0;
    double high_wrong_frac = 0.0;   // percentile `prob` of the wrong-quartile fraction
    double high_max_change = 0.0;   // percentile `prob` of the largest quartile change
    bool acceptable = false;
};

struct MeMaxResult {
    double me_max = 0.0;
    int last_acceptable_bin = -1;
    std::vector<MeMaxBin> bins;
};

/// Bins replicates by model error (equal counts) and scans upward while a bin keeps
/// the `prob` percentile of the wrong-quartile fraction below `wrong_frac` with at
/// most one quartile change. ME_max is the median error of the last such bin.
inline MeMaxResult find_me_max(std::span<const QuartileReplicate> records, int n_bins = 75, double wrong_frac = 0.10,
                               double prob = 0.90) {
    if (n_bins < 1) throw ValidationError("need at least one bin");
    if (records.size() < static_cast<std::size_t>(n_bins)) {
        throw ValidationError("need at least " + std::to_string(n_bins) + " records to bin");
    }
    std::vector<QuartileReplicate> sorted(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.model_error < b.model_error; });
    MeMaxResult result;
    const std::size_t n = sorted.size();
    bool scanning = true;
    for (int b = 0; b < n_bins; ++b) {
        const std::size_t first = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(n_bins);
        const std::size_t last = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(n_bins);
        std::vector<double> errors, fracs, changes;
        for (std::size_t i = first; i < last; ++i) {
            errors.push_back(sorted[i].model_error);
            fracs.push_back(sorted[i].n_players > 0 ? static_cast<double>(sorted[i].n_wrong_quartile) / sorted[i].n_players : 0.0);
            changes.push_back(sorted[i].max_quartile_change);
        }
        MeMaxBin bin;
        bin.count = errors.size();
        bin.min_error = errors.front();
        bin.max_error = errors.back();
        bin.median_error = percentile(errors, 0.5);
        bin.median_wrong_frac = percentile(fracs, 0.5);
        bin.p10_wrong_frac = percentile(fracs, 0.1);
        bin.high_wrong_frac = percentile(fracs, prob);
        bin.high_max_change = percentile(changes, prob);
        bin.acceptable = bin.high_wrong_frac < wrong_frac && bin.high_max_change <= 1.0;
        if (scanning && bin.acceptable) {
            result.last_acceptable_bin = b;
            result.me_max = bin.median_error;
        } else {
            scanning = false;
        }
        result.bins.push_back(bin);
    }
    if (result.last_acceptable_bin < 0) throw std::runtime_error("no acceptable error level");
    return result;
}

}  // namespace xtq
