#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "xtq/error.hpp"
#include "xtq/events.hpp"
#include "xtq/grid.hpp"
#include "xtq/solver.hpp"

namespace xtq {

/// xT(after) - xT(before); a move that loses the ball lands on value 0.
inline double action_delta(const XtModel& model, StateId before, StateId after, bool terminal_turnover) {
    if (!model.grid.contains(before) || (!terminal_turnover && !model.grid.contains(after))) {
        throw ValidationError("action_delta: state outside grid " + model.grid.label());
    }
    const double to = terminal_turnover ? 0.0 : model.xt[after.index];
    return to - model.xt[before.index];
}

struct ActionDelta {
    std::string player_id;
    double delta = 0.0;
    bool kept = false;  // delta > 0
};

/// Deltas of every on-the-ball move. Shots are terminal and carry no delta.
inline std::vector<ActionDelta> action_deltas(const XtModel& model, std::span<const EventRecord> events) {
    std::vector<ActionDelta> out;
    for (const auto& e : events) {
        if (!is_move(e.action_kind)) continue;
        const auto before = model.grid.state_of(e.start);
        const auto after = model.grid.state_of(e.end);
        const double d = action_delta(model, before, after, !e.success);
        out.push_back({e.player_id, d, d > 0.0});
    }
    return out;
}

/// Position of each value in ascending order, 1-based; ties share the lowest rank.
/// `order` lists indices sorted by (value, tie-break key).
struct RankedCohort {
    std::vector<int> rank;      // distinct 1..n, ties ordered by tie-break key
    std::vector<int> quartile;  // 1..4, equal values always share a quartile
};

inline int quartile_from_rank(int rank, int n) { return 1 + std::min(3, (4 * (rank - 1)) / n); }

template <class TieLess>
RankedCohort rank_cohort(std::span<const double> values, TieLess tie_less) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return tie_less(a, b);
    });
    RankedCohort out{std::vector<int>(n), std::vector<int>(n)};
    int group_rank = 1;
    for (int pos = 0; pos < n; ++pos) {
        const int idx = order[pos];
        if (pos > 0 && values[order[pos - 1]] != values[idx]) group_rank = pos + 1;
        out.rank[idx] = pos + 1;
        out.quartile[idx] = quartile_from_rank(group_rank, n);
    }
    return out;
}

inline RankedCohort rank_cohort(std::span<const double> values) {
    return rank_cohort(values, [](int a, int b) { return a < b; });
}

/// Rank-based quartile of values[idx] within the list (1 = lowest quarter).
inline int quartile_of(std::span<const double> values, std::size_t idx) {
    if (values.empty()) throw ValidationError("quartile_of: empty list");
    if (idx >= values.size()) throw ValidationError("quartile_of: index out of range");
    return rank_cohort(values).quartile[idx];
}

struct CohortFilter {
    std::string position;  // empty: every position
    double min_minutes = 300.0;
    std::string competition;  // informational; events are expected to be pre-filtered
};

struct PlayerRating {
    std::string player_id;
    std::string position;
    double minutes = 0.0;
    double xt_per90 = 0.0;
    int cohort_rank = 0;
    int quartile = 0;
};

struct RatingReport {
    std::vector<PlayerRating> ratings;  // sorted by player_id
    std::size_t players_without_minutes = 0;
    std::vector<std::string> warnings;
};

/// xT created per 90: positive move deltas summed per player, scaled by 90 / minutes,
/// ranked inside the cohort. With `signed_sum` every delta counts (analysis aid only).
inline RatingReport rate_players(const XtModel& model, std::span<const EventRecord> events,
                                 const MinutesLedger& ledger, const CohortFilter& cohort, bool signed_sum = false) {
    if (!(cohort.min_minutes > 0.0)) throw ValidationError("cohort minimum minutes must be positive");
    std::map<std::string, double> sums;
    std::map<std::string, bool> unknown;
    for (const auto& d : action_deltas(model, events)) {
        if (!ledger.minutes.contains(d.player_id)) {
            unknown[d.player_id] = true;
            continue;
        }
        if (signed_sum || d.kept) sums[d.player_id] += d.delta;
    }
    RatingReport report;
    report.players_without_minutes = unknown.size();
    for (const auto& [id, _] : unknown) report.warnings.push_back("player " + id + " has events but no minutes entry");

    for (const auto& [id, mins] : ledger.minutes) {
        const auto pos_it = ledger.position.find(id);
        const std::string pos = pos_it == ledger.position.end() ? "" : pos_it->second;
        if (!cohort.position.empty() && pos != cohort.position) continue;
        if (mins < cohort.min_minutes || mins <= 0.0) continue;
        const auto it = sums.find(id);
        const double total = it == sums.end() ? 0.0 : it->second;
        report.ratings.push_back({id, pos, mins, 90.0 * total / mins, 0, 0});
    }
    std::vector<double> values;
    values.reserve(report.ratings.size());
    for (const auto& r : report.ratings) values.push_back(r.xt_per90);
    // ratings are in player_id order, so index order is the id tie-break
    auto ranked = rank_cohort(values);
    for (std::size_t i = 0; i < report.ratings.size(); ++i) {
        report.ratings[i].cohort_rank = ranked.rank[i];
        report.ratings[i].quartile = ranked.quartile[i];
    }
    return report;
}

/// A player's fixed move set in state space, re-scored under different models.
struct PlayerActions {
    std::string player_id;
    double minutes = 0.0;
    std::vector<std::pair<int, int>> moves;  // (before, after); after < 0 marks a lost ball
};

inline double xt_per90(std::span<const double> xt, const PlayerActions& p) {
    double total = 0.0;
    for (auto [before, after] : p.moves) {
        const double d = (after < 0 ? 0.0 : xt[after]) - xt[before];
        if (d > 0.0) total += d;
    }
    return 90.0 * total / p.minutes;
}

/// Converts raw events into per-player state-space move sets for the cohort.
inline std::vector<PlayerActions> extract_player_actions(std::span<const EventRecord> events, const PitchGrid& grid,
                                                         const MinutesLedger& ledger, const CohortFilter& cohort) {
    std::map<std::string, PlayerActions> by_player;
    for (const auto& [id, mins] : ledger.minutes) {
        const auto pos_it = ledger.position.find(id);
        const std::string pos = pos_it == ledger.position.end() ? "" : pos_it->second;
        if (!cohort.position.empty() && pos != cohort.position) continue;
        if (mins < cohort.min_minutes || mins <= 0.0) continue;
        by_player[id] = PlayerActions{id, mins, {}};
    }
    for (const auto& e : events) {
        if (!is_move(e.action_kind)) continue;
        auto it = by_player.find(e.player_id);
        if (it == by_player.end()) continue;
        const int before = grid.state_of(e.start).index;
        const int after = e.success ? grid.state_of(e.end).index : -1;
        it->second.moves.emplace_back(before, after);
    }
    std::vector<PlayerActions> out;
    for (auto& [_, p] : by_player) out.push_back(std::move(p));
    return out;
}

}  // namespace xtq
