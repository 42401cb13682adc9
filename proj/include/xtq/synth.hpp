#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "xtq/estimator.hpp"
#include "xtq/events.hpp"
#include "xtq/grid.hpp"
#include "xtq/rng.hpp"
#include "xtq/sampler.hpp"

namespace xtq {

/// Shape of the built-in ground truth. Distances are in the normalized pitch frame.
struct SyntheticTruthConfig {
    double move_sigma = 0.11;      // spread of the move kernel
    double forward_shift = 0.015;  // mean progression of a move along x
    double kernel_cutoff = 3.0;    // kernel truncated beyond this many sigmas
    double p_turn_base = 0.12;
    double p_turn_attack = 0.40;   // extra turnover risk, scaled by x^2
    double shot_exponent = 5.0;    // P(shot|s) = 0.5 x^e, xG = 0.5 x^(6-e)
    bool off_pitch_is_turnover = true;  // kernel mass landing outside the pitch loses the ball
};

/// Smooth ground-truth chain: g(s) = 0.25 x^6 at the cell center (shot probability
/// 0.5 x^5 times xG 0.5 x by default), Gaussian move kernel with forward drift, chain
/// starts weighted toward the own half.
inline GenerativeModel synthetic_truth(const PitchGrid& grid, const SyntheticTruthConfig& cfg = {}) {
    const int n = grid.size();
    GenerativeModel gen;
    gen.grid = grid;
    gen.p_shot.resize(n);
    gen.xg.resize(n);
    gen.p_turn.resize(n);
    gen.pi0.resize(n);
    std::vector<std::tuple<int, int, double>> trip;
    std::vector<std::pair<int, double>> row;
    double start_mass = 0.0;
    const double reach = cfg.kernel_cutoff * cfg.move_sigma;
    for (int s = 0; s < n; ++s) {
        const auto c = grid.cell_center(StateId{s});
        gen.p_shot[s] = 0.5 * std::pow(c.x, cfg.shot_exponent);
        gen.xg[s] = 0.5 * std::pow(c.x, 6.0 - cfg.shot_exponent);
        gen.p_turn[s] = cfg.p_turn_base + cfg.p_turn_attack * c.x * c.x;
        const double move_mass = 1.0 - gen.p_shot[s] - gen.p_turn[s];
        row.clear();
        double wsum = 0.0;
        double inside = 0.0;
        const int cx = s % grid.m_x();
        const int cy = s / grid.m_x();
        const int kx = static_cast<int>(std::ceil((reach + std::abs(cfg.forward_shift)) * grid.m_x())) + 1;
        const int ky = static_cast<int>(std::ceil(reach * grid.m_y())) + 1;
        for (int ty = cy - ky; ty <= cy + ky; ++ty) {
            for (int tx = cx - kx; tx <= cx + kx; ++tx) {
                const double dx = (tx + 0.5) / grid.m_x() - c.x - cfg.forward_shift;
                const double dy = (ty + 0.5) / grid.m_y() - c.y;
                const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.move_sigma * cfg.move_sigma));
                if (w < 1e-4) continue;
                wsum += w;
                if (tx < 0 || tx >= grid.m_x() || ty < 0 || ty >= grid.m_y()) continue;
                row.emplace_back(tx + grid.m_x() * ty, w);
                inside += w;
            }
        }
        if (row.empty()) {
            row.emplace_back(s, 1.0);
            wsum = inside = 1.0;
        }
        const double norm = cfg.off_pitch_is_turnover ? wsum : inside;
        double kept = 0.0;
        for (auto [t, w] : row) {
            trip.emplace_back(s, t, move_mass * w / norm);
            kept += move_mass * w / norm;
        }
        gen.p_turn[s] += move_mass - kept;
        gen.pi0[s] = 1.2 - c.x;
        start_mass += gen.pi0[s];
    }
    for (double& p : gen.pi0) p /= start_mass;
    gen.T = SparseMatrix::from_triplets(n, std::move(trip));
    return gen;
}

struct SynthDataset {
    std::vector<EventRecord> events;
    MinutesLedger ledger;
};

namespace detail {

inline constexpr int kSynthTeams = 20;
inline constexpr int kSquadSize = 11;
inline constexpr int kEventsPerMatch = 1600;

inline std::string synth_position(int k) {
    if (k == 0) return "GK";
    if (k <= 4) return "DF";
    if (k <= 8) return "MF";
    return "FW";
}

/// Preferred x per role; players are drawn near their zone.
inline double synth_zone(int k) {
    if (k == 0) return 0.05;
    if (k <= 4) return 0.3;
    if (k <= 8) return 0.55;
    return 0.8;
}

inline std::string synth_player(int team, int k) {
    return "T" + std::to_string(team) + "-P" + std::to_string(k);
}

/// Emits decorated EventRecords for chains drawn by ChainSampler.
struct SynthSink {
    const PitchGrid& grid;
    Rng& deco;
    std::vector<EventRecord>& out;
    std::array<double, kSquadSize> skill{};
    std::string match_id;
    std::string team_id;
    int team = 0;
    int possession = 0;
    double minute = 0.0;
    double minute_step = 0.0;
    PitchPoint carried{};
    bool have_carried = false;

    PitchPoint point_in(int s) {
        const int cx = s % grid.m_x();
        const int cy = s / grid.m_x();
        return {clamp_unit((cx + deco.uniform()) / grid.m_x()), clamp_unit((cy + deco.uniform()) / grid.m_y())};
    }

    std::string pick_player(double x) {
        std::array<double, kSquadSize> w{};
        double total = 0.0;
        for (int k = 0; k < kSquadSize; ++k) {
            const double d = x - synth_zone(k);
            w[k] = skill[k] * std::exp(-d * d / (2.0 * 0.15 * 0.15)) + 1e-3;
            total += w[k];
        }
        double u = deco.uniform() * total;
        for (int k = 0; k < kSquadSize; ++k) {
            if ((u -= w[k]) < 0.0) return synth_player(team, k);
        }
        return synth_player(team, kSquadSize - 1);
    }

    EventRecord base(int s) {
        EventRecord e;
        e.match_id = match_id;
        e.possession_id = std::to_string(possession);
        e.team_id = team_id;
        e.start = have_carried ? carried : point_in(s);
        have_carried = false;
        e.end = e.start;
        e.player_id = pick_player(e.start.x);
        e.minute_offset = minute;
        minute += minute_step;
        return e;
    }

    void start(int) { have_carried = false; }
    void shot(int s, bool goal) {
        EventRecord e = base(s);
        e.action_kind = ActionKind::shot;
        e.success = e.is_goal = goal;
        out.push_back(std::move(e));
    }
    void move(int s, int to) {
        EventRecord e = base(s);
        e.action_kind = deco.uniform() < 0.72 ? ActionKind::pass : ActionKind::dribble;
        e.end = point_in(to);
        e.success = true;
        carried = e.end;
        have_carried = true;
        out.push_back(std::move(e));
    }
    void turnover(int s) {
        EventRecord e = base(s);
        const double u = deco.uniform();
        if (e.start.x < 0.3 && u < 0.15) e.action_kind = ActionKind::clearance;
        else if (u < 0.2) e.action_kind = ActionKind::error;
        else if (u < 0.45) e.action_kind = ActionKind::dribble;
        else e.action_kind = ActionKind::pass;
        e.end = point_in(s);
        e.success = false;
        out.push_back(std::move(e));
    }
    void end(ChainEnd) {}
};

inline std::pair<int, int> synth_fixture(int match) {
    const int home = match % kSynthTeams;
    const int away = (home + 1 + (match / kSynthTeams) % (kSynthTeams - 1)) % kSynthTeams;
    return {home, away};
}

}  // namespace detail

/// Deterministic synthetic league drawn from synthetic_truth(grid): matches of about
/// 1600 events, 20 teams of 11 players, every player credited 90 minutes per match.
/// Exactly n_events records are returned.
inline SynthDataset synth_dataset(const PitchGrid& grid, std::int64_t n_events, std::uint64_t seed,
                                  const SyntheticTruthConfig& cfg = {}) {
    using namespace detail;
    SynthDataset data;
    if (n_events <= 0) return data;
    const GenerativeModel truth = synthetic_truth(grid, cfg);
    const ChainSampler sampler(truth);
    Rng chain_rng(derive_seed({seed, 1}));
    Rng deco_rng(derive_seed({seed, 2}));
    data.events.reserve(static_cast<std::size_t>(n_events) + kMaxChainEvents);

    std::array<std::array<double, kSquadSize>, kSynthTeams> skills{};
    {
        Rng skill_rng(derive_seed({seed, 3}));
        for (auto& team : skills) {
            for (double& s : team) s = 0.5 + skill_rng.uniform();
        }
    }

    SynthSink sink{grid, deco_rng, data.events, {}, "", "", 0, 0, 0.0, 95.0 / kEventsPerMatch, {}, false};
    int match = -1;
    std::size_t match_start = 0;
    int side = 0;
    auto open_match = [&] {
        ++match;
        match_start = data.events.size();
        char id[16];
        std::snprintf(id, sizeof id, "M%06d", match);
        sink.match_id = id;
        sink.possession = 0;
        sink.minute = 0.0;
        const auto [home, away] = synth_fixture(match);
        for (int t : {home, away}) {
            for (int k = 0; k < kSquadSize; ++k) data.ledger.add(synth_player(t, k), synth_position(k), 90.0);
        }
    };
    open_match();
    while (static_cast<std::int64_t>(data.events.size()) < n_events) {
        if (data.events.size() - match_start >= static_cast<std::size_t>(kEventsPerMatch)) open_match();
        const auto [home, away] = synth_fixture(match);
        sink.team = side == 0 ? home : away;
        sink.team_id = "T" + std::to_string(sink.team);
        sink.skill = skills[sink.team];
        ++sink.possession;
        sampler.sample(chain_rng, sink);
        side ^= 1;
    }
    data.events.resize(static_cast<std::size_t>(n_events));
    return data;
}

inline std::vector<EventRecord> synth_events(const PitchGrid& grid, std::int64_t n_events, std::uint64_t seed) {
    return synth_dataset(grid, n_events, seed).events;
}

}  // namespace xtq
