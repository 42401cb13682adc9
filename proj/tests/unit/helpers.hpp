#pragma once

#include <tuple>
#include <vector>

#include "xtq/xtq.hpp"

namespace xtq::test {

inline CondensedModel condensed(int m_x, int m_y, std::vector<double> g, std::vector<std::tuple<int, int, double>> trip) {
    CondensedModel c;
    c.grid = PitchGrid(m_x, m_y);
    c.g = std::move(g);
    c.T = SparseMatrix::from_triplets(c.grid.size(), std::move(trip));
    c.t_inf = c.T.inf_norm();
    return c;
}

/// Random substochastic chain on a 1 x m grid with ||T||_inf <= t_max.
inline CondensedModel random_chain(Rng& rng, int m, double t_max, double density = 0.3) {
    std::vector<double> g(m);
    std::vector<std::tuple<int, int, double>> trip;
    for (int s = 0; s < m; ++s) {
        const double row_mass = t_max * rng.uniform();
        std::vector<std::pair<int, double>> row;
        double w_total = 0.0;
        for (int t = 0; t < m; ++t) {
            if (rng.uniform() < density || t == (s + 1) % m) {
                const double w = rng.uniform() + 1e-3;
                row.emplace_back(t, w);
                w_total += w;
            }
        }
        for (auto [t, w] : row) trip.emplace_back(s, t, row_mass * w / w_total);
        g[s] = (1.0 - row_mass) * rng.uniform();
    }
    return condensed(1, m, std::move(g), std::move(trip));
}

inline EventRecord event(const std::string& player, ActionKind kind, PitchPoint a, PitchPoint b, bool success,
                         bool goal = false, const std::string& possession = "1", double minute = 0.0) {
    EventRecord e;
    e.match_id = "m";
    e.possession_id = possession;
    e.team_id = "A";
    e.player_id = player;
    e.minute_offset = minute;
    e.action_kind = kind;
    e.start = a;
    e.end = b;
    e.success = success;
    e.is_goal = goal;
    return e;
}

}  // namespace xtq::test
