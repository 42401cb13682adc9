#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "xtq/error.hpp"
#include "xtq/events.hpp"
#include "xtq/grid.hpp"
#include "xtq/sparse.hpp"

namespace xtq {

struct MoveCount {
    int to = 0;
    std::int64_t n = 0;

    friend bool operator==(const MoveCount&, const MoveCount&) = default;
};

/// Per-state occurrence counts. Moves are buffered and compacted into sorted rows;
/// shards can be merged by addition in any order.
class StateCounts {
public:
    StateCounts() = default;

    explicit StateCounts(int n_states)
        : shots_(n_states, 0), goals_(n_states, 0), turnovers_(n_states, 0), move_totals_(n_states, 0),
          chain_starts_(n_states, 0), row_ptr_(static_cast<std::size_t>(n_states) + 1, 0) {}

    int size() const noexcept { return static_cast<int>(shots_.size()); }

    void add_start(int s) { ++chain_starts_[s]; }
    void add_shot(int s, bool goal) {
        ++shots_[s];
        if (goal) ++goals_[s];
    }
    void add_turnover(int s) { ++turnovers_[s]; }
    void add_move(int from, int to, std::int64_t n = 1) {
        pending_.push_back({from, to, n});
        move_totals_[from] += n;
        compact_ = false;
    }

    void merge(const StateCounts& other) {
        if (other.size() != size()) throw ValidationError("cannot merge counts over different grids");
        for (int s = 0; s < size(); ++s) {
            shots_[s] += other.shots_[s];
            goals_[s] += other.goals_[s];
            turnovers_[s] += other.turnovers_[s];
            chain_starts_[s] += other.chain_starts_[s];
            for (const auto& m : other.moves(s)) add_move(s, m.to, m.n);
        }
        for (const auto& p : other.pending_) add_move(p.from, p.to, p.n);
        compact();
    }

    /// Folds buffered moves into sorted per-row counts.
    void compact() {
        if (compact_) return;
        const int n = size();
        std::vector<std::size_t> fill(static_cast<std::size_t>(n) + 1, 0);
        // existing compacted entries go back into the pending buffer first
        for (int s = 0; s < n; ++s) {
            for (std::size_t k = row_ptr_[s]; k < row_ptr_[s + 1]; ++k) pending_.push_back({s, moves_[k].to, moves_[k].n});
        }
        for (const auto& p : pending_) ++fill[p.from + 1];
        for (int s = 0; s < n; ++s) fill[s + 1] += fill[s];
        std::vector<MoveCount> bucketed(pending_.size());
        {
            std::vector<std::size_t> cursor(fill.begin(), fill.end() - 1);
            for (const auto& p : pending_) bucketed[cursor[p.from]++] = {p.to, p.n};
        }
        moves_.clear();
        row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
        for (int s = 0; s < n; ++s) {
            auto first = bucketed.begin() + static_cast<std::ptrdiff_t>(fill[s]);
            auto last = bucketed.begin() + static_cast<std::ptrdiff_t>(fill[s + 1]);
            std::sort(first, last, [](const MoveCount& a, const MoveCount& b) { return a.to < b.to; });
            for (auto it = first; it != last; ++it) {
                if (moves_.size() > row_ptr_[s] && moves_.back().to == it->to) moves_.back().n += it->n;
                else moves_.push_back(*it);
            }
            row_ptr_[s + 1] = moves_.size();
        }
        pending_.clear();
        pending_.shrink_to_fit();
        compact_ = true;
    }

    std::int64_t shots(int s) const { return shots_[s]; }
    std::int64_t goals(int s) const { return goals_[s]; }
    std::int64_t turnovers(int s) const { return turnovers_[s]; }
    std::int64_t chain_starts(int s) const { return chain_starts_[s]; }
    std::int64_t move_total(int s) const { return move_totals_[s]; }
    std::int64_t visits(int s) const { return shots_[s] + move_totals_[s] + turnovers_[s]; }

    /// Requires compact().
    std::span<const MoveCount> moves(int s) const {
        if (!compact_) throw std::logic_error("StateCounts::moves requires compact()");
        return {moves_.data() + row_ptr_[s], row_ptr_[s + 1] - row_ptr_[s]};
    }

    std::int64_t move_count(int from, int to) const {
        for (const auto& m : moves(from)) {
            if (m.to == to) return m.n;
        }
        return 0;
    }

    std::int64_t total_events() const {
        std::int64_t n = 0;
        for (int s = 0; s < size(); ++s) n += visits(s);
        return n;
    }
    std::int64_t total_shots() const { return std::accumulate(shots_.begin(), shots_.end(), std::int64_t{0}); }
    std::int64_t total_moves() const { return std::accumulate(move_totals_.begin(), move_totals_.end(), std::int64_t{0}); }
    std::int64_t total_chains() const {
        return std::accumulate(chain_starts_.begin(), chain_starts_.end(), std::int64_t{0});
    }

private:
    struct PendingMove {
        int from;
        int to;
        std::int64_t n;
    };

    std::vector<std::int64_t> shots_, goals_, turnovers_, move_totals_, chain_starts_;
    std::vector<PendingMove> pending_;
    std::vector<MoveCount> moves_;
    std::vector<std::size_t> row_ptr_{0};
    bool compact_ = true;
};

/// The full simulatable chain: every state either shoots, moves, or turns the ball over.
struct GenerativeModel {
    PitchGrid grid;
    std::vector<double> p_shot;
    std::vector<double> xg;
    std::vector<double> p_turn;
    std::vector<double> pi0;
    SparseMatrix T;
    std::vector<int> dropped;  // states removed because they had no exit

    int size() const noexcept { return grid.size(); }

    double closure_error(int s) const { return std::abs(p_shot[s] + T.row_sum(s) + p_turn[s] - 1.0); }

    /// Throws ValidationError when a stochastic invariant is broken.
    void validate(double tol = 1e-12) const {
        const auto m = static_cast<std::size_t>(size());
        if (p_shot.size() != m || xg.size() != m || p_turn.size() != m || pi0.size() != m || T.size() != size()) {
            throw ValidationError("model vectors do not match grid size " + std::to_string(m));
        }
        auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        for (int s = 0; s < size(); ++s) {
            if (!in_unit(p_shot[s]) || !in_unit(xg[s]) || !in_unit(p_turn[s]) || !in_unit(pi0[s])) {
                throw ValidationError("probability outside [0,1] at state " + std::to_string(s));
            }
            for (double v : T.row_vals(s)) {
                if (!in_unit(v)) throw ValidationError("transition outside [0,1] in row " + std::to_string(s));
            }
            if (closure_error(s) > tol) {
                throw ValidationError("row " + std::to_string(s) + " does not sum to one");
            }
        }
        double total = std::accumulate(pi0.begin(), pi0.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9) throw ValidationError("pi0 does not sum to one");
    }
};

/// g = P(shot|s) * xG(s) together with the transition matrix.
struct CondensedModel {
    PitchGrid grid;
    std::vector<double> g;
    SparseMatrix T;
    double t_inf = 0.0;

    int size() const noexcept { return grid.size(); }
};

inline StateCounts count(std::span<const PossessionChain> chains, const PitchGrid& grid) {
    StateCounts c(grid.size());
    for (const auto& chain : chains) {
        if (chain.events.empty()) continue;
        c.add_start(grid.state_of(chain.events.front().start).index);
        for (const auto& e : chain.events) {
            int s = grid.state_of(e.start).index;
            if (e.action_kind == ActionKind::shot) c.add_shot(s, e.is_goal);
            else if (e.success) c.add_move(s, grid.state_of(e.end).index);
            else c.add_turnover(s);
        }
    }
    c.compact();
    return c;
}

namespace detail {

/// Removes states that can never leave the chain (no shot, no turnover) and
/// spreads the mass other states sent to them proportionally over their remaining outcomes.
inline void drop_exitless_states(GenerativeModel& gen) {
    const int n = gen.size();
    auto dense_rows = std::vector<std::vector<std::pair<int, double>>>(n);
    for (int s = 0; s < n; ++s) {
        auto cs = gen.T.row_cols(s);
        auto vs = gen.T.row_vals(s);
        for (std::size_t k = 0; k < cs.size(); ++k) dense_rows[s].emplace_back(cs[k], vs[k]);
    }
    std::vector<char> is_dropped(n, 0);
    bool changed = true;
    bool any = false;
    while (changed) {
        changed = false;
        for (int d = 0; d < n; ++d) {
            if (is_dropped[d] || gen.p_shot[d] + gen.p_turn[d] > 1e-15) continue;
            is_dropped[d] = 1;
            changed = any = true;
            gen.p_shot[d] = 0.0;
            gen.xg[d] = 0.0;
            gen.p_turn[d] = 1.0;
            dense_rows[d].clear();
            for (int s = 0; s < n; ++s) {
                auto& row = dense_rows[s];
                auto it = std::find_if(row.begin(), row.end(), [d](const auto& e) { return e.first == d; });
                if (it == row.end()) continue;
                double lost = it->second;
                row.erase(it);
                double keep = 1.0 - lost;
                if (keep <= 1e-15) continue;  // s fed only d; it is exitless now and dropped on the next pass
                gen.p_shot[s] /= keep;
                gen.p_turn[s] /= keep;
                for (auto& [c, v] : row) v /= keep;
            }
        }
    }
    if (!any) return;
    for (int d = 0; d < n; ++d) {
        if (is_dropped[d]) gen.dropped.push_back(d);
    }
    std::vector<std::tuple<int, int, double>> trip;
    for (int s = 0; s < n; ++s) {
        for (auto [c, v] : dense_rows[s]) trip.emplace_back(s, c, v);
    }
    gen.T = SparseMatrix::from_triplets(n, std::move(trip));
    double start_mass = 0.0;
    for (int s = 0; s < n; ++s) {
        if (is_dropped[s]) gen.pi0[s] = 0.0;
        start_mass += gen.pi0[s];
    }
    if (start_mass > 0.0) {
        for (double& p : gen.pi0) p /= start_mass;
    }
}

}  // namespace detail

/// Empirical-mean estimate. Unvisited states become immediate turnovers;
/// states with no shots get xG = 0; exitless states are dropped.
inline GenerativeModel estimate(const StateCounts& counts, const PitchGrid& grid) {
    const int n = grid.size();
    if (counts.size() != n) throw ValidationError("counts do not match grid " + grid.label());
    GenerativeModel gen;
    gen.grid = grid;
    gen.p_shot.assign(n, 0.0);
    gen.xg.assign(n, 0.0);
    gen.p_turn.assign(n, 1.0);
    gen.pi0.assign(n, 0.0);
    gen.T = SparseMatrix(n);
    std::vector<int> cols;
    std::vector<double> vals;
    for (int s = 0; s < n; ++s) {
        cols.clear();
        vals.clear();
        const auto visits = counts.visits(s);
        if (visits > 0) {
            const double v = static_cast<double>(visits);
            gen.p_shot[s] = static_cast<double>(counts.shots(s)) / v;
            gen.xg[s] = counts.shots(s) > 0 ? static_cast<double>(counts.goals(s)) / static_cast<double>(counts.shots(s)) : 0.0;
            gen.p_turn[s] = static_cast<double>(counts.turnovers(s)) / v;
            for (const auto& m : counts.moves(s)) {
                cols.push_back(m.to);
                vals.push_back(static_cast<double>(m.n) / v);
            }
        }
        gen.T.push_row(cols, vals);
    }
    const auto chains = counts.total_chains();
    for (int s = 0; s < n; ++s) {
        gen.pi0[s] = chains > 0 ? static_cast<double>(counts.chain_starts(s)) / static_cast<double>(chains) : 1.0 / n;
    }
    detail::drop_exitless_states(gen);
    return gen;
}

inline CondensedModel condense(const GenerativeModel& gen) {
    CondensedModel m;
    m.grid = gen.grid;
    m.g.resize(gen.p_shot.size());
    for (std::size_t s = 0; s < m.g.size(); ++s) m.g[s] = gen.p_shot[s] * gen.xg[s];
    m.T = gen.T;
    m.t_inf = m.T.inf_norm();
    return m;
}

/// Alternative estimator of g: goals / visits per state. Algebraically identical
/// to the shot-probability times xG product; kept for comparison experiments.
inline std::vector<double> direct_goal_vector(const StateCounts& counts) {
    std::vector<double> g(static_cast<std::size_t>(counts.size()), 0.0);
    for (int s = 0; s < counts.size(); ++s) {
        if (counts.visits(s) > 0) g[s] = static_cast<double>(counts.goals(s)) / static_cast<double>(counts.visits(s));
    }
    return g;
}

}  // namespace xtq
