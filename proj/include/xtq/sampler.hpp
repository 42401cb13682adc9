#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "xtq/estimator.hpp"
#include "xtq/events.hpp"
#include "xtq/rng.hpp"

namespace xtq {

inline constexpr int kMaxChainEvents = 500;

/// Precomputed cumulative tables for drawing possession chains from a model.
///
/// A sink receives the chain as callbacks:
///   start(s), shot(s, goal), move(s, to), turnover(s), end(ChainEnd)
class ChainSampler {
public:
    explicit ChainSampler(const GenerativeModel& gen) : n_(gen.size()) {
        gen.validate(1e-9);
        row_ptr_.reserve(static_cast<std::size_t>(n_) + 1);
        row_ptr_.push_back(0);
        p_shot_ = gen.p_shot;
        xg_ = gen.xg;
        move_end_.resize(n_);
        for (int s = 0; s < n_; ++s) {
            double acc = gen.p_shot[s];
            auto cs = gen.T.row_cols(s);
            auto vs = gen.T.row_vals(s);
            for (std::size_t k = 0; k < cs.size(); ++k) {
                if (vs[k] <= 0.0) continue;
                acc += vs[k];
                cum_.push_back(acc);
                target_.push_back(cs[k]);
            }
            move_end_[s] = acc;
            row_ptr_.push_back(cum_.size());
        }
        double acc = 0.0;
        start_cum_.reserve(n_);
        for (int s = 0; s < n_; ++s) {
            acc += gen.pi0[s];
            start_cum_.push_back(acc);
        }
    }

    int size() const noexcept { return n_; }

    /// Draws one chain into `sink`; returns the number of events.
    template <class Sink>
    int sample(Rng& rng, Sink& sink) const {
        int s = draw_start(rng);
        sink.start(s);
        for (int events = 1;; ++events) {
            const double u = rng.uniform();
            if (u < p_shot_[s]) {
                const bool goal = rng.uniform() < xg_[s];
                sink.shot(s, goal);
                sink.end(goal ? ChainEnd::goal : ChainEnd::shot_missed);
                return events;
            }
            if (u < move_end_[s]) {
                const auto first = cum_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[s]);
                const auto last = cum_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[s + 1]);
                auto it = std::upper_bound(first, last, u);
                if (it == last) --it;
                const int to = target_[static_cast<std::size_t>(it - cum_.begin())];
                sink.move(s, to);
                if (events >= kMaxChainEvents) {
                    sink.end(ChainEnd::truncated);
                    return events;
                }
                s = to;
                continue;
            }
            sink.turnover(s);
            sink.end(ChainEnd::turnover);
            return events;
        }
    }

private:
    int draw_start(Rng& rng) const {
        const double u = rng.uniform() * start_cum_.back();
        auto it = std::upper_bound(start_cum_.begin(), start_cum_.end(), u);
        if (it == start_cum_.end()) --it;
        return static_cast<int>(it - start_cum_.begin());
    }

    int n_;
    std::vector<double> p_shot_, xg_, move_end_, cum_, start_cum_;
    std::vector<int> target_;
    std::vector<std::size_t> row_ptr_;
};

/// Sink that accumulates StateCounts directly.
struct CountingSink {
    StateCounts& counts;

    void start(int s) { counts.add_start(s); }
    void shot(int s, bool goal) { counts.add_shot(s, goal); }
    void move(int s, int to) { counts.add_move(s, to); }
    void turnover(int s) { counts.add_turnover(s); }
    void end(ChainEnd) {}
};

/// Sink that materializes a PossessionChain with events at cell centers.
struct ChainBuildingSink {
    const PitchGrid& grid;
    PossessionChain chain;

    void start(int) { chain = PossessionChain{}; }
    void shot(int s, bool goal) {
        EventRecord e = base(s);
        e.action_kind = ActionKind::shot;
        e.success = goal;
        e.is_goal = goal;
        chain.events.push_back(std::move(e));
    }
    void move(int s, int to) {
        EventRecord e = base(s);
        e.action_kind = ActionKind::pass;
        e.end = grid.cell_center(StateId{to});
        e.success = true;
        chain.events.push_back(std::move(e));
    }
    void turnover(int s) {
        EventRecord e = base(s);
        e.action_kind = ActionKind::pass;
        e.success = false;
        chain.events.push_back(std::move(e));
    }
    void end(ChainEnd t) { chain.terminal = t; }

private:
    EventRecord base(int s) const {
        EventRecord e;
        e.start = grid.cell_center(StateId{s});
        e.end = e.start;
        return e;
    }
};

}  // namespace xtq
