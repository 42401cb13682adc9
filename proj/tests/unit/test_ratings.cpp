#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace xtq;
using xtq::test::event;

namespace {

XtModel two_state_model() {
    XtModel m;
    m.grid = PitchGrid(2, 1);
    m.xt = {1.0 / 6.0, 1.0 / 3.0};
    return m;
}

constexpr PitchPoint kLeft{0.25, 0.5};
constexpr PitchPoint kRight{0.75, 0.5};

}  // namespace

TEST(ActionDelta, Examples) {
    auto m = two_state_model();
    EXPECT_DOUBLE_EQ(action_delta(m, StateId{1}, StateId{1}, false), 0.0);
    EXPECT_NEAR(action_delta(m, StateId{0}, StateId{1}, false), 1.0 / 6.0, 1e-15);
    EXPECT_DOUBLE_EQ(action_delta(m, StateId{0}, StateId{1}, false), -action_delta(m, StateId{1}, StateId{0}, false));
    EXPECT_DOUBLE_EQ(action_delta(m, StateId{1}, StateId{0}, true), -1.0 / 3.0);
    EXPECT_THROW(action_delta(m, StateId{2}, StateId{0}, false), ValidationError);
}

TEST(RatePlayers, PositivePartAndScaling) {
    auto m = two_state_model();
    std::vector<EventRecord> ev{
        event("up", ActionKind::pass, kLeft, kRight, true),     // +1/6
        event("up", ActionKind::pass, kRight, kLeft, true),     // -1/6, ignored
        event("down", ActionKind::pass, kRight, kLeft, true),   // -1/6
        event("down", ActionKind::dribble, kRight, kLeft, false),
        event("down", ActionKind::shot, kRight, kRight, true, true),
    };
    MinutesLedger ledger;
    ledger.add("up", "MF", 450);
    ledger.add("down", "MF", 900);
    auto r = rate_players(m, ev, ledger, {"MF", 300, ""});
    ASSERT_EQ(r.ratings.size(), 2u);
    EXPECT_EQ(r.ratings[0].player_id, "down");
    EXPECT_DOUBLE_EQ(r.ratings[0].xt_per90, 0.0);
    EXPECT_NEAR(r.ratings[1].xt_per90, 90.0 / 450.0 / 6.0, 1e-15);
    EXPECT_EQ(r.ratings[1].quartile, 3);
    auto signed_r = rate_players(m, ev, ledger, {"MF", 300, ""}, true);
    EXPECT_LT(signed_r.ratings[0].xt_per90, 0.0);
}

TEST(RatePlayers, CohortFilterAndMissingMinutes) {
    auto m = two_state_model();
    std::vector<EventRecord> ev{event("a", ActionKind::pass, kLeft, kRight, true),
                                event("ghost", ActionKind::pass, kLeft, kRight, true)};
    MinutesLedger ledger;
    ledger.add("a", "MF", 400);
    ledger.add("b", "MF", 200);
    ledger.add("c", "FW", 1000);
    auto r = rate_players(m, ev, ledger, {"MF", 300, ""});
    ASSERT_EQ(r.ratings.size(), 1u);
    EXPECT_EQ(r.players_without_minutes, 1u);
    EXPECT_EQ(r.warnings.size(), 1u);
    auto all = rate_players(m, ev, ledger, {"", 100, ""});
    EXPECT_EQ(all.ratings.size(), 3u);
}

TEST(RatePlayers, FourDistinctPlayers) {
    XtModel m;
    m.grid = PitchGrid(5, 1);
    m.xt = {0.0, 0.1, 0.2, 0.3, 0.4};
    std::vector<EventRecord> ev;
    MinutesLedger ledger;
    for (int p = 1; p <= 4; ++p) {
        ev.push_back(event("p" + std::to_string(p), ActionKind::pass, {0.1, 0.5}, {0.1 + 0.2 * p, 0.5}, true));
        ledger.add("p" + std::to_string(p), "MF", 900);
    }
    auto r = rate_players(m, ev, ledger, {"MF", 300, ""});
    std::vector<int> q;
    for (const auto& x : r.ratings) q.push_back(x.quartile);
    EXPECT_EQ(q, (std::vector<int>{1, 2, 3, 4}));
}

TEST(QuartileOf, Examples) {
    EXPECT_EQ(quartile_of(std::vector<double>{3.0}, 0), 1);
    std::vector<double> eight{1, 2, 3, 4, 5, 6, 7, 8};
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(quartile_of(eight, i), static_cast<int>(i / 2 + 1));
    std::vector<int> sizes(5, 0);
    for (int rank = 1; rank <= 47; ++rank) ++sizes[quartile_from_rank(rank, 47)];
    EXPECT_EQ(sizes, (std::vector<int>{0, 12, 12, 12, 11}));
    EXPECT_THROW(quartile_of(std::vector<double>{}, 0), ValidationError);
}

TEST(RankCohort, PropertiesOnRandomCohorts) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(80));
        std::vector<double> v(n);
        for (double& x : v) x = rng.uniform();
        auto a = rank_cohort(v);
        std::vector<int> sizes(5, 0);
        for (int q : a.quartile) ++sizes[q];
        const int lo = *std::min_element(sizes.begin() + 1, sizes.end());
        const int hi = *std::max_element(sizes.begin() + 1, sizes.end());
        if (n >= 4) {
            EXPECT_LE(hi - lo, 1) << n;
        }
        const double k = 0.1 + 10 * rng.uniform();
        std::vector<double> scaled(v);
        for (double& x : scaled) x *= k;
        EXPECT_EQ(rank_cohort(scaled).quartile, a.quartile);
    }
}

TEST(RankCohort, TiesShareQuartile) {
    std::vector<double> v{0.5, 0.1, 0.5, 0.9, 0.2, 0.5, 0.3, 0.4};
    auto r = rank_cohort(v);
    EXPECT_EQ(r.quartile[0], r.quartile[2]);
    EXPECT_EQ(r.quartile[0], r.quartile[5]);
    std::vector<int> ranks(r.rank);
    std::sort(ranks.begin(), ranks.end());
    for (int i = 0; i < 8; ++i) EXPECT_EQ(ranks[i], i + 1);
}

TEST(PlayerActions, ExtractAndScore) {
    PitchGrid g(2, 1);
    std::vector<EventRecord> ev{event("a", ActionKind::pass, kLeft, kRight, true),
                                event("a", ActionKind::pass, kRight, kLeft, false),
                                event("a", ActionKind::shot, kRight, kRight, true, true)};
    MinutesLedger ledger;
    ledger.add("a", "MF", 900);
    auto players = extract_player_actions(ev, g, ledger, {"MF", 300, ""});
    ASSERT_EQ(players.size(), 1u);
    EXPECT_EQ(players[0].moves, (std::vector<std::pair<int, int>>{{0, 1}, {1, -1}}));
    const std::vector<double> xt{1.0 / 6.0, 1.0 / 3.0};
    EXPECT_NEAR(xt_per90(xt, players[0]), 0.1 / 6.0, 1e-15);
    auto r = rate_players(two_state_model(), ev, ledger, {"MF", 300, ""});
    EXPECT_NEAR(r.ratings[0].xt_per90, xt_per90(xt, players[0]), 1e-15);
}
