// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "xtq/xtq.hpp"

using namespace xtq;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ErrorLaw bundled_law() {
    std::ifstream in(std::string(XTQ_DATA) + "/law_table4.json");
    if (!in) throw std::runtime_error("bundled law file missing");
    return read_law_json(in);
}

// Expected visits per chain: v = pi0 + T^T v.
std::vector<double> expected_visits(const GenerativeModel& gen) {
    const int n = gen.size();
    std::vector<double> v(gen.pi0), next(n);
    for (int it = 0; it < 100000; ++it) {
        next = gen.pi0;
        for (int s = 0; s < n; ++s) {
            auto cs = gen.T.row_cols(s);
            auto vs = gen.T.row_vals(s);
            for (std::size_t k = 0; k < cs.size(); ++k) next[cs[k]] += vs[k] * v[s];
        }
        const double d = inf_distance(next, v);
        v.swap(next);
        if (d < 1e-14) break;
    }
    return v;
}

double shot_share(const GenerativeModel& gen) {
    auto v = expected_visits(gen);
    double shots = 0.0, total = 0.0;
    for (int s = 0; s < gen.size(); ++s) {
        shots += v[s] * gen.p_shot[s];
        total += v[s];
    }
    return shots / total;
}

CondensedModel random_chain(Rng& rng, int m, double t_max) {
    CondensedModel c;
    c.grid = PitchGrid(1, m);
    c.g.resize(m);
    std::vector<std::tuple<int, int, double>> trip;
    for (int s = 0; s < m; ++s) {
        const double mass = t_max * rng.uniform();
        std::vector<std::pair<int, double>> row;
        double wsum = 0.0;
        for (int t = 0; t < m; ++t) {
            if (rng.uniform() < 0.3 || t == (s + 1) % m) {
                const double w = rng.uniform() + 1e-3;
                row.emplace_back(t, w);
                wsum += w;
            }
        }
        for (auto [t, w] : row) trip.emplace_back(s, t, mass * w / wsum);
        c.g[s] = (1.0 - mass) * rng.uniform();
    }
    c.T = SparseMatrix::from_triplets(m, std::move(trip));
    c.t_inf = c.T.inf_norm();
    return c;
}

Outcome planner_probability() {
    const auto v = quality_check(bundled_law(), 192, 620000);
    return {std::abs(v.probability_acceptable - 0.2209) <= 0.002,
            fmt("P(error <= me_max | M=192, N=620000) = %.4f (target 0.2209 +- 0.002)", v.probability_acceptable)};
}

Outcome planner_datasize() {
    const auto n = static_cast<double>(required_n(bundled_law(), 192));
    return {std::abs(n - 3'348'000.0) <= 0.01 * 3'348'000.0, fmt("required_n(M=192) = %.0f (target 3348000 +- 1%%)", n)};
}

Outcome solver_oracle() {
    Rng rng(derive_seed({0xacce, 3}));
    double worst_gap = 0.0;
    double worst_slack = -1e300;
    int trials = 0;
    for (; trials < 200; ++trials) {
        const int m = 1 + static_cast<int>(rng.below(50));
        auto chain = random_chain(rng, m, 0.95);
        const auto exact = direct_solve(chain);
        const double g_inf = inf_norm(chain.g);
        auto [xt, rep] = value_iterate(chain, {}, [&](int k, std::span<const double> x) {
            worst_slack = std::max(worst_slack, inf_distance(x, exact) - truncation_bound(g_inf, chain.t_inf, k));
        });
        worst_gap = std::max(worst_gap, inf_distance(xt.xt, exact));
    }
    const bool ok = worst_gap <= 1e-9 && worst_slack <= 1e-12;
    return {ok, fmt("%d chains: max |VI - direct| = %.2e, max (truncation error - bound) = %.2e", trials, worst_gap,
                    worst_slack)};
}

// Small generative chain with a high shot share and ||T||_inf <= t_max, so the bound is informative.
GenerativeModel random_generator(Rng& rng, PitchGrid grid, double t_max) {
    const int m = grid.size();
    GenerativeModel gen;
    gen.grid = grid;
    gen.pi0.assign(m, 1.0 / m);
    std::vector<std::tuple<int, int, double>> trip;
    for (int s = 0; s < m; ++s) {
        const double shot = 0.2 + 0.15 * rng.uniform();
        const double move = t_max * rng.uniform();
        gen.p_shot.push_back(shot);
        gen.xg.push_back(0.05 + 0.45 * rng.uniform());
        gen.p_turn.push_back(1.0 - shot - move);
        std::vector<double> w(m);
        double total = 0.0;
        for (double& x : w) total += (x = rng.uniform());
        for (int t = 0; t < m; ++t) trip.emplace_back(s, t, move * w[t] / total);
    }
    gen.T = SparseMatrix::from_triplets(m, std::move(trip));
    gen.validate(1e-9);
    return gen;
}

Outcome theorem_coverage() {
    const double alpha = 0.10;
    const std::vector<PitchGrid> grids{PitchGrid(2, 2), PitchGrid(3, 2), PitchGrid(3, 3), PitchGrid(4, 3)};
    Rng rng(derive_seed({0xacce, 3}));
    std::vector<TruthModel> truths;
    std::vector<double> pg;
    for (const auto& g : grids) {
        truths.push_back(prepare_truth(random_generator(rng, g, 0.5)));
        pg.push_back(shot_share(truths.back().gen));
    }
    int exceed = 0, prop2_fail = 0, vacuous = 0;
    double worst_ratio = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto& truth = truths[t % truths.size()];
        const std::int64_t n = 20000 + 5000 * (t % 9);
        auto d = run_replicate_detailed(truth, n, derive_seed({0xacce, 4, static_cast<std::uint64_t>(t)}));
        const double err = inf_distance(truth.xt.xt, d.xt.xt);
        auto split = statistical_split(truth.condensed, d.condensed, d.xt.xt);
        if (err > split.rhs + 1e-12) ++prop2_fail;
        BoundInputs in;
        in.M = truth.gen.size();
        in.N = static_cast<double>(d.record.N);
        in.alpha = alpha;
        in.p_g = pg[t % truths.size()];
        in.t_inf_true = truth.condensed.t_inf;
        in.g_inf_hat = d.xt.g_inf;
        in.t_inf_hat = d.xt.t_inf;
        in.k = d.xt.iterations;
        auto b = theorem_bound(in);
        if (err > b.total) ++exceed;
        if (b.total >= 1.0) ++vacuous;
        worst_ratio = std::max(worst_ratio, err / b.total);
    }
    const double rate = static_cast<double>(exceed) / trials;
    return {rate <= alpha && prop2_fail == 0,
            fmt("%d trials: exceedance rate %.3f (<= %.2f), split inequality violations %d, vacuous bounds %d, "
                "max error/bound %.3f",
                trials, rate, alpha, prop2_fail, vacuous, worst_ratio)};
}

Outcome lognormal_self_consistency() {
    const ErrorLaw truth{-2.0916, 1.0100, 1.0267, 0.1782, 0.0192, "generator"};
    std::mt19937_64 gen(derive_seed({0xacce, 5}));
    std::normal_distribution<double> eps(0.0, std::sqrt(truth.sigma2));
    std::vector<ReplicateRecord> recs;
    for (const auto& g : standard_grids()) {
        for (double n : {1e5, 3.7e5, 1.3e6, 3.6e6, 1e7, 3e7, 1e8}) {
            for (int r = 0; r < 25; ++r) {
                ReplicateRecord rec;
                rec.M = g.size();
                rec.N = static_cast<std::int64_t>(n);
                rec.replicate_id = r;
                rec.model_error = std::exp(truth.log_median(rec.M, n) + eps(gen));
                rec.passes_filter = true;
                recs.push_back(rec);
            }
        }
    }
    auto [law, diag] = fit_error_law(recs);
    const double zc = std::abs(law.c - truth.c) / diag.coef_stderr[0];
    const double za = std::abs(law.alpha_m - truth.alpha_m) / diag.coef_stderr[1];
    const double zb = std::abs(law.beta_n - truth.beta_n) / diag.coef_stderr[2];
    const bool ok = zc <= 3 && za <= 3 && zb <= 3 && diag.r2 >= 0.8;
    return {ok, fmt("%zu records: c=%.4f alpha=%.4f beta=%.4f sigma2=%.4f, |z| = %.2f/%.2f/%.2f, R2=%.3f", diag.n_obs,
                    law.c, law.alpha_m, law.beta_n, law.sigma2, zc, za, zb, diag.r2)};
}

Outcome desk_study(int jobs, int replicates) {
    StudyPlan plan{{PitchGrid(8, 6), PitchGrid(12, 9), PitchGrid(16, 12), PitchGrid(24, 18)},
                   {100000, 370000, 1300000},
                   replicates,
                   20230101};
    std::vector<TruthModel> truths;
    for (const auto& g : plan.grids) truths.push_back(prepare_truth(synthetic_truth(g)));
    const auto recs = run_study(plan, truths, {jobs, 0});
    auto [law, diag] = fit_error_law(recs);
    const bool shape = law.alpha_m >= 0.7 && law.alpha_m <= 1.3 && law.beta_n >= 0.7 && law.beta_n <= 1.3;
    const bool ok = shape && diag.r2 >= 0.7 && diag.pearson_err_g > diag.pearson_err_T_weighted;
    return {ok, fmt("%zu records (%zu filtered out): c=%.3f alpha=%.3f beta=%.3f sigma2=%.3f R2=%.3f, "
                    "pearson(err_g)=%.3f pearson(err_T_weighted)=%.3f",
                    recs.size(), diag.excluded_by_filter, law.c, law.alpha_m, law.beta_n, law.sigma2, diag.r2,
                    diag.pearson_err_g, diag.pearson_err_T_weighted)};
}

Outcome bimodality(int jobs) {
    const PitchGrid grid(8, 6);
    auto gen = synthetic_truth(grid);
    const int high = grid.state_of({0.99, 0.01}).index;  // corner by the goal line
    const std::int64_t n_small = 20000;

    // isolate the corner: strong scoring state that is rarely reached
    gen.p_shot[high] = 0.95;
    gen.xg[high] = 0.95;
    gen.p_turn[high] = 0.05;
    gen.pi0[high] = 0.0;
    double pi_total = 0.0;
    for (double p : gen.pi0) pi_total += p;
    for (double& p : gen.pi0) p /= pi_total;
    auto rebuild = [&](double keep) {
        std::vector<std::tuple<int, int, double>> trip;
        auto out = gen;
        for (int s = 0; s < grid.size(); ++s) {
            auto cs = gen.T.row_cols(s);
            auto vs = gen.T.row_vals(s);
            for (std::size_t k = 0; k < cs.size(); ++k) {
                if (s == high) continue;
                if (cs[k] == high) {
                    trip.emplace_back(s, high, vs[k] * keep);
                    out.p_turn[s] += vs[k] * (1.0 - keep);
                } else {
                    trip.emplace_back(s, cs[k], vs[k]);
                }
            }
        }
        out.T = SparseMatrix::from_triplets(grid.size(), std::move(trip));
        return out;
    };
    auto probe = rebuild(1.0);
    const auto v = expected_visits(probe);
    double per_chain = 0.0;
    for (double x : v) per_chain += x;
    const double freq = v[high] / per_chain;  // visits to the corner per event
    const double keep = std::min(1.0, 1.5 / (static_cast<double>(n_small) * freq));
    auto truth = prepare_truth(rebuild(keep));
    const double g_high = truth.condensed.g[high];

    const int reps = 400;
    std::vector<double> errors(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        errors[r] = run_replicate(truth, n_small, derive_seed({0xacce, 7, r})).model_error;
    });
    int high_mode = 0, low_mode = 0;
    for (double e : errors) {
        high_mode += e >= 0.8 * g_high;
        low_mode += e < 0.4 * g_high;
    }
    const double frac = static_cast<double>(high_mode) / reps;
    return {frac >= 0.05, fmt("g(s_high)=%.3f, N=%lld: %.1f%% of %d replicates have error >= 0.8 g (second mode), "
                              "%.1f%% below 0.4 g",
                              g_high, static_cast<long long>(n_small), 100 * frac, reps, 100.0 * low_mode / reps)};
}

Outcome quartile_mechanics() {
    std::vector<QuartileReplicate> recs;
    const int n = 1500;
    const double hi = 0.05, threshold = 0.02;
    std::mt19937_64 gen(derive_seed({0xacce, 8}));
    std::uniform_real_distribution<double> u(0.0, hi);
    for (int i = 0; i < n; ++i) {
        QuartileReplicate q;
        q.model_error = u(gen);
        q.n_players = 47;
        const bool bad = q.model_error > threshold;
        q.n_wrong_quartile = bad ? 47 : 0;
        q.max_quartile_change = bad ? 3 : 0;
        recs.push_back(q);
    }
    const auto me = find_me_max(recs, 75);
    const auto& last = me.bins[static_cast<std::size_t>(me.last_acceptable_bin)];
    const double width = last.max_error - last.min_error;
    const auto& next = me.bins[static_cast<std::size_t>(me.last_acceptable_bin) + 1];
    const double bin_width = std::max(width, next.max_error - next.min_error);
    const bool step_ok = std::abs(me.me_max - threshold) <= bin_width;

    auto truth = prepare_truth(synthetic_truth(PitchGrid(16, 12)));
    auto data = synth_dataset(truth.gen.grid, 200000, derive_seed({0xacce, 9}));
    auto players = extract_player_actions(data.events, truth.gen.grid, data.ledger, {"MF", 300, ""});
    int wrong = 0;
    for (int r = 0; r < 20; ++r) {
        auto q = compare_quartiles(truth.xt.xt, truth.xt.xt, players);
        wrong += q.n_wrong_quartile + q.max_quartile_change;
    }
    return {step_ok && wrong == 0,
            fmt("step fixture: ME_max=%.5f vs planted %.3f (bin width %.5f); perfect model over %zu players: %d wrong",
                me.me_max, threshold, bin_width, players.size(), wrong)};
}

Outcome determinism() {
    const PitchGrid grid(16, 12);
    std::ostringstream a, b;
    {
        auto d1 = synth_dataset(grid, 100000, 7);
        auto d2 = synth_dataset(grid, 100000, 7);
        write_events(a, d1.events);
        write_minutes_csv(a, d1.ledger);
        write_events(b, d2.events);
        write_minutes_csv(b, d2.ledger);
    }
    const bool synth_ok = a.str() == b.str();

    std::istringstream plan_in(R"({"grids":["8x6","12x9"],"n_values":[20000,80000],"replicates":4,"master_seed":5})");
    auto plan = read_plan_json(plan_in);
    std::vector<TruthModel> truths;
    for (const auto& g : plan.grids) truths.push_back(prepare_truth(synthetic_truth(g)));
    std::ostringstream s1, s4, s_shuffled;
    write_records_csv(s1, run_study(plan, truths, {1, 0}));
    write_records_csv(s4, run_study(plan, truths, {4, 0}));
    write_records_csv(s_shuffled, run_study(plan, truths, {3, 99}));
    const bool sim_ok = s1.str() == s4.str() && s1.str() == s_shuffled.str();

    auto data = synth_dataset(PitchGrid(8, 6), 60000, 3);
    auto players = extract_player_actions(data.events, truths[0].gen.grid, data.ledger, {"MF", 300, ""});
    std::vector<std::int64_t> ns{10000, 40000};
    std::ostringstream q1, q3;
    write_quartile_csv(q1, run_quartile_study(truths[0], players, ns, 4, 13, 1));
    write_quartile_csv(q3, run_quartile_study(truths[0], players, ns, 4, 13, 3));
    const bool q_ok = q1.str() == q3.str();
    return {synth_ok && sim_ok && q_ok, fmt("synth %s, simulate (jobs 1/4/shuffled) %s, quartile-study (jobs 1/3) %s",
                                            synth_ok ? "identical" : "DIFFERS", sim_ok ? "identical" : "DIFFERS",
                                            q_ok ? "identical" : "DIFFERS")};
}

Outcome ratings_properties() {
    Rng rng(derive_seed({0xacce, 10}));
    int positive_fail = 0, balance_fail = 0, scale_fail = 0;
    const int cohorts = 1000;
    for (int c = 0; c < cohorts; ++c) {
        const int m = 2 + static_cast<int>(rng.below(40));
        XtModel model;
        model.grid = PitchGrid(m, 1);
        model.xt.resize(m);
        for (double& x : model.xt) x = 0.3 * rng.uniform();
        const int n_players = 1 + static_cast<int>(rng.below(80));
        std::vector<EventRecord> events;
        MinutesLedger ledger;
        std::vector<double> expect(n_players, 0.0);
        for (int p = 0; p < n_players; ++p) {
            char id[16];
            std::snprintf(id, sizeof id, "p%03d", p);
            const double mins = 300 + 3000 * rng.uniform();
            ledger.add(id, "MF", mins);
            const int actions = static_cast<int>(rng.below(30));
            double pos = 0.0;
            for (int k = 0; k < actions; ++k) {
                const int from = static_cast<int>(rng.below(m)), to = static_cast<int>(rng.below(m));
                const bool ok = rng.uniform() < 0.8;
                EventRecord e;
                e.player_id = id;
                e.action_kind = ActionKind::pass;
                e.start = model.grid.cell_center(StateId{from});
                e.end = model.grid.cell_center(StateId{to});
                e.success = ok;
                events.push_back(e);
                const double d = (ok ? model.xt[to] : 0.0) - model.xt[from];
                if (d > 0) pos += d;
            }
            expect[p] = 90.0 * pos / mins;
        }
        auto r = rate_players(model, events, ledger, {"MF", 300, ""});
        if (static_cast<int>(r.ratings.size()) != n_players) {
            ++positive_fail;
            continue;
        }
        std::vector<int> sizes(5, 0);
        for (int p = 0; p < n_players; ++p) {
            if (r.ratings[p].xt_per90 < 0.0 || std::abs(r.ratings[p].xt_per90 - expect[p]) > 1e-12) ++positive_fail;
            ++sizes[r.ratings[p].quartile];
        }
        // balance holds for distinct values; ties may only merge into a lower quartile
        std::vector<double> vals;
        for (const auto& x : r.ratings) vals.push_back(x.xt_per90);
        std::vector<double> uniq(vals);
        std::sort(uniq.begin(), uniq.end());
        const bool distinct = std::adjacent_find(uniq.begin(), uniq.end()) == uniq.end();
        if (distinct && n_players >= 4) {
            const int lo = *std::min_element(sizes.begin() + 1, sizes.end());
            const int hi = *std::max_element(sizes.begin() + 1, sizes.end());
            if (hi - lo > 1) ++balance_fail;
        }
        const double k = 0.05 + 20 * rng.uniform();
        XtModel scaled = model;
        for (double& x : scaled.xt) x *= k;
        auto rs = rate_players(scaled, events, ledger, {"MF", 300, ""});
        for (int p = 0; p < n_players; ++p) scale_fail += rs.ratings[p].quartile != r.ratings[p].quartile;
    }
    std::vector<int> sizes47(5, 0);
    for (int rank = 1; rank <= 47; ++rank) ++sizes47[quartile_from_rank(rank, 47)];
    const bool n47 = sizes47 == std::vector<int>{0, 12, 12, 12, 11};
    return {positive_fail == 0 && balance_fail == 0 && scale_fail == 0 && n47,
            fmt("%d cohorts: positive-part mismatches %d, unbalanced cohorts %d, scale-changed quartiles %d; "
                "n=47 sizes {%d,%d,%d,%d}",
                cohorts, positive_fail, balance_fail, scale_fail, sizes47[1], sizes47[2], sizes47[3], sizes47[4])};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"xtq acceptance run"};
    int jobs = 1;
    int replicates = 100;
    std::vector<int> only;
    app.add_option("--jobs", jobs, "Worker threads for the simulation criteria");
    app.add_option("--replicates", replicates, "Replicates per cell for the desk study");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"planner probability at one season", planner_probability},
        {"planner data size for M=192", planner_datasize},
        {"solver oracle equivalence", solver_oracle},
        {"bound coverage", theorem_coverage},
        {"lognormal self-consistency", lognormal_self_consistency},
        {"desk-scale study shape", [&] { return desk_study(jobs, replicates); }},
        {"bimodal model error", [&] { return bimodality(jobs); }},
        {"quartile-study mechanics", quartile_mechanics},
        {"determinism", determinism},
        {"ratings properties", ratings_properties},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << id << " [" << (o.pass ? "PASS" : "FAIL") << "] " << criteria[i].first << ": "
                  << o.detail << fmt(" (%.1fs)", secs) << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
