// xtq: command-line front end for the xT estimation, error-law and planning library.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "xtq/xtq.hpp"

namespace fs = std::filesystem;
using xtq::detail::format_double;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw xtq::ValidationError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure("cannot write " + path);
    return out;
}

// plots always come with their data
std::string companion_csv(const std::string& svg_path) {
    fs::path p(svg_path);
    p.replace_extension(".csv");
    return p.string();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback = 0) {
    if (flag) return *flag;
    if (const char* env = std::getenv("XTQ_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw xtq::ValidationError("XTQ_SEED is not an unsigned integer");
    }
    return fallback;
}

xtq::ErrorLaw load_law(const std::string& path) {
    if (path.empty()) return xtq::reference_law();
    auto in = open_in(path);
    return xtq::read_law_json(in);
}

xtq::EventFormat parse_format(const std::string& s) {
    if (s == "neutral" || s == "jsonl") return xtq::EventFormat::neutral_jsonl;
    if (s == "statsbomb") return xtq::EventFormat::statsbomb_json;
    throw xtq::ValidationError("unknown event format '" + s + "' (neutral|statsbomb)");
}

xtq::ParseReport load_events(const std::string& path, xtq::EventFormat fmt = xtq::EventFormat::neutral_jsonl,
                             const std::string& match_id = "0") {
    auto in = open_in(path);
    auto report = xtq::parse_events(in, fmt, match_id);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    return report;
}

xtq::MinutesLedger load_minutes(const std::string& path) {
    auto in = open_in(path);
    return xtq::parse_minutes_csv(in);
}

xtq::XtModel solved_xt(const xtq::LoadedModel& m) {
    if (m.solved) return m.solved->xt;
    return xtq::value_iterate(xtq::condense(m.gen)).first;
}

void check_prob(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw xtq::ValidationError(std::string(name) + " must lie in (0, 1)");
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
    std::string grid = "16x12";
    std::int64_t events = 100000;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string minutes_out;
};

int run_synth(const SynthArgs& a) {
    const auto grid = xtq::PitchGrid::parse(a.grid);
    if (a.events < 1) throw xtq::ValidationError("--events must be >= 1");
    const auto data = xtq::synth_dataset(grid, a.events, resolve_seed(a.seed));
    auto out = open_out(a.out);
    xtq::write_events(out, data.events);
    if (!a.minutes_out.empty()) {
        auto m = open_out(a.minutes_out);
        xtq::write_minutes_csv(m, data.ledger);
    }
    std::cerr << "wrote " << data.events.size() << " events to " << a.out << '\n';
    return 0;
}

// ---- ingest --------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "statsbomb";
    std::string match_id;
    std::string out;
};

int run_ingest(const IngestArgs& a) {
    std::string match = a.match_id;
    if (match.empty()) match = fs::path(a.input).stem().string();
    const auto report = load_events(a.input, parse_format(a.format), match);
    auto out = open_out(a.out);
    xtq::write_events(out, report.events);
    std::cerr << "ingested " << report.events.size() << " events, skipped " << report.skipped_unknown << '\n';
    return 0;
}

// ---- train / solve -------------------------------------------------------

struct TrainArgs {
    std::string events;
    std::string grid = "16x12";
    std::string format = "neutral";
    std::string out;
};

int run_train(const TrainArgs& a) {
    const auto grid = xtq::PitchGrid::parse(a.grid);
    const auto report = load_events(a.events, parse_format(a.format));
    const auto assembled = xtq::assemble_chains(report.events);
    auto counts = xtq::count(assembled.chains, grid);
    const auto gen = xtq::estimate(counts, grid);
    if (!gen.dropped.empty()) {
        std::cerr << "warning: " << gen.dropped.size() << " states have no observed exit and were made dead ends\n";
    }
    auto out = open_out(a.out);
    xtq::write_model_json(out, gen, {counts.total_events(), "trained:" + fs::path(a.events).filename().string()});
    std::cerr << "trained " << grid.label() << " model from " << counts.total_events() << " events in "
              << assembled.chains.size() << " chains\n";
    return 0;
}

struct SolveArgs {
    std::string model;
    std::string out;
    double eps_stop = 1e-12;
    int max_iter = 10000;
    double bound_target = 1e-9;
};

int run_solve(const SolveArgs& a) {
    if (!(a.eps_stop > 0.0)) throw xtq::ValidationError("--eps-stop must be > 0");
    if (a.max_iter < 1) throw xtq::ValidationError("--max-iter must be >= 1");
    if (!(a.bound_target >= 0.0)) throw xtq::ValidationError("--bound-target must be >= 0");
    xtq::LoadedModel m;
    {
        auto in = open_in(a.model);
        m = xtq::read_model_json(in);
    }
    auto [xt, report] = xtq::value_iterate(xtq::condense(m.gen), {a.eps_stop, a.max_iter, a.bound_target});
    const std::string target = a.out.empty() ? a.model : a.out;
    {
        auto out = open_out(target);
        xtq::write_model_json(out, m.gen, m.meta, xtq::SolvedBlock{xt, report});
    }
    std::cout << "iterations " << xt.iterations << "\nfinal_delta " << format_double(report.final_delta)
              << "\ncertified_bound " << format_double(xt.certified_bound) << "\nconverged "
              << (report.converged ? "true" : "false") << '\n';
    if (!report.converged) std::cerr << "warning: iteration cap reached before eps_stop\n";
    return 0;
}

// ---- bounds --------------------------------------------------------------

int run_bounds(const xtq::BoundInputs& in) {
    const auto b = xtq::theorem_bound(in);
    std::cout << "{\"M\":" << format_double(in.M) << ",\"N\":" << format_double(in.N)
              << ",\"alpha\":" << format_double(in.alpha) << ",\"p_g\":" << format_double(in.p_g)
              << ",\"stat_g\":" << format_double(b.stat_g) << ",\"stat_T\":" << format_double(b.stat_T)
              << ",\"statistical\":" << format_double(b.statistical) << ",\"numerical\":" << format_double(b.numerical)
              << ",\"total\":" << format_double(b.total)
              << ",\"approx\":" << format_double(xtq::approx_bound(in.M, in.N, in.p_g, in.alpha, in.t_inf_true))
              << ",\"samples_per_state_g\":" << format_double(b.samples_per_state_g)
              << ",\"samples_per_state_T\":" << format_double(b.samples_per_state_T)
              << ",\"underpowered\":" << (b.underpowered ? "true" : "false") << "}\n";
    if (b.underpowered) std::cerr << "warning: fewer than one sample per state; the bound is vacuous\n";
    return 0;
}

// ---- simulate ------------------------------------------------------------

std::vector<xtq::TruthModel> load_truths(const std::vector<xtq::PitchGrid>& grids, const std::string& dir) {
    std::vector<xtq::TruthModel> truths;
    for (const auto& g : grids) {
        if (dir.empty()) {
            truths.push_back(xtq::prepare_truth(xtq::synthetic_truth(g)));
            continue;
        }
        const auto path = (fs::path(dir) / (g.label() + ".json")).string();
        auto in = open_in(path);
        auto loaded = xtq::read_model_json(in);
        if (!(loaded.gen.grid == g)) throw xtq::ValidationError(path + " holds a " + loaded.gen.grid.label() + " model");
        truths.push_back(xtq::prepare_truth(std::move(loaded.gen)));
    }
    return truths;
}

struct SimulateArgs {
    std::string plan;
    std::string truth_dir;
    std::string out;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& a) {
    if (a.jobs < 1) throw xtq::ValidationError("--jobs must be >= 1");
    xtq::StudyPlan plan;
    {
        auto in = open_in(a.plan);
        plan = xtq::read_plan_json(in);
    }
    plan.master_seed = resolve_seed(a.seed, plan.master_seed);
    const auto truths = load_truths(plan.grids, a.truth_dir);
    const auto records = xtq::run_study(plan, truths, {a.jobs, false});
    auto out = open_out(a.out);
    xtq::write_records_csv(out, records);
    std::cerr << "wrote " << records.size() << " replicate records to " << a.out << '\n';
    return 0;
}

// ---- quartile-study ------------------------------------------------------

struct QuartileArgs {
    std::string truth;
    std::string grid = "16x12";
    std::string players;
    std::string events;
    std::string minutes;
    std::string position = "MF";
    double min_minutes = 300.0;
    std::vector<std::int64_t> n_values{100000, 370000, 1300000};
    int replicates = 20;
    int jobs = 1;
    int bins = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_quartile(const QuartileArgs& a) {
    if (a.jobs < 1) throw xtq::ValidationError("--jobs must be >= 1");
    xtq::GenerativeModel gen;
    if (a.truth.empty()) {
        gen = xtq::synthetic_truth(xtq::PitchGrid::parse(a.grid));
    } else {
        auto in = open_in(a.truth);
        gen = xtq::read_model_json(in).gen;
    }
    const auto truth = xtq::prepare_truth(std::move(gen));
    std::vector<xtq::PlayerActions> players;
    if (!a.players.empty()) {
        auto in = open_in(a.players);
        players = xtq::read_players_jsonl(in);
    } else if (!a.events.empty() && !a.minutes.empty()) {
        const auto report = load_events(a.events);
        const auto ledger = load_minutes(a.minutes);
        players = xtq::extract_player_actions(report.events, truth.gen.grid, ledger, {a.position, a.min_minutes, ""});
    } else {
        throw xtq::ValidationError("quartile-study needs --players, or --events with --minutes");
    }
    for (auto n : a.n_values) {
        if (n < 1) throw xtq::ValidationError("--n values must be >= 1");
    }
    const auto records = xtq::run_quartile_study(truth, players, a.n_values, a.replicates, resolve_seed(a.seed), a.jobs);
    auto out = open_out(a.out);
    xtq::write_quartile_csv(out, records);
    std::cerr << "wrote " << records.size() << " quartile records for " << players.size() << " players\n";
    if (a.bins > 0) {
        const auto me = xtq::find_me_max(records, a.bins);
        if (me.last_acceptable_bin < 0) throw Failure("no acceptable error level");
        std::cout << "me_max " << format_double(me.me_max) << "\nlast_acceptable_bin " << me.last_acceptable_bin << '\n';
    }
    return 0;
}

// ---- fit -----------------------------------------------------------------

struct FitArgs {
    std::string records;
    std::string out;
    std::string diagnostics;
};

void write_diagnostics(const std::string& dir, const xtq::FitDiagnostics& diag) {
    fs::create_directories(dir);
    {
        auto out = open_out((fs::path(dir) / "residuals.csv").string());
        out << "M,N,fitted,residual\n";
        for (std::size_t i = 0; i < diag.residuals.size(); ++i) {
            out << diag.obs_M[i] << ',' << diag.obs_N[i] << ',' << format_double(diag.fitted[i]) << ','
                << format_double(diag.residuals[i]) << '\n';
        }
    }
    {
        auto out = open_out((fs::path(dir) / "qq.csv").string());
        out << "theoretical,standardized_residual\n";
        for (auto [t, s] : diag.qq_pairs) out << format_double(t) << ',' << format_double(s) << '\n';
    }
    const auto table = xtq::residuals_by_group(diag);
    {
        auto out = open_out((fs::path(dir) / "groups.csv").string());
        out << "axis,key,count,mean,variance,flagged\n";
        for (const auto& g : table.by_M) {
            out << "M," << g.key << ',' << g.count << ',' << format_double(g.mean) << ',' << format_double(g.variance) << ','
                << (g.flagged ? 1 : 0) << '\n';
        }
        for (const auto& g : table.by_N) {
            out << "N," << g.key << ',' << g.count << ',' << format_double(g.mean) << ',' << format_double(g.variance) << ','
                << (g.flagged ? 1 : 0) << '\n';
        }
    }
    xtq::svg::LinePlot qq;
    qq.title = "Normal QQ plot of log-error residuals";
    qq.x_label = "theoretical quantile";
    qq.y_label = "standardized residual";
    xtq::svg::Series pts{"residuals", {}, {}};
    xtq::svg::Series ref{"y = x", {}, {}};
    for (auto [t, s] : diag.qq_pairs) {
        pts.x.push_back(t);
        pts.y.push_back(s);
    }
    if (!diag.qq_pairs.empty()) {
        ref.x = {diag.qq_pairs.front().first, diag.qq_pairs.back().first};
        ref.y = ref.x;
    }
    qq.series = {pts, ref};
    auto svg = open_out((fs::path(dir) / "qq.svg").string());
    svg << xtq::svg::render(qq);
}

int run_fit(const FitArgs& a) {
    std::vector<xtq::ReplicateRecord> records;
    {
        auto in = open_in(a.records);
        records = xtq::read_records_csv(in);
    }
    auto [law, diag] = xtq::fit_error_law(records);
    {
        auto out = open_out(a.out);
        xtq::write_law_json(out, law);
    }
    std::cout << "c " << format_double(law.c) << " (se " << format_double(diag.coef_stderr[0]) << ")\n"
              << "alpha_m " << format_double(law.alpha_m) << " (se " << format_double(diag.coef_stderr[1]) << ")\n"
              << "beta_n " << format_double(law.beta_n) << " (se " << format_double(diag.coef_stderr[2]) << ")\n"
              << "sigma2 " << format_double(law.sigma2) << "\nr2 " << format_double(diag.r2) << "\nn_obs " << diag.n_obs
              << "\nexcluded_by_filter " << diag.excluded_by_filter << "\ndropped_zero " << diag.dropped_zero
              << "\npearson_err_g " << format_double(diag.pearson_err_g) << "\npearson_err_T_weighted "
              << format_double(diag.pearson_err_T_weighted) << '\n';
    if (!a.diagnostics.empty()) write_diagnostics(a.diagnostics, diag);
    return 0;
}

// ---- plan ----------------------------------------------------------------

struct PlanArgs {
    std::string law;
    double m = 192;
    double n = xtq::kEventsPerSeason;
    double target_prob = 0.9;
    std::string grids;
    std::string plot;
};

void emit_curve(const std::string& svg_path, const xtq::QuantileCurve& curve, const std::string& title) {
    const bool over_n = curve.axis == xtq::SweepAxis::N;
    {
        auto csv = open_out(companion_csv(svg_path));
        csv << (over_n ? "N" : "M");
        for (double q : curve.q_levels) csv << ",q" << format_double(q);
        csv << '\n';
        for (std::size_t i = 0; i < curve.sweep.size(); ++i) {
            csv << format_double(curve.sweep[i]);
            for (double v : curve.values[i]) csv << ',' << format_double(v);
            csv << '\n';
        }
    }
    xtq::svg::LinePlot plot;
    plot.title = title;
    plot.x_label = over_n ? "events N" : "states M";
    plot.y_label = "model error";
    plot.log_x = true;
    plot.log_y = true;
    plot.hline = curve.me_max;
    plot.hline_label = "me_max";
    for (std::size_t j = 0; j < curve.q_levels.size(); ++j) {
        xtq::svg::Series s{"q=" + format_double(curve.q_levels[j]), curve.sweep, {}};
        for (const auto& row : curve.values) s.y.push_back(row[j]);
        plot.series.push_back(std::move(s));
    }
    auto svg = open_out(svg_path);
    svg << xtq::svg::render(plot);
}

std::vector<double> log_sweep(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
    return v;
}

const std::vector<double> kCurveLevels{0.5, 0.75, 0.9, 0.95};

int run_plan_check(const PlanArgs& a) {
    check_prob(a.target_prob, "--target-prob");
    const auto law = load_law(a.law);
    const auto v = xtq::quality_check(law, a.m, a.n, a.target_prob);
    std::cout << "probability_acceptable " << format_double(v.probability_acceptable) << "\nq_error "
              << format_double(v.q_error) << "\ntarget_prob " << format_double(v.target_prob) << "\nacceptable "
              << (v.acceptable ? "true" : "false") << '\n';
    if (!a.plot.empty()) {
        const auto sweep = log_sweep(std::max(1000.0, a.n / 100.0), a.n * 100.0, 60);
        emit_curve(a.plot, xtq::quantile_curve(law, xtq::SweepAxis::N, a.m, sweep, kCurveLevels),
                   "Error quantiles at M=" + format_double(a.m));
    }
    return 0;
}

int run_plan_grid(const PlanArgs& a) {
    check_prob(a.target_prob, "--target-prob");
    const auto law = load_law(a.law);
    std::vector<xtq::PitchGrid> grids = xtq::standard_grids();
    if (!a.grids.empty()) {
        auto in = open_in(a.grids);
        grids = xtq::read_grids_json(in);
    }
    const auto choice = xtq::select_grid(law, a.n, grids, a.target_prob);
    std::cout << "grid " << choice.grid.label() << "\nM " << choice.grid.size() << '\n';
    for (const auto& c : choice.candidates) {
        std::cout << "candidate " << c.grid.label() << " M=" << c.grid.size() << " q_error=" << format_double(c.q_error)
                  << (c.acceptable ? " ok" : "") << '\n';
    }
    if (!a.plot.empty()) {
        std::vector<double> ms;
        for (const auto& g : grids) ms.push_back(g.size());
        std::sort(ms.begin(), ms.end());
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
        emit_curve(a.plot, xtq::quantile_curve(law, xtq::SweepAxis::M, a.n, ms, kCurveLevels),
                   "Error quantiles at N=" + format_double(a.n));
    }
    return 0;
}

int run_plan_datasize(const PlanArgs& a) {
    check_prob(a.target_prob, "--target-prob");
    const auto law = load_law(a.law);
    const auto n = xtq::required_n(law, a.m, a.target_prob);
    std::cout << "required_n " << n << "\nseasons " << format_double(static_cast<double>(n) / xtq::kEventsPerSeason) << '\n';
    if (!a.plot.empty()) {
        const auto sweep = log_sweep(std::max(1000.0, n / 100.0), n * 100.0, 60);
        emit_curve(a.plot, xtq::quantile_curve(law, xtq::SweepAxis::N, a.m, sweep, kCurveLevels),
                   "Error quantiles at M=" + format_double(a.m));
    }
    return 0;
}

// ---- rate ----------------------------------------------------------------

struct RateArgs {
    std::string model;
    std::string events;
    std::string minutes;
    std::string position = "MF";
    double min_minutes = 300.0;
    bool signed_sum = false;
    std::string out;
    std::string plot;
};

int run_rate(const RateArgs& a) {
    xtq::LoadedModel m;
    {
        auto in = open_in(a.model);
        m = xtq::read_model_json(in);
    }
    const auto xt = solved_xt(m);
    const auto report = load_events(a.events);
    const auto ledger = load_minutes(a.minutes);
    const auto ratings = xtq::rate_players(xt, report.events, ledger, {a.position, a.min_minutes, ""}, a.signed_sum);
    for (const auto& w : ratings.warnings) std::cerr << "warning: " << w << '\n';
    if (a.out.empty()) {
        xtq::write_ratings_csv(std::cout, ratings.ratings);
    } else {
        auto out = open_out(a.out);
        xtq::write_ratings_csv(out, ratings.ratings);
    }
    if (!a.plot.empty()) {
        {
            auto csv = open_out(companion_csv(a.plot));
            xtq::write_ratings_csv(csv, ratings.ratings);
        }
        std::vector<xtq::svg::StripPoint> pts;
        for (const auto& r : ratings.ratings) pts.push_back({r.xt_per90, r.quartile - 1, r.player_id});
        auto svg = open_out(a.plot);
        svg << xtq::svg::render_strip("xT per 90, " + (a.position.empty() ? std::string("all positions") : a.position),
                                      "xT per 90", pts);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"xT model estimation, error law and data planning"};
    app.set_version_flag("--version", XTQ_VERSION);
    app.require_subcommand(1);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic event dataset");
    c_synth->add_option("--grid", synth.grid, "Grid the synthetic truth is defined on")->capture_default_str();
    c_synth->add_option("--events", synth.events, "Number of events")->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "Random seed (falls back to XTQ_SEED)");
    c_synth->add_option("--out", synth.out, "Neutral JSONL output")->required();
    c_synth->add_option("--minutes-out", synth.minutes_out, "Minutes ledger CSV output");

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Convert provider events to neutral JSONL");
    c_ingest->add_option("--input", ingest.input, "Provider file")->required();
    c_ingest->add_option("--format", ingest.format, "statsbomb|neutral")->capture_default_str();
    c_ingest->add_option("--match-id", ingest.match_id, "Match id (default: file stem)");
    c_ingest->add_option("--out", ingest.out, "Neutral JSONL output")->required();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Estimate a model from events");
    c_train->add_option("--events", train.events, "Events file")->required();
    c_train->add_option("--grid", train.grid, "Grid, e.g. 16x12")->capture_default_str();
    c_train->add_option("--format", train.format, "neutral|statsbomb")->capture_default_str();
    c_train->add_option("--out", train.out, "Model JSON output")->required();

    SolveArgs solve;
    auto* c_solve = app.add_subcommand("solve", "Compute xT by value iteration");
    c_solve->add_option("--model", solve.model, "Model JSON")->required();
    c_solve->add_option("--out", solve.out, "Output model JSON (default: update in place)");
    c_solve->add_option("--eps-stop", solve.eps_stop, "Stop when the step is below this")->capture_default_str();
    c_solve->add_option("--max-iter", solve.max_iter, "Iteration cap")->capture_default_str();
    c_solve->add_option("--bound-target", solve.bound_target,
                        "Keep iterating until the certified bound is below this (0 = off)")
        ->capture_default_str();

    xtq::BoundInputs bounds;
    bounds.t_inf_true = 0.9;
    auto* c_bounds = app.add_subcommand("bounds", "Evaluate the model-error bound");
    c_bounds->add_option("--m", bounds.M, "Number of states")->required();
    c_bounds->add_option("--n", bounds.N, "Number of events")->required();
    c_bounds->add_option("--alpha", bounds.alpha, "Failure probability")->capture_default_str();
    c_bounds->add_option("--pg", bounds.p_g, "Shot share of events")->capture_default_str();
    c_bounds->add_option("--tinf", bounds.t_inf_true, "||T||_inf of the true model")->capture_default_str();
    c_bounds->add_option("--k", bounds.k, "Value-iteration steps")->capture_default_str();
    c_bounds->add_option("--ghat", bounds.g_inf_hat, "||g_hat||_inf")->capture_default_str();
    c_bounds->add_option("--that", bounds.t_inf_hat, "||T_hat||_inf")->capture_default_str();

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run the resampling study");
    c_sim->add_option("--plan", sim.plan, "Plan JSON")->required();
    c_sim->add_option("--truth-dir", sim.truth_dir, "Directory of <grid>.json truth models (default: synthetic truth)");
    c_sim->add_option("--out", sim.out, "Results CSV")->required();
    c_sim->add_option("--jobs", sim.jobs, "Worker threads")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "Master seed (overrides the plan)");

    QuartileArgs qs;
    auto* c_qs = app.add_subcommand("quartile-study", "Measure quartile changes under resampled models");
    c_qs->add_option("--truth", qs.truth, "Truth model JSON (default: synthetic truth on --grid)");
    c_qs->add_option("--grid", qs.grid, "Grid for the synthetic truth")->capture_default_str();
    c_qs->add_option("--players", qs.players, "Players JSONL");
    c_qs->add_option("--events", qs.events, "Events to derive player move sets from");
    c_qs->add_option("--minutes", qs.minutes, "Minutes ledger CSV");
    c_qs->add_option("--position", qs.position, "Cohort position")->capture_default_str();
    c_qs->add_option("--min-minutes", qs.min_minutes, "Cohort minimum minutes")->capture_default_str();
    c_qs->add_option("--n", qs.n_values, "Training sizes")->capture_default_str()->delimiter(',');
    c_qs->add_option("--replicates", qs.replicates, "Replicates per size")->capture_default_str();
    c_qs->add_option("--jobs", qs.jobs, "Worker threads")->capture_default_str();
    c_qs->add_option("--bins", qs.bins, "Also report ME_max using this many error bins");
    c_qs->add_option("--seed", qs.seed, "Random seed (falls back to XTQ_SEED)");
    c_qs->add_option("--out", qs.out, "Quartile CSV")->required();

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit the lognormal error law");
    c_fit->add_option("--records", fit.records, "Results CSV")->required();
    c_fit->add_option("--out", fit.out, "Law JSON output")->required();
    c_fit->add_option("--diagnostics", fit.diagnostics, "Directory for residual tables and the QQ plot");

    PlanArgs plan;
    auto* c_plan = app.add_subcommand("plan", "Data and grid planning from an error law");
    c_plan->require_subcommand(1);
    auto add_common = [&](CLI::App* c) {
        c->add_option("--law", plan.law, "Law JSON (default: bundled reference law)");
        c->add_option("--target-prob", plan.target_prob, "Required probability")->capture_default_str();
        c->add_option("--plot", plan.plot, "Quantile curve SVG (CSV written alongside)");
    };
    auto* c_check = c_plan->add_subcommand("check", "Probability that (M, N) meets me_max");
    add_common(c_check);
    c_check->add_option("--m", plan.m, "Number of states")->required();
    c_check->add_option("--n", plan.n, "Number of events")->required();
    auto* c_grid = c_plan->add_subcommand("grid", "Finest acceptable grid for N events");
    add_common(c_grid);
    c_grid->add_option("--n", plan.n, "Number of events")->required();
    c_grid->add_option("--grids", plan.grids, "Candidate grids JSON");
    auto* c_size = c_plan->add_subcommand("datasize", "Events needed for M states");
    add_common(c_size);
    c_size->add_option("--m", plan.m, "Number of states")->required();

    RateArgs rate;
    auto* c_rate = app.add_subcommand("rate", "Rate players by xT created per 90");
    c_rate->add_option("--model", rate.model, "Model JSON")->required();
    c_rate->add_option("--events", rate.events, "Neutral JSONL events")->required();
    c_rate->add_option("--minutes", rate.minutes, "Minutes ledger CSV")->required();
    c_rate->add_option("--position", rate.position, "Cohort position (empty: all)")->capture_default_str();
    c_rate->add_option("--min-minutes", rate.min_minutes, "Cohort minimum minutes")->capture_default_str();
    c_rate->add_flag("--signed", rate.signed_sum, "Sum signed deltas instead of the positive part");
    c_rate->add_option("--out", rate.out, "Ratings CSV (default: stdout)");
    c_rate->add_option("--plot", rate.plot, "Beeswarm SVG (CSV written alongside)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_synth->parsed()) return run_synth(synth);
        if (c_ingest->parsed()) return run_ingest(ingest);
        if (c_train->parsed()) return run_train(train);
        if (c_solve->parsed()) return run_solve(solve);
        if (c_bounds->parsed()) return run_bounds(bounds);
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_qs->parsed()) return run_quartile(qs);
        if (c_fit->parsed()) return run_fit(fit);
        if (c_check->parsed()) return run_plan_check(plan);
        if (c_grid->parsed()) return run_plan_grid(plan);
        if (c_size->parsed()) return run_plan_datasize(plan);
        if (c_rate->parsed()) return run_rate(rate);
    } catch (const xtq::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
