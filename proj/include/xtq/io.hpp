#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "xtq/error.hpp"
#include "xtq/error_fit.hpp"
#include "xtq/estimator.hpp"
#include "xtq/events.hpp"
#include "xtq/planner.hpp"
#include "xtq/ratings.hpp"
#include "xtq/simulator.hpp"
#include "xtq/solver.hpp"

namespace xtq {

inline constexpr const char* kModelSchema = "xtq.model/1";
inline constexpr const char* kLawSchema = "xtq.law/1";

using detail::format_double;

namespace detail {

inline void write_array(std::ostream& out, std::span<const double> v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
    out << ']';
}

inline void write_int_array(std::ostream& out, std::span<const int> v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << ']';
}

inline std::vector<double> read_array(const nlohmann::json& j, const char* key, std::size_t expect) {
    if (!j.contains(key) || !j[key].is_array()) throw ValidationError(std::string("model JSON lacks array '") + key + "'");
    auto v = j[key].get<std::vector<double>>();
    if (v.size() != expect) {
        throw ValidationError(std::string("model JSON array '") + key + "' has " + std::to_string(v.size()) +
                              " entries, expected " + std::to_string(expect));
    }
    return v;
}

inline nlohmann::json parse_json(std::istream& in, const std::string& what) {
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("invalid " + what + " JSON: " + e.what());
    }
}

}  // namespace detail

struct ModelMeta {
    std::int64_t n_events = 0;
    std::string source;
};

/// Solved values stored alongside a model.
struct SolvedBlock {
    XtModel xt;
    SolveReport report;
};

inline void write_model_json(std::ostream& out, const GenerativeModel& gen, const ModelMeta& meta,
                             const std::optional<SolvedBlock>& solved = std::nullopt) {
    using detail::write_array;
    out << "{\"schema\":\"" << kModelSchema << "\",\n";
    out << "\"grid\":{\"m_x\":" << gen.grid.m_x() << ",\"m_y\":" << gen.grid.m_y() << "},\n";
    out << "\"p_shot\":";
    write_array(out, gen.p_shot);
    out << ",\n\"xg\":";
    write_array(out, gen.xg);
    out << ",\n\"p_turn\":";
    write_array(out, gen.p_turn);
    out << ",\n\"pi0\":";
    write_array(out, gen.pi0);
    out << ",\n\"T\":{\"rows\":[";
    bool first = true;
    for (int s = 0; s < gen.size(); ++s) {
        auto cs = gen.T.row_cols(s);
        if (cs.empty()) continue;
        out << (first ? "\n" : ",\n") << "{\"s\":" << s << ",\"cols\":";
        detail::write_int_array(out, cs);
        out << ",\"vals\":";
        write_array(out, gen.T.row_vals(s));
        out << '}';
        first = false;
    }
    out << "]},\n\"dropped\":";
    detail::write_int_array(out, gen.dropped);
    out << ",\n\"meta\":{\"n_events\":" << meta.n_events << ",\"source\":" << nlohmann::json(meta.source).dump() << '}';
    if (solved) {
        const auto& x = solved->xt;
        out << ",\n\"xt\":";
        write_array(out, x.xt);
        out << ",\n\"solve\":{\"iterations\":" << x.iterations << ",\"threshold\":" << format_double(x.threshold)
            << ",\"certified_bound\":" << format_double(x.certified_bound) << ",\"g_inf\":" << format_double(x.g_inf)
            << ",\"t_inf\":" << format_double(x.t_inf) << ",\"converged\":" << (solved->report.converged ? "true" : "false")
            << ",\"final_delta\":" << format_double(solved->report.final_delta) << '}';
    }
    out << "}\n";
}

struct LoadedModel {
    GenerativeModel gen;
    ModelMeta meta;
    std::optional<SolvedBlock> solved;
};

inline LoadedModel read_model_json(std::istream& in) {
    const auto j = detail::parse_json(in, "model");
    if (!j.is_object() || !j.contains("grid")) throw ValidationError("model JSON lacks 'grid'");
    LoadedModel out;
    auto& gen = out.gen;
    gen.grid = PitchGrid(j["grid"].value("m_x", 0), j["grid"].value("m_y", 0));
    const auto n = static_cast<std::size_t>(gen.grid.size());
    gen.p_shot = detail::read_array(j, "p_shot", n);
    gen.xg = detail::read_array(j, "xg", n);
    gen.p_turn = detail::read_array(j, "p_turn", n);
    gen.pi0 = detail::read_array(j, "pi0", n);
    std::vector<std::tuple<int, int, double>> trip;
    if (!j.contains("T") || !j["T"].contains("rows")) throw ValidationError("model JSON lacks 'T.rows'");
    for (const auto& row : j["T"]["rows"]) {
        const int s = row.at("s").get<int>();
        auto cols = row.at("cols").get<std::vector<int>>();
        auto vals = row.at("vals").get<std::vector<double>>();
        if (cols.size() != vals.size()) throw ValidationError("T row " + std::to_string(s) + ": cols/vals size mismatch");
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (s < 0 || s >= gen.grid.size() || cols[k] < 0 || cols[k] >= gen.grid.size()) {
                throw ValidationError("T entry outside the grid");
            }
            trip.emplace_back(s, cols[k], vals[k]);
        }
    }
    gen.T = SparseMatrix::from_triplets(gen.grid.size(), std::move(trip));
    if (j.contains("dropped")) gen.dropped = j["dropped"].get<std::vector<int>>();
    if (j.contains("meta")) {
        out.meta.n_events = j["meta"].value("n_events", std::int64_t{0});
        out.meta.source = j["meta"].value("source", std::string{});
    }
    if (j.contains("xt")) {
        SolvedBlock b;
        b.xt.grid = gen.grid;
        b.xt.xt = detail::read_array(j, "xt", n);
        const auto& s = j.value("solve", nlohmann::json::object());
        b.xt.iterations = s.value("iterations", 0);
        b.xt.threshold = s.value("threshold", 0.0);
        b.xt.certified_bound = s.value("certified_bound", 0.0);
        b.xt.g_inf = s.value("g_inf", 0.0);
        b.xt.t_inf = s.value("t_inf", 0.0);
        b.report.converged = s.value("converged", false);
        b.report.final_delta = s.value("final_delta", 0.0);
        b.report.iterations = b.xt.iterations;
        out.solved = b;
    }
    gen.validate(1e-9);
    return out;
}

inline void write_law_json(std::ostream& out, const ErrorLaw& law) {
    out << "{\"schema\":\"" << kLawSchema << "\",\"c\":" << format_double(law.c) << ",\"alpha_m\":" << format_double(law.alpha_m)
        << ",\"beta_n\":" << format_double(law.beta_n) << ",\"sigma2\":" << format_double(law.sigma2)
        << ",\"me_max\":" << format_double(law.me_max) << ",\"source\":" << nlohmann::json(law.source).dump() << "}\n";
}

inline ErrorLaw read_law_json(std::istream& in) {
    const auto j = detail::parse_json(in, "law");
    ErrorLaw law;
    try {
        law.c = j.at("c").get<double>();
        law.alpha_m = j.at("alpha_m").get<double>();
        law.beta_n = j.at("beta_n").get<double>();
        law.sigma2 = j.at("sigma2").get<double>();
        law.me_max = j.value("me_max", 0.0192);
        law.source = j.value("source", std::string("fitted"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("law JSON: ") + e.what());
    }
    law.validate();
    return law;
}

namespace detail {

/// Splits a CSV line without quoting support (all our fields are plain).
inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <class T>
T parse_field(const std::string& s, std::size_t line) {
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError(line, "invalid number '" + s + "'");
    return v;
}

/// Iterates data rows of a CSV with a fixed header, skipping '#' comment lines.
template <class Fn>
void read_csv(std::istream& in, const std::string& header, std::size_t columns, Fn&& on_row) {
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != header) throw ParseError(lineno, "expected header " + header);
            header_seen = true;
            continue;
        }
        auto f = split_csv(line);
        if (f.size() != columns) throw ParseError(lineno, "expected " + std::to_string(columns) + " columns");
        on_row(f, lineno);
    }
}

}  // namespace detail

inline constexpr const char* kRecordsHeader = "M,N,replicate_id,model_error,err_g,err_T,err_T_weighted,passes_filter";
inline constexpr const char* kQuartileHeader = "N,replicate_id,model_error,n_players,n_wrong_quartile,max_quartile_change";
inline constexpr const char* kRatingsHeader = "player_id,position,minutes,xt_per90,rank,quartile";

inline void write_records_csv(std::ostream& out, std::span<const ReplicateRecord> records) {
    out << "# schema: xtq.results/1\n" << kRecordsHeader << '\n';
    for (const auto& r : records) {
        out << r.M << ',' << r.N << ',' << r.replicate_id << ',' << format_double(r.model_error) << ','
            << format_double(r.err_g) << ',' << format_double(r.err_T) << ',' << format_double(r.err_T_weighted) << ','
            << (r.passes_filter ? 1 : 0) << '\n';
    }
}

inline std::vector<ReplicateRecord> read_records_csv(std::istream& in) {
    using detail::parse_field;
    std::vector<ReplicateRecord> out;
    detail::read_csv(in, kRecordsHeader, 8, [&](const std::vector<std::string>& f, std::size_t line) {
        ReplicateRecord r;
        r.M = parse_field<int>(f[0], line);
        r.N = parse_field<std::int64_t>(f[1], line);
        r.replicate_id = parse_field<int>(f[2], line);
        r.model_error = parse_field<double>(f[3], line);
        r.err_g = parse_field<double>(f[4], line);
        r.err_T = parse_field<double>(f[5], line);
        r.err_T_weighted = parse_field<double>(f[6], line);
        r.passes_filter = parse_field<int>(f[7], line) != 0;
        r.n_target = r.N;
        out.push_back(r);
    });
    return out;
}

inline void write_quartile_csv(std::ostream& out, std::span<const QuartileReplicate> records) {
    out << "# schema: xtq.quartiles/1\n" << kQuartileHeader << '\n';
    for (const auto& q : records) {
        out << q.N << ',' << q.replicate_id << ',' << format_double(q.model_error) << ',' << q.n_players << ','
            << q.n_wrong_quartile << ',' << q.max_quartile_change << '\n';
    }
}

inline std::vector<QuartileReplicate> read_quartile_csv(std::istream& in) {
    using detail::parse_field;
    std::vector<QuartileReplicate> out;
    detail::read_csv(in, kQuartileHeader, 6, [&](const std::vector<std::string>& f, std::size_t line) {
        QuartileReplicate q;
        q.N = parse_field<std::int64_t>(f[0], line);
        q.replicate_id = parse_field<int>(f[1], line);
        q.model_error = parse_field<double>(f[2], line);
        q.n_players = parse_field<int>(f[3], line);
        q.n_wrong_quartile = parse_field<int>(f[4], line);
        q.max_quartile_change = parse_field<int>(f[5], line);
        out.push_back(q);
    });
    return out;
}

inline void write_ratings_csv(std::ostream& out, std::span<const PlayerRating> ratings) {
    out << "# schema: xtq.ratings/1\n" << kRatingsHeader << '\n';
    for (const auto& r : ratings) {
        out << r.player_id << ',' << r.position << ',' << format_double(r.minutes) << ',' << format_double(r.xt_per90) << ','
            << r.cohort_rank << ',' << r.quartile << '\n';
    }
}

/// {"grids": ["8x6", [10, 8], ...], "n_values": [...], "replicates": R, "master_seed": S}
inline StudyPlan read_plan_json(std::istream& in) {
    const auto j = detail::parse_json(in, "plan");
    StudyPlan plan;
    try {
        for (const auto& g : j.at("grids")) {
            if (g.is_string()) plan.grids.push_back(PitchGrid::parse(g.get<std::string>()));
            else plan.grids.emplace_back(g.at(0).get<int>(), g.at(1).get<int>());
        }
        plan.n_values = j.at("n_values").get<std::vector<std::int64_t>>();
        plan.replicates = j.value("replicates", 1);
        plan.master_seed = j.value("master_seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("plan JSON: ") + e.what());
    }
    plan.validate();
    return plan;
}

/// Accepts {"grids": [...]} or a bare array of "16x12" strings / [m_x, m_y] pairs.
inline std::vector<PitchGrid> read_grids_json(std::istream& in) {
    const auto j = detail::parse_json(in, "grids");
    const auto& arr = j.is_object() ? j.at("grids") : j;
    std::vector<PitchGrid> out;
    for (const auto& g : arr) {
        if (g.is_string()) out.push_back(PitchGrid::parse(g.get<std::string>()));
        else out.emplace_back(g.at(0).get<int>(), g.at(1).get<int>());
    }
    return out;
}

/// One player per line: {"player_id":..., "minutes":..., "moves":[[before, after], ...]}; after = -1 is a lost ball.
inline std::vector<PlayerActions> read_players_jsonl(std::istream& in) {
    std::vector<PlayerActions> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            PlayerActions p;
            p.player_id = j.at("player_id").is_string() ? j.at("player_id").get<std::string>()
                                                        : std::to_string(j.at("player_id").get<long long>());
            p.minutes = j.at("minutes").get<double>();
            for (const auto& m : j.at("moves")) p.moves.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, std::string("player record: ") + e.what());
        }
    }
    return out;
}

inline void write_players_jsonl(std::ostream& out, std::span<const PlayerActions> players) {
    for (const auto& p : players) {
        out << "{\"player_id\":" << nlohmann::json(p.player_id).dump() << ",\"minutes\":" << format_double(p.minutes)
            << ",\"moves\":[";
        for (std::size_t i = 0; i < p.moves.size(); ++i) {
            out << (i ? "," : "") << '[' << p.moves[i].first << ',' << p.moves[i].second << ']';
        }
        out << "]}\n";
    }
}

}  // namespace xtq
