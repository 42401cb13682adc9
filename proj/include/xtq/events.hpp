#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xtq/error.hpp"
#include "xtq/grid.hpp"

namespace xtq {

enum class ActionKind { pass, dribble, error, clearance, shot };

inline std::string_view to_string(ActionKind k) {
    switch (k) {
        case ActionKind::pass: return "pass";
        case ActionKind::dribble: return "dribble";
        case ActionKind::error: return "error";
        case ActionKind::clearance: return "clearance";
        case ActionKind::shot: return "shot";
    }
    return "pass";
}

inline std::optional<ActionKind> action_kind_from(std::string_view s) {
    if (s == "pass") return ActionKind::pass;
    if (s == "dribble") return ActionKind::dribble;
    if (s == "error") return ActionKind::error;
    if (s == "clearance") return ActionKind::clearance;
    if (s == "shot") return ActionKind::shot;
    return std::nullopt;
}

inline bool is_move(ActionKind k) noexcept { return k != ActionKind::shot; }

struct EventRecord {
    std::string match_id;
    std::string possession_id;
    std::string team_id;
    std::string player_id;
    double minute_offset = 0.0;
    ActionKind action_kind = ActionKind::pass;
    PitchPoint start;
    PitchPoint end;
    bool success = false;
    bool is_goal = false;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

enum class ChainEnd { goal, shot_missed, turnover, truncated };

inline std::string_view to_string(ChainEnd e) {
    switch (e) {
        case ChainEnd::goal: return "goal";
        case ChainEnd::shot_missed: return "shot_missed";
        case ChainEnd::turnover: return "turnover";
        case ChainEnd::truncated: return "truncated";
    }
    return "truncated";
}

struct PossessionChain {
    std::vector<EventRecord> events;
    ChainEnd terminal = ChainEnd::truncated;
};

/// Minutes played and primary position per player.
struct MinutesLedger {
    std::map<std::string, double> minutes;
    std::map<std::string, std::string> position;

    void add(const std::string& player, const std::string& pos, double mins) {
        if (mins < 0.0) throw ValidationError("negative minutes for player " + player);
        minutes[player] += mins;
        position.try_emplace(player, pos);
    }
};

enum class EventFormat { neutral_jsonl, statsbomb_json };

struct ParseReport {
    std::vector<EventRecord> events;
    std::size_t skipped_unknown = 0;  // records with an action kind outside the five retained ones
    std::vector<std::string> warnings;
};

namespace detail {

inline double json_number(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw ParseError(line, std::string("missing numeric field '") + key + "'");
    return it->get<double>();
}

inline std::string json_id(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw ParseError(line, std::string("field '") + key + "' must be a string or integer");
}

inline bool json_bool(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_boolean()) throw ParseError(line, std::string("missing boolean field '") + key + "'");
    return it->get<bool>();
}

inline void sort_events(std::vector<EventRecord>& events) {
    std::stable_sort(events.begin(), events.end(), [](const EventRecord& a, const EventRecord& b) {
        if (a.match_id != b.match_id) return a.match_id < b.match_id;
        return a.minute_offset < b.minute_offset;
    });
}

inline void enforce_shot_invariants(EventRecord& e) {
    if (e.action_kind == ActionKind::shot) {
        e.success = e.is_goal;
        e.end = e.start;
    } else {
        e.is_goal = false;
    }
}

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline ParseReport parse_neutral(std::istream& in) {
    ParseReport report;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(lineno, "record must be a JSON object");
        auto kind_it = j.find("action_kind");
        if (kind_it == j.end() || !kind_it->is_string()) throw ParseError(lineno, "missing field 'action_kind'");
        auto kind = action_kind_from(kind_it->get<std::string>());
        if (!kind) {
            ++report.skipped_unknown;
            report.warnings.push_back("line " + std::to_string(lineno) + ": skipped unknown action kind '" +
                                      kind_it->get<std::string>() + "'");
            continue;
        }
        EventRecord e;
        e.match_id = json_id(j, "match_id", lineno);
        e.possession_id = json_id(j, "possession_id", lineno);
        e.team_id = json_id(j, "team_id", lineno);
        e.player_id = json_id(j, "player_id", lineno);
        e.minute_offset = json_number(j, "minute_offset", lineno);
        if (e.minute_offset < 0.0) throw ParseError(lineno, "minute_offset must be >= 0");
        e.action_kind = *kind;
        e.start = {clamp_unit(json_number(j, "x0", lineno)), clamp_unit(json_number(j, "y0", lineno))};
        e.end = {clamp_unit(json_number(j, "x1", lineno)), clamp_unit(json_number(j, "y1", lineno))};
        e.success = json_bool(j, "success", lineno);
        e.is_goal = json_bool(j, "is_goal", lineno);
        if (e.is_goal && e.action_kind != ActionKind::shot) throw ParseError(lineno, "is_goal set on a non-shot");
        enforce_shot_invariants(e);
        report.events.push_back(std::move(e));
    }
    return report;
}

inline std::optional<PitchPoint> statsbomb_point(const nlohmann::json& loc) {
    if (!loc.is_array() || loc.size() < 2 || !loc[0].is_number() || !loc[1].is_number()) return std::nullopt;
    return PitchPoint{clamp_unit(loc[0].get<double>() / 120.0), clamp_unit(loc[1].get<double>() / 80.0)};
}

inline ParseReport parse_statsbomb(std::istream& in, const std::string& match_id) {
    ParseReport report;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("invalid StatsBomb JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError(1, "StatsBomb events file must be a JSON array");
    std::size_t idx = 0;
    for (const auto& ev : doc) {
        ++idx;
        if (!ev.is_object()) throw ParseError(idx, "event must be an object");
        std::string type = ev.contains("type") && ev["type"].contains("name") ? ev["type"]["name"].get<std::string>() : "";
        std::optional<ActionKind> kind;
        if (type == "Pass") kind = ActionKind::pass;
        else if (type == "Carry") kind = ActionKind::dribble;
        else if (type == "Shot") kind = ActionKind::shot;
        else if (type == "Clearance") kind = ActionKind::clearance;
        else if (type == "Error") kind = ActionKind::error;
        if (!kind) {
            ++report.skipped_unknown;
            continue;
        }
        auto start = ev.contains("location") ? statsbomb_point(ev["location"]) : std::nullopt;
        if (!start) throw ParseError(idx, type + " event without a location");
        EventRecord e;
        e.match_id = match_id;
        e.possession_id = ev.contains("possession") ? json_id(ev, "possession", idx) : "0";
        e.team_id = ev.contains("team") ? json_id(ev["team"], "id", idx) : "";
        e.player_id = ev.contains("player") ? json_id(ev["player"], "id", idx) : "";
        e.minute_offset = ev.value("minute", 0.0) + ev.value("second", 0.0) / 60.0;
        e.action_kind = *kind;
        e.start = *start;
        e.end = *start;
        switch (*kind) {
            case ActionKind::pass: {
                const auto& p = ev.value("pass", nlohmann::json::object());
                if (auto end = p.contains("end_location") ? statsbomb_point(p["end_location"]) : std::nullopt) e.end = *end;
                e.success = !p.contains("outcome");
                break;
            }
            case ActionKind::dribble: {
                const auto& c = ev.value("carry", nlohmann::json::object());
                if (auto end = c.contains("end_location") ? statsbomb_point(c["end_location"]) : std::nullopt) e.end = *end;
                e.success = true;
                break;
            }
            case ActionKind::shot: {
                const auto& s = ev.value("shot", nlohmann::json::object());
                e.is_goal = s.contains("outcome") && s["outcome"].value("name", "") == "Goal";
                break;
            }
            case ActionKind::clearance:
            case ActionKind::error:
                e.success = false;
                break;
        }
        enforce_shot_invariants(e);
        report.events.push_back(std::move(e));
    }
    if (report.skipped_unknown > 0) {
        report.warnings.push_back("skipped " + std::to_string(report.skipped_unknown) + " events of other types");
    }
    return report;
}

}  // namespace detail

/// Reads events in the given format. Only the five retained action kinds survive;
/// coordinates are clamped into the unit square; output is ordered by (match_id, minute_offset).
inline ParseReport parse_events(std::istream& in, EventFormat format, const std::string& statsbomb_match_id = "0") {
    ParseReport report = format == EventFormat::neutral_jsonl ? detail::parse_neutral(in)
                                                              : detail::parse_statsbomb(in, statsbomb_match_id);
    detail::sort_events(report.events);
    return report;
}

/// One neutral-schema line, no trailing newline.
inline std::string to_neutral_json(const EventRecord& e) {
    using detail::format_double;
    std::string out;
    out.reserve(256);
    out += "{\"match_id\":" + nlohmann::json(e.match_id).dump();
    out += ",\"possession_id\":" + nlohmann::json(e.possession_id).dump();
    out += ",\"team_id\":" + nlohmann::json(e.team_id).dump();
    out += ",\"player_id\":" + nlohmann::json(e.player_id).dump();
    out += ",\"minute_offset\":" + format_double(e.minute_offset);
    out += ",\"action_kind\":\"" + std::string(to_string(e.action_kind)) + "\"";
    out += ",\"x0\":" + format_double(e.start.x) + ",\"y0\":" + format_double(e.start.y);
    out += ",\"x1\":" + format_double(e.end.x) + ",\"y1\":" + format_double(e.end.y);
    out += std::string(",\"success\":") + (e.success ? "true" : "false");
    out += std::string(",\"is_goal\":") + (e.is_goal ? "true" : "false") + "}";
    return out;
}

inline void write_events(std::ostream& out, const std::vector<EventRecord>& events) {
    for (const auto& e : events) out << to_neutral_json(e) << '\n';
}

struct AssembleReport {
    std::vector<PossessionChain> chains;
    std::size_t split_after_shot = 0;      // chains started by events that followed a shot
    std::size_t split_after_turnover = 0;  // chains started by events that followed a failed move
};

inline ChainEnd terminal_of(const EventRecord& last) {
    if (last.action_kind == ActionKind::shot) return last.is_goal ? ChainEnd::goal : ChainEnd::shot_missed;
    return last.success ? ChainEnd::truncated : ChainEnd::turnover;
}

/// Groups consecutive events sharing (match, possession, team) into chains.
/// A shot or a failed move always closes the current chain.
inline AssembleReport assemble_chains(const std::vector<EventRecord>& events) {
    AssembleReport report;
    PossessionChain current;
    bool closed = false;
    auto flush = [&] {
        if (current.events.empty()) return;
        current.terminal = terminal_of(current.events.back());
        report.chains.push_back(std::move(current));
        current = PossessionChain{};
    };
    for (const auto& e : events) {
        if (!current.events.empty()) {
            const auto& prev = current.events.back();
            bool same = prev.match_id == e.match_id && prev.possession_id == e.possession_id && prev.team_id == e.team_id;
            if (!same) {
                flush();
            } else if (closed) {
                if (prev.action_kind == ActionKind::shot) ++report.split_after_shot;
                else ++report.split_after_turnover;
                flush();
            }
        }
        current.events.push_back(e);
        closed = e.action_kind == ActionKind::shot || !e.success;
    }
    flush();
    return report;
}

/// CSV with header player_id,position,minutes. Lines starting with '#' are ignored.
inline MinutesLedger parse_minutes_csv(std::istream& in) {
    MinutesLedger ledger;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line != "player_id,position,minutes") throw ParseError(lineno, "expected header player_id,position,minutes");
            continue;
        }
        std::istringstream ss(line);
        std::string id, pos, mins;
        if (!std::getline(ss, id, ',') || !std::getline(ss, pos, ',') || !std::getline(ss, mins)) {
            throw ParseError(lineno, "expected three columns");
        }
        double m = 0.0;
        auto res = std::from_chars(mins.data(), mins.data() + mins.size(), m);
        if (res.ec != std::errc{} || res.ptr != mins.data() + mins.size() || m < 0.0) {
            throw ParseError(lineno, "invalid minutes '" + mins + "'");
        }
        ledger.add(id, pos, m);
    }
    return ledger;
}

inline void write_minutes_csv(std::ostream& out, const MinutesLedger& ledger) {
    out << "# schema: xtq.minutes/1\n";
    out << "player_id,position,minutes\n";
    for (const auto& [id, mins] : ledger.minutes) {
        auto it = ledger.position.find(id);
        out << id << ',' << (it == ledger.position.end() ? "" : it->second) << ',' << detail::format_double(mins) << '\n';
    }
}

}  // namespace xtq
