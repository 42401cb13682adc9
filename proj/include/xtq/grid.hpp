#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "xtq/error.hpp"

namespace xtq {

/// Point on the pitch in the normalized frame: x = 0 is the own goal line,
/// x = 1 the attacking goal line, y spans the width.
struct PitchPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PitchPoint&, const PitchPoint&) = default;
};

struct StateId {
    int index = 0;

    friend auto operator<=>(const StateId&, const StateId&) = default;
};

/// Rectangular discretization into m_x * m_y states, numbered row-major with x fastest.
class PitchGrid {
public:
    PitchGrid() = default;

    PitchGrid(int m_x, int m_y) : m_x_(m_x), m_y_(m_y) {
        if (m_x < 1 || m_y < 1) {
            throw ValidationError("grid dimensions must be positive, got " + std::to_string(m_x) +
                                  "x" + std::to_string(m_y));
        }
    }

    /// Parses "16x12".
    static PitchGrid parse(std::string_view spec) {
        auto sep = spec.find_first_of("xX");
        if (sep == std::string_view::npos) {
            throw ValidationError("grid spec must look like 16x12, got '" + std::string(spec) + "'");
        }
        try {
            std::size_t used_x = 0;
            std::size_t used_y = 0;
            std::string xs(spec.substr(0, sep));
            std::string ys(spec.substr(sep + 1));
            int mx = std::stoi(xs, &used_x);
            int my = std::stoi(ys, &used_y);
            if (used_x != xs.size() || used_y != ys.size()) throw std::invalid_argument("trailing");
            return PitchGrid(mx, my);
        } catch (const std::logic_error&) {
            throw ValidationError("grid spec must look like 16x12, got '" + std::string(spec) + "'");
        }
    }

    int m_x() const noexcept { return m_x_; }
    int m_y() const noexcept { return m_y_; }
    int size() const noexcept { return m_x_ * m_y_; }

    std::string label() const { return std::to_string(m_x_) + "x" + std::to_string(m_y_); }

    bool contains(StateId s) const noexcept { return s.index >= 0 && s.index < size(); }

    StateId state_of(PitchPoint p) const {
        if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
            throw ValidationError("pitch point outside the unit square; clamp at ingestion");
        }
        int cx = std::min(m_x_ - 1, static_cast<int>(std::floor(p.x * m_x_)));
        int cy = std::min(m_y_ - 1, static_cast<int>(std::floor(p.y * m_y_)));
        return StateId{cx + m_x_ * cy};
    }

    PitchPoint cell_center(StateId s) const {
        if (!contains(s)) throw ValidationError("state " + std::to_string(s.index) + " outside grid " + label());
        int cx = s.index % m_x_;
        int cy = s.index / m_x_;
        return {(cx + 0.5) / m_x_, (cy + 0.5) / m_y_};
    }

    friend bool operator==(const PitchGrid&, const PitchGrid&) = default;

private:
    int m_x_ = 1;
    int m_y_ = 1;
};

inline StateId state_of(const PitchGrid& grid, PitchPoint p) { return grid.state_of(p); }
inline PitchPoint cell_center(const PitchGrid& grid, StateId s) { return grid.cell_center(s); }

inline double clamp_unit(double v) {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace xtq
