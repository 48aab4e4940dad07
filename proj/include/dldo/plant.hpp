#pragma once

// Output node of the regulator: two banks of gate-switched PMOS current
// sources charging the load capacitor against a constant-current or
// resistive load. The state is advanced in closed form between clock edges
// with the drive current held (zero-order hold).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <variant>

#include "dldo/error.hpp"
#include "dldo/thermometer_code.hpp"

namespace dldo {

struct ConstantCurrentLoad {
    double i_load = 10e-3;  // A
};

struct ResistiveLoad {
    double r_load = 170.0;  // ohm
};

using LoadModel = std::variant<ConstantCurrentLoad, ResistiveLoad>;

struct PlantConfig {
    double v_dd = 1.8;        // V
    double c_load = 100e-12;  // F
    LoadModel load = ConstantCurrentLoad{};
    double i_unit_coarse = 350e-6;  // A per coarse LSB
    double i_unit_fine = 50e-6;     // A per fine LSB
    std::size_t n_coarse = 32;
    std::size_t n_fine = 64;

    /// Throws ModelError naming the first violated invariant.
    void validate() const {
        auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!finite_pos(v_dd)) throw ModelError("plant.v_dd must be > 0");
        if (!finite_pos(c_load)) throw ModelError("plant.c_load must be > 0");
        if (!finite_pos(i_unit_coarse)) throw ModelError("plant.i_unit_coarse must be > 0");
        if (!finite_pos(i_unit_fine)) throw ModelError("plant.i_unit_fine must be > 0");
        if (!(i_unit_coarse > i_unit_fine))
            throw ModelError("plant.i_unit_coarse must exceed plant.i_unit_fine");
        if (n_coarse < 1) throw ModelError("plant.n_coarse must be >= 1");
        if (n_fine < 1) throw ModelError("plant.n_fine must be >= 1");
        if (const auto* cc = std::get_if<ConstantCurrentLoad>(&load)) {
            if (!std::isfinite(cc->i_load) || cc->i_load < 0.0)
                throw ModelError("plant.i_load must be >= 0");
        } else {
            const auto& r = std::get<ResistiveLoad>(load);
            if (!finite_pos(r.r_load)) throw ModelError("plant.r_load must be > 0");
        }
    }
};

struct PlantState {
    double v_out = 0.0;  // V
    double t = 0.0;      // s
};

[[nodiscard]] inline double drive_current(std::size_t count_coarse, std::size_t count_fine,
                                          const PlantConfig& cfg) noexcept {
    return static_cast<double>(count_coarse) * cfg.i_unit_coarse
         + static_cast<double>(count_fine) * cfg.i_unit_fine;
}

[[nodiscard]] inline double drive_current(const ThermometerCode& coarse, const ThermometerCode& fine,
                                          const PlantConfig& cfg) noexcept {
    return drive_current(coarse.count(), fine.count(), cfg);
}

/// Current drawn by the load at output voltage `v_out`.
[[nodiscard]] inline double load_current(const LoadModel& load, double v_out) noexcept {
    if (const auto* cc = std::get_if<ConstantCurrentLoad>(&load)) return cc->i_load;
    return v_out / std::get<ResistiveLoad>(load).r_load;
}

/// Holds `i_drive` for `dt` seconds and returns the new output state,
/// clamped to the rails.
[[nodiscard]] inline PlantState advance(const PlantState& state, double i_drive, double dt,
                                        const PlantConfig& cfg) {
    if (!std::isfinite(state.v_out) || !std::isfinite(state.t) || !std::isfinite(i_drive)
        || !std::isfinite(dt))
        throw ModelError("plant.advance: non-finite input");
    if (dt < 0.0) throw ModelError("plant.advance: dt must be >= 0");
    if (dt == 0.0) return state;

    double v = state.v_out;
    if (const auto* cc = std::get_if<ConstantCurrentLoad>(&cfg.load)) {
        v += (i_drive - cc->i_load) * dt / cfg.c_load;
    } else {
        const double r = std::get<ResistiveLoad>(cfg.load).r_load;
        const double v_inf = i_drive * r;
        v = v_inf + (v - v_inf) * std::exp(-dt / (r * cfg.c_load));
    }
    if (!std::isfinite(v)) throw ModelError("plant.advance: non-finite result");
    return {std::clamp(v, 0.0, cfg.v_dd), state.t + dt};
}

}  // namespace dldo
