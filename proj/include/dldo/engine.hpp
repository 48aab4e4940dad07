#pragma once

// Transient simulation: a clock-edge event loop binding the plant and the
// controller, plus extraction of settling, undershoot, ripple and efficiency
// from the resulting waveform.
//
// Per edge, in order: sample v_out; peak-detect and arbitrate; compare against
// v_ref; shift the active register; hold the new drive until the next edge.
// Load steps split the inter-edge interval at the step instant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dldo/analysis.hpp"
#include "dldo/controller.hpp"
#include "dldo/error.hpp"
#include "dldo/plant.hpp"

namespace dldo {

struct DldoConfig {
    PlantConfig plant;
    ComparatorConfig comparator;
    // Unset thresholds default to v_ref +/- 50 mV at simulation time.
    std::optional<double> v_high;
    std::optional<double> v_low;
    std::size_t dwell = 4;
    ClockConfig clock;
    double i_q = 325e-6;  // A, controller quiescent current

    [[nodiscard]] PeakDetectorConfig peak_detector(double v_ref) const {
        PeakDetectorConfig pd = PeakDetectorConfig::centered(v_ref, 50e-3, dwell);
        if (v_high) pd.v_high = *v_high;
        if (v_low) pd.v_low = *v_low;
        return pd;
    }
};

struct LoadStep {
    double t = 0.0;      // s
    double value = 0.0;  // A for a constant-current load, ohm for a resistive one
};

struct Scenario {
    double v_ref = 1.7;
    double duration = 10e-6;
    std::vector<LoadStep> load_steps;
    double initial_v_out = 0.0;

    void validate(double v_dd) const {
        if (!std::isfinite(v_ref) || v_ref < 0.0) throw ModelError("scenario.v_ref must be >= 0");
        if (!(v_ref < v_dd)) throw ModelError("scenario.v_ref must be below plant.v_dd");
        if (!std::isfinite(duration) || duration < 0.0)
            throw ModelError("scenario.duration must be >= 0");
        if (!std::isfinite(initial_v_out) || initial_v_out < 0.0 || initial_v_out > v_dd)
            throw ModelError("scenario.initial_v_out must lie in [0, v_dd]");
        for (std::size_t i = 0; i < load_steps.size(); ++i) {
            const auto& s = load_steps[i];
            if (!std::isfinite(s.t) || s.t < 0.0 || s.t > duration)
                throw ModelError("scenario: load step time outside [0, duration]");
            if (i > 0 && !(s.t > load_steps[i - 1].t))
                throw ModelError("scenario: load step times must be strictly increasing");
            if (!std::isfinite(s.value) || s.value < 0.0)
                throw ModelError("scenario: load step value must be >= 0");
        }
    }
};

struct Sample {
    double t = 0.0;
    double v_out = 0.0;
    std::size_t code_coarse = 0;
    std::size_t code_fine = 0;
    double i_drive = 0.0;
    LoopMode mode = LoopMode::Coarse;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Waveform {
    std::vector<Sample> samples;
    double elapsed = 0.0;  // sum of all plant advance intervals

    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
};

/// Raised when the state turns non-finite; carries everything simulated so far.
class SimulationDiverged : public Error {
public:
    SimulationDiverged(const std::string& what, Waveform partial)
        : Error(what), partial_(std::move(partial)) {}

    [[nodiscard]] const Waveform& partial() const noexcept { return partial_; }

private:
    Waveform partial_;
};

/// Replaces the plant load with a step's value, interpreted per load model.
inline void apply_load(PlantConfig& plant, double value) {
    if (auto* cc = std::get_if<ConstantCurrentLoad>(&plant.load))
        cc->i_load = value;
    else
        std::get<ResistiveLoad>(plant.load).r_load = value;
}

/// Hook called after the controller decision on each edge, before the drive is
/// latched. Tests use it to force register moves.
using EdgeHook = std::function<void(std::size_t edge_index, Controller&)>;

[[nodiscard]] inline Waveform simulate(const DldoConfig& cfg, const Scenario& scenario,
                                       const EdgeHook& hook = {}) {
    cfg.plant.validate();
    cfg.comparator.validate();
    cfg.clock.validate();
    scenario.validate(cfg.plant.v_dd);
    const PeakDetectorConfig peak = cfg.peak_detector(scenario.v_ref);
    peak.validate(scenario.v_ref);
    if (cfg.plant.load.index() == 1) {
        for (const auto& s : scenario.load_steps)
            if (!(s.value > 0.0)) throw ModelError("scenario: resistive load step must be > 0 ohm");
    }

    Waveform w;
    if (scenario.duration == 0.0) return w;

    PlantConfig plant = cfg.plant;
    Controller ctl(plant.n_coarse, plant.n_fine, ControllerConfig{cfg.comparator, peak});
    Rng clock_rng(cfg.clock.seed);
    PlantState state{scenario.initial_v_out, 0.0};
    double i_drive = 0.0;
    std::size_t next_step = 0;

    auto record = [&](double t) {
        w.samples.push_back({t, state.v_out, ctl.coarse().count(), ctl.fine().count(), i_drive, ctl.mode()});
    };
    auto hold_until = [&](double t_end) {
        const double dt = t_end - state.t;
        if (dt <= 0.0) return;
        try {
            state = advance(state, i_drive, dt, plant);
        } catch (const ModelError& e) {
            throw SimulationDiverged(e.what(), std::move(w));
        }
        w.elapsed += dt;
        state.t = t_end;
    };

    // Steps at t = 0 take effect before the first edge.
    while (next_step < scenario.load_steps.size() && scenario.load_steps[next_step].t <= 0.0) {
        apply_load(plant, scenario.load_steps[next_step++].value);
        record(0.0);
    }

    double edge = 0.0;
    std::size_t edge_index = 0;
    while (edge < scenario.duration) {
        ctl.on_edge(state.v_out, scenario.v_ref);
        if (hook) hook(edge_index, ctl);
        i_drive = drive_current(ctl.coarse(), ctl.fine(), plant);
        record(edge);

        // Without jitter the edge grid is computed directly so edge n sits at n / f_clk.
        const double raw_next = cfg.clock.jitter_sigma == 0.0
                                    ? static_cast<double>(edge_index + 1) * cfg.clock.period()
                                    : next_edge(edge, cfg.clock, clock_rng);
        const double next = std::min(raw_next, scenario.duration);
        while (next_step < scenario.load_steps.size() && scenario.load_steps[next_step].t < next) {
            const double ts = scenario.load_steps[next_step].t;
            hold_until(ts);
            apply_load(plant, scenario.load_steps[next_step++].value);
            record(ts);
        }
        hold_until(next);
        edge = next;
        ++edge_index;
    }
    // A step at exactly t = duration lands after the last interval.
    while (next_step < scenario.load_steps.size()) {
        apply_load(plant, scenario.load_steps[next_step++].value);
        record(scenario.duration);
    }
    if (!std::isfinite(state.v_out)) throw SimulationDiverged("simulate: non-finite output", std::move(w));
    return w;
}

// =============================================================================
// Figures of merit
// =============================================================================

struct Efficiency {
    double current = 0.0;
    double power = 0.0;
};

/// Current efficiency i_load / (i_load + i_q) and power efficiency
/// v_out i_load / (v_in (i_load + i_q)).
[[nodiscard]] inline Efficiency efficiency(double v_out, double v_in, double i_load, double i_q) {
    if (!(v_in > 0.0)) throw ModelError("efficiency: v_in must be > 0");
    const double total = i_load + i_q;
    if (!(total > 0.0)) return {0.0, 0.0};
    return {i_load / total, (v_out * i_load) / (v_in * total)};
}

struct TransientMetrics {
    std::optional<double> settling_time;
    double undershoot_depth = 0.0;
    double undershoot_min_v = 0.0;
    double overshoot_peak_v = 0.0;
    double ripple_pp = 0.0;
    std::optional<double> recovery_time;
    double current_efficiency = 0.0;
    double power_efficiency = 0.0;
};

/// Settling band default: twice the output swing of one fine LSB at the
/// load the scenario ends on.
[[nodiscard]] inline double default_settling_band(const DldoConfig& cfg, const Scenario& scenario) {
    const auto& p = cfg.plant;
    double lsb_v;
    if (const auto* r = std::get_if<ResistiveLoad>(&p.load)) {
        const double r_final = scenario.load_steps.empty() ? r->r_load : scenario.load_steps.back().value;
        lsb_v = p.i_unit_fine * r_final;
    } else {
        lsb_v = p.i_unit_fine * cfg.clock.period() / p.c_load;
    }
    return 2.0 * lsb_v;
}

namespace detail {

/// Load current implied by a load value under the plant's model.
[[nodiscard]] inline double current_of(const PlantConfig& p, double value, double v_out) {
    if (p.load.index() == 0) return value;
    return value > 0.0 ? v_out / value : 0.0;
}

/// First time after which every sample from `first` on stays within band.
[[nodiscard]] inline std::optional<double> entry_time(const std::vector<Sample>& s, std::size_t first,
                                                      double v_ref, double band) {
    std::optional<std::size_t> last_out;
    for (std::size_t i = first; i < s.size(); ++i)
        if (std::abs(s[i].v_out - v_ref) > band) last_out = i;
    if (!last_out) return first < s.size() ? std::optional<double>(s[first].t) : std::nullopt;
    if (*last_out + 1 >= s.size()) return std::nullopt;
    return s[*last_out + 1].t;
}

}  // namespace detail

[[nodiscard]] inline TransientMetrics measure(const Waveform& w, const Scenario& scenario, const DldoConfig& cfg,
                                              double band) {
    if (w.empty()) throw ModelError("measure: empty waveform");
    if (!(band >= 0.0)) throw ModelError("measure: band must be >= 0");
    const auto& s = w.samples;
    const double v_ref = scenario.v_ref;
    const double t_end = std::max(scenario.duration, s.back().t);

    TransientMetrics m;
    m.settling_time = detail::entry_time(s, 0, v_ref, band);

    // Largest load up-step, measured as the increase of current drawn at v_ref.
    double initial_value = cfg.plant.load.index() == 0 ? std::get<ConstantCurrentLoad>(cfg.plant.load).i_load
                                                       : std::get<ResistiveLoad>(cfg.plant.load).r_load;
    double prev_i = detail::current_of(cfg.plant, initial_value, v_ref);
    double best_rise = 0.0;
    std::optional<double> t_step;
    for (const auto& st : scenario.load_steps) {
        const double i = detail::current_of(cfg.plant, st.value, v_ref);
        if (i - prev_i > best_rise) {
            best_rise = i - prev_i;
            t_step = st.t;
        }
        prev_i = i;
    }

    std::size_t ref_index = 0;
    if (t_step) {
        while (ref_index < s.size() && s[ref_index].t < *t_step) ++ref_index;
        if (ref_index == s.size()) ref_index = s.size() - 1;
        const auto entry = detail::entry_time(s, ref_index, v_ref, band);
        if (entry) m.recovery_time = *entry - *t_step;
    } else {
        // Without a disturbance, excursions are measured once the output has settled.
        if (m.settling_time) {
            while (ref_index + 1 < s.size() && s[ref_index].t < *m.settling_time) ++ref_index;
        }
        m.recovery_time = m.settling_time;
    }
    double v_min = std::numeric_limits<double>::infinity();
    double v_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = ref_index; i < s.size(); ++i) {
        v_min = std::min(v_min, s[i].v_out);
        v_max = std::max(v_max, s[i].v_out);
    }
    m.undershoot_min_v = v_min;
    m.overshoot_peak_v = v_max;
    m.undershoot_depth = std::max(0.0, v_ref - v_min);

    // Ripple and efficiency over the final 20% of the run.
    const double t_tail = t_end - 0.2 * scenario.duration;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double v_sum = 0.0;
    std::size_t n_tail = 0;
    for (const auto& x : s) {
        if (x.t + 1e-18 < t_tail) continue;
        lo = std::min(lo, x.v_out);
        hi = std::max(hi, x.v_out);
        v_sum += x.v_out;
        ++n_tail;
    }
    if (n_tail == 0) {
        lo = hi = v_sum = s.back().v_out;
        n_tail = 1;
    }
    m.ripple_pp = hi - lo;

    const double v_mean = v_sum / static_cast<double>(n_tail);
    const double final_value = scenario.load_steps.empty() ? initial_value : scenario.load_steps.back().value;
    const double i_load = detail::current_of(cfg.plant, final_value, v_mean);
    const Efficiency eff = efficiency(v_mean, cfg.plant.v_dd, i_load, cfg.i_q);
    m.current_efficiency = std::clamp(eff.current, 0.0, 1.0);
    m.power_efficiency = std::clamp(eff.power, 0.0, 1.0);
    return m;
}

}  // namespace dldo
