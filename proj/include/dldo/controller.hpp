#pragma once

// Discrete controller state machines: the clocked comparator, the two
// self-shifting bidirectional shift registers, the overshoot/undershoot peak
// detector with coarse/fine arbitration, and the loop clock source.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dldo/error.hpp"
#include "dldo/thermometer_code.hpp"

namespace dldo {

using Rng = std::mt19937_64;

// =============================================================================
// Comparator
// =============================================================================

enum class NoiseModel { None, Uniform, Gaussian };

struct ComparatorConfig {
    double offset = 0.0;                  // V, added to v_ref
    double uncertainty_halfwidth = 3e-3;  // V
    NoiseModel noise_model = NoiseModel::None;
    std::uint64_t seed = 1;

    void validate() const {
        if (!std::isfinite(offset)) throw ModelError("controller.offset must be finite");
        if (!std::isfinite(uncertainty_halfwidth) || uncertainty_halfwidth < 0.0)
            throw ModelError("controller.uncertainty_halfwidth must be >= 0");
    }
};

/// One input-referred noise draw. Gaussian uses sigma = halfwidth / 3.
[[nodiscard]] inline double comparator_noise(const ComparatorConfig& cfg, Rng& rng) {
    const double h = cfg.uncertainty_halfwidth;
    switch (cfg.noise_model) {
    case NoiseModel::None:
        return 0.0;
    case NoiseModel::Uniform:
        if (h == 0.0) return 0.0;
        return std::uniform_real_distribution<double>(-h, h)(rng);
    case NoiseModel::Gaussian:
        if (h == 0.0) return 0.0;
        return std::normal_distribution<double>(0.0, h / 3.0)(rng);
    }
    return 0.0;
}

/// Up when the reference (plus offset and noise) is strictly above the
/// feedback voltage. Exact ties resolve Down.
[[nodiscard]] inline Direction comparator_decide(double v_ref, double v_fb, const ComparatorConfig& cfg,
                                                 Rng& rng) {
    const double noise = comparator_noise(cfg, rng);
    return (v_ref + cfg.offset + noise > v_fb) ? Direction::Up : Direction::Down;
}

// =============================================================================
// Peak detector and loop arbitration
// =============================================================================

enum class Band { InBand, OutOfBand };
enum class LoopMode { Coarse, Fine };

struct PeakDetectorConfig {
    double v_high = 1.75;  // V, overshoot reference
    double v_low = 1.65;   // V, undershoot reference
    std::size_t dwell = 4;  // consecutive in-band edges before the fine loop takes over

    void validate(double v_ref) const {
        if (!std::isfinite(v_high) || !std::isfinite(v_low))
            throw ModelError("controller.v_high/v_low must be finite");
        if (!(v_low < v_ref && v_ref < v_high))
            throw ModelError("controller: v_low < v_ref < v_high violated");
        if (dwell < 1) throw ModelError("controller.dwell must be >= 1");
    }

    /// Window of +/- `halfwidth` around `v_ref`.
    [[nodiscard]] static PeakDetectorConfig centered(double v_ref, double halfwidth = 50e-3,
                                                     std::size_t dwell = 4) {
        return {v_ref + halfwidth, v_ref - halfwidth, dwell};
    }
};

/// Window boundaries are inclusive.
[[nodiscard]] constexpr Band peak_detect(double v_out, const PeakDetectorConfig& cfg) noexcept {
    return (v_out > cfg.v_high || v_out < cfg.v_low) ? Band::OutOfBand : Band::InBand;
}

/// `history` holds the most recent bands, latest last. Any out-of-band
/// sample selects the coarse loop at once; the fine loop is selected only when
/// the whole history is in band.
[[nodiscard]] inline LoopMode arbitrate(LoopMode mode, std::span<const Band> history) noexcept {
    if (history.empty()) return mode;
    if (history.back() == Band::OutOfBand) return LoopMode::Coarse;
    const bool streak = std::all_of(history.begin(), history.end(),
                                    [](Band b) { return b == Band::InBand; });
    return streak ? LoopMode::Fine : mode;
}

// =============================================================================
// Clock source
// =============================================================================

struct ClockConfig {
    double f_clk = 100e6;       // Hz
    double jitter_sigma = 0.0;  // s
    std::uint64_t seed = 2;

    void validate() const {
        if (!std::isfinite(f_clk) || f_clk <= 0.0) throw ModelError("clock.f_clk must be > 0");
        if (!std::isfinite(jitter_sigma) || jitter_sigma < 0.0)
            throw ModelError("clock.jitter_sigma must be >= 0");
    }

    [[nodiscard]] double period() const noexcept { return 1.0 / f_clk; }
};

/// Time of the edge following `t`. Jittered periods that come out
/// non-positive are redrawn.
[[nodiscard]] inline double next_edge(double t, const ClockConfig& cfg, Rng& rng) {
    const double period = cfg.period();
    if (cfg.jitter_sigma == 0.0) return t + period;
    std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma);
    for (;;) {
        const double p = period + jitter(rng);
        if (p > 0.0 && t + p > t) return t + p;
    }
}

// =============================================================================
// Aggregate controller
// =============================================================================

struct ControllerConfig {
    ComparatorConfig comparator;
    PeakDetectorConfig peak;
};

/// Outcome of one clock edge.
struct EdgeDecision {
    Band band;
    LoopMode mode;
    Direction dir;
};

/// Full digital state of the dual-loop controller. Both registers start empty
/// and the coarse loop is active; whichever register the arbiter does not
/// select holds its value.
class Controller {
public:
    Controller(std::size_t n_coarse, std::size_t n_fine, ControllerConfig cfg)
        : cfg_(cfg), coarse_(n_coarse), fine_(n_fine), rng_(cfg.comparator.seed),
          history_(cfg.peak.dwell, Band::OutOfBand) {}

    /// Sample, arbitrate, compare, then shift the active register.
    EdgeDecision on_edge(double v_out, double v_ref) {
        const Band band = peak_detect(v_out, cfg_.peak);
        std::shift_left(history_.begin(), history_.end(), 1);
        history_.back() = band;
        mode_ = arbitrate(mode_, history_);
        const Direction dir = comparator_decide(v_ref, v_out, cfg_.comparator, rng_);
        shift(dir);
        return {band, mode_, dir};
    }

    /// Clock the active register once in `dir` without consulting the comparator.
    void shift(Direction dir) noexcept {
        if (mode_ == LoopMode::Coarse)
            coarse_ = ssbisr_step(coarse_, dir);
        else
            fine_ = ssbisr_step(fine_, dir);
    }

    [[nodiscard]] const ThermometerCode& coarse() const noexcept { return coarse_; }
    [[nodiscard]] const ThermometerCode& fine() const noexcept { return fine_; }
    [[nodiscard]] LoopMode mode() const noexcept { return mode_; }
    [[nodiscard]] const ControllerConfig& config() const noexcept { return cfg_; }

private:
    ControllerConfig cfg_;
    ThermometerCode coarse_;
    ThermometerCode fine_;
    LoopMode mode_ = LoopMode::Coarse;
    Rng rng_;
    std::vector<Band> history_;
};

}  // namespace dldo
