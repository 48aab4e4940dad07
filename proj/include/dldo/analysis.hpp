#pragma once

// Small-signal z-domain model of the regulator loop.
//
// Open loop:   L(z) = G_C * G_out / ((z - 1)(z - p)),   p = exp(-omega_out / f_clk)
// Closed loop (unity negative feedback) characteristic polynomial:
//              z^2 - (1 + p) z + (p + G_C * G_out)

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dldo/error.hpp"

namespace dldo {

/// Poles with magnitude within this distance of the unit circle count as unstable.
inline constexpr double kMarginalTolerance = 1e-12;

struct SmallSignalParams {
    double g_c = 1.0;          // comparator / quantizer gain
    double g_out = 8.5e-3;     // V per code step
    double omega_out = 5.88235294117647e7;  // rad/s, 1 / (170 ohm * 100 pF)
    double f_clk = 100e6;      // Hz

    void validate() const {
        if (!std::isfinite(omega_out) || omega_out <= 0.0)
            throw ModelError("analysis.omega_out must be > 0");
        if (!std::isfinite(f_clk) || f_clk <= 0.0) throw ModelError("analysis.f_clk must be > 0");
        if (!std::isfinite(g_c) || g_c < 0.0) throw ModelError("analysis.g_c must be >= 0");
        if (!std::isfinite(g_out) || g_out < 0.0) throw ModelError("analysis.g_out must be >= 0");
        const double p = output_pole();
        if (!(p > 0.0 && p < 1.0))
            throw ModelError("analysis: exp(-omega_out/f_clk) must lie in (0, 1)");
    }

    [[nodiscard]] double output_pole() const noexcept { return std::exp(-omega_out / f_clk); }
    [[nodiscard]] double loop_gain() const noexcept { return g_c * g_out; }
};

struct PoleResult {
    std::array<std::complex<double>, 2> poles;
    double max_magnitude = 0.0;
    bool stable = false;
};

[[nodiscard]] inline std::complex<double> open_loop_tf(const SmallSignalParams& params, std::complex<double> z) {
    const double p = params.output_pole();
    const std::complex<double> den = (z - 1.0) * (z - p);
    const double scale = std::max(1.0, std::abs(z) * std::abs(z));
    if (std::abs(den) <= 4.0 * std::numeric_limits<double>::epsilon() * scale)
        throw SingularityError("open_loop_tf: evaluated at an open-loop pole");
    return params.loop_gain() / den;
}

/// Roots of z^2 - (1 + p) z + (p + gain).
[[nodiscard]] inline PoleResult closed_loop_poles(double p, double gain) {
    const double b = 1.0 + p;
    const double c = p + gain;
    // (1+p)^2 - 4(p+g) rewritten to avoid cancellation when the roots are close.
    const double disc = (1.0 - p) * (1.0 - p) - 4.0 * gain;

    PoleResult r;
    if (disc >= 0.0) {
        const double hi = 0.5 * (b + std::sqrt(disc));
        const double lo = hi != 0.0 ? c / hi : 0.0;
        r.poles = {std::complex<double>(hi, 0.0), std::complex<double>(lo, 0.0)};
        r.max_magnitude = std::max(std::abs(hi), std::abs(lo));
    } else {
        const double re = 0.5 * b;
        const double im = 0.5 * std::sqrt(-disc);
        r.poles = {std::complex<double>(re, im), std::complex<double>(re, -im)};
        r.max_magnitude = std::hypot(re, im);
    }
    r.stable = r.max_magnitude < 1.0 - kMarginalTolerance;
    return r;
}

[[nodiscard]] inline PoleResult closed_loop_poles(const SmallSignalParams& params) {
    params.validate();
    return closed_loop_poles(params.output_pole(), params.loop_gain());
}

/// Jury conditions for a monic quadratic z^2 + a1 z + a0 on the circle of
/// radius `rho`: P(rho) > 0, P(-rho) > 0, |a0| < rho^2.
[[nodiscard]] constexpr bool jury_quadratic(double a1, double a0, double rho) noexcept {
    const double rho2 = rho * rho;
    const double at_pos = rho2 + a1 * rho + a0;
    const double at_neg = rho2 - a1 * rho + a0;
    return at_pos > 0.0 && at_neg > 0.0 && (a0 < rho2 && -a0 < rho2);
}

/// Coefficient-only stability test. For this loop it reduces to
/// 0 < gain < 1 - p (on the unit circle).
[[nodiscard]] inline bool stability_criterion(double p, double gain) noexcept {
    return jury_quadratic(-(1.0 + p), p + gain, 1.0 - kMarginalTolerance);
}

[[nodiscard]] inline bool stability_criterion(const SmallSignalParams& params) {
    params.validate();
    return stability_criterion(params.output_pole(), params.loop_gain());
}

/// Supremum of G_C * G_out for which the loop stays stable.
[[nodiscard]] inline double max_stable_gain(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ModelError("max_stable_gain: p must lie in (0, 1)");
    const double rho = 1.0 - kMarginalTolerance;
    return std::max(0.0, rho * rho - p);
}

// =============================================================================
// Design-space sweeps
// =============================================================================

enum class SweepAxis { FClk, CLoad, ILoad };

/// Maps one grid value on `axis` onto small-signal parameters.
using ParamMapping = std::function<SmallSignalParams(const SmallSignalParams& base, SweepAxis axis, double value)>;

/// Operating point behind the default RC mapping.
struct OperatingPoint {
    double v_ref = 1.7;      // V
    double i_load = 10e-3;   // A
    double c_load = 100e-12; // F
    double i_unit = 50e-6;   // A per code step of the analyzed loop
};

/// Default mapping: r_load = v_ref / i_load, omega_out = 1 / (r_load c_load),
/// g_out = i_unit r_load. A clock sweep keeps omega_out and g_out from `base`.
[[nodiscard]] inline ParamMapping rc_mapping(OperatingPoint op) {
    return [op](const SmallSignalParams& base, SweepAxis axis, double value) {
        SmallSignalParams out = base;
        OperatingPoint pt = op;
        switch (axis) {
        case SweepAxis::FClk:
            out.f_clk = value;
            return out;
        case SweepAxis::CLoad:
            pt.c_load = value;
            break;
        case SweepAxis::ILoad:
            pt.i_load = value;
            break;
        }
        const double r = pt.v_ref / pt.i_load;
        out.omega_out = 1.0 / (r * pt.c_load);
        out.g_out = pt.i_unit * r;
        return out;
    };
}

struct LocusPoint {
    double value = 0.0;
    std::optional<PoleResult> poles;
    std::string error;  // set when the mapped parameters are invalid
};

[[nodiscard]] inline std::vector<LocusPoint> pole_locus_sweep(const SmallSignalParams& base, SweepAxis axis,
                                                              const std::vector<double>& grid,
                                                              const ParamMapping& mapping) {
    if (grid.empty()) throw ModelError("pole_locus_sweep: empty grid");
    std::vector<LocusPoint> out;
    out.reserve(grid.size());
    for (double v : grid) {
        LocusPoint pt;
        pt.value = v;
        try {
            if (!std::isfinite(v) || v <= 0.0) throw ModelError("grid values must be positive");
            pt.poles = closed_loop_poles(mapping(base, axis, v));
        } catch (const Error& e) {
            pt.error = e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace dldo
