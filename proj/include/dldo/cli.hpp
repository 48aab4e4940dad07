#pragma once

// Command implementations behind the `dldo` executable. Each returns the
// process exit status and writes one diagnostic line to `err` on failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dldo/analysis.hpp"
#include "dldo/artifacts.hpp"
#include "dldo/config_file.hpp"
#include "dldo/engine.hpp"
#include "dldo/error.hpp"

namespace dldo::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kParse = 2, kModel = 3 };

struct Options {
    std::optional<std::uint64_t> seed;  // overrides both comparator and clock seeds
    std::optional<double> band;         // settling band, +/- V around v_ref
};

namespace detail {

inline void apply_options(RunConfig& rc, const Options& opt) {
    if (opt.seed) {
        rc.dldo.comparator.seed = *opt.seed;
        rc.dldo.clock.seed = *opt.seed + 1;
    }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw ParseError("cannot write '" + p.string() + "'");
    return out;
}

/// Runs `body`, mapping the error taxonomy onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const SimulationDiverged& e) {
        err << "simulation diverged: " << e.what() << '\n';
        return kModel;
    } catch (const Error& e) {
        err << "model error: " << e.what() << '\n';
        return kModel;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "io error: " << e.what() << '\n';
        return kParse;
    }
}

}  // namespace detail

/// Simulates and measures; writes `waveform.csv` and `metrics.json` into `out_dir`.
inline int cmd_simulate(const std::string& config_path, const std::string& scenario_path, const std::string& out_dir,
                        const Options& opt, std::ostream& err) {
    return detail::guarded(err, [&] {
        RunConfig rc = load_config(config_path);
        detail::apply_options(rc, opt);
        const Scenario sc = load_scenario(scenario_path);
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);

        Waveform w;
        try {
            w = simulate(rc.dldo, sc);
        } catch (const SimulationDiverged& e) {
            auto wf = detail::open_out(dir / "waveform.csv");
            write_waveform_csv(wf, e.partial());
            throw;
        }
        auto wf = detail::open_out(dir / "waveform.csv");
        write_waveform_csv(wf, w);

        auto mf = detail::open_out(dir / "metrics.json");
        if (w.empty()) {
            mf << absent_metrics_json().dump(2) << '\n';
        } else {
            const double band = opt.band.value_or(default_settling_band(rc.dldo, sc));
            mf << metrics_json(measure(w, sc, rc.dldo, band)).dump(2) << '\n';
        }
        return static_cast<int>(kOk);
    });
}

/// Re-measures an existing waveform.csv.
inline int cmd_metrics(const std::string& config_path, const std::string& scenario_path,
                       const std::string& waveform_path, const std::string& out_path, const Options& opt,
                       std::ostream& err) {
    return detail::guarded(err, [&] {
        RunConfig rc = load_config(config_path);
        detail::apply_options(rc, opt);
        const Scenario sc = load_scenario(scenario_path);
        std::ifstream in(waveform_path);
        if (!in) throw ParseError("cannot open waveform '" + waveform_path + "'");
        const Waveform w = read_waveform_csv(in);
        auto out = detail::open_out(out_path);
        if (w.empty()) {
            out << absent_metrics_json().dump(2) << '\n';
        } else {
            const double band = opt.band.value_or(default_settling_band(rc.dldo, sc));
            out << metrics_json(measure(w, sc, rc.dldo, band)).dump(2) << '\n';
        }
        return static_cast<int>(kOk);
    });
}

/// Writes closed-loop poles for the [analysis] section: one row for the base
/// parameters, or one row per grid point when `axis` and `grid` are set.
/// Prints the stability boundary 1 - p of the base point to `info`.
inline int cmd_analyze(const std::string& config_path, const std::string& out_path, std::ostream& info,
                       std::ostream& err) {
    return detail::guarded(err, [&] {
        const RunConfig rc = load_config(config_path);
        const AnalysisConfig& a = rc.analysis;
        a.params.validate();

        auto out = detail::open_out(out_path);
        out << kPoleHeader << '\n';
        if (a.axis && a.grid) {
            const auto locus = pole_locus_sweep(a.params, *a.axis, a.grid->values(), rc_mapping(a.op));
            for (const auto& pt : locus) {
                if (!pt.poles) throw ModelError("analysis grid point " + format_g9(pt.value) + ": " + pt.error);
                write_pole_row(out, pt.value, *pt.poles);
            }
        } else {
            write_pole_row(out, a.params.f_clk, closed_loop_poles(a.params));
        }
        const double p = a.params.output_pole();
        info << "output_pole " << format_exact(p) << '\n';
        info << "loop_gain " << format_exact(a.params.loop_gain()) << '\n';
        info << "max_stable_gain " << format_exact(max_stable_gain(p)) << '\n';
        return static_cast<int>(kOk);
    });
}

// =============================================================================
// Sweep
// =============================================================================

struct SweepRow {
    double axis_value = 0.0;
    std::optional<TransientMetrics> metrics;
    bool diverged = false;
    std::optional<PoleResult> small_signal;
    std::string error;
};

inline constexpr const char* kSweepHeader =
    "axis_value,settling_time,undershoot_depth,undershoot_min_v,overshoot_peak_v,ripple_pp,recovery_time,"
    "current_efficiency,power_efficiency,settled,diverged,ss_max_mag,ss_stable,error";

/// Configuration of one sweep point.
[[nodiscard]] inline DldoConfig sweep_point_config(const DldoConfig& base, const Scenario& sc, SweepAxis axis,
                                                   double value) {
    DldoConfig d = base;
    switch (axis) {
    case SweepAxis::FClk:
        d.clock.f_clk = value;
        break;
    case SweepAxis::CLoad:
        d.plant.c_load = value;
        break;
    case SweepAxis::ILoad:
        if (auto* cc = std::get_if<ConstantCurrentLoad>(&d.plant.load))
            cc->i_load = value;
        else
            std::get<ResistiveLoad>(d.plant.load).r_load = sc.v_ref / value;
        break;
    }
    return d;
}

/// Small-signal parameters at a sweep point's operating point.
[[nodiscard]] inline SmallSignalParams sweep_point_params(const RunConfig& rc, const DldoConfig& d, const Scenario& sc) {
    OperatingPoint op = rc.analysis.op;
    op.v_ref = sc.v_ref;
    op.c_load = d.plant.c_load;
    const double final_value = sc.load_steps.empty()
                                   ? (d.plant.load.index() == 0 ? std::get<ConstantCurrentLoad>(d.plant.load).i_load
                                                                : std::get<ResistiveLoad>(d.plant.load).r_load)
                                   : sc.load_steps.back().value;
    op.i_load = d.plant.load.index() == 0 ? final_value : sc.v_ref / final_value;
    SmallSignalParams p = rc_mapping(op)(rc.analysis.params, SweepAxis::CLoad, op.c_load);
    p.f_clk = d.clock.f_clk;
    return p;
}

[[nodiscard]] inline SweepRow run_sweep_point(const RunConfig& rc, const Scenario& sc, SweepAxis axis, double value,
                                              std::optional<double> band) {
    SweepRow row;
    row.axis_value = value;
    try {
        const DldoConfig d = sweep_point_config(rc.dldo, sc, axis, value);
        try {
            row.small_signal = closed_loop_poles(sweep_point_params(rc, d, sc));
        } catch (const Error& e) {
            row.error = std::string("small-signal: ") + e.what();
        }
        try {
            const Waveform w = simulate(d, sc);
            if (!w.empty()) row.metrics = measure(w, sc, d, band.value_or(default_settling_band(d, sc)));
        } catch (const SimulationDiverged& e) {
            row.diverged = true;
            row.error = e.what();
        }
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

[[nodiscard]] inline std::vector<SweepRow> run_sweep(const RunConfig& rc, const Scenario& sc, SweepAxis axis,
                                                     const std::vector<double>& grid, std::optional<double> band) {
    std::vector<SweepRow> rows(grid.size());
    const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < grid.size(); begin += workers) {
        const std::size_t end = std::min(grid.size(), begin + workers);
        std::vector<std::future<SweepRow>> jobs;
        for (std::size_t i = begin; i < end; ++i)
            jobs.push_back(std::async(std::launch::async, run_sweep_point, std::cref(rc), std::cref(sc), axis,
                                      grid[i], band));
        for (std::size_t i = begin; i < end; ++i) rows[i] = jobs[i - begin].get();
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? format_g9(*v) : std::string(); };
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        out << format_g9(r.axis_value) << ',';
        if (r.metrics) {
            const auto& m = *r.metrics;
            out << opt(m.settling_time) << ',' << format_g9(m.undershoot_depth) << ',' << format_g9(m.undershoot_min_v)
                << ',' << format_g9(m.overshoot_peak_v) << ',' << format_g9(m.ripple_pp) << ','
                << opt(m.recovery_time) << ',' << format_g9(m.current_efficiency) << ','
                << format_g9(m.power_efficiency) << ',' << (m.settling_time ? 1 : 0) << ',';
        } else {
            out << ",,,,,,,,0,";
        }
        out << (r.diverged ? 1 : 0) << ',';
        if (r.small_signal)
            out << format_exact(r.small_signal->max_magnitude) << ',' << (r.small_signal->stable ? 1 : 0) << ',';
        else
            out << ",,";
        std::string e = r.error;
        std::replace(e.begin(), e.end(), ',', ';');
        out << e << '\n';
    }
}

inline int cmd_sweep(const std::string& config_path, const std::string& scenario_path, const std::string& axis,
                     const std::string& grid_spec, const std::string& out_path, const Options& opt,
                     std::ostream& err) {
    return detail::guarded(err, [&] {
        RunConfig rc = load_config(config_path);
        detail::apply_options(rc, opt);
        const Scenario sc = load_scenario(scenario_path);
        const SweepAxis ax = parse_axis(axis, "--axis");
        const GridSpec grid = parse_grid(grid_spec, "--grid");
        const auto rows = run_sweep(rc, sc, ax, grid.values(), opt.band);
        auto out = detail::open_out(out_path);
        write_sweep_csv(out, rows);
        return static_cast<int>(kOk);
    });
}

}  // namespace dldo::cli
