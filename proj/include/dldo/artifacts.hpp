#pragma once

// CSV and JSON artifacts.
//
//   waveform.csv  t_s,v_out_v,code_coarse,code_fine,i_drive_a,mode   (mode C|F)
//   metrics.json  one key per TransientMetrics field; absent values are null
//   poles.csv     axis_value,pole1_re,pole1_im,pole2_re,pole2_im,max_mag,stable

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dldo/analysis.hpp"
#include "dldo/config_file.hpp"
#include "dldo/engine.hpp"
#include "dldo/error.hpp"

namespace dldo {

inline constexpr const char* kWaveformHeader = "t_s,v_out_v,code_coarse,code_fine,i_drive_a,mode";
inline constexpr const char* kPoleHeader = "axis_value,pole1_re,pole1_im,pole2_re,pole2_im,max_mag,stable";

inline void write_waveform_csv(std::ostream& out, const Waveform& w) {
    out << kWaveformHeader << '\n';
    for (const auto& s : w.samples) {
        out << format_g9(s.t) << ',' << format_g9(s.v_out) << ',' << s.code_coarse << ',' << s.code_fine << ','
            << format_g9(s.i_drive) << ',' << (s.mode == LoopMode::Coarse ? 'C' : 'F') << '\n';
    }
}

[[nodiscard]] inline Waveform read_waveform_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("waveform: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kWaveformHeader) throw ParseError("waveform: unexpected header '" + line + "'");
    Waveform w;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        const std::string where = "waveform line " + std::to_string(line_no);
        if (f.size() != 6) throw ParseError(where + ": expected 6 fields");
        Sample s;
        s.t = parse_si(f[0], where);
        s.v_out = parse_si(f[1], where);
        s.code_coarse = static_cast<std::size_t>(parse_si(f[2], where));
        s.code_fine = static_cast<std::size_t>(parse_si(f[3], where));
        s.i_drive = parse_si(f[4], where);
        if (f[5] == "C")
            s.mode = LoopMode::Coarse;
        else if (f[5] == "F")
            s.mode = LoopMode::Fine;
        else
            throw ParseError(where + ": mode must be C or F");
        w.samples.push_back(s);
    }
    return w;
}

[[nodiscard]] inline nlohmann::json metrics_json(const TransientMetrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {
        {"settling_time", opt(m.settling_time)},
        {"undershoot_depth", m.undershoot_depth},
        {"undershoot_min_v", m.undershoot_min_v},
        {"overshoot_peak_v", m.overshoot_peak_v},
        {"ripple_pp", m.ripple_pp},
        {"recovery_time", opt(m.recovery_time)},
        {"current_efficiency", m.current_efficiency},
        {"power_efficiency", m.power_efficiency},
    };
}

/// Metrics of a run that produced no samples: every field null.
[[nodiscard]] inline nlohmann::json absent_metrics_json() {
    nlohmann::json j;
    for (const char* k : {"settling_time", "undershoot_depth", "undershoot_min_v", "overshoot_peak_v", "ripple_pp",
                          "recovery_time", "current_efficiency", "power_efficiency"})
        j[k] = nullptr;
    return j;
}

inline void write_pole_row(std::ostream& out, double axis_value, const PoleResult& r) {
    out << format_g9(axis_value) << ',' << format_exact(r.poles[0].real()) << ',' << format_exact(r.poles[0].imag())
        << ',' << format_exact(r.poles[1].real()) << ',' << format_exact(r.poles[1].imag()) << ','
        << format_exact(r.max_magnitude) << ',' << (r.stable ? 1 : 0) << '\n';
}

}  // namespace dldo
