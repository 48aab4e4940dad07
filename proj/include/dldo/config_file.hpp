#pragma once

// Plain-text run configuration and scenario files.
//
// Config files are INI-style with sections [plant], [controller], [clock] and
// [analysis]. Values are SI numbers with an optional case-sensitive scale
// suffix (p n u m k M G). Unknown sections or keys are rejected; missing keys
// take the defaults documented in README.md.
//
// Scenario files hold `key = value` lines for v_ref, duration and
// initial_v_out, plus one `t value` line per load step, in time order.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dldo/analysis.hpp"
#include "dldo/engine.hpp"
#include "dldo/error.hpp"

namespace dldo {

// =============================================================================
// Numbers
// =============================================================================

/// Parses "100p", "10m", "1.7", "2.5e-3". The suffix is folded into the
/// decimal exponent before conversion so "100p" yields exactly 1e-10.
[[nodiscard]] inline double parse_si(std::string_view text, const std::string& key = {}) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.empty()) throw ParseError("empty numeric value for '" + key + "'", key);

    int scale = 0;
    switch (text.back()) {
    case 'p': scale = -12; break;
    case 'n': scale = -9; break;
    case 'u': scale = -6; break;
    case 'm': scale = -3; break;
    case 'k': scale = 3; break;
    case 'M': scale = 6; break;
    case 'G': scale = 9; break;
    default: break;
    }
    std::string literal(scale != 0 ? text.substr(0, text.size() - 1) : text);
    if (scale != 0) {
        if (literal.find_first_of("eE") != std::string::npos)
            throw ParseError("cannot combine exponent and suffix in '" + std::string(text) + "'", key);
        literal += "e" + std::to_string(scale);
    }
    double value = 0.0;
    const char* first = literal.data();
    const char* last = literal.data() + literal.size();
    if (!literal.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || literal.empty())
        throw ParseError("invalid number '" + std::string(text) + "' for '" + key + "'", key);
    return value;
}

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] inline std::string format_exact(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

/// Nine significant digits, used for waveform and sweep artifacts.
[[nodiscard]] inline std::string format_g9(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.9g", v);
    return buf.data();
}

// =============================================================================
// Sweep grids
// =============================================================================

struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 1;
    bool log = false;

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> out;
        out.reserve(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double f = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
            out.push_back(log ? start * std::pow(stop / start, f) : start + (stop - start) * f);
        }
        if (points > 1) out.back() = stop;
        return out;
    }

    [[nodiscard]] std::string to_string() const {
        return format_exact(start) + ":" + format_exact(stop) + ":" + std::to_string(points) + (log ? ":log" : ":lin");
    }
};

/// `start:stop:points[:log|:lin]`; linear unless `:log` is given.
[[nodiscard]] inline GridSpec parse_grid(std::string_view text, const std::string& key = "grid") {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3 && parts.size() != 4)
        throw ParseError("grid must be start:stop:points[:log|:lin], got '" + std::string(text) + "'", key);
    GridSpec g;
    g.start = parse_si(parts[0], key);
    g.stop = parse_si(parts[1], key);
    const double n = parse_si(parts[2], key);
    if (!(n >= 1.0) || n != std::floor(n)) throw ParseError("grid point count must be a positive integer", key);
    g.points = static_cast<std::size_t>(n);
    if (parts.size() == 4) {
        if (parts[3] == "log")
            g.log = true;
        else if (parts[3] != "lin")
            throw ParseError("grid spacing must be 'log' or 'lin'", key);
    }
    if (g.log && !(g.start > 0.0 && g.stop > 0.0)) throw ParseError("log grid needs positive bounds", key);
    return g;
}

// =============================================================================
// Run configuration
// =============================================================================

struct AnalysisConfig {
    SmallSignalParams params;
    OperatingPoint op;
    std::optional<SweepAxis> axis;
    std::optional<GridSpec> grid;
};

struct RunConfig {
    DldoConfig dldo;
    AnalysisConfig analysis;
};

[[nodiscard]] inline std::string axis_name(SweepAxis a) {
    switch (a) {
    case SweepAxis::FClk: return "f_clk";
    case SweepAxis::CLoad: return "c_load";
    case SweepAxis::ILoad: return "i_load";
    }
    return "?";
}

[[nodiscard]] inline SweepAxis parse_axis(std::string_view s, const std::string& key = "axis") {
    if (s == "f_clk") return SweepAxis::FClk;
    if (s == "c_load") return SweepAxis::CLoad;
    if (s == "i_load") return SweepAxis::ILoad;
    throw ParseError("axis must be one of f_clk, c_load, i_load; got '" + std::string(s) + "'", key);
}

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"plant", {"v_dd", "c_load", "load_model", "i_load", "r_load", "i_unit_coarse", "i_unit_fine", "n_coarse",
                   "n_fine"}},
        {"controller", {"offset", "uncertainty_halfwidth", "noise_model", "seed", "v_high", "v_low", "dwell", "i_q"}},
        {"clock", {"f_clk", "jitter_sigma", "seed"}},
        {"analysis", {"g_c", "g_out", "omega_out", "f_clk", "v_ref", "i_load", "i_unit", "axis", "grid"}},
    };
    return schema;
}

class SectionReader {
public:
    SectionReader(const boost::property_tree::ptree* tree, std::string name)
        : tree_(tree), name_(std::move(name)) {}

    [[nodiscard]] std::optional<std::string> text(const std::string& key) const {
        if (!tree_) return std::nullopt;
        auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        return it->second.get_value<std::string>();
    }

    [[nodiscard]] std::string qualified(const std::string& key) const { return name_ + "." + key; }

    void number(const std::string& key, double& out) const {
        if (auto t = text(key)) out = parse_si(*t, qualified(key));
    }

    [[nodiscard]] std::optional<double> number(const std::string& key) const {
        if (auto t = text(key)) return parse_si(*t, qualified(key));
        return std::nullopt;
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) const {
        if (auto t = text(key)) {
            const double v = parse_si(*t, qualified(key));
            if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
                throw ParseError(qualified(key) + " must be a non-negative integer", qualified(key));
            out = static_cast<Int>(v);
        }
    }

private:
    const boost::property_tree::ptree* tree_;
    std::string name_;
};

}  // namespace detail

[[nodiscard]] inline RunConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError("config line " + std::to_string(e.line()) + ": " + e.message());
    }

    const auto& schema = detail::config_schema();
    for (const auto& [section, body] : tree) {
        auto it = schema.find(section);
        if (it == schema.end()) {
            if (!body.data().empty()) throw ParseError("key '" + section + "' outside any section", section);
            throw ParseError("unknown section [" + section + "]", section);
        }
        for (const auto& [key, value] : body) {
            (void)value;
            if (!it->second.count(key))
                throw ParseError("unknown key '" + section + "." + key + "'", section + "." + key);
        }
    }
    auto section = [&](const std::string& name) {
        auto it = tree.find(name);
        return detail::SectionReader(it == tree.not_found() ? nullptr : &it->second, name);
    };

    RunConfig rc;
    DldoConfig& d = rc.dldo;

    const auto plant = section("plant");
    plant.number("v_dd", d.plant.v_dd);
    plant.number("c_load", d.plant.c_load);
    plant.number("i_unit_coarse", d.plant.i_unit_coarse);
    plant.number("i_unit_fine", d.plant.i_unit_fine);
    plant.integer("n_coarse", d.plant.n_coarse);
    plant.integer("n_fine", d.plant.n_fine);
    const std::string model = plant.text("load_model").value_or("current");
    if (model == "current") {
        ConstantCurrentLoad cc;
        plant.number("i_load", cc.i_load);
        if (plant.text("r_load")) throw ParseError("plant.r_load given with load_model = current", "plant.r_load");
        d.plant.load = cc;
    } else if (model == "resistive") {
        ResistiveLoad r;
        plant.number("r_load", r.r_load);
        if (plant.text("i_load")) throw ParseError("plant.i_load given with load_model = resistive", "plant.i_load");
        d.plant.load = r;
    } else {
        throw ParseError("plant.load_model must be 'current' or 'resistive'", "plant.load_model");
    }

    const auto ctl = section("controller");
    ctl.number("offset", d.comparator.offset);
    ctl.number("uncertainty_halfwidth", d.comparator.uncertainty_halfwidth);
    ctl.integer("seed", d.comparator.seed);
    if (auto nm = ctl.text("noise_model")) {
        if (*nm == "none")
            d.comparator.noise_model = NoiseModel::None;
        else if (*nm == "uniform")
            d.comparator.noise_model = NoiseModel::Uniform;
        else if (*nm == "gaussian")
            d.comparator.noise_model = NoiseModel::Gaussian;
        else
            throw ParseError("controller.noise_model must be none, uniform or gaussian", "controller.noise_model");
    }
    d.v_high = ctl.number("v_high");
    d.v_low = ctl.number("v_low");
    ctl.integer("dwell", d.dwell);
    ctl.number("i_q", d.i_q);

    const auto clk = section("clock");
    clk.number("f_clk", d.clock.f_clk);
    clk.number("jitter_sigma", d.clock.jitter_sigma);
    clk.integer("seed", d.clock.seed);

    // Small-signal defaults are derived from the plant at the analysis operating point.
    const auto an = section("analysis");
    AnalysisConfig& a = rc.analysis;
    a.op.c_load = d.plant.c_load;
    a.op.i_unit = d.plant.i_unit_fine;
    an.number("v_ref", a.op.v_ref);
    an.number("i_load", a.op.i_load);
    an.number("i_unit", a.op.i_unit);
    if (!(a.op.v_ref > 0.0 && a.op.i_load > 0.0))
        throw ParseError("analysis.v_ref and analysis.i_load must be > 0", "analysis.i_load");
    const double r_op = a.op.v_ref / a.op.i_load;
    a.params.g_c = 1.0;
    a.params.g_out = a.op.i_unit * r_op;
    a.params.omega_out = 1.0 / (r_op * a.op.c_load);
    a.params.f_clk = d.clock.f_clk;
    an.number("g_c", a.params.g_c);
    an.number("g_out", a.params.g_out);
    an.number("omega_out", a.params.omega_out);
    an.number("f_clk", a.params.f_clk);
    if (auto ax = an.text("axis")) a.axis = parse_axis(*ax, "analysis.axis");
    if (auto g = an.text("grid")) a.grid = parse_grid(*g, "analysis.grid");
    return rc;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    return parse_config(in);
}

/// Writes every parameter, defaults included.
[[nodiscard]] inline std::string serialize_config(const RunConfig& rc) {
    const DldoConfig& d = rc.dldo;
    std::ostringstream o;
    auto kv = [&](const char* k, double v) { o << k << " = " << format_exact(v) << "\n"; };
    auto ki = [&](const char* k, std::uint64_t v) { o << k << " = " << v << "\n"; };

    o << "[plant]\n";
    kv("v_dd", d.plant.v_dd);
    kv("c_load", d.plant.c_load);
    if (const auto* cc = std::get_if<ConstantCurrentLoad>(&d.plant.load)) {
        o << "load_model = current\n";
        kv("i_load", cc->i_load);
    } else {
        o << "load_model = resistive\n";
        kv("r_load", std::get<ResistiveLoad>(d.plant.load).r_load);
    }
    kv("i_unit_coarse", d.plant.i_unit_coarse);
    kv("i_unit_fine", d.plant.i_unit_fine);
    ki("n_coarse", d.plant.n_coarse);
    ki("n_fine", d.plant.n_fine);

    o << "\n[controller]\n";
    kv("offset", d.comparator.offset);
    kv("uncertainty_halfwidth", d.comparator.uncertainty_halfwidth);
    static constexpr const char* noise_names[] = {"none", "uniform", "gaussian"};
    o << "noise_model = " << noise_names[static_cast<int>(d.comparator.noise_model)] << "\n";
    ki("seed", d.comparator.seed);
    if (d.v_high) kv("v_high", *d.v_high);
    if (d.v_low) kv("v_low", *d.v_low);
    ki("dwell", d.dwell);
    kv("i_q", d.i_q);

    o << "\n[clock]\n";
    kv("f_clk", d.clock.f_clk);
    kv("jitter_sigma", d.clock.jitter_sigma);
    ki("seed", d.clock.seed);

    const AnalysisConfig& a = rc.analysis;
    o << "\n[analysis]\n";
    kv("v_ref", a.op.v_ref);
    kv("i_load", a.op.i_load);
    kv("i_unit", a.op.i_unit);
    kv("g_c", a.params.g_c);
    kv("g_out", a.params.g_out);
    kv("omega_out", a.params.omega_out);
    kv("f_clk", a.params.f_clk);
    if (a.axis) o << "axis = " << axis_name(*a.axis) << "\n";
    if (a.grid) o << "grid = " << a.grid->to_string() << "\n";
    return o.str();
}

// =============================================================================
// Scenario files
// =============================================================================

[[nodiscard]] inline Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    sc.load_steps.clear();
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string a;
        if (!(ls >> a)) continue;
        const std::string where = "scenario line " + std::to_string(line_no) + ": ";

        if (auto eq = line.find('='); eq != std::string::npos) {
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t\r") + 1);
            if (key != "v_ref" && key != "duration" && key != "initial_v_out")
                throw ParseError(where + "unknown key '" + key + "'", key);
            if (!seen.insert(key).second) throw ParseError(where + "duplicate key '" + key + "'", key);
            const double v = parse_si(value, key);
            if (key == "v_ref")
                sc.v_ref = v;
            else if (key == "duration")
                sc.duration = v;
            else
                sc.initial_v_out = v;
            continue;
        }
        std::string b, extra;
        if (!(ls >> b) || (ls >> extra))
            throw ParseError(where + "expected 'key = value' or 't value'", "load_steps");
        sc.load_steps.push_back({parse_si(a, "load_steps"), parse_si(b, "load_steps")});
        if (sc.load_steps.size() > 1 && !(sc.load_steps.back().t > sc.load_steps[sc.load_steps.size() - 2].t))
            throw ParseError(where + "load step times must be strictly increasing", "load_steps");
    }
    return sc;
}

[[nodiscard]] inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario '" + path + "'");
    return parse_scenario(in);
}

}  // namespace dldo
