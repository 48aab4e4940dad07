#include <gtest/gtest.h>

#include <sstream>

#include "dldo/artifacts.hpp"
#include "dldo/config_file.hpp"

using namespace dldo;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

Scenario scenario(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

std::string parse_error_key(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ParseError& e) {
        return e.key();
    }
    return "<no error>";
}

void expect_same(const RunConfig& a, const RunConfig& b) {
    const auto& x = a.dldo;
    const auto& y = b.dldo;
    EXPECT_EQ(x.plant.v_dd, y.plant.v_dd);
    EXPECT_EQ(x.plant.c_load, y.plant.c_load);
    EXPECT_EQ(x.plant.load.index(), y.plant.load.index());
    if (x.plant.load.index() == 0) {
        EXPECT_EQ(std::get<0>(x.plant.load).i_load, std::get<0>(y.plant.load).i_load);
    } else {
        EXPECT_EQ(std::get<1>(x.plant.load).r_load, std::get<1>(y.plant.load).r_load);
    }
    EXPECT_EQ(x.plant.i_unit_coarse, y.plant.i_unit_coarse);
    EXPECT_EQ(x.plant.i_unit_fine, y.plant.i_unit_fine);
    EXPECT_EQ(x.plant.n_coarse, y.plant.n_coarse);
    EXPECT_EQ(x.plant.n_fine, y.plant.n_fine);
    EXPECT_EQ(x.comparator.offset, y.comparator.offset);
    EXPECT_EQ(x.comparator.uncertainty_halfwidth, y.comparator.uncertainty_halfwidth);
    EXPECT_EQ(x.comparator.noise_model, y.comparator.noise_model);
    EXPECT_EQ(x.comparator.seed, y.comparator.seed);
    EXPECT_EQ(x.v_high, y.v_high);
    EXPECT_EQ(x.v_low, y.v_low);
    EXPECT_EQ(x.dwell, y.dwell);
    EXPECT_EQ(x.i_q, y.i_q);
    EXPECT_EQ(x.clock.f_clk, y.clock.f_clk);
    EXPECT_EQ(x.clock.jitter_sigma, y.clock.jitter_sigma);
    EXPECT_EQ(x.clock.seed, y.clock.seed);
    const auto& p = a.analysis;
    const auto& q = b.analysis;
    EXPECT_EQ(p.params.g_c, q.params.g_c);
    EXPECT_EQ(p.params.g_out, q.params.g_out);
    EXPECT_EQ(p.params.omega_out, q.params.omega_out);
    EXPECT_EQ(p.params.f_clk, q.params.f_clk);
    EXPECT_EQ(p.op.v_ref, q.op.v_ref);
    EXPECT_EQ(p.op.i_load, q.op.i_load);
    EXPECT_EQ(p.op.c_load, q.op.c_load);
    EXPECT_EQ(p.op.i_unit, q.op.i_unit);
    EXPECT_EQ(p.axis, q.axis);
    ASSERT_EQ(p.grid.has_value(), q.grid.has_value());
    if (p.grid) {
        EXPECT_EQ(p.grid->values(), q.grid->values());
    }
}

}  // namespace

TEST(ParseSi, SuffixesAreExact) {
    EXPECT_EQ(parse_si("100p"), 1e-10);
    EXPECT_EQ(parse_si("10m"), 1e-2);
    EXPECT_EQ(parse_si("100M"), 1e8);
    EXPECT_EQ(parse_si("1.2n"), 1.2e-9);
    EXPECT_EQ(parse_si("312.5u"), 312.5e-6);
    EXPECT_EQ(parse_si("17k"), 17e3);
    EXPECT_EQ(parse_si("1G"), 1e9);
    EXPECT_EQ(parse_si("2.5e-3"), 2.5e-3);
    EXPECT_EQ(parse_si(" -3m "), -3e-3);
    EXPECT_EQ(parse_si("+1.7"), 1.7);
}

TEST(ParseSi, CaseSensitive) {
    EXPECT_NE(parse_si("1m"), parse_si("1M"));
    EXPECT_THROW((void)parse_si("1K"), ParseError);
    EXPECT_THROW((void)parse_si("1g"), ParseError);
}

TEST(ParseSi, Malformed) {
    for (const char* bad : {"", "abc", "1.2.3", "1e3m", "m", "10 m", "0x10"})
        EXPECT_THROW((void)parse_si(bad, "k"), ParseError) << bad;
}

TEST(FormatExact, RoundTrips) {
    for (double v : {1.7, 1e-10, 0.1 + 0.2, 5.88235294117647e7, 312.5e-6})
        EXPECT_EQ(parse_si(format_exact(v)), v);
}

TEST(Grid, LinearAndLog) {
    const auto lin = parse_grid("1:5:5");
    EXPECT_EQ(lin.values(), (std::vector<double>{1, 2, 3, 4, 5}));
    const auto lg = parse_grid("10p:10n:4:log").values();
    ASSERT_EQ(lg.size(), 4u);
    EXPECT_DOUBLE_EQ(lg[1], 1e-10);
    EXPECT_DOUBLE_EQ(lg[2], 1e-9);
    EXPECT_EQ(lg[3], 1e-8);
    EXPECT_EQ(parse_grid("100M:100M:1").values(), std::vector<double>{1e8});
}

TEST(Grid, Malformed) {
    for (const char* bad : {"1:2", "1:2:0", "1:2:2.5", "1:2:3:cubic", "0:1:3:log", "a:b:c"})
        EXPECT_THROW((void)parse_grid(bad), ParseError) << bad;
}

TEST(Config, EmptyFileGivesDefaults) {
    const auto rc = parse("");
    EXPECT_EQ(rc.dldo.plant.v_dd, 1.8);
    EXPECT_EQ(rc.dldo.plant.c_load, 100e-12);
    EXPECT_EQ(rc.dldo.clock.f_clk, 100e6);
    EXPECT_FALSE(rc.dldo.v_high);
    EXPECT_EQ(rc.analysis.params.g_c, 1.0);
    EXPECT_DOUBLE_EQ(rc.analysis.params.g_out, 50e-6 * 170.0);
    EXPECT_DOUBLE_EQ(rc.analysis.params.omega_out, 1.0 / (170.0 * 100e-12));
}

TEST(Config, ParsesAllSections) {
    const auto rc = parse(R"(
# comment
[plant]
v_dd = 1.8
c_load = 1.2n
load_model = resistive
r_load = 17k
i_unit_coarse = 350u
i_unit_fine = 50u
n_coarse = 32
n_fine = 64

[controller]
offset = 1m
uncertainty_halfwidth = 3m
noise_model = gaussian
seed = 99
v_high = 1.75
v_low = 1.55
dwell = 1
i_q = 325u

[clock]
f_clk = 200M
jitter_sigma = 10p
seed = 7

[analysis]
g_c = 15
axis = c_load
grid = 100p:10n:11:log
)");
    const auto& d = rc.dldo;
    EXPECT_EQ(d.plant.c_load, 1.2e-9);
    EXPECT_EQ(std::get<ResistiveLoad>(d.plant.load).r_load, 17e3);
    EXPECT_EQ(d.comparator.noise_model, NoiseModel::Gaussian);
    EXPECT_EQ(d.comparator.offset, 1e-3);
    EXPECT_EQ(d.comparator.seed, 99u);
    EXPECT_EQ(*d.v_low, 1.55);
    EXPECT_EQ(d.dwell, 1u);
    EXPECT_EQ(d.clock.f_clk, 200e6);
    EXPECT_EQ(d.clock.jitter_sigma, 10e-12);
    EXPECT_EQ(d.clock.seed, 7u);
    EXPECT_EQ(rc.analysis.params.g_c, 15.0);
    EXPECT_EQ(rc.analysis.params.f_clk, 200e6);
    EXPECT_EQ(rc.analysis.axis, SweepAxis::CLoad);
    EXPECT_EQ(rc.analysis.grid->points, 11u);
}

TEST(Config, UnknownKeysAndSectionsRejected) {
    EXPECT_EQ(parse_error_key("[plant]\nc_laod = 1n\n"), "plant.c_laod");
    EXPECT_EQ(parse_error_key("[plnt]\nc_load = 1n\n"), "plnt");
    EXPECT_EQ(parse_error_key("c_load = 1n\n"), "c_load");
    EXPECT_EQ(parse_error_key("[controller]\nnoise_model = pink\n"), "controller.noise_model");
    EXPECT_EQ(parse_error_key("[plant]\nc_load = 1x\n"), "plant.c_load");
    EXPECT_EQ(parse_error_key("[plant]\nn_fine = -3\n"), "plant.n_fine");
    EXPECT_EQ(parse_error_key("[plant]\nr_load = 100\n"), "plant.r_load");
    EXPECT_EQ(parse_error_key("[analysis]\naxis = v_dd\n"), "analysis.axis");
}

TEST(Config, RoundTripMaterializesDefaults) {
    for (const std::string& text :
         {std::string(""), std::string("[plant]\nload_model = resistive\nr_load = 170\n[controller]\nv_high = 1.75\n"
                                       "v_low=1.65\nnoise_model = uniform\n[analysis]\naxis = f_clk\ngrid = 50M:1G:12:log\n")}) {
        const auto a = parse(text);
        const std::string once = serialize_config(a);
        const auto b = parse(once);
        expect_same(a, b);
        EXPECT_EQ(serialize_config(b), once);
    }
}

TEST(Config, BundlesParse) {
    for (const char* name : {"fig5", "fig5_cload", "fig6", "fig8a", "fig8b"})
        EXPECT_NO_THROW((void)load_config(std::string(DLDO_BUNDLE_DIR) + "/" + name + ".cfg")) << name;
    for (const char* name : {"fig6", "fig8a", "fig8b"})
        EXPECT_NO_THROW((void)load_scenario(std::string(DLDO_BUNDLE_DIR) + "/" + name + ".scn")) << name;
}

TEST(Scenario, ParsesKeysAndSteps) {
    const auto sc = scenario("v_ref = 1.7\nduration = 15u  # total\n\n5u 170\n7.5u 1k\n");
    EXPECT_EQ(sc.v_ref, 1.7);
    EXPECT_EQ(sc.duration, 15e-6);
    EXPECT_EQ(sc.initial_v_out, 0.0);
    ASSERT_EQ(sc.load_steps.size(), 2u);
    EXPECT_EQ(sc.load_steps[1].t, 7.5e-6);
    EXPECT_EQ(sc.load_steps[1].value, 1e3);
}

TEST(Scenario, Malformed) {
    for (const char* bad : {"v_reff = 1\n", "v_ref = 1\nv_ref = 2\n", "1u 2 3\n", "2u 1\n1u 1\n", "1u\n",
                            "1u 1\n1u 2\n"})
        EXPECT_THROW((void)scenario(bad), ParseError) << bad;
}

TEST(WaveformCsv, RoundTripAtNineDigits) {
    Waveform w;
    w.samples = {{0.0, 0.0, 0, 0, 0.0, LoopMode::Coarse}, {1e-8, 1.69999999, 31, 7, 0.01125, LoopMode::Fine}};
    std::ostringstream out;
    write_waveform_csv(out, w);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kWaveformHeader);
    std::istringstream in(out.str());
    const auto back = read_waveform_csv(in);
    ASSERT_EQ(back.samples.size(), 2u);
    EXPECT_EQ(back.samples[1].code_coarse, 31u);
    EXPECT_EQ(back.samples[1].mode, LoopMode::Fine);
    EXPECT_EQ(back.samples[1].v_out, 1.69999999);
}

TEST(WaveformCsv, RejectsBadRows) {
    std::istringstream no_header("1,2,3\n");
    EXPECT_THROW((void)read_waveform_csv(no_header), ParseError);
    std::istringstream bad_mode(std::string(kWaveformHeader) + "\n0,1,0,0,0,X\n");
    EXPECT_THROW((void)read_waveform_csv(bad_mode), ParseError);
}

TEST(MetricsJson, KeysMatchFields) {
    TransientMetrics m;
    m.settling_time = 1e-6;
    const auto j = metrics_json(m);
    for (const char* k : {"settling_time", "undershoot_depth", "undershoot_min_v", "overshoot_peak_v", "ripple_pp",
                          "recovery_time", "current_efficiency", "power_efficiency"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j.size(), 8u);
    EXPECT_TRUE(j["recovery_time"].is_null());
    EXPECT_EQ(absent_metrics_json().size(), 8u);
}
