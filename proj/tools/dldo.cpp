// dldo: simulate, measure, analyze and sweep the dual-loop digital LDO model.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dldo/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Behavioral simulator and small-signal analyzer for a self-clocked dual-loop digital LDO"};
    app.require_subcommand(1);

    std::string config, scenario, out, axis, grid, waveform;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> band_text;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "run configuration file")->required();
        sub->add_option("--seed", seed, "seed for comparator noise and clock jitter");
    };

    auto* sim = app.add_subcommand("simulate", "run a transient and write waveform.csv + metrics.json");
    add_common(sim);
    sim->add_option("--scenario", scenario, "scenario file")->required();
    sim->add_option("--out", out, "output directory")->required();
    sim->add_option("--band", band_text, "settling band around v_ref, SI suffixes allowed");

    auto* met = app.add_subcommand("metrics", "re-measure an existing waveform.csv");
    add_common(met);
    met->add_option("--scenario", scenario, "scenario file")->required();
    met->add_option("waveform", waveform, "waveform.csv to measure")->required();
    met->add_option("--out", out, "metrics.json path")->required();
    met->add_option("--band", band_text, "settling band around v_ref, SI suffixes allowed");

    auto* ana = app.add_subcommand("analyze", "closed-loop poles of the [analysis] section");
    ana->add_option("--config", config, "run configuration file")->required();
    ana->add_option("--out", out, "pole CSV path")->required();

    auto* swp = app.add_subcommand("sweep", "one transient per grid point plus small-signal verdicts");
    add_common(swp);
    swp->add_option("--scenario", scenario, "scenario file")->required();
    swp->add_option("--axis", axis, "f_clk | c_load | i_load")->required();
    swp->add_option("--grid", grid, "start:stop:points[:log|:lin]")->required();
    swp->add_option("--out", out, "sweep CSV path")->required();
    swp->add_option("--band", band_text, "settling band around v_ref, SI suffixes allowed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : dldo::cli::kUsage;
    }

    std::optional<double> band;
    if (band_text) {
        try {
            band = dldo::parse_si(*band_text, "--band");
        } catch (const dldo::ParseError& e) {
            std::cerr << "parse error: " << e.what() << '\n';
            return dldo::cli::kParse;
        }
    }
    const dldo::cli::Options opt{seed, band};
    if (*sim) return dldo::cli::cmd_simulate(config, scenario, out, opt, std::cerr);
    if (*met) return dldo::cli::cmd_metrics(config, scenario, waveform, out, opt, std::cerr);
    if (*ana) return dldo::cli::cmd_analyze(config, out, std::cout, std::cerr);
    if (*swp) return dldo::cli::cmd_sweep(config, scenario, axis, grid, out, opt, std::cerr);
    return dldo::cli::kUsage;
}
