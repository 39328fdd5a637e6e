#include <CLI11.hpp>

#include "selforg/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"self-organization of laser-driven atoms in weak traps"};
    app.require_subcommand(1);

    selforg::CliFlags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "configuration file");
        sub->add_option("--figure", flags.figure, "named preset (fig2a ... fig8)");
        sub->add_option("--out", flags.out_dir, "output directory (overrides the config)");
        sub->add_option("--jobs", flags.jobs, "worker threads, 0 = hardware");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& v) { flags.seed = v; flags.seed_set = true; },
            "override run seed and ensemble base seed");
        sub->add_flag("--require-converged", flags.require_converged,
                      "exit 4 unless every run converged");
        return sub;
    };

    add_common(app.add_subcommand("simulate", "integrate the equations of motion"));
    add_common(app.add_subcommand("potential", "effective potential of a reduced coordinate"));
    auto* spectrum = add_common(
        app.add_subcommand("spectrum", "spectrum, edge-state and band analysis of a configuration"));
    spectrum->add_option("--summary", flags.summary_path,
                         "analyze a stored summary.json instead of simulating");
    add_common(app.add_subcommand("sweep", "ensemble statistics along a parameter axis"));
    add_common(app.add_subcommand("ensemble", "disorder-averaged statistics at fixed parameters"));
    auto* zpm = add_common(app.add_subcommand("zpm-table", "minimum trap frequency table"));
    zpm->add_option("--species", flags.species_path, "species CSV (name,lambda0_nm,gamma0_over_2pi_MHz,mass_kg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // bad usage is a configuration error
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    return selforg::run_command(cmd, flags);
}
