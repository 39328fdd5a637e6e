#ifndef SELFORG_COMMANDS_HPP
#define SELFORG_COMMANDS_HPP

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "selforg/config.hpp"
#include "selforg/io.hpp"
#include "selforg/potentials.hpp"
#include "selforg/zpm.hpp"

namespace selforg {

struct CliFlags {
    std::string config_path;
    std::string figure;
    std::string out_dir;       // overrides output.directory
    std::string summary_path;  // spectrum: reuse a stored run instead of simulating
    std::string species_path;  // zpm-table: species CSV instead of the builtin set
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    bool require_converged = false;
};

namespace cli {

namespace fs = std::filesystem;

struct RunArtifacts {
    std::vector<std::string> files;
    bool converged = true;
};

inline Trajectory simulate_scenario(const ScenarioConfig& cfg, AtomConfiguration& geom_out,
                                    Scenario& sc_out) {
    Scenario sc = to_scenario(cfg);
    AtomConfiguration geom = sc.config;
    if (cfg.run.disorder_amplitude > 0.0)
        geom = apply_disorder(geom, cfg.run.disorder_amplitude, cfg.run.seed);
    Trajectory traj = integrate(geom, sc.params, sc.mode, sc.stop);
    geom_out = geom;
    sc_out = sc;
    return traj;
}

inline RunArtifacts cmd_simulate(const fs::path& dir, const ScenarioConfig& cfg) {
    AtomConfiguration geom;
    Scenario sc;
    Trajectory traj = simulate_scenario(cfg, geom, sc);
    io::atomic_write(dir / "trajectory.csv", io::trajectory_csv(traj));
    io::atomic_write_json(dir / "summary.json", io::summary_json(geom, sc.params, sc.mode, traj));
    RunArtifacts out;
    out.files = {"trajectory.csv", "summary.json"};
    out.converged = traj.outcome.kind == OutcomeKind::Converged;
    return out;
}

inline RunArtifacts cmd_potential(const fs::path& dir, const ScenarioConfig& cfg) {
    Scenario sc = to_scenario(cfg);
    const PotentialBlock& pb = cfg.potential;
    RunArtifacts out;
    if (sc.config.kind == GeometryKind::Ring) {
        const int n = sc.config.n();
        const double rt = sc.config.ring_radius;
        auto force = [&](double r) { return ring_force(r, sc.params, n, rt); };
        const PotentialCurve curve = effective_potential_curve(
            force, uniform_grid(pb.coordinate_min, pb.coordinate_max, pb.points_per_lambda0));
        io::atomic_write(dir / "potential.csv", io::potential_csv(curve));
        io::atomic_write_json(dir / "minima.json", io::minima_json(curve.minima));
        out.files = {"potential.csv", "minima.json"};
        return out;
    }
    if (cfg.geometry.kind != "two_atom" && sc.config.n() != 2)
        throw ConfigError("the potential command needs a two_atom or ring geometry");
    const double a0 = cfg.geometry.a0;
    const Eigen::VectorXd grid =
        uniform_grid(pb.coordinate_min, pb.coordinate_max, pb.points_per_lambda0);
    if (pb.theta_points <= 1) {
        const double theta = cfg.geometry.theta_rad;
        auto force = [&](double a) { return two_atom_force(a, a0, sc.params, theta); };
        const PotentialCurve curve = effective_potential_curve(force, grid);
        io::atomic_write(dir / "potential.csv", io::potential_csv(curve));
        io::atomic_write_json(dir / "minima.json", io::minima_json(curve.minima));
        out.files = {"potential.csv", "minima.json"};
        return out;
    }
    // dipole-angle scan: track the first three interior minima of each curve
    std::ostringstream csv;
    csv << "theta_rad,min1_coordinate,min1_value,min2_coordinate,min2_value,"
           "min3_coordinate,min3_value\n";
    for (int j = 0; j < pb.theta_points; ++j) {
        const double theta =
            pb.theta_min + (pb.theta_max - pb.theta_min) * j / (pb.theta_points - 1);
        auto force = [&](double a) { return two_atom_force(a, a0, sc.params, theta); };
        const PotentialCurve curve = effective_potential_curve(force, grid);
        csv << io::fmt(theta);
        for (std::size_t m = 0; m < 3; ++m) {
            if (m < curve.minima.interior.size())
                csv << ',' << io::fmt(curve.minima.interior[m].coordinate) << ','
                    << io::fmt(curve.minima.interior[m].value);
            else
                csv << ",nan,nan";
        }
        csv << "\n";
    }
    io::atomic_write(dir / "theta_minima.csv", csv.str());
    out.files = {"theta_minima.csv"};
    return out;
}

inline RunArtifacts cmd_spectrum(const fs::path& dir, const ScenarioConfig& cfg,
                                 const std::string& summary_path) {
    Positions pos;
    Vec3c dipole;
    RunArtifacts out;
    if (!summary_path.empty()) {
        const io::StoredSummary s = io::load_summary(summary_path);
        pos = s.final_positions;
        dipole = s.config.dipole;
    } else {
        AtomConfiguration geom;
        Scenario sc;
        Trajectory traj = simulate_scenario(cfg, geom, sc);
        io::atomic_write_json(dir / "summary.json",
                              io::summary_json(geom, sc.params, sc.mode, traj));
        out.files.push_back("summary.json");
        out.converged = traj.outcome.kind == OutcomeKind::Converged;
        pos = traj.final_state.positions;
        dipole = geom.dipole;
    }
    const SpectralReport rep = spectrum_ipr(effective_hamiltonian(pos, dipole));
    io::atomic_write(dir / "spectrum.csv", io::spectrum_csv(rep));
    out.files.push_back("spectrum.csv");

    io::json zj;
    zj["median_ipr"] = rep.median_ipr;
    if (rep.midgap_pair) {
        const auto [i1, i2] = *rep.midgap_pair;
        zj["midgap_pair"] = {
            {"indices", {i1, i2}},
            {"ipr", {rep.ipr(i1), rep.ipr(i2)}},
            {"outer_weight",
             {outer_weight(rep.eigenvectors.col(i1)), outer_weight(rep.eigenvectors.col(i2))}},
        };
    } else {
        zj["midgap_pair"] = nullptr;
    }
    const ChainClassification cl = classify_chain(pos);
    zj["classification"] = {
        {"kind", chain_pattern_name(cl.kind)}, {"mean_gap", cl.mean_gap},
        {"gap_std", cl.gap_std},               {"a1_mean", cl.a1_mean},
        {"a2_mean", cl.a2_mean},               {"alternating_std", cl.alternating_std},
    };
    if (cl.kind != ChainPattern::Other) {
        const double a1 = cl.a1_mean, a2 = cl.kind == ChainPattern::Uniform ? cl.a1_mean : cl.a2_mean;
        const SpectrumBlock& sb = cfg.spectrum;
        const BandStructure bs = band_structure(a1, a2, dipole, sb.k_points, sb.cutoff_cells);
        io::atomic_write(dir / "bands.csv", io::bands_csv(bs));
        out.files.push_back("bands.csv");
        zj["a1"] = a1;
        zj["a2"] = a2;
        zj["min_gap"] = bs.min_gap;
        zj["zak_biorthogonal"] =
            zak_phase(a1, a2, dipole, sb.zak_points, ZakMethod::Biorthogonal, ZakBand::Lower,
                      sb.cutoff_cells);
        zj["zak_right_right"] = zak_phase(a1, a2, dipole, sb.zak_points, ZakMethod::RightRight,
                                          ZakBand::Lower, sb.cutoff_cells);
    }
    io::atomic_write_json(dir / "zak.json", zj);
    out.files.push_back("zak.json");
    return out;
}

inline RunArtifacts cmd_sweep(const fs::path& dir, const ScenarioConfig& cfg, int jobs) {
    Scenario base = to_scenario(cfg);
    const SweepAxis axis = resolved_sweep_axis(cfg.sweep.axis);
    const auto points = sweep(base, axis, cfg.sweep.from, cfg.sweep.to, cfg.sweep.points,
                              cfg.ensemble.n_realizations, cfg.ensemble.disorder_amplitude,
                              cfg.ensemble.base_seed, jobs);
    io::atomic_write(dir / "sweep.csv", io::sweep_csv(cfg.sweep.axis, points));
    RunArtifacts out;
    out.files = {"sweep.csv"};
    // rings: also relax the permutation-symmetric radial coordinate without disorder
    if (base.config.kind == GeometryKind::Ring) {
        std::ostringstream csv;
        csv << "axis,axis_value,r_trap,r_final,ratio,outcome\n";
        for (const auto& pt : points) {
            const Scenario sc = with_axis_value(base, axis, pt.axis_value);
            const auto [rf, oc] = ring_radial_integrate(sc.params, sc.config.n(),
                                                        sc.config.ring_radius,
                                                        sc.config.ring_radius, sc.stop);
            csv << cfg.sweep.axis << ',' << io::fmt(pt.axis_value) << ','
                << io::fmt(sc.config.ring_radius) << ',' << io::fmt(rf) << ','
                << io::fmt(rf / sc.config.ring_radius) << ',' << outcome_name(oc.kind) << "\n";
        }
        io::atomic_write(dir / "radial.csv", csv.str());
        out.files.push_back("radial.csv");
    }
    for (const auto& pt : points)
        if (pt.result.stats.flagged) out.converged = false;
    return out;
}

inline RunArtifacts cmd_ensemble(const fs::path& dir, const ScenarioConfig& cfg, int jobs) {
    Scenario sc = to_scenario(cfg);
    const EnsembleResult res = run_ensemble(sc, cfg.ensemble.n_realizations,
                                            cfg.ensemble.disorder_amplitude,
                                            cfg.ensemble.base_seed, jobs);
    io::atomic_write(dir / "ensemble.csv", io::ensemble_csv(res.stats));
    io::atomic_write(dir / "positions.csv",
                     io::mean_positions_csv(res.realizations, sc.config.n()));
    RunArtifacts out;
    out.files = {"ensemble.csv", "positions.csv"};
    out.converged = !res.stats.flagged;
    return out;
}

inline RunArtifacts cmd_zpm_table(const fs::path& dir, const std::string& species_path) {
    const auto species = species_path.empty() ? builtin_species() : load_species_csv(species_path);
    io::atomic_write(dir / "zpm.csv", io::zpm_csv(zpm_table(species)));
    RunArtifacts out;
    out.files = {"zpm.csv"};
    return out;
}

} // namespace cli

// Executes one subcommand. Returns 0 on success, 2 on configuration errors,
// 3 on numerical failures, 4 when --require-converged is set and a run did
// not converge. A manifest marks each completed run; failures leave an
// error.json instead.
inline int run_command(const std::string& command, const CliFlags& flags) {
    namespace fs = std::filesystem;
    fs::path top = flags.out_dir.empty() ? fs::path("out") : fs::path(flags.out_dir);
    try {
        std::vector<FigureRun> runs;
        if (!flags.figure.empty()) {
            FigurePreset preset = figure_preset(flags.figure);
            const bool alias = preset.command == "simulate" && command == "spectrum";
            if (preset.command != command && !alias)
                throw ConfigError("preset " + preset.name + " belongs to the '" + preset.command +
                                  "' command");
            runs = std::move(preset.runs);
        } else {
            FigureRun r;
            if (!flags.config_path.empty()) r.config = load_config(flags.config_path);
            else if (command != "zpm-table" &&
                     !(command == "spectrum" && !flags.summary_path.empty()))
                throw ConfigError("provide --config or --figure");
            runs.push_back(std::move(r));
        }
        if (flags.out_dir.empty()) top = runs.front().config.output.directory;

        bool all_converged = true;
        std::vector<std::string> labels;
        for (auto& run : runs) {
            if (flags.seed_set) {
                run.config.run.seed = flags.seed;
                run.config.ensemble.base_seed = flags.seed;
            }
            const fs::path dir = run.label.empty() ? top : top / run.label;
            fs::create_directories(dir);
            cli::RunArtifacts art;
            if (command == "simulate") art = cli::cmd_simulate(dir, run.config);
            else if (command == "potential") art = cli::cmd_potential(dir, run.config);
            else if (command == "spectrum")
                art = cli::cmd_spectrum(dir, run.config, flags.summary_path);
            else if (command == "sweep") art = cli::cmd_sweep(dir, run.config, flags.jobs);
            else if (command == "ensemble") art = cli::cmd_ensemble(dir, run.config, flags.jobs);
            else if (command == "zpm-table") art = cli::cmd_zpm_table(dir, flags.species_path);
            else throw ConfigError("unknown command '" + command + "'");
            io::atomic_write_json(dir / "manifest.json",
                                  io::manifest_json(command, art.files, "complete"));
            all_converged = all_converged && art.converged;
            if (!run.label.empty()) labels.push_back(run.label);
        }
        if (!labels.empty())
            io::atomic_write_json(top / "manifest.json",
                                  io::manifest_json(command, labels, "complete"));
        if (flags.require_converged && !all_converged) {
            io::write_error_json(top, 4, "non_convergence",
                                 "a run did not converge and --require-converged is set");
            std::cerr << "error: a run did not converge\n";
            return 4;
        }
        return 0;
    } catch (const ConfigError& e) {
        io::write_error_json(top, 2, "config", e.what());
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        io::write_error_json(top, 3, "numerical", e.what());
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace selforg

#endif
