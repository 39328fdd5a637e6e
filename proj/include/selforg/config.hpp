#ifndef SELFORG_CONFIG_HPP
#define SELFORG_CONFIG_HPP

#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "selforg/dynamics.hpp"
#include "selforg/ensemble.hpp"
#include "selforg/geometry.hpp"
#include "selforg/params.hpp"

namespace selforg {

// Plain-text configuration: INI-style sections of key = value pairs, '#'
// comments. All physics values are in natural units (lengths in lambda0,
// rates in Gamma0, trap_freq in recoil units). Unknown keys are errors.

struct GeometryBlock {
    std::string kind = "chain"; // chain | two_atom | ring | custom
    std::optional<int> n;       // required except for two_atom
    double a0 = 0.5;
    std::string dipole;         // z | circular | theta; default depends on kind
    double theta_rad = 0.5 * std::numbers::pi;
    std::vector<std::array<double, 2>> positions; // custom geometries
};

struct ParamsBlock {
    double rabi = 0.05;
    double detuning = 0.0;
    std::optional<double> trap_freq; // default 1.0 for chains, 0.1 for rings/two_atom
    double recoil_freq = 1e-3;
    double friction = 0.005;
};

struct RunBlock {
    std::string mode = "adiabatic"; // adiabatic | full
    std::string motion = "default"; // default | x | radial | xy
    double t_max = 2e6;
    double rtol = 1e-8;
    double atol = 1e-10;
    int sample_stride = 64;
    double sample_dt = 0.0;
    std::uint64_t seed = 12345;
    double disorder_amplitude = 0.0;
};

struct EnsembleBlock {
    int n_realizations = 30;
    double disorder_amplitude = 0.01;
    std::uint64_t base_seed = 12345;
};

struct SweepBlock {
    std::string axis = "a0"; // a0 | detuning | theta_rad | trap_freq
    double from = 0.3;
    double to = 1.6;
    int points = 27;
};

struct PotentialBlock {
    double coordinate_min = 0.05;
    double coordinate_max = 3.0;
    int points_per_lambda0 = 2000;
    int theta_points = 1; // > 1 scans dipole angle and tracks minima
    double theta_min = 0.0;
    double theta_max = 0.5 * std::numbers::pi;
};

struct SpectrumBlock {
    int k_points = 256;
    int zak_points = 200;
    int cutoff_cells = 100;
};

struct OutputBlock {
    std::string directory = "out";
};

struct ScenarioConfig {
    GeometryBlock geometry;
    ParamsBlock params;
    RunBlock run;
    EnsembleBlock ensemble;
    SweepBlock sweep;
    PotentialBlock potential;
    SpectrumBlock spectrum;
    OutputBlock output;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
    }
}

inline int parse_int(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const std::uint64_t x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": expected an unsigned integer, got '" +
                          v + "'");
    }
}

// "x1 y1; x2 y2; ..."
inline std::vector<std::array<double, 2>> parse_positions(const std::string& v, int line) {
    std::vector<std::array<double, 2>> out;
    std::istringstream rows(v);
    std::string row;
    while (std::getline(rows, row, ';')) {
        row = trim(row);
        if (row.empty()) continue;
        std::istringstream cols(row);
        double x = 0.0, y = 0.0;
        if (!(cols >> x >> y))
            throw ConfigError("line " + std::to_string(line) + ": expected 'x y' pair, got '" +
                              row + "'");
        std::string rest;
        if (cols >> rest)
            throw ConfigError("line " + std::to_string(line) + ": trailing data in position '" +
                              row + "'");
        out.push_back({x, y});
    }
    if (out.empty()) throw ConfigError("line " + std::to_string(line) + ": empty positions list");
    return out;
}

} // namespace detail

inline ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "geometry" && section != "params" && section != "run" &&
                section != "ensemble" && section != "sweep" && section != "potential" &&
                section != "spectrum" && section != "output")
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                              "' outside any section");

        const int ln = lineno;
        auto unknown = [&]() -> ConfigError {
            return ConfigError("line " + std::to_string(ln) + ": unknown key '" + key +
                               "' in section [" + section + "]");
        };
        if (section == "geometry") {
            if (key == "kind") cfg.geometry.kind = val;
            else if (key == "n") cfg.geometry.n = detail::parse_int(val, ln);
            else if (key == "a0") cfg.geometry.a0 = detail::parse_double(val, ln);
            else if (key == "dipole") cfg.geometry.dipole = val;
            else if (key == "theta_rad") cfg.geometry.theta_rad = detail::parse_double(val, ln);
            else if (key == "positions") cfg.geometry.positions = detail::parse_positions(val, ln);
            else throw unknown();
        } else if (section == "params") {
            if (key == "rabi") cfg.params.rabi = detail::parse_double(val, ln);
            else if (key == "detuning") cfg.params.detuning = detail::parse_double(val, ln);
            else if (key == "trap_freq") cfg.params.trap_freq = detail::parse_double(val, ln);
            else if (key == "recoil_freq") cfg.params.recoil_freq = detail::parse_double(val, ln);
            else if (key == "friction") cfg.params.friction = detail::parse_double(val, ln);
            else throw unknown();
        } else if (section == "run") {
            if (key == "mode") cfg.run.mode = val;
            else if (key == "motion") cfg.run.motion = val;
            else if (key == "t_max") cfg.run.t_max = detail::parse_double(val, ln);
            else if (key == "rtol") cfg.run.rtol = detail::parse_double(val, ln);
            else if (key == "atol") cfg.run.atol = detail::parse_double(val, ln);
            else if (key == "sample_stride") cfg.run.sample_stride = detail::parse_int(val, ln);
            else if (key == "sample_dt") cfg.run.sample_dt = detail::parse_double(val, ln);
            else if (key == "seed") cfg.run.seed = detail::parse_u64(val, ln);
            else if (key == "disorder_amplitude")
                cfg.run.disorder_amplitude = detail::parse_double(val, ln);
            else throw unknown();
        } else if (section == "ensemble") {
            if (key == "n_realizations") cfg.ensemble.n_realizations = detail::parse_int(val, ln);
            else if (key == "disorder_amplitude")
                cfg.ensemble.disorder_amplitude = detail::parse_double(val, ln);
            else if (key == "base_seed") cfg.ensemble.base_seed = detail::parse_u64(val, ln);
            else throw unknown();
        } else if (section == "sweep") {
            if (key == "axis") cfg.sweep.axis = val;
            else if (key == "from") cfg.sweep.from = detail::parse_double(val, ln);
            else if (key == "to") cfg.sweep.to = detail::parse_double(val, ln);
            else if (key == "points") cfg.sweep.points = detail::parse_int(val, ln);
            else throw unknown();
        } else if (section == "potential") {
            if (key == "coordinate_min") cfg.potential.coordinate_min = detail::parse_double(val, ln);
            else if (key == "coordinate_max")
                cfg.potential.coordinate_max = detail::parse_double(val, ln);
            else if (key == "points_per_lambda0")
                cfg.potential.points_per_lambda0 = detail::parse_int(val, ln);
            else if (key == "theta_points") cfg.potential.theta_points = detail::parse_int(val, ln);
            else if (key == "theta_min") cfg.potential.theta_min = detail::parse_double(val, ln);
            else if (key == "theta_max") cfg.potential.theta_max = detail::parse_double(val, ln);
            else throw unknown();
        } else if (section == "spectrum") {
            if (key == "k_points") cfg.spectrum.k_points = detail::parse_int(val, ln);
            else if (key == "zak_points") cfg.spectrum.zak_points = detail::parse_int(val, ln);
            else if (key == "cutoff_cells") cfg.spectrum.cutoff_cells = detail::parse_int(val, ln);
            else throw unknown();
        } else { // output
            if (key == "directory") cfg.output.directory = val;
            else throw unknown();
        }
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

// --- resolution to runnable objects ---------------------------------------------

inline double resolved_trap_freq(const ScenarioConfig& cfg) {
    if (cfg.params.trap_freq) return *cfg.params.trap_freq;
    return cfg.geometry.kind == "chain" ? 1.0 : 0.1;
}

inline Vec3c resolved_dipole(const GeometryBlock& g) {
    std::string d = g.dipole;
    if (d.empty())
        d = g.kind == "ring" ? "circular" : (g.kind == "two_atom" ? "theta" : "z");
    if (d == "z") return dipole_z();
    if (d == "circular") return dipole_circular();
    if (d == "theta") return dipole_theta(g.theta_rad);
    throw ConfigError("unknown dipole '" + d + "' (use z, circular or theta)");
}

inline AtomConfiguration resolved_geometry(const ScenarioConfig& cfg) {
    const GeometryBlock& g = cfg.geometry;
    const Vec3c d = resolved_dipole(g);
    AtomConfiguration out;
    if (g.kind == "chain") {
        if (!g.n) throw ConfigError("geometry.n is required for chains");
        out = build_chain(*g.n, g.a0, d);
    } else if (g.kind == "two_atom") {
        if (g.n && *g.n != 2) throw ConfigError("two_atom geometry has n = 2");
        out = build_chain(2, g.a0, d);
    } else if (g.kind == "ring") {
        if (!g.n) throw ConfigError("geometry.n is required for rings");
        out = build_ring(*g.n, g.a0, d);
    } else if (g.kind == "custom") {
        if (g.positions.empty()) throw ConfigError("custom geometry needs positions");
        Positions pos(static_cast<Eigen::Index>(g.positions.size()), 2);
        for (Eigen::Index i = 0; i < pos.rows(); ++i) {
            pos(i, 0) = g.positions[static_cast<std::size_t>(i)][0];
            pos(i, 1) = g.positions[static_cast<std::size_t>(i)][1];
        }
        if (g.n && *g.n != pos.rows())
            throw ConfigError("geometry.n disagrees with the positions list");
        out = build_custom(pos, d, MotionAxes::PlanarXY, g.a0);
    } else {
        throw ConfigError("unknown geometry kind '" + g.kind +
                          "' (use chain, two_atom, ring or custom)");
    }
    if (cfg.run.motion != "default") {
        if (cfg.run.motion == "x") out.motion = MotionAxes::XOnly;
        else if (cfg.run.motion == "radial") out.motion = MotionAxes::RadialOnly;
        else if (cfg.run.motion == "xy") out.motion = MotionAxes::PlanarXY;
        else throw ConfigError("unknown motion '" + cfg.run.motion + "' (use x, radial or xy)");
    }
    return out;
}

inline Scenario to_scenario(const ScenarioConfig& cfg) {
    Scenario sc;
    sc.config = resolved_geometry(cfg);
    sc.params.rabi = cfg.params.rabi;
    sc.params.detuning = cfg.params.detuning;
    sc.params.trap_freq = resolved_trap_freq(cfg);
    sc.params.recoil_freq = cfg.params.recoil_freq;
    sc.params.friction = cfg.params.friction;
    sc.params.validate();
    if (cfg.run.mode == "full") sc.mode = Mode::Full;
    else if (cfg.run.mode == "adiabatic") sc.mode = Mode::Adiabatic;
    else throw ConfigError("unknown mode '" + cfg.run.mode + "' (use adiabatic or full)");
    sc.stop.t_max = cfg.run.t_max;
    sc.stop.rtol = cfg.run.rtol;
    sc.stop.atol = cfg.run.atol;
    sc.stop.sample_stride = cfg.run.sample_stride;
    sc.stop.sample_dt = cfg.run.sample_dt;
    if (!(sc.stop.t_max > 0.0)) throw ConfigError("t_max must be > 0");
    if (cfg.run.sample_stride < 1) throw ConfigError("sample_stride must be >= 1");
    return sc;
}

inline SweepAxis resolved_sweep_axis(const std::string& axis) {
    if (axis == "a0") return SweepAxis::Spacing;
    if (axis == "detuning") return SweepAxis::Detuning;
    if (axis == "theta_rad") return SweepAxis::ThetaRad;
    if (axis == "trap_freq") return SweepAxis::TrapFreq;
    throw ConfigError("unknown sweep axis '" + axis +
                      "' (use a0, detuning, theta_rad or trap_freq)");
}

// --- figure presets ---------------------------------------------------------------
// Named parameter sets matching the published panels; each run is a labelled
// scenario written to its own subdirectory.

struct FigureRun {
    std::string label;
    ScenarioConfig config;
};

struct FigurePreset {
    std::string name;
    std::string command; // the subcommand this preset is meant for
    std::vector<FigureRun> runs;
};

inline std::vector<std::string> figure_preset_names() {
    return {"fig2a", "fig2c", "fig3a", "fig3b", "fig4", "fig5c", "fig5d", "fig6", "fig7", "fig8"};
}

inline FigurePreset figure_preset(const std::string& name) {
    auto two_atom = [](double theta) {
        ScenarioConfig c;
        c.geometry.kind = "two_atom";
        c.geometry.a0 = 0.6;
        c.geometry.dipole = "theta";
        c.geometry.theta_rad = theta;
        return c;
    };
    auto chain = [](int n, double a0) {
        ScenarioConfig c;
        c.geometry.kind = "chain";
        c.geometry.n = n;
        c.geometry.a0 = a0;
        return c;
    };
    auto ring = [](int n, double a0) {
        ScenarioConfig c;
        c.geometry.kind = "ring";
        c.geometry.n = n;
        c.geometry.a0 = a0;
        c.run.t_max = 1.2e7; // the shallow ring traps relax slowly
        return c;
    };

    FigurePreset p;
    p.name = name;
    if (name == "fig2a") {
        p.command = "potential";
        p.runs.push_back({"theta_0.50pi", two_atom(0.5 * std::numbers::pi)});
        p.runs.push_back({"theta_0.25pi", two_atom(0.25 * std::numbers::pi)});
    } else if (name == "fig2c") {
        p.command = "potential";
        ScenarioConfig c = two_atom(0.5 * std::numbers::pi);
        c.potential.theta_points = 61;
        p.runs.push_back({"minima_vs_theta", c});
    } else if (name == "fig3a" || name == "fig3b") {
        p.command = "sweep";
        ScenarioConfig c = chain(name == "fig3a" ? 4 : 10, 0.5);
        c.sweep = {"a0", 0.3, 1.6, 27};
        c.ensemble = {30, 0.01, 12345};
        p.runs.push_back({"dimer_vs_a0", c});
    } else if (name == "fig4") {
        p.command = "simulate";
        ScenarioConfig c = chain(30, 0.5);
        c.run.disorder_amplitude = 0.01;
        p.runs.push_back({"n30_chain", c});
    } else if (name == "fig5c" || name == "fig5d") {
        p.command = "sweep";
        ScenarioConfig c = ring(name == "fig5c" ? 4 : 10, 1.5);
        c.sweep = {"a0", 1.0, 2.0, 21};
        c.ensemble = {30, 0.01, 12345};
        c.run.motion = "xy"; // disorder breaks the radial constraint
        p.runs.push_back({"radius_vs_a0", c});
    } else if (name == "fig6") {
        p.command = "simulate";
        for (int n : {4, 10}) {
            for (double a0 : {0.5, 1.5}) {
                for (const char* mode : {"adiabatic", "full"}) {
                    ScenarioConfig c = chain(n, a0);
                    c.run.mode = mode;
                    c.run.disorder_amplitude = 0.01;
                    c.run.t_max = 2e5;
                    c.run.sample_dt = 100.0;
                    std::ostringstream label;
                    label << "n" << n << "_a0_" << a0 << "_" << mode;
                    p.runs.push_back({label.str(), c});
                }
            }
        }
    } else if (name == "fig7") {
        p.command = "ensemble";
        for (double a0 : {0.65, 0.7, 0.75, 0.8}) {
            ScenarioConfig c = chain(10, a0);
            c.ensemble = {20, 0.01, 12345};
            std::ostringstream label;
            label << "a0_" << a0;
            p.runs.push_back({label.str(), c});
        }
    } else if (name == "fig8") {
        p.command = "sweep";
        for (int n : {4, 10}) {
            ScenarioConfig c = chain(n, 0.5);
            c.sweep = {"detuning", -1.0, 1.0, 21};
            c.ensemble = {20, 0.01, 12345};
            p.runs.push_back({"chain_n" + std::to_string(n), c});
        }
        for (int n : {4, 10}) {
            ScenarioConfig c = ring(n, 1.5);
            c.sweep = {"detuning", -1.0, 1.0, 21};
            c.ensemble = {20, 0.01, 12345};
            c.run.motion = "xy";
            p.runs.push_back({"ring_n" + std::to_string(n), c});
        }
    } else {
        throw ConfigError("unknown figure preset '" + name + "'");
    }
    return p;
}

} // namespace selforg

#endif
