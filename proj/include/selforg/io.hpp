#ifndef SELFORG_IO_HPP
#define SELFORG_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selforg/analysis.hpp"
#include "selforg/dynamics.hpp"
#include "selforg/ensemble.hpp"
#include "selforg/geometry.hpp"
#include "selforg/potentials.hpp"
#include "selforg/zpm.hpp"

namespace selforg::io {

using json = nlohmann::ordered_json;

// full double precision so regression diffs are bitwise
inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    static std::atomic<unsigned> counter{0};
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline void atomic_write_json(const std::filesystem::path& path, const json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

// --- scenario metadata -------------------------------------------------------

inline const char* geometry_kind_name(GeometryKind k) {
    switch (k) {
        case GeometryKind::Chain: return "chain";
        case GeometryKind::Ring: return "ring";
        default: return "custom";
    }
}

inline const char* motion_name(MotionAxes m) {
    switch (m) {
        case MotionAxes::XOnly: return "x";
        case MotionAxes::RadialOnly: return "radial";
        default: return "xy";
    }
}

inline const char* mode_name(Mode m) { return m == Mode::Full ? "full" : "adiabatic"; }

inline json dipole_json(const Vec3c& d) {
    json j = json::array();
    for (int i = 0; i < 3; ++i) j.push_back({d(i).real(), d(i).imag()});
    return j;
}

inline Vec3c dipole_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("bad dipole in summary");
    Vec3c d;
    for (int i = 0; i < 3; ++i) d(i) = cplx(j[i][0].get<double>(), j[i][1].get<double>());
    return d;
}

inline json positions_json(const Positions& p) {
    json j = json::array();
    for (Eigen::Index i = 0; i < p.rows(); ++i) j.push_back({p(i, 0), p(i, 1)});
    return j;
}

inline Positions positions_from_json(const json& j) {
    Positions p(static_cast<Eigen::Index>(j.size()), 2);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        p(i, 0) = j[static_cast<std::size_t>(i)][0].get<double>();
        p(i, 1) = j[static_cast<std::size_t>(i)][1].get<double>();
    }
    return p;
}

// --- trajectory CSV ------------------------------------------------------------
// Columns: time, then per atom x, y, px, py, re_sigma, im_sigma.

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    const auto n = traj.final_state.positions.rows();
    out << "time";
    for (Eigen::Index i = 0; i < n; ++i)
        out << ",x" << i << ",y" << i << ",px" << i << ",py" << i << ",re_sigma" << i
            << ",im_sigma" << i;
    out << "\n";
    for (const auto& s : traj.samples) {
        out << fmt(s.time);
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx sg = s.coherences.size() == n ? s.coherences(i) : cplx(0.0, 0.0);
            out << ',' << fmt(s.positions(i, 0)) << ',' << fmt(s.positions(i, 1)) << ','
                << fmt(s.momenta(i, 0)) << ',' << fmt(s.momenta(i, 1)) << ',' << fmt(sg.real())
                << ',' << fmt(sg.imag());
        }
        out << "\n";
    }
    return out.str();
}

// --- run summary JSON ------------------------------------------------------------
// Carries everything needed to redo the analysis without re-simulation.

inline json summary_json(const AtomConfiguration& cfg, const SystemParams& p, Mode mode,
                         const Trajectory& traj) {
    json j;
    j["geometry"] = {
        {"kind", geometry_kind_name(cfg.kind)},
        {"n", cfg.n()},
        {"spacing", cfg.spacing},
        {"ring_radius", cfg.ring_radius},
        {"motion", motion_name(cfg.motion)},
        {"dipole", dipole_json(cfg.dipole)},
        {"seed", cfg.seed},
        {"disorder_amplitude", cfg.disorder_amplitude},
        {"trap_centers", positions_json(cfg.trap_centers)},
    };
    j["params"] = {
        {"rabi", p.rabi},           {"detuning", p.detuning},
        {"trap_freq", p.trap_freq}, {"recoil_freq", p.recoil_freq},
        {"friction", p.friction},
    };
    j["mode"] = mode_name(mode);
    json out;
    out["kind"] = outcome_name(traj.outcome.kind);
    out["time"] = traj.outcome.time;
    if (traj.outcome.kind == OutcomeKind::Collided) {
        out["pair"] = {traj.outcome.pair_a, traj.outcome.pair_b};
    }
    j["outcome"] = out;
    j["max_population"] = traj.max_population;
    const SimState& f = traj.final_state;
    json fin;
    fin["time"] = f.time;
    fin["positions"] = positions_json(f.positions);
    fin["momenta"] = positions_json(f.momenta);
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < f.coherences.size(); ++i) {
        re.push_back(f.coherences(i).real());
        im.push_back(f.coherences(i).imag());
    }
    fin["re_sigma"] = re;
    fin["im_sigma"] = im;
    j["final"] = fin;

    json an;
    if (cfg.kind == GeometryKind::Chain && cfg.n() >= 3 &&
        traj.outcome.kind != OutcomeKind::Collided) {
        try {
            an["dimer_strength"] = dimer_strength(f.positions, cfg.dipole);
            if (cfg.n() >= 4) {
                const ChainClassification c = classify_chain(f.positions);
                an["classification"] = {
                    {"kind", chain_pattern_name(c.kind)},
                    {"mean_gap", c.mean_gap},
                    {"gap_std", c.gap_std},
                    {"a1_mean", c.a1_mean},
                    {"a2_mean", c.a2_mean},
                    {"alternating_std", c.alternating_std},
                };
            }
        } catch (const SeparationError&) {
            an["dimer_strength"] = nullptr;
        }
    }
    if (cfg.kind == GeometryKind::Ring) {
        RealizationResult r;
        r.outcome = traj.outcome;
        r.final_state = f;
        detail::fill_observables(r, cfg);
        an["mean_radius"] = r.mean_radius;
        an["radius_rel_std"] = r.radius_rel_std;
        an["ring_intact"] = r.ring_intact;
    }
    j["analysis"] = an;
    return j;
}

struct StoredSummary {
    AtomConfiguration config;
    SystemParams params;
    Positions final_positions;
    std::string outcome;
};

inline StoredSummary load_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open summary: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("bad summary JSON: " + std::string(e.what()));
    }
    StoredSummary s;
    const auto& g = j.at("geometry");
    const std::string kind = g.at("kind").get<std::string>();
    s.config.kind = kind == "chain"    ? GeometryKind::Chain
                    : kind == "ring" ? GeometryKind::Ring
                                     : GeometryKind::Custom;
    s.config.dipole = dipole_from_json(g.at("dipole"));
    s.config.spacing = g.at("spacing").get<double>();
    s.config.ring_radius = g.at("ring_radius").get<double>();
    s.config.trap_centers = positions_from_json(g.at("trap_centers"));
    const std::string motion = g.at("motion").get<std::string>();
    s.config.motion = motion == "x"        ? MotionAxes::XOnly
                      : motion == "radial" ? MotionAxes::RadialOnly
                                           : MotionAxes::PlanarXY;
    const auto& p = j.at("params");
    s.params.rabi = p.at("rabi").get<double>();
    s.params.detuning = p.at("detuning").get<double>();
    s.params.trap_freq = p.at("trap_freq").get<double>();
    s.params.recoil_freq = p.at("recoil_freq").get<double>();
    s.params.friction = p.at("friction").get<double>();
    s.final_positions = positions_from_json(j.at("final").at("positions"));
    s.outcome = j.at("outcome").at("kind").get<std::string>();
    return s;
}

// --- potential curves ------------------------------------------------------------

inline std::string potential_csv(const PotentialCurve& c) {
    std::ostringstream out;
    out << "coordinate,value\n";
    for (Eigen::Index i = 0; i < c.coordinate.size(); ++i)
        out << fmt(c.coordinate(i)) << ',' << fmt(c.value(i)) << "\n";
    return out.str();
}

inline json minima_json(const MinimaReport& m) {
    json j;
    json in = json::array(), bd = json::array();
    for (const auto& x : m.interior) in.push_back({{"coordinate", x.coordinate}, {"value", x.value}});
    for (const auto& x : m.boundary) bd.push_back({{"coordinate", x.coordinate}, {"value", x.value}});
    j["interior"] = in;
    j["boundary"] = bd;
    return j;
}

// --- spectra ------------------------------------------------------------

inline std::string spectrum_csv(const SpectralReport& rep) {
    std::ostringstream out;
    out << "index,re,im,ipr,outer_weight\n";
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
        out << i << ',' << fmt(rep.eigenvalues(i).real()) << ',' << fmt(rep.eigenvalues(i).imag())
            << ',' << fmt(rep.ipr(i)) << ',' << fmt(outer_weight(rep.eigenvectors.col(i))) << "\n";
    return out.str();
}

inline std::string bands_csv(const BandStructure& bs) {
    std::ostringstream out;
    out << "k,re_lower,im_lower,re_upper,im_upper\n";
    for (Eigen::Index i = 0; i < bs.k.size(); ++i)
        out << fmt(bs.k(i)) << ',' << fmt(bs.bands(i, 0).real()) << ',' << fmt(bs.bands(i, 0).imag())
            << ',' << fmt(bs.bands(i, 1).real()) << ',' << fmt(bs.bands(i, 1).imag()) << "\n";
    return out.str();
}

// --- ensembles and sweeps ------------------------------------------------------------
// Long format: one observable per row, stable as observables are added.

inline void append_stat_rows(std::ostringstream& out, const std::string& axis, double axis_value,
                             const EnsembleStats& st) {
    auto row = [&](const char* name, const SummaryStat& s) {
        out << axis << ',' << fmt(axis_value) << ',' << name << ',' << fmt(s.mean) << ','
            << fmt(s.std) << ',' << s.n << ',' << st.n_total << ',' << st.n_converged << ','
            << st.n_collided << ',' << st.n_timeout << ',' << st.n_breach << ','
            << (st.flagged ? 1 : 0) << "\n";
    };
    row("dimer_strength", st.dimer);
    row("mean_gap", st.mean_gap);
    row("mean_radius", st.mean_radius);
    row("radius_rel_std", st.radius_rel_std);
    row("convergence_time", st.convergence_time);
    row("max_population", st.max_population);
    SummaryStat intact;
    intact.mean = st.ring_intact_fraction;
    intact.std = 0.0;
    intact.n = st.n_total;
    row("ring_intact_fraction", intact);
}

inline const char* sweep_csv_header() {
    return "axis,axis_value,observable,mean,std,n,n_total,n_converged,n_collided,n_timeout,"
           "n_breach,flagged\n";
}

inline std::string ensemble_csv(const EnsembleStats& st) {
    std::ostringstream out;
    out << sweep_csv_header();
    append_stat_rows(out, "none", 0.0, st);
    return out.str();
}

inline std::string sweep_csv(const std::string& axis, const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << sweep_csv_header();
    for (const auto& pt : points) append_stat_rows(out, axis, pt.axis_value, pt.result.stats);
    return out.str();
}

// Per-atom mean/std of final positions across converged realizations.
inline std::string mean_positions_csv(const std::vector<RealizationResult>& rs, int n_atoms) {
    std::vector<detail::StatAccum> ax(static_cast<std::size_t>(n_atoms)),
        ay(static_cast<std::size_t>(n_atoms));
    for (const auto& r : rs) {
        if (r.outcome.kind != OutcomeKind::Converged) continue;
        for (int i = 0; i < n_atoms; ++i) {
            ax[static_cast<std::size_t>(i)].add(r.final_state.positions(i, 0));
            ay[static_cast<std::size_t>(i)].add(r.final_state.positions(i, 1));
        }
    }
    std::ostringstream out;
    out << "atom,mean_x,std_x,mean_y,std_y,n\n";
    for (int i = 0; i < n_atoms; ++i) {
        const auto sx = ax[static_cast<std::size_t>(i)].finish();
        const auto sy = ay[static_cast<std::size_t>(i)].finish();
        out << i << ',' << fmt(sx.mean) << ',' << fmt(sx.std) << ',' << fmt(sy.mean) << ','
            << fmt(sy.std) << ',' << sx.n << "\n";
    }
    return out.str();
}

// --- zero-point-motion table ------------------------------------------------------------

inline std::string zpm_csv(const ZpmTable& t) {
    std::ostringstream out;
    out << "species";
    for (double a : t.spacings) out << ",a_" << a;
    out << "\n";
    for (std::size_t i = 0; i < t.species.size(); ++i) {
        out << t.species[i].name;
        for (Eigen::Index j = 0; j < t.values.cols(); ++j)
            out << ',' << fmt(t.values(static_cast<Eigen::Index>(i), j));
        out << "\n";
    }
    return out.str();
}

// --- run manifest ------------------------------------------------------------
// Written last; its presence with status "complete" marks a finished run.

inline json manifest_json(const std::string& command, const std::vector<std::string>& artifacts,
                          const std::string& status) {
    json j;
    j["command"] = command;
    j["status"] = status;
    j["artifacts"] = artifacts;
    return j;
}

inline void write_error_json(const std::filesystem::path& dir, int code, const std::string& kind,
                             const std::string& message) {
    json j;
    j["error"] = {{"code", code}, {"kind", kind}, {"message", message}};
    atomic_write_json(dir / "error.json", j);
}

} // namespace selforg::io

#endif
