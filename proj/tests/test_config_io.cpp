#include <catch2/catch_amalgamated.hpp>

#include <selforg/selforg.hpp>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

using namespace selforg;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("selforg_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static inline int counter = 0;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

} // namespace

TEST_CASE("config parsing covers every section") {
    const ScenarioConfig cfg = parse_text(R"(
# full configuration
[geometry]
kind = ring
n = 6            # inline comment
a0 = 1.25
dipole = circular

[params]
rabi = 0.07
detuning = -0.2
trap_freq = 0.3
recoil_freq = 2e-3
friction = 0.01

[run]
mode = full
motion = xy
t_max = 1e5
rtol = 1e-7
atol = 1e-9
sample_stride = 8
sample_dt = 25
seed = 99
disorder_amplitude = 0.02

[ensemble]
n_realizations = 7
disorder_amplitude = 0.03
base_seed = 4242

[sweep]
axis = detuning
from = -1
to = 1
points = 11

[potential]
coordinate_min = 0.2
coordinate_max = 2.5
points_per_lambda0 = 500
theta_points = 9
theta_min = 0.1
theta_max = 1.2

[spectrum]
k_points = 128
zak_points = 400
cutoff_cells = 50

[output]
directory = some/dir
)");
    CHECK(cfg.geometry.kind == "ring");
    REQUIRE(cfg.geometry.n.has_value());
    CHECK(*cfg.geometry.n == 6);
    CHECK(cfg.geometry.a0 == 1.25);
    CHECK(cfg.geometry.dipole == "circular");
    CHECK(cfg.params.rabi == 0.07);
    CHECK(cfg.params.detuning == -0.2);
    REQUIRE(cfg.params.trap_freq.has_value());
    CHECK(*cfg.params.trap_freq == 0.3);
    CHECK(cfg.params.recoil_freq == 2e-3);
    CHECK(cfg.params.friction == 0.01);
    CHECK(cfg.run.mode == "full");
    CHECK(cfg.run.motion == "xy");
    CHECK(cfg.run.t_max == 1e5);
    CHECK(cfg.run.rtol == 1e-7);
    CHECK(cfg.run.atol == 1e-9);
    CHECK(cfg.run.sample_stride == 8);
    CHECK(cfg.run.sample_dt == 25.0);
    CHECK(cfg.run.seed == 99);
    CHECK(cfg.run.disorder_amplitude == 0.02);
    CHECK(cfg.ensemble.n_realizations == 7);
    CHECK(cfg.ensemble.disorder_amplitude == 0.03);
    CHECK(cfg.ensemble.base_seed == 4242);
    CHECK(cfg.sweep.axis == "detuning");
    CHECK(cfg.sweep.from == -1.0);
    CHECK(cfg.sweep.to == 1.0);
    CHECK(cfg.sweep.points == 11);
    CHECK(cfg.potential.coordinate_min == 0.2);
    CHECK(cfg.potential.points_per_lambda0 == 500);
    CHECK(cfg.potential.theta_points == 9);
    CHECK(cfg.spectrum.k_points == 128);
    CHECK(cfg.spectrum.zak_points == 400);
    CHECK(cfg.spectrum.cutoff_cells == 50);
    CHECK(cfg.output.directory == "some/dir");
}

TEST_CASE("config defaults survive an empty file") {
    const ScenarioConfig cfg = parse_text("");
    CHECK(cfg.geometry.kind == "chain");
    CHECK_FALSE(cfg.geometry.n.has_value());
    CHECK(cfg.geometry.a0 == 0.5);
    CHECK_FALSE(cfg.params.trap_freq.has_value());
    CHECK(cfg.run.mode == "adiabatic");
    CHECK(cfg.run.t_max == 2e6);
    CHECK(cfg.ensemble.n_realizations == 30);
    CHECK(cfg.sweep.axis == "a0");
    CHECK(cfg.output.directory == "out");
}

TEST_CASE("config errors carry line numbers") {
    CHECK_THROWS_WITH(parse_text("[geometry]\nwrong_key = 1\n"),
                      ContainsSubstring("line 2") && ContainsSubstring("wrong_key"));
    CHECK_THROWS_WITH(parse_text("\n\n[nope]\n"), ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(parse_text("[geometry\n"), ContainsSubstring("unterminated"));
    CHECK_THROWS_WITH(parse_text("a0 = 0.5\n"), ContainsSubstring("outside any section"));
    CHECK_THROWS_WITH(parse_text("[geometry]\na0 = abc\n"),
                      ContainsSubstring("line 2") && ContainsSubstring("expected a number"));
    CHECK_THROWS_WITH(parse_text("[geometry]\nn = 1.5\n"), ContainsSubstring("expected an integer"));
    CHECK_THROWS_WITH(parse_text("[geometry]\na0 =\n"), ContainsSubstring("empty key or value"));
    CHECK_THROWS_WITH(parse_text("[geometry]\njust words\n"), ContainsSubstring("key = value"));
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("custom position lists") {
    const ScenarioConfig cfg = parse_text("[geometry]\nkind = custom\npositions = 0 0; 0.7 0; 1.2 0.1\n");
    REQUIRE(cfg.geometry.positions.size() == 3);
    CHECK(cfg.geometry.positions[1][0] == 0.7);
    CHECK(cfg.geometry.positions[2][1] == 0.1);
    CHECK_THROWS_WITH(parse_text("[geometry]\npositions = 0\n"), ContainsSubstring("'x y' pair"));
    CHECK_THROWS_WITH(parse_text("[geometry]\npositions = 0 0 0\n"), ContainsSubstring("trailing"));
    CHECK_THROWS_WITH(parse_text("[geometry]\npositions = ;\n"), ContainsSubstring("empty positions"));
}

TEST_CASE("trap frequency and dipole defaults depend on the geometry kind") {
    CHECK(resolved_trap_freq(parse_text("[geometry]\nkind = chain\nn = 4\n")) == 1.0);
    CHECK(resolved_trap_freq(parse_text("[geometry]\nkind = ring\nn = 4\n")) == 0.1);
    CHECK(resolved_trap_freq(parse_text("[geometry]\nkind = two_atom\n")) == 0.1);
    CHECK(resolved_trap_freq(parse_text("[params]\ntrap_freq = 0.7\n")) == 0.7);

    GeometryBlock g;
    g.kind = "chain";
    CHECK((resolved_dipole(g) - dipole_z()).norm() == 0.0);
    g.kind = "ring";
    CHECK((resolved_dipole(g) - dipole_circular()).norm() == 0.0);
    g.kind = "two_atom";
    g.theta_rad = 0.3;
    CHECK((resolved_dipole(g) - dipole_theta(0.3)).norm() == 0.0);
    g.dipole = "z";
    CHECK((resolved_dipole(g) - dipole_z()).norm() == 0.0);
    g.dipole = "sideways";
    CHECK_THROWS_AS(resolved_dipole(g), ConfigError);
}

TEST_CASE("geometry resolution") {
    const ScenarioConfig chain = parse_text("[geometry]\nkind = chain\nn = 5\na0 = 0.8\n");
    const AtomConfiguration c = resolved_geometry(chain);
    CHECK(c.kind == GeometryKind::Chain);
    CHECK(c.n() == 5);
    CHECK(c.motion == MotionAxes::XOnly);

    CHECK_THROWS_WITH(resolved_geometry(parse_text("[geometry]\nkind = chain\n")),
                      ContainsSubstring("geometry.n"));
    CHECK_THROWS_AS(resolved_geometry(parse_text("[geometry]\nkind = two_atom\nn = 3\n")),
                    ConfigError);
    CHECK(resolved_geometry(parse_text("[geometry]\nkind = two_atom\n")).n() == 2);

    const AtomConfiguration r = resolved_geometry(parse_text("[geometry]\nkind = ring\nn = 6\na0 = 1\n"));
    CHECK(r.kind == GeometryKind::Ring);
    CHECK(r.motion == MotionAxes::RadialOnly);
    CHECK(r.ring_radius == Approx(1.0));

    const AtomConfiguration cust =
        resolved_geometry(parse_text("[geometry]\nkind = custom\npositions = 0 0; 0.7 0\n"));
    CHECK(cust.kind == GeometryKind::Custom);
    CHECK(cust.motion == MotionAxes::PlanarXY);
    CHECK_THROWS_WITH(
        resolved_geometry(parse_text("[geometry]\nkind = custom\nn = 3\npositions = 0 0; 0.7 0\n")),
        ContainsSubstring("disagrees"));
    CHECK_THROWS_AS(resolved_geometry(parse_text("[geometry]\nkind = hexagon\nn = 4\n")), ConfigError);

    const AtomConfiguration forced =
        resolved_geometry(parse_text("[geometry]\nkind = chain\nn = 4\n[run]\nmotion = xy\n"));
    CHECK(forced.motion == MotionAxes::PlanarXY);
    CHECK_THROWS_AS(resolved_geometry(parse_text("[geometry]\nkind = chain\nn = 4\n[run]\nmotion = up\n")),
                    ConfigError);
}

TEST_CASE("scenario resolution maps run settings") {
    ScenarioConfig cfg = parse_text(
        "[geometry]\nkind = chain\nn = 4\n[run]\nmode = full\nt_max = 123\nrtol = 1e-6\n"
        "atol = 1e-8\nsample_stride = 3\nsample_dt = 7\n");
    const Scenario sc = to_scenario(cfg);
    CHECK(sc.mode == Mode::Full);
    CHECK(sc.stop.t_max == 123.0);
    CHECK(sc.stop.rtol == 1e-6);
    CHECK(sc.stop.atol == 1e-8);
    CHECK(sc.stop.sample_stride == 3);
    CHECK(sc.stop.sample_dt == 7.0);
    CHECK(sc.params.trap_freq == 1.0);

    cfg.run.mode = "sideways";
    CHECK_THROWS_AS(to_scenario(cfg), ConfigError);
    cfg.run.mode = "adiabatic";
    cfg.run.t_max = 0.0;
    CHECK_THROWS_AS(to_scenario(cfg), ConfigError);
    cfg.run.t_max = 100.0;
    cfg.run.sample_stride = 0;
    CHECK_THROWS_AS(to_scenario(cfg), ConfigError);

    CHECK(resolved_sweep_axis("a0") == SweepAxis::Spacing);
    CHECK(resolved_sweep_axis("detuning") == SweepAxis::Detuning);
    CHECK(resolved_sweep_axis("theta_rad") == SweepAxis::ThetaRad);
    CHECK(resolved_sweep_axis("trap_freq") == SweepAxis::TrapFreq);
    CHECK_THROWS_AS(resolved_sweep_axis("rabi"), ConfigError);
}

TEST_CASE("figure presets resolve to runnable configs") {
    const auto names = figure_preset_names();
    CHECK(names.size() == 10);
    for (const auto& n : names) {
        const FigurePreset p = figure_preset(n);
        CHECK(p.name == n);
        CHECK_FALSE(p.runs.empty());
        for (const auto& run : p.runs) {
            CHECK_FALSE(run.label.empty());
            CHECK_NOTHROW(to_scenario(run.config));
        }
    }
    CHECK_THROWS_AS(figure_preset("fig99"), ConfigError);

    const FigurePreset f2 = figure_preset("fig2a");
    CHECK(f2.command == "potential");
    REQUIRE(f2.runs.size() == 2);
    CHECK(f2.runs[0].config.geometry.kind == "two_atom");
    CHECK(f2.runs[0].config.geometry.theta_rad == Approx(0.5 * std::numbers::pi));

    const FigurePreset f3 = figure_preset("fig3a");
    CHECK(f3.command == "sweep");
    CHECK(f3.runs[0].config.sweep.axis == "a0");
    CHECK(f3.runs[0].config.sweep.points == 27);
    CHECK(f3.runs[0].config.geometry.n == 4);

    const FigurePreset f5 = figure_preset("fig5c");
    CHECK(f5.runs[0].config.geometry.kind == "ring");
    CHECK(f5.runs[0].config.run.motion == "xy");

    CHECK(figure_preset("fig6").runs.size() == 8);
}

TEST_CASE("doubles round trip through text formatting") {
    for (double v : {1.0 / 3.0, 0.1, 2e-3, 6.626e-34, -0.0, 123456789.123456789}) {
        const std::string s = io::fmt(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("atomic writes create parent directories") {
    TempDir tmp;
    const fs::path nested = tmp.path / "a" / "b" / "file.txt";
    io::atomic_write(nested, "payload");
    CHECK(slurp(nested) == "payload");
    io::atomic_write(nested, "replaced");
    CHECK(slurp(nested) == "replaced");
    io::atomic_write_json(tmp.path / "j.json", io::json{{"x", 1}});
    CHECK(slurp(tmp.path / "j.json").find("\"x\": 1") != std::string::npos);
}

TEST_CASE("trajectory csv layout") {
    Scenario sc;
    sc.config = build_chain(2, 0.6);
    sc.params.trap_freq = 1.0;
    sc.params.rabi = 0.05;
    sc.stop.t_max = 500.0;
    sc.stop.sample_dt = 100.0;
    const Trajectory traj = integrate(sc.config, sc.params, Mode::Adiabatic, sc.stop);
    const std::string csv = io::trajectory_csv(traj);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "time,x0,y0,px0,py0,re_sigma0,im_sigma0,x1,y1,px1,py1,re_sigma1,im_sigma1");
    std::size_t rows = 0;
    std::string line;
    std::vector<std::string> first;
    while (std::getline(in, line)) {
        if (rows == 0) first = split_line(line);
        ++rows;
    }
    CHECK(rows == traj.samples.size());
    REQUIRE_FALSE(first.empty());
    CHECK(std::stod(first[0]) == 0.0); // the initial state is always sampled
    CHECK(first.size() == 13);
}

TEST_CASE("summary json round trips through load_summary") {
    TempDir tmp;
    Scenario sc;
    sc.config = build_chain(3, 0.55, dipole_theta(0.4));
    sc.params.trap_freq = 1.0;
    sc.params.rabi = 0.04;
    sc.params.detuning = -0.1;
    sc.stop.t_max = 2e4;
    const Trajectory traj = integrate(sc.config, sc.params, Mode::Adiabatic, sc.stop);
    const io::json j = io::summary_json(sc.config, sc.params, sc.mode, traj);
    io::atomic_write_json(tmp.path / "summary.json", j);

    const io::StoredSummary s = io::load_summary(tmp.path / "summary.json");
    CHECK(s.config.kind == GeometryKind::Chain);
    CHECK(s.config.spacing == sc.config.spacing);
    CHECK(s.config.motion == sc.config.motion);
    CHECK((s.config.dipole - sc.config.dipole).norm() == 0.0);
    CHECK(s.params.rabi == sc.params.rabi);
    CHECK(s.params.detuning == sc.params.detuning);
    CHECK(s.params.trap_freq == sc.params.trap_freq);
    CHECK(s.outcome == outcome_name(traj.outcome.kind));
    REQUIRE(s.final_positions.rows() == 3);
    CHECK((s.final_positions - traj.final_state.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK((io::positions_from_json(j.at("geometry").at("trap_centers")) - sc.config.trap_centers)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    CHECK_THROWS_AS(io::load_summary(tmp.path / "missing.json"), ConfigError);
    io::atomic_write(tmp.path / "bad.json", "not json");
    CHECK_THROWS_AS(io::load_summary(tmp.path / "bad.json"), ConfigError);
}

TEST_CASE("artifact writers emit stable headers") {
    auto force = [](double x) { return -(x - 1.0); };
    const PotentialCurve curve = effective_potential_curve(force, uniform_grid(0.5, 1.5, 50));
    const std::string pot = io::potential_csv(curve);
    CHECK(pot.rfind("coordinate,value\n", 0) == 0);
    const io::json mj = io::minima_json(curve.minima);
    CHECK(mj.contains("interior"));
    CHECK(mj.contains("boundary"));
    REQUIRE(mj["interior"].size() == 1);
    CHECK(mj["interior"][0]["coordinate"].get<double>() == Approx(1.0).margin(1e-9));

    const SpectralReport rep = spectrum_ipr(effective_hamiltonian(
        dimerized_chain_positions(6, 0.4, 0.7), dipole_z()));
    const std::string spec = io::spectrum_csv(rep);
    CHECK(spec.rfind("index,re,im,ipr,outer_weight\n", 0) == 0);
    CHECK(std::count(spec.begin(), spec.end(), '\n') == 7);

    const BandStructure bs = band_structure(0.4, 0.7, dipole_z(), 16, 30);
    const std::string bands = io::bands_csv(bs);
    CHECK(bands.rfind("k,re_lower,im_lower,re_upper,im_upper\n", 0) == 0);
    CHECK(std::count(bands.begin(), bands.end(), '\n') == 17);

    const std::string zpm = io::zpm_csv(zpm_table(builtin_species()));
    CHECK(zpm.rfind("species,a_1.5,a_1,a_0.5\n", 0) == 0);
    CHECK(zpm.find("Rb87_D2,") != std::string::npos);
}

TEST_CASE("ensemble and sweep csv shapes") {
    std::vector<RealizationResult> rs(2);
    rs[0].outcome.kind = OutcomeKind::Converged;
    rs[0].outcome.time = 10.0;
    rs[0].final_state.positions = Positions::Zero(1, 2);
    rs[0].final_state.positions << 0.1, 0.2;
    rs[0].max_population = 0.01;
    rs[1] = rs[0];
    rs[1].final_state.positions << 0.3, 0.4;
    RealizationResult skipped;
    skipped.outcome.kind = OutcomeKind::Timeout;
    skipped.final_state.positions = Positions::Zero(1, 2);
    rs.push_back(skipped);

    const std::string mp = io::mean_positions_csv(rs, 1);
    std::istringstream in(mp);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "atom,mean_x,std_x,mean_y,std_y,n");
    REQUIRE(std::getline(in, line));
    const auto f = split_line(line);
    REQUIRE(f.size() == 6);
    CHECK(std::stod(f[1]) == Approx(0.2));
    CHECK(std::stod(f[2]) == Approx(0.1));
    CHECK(std::stod(f[3]) == Approx(0.3));
    CHECK(f[5] == "2");

    const EnsembleStats st = reduce_stats(rs);
    const std::string ens = io::ensemble_csv(st);
    CHECK(ens.rfind(io::sweep_csv_header(), 0) == 0);
    CHECK(std::count(ens.begin(), ens.end(), '\n') == 8); // header + 7 observables
    CHECK(ens.find("max_population") != std::string::npos);
    CHECK(ens.find("ring_intact_fraction") != std::string::npos);

    std::vector<SweepPoint> pts(2);
    pts[0].axis_value = 0.4;
    pts[0].result.stats = st;
    pts[1].axis_value = 0.6;
    pts[1].result.stats = st;
    const std::string sw = io::sweep_csv("a0", pts);
    CHECK(std::count(sw.begin(), sw.end(), '\n') == 15);
    CHECK(sw.find("a0,0.40000000000000002,dimer_strength") != std::string::npos);
}

TEST_CASE("manifest and error artifacts") {
    TempDir tmp;
    const io::json m = io::manifest_json("simulate", {"a.csv", "b.json"}, "complete");
    CHECK(m["command"] == "simulate");
    CHECK(m["status"] == "complete");
    CHECK(m["artifacts"].size() == 2);
    io::write_error_json(tmp.path, 2, "config", "broken");
    const io::json e = io::json::parse(slurp(tmp.path / "error.json"));
    CHECK(e["error"]["code"] == 2);
    CHECK(e["error"]["kind"] == "config");
    CHECK(e["error"]["message"] == "broken");
}

TEST_CASE("run_command writes artifacts and returns zero on success") {
    TempDir tmp;
    CliFlags flags;
    flags.out_dir = (tmp.path / "zpm").string();
    CHECK(run_command("zpm-table", flags) == 0);
    CHECK(fs::exists(tmp.path / "zpm" / "zpm.csv"));
    const io::json m = io::json::parse(slurp(tmp.path / "zpm" / "manifest.json"));
    CHECK(m["status"] == "complete");
    CHECK(m["command"] == "zpm-table");
}

TEST_CASE("run_command maps configuration problems to exit code 2") {
    TempDir tmp;
    CliFlags flags;
    flags.out_dir = tmp.path.string();
    CHECK(run_command("simulate", flags) == 2); // neither --config nor --figure
    io::json e = io::json::parse(slurp(tmp.path / "error.json"));
    CHECK(e["error"]["code"] == 2);

    const fs::path bad = tmp.path / "bad.cfg";
    io::atomic_write(bad, "[geometry]\nkind = chain\nn = 4\nwrong_key = 1\n");
    flags.config_path = bad.string();
    CHECK(run_command("simulate", flags) == 2);
    e = io::json::parse(slurp(tmp.path / "error.json"));
    CHECK(e["error"]["message"].get<std::string>().find("wrong_key") != std::string::npos);

    CliFlags preset;
    preset.out_dir = tmp.path.string();
    preset.figure = "fig2a";
    CHECK(run_command("simulate", preset) == 2); // fig2a belongs to the potential command

    const fs::path good = tmp.path / "good.cfg";
    io::atomic_write(good, "[geometry]\nkind = two_atom\n");
    CliFlags okflags;
    okflags.config_path = good.string();
    okflags.out_dir = tmp.path.string();
    CHECK(run_command("frobnicate", okflags) == 2);
}

TEST_CASE("run_command maps numerical failures to exit code 3") {
    TempDir tmp;
    // a stored run whose final positions coincide poisons the spectrum analysis
    AtomConfiguration cfg = build_chain(2, 0.5);
    SystemParams p;
    Trajectory traj;
    traj.outcome.kind = OutcomeKind::Timeout;
    traj.final_state.positions = Positions::Zero(2, 2);
    traj.final_state.momenta = Positions::Zero(2, 2);
    traj.final_state.coherences = Eigen::VectorXcd::Zero(2);
    io::atomic_write_json(tmp.path / "stored.json",
                          io::summary_json(cfg, p, Mode::Adiabatic, traj));

    CliFlags flags;
    flags.out_dir = (tmp.path / "spec").string();
    flags.summary_path = (tmp.path / "stored.json").string();
    CHECK(run_command("spectrum", flags) == 3);
    const io::json e = io::json::parse(slurp(tmp.path / "spec" / "error.json"));
    CHECK(e["error"]["code"] == 3);
    CHECK(e["error"]["kind"] == "numerical");
}

TEST_CASE("run_command honors require-converged with exit code 4") {
    TempDir tmp;
    const fs::path cfgp = tmp.path / "slow.cfg";
    io::atomic_write(cfgp,
                     "[geometry]\nkind = two_atom\na0 = 0.6\n[run]\nt_max = 50\n");
    CliFlags flags;
    flags.config_path = cfgp.string();
    flags.out_dir = (tmp.path / "run").string();
    flags.require_converged = true;
    CHECK(run_command("simulate", flags) == 4);
    CHECK(fs::exists(tmp.path / "run" / "manifest.json")); // run completed, just not converged
    const io::json e = io::json::parse(slurp(tmp.path / "run" / "error.json"));
    CHECK(e["error"]["code"] == 4);
    CHECK(e["error"]["kind"] == "non_convergence");

    flags.require_converged = false;
    CHECK(run_command("simulate", flags) == 0);
}

TEST_CASE("run_command seed flag overrides the configured seeds") {
    TempDir tmp;
    const fs::path cfgp = tmp.path / "seeded.cfg";
    io::atomic_write(cfgp, "[geometry]\nkind = chain\nn = 3\na0 = 0.6\n"
                           "[run]\nt_max = 100\ndisorder_amplitude = 0.01\nseed = 1\n");
    CliFlags flags;
    flags.config_path = cfgp.string();
    flags.out_dir = (tmp.path / "o").string();
    flags.seed = 777;
    flags.seed_set = true;
    REQUIRE(run_command("simulate", flags) == 0);
    const io::json s = io::json::parse(slurp(tmp.path / "o" / "summary.json"));
    CHECK(s["geometry"]["seed"].get<std::uint64_t>() == 777);
    CHECK(s["geometry"]["disorder_amplitude"].get<double>() == 0.01);
}

TEST_CASE("potential command writes curves and minima") {
    TempDir tmp;
    const fs::path cfgp = tmp.path / "pot.cfg";
    io::atomic_write(cfgp, "[geometry]\nkind = two_atom\na0 = 0.6\n"
                           "[potential]\ncoordinate_min = 0.3\ncoordinate_max = 1.6\n"
                           "points_per_lambda0 = 400\n");
    CliFlags flags;
    flags.config_path = cfgp.string();
    flags.out_dir = (tmp.path / "o").string();
    REQUIRE(run_command("potential", flags) == 0);
    CHECK(fs::exists(tmp.path / "o" / "potential.csv"));
    const io::json mj = io::json::parse(slurp(tmp.path / "o" / "minima.json"));
    CHECK(mj["interior"].size() >= 1);

    // angle scan variant replaces the curve with a minima track
    io::atomic_write(cfgp, "[geometry]\nkind = two_atom\na0 = 0.6\n"
                           "[potential]\ncoordinate_min = 0.3\ncoordinate_max = 1.6\n"
                           "points_per_lambda0 = 300\ntheta_points = 3\n"
                           "theta_min = 0.9\ntheta_max = 1.6\n");
    flags.out_dir = (tmp.path / "scan").string();
    REQUIRE(run_command("potential", flags) == 0);
    const std::string scan = slurp(tmp.path / "scan" / "theta_minima.csv");
    CHECK(scan.rfind("theta_rad,min1_coordinate,min1_value,", 0) == 0);
    CHECK(std::count(scan.begin(), scan.end(), '\n') == 4);

    // the potential command refuses many-atom chains
    io::atomic_write(cfgp, "[geometry]\nkind = chain\nn = 4\n");
    flags.out_dir = (tmp.path / "bad").string();
    CHECK(run_command("potential", flags) == 2);
}

TEST_CASE("spectrum command reuses a stored summary") {
    TempDir tmp;
    // store a dimerized final state, then analyze it without re-simulating
    AtomConfiguration cfg = build_chain(8, 0.5);
    SystemParams p;
    Trajectory traj;
    traj.outcome.kind = OutcomeKind::Converged;
    traj.final_state.positions = dimerized_chain_positions(8, 0.45, 0.65);
    traj.final_state.momenta = Positions::Zero(8, 2);
    traj.final_state.coherences = Eigen::VectorXcd::Zero(8);
    io::atomic_write_json(tmp.path / "stored.json",
                          io::summary_json(cfg, p, Mode::Adiabatic, traj));

    CliFlags flags;
    flags.summary_path = (tmp.path / "stored.json").string();
    flags.out_dir = (tmp.path / "o").string();
    REQUIRE(run_command("spectrum", flags) == 0);
    CHECK(fs::exists(tmp.path / "o" / "spectrum.csv"));
    CHECK(fs::exists(tmp.path / "o" / "bands.csv"));
    const io::json z = io::json::parse(slurp(tmp.path / "o" / "zak.json"));
    CHECK(z["classification"]["kind"] == "dimerized");
    CHECK(z["a1"].get<double>() == Approx(0.45).margin(1e-12));
    CHECK(z["min_gap"].get<double>() > 0.0);
    CHECK(z.contains("zak_biorthogonal"));
}
