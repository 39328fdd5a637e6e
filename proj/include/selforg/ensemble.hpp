#ifndef SELFORG_ENSEMBLE_HPP
#define SELFORG_ENSEMBLE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "selforg/analysis.hpp"
#include "selforg/dynamics.hpp"
#include "selforg/geometry.hpp"
#include "selforg/params.hpp"
#include "selforg/rng.hpp"

namespace selforg {

struct Scenario {
    AtomConfiguration config;
    SystemParams params;
    Mode mode = Mode::Adiabatic;
    StopCriteria stop;
};

struct RealizationResult {
    std::uint64_t seed = 0;
    Outcome outcome;
    SimState final_state;
    double max_population = 0.0;
    // geometry-derived observables of the final configuration
    double dimer = std::numeric_limits<double>::quiet_NaN();          // chains, n >= 3
    double mean_gap = std::numeric_limits<double>::quiet_NaN();       // chains
    double mean_radius = std::numeric_limits<double>::quiet_NaN();    // rings
    double radius_rel_std = std::numeric_limits<double>::quiet_NaN(); // rings
    bool ring_intact = false; // converged and radially uniform to 2%
};

struct SummaryStat {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    int n = 0;
};

struct EnsembleStats {
    int n_total = 0;
    int n_converged = 0;
    int n_collided = 0;
    int n_timeout = 0;
    int n_breach = 0;
    SummaryStat dimer;            // converged realizations only
    SummaryStat mean_gap;
    SummaryStat mean_radius;
    SummaryStat radius_rel_std;
    SummaryStat convergence_time;
    SummaryStat max_population;   // all realizations
    double ring_intact_fraction = 0.0;
    bool flagged = false;         // nothing converged: report, do not trust means
};

struct EnsembleResult {
    std::vector<RealizationResult> realizations;
    EnsembleStats stats;
};

namespace detail {

inline void fill_observables(RealizationResult& r, const AtomConfiguration& cfg) {
    const Positions& pos = r.final_state.positions;
    const auto n = pos.rows();
    if (cfg.kind == GeometryKind::Ring) {
        const Eigen::Vector2d c = cfg.trap_centroid();
        double sum = 0.0;
        Eigen::VectorXd rad(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            rad(i) = std::hypot(pos(i, 0) - c(0), pos(i, 1) - c(1));
            sum += rad(i);
        }
        r.mean_radius = sum / static_cast<double>(n);
        const double var = (rad.array() - r.mean_radius).square().mean();
        r.radius_rel_std = std::sqrt(var) / r.mean_radius;
        r.ring_intact = r.outcome.kind == OutcomeKind::Converged && r.radius_rel_std < 0.02;
        return;
    }
    // chain-like: gaps in x order
    if (n >= 2) {
        std::vector<int> idx = x_order(pos);
        double gsum = 0.0;
        for (std::size_t k = 0; k + 1 < idx.size(); ++k)
            gsum += std::hypot(pos(idx[k + 1], 0) - pos(idx[k], 0),
                               pos(idx[k + 1], 1) - pos(idx[k], 1));
        r.mean_gap = gsum / static_cast<double>(n - 1);
    }
    if (n >= 3 && r.outcome.kind != OutcomeKind::Collided) {
        try {
            r.dimer = dimer_strength(pos, cfg.dipole);
        } catch (const SeparationError&) {
            // overlapping atoms: leave NaN
        }
    }
}

struct StatAccum {
    double sum = 0.0, sumsq = 0.0;
    int n = 0;
    void add(double v) {
        if (std::isnan(v)) return;
        sum += v;
        sumsq += v * v;
        ++n;
    }
    SummaryStat finish() const {
        SummaryStat s;
        s.n = n;
        if (n == 0) return s;
        s.mean = sum / n;
        const double var = std::max(0.0, sumsq / n - s.mean * s.mean);
        s.std = std::sqrt(var);
        return s;
    }
};

} // namespace detail

inline EnsembleStats reduce_stats(const std::vector<RealizationResult>& rs) {
    EnsembleStats st;
    st.n_total = static_cast<int>(rs.size());
    detail::StatAccum dimer, gap, radius, relstd, ctime, pop;
    int intact = 0;
    for (const auto& r : rs) {
        switch (r.outcome.kind) {
            case OutcomeKind::Converged: ++st.n_converged; break;
            case OutcomeKind::Collided: ++st.n_collided; break;
            case OutcomeKind::Timeout: ++st.n_timeout; break;
            case OutcomeKind::ExcitationBreach: ++st.n_breach; break;
        }
        pop.add(r.max_population);
        if (r.ring_intact) ++intact;
        if (r.outcome.kind != OutcomeKind::Converged) continue;
        dimer.add(r.dimer);
        gap.add(r.mean_gap);
        radius.add(r.mean_radius);
        relstd.add(r.radius_rel_std);
        ctime.add(r.outcome.time);
    }
    st.dimer = dimer.finish();
    st.mean_gap = gap.finish();
    st.mean_radius = radius.finish();
    st.radius_rel_std = relstd.finish();
    st.convergence_time = ctime.finish();
    st.max_population = pop.finish();
    st.ring_intact_fraction = st.n_total > 0 ? static_cast<double>(intact) / st.n_total : 0.0;
    st.flagged = st.n_converged == 0;
    return st;
}

inline RealizationResult run_realization(const Scenario& sc, double disorder_amplitude,
                                         std::uint64_t seed) {
    RealizationResult r;
    r.seed = seed;
    AtomConfiguration cfg = disorder_amplitude > 0.0
                                ? apply_disorder(sc.config, disorder_amplitude, seed)
                                : sc.config;
    StopCriteria stop = sc.stop;
    stop.sample_dt = 0.0;
    stop.sample_stride = std::numeric_limits<int>::max(); // final state only
    Trajectory traj = integrate(cfg, sc.params, sc.mode, stop);
    r.outcome = traj.outcome;
    r.final_state = std::move(traj.final_state);
    r.max_population = traj.max_population;
    detail::fill_observables(r, cfg);
    return r;
}

namespace detail {

// Runs tasks 0..n-1 on `jobs` threads. Task i writes only slot i, so the
// result is independent of scheduling; the first exception (lowest index)
// is rethrown after all workers finish.
template <class Task>
void run_indexed(std::size_t n, int jobs, Task&& task) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n ? n : 1)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            errors[static_cast<std::size_t>(w)] = {n, nullptr};
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    task(i);
                } catch (...) {
                    auto& slot = errors[static_cast<std::size_t>(w)];
                    if (i < slot.first) slot = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    std::pair<std::size_t, std::exception_ptr> first{n, nullptr};
    for (const auto& e : errors)
        if (e.second && e.first < first.first) first = e;
    if (first.second) std::rethrow_exception(first.second);
}

} // namespace detail

inline EnsembleResult run_ensemble(const Scenario& sc, int n_realizations,
                                   double disorder_amplitude, std::uint64_t base_seed,
                                   int jobs = 0) {
    if (n_realizations < 1) throw ConfigError("ensemble needs at least one realization");
    sc.params.validate();
    validate_config(sc.config);
    EnsembleResult out;
    out.realizations.resize(static_cast<std::size_t>(n_realizations));
    detail::run_indexed(static_cast<std::size_t>(n_realizations), jobs, [&](std::size_t i) {
        out.realizations[i] =
            run_realization(sc, disorder_amplitude, realization_seed(base_seed, i));
    });
    out.stats = reduce_stats(out.realizations);
    return out;
}

// --- parameter sweeps --------------------------------------------------------

enum class SweepAxis { Spacing, Detuning, ThetaRad, TrapFreq };

inline const char* sweep_axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Spacing: return "a0";
        case SweepAxis::Detuning: return "detuning";
        case SweepAxis::ThetaRad: return "theta_rad";
        default: return "trap_freq";
    }
}

inline Scenario with_axis_value(const Scenario& base, SweepAxis axis, double v) {
    Scenario sc = base;
    switch (axis) {
        case SweepAxis::Spacing:
            switch (sc.config.kind) {
                case GeometryKind::Chain: {
                    const auto n = static_cast<int>(sc.config.trap_centers.rows());
                    AtomConfiguration fresh = build_chain(n, v, sc.config.dipole);
                    fresh.motion = sc.config.motion;
                    sc.config = fresh;
                    break;
                }
                case GeometryKind::Ring: {
                    const auto n = static_cast<int>(sc.config.trap_centers.rows());
                    AtomConfiguration fresh = build_ring(n, v, sc.config.dipole);
                    fresh.motion = sc.config.motion;
                    sc.config = fresh;
                    break;
                }
                default:
                    throw ConfigError("cannot sweep spacing of a custom geometry");
            }
            break;
        case SweepAxis::Detuning:
            sc.params.detuning = v;
            break;
        case SweepAxis::ThetaRad:
            sc.config.dipole = dipole_theta(v);
            break;
        case SweepAxis::TrapFreq:
            sc.params.trap_freq = v;
            break;
    }
    return sc;
}

struct SweepPoint {
    double axis_value = 0.0;
    EnsembleResult result;
};

inline std::vector<SweepPoint> sweep(const Scenario& base, SweepAxis axis, double from, double to,
                                     int points, int n_realizations, double disorder_amplitude,
                                     std::uint64_t base_seed, int jobs = 0) {
    if (points < 1) throw ConfigError("sweep needs at least one point");
    if (n_realizations < 1) throw ConfigError("sweep needs at least one realization");
    base.params.validate();
    std::vector<SweepPoint> out(static_cast<std::size_t>(points));
    std::vector<Scenario> scen;
    scen.reserve(out.size());
    for (int p = 0; p < points; ++p) {
        const double v = points == 1 ? from : from + (to - from) * p / (points - 1);
        out[static_cast<std::size_t>(p)].axis_value = v;
        out[static_cast<std::size_t>(p)].result.realizations.resize(
            static_cast<std::size_t>(n_realizations));
        scen.push_back(with_axis_value(base, axis, v));
    }
    const std::size_t total = out.size() * static_cast<std::size_t>(n_realizations);
    detail::run_indexed(total, jobs, [&](std::size_t g) {
        const std::size_t p = g / static_cast<std::size_t>(n_realizations);
        const std::size_t i = g % static_cast<std::size_t>(n_realizations);
        out[p].result.realizations[i] =
            run_realization(scen[p], disorder_amplitude, realization_seed(base_seed, g));
    });
    for (auto& pt : out) pt.result.stats = reduce_stats(pt.result.realizations);
    return out;
}

} // namespace selforg

#endif
