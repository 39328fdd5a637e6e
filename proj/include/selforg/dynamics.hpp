#ifndef SELFORG_DYNAMICS_HPP
#define SELFORG_DYNAMICS_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "selforg/geometry.hpp"
#include "selforg/greens.hpp"
#include "selforg/params.hpp"
#include "selforg/rk45.hpp"

namespace selforg {

enum class Mode { Full, Adiabatic };

enum class OutcomeKind { Converged, Collided, Timeout, ExcitationBreach };

struct Outcome {
    OutcomeKind kind = OutcomeKind::Timeout;
    double time = 0.0;
    int pair_a = -1;
    int pair_b = -1;
};

inline const char* outcome_name(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Converged: return "converged";
    case OutcomeKind::Collided: return "collided";
    case OutcomeKind::Timeout: return "timeout";
    case OutcomeKind::ExcitationBreach: return "excitation_breach";
    }
    return "unknown";
}

struct SimState {
    double time = 0.0;
    Positions positions;   // lambda0
    Positions momenta;     // hbar k0
    Eigen::VectorXcd coherences;
};

struct StopCriteria {
    double t_max = 2e6;                 // Gamma0^-1
    double eps_p = 1e-6;                // steady-state momentum bound, hbar k0
    double eps_f = 1e-8;                // steady-state net-force bound, hbar k0 Gamma0
    double hold_periods = 10.0;         // trap periods the bounds must hold
    double collision_distance = 0.05;   // lambda0
    double breach_population = 0.1;     // mean-field validity bound on |sigma|^2
    double rtol = 1e-8;
    double atol = 1e-10;
    double sample_dt = 0.0;             // > 0: sample on a uniform grid (exact times)
    int sample_stride = 64;             // otherwise: record every k-th accepted step
    std::uint64_t max_steps = 50'000'000;
};

struct Trajectory {
    std::vector<SimState> samples;
    SimState final_state;
    Outcome outcome;
    double max_population = 0.0;
};

// Steady coherences at fixed positions: solve (C - delta I) sigma = Omega 1.
// With the diagonal convention C_nn = -i/2 this is the fixed point of the
// driven-dissipative coherence equation. A large solve residual indicates a
// (near-)singular system and raises NumericalError.
inline Eigen::VectorXcd steady_coherences(const CouplingMatrix& cm, const SystemParams& p) {
    const int n = cm.n();
    Eigen::MatrixXcd a = cm.c;
    a.diagonal().array() -= p.detuning;
    const Eigen::VectorXcd b = Eigen::VectorXcd::Constant(n, p.rabi);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    Eigen::VectorXcd sig = lu.solve(b);
    const double anorm = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double resid = (a * sig - b).cwiseAbs().maxCoeff();
    const double scale = anorm * sig.cwiseAbs().maxCoeff() + p.rabi;
    if (!sig.allFinite() || resid > 1e-8 * (scale > 0.0 ? scale : 1.0))
        throw NumericalError("steady-state coherence solve is near-singular");
    return sig;
}

// d sigma / d tau = -i [ (C - delta I) sigma - Omega 1 ]
inline Eigen::VectorXcd coherence_rhs(const CouplingMatrix& cm, const Eigen::VectorXcd& sigma,
                                      const SystemParams& p) {
    Eigen::VectorXcd v = cm.c * sigma;
    v -= p.detuning * sigma;
    v.array() -= p.rabi;
    return cplx(0.0, -1.0) * v;
}

// Optically induced force, hbar k0 Gamma0 per atom:
//   F_n,i = -(2/k0) sum_m Re[ dC_nm/dr_n,i sigma_n^* sigma_m ].
inline Positions dipole_force(const CouplingMatrix& cm, const Eigen::VectorXcd& sigma) {
    const int n = cm.n();
    Positions f(n, 2);
    const Eigen::VectorXcd sc = sigma.conjugate();
    f.col(0) = -(2.0 / k0) * sc.cwiseProduct(cm.gx * sigma).real();
    f.col(1) = -(2.0 / k0) * sc.cwiseProduct(cm.gy * sigma).real();
    return f;
}

// dipole force plus trap restoring force (no friction), hbar k0 Gamma0
inline Positions total_force(const AtomConfiguration& cfg, const SystemParams& p,
                             const Positions& positions, const Eigen::VectorXcd& sigma) {
    CouplingMatrix cm = coupling_matrix(positions, cfg.dipole);
    Positions f = dipole_force(cm, sigma);
    f -= p.trap_stiffness() * (positions - cfg.trap_centers);
    return f;
}

// Trailing-window steady-state test: true once max|p| < eps_p and
// max|F_net| < eps_f have held continuously for t_hold.
class SteadyDetector {
public:
    SteadyDetector(double eps_p, double eps_f, double t_hold)
        : eps_p_(eps_p), eps_f_(eps_f), t_hold_(t_hold) {}

    bool feed(double t, double max_p, double max_f) {
        if (max_p < eps_p_ && max_f < eps_f_) {
            if (!(ok_since_ <= t)) ok_since_ = t;
            return t - ok_since_ >= t_hold_;
        }
        ok_since_ = std::numeric_limits<double>::quiet_NaN();
        return false;
    }

private:
    double eps_p_, eps_f_, t_hold_;
    double ok_since_ = std::numeric_limits<double>::quiet_NaN();
};

// History form of the steady-state test; samples are (t, max|p|, max|F_net|).
inline bool detect_steady(const std::vector<std::array<double, 3>>& samples, double eps_p,
                          double eps_f, double t_hold) {
    SteadyDetector det(eps_p, eps_f, t_hold);
    bool ok = false;
    for (const auto& s : samples) ok = det.feed(s[0], s[1], s[2]);
    return ok;
}

namespace detail {

// State layout: [x_0..x_{N-1}, y_0..y_{N-1} | px.., py.. | re sigma_0, im sigma_0, ...].
// The coherence block exists only in Full mode.
class MeanFieldRhs {
public:
    MeanFieldRhs(const AtomConfiguration& cfg, const SystemParams& p, Mode mode)
        : cfg_(cfg), p_(p), mode_(mode), n_(cfg.n()), center_(cfg.trap_centroid()) {
        sigma_.resize(n_);
        csig_.resize(n_);
        drive_ = Eigen::VectorXcd::Constant(n_, p.rabi);
        a_.resize(n_, n_);
        lu_ = Eigen::PartialPivLU<Eigen::MatrixXcd>(n_);
    }

    int state_size() const { return mode_ == Mode::Full ? 6 * n_ : 4 * n_; }

    void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        const auto pos = Eigen::Map<const Positions>(y.data(), n_, 2);
        const auto mom = Eigen::Map<const Positions>(y.data() + 2 * n_, n_, 2);
        coupling_matrix_into(cm_, pos, cfg_.dipole);

        if (mode_ == Mode::Full) {
            sigma_ = Eigen::Map<const Eigen::VectorXcd>(
                reinterpret_cast<const cplx*>(y.data() + 4 * n_), n_);
        } else {
            solve_steady();
        }

        dydt.resize(y.size());
        auto dpos = Eigen::Map<Positions>(dydt.data(), n_, 2);
        auto dmom = Eigen::Map<Positions>(dydt.data() + 2 * n_, n_, 2);

        // forces
        const Eigen::VectorXcd sc = sigma_.conjugate();
        fbuf_.resize(n_, 2);
        fbuf_.col(0) = -(2.0 / k0) * sc.cwiseProduct(cm_.gx * sigma_).real();
        fbuf_.col(1) = -(2.0 / k0) * sc.cwiseProduct(cm_.gy * sigma_).real();
        fbuf_ -= p_.trap_stiffness() * (pos - cfg_.trap_centers);
        dmom = fbuf_ - p_.friction * mom;
        dpos = p_.pos_rate() * mom;

        switch (cfg_.motion) {
        case MotionAxes::XOnly:
            dmom.col(1).setZero();
            dpos.col(1).setZero();
            break;
        case MotionAxes::RadialOnly:
            for (int i = 0; i < n_; ++i) {
                Eigen::Vector2d nr = pos.row(i).transpose() - center_;
                const double r = nr.norm();
                if (r == 0.0) throw NumericalError("radial projection undefined at ring center");
                nr /= r;
                dmom.row(i) = (dmom.row(i).dot(nr.transpose())) * nr.transpose();
                dpos.row(i) = (dpos.row(i).dot(nr.transpose())) * nr.transpose();
            }
            break;
        case MotionAxes::PlanarXY:
            break;
        }

        if (mode_ == Mode::Full) {
            // d sigma/d tau = -i [(C - delta) sigma - Omega]
            csig_.noalias() = cm_.c * sigma_;
            csig_ -= p_.detuning * sigma_;
            csig_ -= drive_;
            auto dsig = Eigen::Map<Eigen::VectorXcd>(
                reinterpret_cast<cplx*>(dydt.data() + 4 * n_), n_);
            dsig = cplx(0.0, -1.0) * csig_;
        }
    }

    // coherences at the last evaluated point (for Adiabatic mode this is the
    // steady-state solution at those positions)
    const Eigen::VectorXcd& last_sigma() const { return sigma_; }

    const CouplingMatrix& last_coupling() const { return cm_; }

private:
    void solve_steady() {
        a_ = cm_.c;
        a_.diagonal().array() -= p_.detuning;
        lu_.compute(a_);
        sigma_ = lu_.solve(drive_);
        const double anorm = a_.cwiseAbs().rowwise().sum().maxCoeff();
        const double resid = (a_ * sigma_ - drive_).cwiseAbs().maxCoeff();
        const double scale = anorm * sigma_.cwiseAbs().maxCoeff() + p_.rabi;
        if (!sigma_.allFinite() || resid > 1e-8 * (scale > 0.0 ? scale : 1.0))
            throw NumericalError("steady-state coherence solve is near-singular");
    }

    const AtomConfiguration& cfg_;
    const SystemParams& p_;
    Mode mode_;
    int n_;
    Eigen::Vector2d center_;
    CouplingMatrix cm_;
    Eigen::VectorXcd sigma_, csig_, drive_;
    Eigen::MatrixXcd a_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    Positions fbuf_;
};

inline std::pair<int, int> closest_pair(const Positions& pos, double* dist_out) {
    const int n = static_cast<int>(pos.rows());
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> pair{-1, -1};
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double d = (pos.row(a) - pos.row(b)).norm();
            if (d < best) {
                best = d;
                pair = {a, b};
            }
        }
    if (dist_out) *dist_out = best;
    return pair;
}

} // namespace detail

// Integrates the coupled coherence/motion equations from rest at the trap
// centers. Full mode evolves coherences alongside positions and momenta;
// Adiabatic mode slaves them to the instantaneous steady state.
inline Trajectory integrate(const AtomConfiguration& cfg, const SystemParams& p, Mode mode,
                            const StopCriteria& stop) {
    p.validate();
    validate_dipole(cfg.dipole);
    const int n = cfg.n();
    if (n < 1) throw ConfigError("need at least one atom");
    if (!(stop.t_max > 0.0)) throw ConfigError("t_max must be > 0");

    if (n > 1) {
        double d0;
        const auto pair0 = detail::closest_pair(cfg.trap_centers, &d0);
        if (d0 < stop.collision_distance) {
            Trajectory traj;
            traj.final_state.positions = cfg.trap_centers;
            traj.final_state.momenta = Positions::Zero(n, 2);
            traj.final_state.coherences = Eigen::VectorXcd::Zero(n);
            traj.outcome = Outcome{OutcomeKind::Collided, 0.0, pair0.first, pair0.second};
            traj.samples.push_back(traj.final_state);
            return traj;
        }
    }

    detail::MeanFieldRhs rhs(cfg, p, mode);

    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(rhs.state_size());
    Eigen::Map<Positions>(y0.data(), n, 2) = cfg.trap_centers;

    Rk45Options opt;
    opt.rtol = stop.rtol;
    opt.atol = stop.atol;
    opt.max_steps = stop.max_steps;
    opt.h_init = 1e-2;

    Trajectory traj;
    SteadyDetector steady(stop.eps_p, stop.eps_f, stop.hold_periods * p.trap_period());
    std::optional<Outcome> outcome;

    auto unpack = [&](double t, const Eigen::VectorXd& y) {
        SimState s;
        s.time = t;
        s.positions = Eigen::Map<const Positions>(y.data(), n, 2);
        s.momenta = Eigen::Map<const Positions>(y.data() + 2 * n, n, 2);
        if (mode == Mode::Full) {
            s.coherences = Eigen::Map<const Eigen::VectorXcd>(
                reinterpret_cast<const cplx*>(y.data() + 4 * n), n);
        } else {
            try {
                s.coherences = steady_coherences(coupling_matrix(s.positions, cfg.dipole), p);
            } catch (const NumericalError&) {
                s.coherences = rhs.last_sigma();
            }
        }
        return s;
    };

    std::uint64_t accepted = 0;
    auto on_step = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dydt) {
        ++accepted;
        const auto pos = Eigen::Map<const Positions>(y.data(), n, 2);
        const auto mom = Eigen::Map<const Positions>(y.data() + 2 * n, n, 2);

        double min_dist = std::numeric_limits<double>::infinity();
        const auto pair = n > 1 ? detail::closest_pair(pos, &min_dist) : std::pair<int, int>{-1, -1};
        if (min_dist < stop.collision_distance) {
            outcome = Outcome{OutcomeKind::Collided, t, pair.first, pair.second};
            return StepSignal::Stop;
        }

        double pop;
        if (mode == Mode::Full) {
            const auto sig = Eigen::Map<const Eigen::VectorXcd>(
                reinterpret_cast<const cplx*>(y.data() + 4 * n), n);
            pop = sig.cwiseAbs2().maxCoeff();
        } else {
            pop = rhs.last_sigma().cwiseAbs2().maxCoeff();
        }
        traj.max_population = std::max(traj.max_population, pop);
        if (pop > stop.breach_population) {
            outcome = Outcome{OutcomeKind::ExcitationBreach, t};
            return StepSignal::Stop;
        }

        const auto dmom = Eigen::Map<const Positions>(dydt.data() + 2 * n, n, 2);
        const double max_p = mom.rowwise().norm().maxCoeff();
        const double max_f = dmom.rowwise().norm().maxCoeff();
        if (steady.feed(t, max_p, max_f)) {
            outcome = Outcome{OutcomeKind::Converged, t};
            return StepSignal::Stop;
        }

        if (stop.sample_dt <= 0.0 && stop.sample_stride > 0 &&
            accepted % static_cast<std::uint64_t>(stop.sample_stride) == 0)
            traj.samples.push_back(unpack(t, y));
        return StepSignal::Continue;
    };

    AdaptiveRk45<detail::MeanFieldRhs&> stepper(rhs, y0, 0.0, opt);
    traj.samples.push_back(unpack(0.0, stepper.y()));
    traj.max_population = mode == Mode::Full ? 0.0 : rhs.last_sigma().cwiseAbs2().maxCoeff();

    try {
        if (stop.sample_dt > 0.0) {
            double t_next = stop.sample_dt;
            while (!outcome && stepper.t() < stop.t_max) {
                const double target = std::min(t_next, stop.t_max);
                if (stepper.advance_to(target, on_step) && stepper.t() >= t_next - 1e-12) {
                    traj.samples.push_back(unpack(stepper.t(), stepper.y()));
                    t_next += stop.sample_dt;
                }
            }
        } else {
            stepper.advance_to(stop.t_max, on_step);
        }
    } catch (const SeparationError& e) {
        // a pair drove the step size to the floor while entering the
        // near-field guard: physical collision
        double d;
        auto pair = detail::closest_pair(Eigen::Map<const Positions>(stepper.y().data(), n, 2), &d);
        if (e.a >= 0) pair = {e.a, e.b};
        outcome = Outcome{OutcomeKind::Collided, stepper.t(), pair.first, pair.second};
    }

    traj.final_state = unpack(stepper.t(), stepper.y());
    traj.outcome = outcome.value_or(Outcome{OutcomeKind::Timeout, stepper.t()});
    if (traj.samples.empty() || traj.samples.back().time != traj.final_state.time)
        traj.samples.push_back(traj.final_state);
    return traj;
}

} // namespace selforg

#endif
