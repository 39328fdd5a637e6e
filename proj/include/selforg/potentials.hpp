#ifndef SELFORG_POTENTIALS_HPP
#define SELFORG_POTENTIALS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "selforg/dynamics.hpp"
#include "selforg/greens.hpp"
#include "selforg/params.hpp"

namespace selforg {

struct Minimum {
    double coordinate = 0.0;
    double value = 0.0;
};

struct MinimaReport {
    std::vector<Minimum> interior;   // strict local minima, parabolically refined
    std::vector<Minimum> boundary;   // grid endpoints that bound a descending basin
};

struct PotentialCurve {
    Eigen::VectorXd coordinate;   // lambda0
    Eigen::VectorXd value;        // hbar Gamma0, anchored to 0 at the first grid point
    MinimaReport minima;
};

namespace detail {

inline Minimum refine_parabolic(double x0, double v0, double x1, double v1, double x2, double v2) {
    const double den = v0 * (x1 - x2) + v1 * (x2 - x0) + v2 * (x0 - x1);
    if (den == 0.0) return {x1, v1};
    const double num = v0 * (x1 * x1 - x2 * x2) + v1 * (x2 * x2 - x0 * x0) + v2 * (x0 * x0 - x1 * x1);
    const double xs = 0.5 * num / den;
    if (!(xs > x0 && xs < x2)) return {x1, v1};
    // evaluate the interpolating parabola at its vertex
    const double l0 = (xs - x1) * (xs - x2) / ((x0 - x1) * (x0 - x2));
    const double l1 = (xs - x0) * (xs - x2) / ((x1 - x0) * (x1 - x2));
    const double l2 = (xs - x0) * (xs - x1) / ((x2 - x0) * (x2 - x1));
    return {xs, v0 * l0 + v1 * l1 + v2 * l2};
}

} // namespace detail

inline MinimaReport local_minima(const Eigen::VectorXd& coordinate, const Eigen::VectorXd& value) {
    const auto n = coordinate.size();
    if (n != value.size() || n < 2) throw ConfigError("potential curve needs matched grids, n >= 2");
    MinimaReport rep;
    for (Eigen::Index i = 1; i + 1 < n; ++i)
        if (value(i) < value(i - 1) && value(i) < value(i + 1))
            rep.interior.push_back(detail::refine_parabolic(coordinate(i - 1), value(i - 1),
                                                            coordinate(i), value(i),
                                                            coordinate(i + 1), value(i + 1)));
    if (value(0) < value(1)) rep.boundary.push_back({coordinate(0), value(0)});
    if (value(n - 1) < value(n - 2)) rep.boundary.push_back({coordinate(n - 1), value(n - 1)});
    return rep;
}

inline MinimaReport local_minima(const PotentialCurve& curve) {
    return local_minima(curve.coordinate, curve.value);
}

// V(x) = -integral of force over the grid by cumulative trapezoid, converted
// from force in hbar k0 Gamma0 per lambda0 of coordinate into hbar Gamma0.
inline PotentialCurve effective_potential_curve(const std::function<double(double)>& force,
                                                const Eigen::VectorXd& grid) {
    if (grid.size() < 2) throw ConfigError("potential grid needs at least 2 points");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (!(grid(i) > grid(i - 1))) throw ConfigError("potential grid must be strictly increasing");
    PotentialCurve curve;
    curve.coordinate = grid;
    curve.value.resize(grid.size());
    curve.value(0) = 0.0;
    double f_prev = force(grid(0));
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        const double f = force(grid(i));
        curve.value(i) = curve.value(i - 1) -
                         k0 * 0.5 * (f + f_prev) * (grid(i) - grid(i - 1));
        f_prev = f;
    }
    curve.minima = local_minima(curve.coordinate, curve.value);
    return curve;
}

inline Eigen::VectorXd uniform_grid(double lo, double hi, int points_per_lambda0 = 2000) {
    if (!(hi > lo)) throw ConfigError("grid upper bound must exceed lower bound");
    if (points_per_lambda0 < 2) throw ConfigError("grid resolution too low");
    const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) * points_per_lambda0)) + 1;
    return Eigen::VectorXd::LinSpaced(std::max<Eigen::Index>(n, 2), lo, hi);
}

// --- two-atom relative coordinate -----------------------------------------
// Both atoms share the steady coherence sigma = Omega / (C12 - delta - i/2),
// so the excited population is Omega^2 / [(J12-delta)^2 + (1+Gamma12)^2/4].

inline double two_atom_population(double a, const SystemParams& p, double theta_rad) {
    const cplx c12 = coupling(Eigen::Vector3d(a, 0.0, 0.0), dipole_theta(theta_rad));
    const cplx den = c12 - p.detuning - cplx(0.0, 0.5);
    return p.rabi * p.rabi / std::norm(den);
}

// Force on the relative coordinate a = x2 - x1 (hbar k0 Gamma0):
//   dp_R/dt = -2 |sigma|^2 dJ/da - (1/2) m w^2 (a - a0).
inline double two_atom_force(double a, double a0, const SystemParams& p, double theta_rad) {
    const Eigen::Vector3d r(a, 0.0, 0.0);
    const Vec3c d = dipole_theta(theta_rad);
    const double pop = two_atom_population(a, p, theta_rad);
    const double dj_da = std::real(coupling_gradient(r, d)(0));
    return -(2.0 / k0) * pop * dj_da - 0.5 * p.trap_stiffness() * (a - a0);
}

// --- symmetric ring breathing coordinate -----------------------------------
// All atoms at radius R, chords r_1m = 2 R sin(pi (m-1)/N); the circular
// in-plane dipole makes couplings distance-only (mu = 1/2).

inline cplx ring_coupling_sum(double R, int n_atoms) {
    cplx s = 0.0;
    for (int m = 1; m < n_atoms; ++m) {
        const double chord = 2.0 * R * std::sin(std::numbers::pi * m / n_atoms);
        s += coupling_radial(chord, 0.5);
    }
    return s;
}

inline double ring_population(double R, const SystemParams& p, int n_atoms) {
    const cplx den = ring_coupling_sum(R, n_atoms) - p.detuning - cplx(0.0, 0.5);
    return p.rabi * p.rabi / std::norm(den);
}

// Radial force per atom (hbar k0 Gamma0): the optical pair forces projected
// onto the outward radial direction plus the trap. Matches the RadialOnly
// projection of the full 2D model exactly on the symmetric ring.
inline double ring_force(double R, const SystemParams& p, int n_atoms, double r_trap) {
    if (n_atoms < 3) throw ConfigError("ring force needs at least three atoms");
    if (!(R > 0.0)) throw SeparationError(-1, -1, 0.0);
    const double pop = ring_population(R, p, n_atoms);
    double sum = 0.0;
    for (int m = 1; m < n_atoms; ++m) {
        const double s = std::sin(std::numbers::pi * m / n_atoms);
        const double chord = 2.0 * R * s;
        sum += std::real(coupling_radial_derivative(chord, 0.5)) * s;
    }
    return -(2.0 / k0) * pop * sum - p.trap_stiffness() * (R - r_trap);
}

namespace detail {

template <class Force>
std::pair<double, Outcome> relax_1d(Force&& force, double x0, double pos_rate, double friction,
                                    double min_coordinate, const SystemParams& p,
                                    const StopCriteria& stop) {
    Rk45Options opt;
    opt.rtol = stop.rtol;
    opt.atol = stop.atol;
    opt.max_steps = stop.max_steps;
    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        dydt.resize(2);
        dydt(0) = pos_rate * y(1);
        dydt(1) = force(y(0)) - friction * y(1);
    };
    Eigen::VectorXd y0(2);
    y0 << x0, 0.0;
    SteadyDetector steady(stop.eps_p, stop.eps_f, stop.hold_periods * p.trap_period());
    Outcome outcome{OutcomeKind::Timeout, 0.0};
    bool done = false;
    auto on_step = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dydt) {
        if (y(0) < min_coordinate) {
            outcome = Outcome{OutcomeKind::Collided, t, 0, 1};
            done = true;
            return StepSignal::Stop;
        }
        if (steady.feed(t, std::abs(y(1)), std::abs(dydt(1)))) {
            outcome = Outcome{OutcomeKind::Converged, t};
            done = true;
            return StepSignal::Stop;
        }
        return StepSignal::Continue;
    };
    AdaptiveRk45<decltype(rhs)&> stepper(rhs, y0, 0.0, opt);
    try {
        stepper.advance_to(stop.t_max, on_step);
    } catch (const SeparationError&) {
        outcome = Outcome{OutcomeKind::Collided, stepper.t(), 0, 1};
        done = true;
    }
    if (!done) outcome = Outcome{OutcomeKind::Timeout, stepper.t()};
    return {stepper.y()(0), outcome};
}

} // namespace detail

// Relaxation of the two-atom relative coordinate from a = a0 at rest.
// da/dt = 2 p_R / m, the exact projection of the full two-atom dynamics.
inline std::pair<double, Outcome> two_atom_relative_integrate(double a0, const SystemParams& p,
                                                              double theta_rad,
                                                              const StopCriteria& stop) {
    p.validate();
    auto force = [&](double a) { return two_atom_force(a, a0, p, theta_rad); };
    return detail::relax_1d(force, a0, 2.0 * p.pos_rate(), p.friction,
                            stop.collision_distance, p, stop);
}

// Relaxation of the symmetric ring radius from R = r0 at rest.
inline std::pair<double, Outcome> ring_radial_integrate(const SystemParams& p, int n_atoms,
                                                        double r_trap, double r0,
                                                        const StopCriteria& stop) {
    p.validate();
    if (n_atoms < 3) throw ConfigError("ring needs at least three atoms");
    auto force = [&](double R) { return ring_force(R, p, n_atoms, r_trap); };
    // stop when the shortest chord reaches the collision distance
    const double min_radius = stop.collision_distance / (2.0 * std::sin(std::numbers::pi / n_atoms));
    return detail::relax_1d(force, r0, p.pos_rate(), p.friction, min_radius, p, stop);
}

} // namespace selforg

#endif
