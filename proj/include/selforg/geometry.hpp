#ifndef SELFORG_GEOMETRY_HPP
#define SELFORG_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include "selforg/params.hpp"
#include "selforg/rng.hpp"

namespace selforg {

enum class GeometryKind { Chain, Ring, Custom };

enum class MotionAxes { XOnly, RadialOnly, PlanarXY };

using Vec3c = Eigen::Vector3cd;
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Trap layout plus the shared dipole orientation. Trap centers are in lambda0.
// `spacing` is the nominal lattice constant a0 and is the length reference for
// fractional disorder amplitudes; `ring_radius` is the trap radius R_t for rings.
struct AtomConfiguration {
    Positions trap_centers;
    GeometryKind kind = GeometryKind::Custom;
    MotionAxes motion = MotionAxes::PlanarXY;
    Vec3c dipole = Vec3c(0.0, 0.0, 1.0);
    double spacing = 1.0;
    double ring_radius = 0.0;
    std::uint64_t seed = 0;
    double disorder_amplitude = 0.0;

    int n() const { return static_cast<int>(trap_centers.rows()); }

    Eigen::Vector2d trap_centroid() const {
        return trap_centers.colwise().mean().transpose();
    }
};

inline void validate_dipole(const Vec3c& d) {
    if (std::abs(d.norm() - 1.0) > 1e-12)
        throw ConfigError("dipole orientation must be a unit vector");
}

inline void validate_config(const AtomConfiguration& cfg) {
    if (cfg.n() < 1) throw ConfigError("configuration needs at least one atom");
    validate_dipole(cfg.dipole);
    if (!(cfg.spacing > 0.0)) throw ConfigError("spacing must be > 0");
    if (!(cfg.disorder_amplitude >= 0.0)) throw ConfigError("disorder amplitude must be >= 0");
    if (cfg.kind == GeometryKind::Ring && !(cfg.ring_radius > 0.0))
        throw ConfigError("ring radius must be > 0");
}

// linearly polarized out of plane
inline Vec3c dipole_z() { return Vec3c(0.0, 0.0, 1.0); }

// circularly polarized in plane, (x + i y)/sqrt(2); in-plane couplings become
// functions of distance only
inline Vec3c dipole_circular() {
    const double s = 1.0 / std::numbers::sqrt2;
    return Vec3c(std::complex<double>(s, 0.0), std::complex<double>(0.0, s), 0.0);
}

// elliptical in-plane dipole [cos(theta), i sin(theta), 0]
inline Vec3c dipole_theta(double theta_rad) {
    return Vec3c(std::complex<double>(std::cos(theta_rad), 0.0),
                 std::complex<double>(0.0, std::sin(theta_rad)), 0.0);
}

inline AtomConfiguration build_chain(int n, double a0, const Vec3c& dipole = dipole_z()) {
    if (n < 1) throw ConfigError("chain needs at least one atom");
    if (!(a0 > 0.0)) throw ConfigError("chain spacing a0 must be > 0");
    validate_dipole(dipole);
    AtomConfiguration cfg;
    cfg.kind = GeometryKind::Chain;
    cfg.motion = MotionAxes::XOnly;
    cfg.dipole = dipole;
    cfg.spacing = a0;
    cfg.trap_centers.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        cfg.trap_centers(i, 0) = (i - 0.5 * (n - 1)) * a0;
        cfg.trap_centers(i, 1) = 0.0;
    }
    return cfg;
}

inline AtomConfiguration build_two_atom(double a0, double theta_rad) {
    return build_chain(2, a0, dipole_theta(theta_rad));
}

// Circumradius of the regular N-gon with nearest-neighbor chord a0.
inline double ring_trap_radius(int n, double a0) {
    if (n < 3) throw ConfigError("ring needs at least three atoms");
    return a0 / (2.0 * std::sin(std::numbers::pi / n));
}

// Ring with nearest-neighbor arc target a0: R_t = a0 / (2 sin(pi/N)).
inline AtomConfiguration build_ring(int n, double a0, const Vec3c& dipole = dipole_circular()) {
    if (n < 3) throw ConfigError("ring needs at least three atoms");
    if (!(a0 > 0.0)) throw ConfigError("ring spacing a0 must be > 0");
    validate_dipole(dipole);
    AtomConfiguration cfg;
    cfg.kind = GeometryKind::Ring;
    cfg.motion = MotionAxes::RadialOnly;
    cfg.dipole = dipole;
    cfg.spacing = a0;
    cfg.ring_radius = ring_trap_radius(n, a0);
    cfg.trap_centers.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / n;
        cfg.trap_centers(i, 0) = cfg.ring_radius * std::cos(phi);
        cfg.trap_centers(i, 1) = cfg.ring_radius * std::sin(phi);
    }
    return cfg;
}

inline AtomConfiguration build_custom(const Positions& positions, const Vec3c& dipole,
                                      MotionAxes motion, double spacing_ref = 1.0) {
    if (positions.rows() < 1) throw ConfigError("custom geometry needs at least one atom");
    if (!(spacing_ref > 0.0)) throw ConfigError("spacing reference must be > 0");
    validate_dipole(dipole);
    for (int i = 0; i < positions.rows(); ++i)
        for (int j = i + 1; j < positions.rows(); ++j)
            if ((positions.row(i) - positions.row(j)).norm() == 0.0)
                throw ConfigError("custom geometry has coincident trap centers " +
                                  std::to_string(i) + " and " + std::to_string(j));
    AtomConfiguration cfg;
    cfg.kind = GeometryKind::Custom;
    cfg.motion = motion;
    cfg.dipole = dipole;
    cfg.spacing = spacing_ref;
    cfg.trap_centers = positions;
    return cfg;
}

// Displaces every trap center independently along each allowed motion axis by a
// uniform draw from [-amplitude*a0, +amplitude*a0]. Draw order is fixed (atom
// index ascending; x before y) so a seed fully determines the realization.
inline AtomConfiguration apply_disorder(const AtomConfiguration& base, double amplitude,
                                        std::uint64_t seed) {
    if (!(amplitude >= 0.0)) throw ConfigError("disorder amplitude must be >= 0");
    AtomConfiguration cfg = base;
    cfg.seed = seed;
    cfg.disorder_amplitude = amplitude;
    if (amplitude == 0.0) return cfg;

    SplitMix64 rng(seed);
    const double scale = amplitude * base.spacing;
    const Eigen::Vector2d center = base.trap_centroid();
    for (int i = 0; i < cfg.n(); ++i) {
        switch (base.motion) {
        case MotionAxes::XOnly:
            cfg.trap_centers(i, 0) += scale * rng.next_symmetric();
            break;
        case MotionAxes::RadialOnly: {
            Eigen::Vector2d radial = cfg.trap_centers.row(i).transpose() - center;
            const double r = radial.norm();
            if (r == 0.0) throw ConfigError("radial disorder undefined for atom at ring center");
            cfg.trap_centers.row(i) += (scale * rng.next_symmetric() / r) * radial.transpose();
            break;
        }
        case MotionAxes::PlanarXY:
            cfg.trap_centers(i, 0) += scale * rng.next_symmetric();
            cfg.trap_centers(i, 1) += scale * rng.next_symmetric();
            break;
        }
    }
    return cfg;
}

} // namespace selforg

#endif
