#ifndef SELFORG_PARAMS_HPP
#define SELFORG_PARAMS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace selforg {

// Natural units used throughout the library:
//   rates in Gamma0, lengths in lambda0, momenta in hbar*k0, hbar = 1.
// Positions are stored in lambda0, so the wavenumber k0 = 2*pi.
inline constexpr double k0 = 2.0 * std::numbers::pi;

// Configuration/schema problems. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures (singular solves, step-size underflow, ...). CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Atom pair closer than the near-field validity guard (or exactly coincident).
struct SeparationError : NumericalError {
    SeparationError(int a_, int b_, double distance_)
        : NumericalError("atom pair (" + std::to_string(a_) + ", " + std::to_string(b_) +
                         ") at separation " + std::to_string(distance_) +
                         " lambda0 is below the model validity guard"),
          a(a_), b(b_), distance(distance_) {}
    int a, b;
    double distance;
};

// Separation below which the point-dipole description is not trusted.
inline constexpr double min_separation = 1e-3;

// Drive, trap and damping parameters shared by all scenarios.
//   rabi, detuning, friction, recoil_freq are in units of Gamma0;
//   trap_freq is in units of the recoil frequency omega_r.
struct SystemParams {
    double rabi = 0.05;
    double detuning = 0.0;
    double trap_freq = 1.0;
    double recoil_freq = 1e-3;
    double friction = 0.005;

    // trap angular frequency omega in Gamma0
    double omega() const { return trap_freq * recoil_freq; }
    // trap period in Gamma0^-1
    double trap_period() const { return 2.0 * std::numbers::pi / omega(); }
    // d(position)/dtau = pos_rate * momentum   [lambda0 per Gamma0^-1 per hbar*k0]
    double pos_rate() const { return recoil_freq / k0; }
    // trap restoring force is -trap_stiffness * (x - x_t) in hbar*k0*Gamma0 per lambda0
    double trap_stiffness() const { return k0 * trap_freq * trap_freq * recoil_freq; }

    void validate() const {
        if (!(rabi >= 0.0)) throw ConfigError("rabi must be >= 0");
        if (!std::isfinite(detuning)) throw ConfigError("detuning must be finite");
        if (!(trap_freq > 0.0)) throw ConfigError("trap_freq must be > 0");
        if (!(recoil_freq > 0.0)) throw ConfigError("recoil_freq must be > 0");
        if (!(friction >= 0.0)) throw ConfigError("friction must be >= 0");
    }
};

} // namespace selforg

#endif
