#ifndef SELFORG_GREENS_HPP
#define SELFORG_GREENS_HPP

#include <Eigen/Dense>
#include <complex>

#include "selforg/geometry.hpp"
#include "selforg/params.hpp"

namespace selforg {

using cplx = std::complex<double>;

// Free-space electromagnetic Green's tensor at the transition frequency,
// in units of k0 and as a function of the dimensionless separation kr = k0*r:
//   G(kr) = e^{ix}/(4 pi x^3) [ (x^2 + ix - 1) I + (3 - x^2 - 3ix) nn ],  x = |kr|.
inline Eigen::Matrix3cd green_tensor(const Eigen::Vector3d& kr) {
    const double x = kr.norm();
    if (x <= 0.0) throw SeparationError(-1, -1, 0.0);
    const Eigen::Vector3d n = kr / x;
    const cplx ph = std::exp(cplx(0.0, x)) / (4.0 * std::numbers::pi * x * x * x);
    const cplx p(x * x - 1.0, x);
    const cplx q(3.0 - x * x, -3.0 * x);
    Eigen::Matrix3cd g = (ph * p) * Eigen::Matrix3cd::Identity();
    g += (ph * q) * (n * n.transpose());
    return g;
}

namespace detail {

// C and its partials for fixed dipole overlap mu = |d^dag n|^2, x = k0*r:
//   C(x, mu) = -(3/4) e^{ix} x^{-3} [P(x) + Q(x) mu],
//   P = x^2 + ix - 1, Q = 3 - x^2 - 3ix.
struct RadialCoupling {
    cplx c;
    cplx dc_dx;
    cplx dc_dmu;
};

inline RadialCoupling radial_coupling(double x, double mu) {
    const cplx pref = -0.75 * std::exp(cplx(0.0, x)) / (x * x * x);
    const cplx p(x * x - 1.0, x);
    const cplx q(3.0 - x * x, -3.0 * x);
    const cplx pq = p + q * mu;
    RadialCoupling rc;
    rc.c = pref * pq;
    rc.dc_dx = pref * ((cplx(0.0, 1.0) - 3.0 / x) * pq + cplx(2.0 * x, 1.0) + cplx(-2.0 * x, -3.0) * mu);
    rc.dc_dmu = pref * q;
    return rc;
}

inline double guarded_norm(const Eigen::Vector3d& r_lambda, int a, int b) {
    const double r = r_lambda.norm();
    if (r < min_separation) throw SeparationError(a, b, r);
    return r;
}

} // namespace detail

// Coherent/dissipative coupling C = J - i Gamma/2 between two identical unit
// dipoles d at separation r (lambda0 units); C in Gamma0, equal to
// -3 pi d^dag G(k0 r) d, with the diagonal convention J_nn = 0, Gamma_nn = Gamma0.
// Separations below min_separation are outside the model's validity and throw.
inline cplx coupling(const Eigen::Vector3d& r_lambda, const Vec3c& d) {
    const double r = detail::guarded_norm(r_lambda, -1, -1);
    const Eigen::Vector3d n = r_lambda / r;
    const double mu = std::norm(d.dot(n.cast<cplx>()));
    return detail::radial_coupling(k0 * r, mu).c;
}

// Analytic gradient of the pair coupling with respect to the first atom's
// position, in Gamma0 per lambda0.
inline Vec3c coupling_gradient(const Eigen::Vector3d& r_lambda, const Vec3c& d) {
    const double r = detail::guarded_norm(r_lambda, -1, -1);
    const Eigen::Vector3d n = r_lambda / r;
    const cplx s = d.dot(n.cast<cplx>());
    const double mu = std::norm(s);
    const auto rc = detail::radial_coupling(k0 * r, mu);
    Vec3c grad;
    for (int i = 0; i < 3; ++i) {
        const double dmu_dri = 2.0 * (std::real(s * d(i)) - n(i) * mu) / r;
        grad(i) = rc.dc_dx * k0 * n(i) + rc.dc_dmu * dmu_dri;
    }
    return grad;
}

// Distance-only forms, valid when mu is constant in the direction of interest
// (out-of-plane dipole: mu = 0; circular in-plane dipole: mu = 1/2).
inline cplx coupling_radial(double r_lambda, double mu) {
    if (r_lambda < min_separation) throw SeparationError(-1, -1, r_lambda);
    return detail::radial_coupling(k0 * r_lambda, mu).c;
}

// dC/dr in Gamma0 per lambda0 at fixed mu
inline cplx coupling_radial_derivative(double r_lambda, double mu) {
    if (r_lambda < min_separation) throw SeparationError(-1, -1, r_lambda);
    return detail::radial_coupling(k0 * r_lambda, mu).dc_dx * k0;
}

// All pair couplings plus the analytic position gradients:
//   c(n,m)  = C_nm (diagonal -i/2, i.e. J_nn = 0, Gamma_nn = Gamma0),
//   gx(n,m) = dC_nm/d(x_n), gy(n,m) = dC_nm/d(y_n)   [Gamma0 / lambda0].
// The gradient with respect to the second atom is the negative transpose entry.
struct CouplingMatrix {
    Eigen::MatrixXcd c;
    Eigen::MatrixXcd gx;
    Eigen::MatrixXcd gy;

    int n() const { return static_cast<int>(c.rows()); }
};

inline void coupling_matrix_into(CouplingMatrix& out, const Positions& positions,
                                 const Vec3c& d) {
    const int n = static_cast<int>(positions.rows());
    out.c.resize(n, n);
    out.gx.resize(n, n);
    out.gy.resize(n, n);
    out.c.setZero();
    out.gx.setZero();
    out.gy.setZero();
    out.c.diagonal().setConstant(cplx(0.0, -0.5));

    const cplx dx_ = d(0), dy_ = d(1);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double rx = positions(a, 0) - positions(b, 0);
            const double ry = positions(a, 1) - positions(b, 1);
            const double r = std::sqrt(rx * rx + ry * ry);
            if (r < min_separation) throw SeparationError(a, b, r);
            const double nx = rx / r, ny = ry / r;
            const cplx s = std::conj(dx_) * nx + std::conj(dy_) * ny;
            const double mu = std::norm(s);
            const auto rc = detail::radial_coupling(k0 * r, mu);
            const cplx gx = rc.dc_dx * k0 * nx + rc.dc_dmu * 2.0 * (std::real(s * dx_) - nx * mu) / r;
            const cplx gy = rc.dc_dx * k0 * ny + rc.dc_dmu * 2.0 * (std::real(s * dy_) - ny * mu) / r;
            out.c(a, b) = rc.c;
            out.c(b, a) = rc.c;
            out.gx(a, b) = gx;
            out.gy(a, b) = gy;
            out.gx(b, a) = -gx;
            out.gy(b, a) = -gy;
        }
    }
}

inline CouplingMatrix coupling_matrix(const Positions& positions, const Vec3c& d) {
    CouplingMatrix out;
    coupling_matrix_into(out, positions, d);
    return out;
}

} // namespace selforg

#endif
