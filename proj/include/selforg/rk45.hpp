#ifndef SELFORG_RK45_HPP
#define SELFORG_RK45_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "selforg/params.hpp"

namespace selforg {

struct Rk45Options {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-2;
    double h_min = 1e-12;
    double h_max = std::numeric_limits<double>::infinity();
    std::uint64_t max_steps = 50'000'000;
};

enum class StepSignal { Continue, Stop };

// Explicit adaptive Dormand-Prince 5(4) embedded pair with FSAL. The
// right-hand side is rhs(t, y, dydt); on_step(t, y, dydt) runs after every
// accepted step (dydt is the derivative at the new point) and may stop the
// integration early. advance_to() lands exactly on the requested time, so
// callers sample without interpolation.
template <class Rhs>
class AdaptiveRk45 {
public:
    AdaptiveRk45(Rhs rhs, Eigen::VectorXd y0, double t0, Rk45Options opt = {})
        : rhs_(std::forward<Rhs>(rhs)), y_(std::move(y0)), t_(t0), opt_(opt),
          h_(std::clamp(opt.h_init, opt.h_min, opt.h_max)) {
        const auto n = y_.size();
        k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n);
        k5_.resize(n); k6_.resize(n); k7_.resize(n);
        ytmp_.resize(n); ynew_.resize(n); yerr_.resize(n);
        rhs_(t_, y_, k1_);
        check_finite(k1_, "initial derivative");
    }

    template <class OnStep>
    bool advance_to(double t_target, OnStep&& on_step) {
        while (t_ < t_target) {
            double h = std::min(h_, t_target - t_);
            const bool boundary_clamped = h < h_;
            bool accepted = false;
            bool was_rejected = false;
            while (!accepted) {
                if (++steps_ > opt_.max_steps)
                    throw NumericalError("integrator exceeded the step budget");
                double err;
                bool ok = true;
                try {
                    err = attempt(h);
                } catch (const SeparationError&) {
                    // A trial stage left the model's validity domain; retry
                    // smaller before concluding the trajectory itself collides.
                    if (h <= 64.0 * opt_.h_min) throw;
                    ok = false;
                    err = 0.0;
                }
                if (ok && err <= 1.0) {
                    accepted = true;
                    t_ += h;
                    y_.swap(ynew_);
                    k1_.swap(k7_);
                    const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                    double cand = h * std::clamp(fac, 0.2, was_rejected ? 1.0 : 5.0);
                    // a step shortened only to land on a sample boundary must
                    // not shrink subsequent steps
                    if (boundary_clamped && !was_rejected) cand = std::max(cand, h_);
                    h_ = std::min(opt_.h_max, cand);
                } else {
                    was_rejected = true;
                    const double fac = ok ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
                    h *= fac;
                    if (h < opt_.h_min)
                        throw NumericalError("integrator step size underflow at t = " +
                                             std::to_string(t_));
                }
            }
            if (on_step(t_, y_, k1_) == StepSignal::Stop) return false;
        }
        return true;
    }

    double t() const { return t_; }
    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::VectorXd& dydt() const { return k1_; }
    std::uint64_t steps() const { return steps_; }

private:
    // one trial step of size h; fills ynew_/k7_ and returns the scaled error norm
    double attempt(double h) {
        ytmp_ = y_ + h * (a21 * k1_);
        rhs_(t_ + c2 * h, ytmp_, k2_);
        ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(t_ + c3 * h, ytmp_, k3_);
        ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(t_ + c4 * h, ytmp_, k4_);
        ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t_ + c5 * h, ytmp_, k5_);
        ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t_ + h, ytmp_, k6_);
        ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        rhs_(t_ + h, ynew_, k7_);
        yerr_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

        double sum = 0.0;
        const auto n = y_.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_(i)), std::abs(ynew_(i)));
            const double e = yerr_(i) / sc;
            sum += e * e;
        }
        const double err = std::sqrt(sum / static_cast<double>(n));
        if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
        return err;
    }

    static void check_finite(const Eigen::VectorXd& v, const char* what) {
        if (!v.allFinite()) throw NumericalError(std::string("non-finite ") + what);
    }

    // Dormand-Prince RK5(4)7M tableau
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    Rhs rhs_;
    Eigen::VectorXd y_;
    double t_;
    Rk45Options opt_;
    double h_;
    std::uint64_t steps_ = 0;
    Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, yerr_;
};

} // namespace selforg

#endif
