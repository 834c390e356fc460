#include "phoclone/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phoclone {

namespace {

// Dormand & Prince (1980) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Vector& err, const Vector& y0, const Vector& y1, const Tolerance& tol) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = tol.abs + tol.rel * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = std::abs(err(i)) / sc;
        s += r * r;
    }
    return std::sqrt(s / std::max<Eigen::Index>(1, err.size()));
}

double initial_step(const OdeRhs& f, double t0, const Vector& y0, const Vector& f0,
                    const Tolerance& tol) {
    Vector zero = Vector::Zero(y0.size());
    const double d0 = scaled_norm(y0, y0, zero, tol);
    const double d1 = scaled_norm(f0, y0, zero, tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Vector y1 = y0 + h0 * f0;
    Vector f1(y0.size());
    f(t0 + h0, y1, f1);
    const double d2 = scaled_norm(f1 - f0, y0, zero, tol) / h0;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    return std::min(100 * h0, h1);
}

} // namespace

OdeStats integrate_dopri5(const OdeRhs& f, double t0, Vector& y,
                          const std::vector<double>& stops, const OdeObserver& observe,
                          const OdeOptions& opts) {
    OdeStats stats;
    if (!std::is_sorted(stops.begin(), stops.end()) || (!stops.empty() && stops.front() < t0))
        throw Error(ErrorKind::invalid_argument, "ODE stop times must be sorted and >= t0");

    const Eigen::Index n = y.size();
    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    double t = t0;
    f(t, y, k1);
    double h = -1.0;
    double err_prev = 1e-4;

    for (std::size_t s = 0; s < stops.size(); ++s) {
        const double target = stops[s];
        while (t < target) {
            if (h < 0) h = std::min(initial_step(f, t, y, k1, opts.tol), opts.h_max);
            bool last = false;
            double hs = std::min(h, opts.h_max);
            if (t + hs >= target || target - (t + hs) < 1e-12 * std::max(1.0, std::abs(target))) {
                hs = target - t;
                last = true;
            }
            if (stats.accepted + stats.rejected >= opts.max_steps) {
                std::ostringstream os;
                os << "step budget of " << opts.max_steps << " exhausted at t=" << t
                   << " (target " << target << ", h=" << hs << ", accepted=" << stats.accepted
                   << ", rejected=" << stats.rejected << ")";
                throw Error(ErrorKind::integration_failure, os.str());
            }
            if (hs < 1e-14 * std::max(1.0, std::abs(t)) && !last) {
                std::ostringstream os;
                os << "step size underflow at t=" << t << " (h=" << hs << ")";
                throw Error(ErrorKind::integration_failure, os.str());
            }

            ytmp = y + hs * a21 * k1;
            f(t + c2 * hs, ytmp, k2);
            ytmp = y + hs * (a31 * k1 + a32 * k2);
            f(t + c3 * hs, ytmp, k3);
            ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
            f(t + c4 * hs, ytmp, k4);
            ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(t + c5 * hs, ytmp, k5);
            ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(t + hs, ytmp, k6);
            ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(t + hs, ynew, k7);
            err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double en = scaled_norm(err, y, ynew, opts.tol);
            if (!std::isfinite(en) || !ynew.allFinite()) {
                if (!y.allFinite() || hs < 1e-14)
                    throw Error(ErrorKind::instability, "non-finite ODE state");
                h = 0.25 * hs;
                ++stats.rejected;
                continue;
            }
            if (en <= 1.0) {
                t = last ? target : t + hs;
                y.swap(ynew);
                k1.swap(k7);
                ++stats.accepted;
                stats.error_estimate += err.norm();
                if (y.cwiseAbs().maxCoeff() > 1e150)
                    throw Error(ErrorKind::instability, "ODE state overflow");
                // PI controller (Hairer, Norsett & Wanner II.4).
                double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5) *
                             std::pow(err_prev, 0.4 / 5);
                fac = std::clamp(fac, 0.2, 10.0);
                err_prev = std::max(en, 1e-4);
                if (!last || hs >= h) h = hs * fac;
            } else {
                ++stats.rejected;
                h = hs * std::max(0.2, 0.9 * std::pow(en, -1.0 / 5));
            }
        }
        if (observe) observe(s, t, y);
    }
    return stats;
}

} // namespace phoclone
