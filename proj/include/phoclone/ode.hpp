#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "phoclone/operator.hpp"

namespace phoclone {

struct Tolerance {
    double rel = 1e-8;
    double abs = 1e-10;
};

struct OdeOptions {
    Tolerance tol;
    long max_steps = 5'000'000;
    double h_max = std::numeric_limits<double>::infinity();
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    // Sum of accepted local error estimates (2-norm, absolute units).
    double error_estimate = 0.0;
};

using OdeRhs = std::function<void(double t, const Vector& y, Vector& dydt)>;
using OdeObserver = std::function<void(std::size_t stop, double t, const Vector& y)>;

// Adaptive Dormand-Prince 5(4) with FSAL and PI step control. Integrates from
// t0 through every entry of `stops` (sorted, >= t0), landing on each exactly.
// Throws integration_failure when the step budget is exhausted or the step
// size underflows, instability on non-finite or overflowing state.
OdeStats integrate_dopri5(const OdeRhs& f, double t0, Vector& y,
                          const std::vector<double>& stops, const OdeObserver& observe,
                          const OdeOptions& opts = {});

} // namespace phoclone
