// Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).
//
// The right-hand sides integrated here (geodesic flow plus Jacobi fields)
// are smooth, so a single high-order adaptive pair with a standard PI-free
// step controller covers every use in the project. States are fixed-size
// arrays; the integrator is header-only and allocation-free.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "billiards/errors.hpp"

namespace billiards {

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 1e-3;
    double max_step = 0.25;
    std::size_t max_steps = 2'000'000;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

namespace detail {

// RK5(4)7M coefficients (Dormand & Prince 1980).
inline constexpr double dp_c[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
// 5th-order solution weights equal the last a-row (FSAL); 4th-order weights below.
inline constexpr double dp_b4[7] = {5179.0 / 57600.0, 0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                                    -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

}  // namespace detail

// Integrates y' = f(t, y) from t0 to t1 (t1 >= t0).  After every accepted
// step the observer is called with (t_prev, y_prev, t, y); returning true
// stops the integration at that step boundary.  Returns the final time
// reached (== t1 unless the observer stopped early).
template <std::size_t N, class RHS, class Observer>
double integrate_observed(RHS&& f, OdeState<N>& y, double t0, double t1, const OdeOptions& opts,
                          Observer&& observer) {
    if (t1 <= t0) return t0;

    using State = OdeState<N>;
    State k[7];
    double t = t0;
    double h = std::min({opts.initial_step, opts.max_step, t1 - t0});

    f(t, y, k[0]);  // FSAL slot

    for (std::size_t step = 0; step < opts.max_steps; ++step) {
        if (t >= t1) return t;
        h = std::min(h, t1 - t);
        if (!(h > 0.0) || t + h == t) {
            throw Error(ErrorKind::IntegrationFailure, "step size underflow at t=" + std::to_string(t));
        }

        State ytmp, y5;
        for (int stage = 1; stage < 7; ++stage) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (int j = 0; j < stage; ++j) acc += detail::dp_a[stage][j] * k[j][i];
                ytmp[i] = y[i] + h * acc;
            }
            f(t + detail::dp_c[stage] * h, ytmp, k[stage]);
        }
        y5 = ytmp;  // stage 7 state is the 5th-order solution (c7 = 1, a7 = b5)

        // Error estimate against the embedded 4th-order solution.
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double acc4 = 0.0;
            for (int j = 0; j < 7; ++j) acc4 += detail::dp_b4[j] * k[j][i];
            const double y4i = y[i] + h * acc4;
            const double sc = opts.abs_tol + opts.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            const double e = (y5[i] - y4i) / sc;
            err += e * e;
        }
        err = std::sqrt(err / static_cast<double>(N));

        if (err <= 1.0) {
            const double t_prev = t;
            const State y_prev = y;
            t += h;
            y = y5;
            k[0] = k[6];  // FSAL
            const bool stop = observer(t_prev, y_prev, t, y);
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = std::min(opts.max_step, h * std::clamp(grow, 0.2, 5.0));
            if (stop) return t;
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            // k[0] still holds f(t, y) for the retried step.
        }
    }
    throw Error(ErrorKind::IntegrationFailure, "step budget exhausted");
}

template <std::size_t N, class RHS>
void integrate(RHS&& f, OdeState<N>& y, double t0, double t1, const OdeOptions& opts) {
    integrate_observed<N>(std::forward<RHS>(f), y, t0, t1, opts,
                          [](double, const OdeState<N>&, double, const OdeState<N>&) { return false; });
}

}  // namespace billiards
