#pragma once

#include <cmath>
#include <functional>

#include "jcloss/errors.hpp"

namespace jcloss {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_end = 10.0;
    int sample_count = 201;  // uniform grid over [0, t_end], endpoints included

    enum class Method { AdaptiveRK, FixedRK4 };
    Method method = Method::AdaptiveRK;
    double fixed_dt = 1e-3;  // step size cap for FixedRK4

    void validate() const {
        if (!(rel_tol > 0.0) || rel_tol > 1e-3 || !(abs_tol > 0.0) || abs_tol > 1e-3)
            throw ConfigError("integrator tolerances must lie in (0, 1e-3]");
        if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
        if (sample_count < 2) throw ConfigError("sample_count must be >= 2");
        if (method == Method::FixedRK4 && !(fixed_dt > 0.0))
            throw ConfigError("fixed_dt must be > 0");
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c2 = 1.0 / 5, dp_c3 = 3.0 / 10, dp_c4 = 4.0 / 5,
                        dp_c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat, the embedded error weights (stage 7 = FSAL).
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1,
                    double abs_tol, double rel_tol) {
    const auto sc = abs_tol + rel_tol * y0.array().abs().max(y1.array().abs());
    const auto q = err.array().abs() / sc;
    return std::sqrt((q * q).sum() / static_cast<double>(err.size()));
}

}  // namespace detail

// Integrates dy/dt = rhs(t, y, dydt) over the uniform sample grid of cfg,
// landing exactly on each sample time (no interpolation). on_sample(k, t, y)
// fires at every grid point including t = 0. post_step(y) runs after every
// accepted step and returns true when it modified y (the master engine
// re-symmetrizes there); a modified state invalidates the FSAL stage.
//
// State must be an Eigen dense object; all temporaries are preallocated once.
template <class State, class Rhs, class OnSample, class PostStep>
void integrate_sampled(const IntegratorConfig& cfg, State& y, Rhs&& rhs,
                       OnSample&& on_sample, PostStep&& post_step) {
    cfg.validate();
    const double dt_sample = cfg.t_end / (cfg.sample_count - 1);

    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y;
    State ytmp = y, ynew = y, yerr = y;

    on_sample(0, 0.0, y);

    if (cfg.method == IntegratorConfig::Method::FixedRK4) {
        for (int s = 1; s < cfg.sample_count; ++s) {
            const double t0 = (s - 1) * dt_sample;
            const double t1 = s * dt_sample;
            const int nsub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / cfg.fixed_dt)));
            const double h = (t1 - t0) / nsub;
            double t = t0;
            for (int i = 0; i < nsub; ++i) {
                rhs(t, y, k1);
                ytmp = y + (0.5 * h) * k1;
                rhs(t + 0.5 * h, ytmp, k2);
                ytmp = y + (0.5 * h) * k2;
                rhs(t + 0.5 * h, ytmp, k3);
                ytmp = y + h * k3;
                rhs(t + h, ytmp, k4);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                post_step(y);
                t += h;
            }
            on_sample(s, t1, y);
        }
        return;
    }

    using namespace detail;
    double h_nat = dt_sample;  // adapted step size; controller shrinks it fast
    bool have_k1 = false;      // FSAL: k1 of the next step equals k7 of the last

    for (int s = 1; s < cfg.sample_count; ++s) {
        double t = (s - 1) * dt_sample;
        const double t_target = s * dt_sample;
        const double t_eps = 1e-12 * std::max(1.0, t_target);
        while (t_target - t > t_eps) {
            const double h = std::min(h_nat, t_target - t);
            const bool clipped = h < h_nat;
            if (h < 1e-14 * std::max(1.0, std::abs(t)))
                throw IntegratorError("adaptive step size underflow at t = " + std::to_string(t));

            if (!have_k1) rhs(t, y, k1);
            ytmp = y + h * (a21 * k1);
            rhs(t + dp_c2 * h, ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            rhs(t + dp_c3 * h, ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + dp_c4 * h, ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + dp_c5 * h, ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(t + h, ytmp, k6);
            ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(t + h, ynew, k7);
            yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double err = scaled_error(yerr, y, ynew, cfg.abs_tol, cfg.rel_tol);
            double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
            fac = std::min(5.0, std::max(0.2, fac));
            if (err <= 1.0) {
                t += h;
                y = ynew;
                const bool modified = post_step(y);
                if (!modified) {
                    k1 = k7;
                    have_k1 = true;
                } else {
                    have_k1 = false;
                }
                if (!clipped)
                    h_nat = h * fac;
                else
                    h_nat = std::max(h_nat, h * fac);
            } else {
                h_nat = h * std::min(1.0, fac);
                // k1 is still valid at (t, y)
                have_k1 = true;
            }
        }
        on_sample(s, t_target, y);
    }
}

}  // namespace jcloss
