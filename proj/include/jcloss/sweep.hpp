#pragma once

#include <string>
#include <vector>

#include "jcloss/regimes.hpp"

namespace jcloss {

struct LossEstimatorConfig {
    enum class Method { ExponentialFit, LinearFit, Auto };
    Method method = Method::Auto;
    // Fit window as fractions of the initial energy, (start, end).
    double window_start_fraction = 0.95;
    double window_end_fraction = 0.60;
    // Skip this many multiples of T2 before fitting; <n_dot(0)> = 0 exactly,
    // so the literal t = 0 loss evaluation is degenerate.
    double transient_skip = 3.0;

    void validate() const {
        if (!(window_end_fraction > 0.0) ||
            !(window_end_fraction < window_start_fraction) ||
            !(window_start_fraction <= 1.0))
            throw ConfigError("estimator window must satisfy 0 < end < start <= 1");
        if (transient_skip < 0.0) throw ConfigError("transient_skip must be >= 0");
    }
};

enum class PointFlag { Ok, EnvelopeFit, Failed };
const char* to_string(PointFlag f);

struct LossEstimate {
    double q_inv = 0.0;
    PointFlag flag = PointFlag::Ok;
};

struct LossPoint {
    double n0 = 0.0;
    double R0 = 0.0;
    double q_inv = 0.0;
    double q_inv_normalized = 0.0;
    RegimeReport regime{};
    PointFlag flag = PointFlag::Ok;
    std::string note{};  // failure reason when flag == Failed
};

struct LossCurve {
    std::vector<LossPoint> points;   // ordered by n0
    double normalization = 1.0;      // weak-coupling low-photon reference loss
};

// Extracts 1/Q from a sampled trajectory.
//   exponential: least-squares line through ln<n> on the energy window after
//     the transient; q_inv = |slope| / omega.
//   linear: least-squares line through <n> on the same window;
//     q_inv = |slope| / (omega n0).
//   auto: picks by regime; oscillatory strong-coupling decay (vacuum-Rabi
//     oscillations make <n> non-monotone) falls back to a modal-rate fit of
//     the multi-exponential envelope, flagged EnvelopeFit in the result.
LossEstimate loss_from_trajectory(const std::vector<ObservableRecord>& records,
                                  const ModelParams& params,
                                  const LossEstimatorConfig& cfg);

// One master-equation run per n0, each with its own truncation and time grid.
// Points run in parallel; failures are flagged per-point, never aborting the
// sweep. The normalization is Gamma/omega of the weak reference parameter set
// g = 0.2, T1 = 1, T2 = 0.2.
LossCurve sweep_loss(const ModelParams& params_template,
                     const std::vector<double>& n0_grid,
                     const LossEstimatorConfig& cfg);

// Fits the low-n0 plateau and the high-n0 1/n0 tail of a measured curve and
// returns the abscissa where they intersect.
double locate_knee(const LossCurve& curve);

struct NsMinResult {
    double ns_min = 0.0;
    std::vector<double> ratios;         // T1/T2 grid
    std::vector<double> knees;          // measured knee per ratio
    std::vector<double> formula_knees;  // (3/2)/(1 + T1/T2) alongside
};

// Minimizes the measured strong-coupling knee over a T1/T2 ratio grid at
// fixed very strong coupling (g*T1 = 50 by default).
NsMinResult find_ns_min(double T1, const std::vector<double>& t1_over_t2_grid,
                        const LossEstimatorConfig& cfg, double g_T1 = 50.0);

// 24 log-spaced points spanning [1e-2, 1e3], the default figure range.
std::vector<double> default_n0_grid();

// The per-point run recipe sweep_loss uses: horizon from the expected decay
// rate of the classified regime, sampling fine enough for the estimator.
IntegratorConfig sweep_run_config(const ModelParams& params);

}  // namespace jcloss
