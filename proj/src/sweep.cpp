#include "jcloss/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Dense>

namespace jcloss {

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    int count = 0;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
    LineFit f;
    f.count = static_cast<int>(t.size());
    if (f.count < 2) throw WindowTooShort("line fit needs at least 2 samples");
    double tm = 0.0, ym = 0.0;
    for (int i = 0; i < f.count; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= f.count;
    ym /= f.count;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < f.count; ++i) {
        num += (t[i] - tm) * (y[i] - ym);
        den += (t[i] - tm) * (t[i] - tm);
    }
    if (den == 0.0) throw WindowTooShort("degenerate time window");
    f.slope = num / den;
    f.intercept = ym - f.slope * tm;
    return f;
}

// Samples inside the window [end, start] x E(0), past the transient. The
// window is cut on the total stored energy E = n + sigma_pp, which decays
// monotonically even when vacuum-Rabi oscillations make <n> itself
// non-monotone; E(0) = n0 since the TLS starts in its ground state.
void window_samples(const std::vector<ObservableRecord>& records, double skip_time,
                    double start_fraction, double end_fraction,
                    std::vector<double>& t, std::vector<double>& n,
                    std::vector<double>* energy = nullptr) {
    const double e_init = records.front().n + records.front().sigma_pp;
    t.clear();
    n.clear();
    if (energy) energy->clear();
    for (const auto& r : records) {
        if (r.t < skip_time) continue;
        const double frac = (r.n + r.sigma_pp) / e_init;
        if (frac > start_fraction || frac < end_fraction) continue;
        t.push_back(r.t);
        n.push_back(r.n);
        if (energy) energy->push_back(r.n + r.sigma_pp);
    }
}

bool is_oscillatory(const std::vector<ObservableRecord>& records, double skip_time) {
    // Vacuum-Rabi oscillations drive <n> far back up between samples; a
    // monotone decay only wiggles at integration-noise level.
    const double tol = 0.02 * std::max(records.front().n, 1e-300);
    double running_min = records.front().n;
    for (const auto& r : records) {
        if (r.t < skip_time) continue;
        if (r.n > running_min + tol) return true;
        running_min = std::min(running_min, r.n);
    }
    return false;
}

// The transient skip never eats into the fit window: when the energy reaches
// the window start before the skip elapses, the window cut itself is the
// transient guard.
double effective_skip(const std::vector<ObservableRecord>& records, double skip,
                      double start_fraction) {
    const double e_init = records.front().n + records.front().sigma_pp;
    for (const auto& r : records)
        if (r.n + r.sigma_pp <= start_fraction * e_init)
            return std::min(skip, r.t);
    return skip;
}

double exponential_fit(const std::vector<ObservableRecord>& records,
                       const ModelParams& params, const LossEstimatorConfig& cfg) {
    std::vector<double> t, n;
    const double skip = effective_skip(records, cfg.transient_skip * params.T2(),
                                       cfg.window_start_fraction);
    window_samples(records, skip,
                   cfg.window_start_fraction, cfg.window_end_fraction, t, n);
    std::vector<double> logn;
    std::vector<double> tt;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] <= 0.0) continue;
        tt.push_back(t[i]);
        logn.push_back(std::log(n[i]));
    }
    if (tt.size() < 4)
        throw WindowTooShort("exponential fit: fewer than 4 usable samples in the energy window");
    const LineFit f = fit_line(tt, logn);
    return std::abs(f.slope) / params.omega;
}

double linear_fit(const std::vector<ObservableRecord>& records,
                  const ModelParams& params, const LossEstimatorConfig& cfg,
                  bool fit_energy = false) {
    std::vector<double> t, n, e;
    // The energy fit needs no extra transient skip: E = n + sigma_pp carries
    // no Rabi oscillation and the 0.95 window start already excludes the
    // initial TLS loading.
    const double skip =
        fit_energy ? 0.0
                   : effective_skip(records, cfg.transient_skip * params.T2(),
                                    cfg.window_start_fraction);
    window_samples(records, skip,
                   cfg.window_start_fraction, cfg.window_end_fraction, t, n, &e);
    if (t.size() < 4)
        throw WindowTooShort("linear fit: fewer than 4 usable samples in the energy window");
    const LineFit f = fit_line(t, fit_energy ? e : n);
    const double n_init = records.front().n;
    if (n_init <= 0.0) throw WindowTooShort("linear fit: empty initial state");
    return std::abs(f.slope) / (params.omega * n_init);
}

// Modal-rate estimate for oscillatory strong-coupling decay. The restricted
// manifold makes <n(t)> a sum of three exponentials whose rates average to
// the strong-coupling unsaturated loss. A least-squares linear recurrence of
// order 3 on uniform subsamples recovers the product of the characteristic
// roots (its lag-3 coefficient), hence the rate sum, without needing the
// individual modes to be well separated.
double modal_rate_fit(const std::vector<ObservableRecord>& records,
                      const ModelParams& params) {
    if (records.size() < 16) throw WindowTooShort("modal fit: too few samples");
    const double dt = records[1].t - records[0].t;
    if (!(dt > 0.0)) throw WindowTooShort("modal fit: degenerate grid");

    const double target = M_PI / (8.0 * std::max(params.g, 1e-12));
    const int stride = std::max(1, static_cast<int>(std::floor(target / dt)));
    const double dts = stride * dt;

    const double n_init = records.front().n;
    std::vector<double> s;
    for (std::size_t i = 0; i < records.size(); i += stride)
        s.push_back(records[i].n / std::max(n_init, 1e-300));

    // Drop the fully decayed tail; it only adds noise rows.
    std::size_t m = s.size();
    while (m > 16 && s[m - 1] < 1e-5 && s[m - 2] < 1e-5 && s[m - 3] < 1e-5) --m;
    if (m < 16) throw WindowTooShort("modal fit: window too short after decay cut");

    const std::size_t rows = m - 3;
    Eigen::MatrixXd A(rows, 3);
    Eigen::VectorXd b(rows);
    for (std::size_t k = 0; k < rows; ++k) {
        A(k, 0) = s[k];
        A(k, 1) = s[k + 1];
        A(k, 2) = s[k + 2];
        b(k) = s[k + 3];
    }
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(b);
    // Recurrence s_{k+3} = c2 s_{k+2} + c1 s_{k+1} + c0 s_k; the root product
    // is c0, so the decay-rate sum is -ln|c0| / dts.
    const double c0 = coef(0);
    if (!(std::abs(c0) > 0.0) || std::abs(c0) >= 1.0)
        throw EstimatorError("modal fit: unstable recurrence (|c0| = " +
                             std::to_string(std::abs(c0)) + ")");
    const double rate_sum = -std::log(std::abs(c0)) / dts;
    return rate_sum / (3.0 * params.omega);
}

}  // namespace

const char* to_string(PointFlag f) {
    switch (f) {
        case PointFlag::Ok: return "ok";
        case PointFlag::EnvelopeFit: return "envelope";
        default: return "failed";
    }
}

LossEstimate loss_from_trajectory(const std::vector<ObservableRecord>& records,
                                  const ModelParams& params,
                                  const LossEstimatorConfig& cfg) {
    cfg.validate();
    if (records.size() < 4) throw WindowTooShort("trajectory has fewer than 4 samples");
    if (!(records.front().n > 0.0))
        throw WindowTooShort("trajectory starts from an empty resonator");

    switch (cfg.method) {
        case LossEstimatorConfig::Method::ExponentialFit:
            return {exponential_fit(records, params, cfg), PointFlag::Ok};
        case LossEstimatorConfig::Method::LinearFit:
            return {linear_fit(records, params, cfg), PointFlag::Ok};
        case LossEstimatorConfig::Method::Auto:
            break;
    }

    const RegimeReport rep = classify_regime(params);
    const double t_end = records.back().t;
    const double scan_from = std::min(cfg.transient_skip * params.T2(), 0.25 * t_end);
    const bool oscillatory = is_oscillatory(records, scan_from);
    if (rep.saturation == Saturation::Saturated) {
        // Oscillatory saturated decay: fit the monotone total energy instead
        // of <n>; the coherent exchange cancels out of n + sigma_pp.
        if (oscillatory)
            return {linear_fit(records, params, cfg, true), PointFlag::EnvelopeFit};
        return {linear_fit(records, params, cfg), PointFlag::Ok};
    }
    if (oscillatory)
        return {modal_rate_fit(records, params), PointFlag::EnvelopeFit};
    return {exponential_fit(records, params, cfg), PointFlag::Ok};
}

IntegratorConfig sweep_run_config(const ModelParams& params) {
    if (!(params.g > 0.0))
        throw ConfigError("loss sweep requires g > 0 (a decoupled resonator never decays)");
    const double T1 = params.T1, T2 = params.T2();
    const double skip = 3.0 * T2;
    const double end_frac = 0.60;
    const RegimeReport rep = classify_regime(params);

    IntegratorConfig run;
    run.rel_tol = params.n0 >= 100.0 ? 1e-7 : 1e-8;
    run.abs_tol = 1e-10 * std::max(1.0, params.n0);

    double t_end, dt;
    if (rep.saturation == Saturation::Saturated) {
        t_end = skip + 1.15 * 2.0 * T1 * params.n0 * (1.0 - end_frac);
        dt = t_end / 1600.0;
    } else if (rep.coupling == Coupling::Strong) {
        const double plateau_rate = loss_strong_unsaturated(T1, T2, 1.0);
        t_end = std::max(4.0 * T1, 3.0 / plateau_rate);
        dt = 0.03 / (2.0 * params.g * std::sqrt(params.n0 + 1.0));
    } else {
        const double rate = gamma_effective(std::max(params.g, 1e-12), T1, T2);
        const double t_exp = 1.5 * std::log(1.0 / end_frac) / rate;
        const double t_lin = 1.5 * 2.0 * T1 * params.n0 * (1.0 - end_frac);
        t_end = skip + ((rep.saturation == Saturation::Crossover)
                            ? std::max(t_exp, t_lin)
                            : t_exp);
        dt = std::min(T2 / 8.0, t_end / 1200.0);
    }
    run.t_end = t_end;
    if (t_end > 1e6 * T1)
        throw ConfigError("loss sweep: expected decay time " + std::to_string(t_end) +
                          " is impractically long at g = " + std::to_string(params.g));
    int samples = static_cast<int>(std::ceil(t_end / dt)) + 1;
    samples = std::clamp(samples, 201, 60000);
    run.sample_count = samples;
    return run;
}

LossCurve sweep_loss(const ModelParams& params_template,
                     const std::vector<double>& n0_grid,
                     const LossEstimatorConfig& cfg) {
    cfg.validate();
    for (std::size_t i = 0; i < n0_grid.size(); ++i) {
        if (!(n0_grid[i] > 0.0)) throw ConfigError("n0 grid entries must be > 0");
        if (i > 0 && n0_grid[i] < n0_grid[i - 1])
            throw ConfigError("n0 grid must be sorted ascending");
    }

    LossCurve curve;
    curve.normalization = gamma_effective(0.2, 1.0, 0.2) / params_template.omega;
    curve.points.resize(n0_grid.size());

    std::mutex mtx;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= n0_grid.size()) return;
                i = next++;
            }
            ModelParams pt = params_template;
            pt.n0 = n0_grid[i];
            pt.dims.reset();  // per-point truncation
            LossPoint point;
            point.n0 = pt.n0;
            point.R0 = dimensionless_field(pt.g, pt.n0, pt.T1, pt.T2());
            point.regime = classify_regime(pt);
            try {
                const IntegratorConfig run = sweep_run_config(pt);
                std::vector<ObservableRecord> records;
                try {
                    records = evolve_master(pt, run);
                } catch (const TruncationError&) {
                    // Strong driving can push population past the default
                    // cutoff; retry once with a widened space.
                    const int n_default = pt.hilbert().fock_cutoff;
                    pt.dims = HilbertDims::with_cutoff(n_default + n_default / 2 + 8);
                    records = evolve_master(pt, run);
                    point.note = "fock_cutoff widened to " +
                                 std::to_string(pt.hilbert().fock_cutoff);
                }
                const LossEstimate est = loss_from_trajectory(records, pt, cfg);
                point.q_inv = est.q_inv;
                point.q_inv_normalized = est.q_inv / curve.normalization;
                point.flag = est.flag;
            } catch (const Error& e) {
                point.flag = PointFlag::Failed;
                point.note = e.what();
                point.q_inv = std::numeric_limits<double>::quiet_NaN();
                point.q_inv_normalized = point.q_inv;
            }
            {
                std::lock_guard<std::mutex> lock(mtx);
                curve.points[i] = std::move(point);
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nthreads = std::min<std::size_t>(hw, n0_grid.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k + 1 < nthreads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return curve;
}

double locate_knee(const LossCurve& curve) {
    std::vector<const LossPoint*> valid;
    for (const auto& p : curve.points)
        if (p.flag != PointFlag::Failed && std::isfinite(p.q_inv) && p.q_inv > 0.0)
            valid.push_back(&p);
    if (valid.size() < 4) throw WindowTooShort("locate_knee: fewer than 4 valid points");

    const std::size_t m = std::min<std::size_t>(3, valid.size() / 2);
    double log_plateau = 0.0;
    for (std::size_t i = 0; i < m; ++i) log_plateau += std::log(valid[i]->q_inv);
    log_plateau /= m;

    double log_tail_c = 0.0;  // q_inv ~ C / n0 on the saturated tail
    for (std::size_t i = valid.size() - m; i < valid.size(); ++i)
        log_tail_c += std::log(valid[i]->q_inv * valid[i]->n0);
    log_tail_c /= m;

    return std::exp(log_tail_c - log_plateau);
}

NsMinResult find_ns_min(double T1, const std::vector<double>& t1_over_t2_grid,
                        const LossEstimatorConfig& cfg, double g_T1) {
    if (!(T1 > 0.0)) throw ConfigError("T1 must be > 0");
    NsMinResult result;
    result.ns_min = std::numeric_limits<double>::infinity();
    for (double ratio : t1_over_t2_grid) {
        if (ratio < 0.5 - 1e-12)
            throw ConfigError("T1/T2 ratio below 1/2 violates T2 <= 2*T1");
        const double T2 = T1 / ratio;
        ModelParams tmpl;
        tmpl.g = g_T1 / T1;
        tmpl.T1 = T1;
        tmpl.Tphi = ModelParams::tphi_from_T2(T1, T2);
        tmpl.omega = 1.0;

        // Both grid ends must sit deep in their asymptotic regimes or the
        // fitted plateau/tail ride the crossover shoulder and bias the knee.
        const double n_formula = knee_strong(T1, T2);
        const double lo = std::max(0.004, n_formula / 50.0);
        const double hi = std::max(16.0, 8.0 * n_formula);
        const int npts = 14;
        std::vector<double> grid(npts);
        for (int i = 0; i < npts; ++i)
            grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (npts - 1));

        const LossCurve curve = sweep_loss(tmpl, grid, cfg);
        const double knee = locate_knee(curve);
        result.ratios.push_back(ratio);
        result.knees.push_back(knee);
        result.formula_knees.push_back(n_formula);
        result.ns_min = std::min(result.ns_min, knee);
    }
    return result;
}

std::vector<double> default_n0_grid() {
    std::vector<double> grid(24);
    for (int i = 0; i < 24; ++i)
        grid[i] = 1e-2 * std::pow(1e5, static_cast<double>(i) / 23.0);
    return grid;
}

}  // namespace jcloss
