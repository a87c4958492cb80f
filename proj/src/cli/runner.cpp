#include "cli/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "jcloss/bloch.hpp"

namespace jcloss::cli {

using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string{};
}

std::string fmt_opt_re(const std::optional<Cplx>& v) {
    return v ? fmt(v->real()) : std::string{};
}

std::string fmt_opt_im(const std::optional<Cplx>& v) {
    return v ? fmt(v->imag()) : std::string{};
}

std::vector<double> uniform_grid(const IntegratorConfig& cfg) {
    std::vector<double> t(cfg.sample_count);
    for (int i = 0; i < cfg.sample_count; ++i)
        t[i] = cfg.t_end * i / (cfg.sample_count - 1);
    return t;
}

// Closed-form record synthesis: the per-regime analytic solutions stand in
// for the figure's analytic curves. Weak coupling uses the quasistatic
// exponential/linear forms; strong coupling uses the restricted-manifold
// solution.
std::vector<ObservableRecord> analytic_records(const RunConfig& cfg) {
    const ModelParams& p = cfg.model;
    const RegimeReport rep = classify_regime(p);
    const auto grid = uniform_grid(cfg.integrator);

    if (rep.coupling == Coupling::Strong && rep.saturation != Saturation::Saturated)
        return evolve_manifold(p, grid);

    std::vector<ObservableRecord> out;
    out.reserve(grid.size());
    const double T2 = p.T2();
    if (rep.saturation == Saturation::Saturated) {
        const double n_w =
            rep.coupling == Coupling::Weak && p.g > 0.0 ? knee_weak(p.g, p.T1, T2).exact : 0.0;
        for (double t : grid) {
            ObservableRecord r;
            r.t = t;
            const SaturatedN s = saturated_n(t, p.n0, p.T1, n_w);
            r.n = s.n;
            r.sigma_pp = 0.5;
            out.push_back(r);
        }
        return out;
    }
    const double gamma = p.g > 0.0 ? gamma_effective(p.g, p.T1, T2) : 0.0;
    for (double t : grid) {
        ObservableRecord r;
        r.t = t;
        r.n = weak_unsaturated_n(t, p.n0, gamma);
        const double R = dimensionless_field(p.g, r.n, p.T1, T2);
        r.sigma_pp = quasistatic_tls(R, p.T1, T2).sigma_pp;
        out.push_back(r);
    }
    return out;
}

void append_record_checks(const std::vector<ObservableRecord>& recs, const ModelParams& p,
                          bool has_trace, std::vector<InvariantCheck>* checks) {
    if (!checks) return;
    double trace_dev = 0.0, spp_lo = 0.0, spp_hi = 0.0, n_neg = 0.0, e_up = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        if (r.trace) trace_dev = std::max(trace_dev, std::abs(*r.trace - 1.0));
        spp_lo = std::min(spp_lo, r.sigma_pp);
        spp_hi = std::max(spp_hi, r.sigma_pp - 1.0);
        n_neg = std::min(n_neg, r.n);
        if (i > 0)
            e_up = std::max(e_up, (r.n + r.sigma_pp) -
                                      (recs[i - 1].n + recs[i - 1].sigma_pp));
    }
    if (has_trace)
        checks->push_back({"trace_deviation", trace_dev, trace_dev < 1e-6});
    checks->push_back({"sigma_pp_lower", -spp_lo, spp_lo > -1e-8});
    checks->push_back({"sigma_pp_upper", std::max(0.0, spp_hi), spp_hi < 1e-6});
    checks->push_back({"n_nonnegative", std::max(0.0, -n_neg), n_neg > -1e-8});
    const double e_tol = 1e-9 * std::max(1.0, p.n0);
    checks->push_back({"monotone_energy", std::max(0.0, e_up), e_up < e_tol});
}

}  // namespace

std::vector<ObservableRecord> evolve_with_engine(Engine engine, const RunConfig& cfg,
                                                 std::vector<InvariantCheck>* checks) {
    const ModelParams& p = cfg.model;
    switch (engine) {
        case Engine::Master: {
            double herm = 0.0, eig_min = 0.0;
            std::vector<ObservableRecord> recs;
            const int stride = std::max(1, (cfg.integrator.sample_count - 1) / 10);
            if (checks && p.hilbert().total_dim <= 2048) {
                DensityMatrix init =
                    coherent_tls_ground(std::sqrt(p.n0), p.hilbert());
                recs = evolve_master(p, cfg.integrator, init,
                                     [&](int k, double, const Matrix& rho) {
                                         if (k % stride != 0) return;
                                         DensityMatrix dm{p.hilbert(), rho};
                                         herm = std::max(herm, dm.hermiticity_residual());
                                         eig_min = std::min(eig_min, dm.min_eigenvalue());
                                     });
                checks->push_back({"hermiticity", herm, herm < 1e-9});
                checks->push_back({"min_eigenvalue", std::max(0.0, -eig_min), eig_min > -1e-8});
            } else {
                recs = evolve_master(p, cfg.integrator);
            }
            if (checks) {
                const double skip =
                    std::max(3.0 * p.T2(), 16.0 / (1.0 / p.T1 + 1.0 / p.T2()));
                double eflow = 0.0;
                bool eflow_ok = true;
                try {
                    eflow = energy_flow_residual(recs, p.T1, skip);
                    eflow_ok = eflow < 1e-3;
                } catch (const WindowTooShort&) {
                    eflow_ok = true;  // run shorter than the check window
                }
                checks->push_back({"energy_flow", eflow, eflow_ok});
            }
            append_record_checks(recs, p, true, checks);
            return recs;
        }
        case Engine::Bloch: {
            auto recs = evolve_bloch(p, cfg.integrator);
            if (checks) {
                double smax = 0.0;
                for (const auto& r : recs)
                    if (r.sigma_minus) smax = std::max(smax, std::abs(*r.sigma_minus));
                checks->push_back({"bloch_sphere_bound", std::max(0.0, smax - 0.5),
                                   smax <= 0.5 + 1e-9});
            }
            append_record_checks(recs, p, false, checks);
            return recs;
        }
        case Engine::Manifold: {
            auto recs = evolve_manifold(p, uniform_grid(cfg.integrator));
            append_record_checks(recs, p, false, checks);
            return recs;
        }
        case Engine::Analytic:
            return analytic_records(cfg);
        default:
            throw ConfigError("engine: 'all' must be expanded before dispatch");
    }
}

std::string csv_time_series(const std::vector<std::pair<std::string,
                            std::vector<ObservableRecord>>>& series) {
    std::ostringstream os;
    os << "t,n,sigma_pp,re_sigma_minus,im_sigma_minus,re_corr,im_corr,trace,purity,engine\n";
    for (const auto& [tag, recs] : series)
        for (const auto& r : recs)
            os << fmt(r.t) << ',' << fmt(r.n) << ',' << fmt(r.sigma_pp) << ','
               << fmt_opt_re(r.sigma_minus) << ',' << fmt_opt_im(r.sigma_minus) << ','
               << fmt_opt_re(r.corr) << ',' << fmt_opt_im(r.corr) << ','
               << fmt_opt(r.trace) << ',' << fmt_opt(r.purity) << ',' << tag << '\n';
    return os.str();
}

std::string csv_loss_curve(const LossCurve& curve) {
    std::ostringstream os;
    os << "n0,R0,q_inv,q_inv_normalized,coupling,saturation,flag\n";
    for (const auto& p : curve.points)
        os << fmt(p.n0) << ',' << fmt(p.R0) << ',' << fmt(p.q_inv) << ','
           << fmt(p.q_inv_normalized) << ',' << to_string(p.regime.coupling) << ','
           << to_string(p.regime.saturation) << ',' << to_string(p.flag) << '\n';
    return os.str();
}

namespace {

ordered_json records_json(const std::vector<ObservableRecord>& recs, const std::string& tag) {
    ordered_json rows = ordered_json::array();
    for (const auto& r : recs) {
        ordered_json row;
        row["t"] = r.t;
        row["n"] = r.n;
        row["sigma_pp"] = r.sigma_pp;
        if (r.sigma_minus) {
            row["re_sigma_minus"] = r.sigma_minus->real();
            row["im_sigma_minus"] = r.sigma_minus->imag();
        }
        if (r.corr) {
            row["re_corr"] = r.corr->real();
            row["im_corr"] = r.corr->imag();
        }
        if (r.trace) row["trace"] = *r.trace;
        if (r.purity) row["purity"] = *r.purity;
        row["engine"] = tag;
        rows.push_back(row);
    }
    return rows;
}

ordered_json curve_json(const LossCurve& curve) {
    ordered_json rows = ordered_json::array();
    for (const auto& p : curve.points) {
        ordered_json row;
        row["n0"] = p.n0;
        row["R0"] = p.R0;
        row["q_inv"] = p.q_inv;
        row["q_inv_normalized"] = p.q_inv_normalized;
        row["coupling"] = to_string(p.regime.coupling);
        row["saturation"] = to_string(p.regime.saturation);
        row["flag"] = to_string(p.flag);
        if (!p.note.empty()) row["note"] = p.note;
        rows.push_back(row);
    }
    return rows;
}

ordered_json checks_json(const std::vector<InvariantCheck>& checks) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json j;
        j["name"] = c.name;
        j["residual"] = c.residual;
        j["pass"] = c.pass;
        arr.push_back(j);
    }
    return arr;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out: cannot open '" + path + "' for writing");
    f << content;
}

// Emits table + sidecar (csv) or a single combined JSON document.
void emit(const RunConfig& cfg, const std::string& csv, const ordered_json& data_rows,
          const std::vector<InvariantCheck>& checks, std::ostream& out) {
    ordered_json meta = ordered_json::parse(config_to_json(cfg));
    meta["invariant_checks"] = checks_json(checks);
    if (cfg.format == "json") {
        ordered_json doc;
        doc["meta"] = meta;
        doc["data"] = data_rows;
        const std::string text = doc.dump(2) + "\n";
        if (cfg.out.empty())
            out << text;
        else
            write_file(cfg.out, text);
        return;
    }
    if (cfg.out.empty()) {
        out << csv;
        return;
    }
    write_file(cfg.out, csv);
    write_file(cfg.out + ".meta.json", meta.dump(2) + "\n");
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

int run_evolve(const RunConfig& cfg, std::ostream& out) {
    std::vector<std::pair<std::string, std::vector<ObservableRecord>>> series;
    std::vector<InvariantCheck> checks;
    std::vector<Engine> engines;
    if (cfg.engine == Engine::All)
        engines = {Engine::Master, Engine::Bloch, Engine::Analytic};
    else
        engines = {cfg.engine};
    for (Engine e : engines)
        series.emplace_back(to_string(e), evolve_with_engine(e, cfg, &checks));

    ordered_json rows = ordered_json::array();
    for (const auto& [tag, recs] : series)
        for (auto& row : records_json(recs, tag)) rows.push_back(row);
    emit(cfg, csv_time_series(series), rows, checks, out);
    return 0;
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
    std::vector<InvariantCheck> checks;
    LossCurve curve;
    const bool fig_pair = cfg.fig && (*cfg.fig == "fig5" || *cfg.fig == "fig6");

    if (cfg.engine == Engine::Analytic) {
        // Classical steady-drive curve, Eq-exact closed form.
        curve.normalization = gamma_effective(0.2, 1.0, 0.2) / cfg.model.omega;
        for (double n0 : log_grid(cfg.n0_grid_min, cfg.n0_grid_max, cfg.n0_grid_points)) {
            ModelParams p = cfg.model;
            p.n0 = n0;
            LossPoint pt;
            pt.n0 = n0;
            pt.R0 = dimensionless_field(p.g, n0, p.T1, p.T2());
            pt.q_inv = loss_classical(pt.R0, p.g, p.T2(), p.omega);
            pt.q_inv_normalized = pt.q_inv / curve.normalization;
            pt.regime = classify_regime(p);
            curve.points.push_back(pt);
        }
    } else if (cfg.engine == Engine::Master) {
        const auto grid = log_grid(cfg.n0_grid_min, cfg.n0_grid_max, cfg.n0_grid_points);
        if (fig_pair) {
            ModelParams weak = cfg.model;
            weak.g = 0.2;
            ModelParams strong = cfg.model;
            strong.g = 10.0;
            LossCurve cw = sweep_loss(weak, grid, cfg.estimator);
            LossCurve cs = sweep_loss(strong, grid, cfg.estimator);
            curve.normalization = cw.normalization;
            curve.points = cw.points;
            curve.points.insert(curve.points.end(), cs.points.begin(), cs.points.end());
        } else {
            curve = sweep_loss(cfg.model, grid, cfg.estimator);
        }
    } else {
        throw ConfigError("engine: sweep supports master|analytic");
    }

    int failed = 0;
    for (const auto& p : curve.points)
        if (p.flag == PointFlag::Failed) ++failed;
    checks.push_back({"failed_points", static_cast<double>(failed), failed == 0});
    checks.push_back({"normalization", curve.normalization, curve.normalization > 0.0});
    emit(cfg, csv_loss_curve(curve), curve_json(curve), checks, out);
    return 0;
}

int run_regime(const RunConfig& cfg, std::ostream& out) {
    const RegimeReport rep = classify_regime(cfg.model);
    ordered_json j;
    j["coupling"] = jcloss::to_string(rep.coupling);
    j["saturation"] = jcloss::to_string(rep.saturation);
    j["R0"] = rep.R0;
    j["n_crit"] = rep.n_crit;
    if (cfg.format == "json" || !cfg.out.empty()) {
        const std::string text = j.dump(2) + "\n";
        if (cfg.out.empty())
            out << text;
        else
            write_file(cfg.out, text);
    }
    if (cfg.out.empty() && cfg.format != "json")
        out << jcloss::to_string(rep.coupling) << ", " << jcloss::to_string(rep.saturation)
            << " (R0 = " << fmt(rep.R0) << ", n_crit = " << fmt(rep.n_crit) << ")\n";
    return 0;
}

int run_params(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.physical) throw ConfigError("params mode requires physical parameters");
    const double f0p = field_per_photon(*cfg.physical);
    const double g = compute_coupling(*cfg.physical);
    ordered_json j;
    j["field_per_photon"] = f0p;
    j["g"] = g;
    const std::string text = j.dump(2) + "\n";
    if (cfg.out.empty())
        out << "g = " << fmt(g) << "\nfield_per_photon = " << fmt(f0p) << "\n";
    else
        write_file(cfg.out, text);
    return 0;
}

int run_ns_min(const RunConfig& cfg, std::ostream& out) {
    std::vector<double> ratios(cfg.ns_ratio_points);
    for (int i = 0; i < cfg.ns_ratio_points; ++i)
        ratios[i] = cfg.ns_ratio_points == 1
                        ? cfg.ns_ratio_min
                        : cfg.ns_ratio_min *
                              std::pow(cfg.ns_ratio_max / cfg.ns_ratio_min,
                                       static_cast<double>(i) / (cfg.ns_ratio_points - 1));
    const NsMinResult res = find_ns_min(cfg.model.T1, ratios, cfg.estimator, cfg.g_T1);
    std::ostringstream csv;
    csv << "t1_over_t2,knee,knee_formula\n";
    for (std::size_t i = 0; i < res.ratios.size(); ++i)
        csv << fmt(res.ratios[i]) << ',' << fmt(res.knees[i]) << ','
            << fmt(res.formula_knees[i]) << '\n';
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < res.ratios.size(); ++i) {
        ordered_json row;
        row["t1_over_t2"] = res.ratios[i];
        row["knee"] = res.knees[i];
        row["knee_formula"] = res.formula_knees[i];
        rows.push_back(row);
    }
    std::vector<InvariantCheck> checks;
    checks.push_back({"ns_min", res.ns_min, res.ns_min >= 0.45});
    emit(cfg, csv.str(), rows, checks, out);
    return 0;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const TruncationError*>(&e)) return 3;
    if (dynamic_cast<const EstimatorError*>(&e)) return 5;
    if (dynamic_cast<const IntegratorError*>(&e)) return 4;
    if (dynamic_cast<const Error*>(&e)) return 4;
    return 1;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.mode) {
            case Mode::Evolve: return run_evolve(cfg, out);
            case Mode::Sweep: return run_sweep(cfg, out);
            case Mode::Regime: return run_regime(cfg, out);
            case Mode::Params: return run_params(cfg, out);
            case Mode::NsMin: return run_ns_min(cfg, out);
        }
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace jcloss::cli
