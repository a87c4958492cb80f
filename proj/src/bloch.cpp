#include "jcloss/bloch.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace jcloss {

BlochState bloch_rhs(const BlochState& s, const ModelParams& params) {
    const Cplx ig(0.0, params.g);
    BlochState d;
    d.a_expect = -ig * s.sigma_minus;
    d.sigma_minus = 2.0 * ig * s.a_expect * s.sigma_pp - ig * s.a_expect -
                    s.sigma_minus / params.T2();
    // -i g (<a><s_+> - <a>*<s_->) = 2 g Im(<a> conj(<s_->))
    d.sigma_pp = 2.0 * params.g * std::imag(s.a_expect * std::conj(s.sigma_minus)) -
                 s.sigma_pp / params.T1;
    return d;
}

std::vector<ObservableRecord> evolve_bloch(const ModelParams& params,
                                           const IntegratorConfig& cfg) {
    params.validate();
    using State = Eigen::Vector3cd;  // (a, sigma_-, sigma_pp), last entry real
    State y;
    y << std::sqrt(params.n0), 0.0, 0.0;

    std::vector<ObservableRecord> records;
    records.reserve(cfg.sample_count);

    integrate_sampled(
        cfg, y,
        [&params](double, const State& v, State& dv) {
            const BlochState s{v(0), v(1), v(2).real()};
            const BlochState d = bloch_rhs(s, params);
            dv << d.a_expect, d.sigma_minus, Cplx(d.sigma_pp, 0.0);
        },
        [&](int, double t, const State& v) {
            ObservableRecord rec;
            rec.t = t;
            rec.n = std::norm(v(0));
            rec.sigma_pp = v(2).real();
            rec.sigma_minus = v(1);
            rec.a_expect = v(0);
            if (rec.sigma_pp < -1e-9 || rec.sigma_pp > 1.0 + 1e-9)
                throw IntegratorError("bloch sigma_pp left [0, 1] at t = " + std::to_string(t));
            records.push_back(rec);
        },
        [](State&) { return false; });
    return records;
}

ManifoldState manifold_rhs(const ManifoldState& s, const ModelParams& params) {
    const double flow = 2.0 * params.g * std::imag(s.corr);
    ManifoldState d;
    d.n = flow;
    d.sigma_pp = -flow - s.sigma_pp / params.T1;
    d.corr = Cplx(0.0, params.g) * (s.sigma_pp - s.n) - s.corr / params.T2();
    return d;
}

namespace {

// Real 4-vector ordering: (n, sigma_pp, Re corr, Im corr).
Eigen::Matrix4d manifold_generator(const ModelParams& params) {
    const double g = params.g, T1 = params.T1, T2 = params.T2();
    Eigen::Matrix4d M;
    M << 0.0, 0.0, 0.0, 2.0 * g,
         0.0, -1.0 / T1, 0.0, -2.0 * g,
         0.0, 0.0, -1.0 / T2, 0.0,
         -g, g, 0.0, -1.0 / T2;
    return M;
}

ObservableRecord manifold_record(double t, const Eigen::Vector4d& x, double n0) {
    ObservableRecord rec;
    rec.t = t;
    rec.n = x(0);
    rec.sigma_pp = x(1);
    rec.corr = Cplx(x(2), x(3));
    const double floor = -1e-9 * std::max(1.0, n0);
    if (rec.n < floor || rec.sigma_pp < floor)
        throw Error("manifold state left the physical region at t = " + std::to_string(t) +
                    " (n0 likely too large for the three-state manifold)");
    return rec;
}

}  // namespace

std::vector<ObservableRecord> evolve_manifold(const ModelParams& params,
                                              const std::vector<double>& t_grid) {
    params.validate();
    const Eigen::Matrix4d M = manifold_generator(params);
    const Eigen::Vector4d x0(params.n0, 0.0, 0.0, 0.0);

    Eigen::EigenSolver<Eigen::Matrix4d> es(M);
    bool degenerate = es.info() != Eigen::Success;
    Eigen::Vector4cd coeffs;
    if (!degenerate) {
        const Eigen::Matrix4cd V = es.eigenvectors();
        Eigen::FullPivLU<Eigen::Matrix4cd> lu(V);
        if (lu.rcond() < 1e-10) {
            degenerate = true;
        } else {
            coeffs = lu.solve(x0.cast<Cplx>());
        }
    }

    std::vector<ObservableRecord> records;
    records.reserve(t_grid.size());

    if (!degenerate) {
        const Eigen::Vector4cd lam = es.eigenvalues();
        const Eigen::Matrix4cd V = es.eigenvectors();
        for (double t : t_grid) {
            Eigen::Vector4cd xt = Eigen::Vector4cd::Zero();
            for (int k = 0; k < 4; ++k)
                xt += coeffs(k) * std::exp(lam(k) * t) * V.col(k);
            records.push_back(manifold_record(t, xt.real(), params.n0));
        }
        return records;
    }

    // DegenerateEigenproblem fallback: dense adaptive integration over the
    // same grid (the system is 4-dimensional, cost is negligible).
    if (t_grid.empty()) return records;
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] < t_grid[i - 1])
            throw IntegratorError("evolve_manifold: t_grid must be non-decreasing");

    Eigen::Vector4d y = x0;
    double t_prev = 0.0;
    for (double t : t_grid) {
        const double dt = t - t_prev;
        if (dt > 1e-14 * std::max(1.0, t)) {
            IntegratorConfig seg;
            seg.rel_tol = 1e-10;
            seg.abs_tol = 1e-14 * std::max(1.0, params.n0);
            seg.t_end = dt;
            seg.sample_count = 2;
            integrate_sampled(
                seg, y,
                [&](double, const Eigen::Vector4d& v, Eigen::Vector4d& dv) {
                    dv = M * v;
                },
                [](int, double, const Eigen::Vector4d&) {},
                [](Eigen::Vector4d&) { return false; });
            t_prev = t;
        }
        records.push_back(manifold_record(t, y, params.n0));
    }
    return records;
}

}  // namespace jcloss
