#include "jcloss/lindblad.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace jcloss {

void ModelParams::validate() const {
    if (g < 0.0) throw ConfigError("g must be >= 0");
    if (!(T1 > 0.0)) throw ConfigError("T1 must be > 0");
    if (!(omega > 0.0)) throw ConfigError("omega must be > 0");
    if (n0 < 0.0) throw ConfigError("n0 must be >= 0");
    if (Tphi && !(*Tphi > 0.0)) throw ConfigError("Tphi must be > 0");
}

std::optional<double> ModelParams::tphi_from_T2(double T1, double T2) {
    if (!(T2 > 0.0)) throw ConfigError("T2 must be > 0");
    const double inv_tphi = 1.0 / T2 - 1.0 / (2.0 * T1);
    if (inv_tphi < -1e-9 / T1)
        throw ConfigError("T2 exceeds the 2*T1 bound set by 1/T2 = 1/(2T1) + 1/Tphi");
    if (inv_tphi <= 1e-12 / T1) return std::nullopt;  // no pure dephasing
    return 1.0 / inv_tphi;
}

namespace {

// Engine workspace. The coupling Hamiltonian is tridiagonal in the global
// index (a_dag sigma_- and a sigma_+ hop between |n,1> and |n+1,0>), the
// dissipators reduce to a parity-keyed diagonal rate plus one shifted block
// copy, so a full RHS evaluation is a single fused O(dim^2) pass.
struct MasterEngine {
    ModelParams params;
    OperatorSet ops;
    std::vector<double> hop;  // hop[i] = <i|H|i+1>/g, nonzero for odd i
    double rate[4];           // dissipative rate by (i parity, j parity)
    double inv_T1;
    Matrix resym;             // scratch for hermitian re-symmetrization
    int top_gg, top_ee;       // diagonal indices of the top Fock level

    explicit MasterEngine(const ModelParams& p) : params(p), ops(build_operators(p.hilbert())) {
        const HilbertDims dims = ops.dims;
        const int d = dims.total_dim;
        hop.assign(d, 0.0);
        for (int i = 1; i + 1 < d; i += 2) hop[i] = std::sqrt((i + 1) / 2);

        const double inv_2t1 = 1.0 / (2.0 * params.T1);
        const double inv_tphi = params.Tphi ? 1.0 / *params.Tphi : 0.0;
        rate[0] = 0.0;                       // |g><g| sector
        rate[1] = -inv_tphi - inv_2t1;       // coherence, decays at 1/T2
        rate[2] = rate[1];
        rate[3] = -2.0 * inv_2t1;            // |e><e| sector
        inv_T1 = 1.0 / params.T1;
        resym.resize(d, d);
        top_gg = dims.index(dims.fock_cutoff, 0);
        top_ee = dims.index(dims.fock_cutoff, 1);
    }

    void rhs(const Matrix& rho, Matrix& drho) const {
        const int d = ops.dims.total_dim;
        const Cplx mig(0.0, -params.g);
        for (int j = 0; j < d; ++j) {
            const Cplx* rj = rho.col(j).data();
            const Cplx* rjm = j > 0 ? rho.col(j - 1).data() : nullptr;
            const Cplx* rjp = j + 1 < d ? rho.col(j + 1).data() : nullptr;
            Cplx* out = drho.col(j).data();
            const bool jodd = j & 1;
            const double hop_j = jodd ? hop[j] : (j > 0 ? hop[j - 1] : 0.0);
            const double* rate_j = rate + 2 * (j & 1);
            for (int i = 0; i < d; ++i) {
                Cplx acc = rate_j[i & 1] * rj[i];
                if (i & 1) {
                    if (i + 1 < d) acc += mig * (hop[i] * rj[i + 1]);
                } else {
                    if (i > 0) acc += mig * (hop[i - 1] * rj[i - 1]);
                    // sigma_- rho sigma_+ feeds |n,-><m,-| from |n,+><m,+|
                    if (!jodd && i + 1 < d && rjp != nullptr)
                        acc += inv_T1 * rjp[i + 1];
                }
                if (jodd) {
                    if (rjp != nullptr) acc -= mig * (hop_j * rjp[i]);
                } else if (rjm != nullptr) {
                    acc -= mig * (hop_j * rjm[i]);
                }
                out[i] = acc;
            }
        }
    }

    ObservableRecord record(double t, const Matrix& rho) const {
        ObservableRecord rec;
        rec.t = t;
        rec.n = expectation(rho, ops.number_op).real();
        rec.sigma_pp = expectation(rho, ops.sigma_pp).real();
        rec.sigma_minus = expectation(rho, ops.sigma_minus);
        rec.a_expect = expectation(rho, ops.a);
        rec.corr = expectation(rho, SpMatrix(ops.a_dag * ops.sigma_minus));
        rec.trace = rho.trace().real();
        rec.purity = rho.squaredNorm();
        return rec;
    }

    void check_record(const ObservableRecord& rec, const Matrix& rho) const {
        if (rec.sigma_pp < -1e-8 || rec.sigma_pp > 1.0 + 1e-6)
            throw IntegratorError("sigma_pp left [0, 1] at t = " + std::to_string(rec.t));
        if (rec.n < -1e-8)
            throw IntegratorError("<n> went negative at t = " + std::to_string(rec.t));
        if (std::abs(*rec.trace - 1.0) > 1e-6)
            throw IntegratorError("trace drifted from 1 at t = " + std::to_string(rec.t));
        const double tail = rho(top_gg, top_gg).real() + rho(top_ee, top_ee).real();
        if (tail > 1e-6)
            throw TruncationError("top Fock level population " + std::to_string(tail) +
                                  " exceeds 1e-6 at t = " + std::to_string(rec.t) +
                                  "; raise fock_cutoff");
    }
};

}  // namespace

Matrix lindblad_rhs(const Matrix& rho, const ModelParams& params, const OperatorSet& ops) {
    if (rho.rows() != ops.dims.total_dim || rho.cols() != ops.dims.total_dim)
        throw DimensionMismatch("lindblad_rhs: rho does not match operator dimensions");
    ModelParams p = params;
    p.dims = ops.dims;
    MasterEngine eng(p);
    Matrix drho(rho.rows(), rho.cols());
    eng.rhs(rho, drho);
    return drho;
}

std::vector<ObservableRecord> evolve_master(const ModelParams& params,
                                            const IntegratorConfig& cfg) {
    const DensityMatrix initial =
        coherent_tls_ground(std::sqrt(params.n0), params.hilbert());
    return evolve_master(params, cfg, initial);
}

std::vector<ObservableRecord> evolve_master(const ModelParams& params,
                                            const IntegratorConfig& cfg,
                                            const DensityMatrix& initial) {
    return evolve_master(params, cfg, initial, StateObserver{});
}

std::vector<ObservableRecord> evolve_master(const ModelParams& params,
                                            const IntegratorConfig& cfg,
                                            const DensityMatrix& initial,
                                            const StateObserver& observer) {
    params.validate();
    MasterEngine eng(params);
    if (initial.dims.total_dim != eng.ops.dims.total_dim)
        throw DimensionMismatch("evolve_master: initial state dimension mismatch");

    Matrix rho = initial.rho;
    std::vector<ObservableRecord> records;
    records.reserve(cfg.sample_count);

    integrate_sampled(
        cfg, rho,
        [&eng](double, const Matrix& y, Matrix& dydt) { eng.rhs(y, dydt); },
        [&](int k, double t, const Matrix& y) {
            ObservableRecord rec = eng.record(t, y);
            eng.check_record(rec, y);
            records.push_back(rec);
            if (observer) observer(k, t, y);
        },
        [&eng](Matrix& y) {
            eng.resym = y.adjoint();
            y += eng.resym;
            y *= 0.5;
            return true;
        });
    return records;
}

Matrix liouvillian_matrix(const ModelParams& params, const OperatorSet& ops) {
    const int d = ops.dims.total_dim;
    if (d > kOracleDimCap)
        throw OracleCapExceeded("liouvillian_matrix: total_dim " + std::to_string(d) +
                                " exceeds oracle cap " + std::to_string(kOracleDimCap));

    const Matrix I = Matrix::Identity(d, d);
    auto kron = [d](const Matrix& A, const Matrix& B) {
        Matrix K(d * d, d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                K.block(i * d, j * d, d, d) = A(i, j) * B;
        return K;
    };

    // Column-stacked convention: vec(A rho B) = (B^T kron A) vec(rho).
    const Matrix H = params.g * (Matrix(ops.a_dag * ops.sigma_minus) +
                                 Matrix(ops.a * ops.sigma_plus));
    Matrix L = Cplx(0, -1) * (kron(I, H) - kron(H.transpose(), I));
    if (params.Tphi) {
        const Matrix sz = Matrix(ops.sigma_z);
        L += (1.0 / (2.0 * *params.Tphi)) *
             (kron(sz.transpose(), sz) - Matrix::Identity(d * d, d * d));
    }
    const Matrix sm = Matrix(ops.sigma_minus);
    const Matrix spsm = Matrix(ops.sigma_pp);  // sigma_+ sigma_- = |+><+|
    L += (1.0 / (2.0 * params.T1)) *
         (2.0 * kron(sm.conjugate(), sm) - kron(I, spsm) - kron(spsm.transpose(), I));
    return L;
}

std::vector<ObservableRecord> evolve_oracle(const ModelParams& params,
                                            const std::vector<double>& t_grid) {
    const DensityMatrix initial =
        coherent_tls_ground(std::sqrt(params.n0), params.hilbert());
    return evolve_oracle(params, t_grid, initial);
}

std::vector<ObservableRecord> evolve_oracle(const ModelParams& params,
                                            const std::vector<double>& t_grid,
                                            const DensityMatrix& initial) {
    params.validate();
    MasterEngine eng(params);
    const int d = eng.ops.dims.total_dim;
    if (initial.dims.total_dim != d)
        throw DimensionMismatch("evolve_oracle: initial state dimension mismatch");
    const Matrix L = liouvillian_matrix(params, eng.ops);

    Vector v = Eigen::Map<const Vector>(initial.rho.data(), d * d);
    std::vector<ObservableRecord> records;
    records.reserve(t_grid.size());

    double t_prev = 0.0;
    Matrix propagator;      // expm(L * dt), cached while dt repeats
    double cached_dt = -1.0;
    for (double t : t_grid) {
        const double dt = t - t_prev;
        if (dt < 0.0) throw IntegratorError("evolve_oracle: t_grid must be non-decreasing");
        if (dt > 0.0) {
            if (std::abs(dt - cached_dt) > 1e-15 * std::max(1.0, dt)) {
                propagator = Matrix(L * dt).exp();
                cached_dt = dt;
            }
            v = propagator * v;
            t_prev = t;
        }
        const Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
        records.push_back(eng.record(t, rho));
    }
    return records;
}

double energy_flow_residual(const std::vector<ObservableRecord>& records,
                            double T1, double skip_time) {
    if (records.size() < 3)
        throw WindowTooShort("energy_flow_residual needs at least 3 samples");
    double scale = 0.0;
    for (const auto& r : records) scale = std::max(scale, std::abs(r.sigma_pp) / T1);
    if (scale == 0.0) return 0.0;

    double worst = 0.0;
    bool any = false;
    for (std::size_t k = 1; k + 1 < records.size(); ++k) {
        if (records[k].t < skip_time) continue;
        const double dt = records[k + 1].t - records[k - 1].t;
        const double lhs = ((records[k + 1].n + records[k + 1].sigma_pp) -
                            (records[k - 1].n + records[k - 1].sigma_pp)) / dt;
        const double rhs = -records[k].sigma_pp / T1;
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
        any = true;
    }
    if (!any) throw WindowTooShort("energy_flow_residual: no samples past skip_time");
    return worst;
}

}  // namespace jcloss
