#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "jcloss/hilbert.hpp"
#include "jcloss/integrate.hpp"

namespace jcloss {

// Dimensionless model parameters, hbar = 1. Time is measured in units of T1's
// units; g, 1/T1, 1/T2 and omega all carry inverse-time units. omega enters
// only through the loss normalization 1/Q = rate/omega.
struct ModelParams {
    double g = 0.2;       // resonator-TLS coupling rate
    double T1 = 1.0;      // TLS relaxation time
    double omega = 1.0;   // resonator angular frequency
    double n0 = 0.0;      // initial mean photon number (coherent state)
    // Pure dephasing time; disengaged (infinite) when empty. Never encode
    // "no dephasing" as a huge finite value.
    std::optional<double> Tphi{};
    std::optional<HilbertDims> dims{};  // defaulted from n0 when empty

    // 1/T2 = 1/(2 T1) + 1/Tphi
    double T2() const {
        double inv = 1.0 / (2.0 * T1);
        if (Tphi) inv += 1.0 / *Tphi;
        return 1.0 / inv;
    }
    HilbertDims hilbert() const {
        return dims ? *dims : HilbertDims::for_initial_photons(n0);
    }
    void validate() const;

    // Builds params with T2 specified instead of Tphi (Tphi back-solved);
    // throws ConfigError when T2 > 2*T1.
    static std::optional<double> tphi_from_T2(double T1, double T2);
};

struct ObservableRecord {
    double t = 0.0;
    double n = 0.0;         // <a_dag a>
    double sigma_pp = 0.0;  // <|+><+|>
    std::optional<Cplx> sigma_minus{};
    std::optional<Cplx> a_expect{};
    std::optional<Cplx> corr{};  // <a_dag sigma_minus>
    std::optional<double> trace{};
    std::optional<double> purity{};
};

// Right-hand side of the master equation,
//   drho/dt = -i g [a_dag sigma_- + a sigma_+, rho]
//             + (1/2Tphi)(sigma_z rho sigma_z - rho)
//             + (1/2T1)(2 sigma_- rho sigma_+ - sigma_+ sigma_- rho - rho sigma_+ sigma_-).
Matrix lindblad_rhs(const Matrix& rho, const ModelParams& params, const OperatorSet& ops);

// Integrates the master equation from the coherent (x) TLS-ground initial
// state (or an explicit one) and samples observables on the uniform grid.
// Throws TruncationError when the top Fock level holds more than 1e-6
// population at any sample.
std::vector<ObservableRecord> evolve_master(const ModelParams& params,
                                            const IntegratorConfig& cfg);
std::vector<ObservableRecord> evolve_master(const ModelParams& params,
                                            const IntegratorConfig& cfg,
                                            const DensityMatrix& initial);

// As above, with a hook receiving the density matrix at every sample time
// (used by diagnostics that need the full state, e.g. positivity checks).
using StateObserver = std::function<void(int sample, double t, const Matrix& rho)>;
std::vector<ObservableRecord> evolve_master(const ModelParams& params,
                                            const IntegratorConfig& cfg,
                                            const DensityMatrix& initial,
                                            const StateObserver& observer);

// Dense Liouvillian L with column-stacked vectorization: for any rho,
// vec(lindblad_rhs(rho)) = L * vec(rho). Oracle-sized systems only.
inline constexpr int kOracleDimCap = 64;
Matrix liouvillian_matrix(const ModelParams& params, const OperatorSet& ops);

// Independent evolution oracle: rho(t) = unvec(expm(L t) vec(rho0)), stepped
// over an arbitrary time grid via matrix exponentials of the grid gaps.
std::vector<ObservableRecord> evolve_oracle(const ModelParams& params,
                                            const std::vector<double>& t_grid);
std::vector<ObservableRecord> evolve_oracle(const ModelParams& params,
                                            const std::vector<double>& t_grid,
                                            const DensityMatrix& initial);

// Residual of the energy-flow identity d/dt(<n> + <sigma_pp>) = -<sigma_pp>/T1,
// evaluated with centered finite differences on records with t >= skip_time
// and normalized by the peak |sigma_pp|/T1 of the run. The early Rabi
// transient needs a grid fine enough to resolve it; callers either sample
// that finely or skip past it.
double energy_flow_residual(const std::vector<ObservableRecord>& records,
                            double T1, double skip_time = 0.0);

}  // namespace jcloss
