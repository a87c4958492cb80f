#pragma once

#include <vector>

#include "jcloss/lindblad.hpp"

namespace jcloss {

// State of the decorrelated Maxwell-Bloch equations. Together with the
// conjugate of sigma_minus these close into four real degrees of freedom.
struct BlochState {
    Cplx a_expect{};     // <a>
    Cplx sigma_minus{};  // <sigma_->
    double sigma_pp = 0.0;
};

//   d<a>/dt    = -i g <sigma_->
//   d<s_->/dt  = 2 i g <a><sigma_pp> - i g <a> - <sigma_->/T2
//   d<spp>/dt  = -i g (<a><sigma_+> - <a>*<sigma_->) - <sigma_pp>/T1
BlochState bloch_rhs(const BlochState& s, const ModelParams& params);

// Integrates the decorrelated system from <a> = sqrt(n0), <sigma_-> = 0,
// <sigma_pp> = 0. Records report n = |<a>|^2, the decorrelated proxy for the
// photon number; corr/trace/purity are absent.
std::vector<ObservableRecord> evolve_bloch(const ModelParams& params,
                                           const IntegratorConfig& cfg);

// State of the strong-coupling restricted manifold {|0,->, |1,->, |0,+>}.
struct ManifoldState {
    double n = 0.0;
    double sigma_pp = 0.0;
    Cplx corr{};  // <a_dag sigma_->
};

//   d<n>/dt    =  2 g Im<a_dag sigma_->
//   d<spp>/dt  = -2 g Im<a_dag sigma_-> - <sigma_pp>/T1
//   d<corr>/dt =  i g (<sigma_pp> - <n>) - <corr>/T2
// The sign of the Im<a_dag sigma_-> terms is fixed by the master equation
// (and reproduces the no-dephasing closed forms); the energy identity
// d(n + sigma_pp)/dt = -sigma_pp/T1 holds for either sign and does not pin it.
ManifoldState manifold_rhs(const ManifoldState& s, const ModelParams& params);

// Solves the manifold system exactly via eigendecomposition of the 4x4 real
// generator, from (n, sigma_pp, corr) = (n0, 0, 0). Intended for n0 << 1;
// the regime is not enforced. Falls back to dense integration when the
// eigenproblem is too ill-conditioned. n below -1e-9 * max(1, n0) raises a
// diagnostic instead of being clamped.
std::vector<ObservableRecord> evolve_manifold(const ModelParams& params,
                                              const std::vector<double>& t_grid);

}  // namespace jcloss
