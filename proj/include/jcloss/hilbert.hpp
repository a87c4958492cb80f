#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "jcloss/errors.hpp"

namespace jcloss {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SpMatrix = Eigen::SparseMatrix<Cplx>;

// Truncated joint space of one resonator mode and one TLS.
//
// Basis ordering is fixed throughout the library: Fock-major, TLS-minor,
// with the TLS ground state |-> at minor index 0. A joint basis state
// |n, s> lives at index(n, s) = 2*n + s, n = 0..fock_cutoff, s in {0, 1}.
struct HilbertDims {
    int fock_cutoff;  // max Fock index N (N+1 photon states kept)
    int total_dim;    // 2*(N+1)

    static HilbertDims with_cutoff(int N);

    // Default truncation for a run starting from a coherent state with
    // <n(0)> = n0: N = ceil(n0 + 10*sqrt(n0 + 1) + 10). Keeps the discarded
    // coherent tail below 1e-8 for every parameter set used in the figures.
    static HilbertDims for_initial_photons(double n0);

    int index(int fock, int tls) const { return 2 * fock + tls; }
};

// Joint-space operators. Stored sparse: every operator here has O(dim)
// non-zeros and the master-equation engine applies them at O(dim^2).
struct OperatorSet {
    HilbertDims dims;
    SpMatrix a;
    SpMatrix a_dag;
    SpMatrix sigma_minus;
    SpMatrix sigma_plus;
    SpMatrix sigma_z;
    SpMatrix sigma_pp;   // |+><+| = (1 + sigma_z)/2
    SpMatrix number_op;  // a_dag * a
};

OperatorSet build_operators(HilbertDims dims);

struct DensityMatrix {
    HilbertDims dims;
    Matrix rho;

    double trace_real() const { return rho.trace().real(); }
    // tr(rho^2); equals the squared Frobenius norm for Hermitian rho.
    double purity() const { return rho.squaredNorm(); }
    double hermiticity_residual() const;
    // O(dim^3); intended for diagnostics, not per-step checks.
    double min_eigenvalue() const;
};

// |alpha> (x) |-><-| (x) <alpha|, truncated and renormalized.
// Throws TruncationError when the discarded Poisson tail weight
// sum_{k>N} e^{-|alpha|^2} |alpha|^{2k} / k! exceeds 1e-8.
DensityMatrix coherent_tls_ground(Cplx alpha, HilbertDims dims);

// Pure state |n, s><n, s|.
DensityMatrix basis_state(HilbertDims dims, int fock, int tls);

// tr(rho * op). Throws DimensionMismatch.
Cplx expectation(const Matrix& rho, const SpMatrix& op);
Cplx expectation(const Matrix& rho, const Matrix& op);

}  // namespace jcloss
