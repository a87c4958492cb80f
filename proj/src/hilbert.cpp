#include "jcloss/hilbert.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace jcloss {

HilbertDims HilbertDims::with_cutoff(int N) {
    if (N < 1) throw DimensionMismatch("fock_cutoff must be >= 1");
    return HilbertDims{N, 2 * (N + 1)};
}

HilbertDims HilbertDims::for_initial_photons(double n0) {
    if (n0 < 0.0) throw DimensionMismatch("n0 must be >= 0");
    const int N = static_cast<int>(std::ceil(n0 + 10.0 * std::sqrt(n0 + 1.0) + 10.0));
    return with_cutoff(N);
}

OperatorSet build_operators(HilbertDims dims) {
    const int N = dims.fock_cutoff;
    const int d = dims.total_dim;
    using T = Eigen::Triplet<Cplx>;

    std::vector<T> ta, tsm, tsz, tspp, tnum;
    for (int n = 1; n <= N; ++n) {
        const double amp = std::sqrt(static_cast<double>(n));
        for (int s = 0; s < 2; ++s)
            ta.emplace_back(dims.index(n - 1, s), dims.index(n, s), amp);
    }
    for (int n = 0; n <= N; ++n) {
        tsm.emplace_back(dims.index(n, 0), dims.index(n, 1), 1.0);
        tsz.emplace_back(dims.index(n, 0), dims.index(n, 0), -1.0);
        tsz.emplace_back(dims.index(n, 1), dims.index(n, 1), 1.0);
        tspp.emplace_back(dims.index(n, 1), dims.index(n, 1), 1.0);
        if (n > 0) {
            tnum.emplace_back(dims.index(n, 0), dims.index(n, 0), static_cast<double>(n));
            tnum.emplace_back(dims.index(n, 1), dims.index(n, 1), static_cast<double>(n));
        }
    }

    OperatorSet ops;
    ops.dims = dims;
    ops.a.resize(d, d);
    ops.a.setFromTriplets(ta.begin(), ta.end());
    ops.a_dag = ops.a.adjoint();
    ops.sigma_minus.resize(d, d);
    ops.sigma_minus.setFromTriplets(tsm.begin(), tsm.end());
    ops.sigma_plus = ops.sigma_minus.adjoint();
    ops.sigma_z.resize(d, d);
    ops.sigma_z.setFromTriplets(tsz.begin(), tsz.end());
    ops.sigma_pp.resize(d, d);
    ops.sigma_pp.setFromTriplets(tspp.begin(), tspp.end());
    ops.number_op.resize(d, d);
    ops.number_op.setFromTriplets(tnum.begin(), tnum.end());
    return ops;
}

double DensityMatrix::hermiticity_residual() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

DensityMatrix coherent_tls_ground(Cplx alpha, HilbertDims dims) {
    const int N = dims.fock_cutoff;
    const double nbar = std::norm(alpha);

    // Poisson weights in log space; robust up to n0 of a few hundred where
    // e^{-n0} underflows in direct evaluation.
    std::vector<double> w(N + 1);
    double kept = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double logw = (nbar > 0.0)
            ? -nbar + k * std::log(nbar) - std::lgamma(k + 1.0)
            : (k == 0 ? 0.0 : -std::numeric_limits<double>::infinity());
        w[k] = std::exp(logw);
        kept += w[k];
    }
    const double tail = std::max(0.0, 1.0 - kept);
    if (tail > 1e-8)
        throw TruncationError("coherent-state tail weight " + std::to_string(tail) +
                              " exceeds 1e-8 at fock_cutoff " + std::to_string(N));

    const double phase = std::arg(alpha);
    Vector psi = Vector::Zero(dims.total_dim);
    for (int k = 0; k <= N; ++k)
        psi(dims.index(k, 0)) = std::sqrt(w[k] / kept) * std::polar(1.0, phase * k);

    DensityMatrix dm{dims, Matrix(psi * psi.adjoint())};
    return dm;
}

DensityMatrix basis_state(HilbertDims dims, int fock, int tls) {
    if (fock < 0 || fock > dims.fock_cutoff || tls < 0 || tls > 1)
        throw DimensionMismatch("basis_state index out of range");
    Matrix rho = Matrix::Zero(dims.total_dim, dims.total_dim);
    rho(dims.index(fock, tls), dims.index(fock, tls)) = 1.0;
    return DensityMatrix{dims, std::move(rho)};
}

Cplx expectation(const Matrix& rho, const SpMatrix& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols() || rho.rows() != rho.cols())
        throw DimensionMismatch("expectation: operator/state dimensions differ");
    // tr(rho * op) = sum over non-zeros op(j, i) * rho(i, j)
    Cplx acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SpMatrix::InnerIterator it(op, k); it; ++it)
            acc += it.value() * rho(it.col(), it.row());
    return acc;
}

Cplx expectation(const Matrix& rho, const Matrix& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols() || rho.rows() != rho.cols())
        throw DimensionMismatch("expectation: operator/state dimensions differ");
    return (rho * op).trace();
}

}  // namespace jcloss
