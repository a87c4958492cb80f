#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jcloss/hilbert.hpp"

using namespace jcloss;

TEST_CASE("dims: construction and validation") {
    const auto d = HilbertDims::with_cutoff(5);
    CHECK(d.total_dim == 12);
    CHECK(d.index(0, 0) == 0);
    CHECK(d.index(0, 1) == 1);
    CHECK(d.index(3, 0) == 6);
    CHECK_THROWS_AS(HilbertDims::with_cutoff(0), DimensionMismatch);

    const auto auto_dims = HilbertDims::for_initial_photons(3.0);
    CHECK(auto_dims.fock_cutoff == 33);  // ceil(3 + 10 sqrt(4) + 10)
    CHECK(HilbertDims::for_initial_photons(0.0).fock_cutoff == 20);
}

TEST_CASE("operators: matrix elements in the documented ordering") {
    const auto dims = HilbertDims::with_cutoff(1);
    const auto ops = build_operators(dims);
    CHECK(ops.a.rows() == 4);
    // single Fock-lowering amplitude sqrt(1) = 1 on each TLS branch
    CHECK(Matrix(ops.a)(dims.index(0, 0), dims.index(1, 0)).real() == doctest::Approx(1.0));
    CHECK(Matrix(ops.a)(dims.index(0, 1), dims.index(1, 1)).real() == doctest::Approx(1.0));
    CHECK(Matrix(ops.a).cwiseAbs().sum() == doctest::Approx(2.0));

    for (int N : {1, 2, 7}) {
        const auto o = build_operators(HilbertDims::with_cutoff(N));
        CHECK(std::abs(Matrix(o.sigma_z).trace()) < 1e-14);
    }

    const auto o2 = build_operators(HilbertDims::with_cutoff(2));
    const Matrix num = Matrix(o2.number_op);
    const std::vector<double> want = {0, 0, 1, 1, 2, 2};
    for (int i = 0; i < 6; ++i) CHECK(num(i, i).real() == doctest::Approx(want[i]));
}

TEST_CASE("operators: algebraic identities") {
    const auto dims = HilbertDims::with_cutoff(6);
    const auto ops = build_operators(dims);

    // [a, a_dag] = 1 away from the truncation boundary
    const Matrix comm = Matrix(ops.a * ops.a_dag) - Matrix(ops.a_dag * ops.a);
    for (int n = 0; n < dims.fock_cutoff; ++n)
        for (int s = 0; s < 2; ++s) {
            const int i = dims.index(n, s);
            CHECK(std::abs(comm(i, i) - 1.0) < 1e-14);
        }

    // sigma_pp = (1 + sigma_z)/2 and sigma_+ sigma_- = sigma_pp, exactly
    const Matrix spp = Matrix(ops.sigma_pp);
    const Matrix from_z = 0.5 * (Matrix::Identity(dims.total_dim, dims.total_dim) +
                                 Matrix(ops.sigma_z));
    CHECK((spp - from_z).cwiseAbs().maxCoeff() == 0.0);
    const Matrix from_pm = Matrix(ops.sigma_plus * ops.sigma_minus);
    CHECK((spp - from_pm).cwiseAbs().maxCoeff() == 0.0);

    CHECK((Matrix(ops.sigma_plus) - Matrix(ops.sigma_minus).adjoint()).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((Matrix(ops.number_op) - Matrix(ops.a_dag * ops.a)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("coherent state preparation") {
    SUBCASE("vacuum") {
        const auto dm = coherent_tls_ground(0.0, HilbertDims::with_cutoff(4));
        CHECK(dm.rho(0, 0).real() == doctest::Approx(1.0));
        const auto ops = build_operators(dm.dims);
        CHECK(std::abs(expectation(dm.rho, ops.number_op)) < 1e-15);
    }
    SUBCASE("n0 = 3 at the fig-1 truncation") {
        const auto dims = HilbertDims::with_cutoff(30);
        const auto dm = coherent_tls_ground(std::sqrt(3.0), dims);
        const auto ops = build_operators(dims);
        const double n = expectation(dm.rho, ops.number_op).real();
        CHECK(std::abs(n - 3.0) / 3.0 < 1e-6);
        CHECK(std::abs(expectation(dm.rho, ops.sigma_pp)) < 1e-15);
    }
    SUBCASE("n0 = 0.005 at N = 4") {
        const auto dims = HilbertDims::with_cutoff(4);
        const auto dm = coherent_tls_ground(std::sqrt(0.005), dims);
        const auto ops = build_operators(dims);
        CHECK(std::abs(expectation(dm.rho, ops.number_op).real() - 0.005) < 1e-8);
    }
    SUBCASE("truncation guard") {
        // Poisson(1) tail above N = 8 is 1.1e-7 > 1e-8
        CHECK_THROWS_AS(coherent_tls_ground(1.0, HilbertDims::with_cutoff(8)),
                        TruncationError);
    }
    SUBCASE("state invariants") {
        const auto dm = coherent_tls_ground(std::sqrt(2.0), HilbertDims::with_cutoff(16));
        CHECK(dm.hermiticity_residual() < 1e-12);
        CHECK(std::abs(dm.trace_real() - 1.0) < 1e-9);
        CHECK(dm.min_eigenvalue() > -1e-9);
        CHECK(dm.purity() == doctest::Approx(1.0));  // pure state
    }
    SUBCASE("complex amplitude phase") {
        const Cplx alpha = std::polar(std::sqrt(0.5), 1.1);
        const auto dims = HilbertDims::with_cutoff(12);
        const auto dm = coherent_tls_ground(alpha, dims);
        const auto ops = build_operators(dims);
        const Cplx a = expectation(dm.rho, ops.a);
        CHECK(std::abs(a - alpha) < 1e-7);
    }
}

TEST_CASE("expectation values") {
    const auto dims = HilbertDims::with_cutoff(3);
    const auto ops = build_operators(dims);

    CHECK(std::abs(expectation(basis_state(dims, 0, 0).rho, ops.number_op)) < 1e-15);
    CHECK(expectation(basis_state(dims, 1, 0).rho, ops.number_op).real() ==
          doctest::Approx(1.0));

    SUBCASE("dimension mismatch") {
        const auto small = build_operators(HilbertDims::with_cutoff(1));
        CHECK_THROWS_AS(expectation(basis_state(dims, 0, 0).rho, small.number_op),
                        DimensionMismatch);
    }

    SUBCASE("linearity and conjugate symmetry") {
        std::mt19937 rng(7);
        std::normal_distribution<double> dist;
        const int d = dims.total_dim;
        Matrix m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = Cplx(dist(rng), dist(rng));
        Matrix rho = m * m.adjoint();
        rho /= rho.trace();

        const Matrix opA = Matrix(ops.a) + Matrix(ops.sigma_plus);
        const Matrix opB = Matrix(ops.number_op);
        const Cplx lhs = expectation(rho, Matrix(2.0 * opA + Cplx(0, 1) * opB));
        const Cplx rhs = 2.0 * expectation(rho, opA) + Cplx(0, 1) * expectation(rho, opB);
        CHECK(std::abs(lhs - rhs) < 1e-12);

        const Cplx fwd = expectation(rho, opA);
        const Cplx adj = expectation(rho, Matrix(opA.adjoint()));
        CHECK(std::abs(adj - std::conj(fwd)) < 1e-12);

        // hermitian operator -> real expectation
        CHECK(std::abs(expectation(rho, opB).imag()) < 1e-10);
    }
}
