#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jcloss/lindblad.hpp"
#include "jcloss/regimes.hpp"

using namespace jcloss;

namespace {

Matrix random_density(HilbertDims dims, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    const int d = dims.total_dim;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Cplx(dist(rng), dist(rng));
    Matrix rho = m * m.adjoint();
    rho /= rho.trace();
    return rho;
}

ModelParams weak_fig_params(double n0) {
    ModelParams p;
    p.g = 0.2;
    p.T1 = 1.0;
    p.Tphi = ModelParams::tphi_from_T2(1.0, 0.2);
    p.n0 = n0;
    return p;
}

}  // namespace

TEST_CASE("model parameters: T2 relation") {
    ModelParams p;
    p.T1 = 1.0;
    p.Tphi = 2.0 / 9.0;
    CHECK(p.T2() == doctest::Approx(0.2).epsilon(1e-12));
    p.Tphi.reset();
    CHECK(p.T2() == doctest::Approx(2.0));

    CHECK(!ModelParams::tphi_from_T2(1.0, 2.0).has_value());
    CHECK(*ModelParams::tphi_from_T2(1.0, 0.2) == doctest::Approx(2.0 / 9.0));
    CHECK_THROWS_AS(ModelParams::tphi_from_T2(1.0, 3.0), ConfigError);

    ModelParams bad;
    bad.T1 = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("lindblad_rhs: fixed points and structure") {
    ModelParams p = weak_fig_params(0.0);
    p.dims = HilbertDims::with_cutoff(3);
    const auto ops = build_operators(*p.dims);

    SUBCASE("joint ground state is stationary") {
        const Matrix rhs = lindblad_rhs(basis_state(*p.dims, 0, 0).rho, p, ops);
        CHECK(rhs.cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("bare TLS decay at g = 0") {
        ModelParams p0 = p;
        p0.g = 0.0;
        const Matrix rhs = lindblad_rhs(basis_state(*p.dims, 0, 1).rho, p0, ops);
        const double dspp = expectation(rhs, ops.sigma_pp).real();
        CHECK(dspp == doctest::Approx(-1.0 / p0.T1));
    }
    SUBCASE("trace preservation and hermiticity on random states") {
        for (unsigned seed : {1u, 2u, 3u}) {
            const Matrix rho = random_density(*p.dims, seed);
            const Matrix rhs = lindblad_rhs(rho, p, ops);
            CHECK(std::abs(rhs.trace()) < 1e-12);
            CHECK((rhs - rhs.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("dimension mismatch") {
        const Matrix rho = Matrix::Identity(4, 4);
        CHECK_THROWS_AS(lindblad_rhs(rho, p, ops), DimensionMismatch);
    }
}

TEST_CASE("liouvillian matrix: vectorization of the rhs") {
    ModelParams p;
    p.g = 0.7;
    p.T1 = 0.8;
    p.Tphi = 1.7;
    p.dims = HilbertDims::with_cutoff(2);
    const auto ops = build_operators(*p.dims);
    const Matrix L = liouvillian_matrix(p, ops);
    const int d = p.dims->total_dim;
    CHECK(L.rows() == d * d);

    SUBCASE("action matches lindblad_rhs on random states") {
        // Two independent constructions: a fused index-space rhs and a
        // Kronecker-built superoperator.
        for (unsigned seed : {11u, 12u}) {
            const Matrix rho = random_density(*p.dims, seed);
            const Matrix rhs = lindblad_rhs(rho, p, ops);
            const Vector v = L * Eigen::Map<const Vector>(rho.data(), d * d);
            const Matrix back = Eigen::Map<const Matrix>(v.data(), d, d);
            CHECK((back - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("ground state in the kernel, 16x16 at N = 1") {
        ModelParams p1 = p;
        p1.dims = HilbertDims::with_cutoff(1);
        const auto ops1 = build_operators(*p1.dims);
        const Matrix L1 = liouvillian_matrix(p1, ops1);
        CHECK(L1.rows() == 16);
        const Matrix ground = basis_state(*p1.dims, 0, 0).rho;
        const Vector v = L1 * Eigen::Map<const Vector>(ground.data(), 16);
        CHECK(v.cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("trace functional in the left kernel") {
        for (unsigned seed : {21u, 22u}) {
            const Matrix rho = random_density(*p.dims, seed);
            const Vector v = L * Eigen::Map<const Vector>(rho.data(), d * d);
            const Matrix back = Eigen::Map<const Matrix>(v.data(), d, d);
            CHECK(std::abs(back.trace()) < 1e-12);
        }
    }
    SUBCASE("g = 0, no dephasing: known decay rates in the spectrum") {
        ModelParams p0;
        p0.g = 0.0;
        p0.T1 = 1.3;
        p0.dims = HilbertDims::with_cutoff(1);
        const Matrix L0 = liouvillian_matrix(p0, build_operators(*p0.dims));
        Eigen::ComplexEigenSolver<Matrix> es(L0);
        // population decay 1/T1 and coherence decay 1/(2 T1)
        for (double want : {-1.0 / p0.T1, -1.0 / (2.0 * p0.T1)}) {
            double best = 1e9;
            for (int i = 0; i < es.eigenvalues().size(); ++i)
                best = std::min(best, std::abs(es.eigenvalues()(i) - Cplx(want, 0.0)));
            CHECK(best < 1e-9);
        }
    }
    SUBCASE("oracle cap") {
        ModelParams big;
        big.dims = HilbertDims::with_cutoff(40);
        CHECK_THROWS_AS(liouvillian_matrix(big, build_operators(*big.dims)),
                        OracleCapExceeded);
    }
}

TEST_CASE("evolve_master: decoupled and closed-form checks") {
    SUBCASE("g = 0 leaves the resonator lossless") {
        ModelParams p = weak_fig_params(3.0);
        p.g = 0.0;
        IntegratorConfig cfg;
        cfg.t_end = 8.0;
        cfg.sample_count = 41;
        const auto recs = evolve_master(p, cfg);
        for (const auto& r : recs) {
            CHECK(std::abs(r.n - 3.0) < 1e-7);
            CHECK(std::abs(*r.trace - 1.0) < 1e-9);
        }
    }
    SUBCASE("strong coupling, no dephasing: vacuum-Rabi decay envelope") {
        ModelParams p;
        p.g = 10.0;
        p.T1 = 1.0;
        p.n0 = 0.005;
        IntegratorConfig cfg;
        cfg.t_end = 4.0;
        cfg.sample_count = 2001;
        const auto recs = evolve_master(p, cfg);
        double num = 0.0, den = 0.0;
        for (const auto& r : recs) {
            const double closed =
                p.n0 * std::exp(-r.t / (2.0 * p.T1)) * std::pow(std::cos(p.g * r.t), 2);
            num += std::pow(r.n - closed, 2);
            den += std::pow(closed, 2);
        }
        CHECK(std::sqrt(num / den) < 0.05);
    }
    SUBCASE("weak coupling: fitted rate near Gamma") {
        ModelParams p = weak_fig_params(3.0);
        IntegratorConfig cfg;
        cfg.t_end = 150.0;
        cfg.sample_count = 1501;
        const auto recs = evolve_master(p, cfg);
        // crude log-slope between 20% and 60% of the decay
        double t1 = 0, n1 = 0, t2 = 0, n2 = 0;
        for (const auto& r : recs) {
            if (r.n >= 0.8 * 3.0) { t1 = r.t; n1 = r.n; }
            if (r.n >= 0.4 * 3.0) { t2 = r.t; n2 = r.n; }
        }
        const double rate = std::log(n1 / n2) / (t2 - t1);
        const double gamma = gamma_effective(p.g, p.T1, p.T2());
        CHECK(std::abs(rate - gamma) / gamma < 0.15);
    }
}

TEST_CASE("evolve_master: conservation structure") {
    ModelParams p = weak_fig_params(1.0);
    IntegratorConfig cfg;
    cfg.t_end = 6.0;
    cfg.sample_count = 3001;  // resolves the Rabi transient from t = 0
    const auto recs = evolve_master(p, cfg);

    SUBCASE("trace and record invariants") {
        for (const auto& r : recs) {
            CHECK(std::abs(*r.trace - 1.0) < 1e-9);
            CHECK(r.sigma_pp > -1e-9);
            CHECK(r.sigma_pp < 1.0 + 1e-6);
            CHECK(r.n > -1e-8);
        }
    }
    SUBCASE("energy-flow identity, full window") {
        CHECK(energy_flow_residual(recs, p.T1, 0.0) < 1e-3);
    }
    SUBCASE("monotone energy") {
        for (std::size_t i = 1; i < recs.size(); ++i)
            CHECK((recs[i].n + recs[i].sigma_pp) -
                      (recs[i - 1].n + recs[i - 1].sigma_pp) <
                  1e-9);
    }
    SUBCASE("pure dephasing does not change the energy flow") {
        ModelParams p2 = p;
        p2.Tphi.reset();  // only the dephasing channel differs
        const auto recs2 = evolve_master(p2, cfg);
        CHECK(energy_flow_residual(recs2, p2.T1, 0.0) < 1e-3);
    }
}

TEST_CASE("evolve_master: hermiticity via state observer") {
    ModelParams p = weak_fig_params(0.5);
    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    cfg.sample_count = 101;
    double herm = 0.0;
    const auto init = coherent_tls_ground(std::sqrt(p.n0), p.hilbert());
    evolve_master(p, cfg, init, [&](int, double, const Matrix& rho) {
        herm = std::max(herm, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    });
    CHECK(herm < 1e-9);
}

TEST_CASE("evolve_master: truncation guard during evolution") {
    // Excited TLS at N = 1 with strong coupling pushes population into the
    // top Fock level immediately.
    ModelParams p;
    p.g = 5.0;
    p.T1 = 1.0;
    p.n0 = 0.0;
    p.dims = HilbertDims::with_cutoff(1);
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.sample_count = 51;
    const auto init = basis_state(*p.dims, 0, 1);
    CHECK_THROWS_AS(evolve_master(p, cfg, init), TruncationError);
}

TEST_CASE("oracle: matrix-exponential evolution") {
    SUBCASE("equivalence with the integrator") {
        // The named parameter point needs N = 12 to satisfy the coherent-tail
        // bound (the Poisson(1) tail above N = 8 is 1.1e-7).
        ModelParams p;
        p.g = 0.5;
        p.T1 = 1.0;
        p.Tphi = 2.0;
        p.n0 = 1.0;
        p.dims = HilbertDims::with_cutoff(12);
        IntegratorConfig cfg;
        cfg.t_end = 10.0;
        cfg.sample_count = 51;
        const auto mrec = evolve_master(p, cfg);
        std::vector<double> grid;
        for (const auto& r : mrec) grid.push_back(r.t);
        const auto orec = evolve_oracle(p, grid);
        for (std::size_t i = 0; i < mrec.size(); ++i) {
            CHECK(std::abs(mrec[i].n - orec[i].n) < 1e-6);
            CHECK(std::abs(mrec[i].sigma_pp - orec[i].sigma_pp) < 1e-6);
        }
    }
    SUBCASE("t = 0 reproduces the initial expectations exactly") {
        ModelParams p;
        p.g = 0.3;
        p.n0 = 0.2;
        p.dims = HilbertDims::with_cutoff(8);
        const auto recs = evolve_oracle(p, {0.0});
        CHECK(recs.size() == 1);
        CHECK(recs[0].n == doctest::Approx(0.2).epsilon(1e-9));
        CHECK(recs[0].sigma_pp == 0.0);
        CHECK(*recs[0].purity == doctest::Approx(1.0));
    }
    SUBCASE("bare TLS decay from a manually excited state") {
        ModelParams p;
        p.g = 0.0;
        p.T1 = 0.7;
        p.n0 = 0.0;
        p.dims = HilbertDims::with_cutoff(1);
        std::vector<double> grid = {0.0, 0.3, 0.9, 2.0};
        const auto recs = evolve_oracle(p, grid, basis_state(*p.dims, 0, 1));
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(recs[i].sigma_pp == doctest::Approx(std::exp(-grid[i] / p.T1)).epsilon(1e-9));
    }
    SUBCASE("cap enforcement") {
        ModelParams big;
        big.n0 = 100.0;
        CHECK_THROWS_AS(evolve_oracle(big, {0.0, 1.0}), OracleCapExceeded);
    }
}

TEST_CASE("integrator config validation") {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = IntegratorConfig{};
    cfg.sample_count = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = IntegratorConfig{};
    cfg.t_end = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("fixed-step RK4 agrees with the adaptive integrator") {
    ModelParams p = weak_fig_params(0.5);
    IntegratorConfig a;
    a.t_end = 5.0;
    a.sample_count = 101;
    IntegratorConfig b = a;
    b.method = IntegratorConfig::Method::FixedRK4;
    b.fixed_dt = 0.005;
    const auto ra = evolve_master(p, a);
    const auto rb = evolve_master(p, b);
    for (std::size_t i = 0; i < ra.size(); ++i)
        CHECK(std::abs(ra[i].n - rb[i].n) < 1e-6);
}
