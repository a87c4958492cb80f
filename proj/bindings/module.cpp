#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jcloss/bloch.hpp"
#include "jcloss/lindblad.hpp"
#include "jcloss/regimes.hpp"
#include "jcloss/sweep.hpp"

namespace py = pybind11;
using namespace jcloss;

namespace {

ModelParams make_params(double g, double T1, py::object Tphi, double omega, double n0,
                        py::object fock_cutoff) {
    ModelParams p;
    p.g = g;
    p.T1 = T1;
    p.omega = omega;
    p.n0 = n0;
    if (!Tphi.is_none()) p.Tphi = Tphi.cast<double>();
    if (!fock_cutoff.is_none())
        p.dims = HilbertDims::with_cutoff(fock_cutoff.cast<int>());
    p.validate();
    return p;
}

py::dict records_to_dict(const std::vector<ObservableRecord>& recs) {
    const py::ssize_t m = static_cast<py::ssize_t>(recs.size());
    py::array_t<double> t(m), n(m), spp(m), trace(m), purity(m);
    py::array_t<std::complex<double>> sm(m), a(m), corr(m);
    auto wt = t.mutable_unchecked<1>();
    auto wn = n.mutable_unchecked<1>();
    auto ws = spp.mutable_unchecked<1>();
    auto wtr = trace.mutable_unchecked<1>();
    auto wp = purity.mutable_unchecked<1>();
    auto wsm = sm.mutable_unchecked<1>();
    auto wa = a.mutable_unchecked<1>();
    auto wc = corr.mutable_unchecked<1>();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (py::ssize_t i = 0; i < m; ++i) {
        const auto& r = recs[i];
        wt(i) = r.t;
        wn(i) = r.n;
        ws(i) = r.sigma_pp;
        wtr(i) = r.trace ? *r.trace : nan;
        wp(i) = r.purity ? *r.purity : nan;
        wsm(i) = r.sigma_minus ? *r.sigma_minus : Cplx(nan, nan);
        wa(i) = r.a_expect ? *r.a_expect : Cplx(nan, nan);
        wc(i) = r.corr ? *r.corr : Cplx(nan, nan);
    }
    py::dict d;
    d["t"] = t;
    d["n"] = n;
    d["sigma_pp"] = spp;
    d["sigma_minus"] = sm;
    d["a"] = a;
    d["corr"] = corr;
    d["trace"] = trace;
    d["purity"] = purity;
    return d;
}

py::dict regime_to_dict(const RegimeReport& rep) {
    py::dict d;
    d["coupling"] = std::string(to_string(rep.coupling));
    d["saturation"] = std::string(to_string(rep.saturation));
    d["R0"] = rep.R0;
    d["n_crit"] = rep.n_crit;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Jaynes-Cummings simulation of resonator loss through a resonant TLS";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<TruncationError>(m, "TruncationError");
    py::register_exception<IntegratorError>(m, "IntegratorError");
    py::register_exception<EstimatorError>(m, "EstimatorError");
    py::register_exception<OracleCapExceeded>(m, "OracleCapExceeded");

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), py::arg("g"), py::arg("T1") = 1.0,
             py::arg("Tphi") = py::none(), py::arg("omega") = 1.0, py::arg("n0") = 0.0,
             py::arg("fock_cutoff") = py::none())
        .def_readonly("g", &ModelParams::g)
        .def_readonly("T1", &ModelParams::T1)
        .def_readonly("omega", &ModelParams::omega)
        .def_readonly("n0", &ModelParams::n0)
        .def_property_readonly("T2", &ModelParams::T2)
        .def_property_readonly("fock_cutoff",
                               [](const ModelParams& p) { return p.hilbert().fock_cutoff; });

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init([](double t_end, int samples, double rel_tol, double abs_tol,
                         const std::string& method, double fixed_dt) {
                 IntegratorConfig c;
                 c.t_end = t_end;
                 c.sample_count = samples;
                 c.rel_tol = rel_tol;
                 c.abs_tol = abs_tol;
                 c.fixed_dt = fixed_dt;
                 if (method == "adaptive")
                     c.method = IntegratorConfig::Method::AdaptiveRK;
                 else if (method == "rk4")
                     c.method = IntegratorConfig::Method::FixedRK4;
                 else
                     throw ConfigError("method: expected adaptive|rk4");
                 c.validate();
                 return c;
             }),
             py::arg("t_end"), py::arg("samples") = 201, py::arg("rel_tol") = 1e-8,
             py::arg("abs_tol") = 1e-10, py::arg("method") = "adaptive",
             py::arg("fixed_dt") = 1e-3);

    m.def("evolve_master",
          [](const ModelParams& p, const IntegratorConfig& c) {
              return records_to_dict(evolve_master(p, c));
          },
          py::arg("params"), py::arg("config"),
          "Integrate the Lindblad master equation from the coherent/ground state.");
    m.def("evolve_bloch",
          [](const ModelParams& p, const IntegratorConfig& c) {
              return records_to_dict(evolve_bloch(p, c));
          },
          py::arg("params"), py::arg("config"),
          "Integrate the decorrelated Maxwell-Bloch equations.");
    m.def("evolve_manifold",
          [](const ModelParams& p, const std::vector<double>& t_grid) {
              return records_to_dict(evolve_manifold(p, t_grid));
          },
          py::arg("params"), py::arg("t_grid"),
          "Exact solution of the restricted-manifold linear system.");
    m.def("evolve_oracle",
          [](const ModelParams& p, const std::vector<double>& t_grid) {
              return records_to_dict(evolve_oracle(p, t_grid));
          },
          py::arg("params"), py::arg("t_grid"),
          "Matrix-exponential propagation of the vectorized Liouvillian (small dims).");
    m.def("liouvillian",
          [](const ModelParams& p) {
              return liouvillian_matrix(p, build_operators(p.hilbert()));
          },
          py::arg("params"));

    m.def("gamma_effective", &gamma_effective, py::arg("g"), py::arg("T1"), py::arg("T2"));
    m.def("loss_classical", &loss_classical, py::arg("R0"), py::arg("g"), py::arg("T2"),
          py::arg("omega") = 1.0);
    m.def("loss_weak_unsaturated", &loss_weak_unsaturated, py::arg("g"), py::arg("T1"),
          py::arg("T2"), py::arg("omega") = 1.0);
    m.def("loss_saturated", &loss_saturated, py::arg("n0"), py::arg("T1"),
          py::arg("omega") = 1.0);
    m.def("loss_strong_unsaturated", &loss_strong_unsaturated, py::arg("T1"), py::arg("T2"),
          py::arg("omega") = 1.0);
    m.def("knee_weak",
          [](double g, double T1, double T2) {
              const KneeWeak k = knee_weak(g, T1, T2);
              return py::make_tuple(k.exact, k.very_weak);
          },
          py::arg("g"), py::arg("T1"), py::arg("T2"));
    m.def("knee_strong", &knee_strong, py::arg("T1"), py::arg("T2"));
    m.def("dimensionless_field", &dimensionless_field, py::arg("g"), py::arg("n0"),
          py::arg("T1"), py::arg("T2"));
    m.def("quasistatic_tls",
          [](double R, double T1, double T2) {
              const QuasistaticTls q = quasistatic_tls(R, T1, T2);
              return py::make_tuple(q.sigma_pp, q.coherence_sq);
          },
          py::arg("R"), py::arg("T1"), py::arg("T2"));
    m.def("classify_regime",
          [](const ModelParams& p) { return regime_to_dict(classify_regime(p)); },
          py::arg("params"));

    m.def("field_per_photon",
          [](double p, double theta, double Delta, double Delta0, double epsilon, double V,
             double hbar) {
              PhysicalParams ph{p, theta, Delta, Delta0, epsilon, V, 0.0, hbar};
              ph.omega = ph.E() / hbar;
              return field_per_photon(ph);
          },
          py::arg("p"), py::arg("theta"), py::arg("Delta"), py::arg("Delta0"),
          py::arg("epsilon"), py::arg("V"), py::arg("hbar") = 1.0);
    m.def("compute_coupling",
          [](double p, double theta, double Delta, double Delta0, double epsilon, double V,
             double hbar) {
              PhysicalParams ph{p, theta, Delta, Delta0, epsilon, V, 0.0, hbar};
              ph.omega = ph.E() / hbar;
              return compute_coupling(ph);
          },
          py::arg("p"), py::arg("theta"), py::arg("Delta"), py::arg("Delta0"),
          py::arg("epsilon"), py::arg("V"), py::arg("hbar") = 1.0);

    m.def("sweep_loss",
          [](const ModelParams& tmpl, const std::vector<double>& grid) {
              const LossCurve curve = sweep_loss(tmpl, grid, LossEstimatorConfig{});
              py::list rows;
              for (const auto& p : curve.points) {
                  py::dict d;
                  d["n0"] = p.n0;
                  d["R0"] = p.R0;
                  d["q_inv"] = p.q_inv;
                  d["q_inv_normalized"] = p.q_inv_normalized;
                  d["coupling"] = std::string(to_string(p.regime.coupling));
                  d["saturation"] = std::string(to_string(p.regime.saturation));
                  d["flag"] = std::string(to_string(p.flag));
                  rows.append(d);
              }
              py::dict out;
              out["points"] = rows;
              out["normalization"] = curve.normalization;
              return out;
          },
          py::arg("params"), py::arg("n0_grid"),
          "One master-equation loss estimate per grid point.");
    m.def("find_ns_min",
          [](double T1, const std::vector<double>& ratios, double g_T1) {
              const NsMinResult r = find_ns_min(T1, ratios, LossEstimatorConfig{}, g_T1);
              py::dict d;
              d["ns_min"] = r.ns_min;
              d["ratios"] = r.ratios;
              d["knees"] = r.knees;
              d["knees_formula"] = r.formula_knees;
              return d;
          },
          py::arg("T1"), py::arg("ratios"), py::arg("g_T1") = 50.0);

    m.def("operators",
          [](int fock_cutoff) {
              const OperatorSet ops = build_operators(HilbertDims::with_cutoff(fock_cutoff));
              py::dict d;
              d["a"] = Matrix(ops.a);
              d["a_dag"] = Matrix(ops.a_dag);
              d["sigma_minus"] = Matrix(ops.sigma_minus);
              d["sigma_plus"] = Matrix(ops.sigma_plus);
              d["sigma_z"] = Matrix(ops.sigma_z);
              d["sigma_pp"] = Matrix(ops.sigma_pp);
              d["number_op"] = Matrix(ops.number_op);
              return d;
          },
          py::arg("fock_cutoff"),
          "Dense joint-space operators (Fock-major, TLS-minor ordering).");
    m.def("coherent_tls_ground",
          [](std::complex<double> alpha, int fock_cutoff) {
              return coherent_tls_ground(alpha, HilbertDims::with_cutoff(fock_cutoff)).rho;
          },
          py::arg("alpha"), py::arg("fock_cutoff"));
}
