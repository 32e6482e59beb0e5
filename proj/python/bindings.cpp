// Python bindings: a thin layer over the C++ core.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcft/acceptance.hpp"
#include "lcft/errors.hpp"
#include "lcft/field.hpp"
#include "lcft/flow.hpp"
#include "lcft/kernels.hpp"
#include "lcft/model.hpp"
#include "lcft/partitions.hpp"
#include "lcft/scatter.hpp"
#include "lcft/verma.hpp"

namespace py = pybind11;
using namespace lcft;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

VectorField field_of(const std::vector<cplx>& v) { return VectorField(v); }

}  // namespace

PYBIND11_MODULE(lcft, m) {
  m.doc() = "Virasoro algebra, holomorphic flows, free-field Monte Carlo and reflection coefficients";

  static py::exception<ComputationError> comp_err(m, "ComputationError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ComputationError& e) {
      PyErr_SetString(comp_err.ptr(), (e.kind() + ": " + e.what()).c_str());
    } catch (const PreconditionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("background_charge", &background_charge, py::arg("gamma"));
  m.def("central_charge", &central_charge, py::arg("gamma"));
  m.def("conformal_weight", &conformal_weight, py::arg("alpha"), py::arg("Q"));

  m.def(
      "partitions",
      [](int n) {
        std::vector<std::vector<int>> out;
        for (const auto& y : enumerate(n)) out.push_back(y.parts());
        return out;
      },
      py::arg("n"), "Partitions of n in the canonical basis order.");

  m.def("shapovalov", [](int level) { return to_py(shapovalov_json(level)); }, py::arg("level"),
        "Exact Shapovalov matrix as polynomials in (Delta, c).");
  m.def(
      "shapovalov_numeric",
      [](int level, cplx delta, cplx c) { return evaluate(shapovalov(level), delta, c); }, py::arg("level"),
      py::arg("delta"), py::arg("c"));
  m.def("scaled_det", &scaled_det, py::arg("level"), py::arg("delta"), py::arg("c"));
  m.def("adjoint_residual", &adjoint_residual, py::arg("n"), py::arg("level"), py::arg("P"), py::arg("gamma"));

  m.def(
      "flow",
      [](const std::vector<cplx>& v, double t, cplx z) {
        const auto p = integrate(field_of(v), t, z);
        return py::make_tuple(p.f, p.df);
      },
      py::arg("v"), py::arg("t"), py::arg("z"), "Returns (f_t(z), f_t'(z)); v = [v_0, v_1, ...].");
  m.def("markov_check", [](const std::vector<cplx>& v) { return markov_check(field_of(v)); }, py::arg("v"));

  m.def("hpq", [](const std::vector<cplx>& v, int p, int q) { return hpq(field_of(v), p, q); }, py::arg("v"),
        py::arg("p"), py::arg("q"));
  m.def(
      "mode_covariance",
      [](const std::vector<cplx>& v, double s, double t, int N) { return mode_covariance(field_of(v), s, t, N).C; },
      py::arg("v"), py::arg("s"), py::arg("t"), py::arg("N"), "E[X_n(s) conj X_m(t)] for n, m = -N..N.");

  m.def(
      "gmc_mean_mass",
      [](double gamma, double alpha, long n_samples, std::uint64_t seed, int n_phi) {
        const auto r = gmc_mean_mass(gamma, alpha, n_samples, n_phi, RngStreams(seed));
        return py::dict(py::arg("mean") = r.estimate.mean, py::arg("se") = r.estimate.se, py::arg("n_r") = r.n_r,
                        py::arg("exact") = r.exact);
      },
      py::arg("gamma"), py::arg("alpha"), py::arg("n_samples"), py::arg("seed") = 7,
      py::arg("n_phi") = 32);

  m.def("reflection", &reflection, py::arg("alpha"), py::arg("gamma"), py::arg("mu"));
  m.def("functional_equation_residual", &functional_equation_residual, py::arg("alpha"), py::arg("gamma"),
        py::arg("mu"));
  m.def("gamma", &gamma_complex, py::arg("z"));

  m.def(
      "run_acceptance",
      [](const std::vector<int>& ids, std::uint64_t seed, int workers) {
        AcceptanceOptions opt;
        opt.seed = seed;
        opt.workers = workers;
        return to_py(acceptance_report(run_acceptance(opt, ids), opt));
      },
      py::arg("ids") = std::vector<int>{}, py::arg("seed") = 7, py::arg("workers") = 1);
}
