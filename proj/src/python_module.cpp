#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bergkern/cli.hpp"
#include "bergkern/closed_kernels.hpp"
#include "bergkern/errors.hpp"
#include "bergkern/moments.hpp"
#include "bergkern/sampling.hpp"
#include "bergkern/series_kernel.hpp"
#include "bergkern/verify.hpp"

namespace py = pybind11;
using namespace bergkern;

namespace {

ComplexPoint to_point(const std::vector<complex>& v) { return ComplexPoint(v); }

py::dict kernel_dict(const KernelValue& k) {
  py::dict d;
  d["value"] = k.value;
  d["truncation_estimate"] = k.truncation_estimate;
  d["degree_used"] = k.degree_used;
  d["converged"] = k.converged;
  return d;
}

// Reports cross the boundary as JSON text; the package decodes them.
std::string reports_json(const std::vector<VerificationReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  return arr.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted Bergman kernels on Reinhardt domains";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<CnParams>(m, "CnParams")
      .def(py::init([](int n, double mu1, double mu2) { return CnParams{n, mu1, mu2}; }), py::arg("n") = 1,
           py::arg("mu1") = 1.0, py::arg("mu2") = 2.0)
      .def_readwrite("n", &CnParams::n)
      .def_readwrite("mu1", &CnParams::mu1)
      .def_readwrite("mu2", &CnParams::mu2);

  py::class_<DnmParams>(m, "DnmParams")
      .def(py::init([](int n, int m_, double mu1, double mu2, double eta) { return DnmParams{n, m_, mu1, mu2, eta}; }),
           py::arg("n") = 1, py::arg("m") = 1, py::arg("mu1") = 1.0, py::arg("mu2") = 2.0, py::arg("eta") = 0.0)
      .def_readwrite("n", &DnmParams::n)
      .def_readwrite("m", &DnmParams::m)
      .def_readwrite("mu1", &DnmParams::mu1)
      .def_readwrite("mu2", &DnmParams::mu2)
      .def_readwrite("eta", &DnmParams::eta);

  py::class_<VEtaParams>(m, "VEtaParams")
      .def(py::init([](int n, int m_, std::vector<double> eta, double a) { return VEtaParams{n, m_, std::move(eta), a}; }),
           py::arg("n") = 1, py::arg("m") = 1, py::arg("eta") = std::vector<double>{1.0}, py::arg("a") = 0.0)
      .def_readwrite("n", &VEtaParams::n)
      .def_readwrite("m", &VEtaParams::m)
      .def_readwrite("eta", &VEtaParams::eta)
      .def_readwrite("a", &VEtaParams::a);

  m.def("arity", [](const FamilyParams& p) { return family_arity(p); }, py::arg("params"));

  m.def(
      "closed_kernel",
      [](const FamilyParams& p, const std::vector<complex>& x, const std::vector<complex>& y) {
        return kernel_dict(FamilyKernel(p)(to_point(x), to_point(y)));
      },
      py::arg("params"), py::arg("x"), py::arg("y"), "Closed-form kernel K(x, y).");

  m.def(
      "series_kernel",
      [](const FamilyParams& p, const std::vector<complex>& x, const std::vector<complex>& y, int max_degree,
         double rel_tol, bool quadrature_moments) {
        auto table = std::make_shared<MomentTable>(family_weight(p), family_shadow(p), kDefaultClosedCheckTol,
                                                   quadrature_moments ? MomentTable::Preference::QuadratureOnly
                                                                      : MomentTable::Preference::ClosedFormFirst);
        const KernelSeries series(table, max_degree);
        py::gil_scoped_release release;
        const KernelValue v = kernel_series_eval(series, to_point(x), to_point(y), rel_tol);
        py::gil_scoped_acquire acquire;
        return kernel_dict(v);
      },
      py::arg("params"), py::arg("x"), py::arg("y"), py::arg("max_degree") = kDefaultMaxDegree,
      py::arg("rel_tol") = kDefaultSeriesTol, py::arg("quadrature_moments") = false,
      "Moment series sum_alpha x^alpha conj(y)^alpha / I(alpha).");

  m.def(
      "moment_closed",
      [](const FamilyParams& p, const std::vector<int>& alpha) {
        const auto v = closed_form_log_moment(family_weight(p), family_shadow(p), MultiIndex(alpha));
        if (!v) throw ArgumentError("no closed form for this domain");
        return std::exp(*v);
      },
      py::arg("params"), py::arg("alpha"));

  m.def(
      "moment_quadrature",
      [](const FamilyParams& p, const std::vector<int>& alpha, double rel_tol) {
        const auto q = moment_quadrature(family_shadow(p), family_weight(p), MultiIndex(alpha), rel_tol);
        return py::make_tuple(std::exp(q.log_value), q.abs_error_estimate);
      },
      py::arg("params"), py::arg("alpha"), py::arg("rel_tol") = 1e-10,
      "Returns (value, absolute error estimate).");

  m.def(
      "interior_points",
      [](const FamilyParams& p, std::size_t count, std::uint64_t seed, double min_slack) {
        std::vector<std::vector<complex>> out;
        for (const auto& z : sample_interior_points(p, count, seed, min_slack)) out.emplace_back(z.coords().begin(), z.coords().end());
        return out;
      },
      py::arg("params"), py::arg("count"), py::arg("seed"), py::arg("min_slack") = 0.3);

  m.def(
      "cross_validate_json",
      [](const FamilyParams& p, int num_points, std::uint64_t seed, double rel_tol) {
        return reports_json(cross_validate_family(p, num_points, seed, rel_tol));
      },
      py::arg("params"), py::arg("num_points"), py::arg("seed"), py::arg("rel_tol"));

  m.def(
      "sphere_integral_json",
      [](const std::vector<int>& alpha, std::size_t samples, std::uint64_t seed) {
        return reports_json({check_sphere_integral(MultiIndex(alpha), samples, seed)});
      },
      py::arg("alpha"), py::arg("samples"), py::arg("seed"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "bergkern");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line front end in process; returns (exit_code, stdout, stderr).");
}
