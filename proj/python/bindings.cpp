#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "quasispec/cocycle.hpp"
#include "quasispec/errors.hpp"
#include "quasispec/intervals.hpp"
#include "quasispec/lab.hpp"
#include "quasispec/rotation_cf.hpp"
#include "quasispec/sampling.hpp"
#include "quasispec/spectrum.hpp"
#include "quasispec/subadditive.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace quasispec;

namespace {

json to_json(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

IntervalSet interval_set(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Interval> raw;
  for (const auto& [lo, hi] : pairs) raw.push_back({lo, hi});
  return IntervalSet::normalize(std::move(raw));
}

std::vector<std::pair<double, double>> pairs_of(const IntervalSet& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& iv : s.intervals()) out.emplace_back(iv.lo, iv.hi);
  return out;
}

ThetaGrid grid_of(const std::string& mode, std::int64_t count) {
  return {theta_sampling_from_string(mode), count, 0.0};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectra and Lyapunov exponents of quasiperiodic Schrodinger operators";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Approximant>(m, "Approximant")
      .def(py::init([](std::int64_t p, std::int64_t q, int index) {
             return Approximant{p, q, index};
           }),
           py::arg("p"), py::arg("q"), py::arg("index") = 0)
      .def_readonly("p", &Approximant::p)
      .def_readonly("q", &Approximant::q)
      .def_readonly("index", &Approximant::index)
      .def("value", &Approximant::value)
      .def("__repr__", [](const Approximant& a) {
        return "Approximant(" + std::to_string(a.p) + "/" + std::to_string(a.q) + ")";
      });

  py::class_<ContinuedFraction>(m, "ContinuedFraction")
      .def_static("expand", &ContinuedFraction::expand, py::arg("x"),
                  py::arg("max_terms") = ContinuedFraction::kDefaultMaxTerms,
                  py::arg("tol") = ContinuedFraction::kDefaultTolerance)
      .def_static("from_quotients", &ContinuedFraction::from_quotients, py::arg("quotients"),
                  py::arg("terminates") = false)
      .def_static("golden_mean", &ContinuedFraction::golden_mean, py::arg("terms") = 40)
      .def_property_readonly("value", &ContinuedFraction::value)
      .def_property_readonly("quotients", &ContinuedFraction::quotients)
      .def_property_readonly("is_rational", &ContinuedFraction::is_rational)
      .def("reconstruct", &ContinuedFraction::reconstruct)
      .def("approximants", [](const ContinuedFraction& cf) { return approximants(cf); });

  py::class_<SamplingFunction>(m, "SamplingFunction")
      .def_static("cosine", &SamplingFunction::cosine, py::arg("lam"))
      .def_static("constant", &SamplingFunction::constant, py::arg("c"))
      .def_static("zero", &SamplingFunction::zero)
      .def_static("weierstrass", &SamplingFunction::weierstrass, py::arg("gamma"),
                  py::arg("depth") = SamplingFunction::kDefaultWeierstrassDepth)
      .def_static("scaled", &SamplingFunction::scaled, py::arg("scale"), py::arg("inner"))
      .def_static("from_dict", [](const py::object& d) { return SamplingFunction::from_json(to_json(d)); })
      .def("to_dict", [](const SamplingFunction& f) { return to_py(f.to_json()); })
      .def("__call__", &SamplingFunction::operator(), py::arg("theta"))
      .def_property_readonly("sup_norm", &SamplingFunction::sup_norm)
      .def_property_readonly("holder_gamma", &SamplingFunction::holder_gamma)
      .def("fejer", [](const SamplingFunction& f, int n) {
        return SamplingFunction::trig(fejer_smooth(f, n));
      }, py::arg("n"));

  m.def("sup_distance", &sup_distance, py::arg("f"), py::arg("g"), py::arg("grid") = 1 << 14);

  m.def("lyapunov_profile",
        [](const SamplingFunction& f, double omega, const std::vector<double>& energies,
           std::int64_t k, std::int64_t m_theta, const std::string& sampling, unsigned workers) {
          return to_py(profile_to_json(
              lyapunov_profile(f, omega, energies, k, grid_of(sampling, m_theta), workers)));
        },
        py::arg("f"), py::arg("omega"), py::arg("energies"), py::arg("k"), py::arg("m_theta"),
        py::arg("sampling") = "orbit", py::arg("workers") = 0);
  m.def("lyapunov_estimate",
        [](const SamplingFunction& f, double omega, double e, std::int64_t k, std::int64_t m_theta,
           const std::string& sampling) {
          return lyapunov_estimate(f, omega, e, k, grid_of(sampling, m_theta));
        },
        py::arg("f"), py::arg("omega"), py::arg("energy"), py::arg("k"), py::arg("m_theta"),
        py::arg("sampling") = "orbit");
  m.def("log_norm",
        [](const SamplingFunction& f, double omega, double e, double theta, std::int64_t k) {
          return iterate(f, omega, e, theta, k).log_norm();
        },
        py::arg("f"), py::arg("omega"), py::arg("energy"), py::arg("theta"), py::arg("k"));
  m.def("det_truncated", &det_truncated, py::arg("f"), py::arg("omega"), py::arg("theta"),
        py::arg("energy"), py::arg("k"));
  m.def("green_restricted", &green_restricted, py::arg("f"), py::arg("omega"), py::arg("theta"),
        py::arg("energy"), py::arg("u"), py::arg("v"), py::arg("i"), py::arg("j"),
        py::arg("max_condition") = 1e12);
  m.def("identity_residual", &cocycle_det_identity_check, py::arg("f"), py::arg("omega"),
        py::arg("theta"), py::arg("energy"), py::arg("k"));

  m.def("discriminant", &discriminant, py::arg("f"), py::arg("pq"), py::arg("energy"),
        py::arg("theta"));
  m.def("spectrum_rational",
        [](const SamplingFunction& f, const Approximant& pq, double e_res, std::int64_t theta_grid,
           unsigned workers) {
          SpectrumOptions o;
          o.e_res = e_res;
          o.theta_grid = theta_grid;
          o.workers = workers;
          return to_py(spectrum_rational(f, pq, o).to_json());
        },
        py::arg("f"), py::arg("pq"), py::arg("e_res") = 1e-3, py::arg("theta_grid") = 0,
        py::arg("workers") = 0);

  m.def("measure", [](const std::vector<std::pair<double, double>>& a) {
    return interval_set(a).measure();
  });
  m.def("normalize", [](const std::vector<std::pair<double, double>>& a) {
    return pairs_of(interval_set(a));
  });
  m.def("hausdorff", [](const std::vector<std::pair<double, double>>& a,
                        const std::vector<std::pair<double, double>>& b) {
    return hausdorff(interval_set(a), interval_set(b));
  });
  m.def("setwise_gap", [](const std::vector<std::pair<double, double>>& a,
                          const std::vector<std::pair<double, double>>& b) {
    return setwise_gap(interval_set(a), interval_set(b));
  });

  m.def("furman_gap",
        [](const SamplingFunction& f, double omega, double e, std::int64_t n, std::int64_t m_theta) {
          const auto g = furman_gap(SubadditiveCocycle::schrodinger(f, omega, e), n, m_theta);
          return py::dict(py::arg("sup") = g.sup, py::arg("lambda_est") = g.lambda.value,
                          py::arg("gap") = g.gap, py::arg("gap_half") = g.gap_half);
        },
        py::arg("f"), py::arg("omega"), py::arg("energy"), py::arg("n"), py::arg("m_theta"));

  m.def("experiment_kinds", &experiment_kind_names);
  m.def("run_experiment",
        [](const py::object& config) {
          json j = ExperimentConfig{}.to_json();
          j.update(to_json(config));
          const auto report = run(ExperimentConfig::from_json(j));
          return to_py(report.manifest);
        },
        py::arg("config"),
        "Runs an experiment from a config dict; returns the run manifest.");
}
