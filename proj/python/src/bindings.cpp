#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mindet/alternating.hpp"
#include "mindet/grassmann.hpp"
#include "mindet/kernels.hpp"
#include "mindet/metrics.hpp"
#include "mindet/models.hpp"
#include "mindet/newton.hpp"
#include "mindet/thouless.hpp"
#include "mindet/wavefunction.hpp"

namespace py = pybind11;
using namespace mindet;

namespace {

StiefelPoint as_point(const Matrix& u) { return StiefelPoint(u); }

NewtonReport run(const CIWaveFunction& wf, const std::optional<Matrix>& start, const std::string& algorithm,
                 const ToleranceOptions& tol) {
  const StiefelPoint u0 =
      start ? orthonormalize(*start) : StiefelPoint::from_occupation(wf.n_orbitals(), wf.dominant().index);
  if (algorithm == "absil") return optimize(u0, wf, tol);
  if (algorithm == "thouless")
    return start ? optimize_thouless(wf, u0, tol) : optimize_thouless(wf, wf.dominant().index, tol);
  if (algorithm == "alternating") return optimize_alternating(u0, wf, tol);
  if (algorithm == "hybrid") return optimize_hybrid(u0, wf, tol);
  throw std::invalid_argument("unknown algorithm: " + algorithm);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<CIWaveFunction>(m, "CIWaveFunction")
      .def(py::init<int, int>(), py::arg("n_orbitals"), py::arg("n_electrons"))
      .def_property_readonly("n_orbitals", &CIWaveFunction::n_orbitals)
      .def_property_readonly("n_electrons", &CIWaveFunction::n_electrons)
      .def("add",
           [](CIWaveFunction& wf, std::vector<int> orbitals, double c) { wf.add(OccupationIndex(std::move(orbitals)), c); },
           py::arg("orbitals"), py::arg("coefficient"))
      .def("coefficient",
           [](const CIWaveFunction& wf, std::vector<int> orbitals) {
             return wf.coefficient(OccupationIndex(std::move(orbitals)));
           })
      .def("terms",
           [](const CIWaveFunction& wf) {
             std::vector<std::pair<std::vector<int>, double>> out;
             for (const auto& t : wf.terms())
               out.emplace_back(std::vector<int>(t.index.begin(), t.index.end()), t.coefficient);
             return out;
           })
      .def("norm", &CIWaveFunction::norm)
      .def("normalized", &CIWaveFunction::normalized)
      .def("serialize", &serialize_wavefunction)
      .def("__len__", &CIWaveFunction::size);

  m.def("parse_wavefunction", [](const std::string& text) { return parse_wavefunction(text); });
  m.def("read_wavefunction", [](const std::string& path) { return read_wavefunction_file(path); });

  py::class_<ToleranceOptions>(m, "ToleranceOptions")
      .def(py::init<>())
      .def_readwrite("tol_grad", &ToleranceOptions::tol_grad)
      .def_readwrite("tol_step", &ToleranceOptions::tol_step)
      .def_readwrite("max_iter", &ToleranceOptions::max_iter)
      .def_readwrite("max_sweeps", &ToleranceOptions::max_sweeps)
      .def_readwrite("sweep_tol", &ToleranceOptions::sweep_tol)
      .def_readwrite("hybrid_switch", &ToleranceOptions::hybrid_switch)
      .def_readwrite("safeguard", &ToleranceOptions::safeguard)
      .def_readwrite("force", &ToleranceOptions::force);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("f", &IterationRecord::f)
      .def_readonly("grad_norm", &IterationRecord::grad_norm)
      .def_readonly("step_norm", &IterationRecord::step_norm)
      .def_readonly("n_det_evals", &IterationRecord::n_det_evals)
      .def_readonly("rank_deficient", &IterationRecord::rank_deficient)
      .def_readonly("moved", &IterationRecord::moved)
      .def_readonly("phase", &IterationRecord::phase);

  py::class_<NewtonReport>(m, "Report")
      .def_readonly("algorithm", &NewtonReport::algorithm)
      .def_readonly("iterations", &NewtonReport::iterations)
      .def_readonly("converged", &NewtonReport::converged)
      .def_readonly("singular", &NewtonReport::singular)
      .def_readonly("final_f", &NewtonReport::final_f)
      .def_readonly("final_grad_norm", &NewtonReport::final_grad_norm)
      .def_readonly("warnings", &NewtonReport::warnings)
      .def_property_readonly("final_u", [](const NewtonReport& r) { return r.final_point.matrix(); })
      .def_property_readonly("character", [](const NewtonReport& r) { return to_string(r.character); })
      .def_property_readonly("hessian_spectrum", [](const NewtonReport& r) { return r.hessian_spectrum; });

  m.def("optimize", &run, py::arg("wf"), py::arg("start") = std::nullopt, py::arg("algorithm") = "absil",
        py::arg("tolerances") = ToleranceOptions{}, py::call_guard<py::gil_scoped_release>());

  m.def("overlap", [](const Matrix& u, const CIWaveFunction& wf) { return overlap_f(as_point(u), wf); });
  m.def("orthonormalize", [](const Matrix& a) { return orthonormalize(a).matrix(); });
  m.def("subspace_distance",
        [](const Matrix& a, const Matrix& b) { return subspace_distance(as_point(a), as_point(b)); });
  m.def("distances", [](double s) {
    const DistanceTriple d = distances(s);
    py::dict out;
    out["fubini_study"] = d.d_fs;
    out["acfc"] = d.d_acfc;
    out["brlcm"] = d.d_brlcm;
    return out;
  });
  m.def("plucker_residual", py::overload_cast<const CIWaveFunction&>(&plucker_residual));

  m.def("generate_h2_model", &generate_h2_model, py::arg("c0"));
  m.def("h2_point", [](double ka, double kb) { return h2_point(ka, kb).matrix(); });
  m.def("hubbard_dimer", [](double t, double u) { return hubbard_dimer({t, u}); }, py::arg("t"), py::arg("u"));
  m.def("hubbard_mean_field", [](double t, double u) { return hubbard_mean_field({t, u}).matrix(); },
        py::arg("t"), py::arg("u"));
  m.def("random_ci", &random_ci, py::arg("n_orbitals"), py::arg("n_electrons"), py::arg("n_terms"),
        py::arg("seed"));
  m.def("random_stiefel", [](int m_, int n, std::uint64_t seed) { return random_stiefel(m_, n, seed).matrix(); },
        py::arg("n_orbitals"), py::arg("n_electrons"), py::arg("seed"));
}
