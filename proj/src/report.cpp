#include "mindet/report.hpp"

#include <cmath>

#include "json.hpp"
#include "mindet/metrics.hpp"

namespace mindet {

namespace {

nlohmann::ordered_json distances_json(double overlap) {
  const DistanceTriple d = distances(std::clamp(overlap, -1.0, 1.0));
  return {{"d_fs", d.d_fs}, {"d_acfc", d.d_acfc}, {"d_brlcm", d.d_brlcm}};
}

}  // namespace

std::string format_report(const NewtonReport& report, const ReportContext& ctx) {
  using json = nlohmann::ordered_json;
  json j;
  j["input"] = ctx.input;
  j["algorithm"] = report.algorithm;
  j["n_orbitals"] = report.final_point.n_orbitals();
  j["n_electrons"] = report.final_point.n_electrons();
  j["converged"] = report.converged;
  j["singular"] = report.singular;
  j["character"] = to_string(report.character);
  j["steps"] = report.steps();
  j["setup_det_evals"] = report.setup_det_evals;

  json iters = json::array();
  for (std::size_t k = 0; k < report.iterations.size(); ++k) {
    const IterationRecord& r = report.iterations[k];
    json it{{"iter", k},
            {"phase", r.phase},
            {"f", r.f},
            {"grad_norm", r.grad_norm},
            {"step_norm", r.step_norm},
            {"n_det_evals", r.n_det_evals},
            {"rank_deficient", r.rank_deficient}};
    if (!ctx.deterministic) it["wall_time"] = r.wall_time;
    iters.push_back(std::move(it));
  }
  j["iterations"] = std::move(iters);

  j["final_f"] = report.final_f;
  j["final_abs_f"] = std::abs(report.final_f);
  j["final_grad_norm"] = report.final_grad_norm;
  j["distances"] = distances_json(report.final_f);
  json u = json::array();
  const Matrix& um = report.final_point.matrix();
  for (Eigen::Index r = 0; r < um.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < um.cols(); ++c) row.push_back(um(r, c));
    u.push_back(std::move(row));
  }
  j["final_U"] = std::move(u);
  j["hessian_spectrum"] = std::vector<double>(report.hessian_spectrum.data(),
                                              report.hessian_spectrum.data() + report.hessian_spectrum.size());
  if (!ctx.frozen.empty()) j["frozen"] = ctx.frozen;
  if (ctx.start_overlap) {
    j["start_overlap"] = *ctx.start_overlap;
    j["start_distances"] = distances_json(*ctx.start_overlap);
  }
  if (ctx.energies) {
    const auto& e = *ctx.energies;
    const EnergyBound b = energy_bound(e[0], e[1], e[2], std::clamp(report.final_f, -1.0, 1.0));
    json eb{{"E0", e[0]}, {"E1", e[1]}, {"EHF", e[2]}, {"bound", b.bound}, {"d_brlcm_minD", b.d_brlcm}};
    if (ctx.start_overlap)
      eb["d_brlcm_start"] = distances(std::clamp(*ctx.start_overlap, -1.0, 1.0)).d_brlcm;
    j["energy_bound"] = std::move(eb);
  }
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace mindet
