#include <cmath>

#include "doctest.h"
#include "mindet/alternating.hpp"
#include "mindet/models.hpp"
#include "mindet/newton.hpp"

using namespace mindet;

TEST_CASE("a determinant is left unchanged") {
  const StiefelPoint u = random_stiefel(5, 2, 51);
  CIWaveFunction wf(5, 2);
  for (const auto& idx : enumerate_determinants(5, 2)) wf.add(idx, compute_F(u.matrix(), idx));
  for (int q = 0; q < 2; ++q) {
    const OrbitalUpdate up = update_orbital(u, wf, q);
    CHECK(subspace_distance(up.u, u) < 1e-7);
    CHECK(std::abs(std::abs(up.f_after) - 1.0) < 1e-14);
  }
}

TEST_CASE("one orbital is solved in one step") {
  CIWaveFunction wf(3, 1);
  wf.add(OccupationIndex{0}, 0.2);
  wf.add(OccupationIndex{1}, -0.4);
  wf.add(OccupationIndex{2}, 0.8);
  const OrbitalUpdate up = update_orbital(StiefelPoint::reference(3, 1), wf, 0);
  const Vector c = Eigen::Vector3d(0.2, -0.4, 0.8).normalized();
  CHECK((up.u.matrix().col(0) - c).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(up.f_after == doctest::Approx(1.0));
}

TEST_CASE("updates never lower |f|") {
  const CIWaveFunction wf = random_ci(8, 4, 30, 52);
  StiefelPoint u = random_stiefel(8, 4, 53);
  double prev = std::abs(overlap_f(u, wf));
  for (int k = 0; k < 200; ++k) {
    const OrbitalUpdate up = update_orbital(u, wf, k % 4);
    u = up.u;
    const double now = std::abs(overlap_f(u, wf));
    CHECK(now >= prev - 1e-15);
    prev = now;
  }
}

TEST_CASE("start at the optimum") {
  const NewtonReport rep = optimize_alternating(h2_point(0, 0), generate_h2_model(0.9));
  CHECK(rep.converged);
  CHECK(rep.iterations.size() == 1);
  CHECK(rep.final_f == doctest::Approx(0.9));
}

TEST_CASE("Hubbard dimer agrees with Newton") {
  const HubbardDimerSpec spec{1.0, 2.0};
  const CIWaveFunction wf = hubbard_dimer(spec);
  const StiefelPoint start = random_stiefel(4, 2, 54);
  ToleranceOptions to;
  to.sweep_tol = 1e-15;
  to.max_sweeps = 5000;
  const NewtonReport alt = optimize_alternating(start, wf, to);
  const NewtonReport newton = optimize(hubbard_mean_field(spec), wf);
  CHECK(subspace_distance(alt.final_point, newton.final_point) < 1e-6);
}

TEST_CASE("hybrid hands over to Newton") {
  const CIWaveFunction wf = hubbard_dimer({1.0, 10.0});
  const StiefelPoint start = random_stiefel(4, 2, 55);
  const NewtonReport hyb = optimize_hybrid(start, wf);
  CHECK(hyb.converged);
  CHECK(hyb.final_grad_norm < 1e-8);
  bool newton = false, sweeps = false;
  for (const auto& r : hyb.iterations) {
    newton = newton || r.phase == "newton";
    sweeps = sweeps || r.phase == "alternating";
  }
  CHECK(newton);
  CHECK(sweeps);
  CHECK(hyb.algorithm == "hybrid");
}
