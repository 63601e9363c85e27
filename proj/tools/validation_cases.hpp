#pragma once
// Validation cases shared by the CLI `validate` command and the acceptance
// suite. Each returns pass/fail against fixed tolerances plus its CSV rows.

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pfm/pfm.hpp"

namespace pfm::tools {

struct CaseOutcome {
  bool pass = false;
  std::string detail;
  std::vector<DiagnosticsRecord> rows;
};

struct ValidationCase {
  std::string name;
  std::function<CaseOutcome()> run;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline CaseOutcome kernel_case() {
  CaseOutcome o;
  const bool values = kernel_weight(0.0) == 0.75 && kernel_weight(0.5) == 0.5 && kernel_weight(1.5) == 0.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(2.0, 30.0);
  const Lattice lat{vec2(0.0, 0.0), 33, 33};
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double a = pos(rng);
    const double b = pos(rng);
    const KernelStencil st = build_stencil(vec2(a, b), lat, 1.0);
    double sum = 0.0;
    for (const auto& row : st.weights)
      for (double w : row) sum += w;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  o.pass = values && worst < 1e-12;
  o.detail = std::string("point values ") + (values ? "exact" : "wrong") + ", max |sum w - 1| = " + fmt(worst);
  return o;
}

struct ProjectionMetrics {
  double max_div = 0.0;
  double idempotence = 0.0;   // max face change of a second projection, relative to max |u|
  double energy_gain = 0.0;   // KE(after) - KE(before), should be <= 0
  double adjoint_gap = 0.0;   // relative
};

inline SimConfig scene_config(SceneId id, int n) {
  SimConfig c;
  c.scene.id = id;
  c.steps = 1;
  switch (id) {
    case SceneId::leapfrog2d:
      c.nx = 4 * n;
      c.ny = n;
      c.lx = 4.0;
      c.ly = 1.0;
      c.lifetime.merge_radius = c.scene.leapfrog.delta;
      break;
    case SceneId::single_vortex:
      c.nx = c.ny = n;
      c.lx = c.ly = 1.0;
      break;
    case SceneId::taylor2d:
      c.nx = c.ny = n;
      c.lx = c.ly = 2.0 * std::numbers::pi;
      break;
  }
  return c;
}

/// Projection properties on one freshly generated scene.
inline ProjectionMetrics projection_metrics(SceneId id, int n, double tol) {
  SimConfig c = scene_config(id, n);
  c.solver.tolerance = tol;
  const PoissonSolver solver(c.nx, c.ny, c.solver);
  MacGrid g(c.nx, c.ny, c.dx());
  // Unprojected samples, to measure the energy change of the first projection.
  init_scene(c.scene, g, solver);
  ProjectionMetrics m;
  m.max_div = max_divergence(g);

  MacGrid raw(c.nx, c.ny, c.dx());
  switch (id) {
    case SceneId::leapfrog2d: sample_on_faces(leapfrog_field(c.scene.leapfrog, raw.length_y()), raw); break;
    case SceneId::single_vortex: sample_on_faces(SingleVortexField(c.scene.single_vortex), raw); break;
    case SceneId::taylor2d:
      sample_on_faces(taylor_field(c.scene.taylor, vec2(0.5 * raw.length_x(), 0.5 * raw.length_y())), raw);
      break;
  }
  raw.zero_boundary_normals();
  const double before = kinetic_energy(raw);
  project(raw, solver);
  m.energy_gain = kinetic_energy(raw) - before;

  MacGrid twice = g;
  project(twice, solver);
  for (std::size_t k = 0; k < g.u().size(); ++k)
    m.idempotence = std::max(m.idempotence, std::abs(twice.u().data()[k] - g.u().data()[k]));
  for (std::size_t k = 0; k < g.v().size(); ++k)
    m.idempotence = std::max(m.idempotence, std::abs(twice.v().data()[k] - g.v().data()[k]));
  m.idempotence /= std::max(g.u().max_abs(), g.v().max_abs());

  // <grad phi, w>_faces = -<phi, div w>_cells for w with zero wall normals.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field2 phi(c.nx, c.ny), wu(c.nx + 1, c.ny), wv(c.nx, c.ny + 1);
  for (double& x : phi.data()) x = uni(rng);
  for (double& x : wu.data()) x = uni(rng);
  for (double& x : wv.data()) x = uni(rng);
  MacGrid::zero_boundary_normals(wu, wv);
  Field2 gu, gv;
  pressure_gradient(phi, c.dx(), gu, gv);
  const Field2 div = divergence(wu, wv, c.dx());
  double lhs = 0.0, rhs = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < wu.size(); ++k) lhs += gu.data()[k] * wu.data()[k], scale += std::abs(gu.data()[k] * wu.data()[k]);
  for (std::size_t k = 0; k < wv.size(); ++k) lhs += gv.data()[k] * wv.data()[k], scale += std::abs(gv.data()[k] * wv.data()[k]);
  for (std::size_t k = 0; k < phi.size(); ++k) rhs -= phi.data()[k] * div.data()[k];
  m.adjoint_gap = std::abs(lhs - rhs) / scale;
  return m;
}

inline CaseOutcome projection_case() {
  CaseOutcome o;
  const double tol = 1e-6;
  o.pass = true;
  std::ostringstream os;
  const std::pair<SceneId, int> scenes[] = {{SceneId::leapfrog2d, 64}, {SceneId::single_vortex, 64},
                                            {SceneId::taylor2d, 64}};
  for (const auto& [id, n] : scenes) {
    const ProjectionMetrics m = projection_metrics(id, n, tol);
    const bool ok = m.max_div <= 10.0 * tol && m.idempotence <= 10.0 * tol && m.energy_gain <= 1e-12 &&
                    m.adjoint_gap <= 1e-10;
    o.pass = o.pass && ok;
    os << to_string(id) << ": max|div| " << fmt(m.max_div) << ", repeat change " << fmt(m.idempotence)
       << ", energy change " << fmt(m.energy_gain) << ", adjoint gap " << fmt(m.adjoint_gap) << "; ";
  }
  o.detail = os.str();
  return o;
}

inline CaseOutcome ft_identity_case() {
  CaseOutcome o;
  o.rows = ft_identity_experiment();
  const double last = o.rows.back().ft_identity_error;
  o.pass = o.rows.front().ft_identity_error == 0.0 && last <= 1e-5;
  o.detail = "mean |F T - I| after 200 steps = " + fmt(last) + " (limit 1e-5)";
  return o;
}

/// u = A x + b with constant A.
struct AffineField {
  Mat2 A;
  Vec2 b;
  Vec2 velocity(const Vec2& x) const { return A * x + b; }
  Mat2 gradient(const Vec2&) const { return A; }
};

inline CaseOutcome t_equivalence_case() {
  CaseOutcome o;
  o.rows = t_equivalence_experiment();
  const double last = o.rows.back().t_equivalence_error;
  TEquivalenceSettings s;
  s.lattice = 16;
  const auto affine = t_equivalence_experiment(AffineField{mat2(0.1, -0.3, 0.2, -0.1), vec2(0.01, 0.02)}, s);
  const double affine_last = affine.back().t_equivalence_error;
  const bool one_step = o.rows[1].t_equivalence_error == 0.0;
  o.pass = last <= 1e-4 && affine_last <= 1e-12 && one_step;
  o.detail = "single vortex gap after 200 steps = " + fmt(last) + " (limit 1e-4), constant-gradient gap = " +
             fmt(affine_last) + " (limit 1e-12), one-step gap " + (one_step ? "exactly 0" : "non-zero");
  return o;
}

inline CaseOutcome reconstruction_case() {
  CaseOutcome o;
  const ReconstructionSeries s = reconstruction_experiment();
  MacGrid held(128, 128, 1.0 / 128);
  sample_on_faces(SingleVortexField{}, held);
  const double signal = std::sqrt(2.0 * kinetic_energy(held));
  double worst = 0.0;
  bool finite = true;
  for (const auto* series : {&s.with_gradient, &s.without_gradient})
    for (const auto& r : *series) {
      finite = finite && std::isfinite(r.reconstruction_error_l2);
      worst = std::max(worst, r.reconstruction_error_l2);
    }
  const double with100 = s.with_gradient[100].reconstruction_error_l2;
  const double without100 = s.without_gradient[100].reconstruction_error_l2;
  o.pass = finite && with100 < without100 && worst < signal;
  o.detail = "L2 error at step 100: with gradient " + fmt(with100) + ", without " + fmt(without100) +
             "; max over 200 steps " + fmt(worst) + " vs field norm " + fmt(signal);
  o.rows = s.with_gradient;
  return o;
}

inline const std::vector<ValidationCase>& validation_cases() {
  static const std::vector<ValidationCase> cases{{"ft-identity", ft_identity_case},
                                                 {"t-equivalence", t_equivalence_case},
                                                 {"reconstruction", reconstruction_case},
                                                 {"kernel", kernel_case},
                                                 {"projection", projection_case}};
  return cases;
}

}  // namespace pfm::tools
