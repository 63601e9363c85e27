#pragma once
// Validation harnesses over closed-form fields: F T identity, forward versus
// backward T accumulation, velocity reconstruction with and without impulse
// gradients, and scalar transport by a rigid rotation.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pfm/diagnostics.hpp"
#include "pfm/flow_map.hpp"
#include "pfm/impulse_transport.hpp"
#include "pfm/mac_grid.hpp"
#include "pfm/projection.hpp"
#include "pfm/scenes.hpp"

namespace pfm {

/// n x n lattice of cell-centred points on the unit square.
inline std::vector<Vec2> unit_square_lattice(int n) {
  std::vector<Vec2> xs;
  xs.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) xs.push_back(vec2((i + 0.5) / n, (j + 0.5) / n));
  return xs;
}

struct FtIdentitySettings {
  int lattice = 64;  // lattice x lattice particles
  int steps = 200;
  double dt = 0.1;
  SingleVortexParams vortex;
};

/// Co-marches F (dF/dt = grad u F) and T (dT/dt = -T grad u) with RK4 in the
/// steady single-vortex field. Row k holds the mean |F T - I|_F after k steps.
inline std::vector<DiagnosticsRecord> ft_identity_experiment(const FtIdentitySettings& s = {}) {
  const SingleVortexField field(s.vortex);
  const AnalyticSampler<SingleVortexField> sampler{field};
  std::vector<Vec2> xs = unit_square_lattice(s.lattice);
  std::vector<Mat2> F(xs.size(), Mat2::identity()), T(xs.size(), Mat2::identity());
  std::vector<DiagnosticsRecord> rows;
  rows.push_back(DiagnosticsRecord{});
  rows.back().dt = s.dt;
  for (int k = 1; k <= s.steps; ++k) {
    double err = 0.0;
    for (std::size_t p = 0; p < xs.size(); ++p) {
      const Rk4Result fwd = rk4_march_forward(xs[p], F[p], sampler, s.dt);
      const Rk4Result bwd = rk4_march(xs[p], T[p], sampler, s.dt);
      xs[p] = fwd.x;
      F[p] = fwd.J;
      T[p] = bwd.J;
      err += frobenius(F[p] * T[p] - Mat2::identity());
    }
    DiagnosticsRecord r;
    r.step = k;
    r.time = k * s.dt;
    r.dt = s.dt;
    r.ft_identity_error = err / static_cast<double>(xs.size());
    rows.push_back(r);
  }
  return rows;
}

struct TEquivalenceSettings {
  int lattice = 64;
  int steps = 200;
  double dt = 0.1;
  SingleVortexParams vortex;
};

/// Marches particles with forward Euler and records grad u at each step.
/// Row k compares the right-multiplied forward accumulation of the factors
/// (I - dt grad u_i) with the left-multiplied backward product over the same
/// recorded sequence.
template <class Field>
std::vector<DiagnosticsRecord> t_equivalence_experiment(const Field& field, const TEquivalenceSettings& s) {
  std::vector<Vec2> xs = unit_square_lattice(s.lattice);
  std::vector<std::vector<Mat2>> history(xs.size());
  std::vector<Mat2> T(xs.size(), Mat2::identity());
  std::vector<DiagnosticsRecord> rows;
  rows.push_back(DiagnosticsRecord{});
  rows.back().dt = s.dt;
  for (int k = 1; k <= s.steps; ++k) {
    double gap = 0.0;
    for (std::size_t p = 0; p < xs.size(); ++p) {
      const Mat2 g = field.gradient(xs[p]);
      history[p].push_back(g);
      T[p] = T[p] * (Mat2::identity() - s.dt * g);
      xs[p] += s.dt * field.velocity(xs[p]);
      gap += frobenius(T[p] - backward_T_oracle(history[p], s.dt));
    }
    DiagnosticsRecord r;
    r.step = k;
    r.time = k * s.dt;
    r.dt = s.dt;
    r.t_equivalence_error = gap / static_cast<double>(xs.size());
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<DiagnosticsRecord> t_equivalence_experiment(const TEquivalenceSettings& s = {}) {
  return t_equivalence_experiment(SingleVortexField(s.vortex), s);
}

/// Same comparison, but the backward product is built NFM-style from a fresh
/// first-order backtrace started at the particle's current position, so the
/// two products sample grad u on different discrete paths. Reported for
/// reference; the gap is O(dt) rather than round-off.
template <class Field>
std::vector<double> t_backtrace_gap(const Field& field, const TEquivalenceSettings& s) {
  std::vector<Vec2> xs = unit_square_lattice(s.lattice);
  std::vector<Mat2> T(xs.size(), Mat2::identity());
  std::vector<double> out{0.0};
  for (int k = 1; k <= s.steps; ++k) {
    double gap = 0.0;
    for (std::size_t p = 0; p < xs.size(); ++p) {
      const Mat2 g = field.gradient(xs[p]);
      T[p] = T[p] * (Mat2::identity() - s.dt * g);
      xs[p] += s.dt * field.velocity(xs[p]);
      Vec2 y = xs[p];
      Mat2 B = Mat2::identity();
      for (int i = 0; i < k; ++i) {
        y -= s.dt * field.velocity(y);
        B = (Mat2::identity() - s.dt * field.gradient(y)) * B;
      }
      gap += frobenius(T[p] - B);
    }
    out.push_back(gap / static_cast<double>(xs.size()));
  }
  return out;
}

struct ReconstructionSettings {
  int n = 128;
  int particles_per_cell = 16;
  int steps = 200;
  double dt = 0.1;
  int n_long = 20;
  int n_short = 8;
  std::uint64_t seed = 1;
  SingleVortexParams vortex;
};

struct ReconstructionSeries {
  std::vector<DiagnosticsRecord> with_gradient;
  std::vector<DiagnosticsRecord> without_gradient;
};

/// sqrt(dx^2 sum (u - u_ref)^2) over all faces.
inline double face_l2_error(const MacGrid& g, const Field2& u_ref, const Field2& v_ref) {
  double s = 0.0;
  for (std::size_t k = 0; k < u_ref.size(); ++k) s += std::pow(g.u().data()[k] - u_ref.data()[k], 2);
  for (std::size_t k = 0; k < v_ref.size(); ++k) s += std::pow(g.v().data()[k] - v_ref.data()[k], 2);
  return std::sqrt(s) * g.dx();
}

/// The projected single-vortex field is held fixed. Particles march through
/// it with the usual reinitialization clock (snapshots come from the held
/// field). Each step the mapped impulse is transferred to a separate grid,
/// once with and once without the gradient term, projected to a velocity and
/// compared with the held field. The reconstruction never feeds back into
/// the advection, so both series share one set of trajectories.
inline ReconstructionSeries reconstruction_experiment(const ReconstructionSettings& s = {}) {
  MacGrid held(s.n, s.n, 1.0 / s.n);
  const PoissonSolver solver(s.n, s.n);
  SceneSpec spec;
  spec.id = SceneId::single_vortex;
  spec.single_vortex = s.vortex;
  init_single_vortex(spec, held, solver);
  MacGrid recon = held;
  ParticleSystem ps;
  std::mt19937_64 rng(s.seed);
  FlowMapClock clock{0, s.n_long, s.n_short};
  const GridVelocity field(held);

  ReconstructionSeries out;
  DiagnosticsRecord first;
  first.dt = s.dt;
  first.reconstruction_error_l2 = face_l2_error(recon, held.u(), held.v());
  out.with_gradient.push_back(first);
  out.without_gradient.push_back(first);
  for (int k = 1; k <= s.steps; ++k) {
    DiagnosticsRecord base;
    base.long_reinit = clock.long_fires();
    base.short_reinit = clock.short_fires();
    if (base.long_reinit)
      reinit_long(ps, held, Redistribution::uniform, s.particles_per_cell, rng);
    else if (base.short_reinit)
      reinit_short(ps, held);
    base.clamp_count = march_particles(ps, field, s.dt);
    clock.step = k;
    base.step = k;
    base.time = k * s.dt;
    base.dt = s.dt;
    TransportedState ts = transport_impulse(ps);
    for (auto* series : {&out.with_gradient, &out.without_gradient}) {
      if (series == &out.without_gradient)
        for (Mat2& g : ts.grad_m_c) g = Mat2::zero();
      recon.u() = held.u();
      recon.v() = held.v();
      p2g_impulse(ps, ts.m_c, ts.grad_m_c, recon);
      const SolveStats st = project(recon, solver);
      DiagnosticsRecord r = base;
      r.solver_iterations = st.iterations;
      r.solver_residual = st.residual;
      r.max_divergence = max_divergence(recon);
      r.kinetic_energy = kinetic_energy(recon);
      r.reconstruction_error_l2 = face_l2_error(recon, held.u(), held.v());
      series->push_back(r);
    }
  }
  return out;
}

struct SmokeBlobSettings {
  int n = 64;
  int particles_per_cell = 16;
  int steps_per_revolution = 200;
  double angular_velocity = 1.0;
  Vec2 blob_center = vec2(0.5, 0.75);
  double blob_sigma = 0.06;
  int n_long = 20;
  int n_short = 8;
  std::uint64_t seed = 1;
};

struct SmokeBlobResult {
  double initial_peak = 0.0;
  double final_peak = 0.0;
  Field2 final_scalar;
};

/// Rigid rotation about the domain centre.
struct RigidRotationField {
  double omega = 1.0;
  Vec2 center = vec2(0.5, 0.5);
  Vec2 velocity(const Vec2& x) const { return vec2(-omega * (x[1] - center[1]), omega * (x[0] - center[0])); }
  Mat2 gradient(const Vec2&) const { return mat2(0.0, -omega, omega, 0.0); }
};

/// Transports a Gaussian blob for one revolution of a held rigid rotation,
/// with the scalar gradient handled according to `mode`.
inline SmokeBlobResult smoke_blob_experiment(ScalarGradientMode mode, const SmokeBlobSettings& s = {}) {
  MacGrid grid(s.n, s.n, 1.0 / s.n);
  sample_on_faces(RigidRotationField{s.angular_velocity}, grid);
  grid.enable_scalar();
  for (int j = 0; j < s.n; ++j)
    for (int i = 0; i < s.n; ++i) {
      const Vec2 d = grid.cell_center(i, j) - s.blob_center;
      grid.scalar()(i, j) = std::exp(-dot(d, d) / (2.0 * s.blob_sigma * s.blob_sigma));
    }
  SmokeBlobResult out;
  out.initial_peak = grid.scalar().max_abs();
  ParticleSystem ps;
  std::mt19937_64 rng(s.seed);
  FlowMapClock clock{0, s.n_long, s.n_short};
  const double dt = 2.0 * std::numbers::pi / (s.angular_velocity * s.steps_per_revolution);
  const GridVelocity field(grid);
  for (int k = 0; k < s.steps_per_revolution; ++k) {
    clock.step = k;
    if (clock.long_fires())
      reinit_long(ps, grid, Redistribution::uniform, s.particles_per_cell, rng);
    else if (clock.short_fires())
      reinit_short(ps, grid);
    march_particles(ps, field, dt);
    p2g_scalar(ps, mode, grid);
  }
  out.final_peak = grid.scalar().max_abs();
  out.final_scalar = grid.scalar();
  return out;
}

}  // namespace pfm
