#pragma once
// Velocity-based APIC on the same grid, kernel and projection as the flow-map
// solver.

#include <random>
#include <vector>

#include "pfm/flow_map.hpp"
#include "pfm/impulse_transport.hpp"
#include "pfm/mac_grid.hpp"
#include "pfm/projection.hpp"

namespace pfm {

struct ApicParticle {
  Vec2 x;
  Vec2 v;
  Mat2 C;  // affine velocity matrix, C(r, c) = d u_r / d x_c
};

struct ApicState {
  std::vector<ApicParticle> particles;
};

/// Velocity and affine matrix from the grid at each particle.
inline void apic_g2p(ApicState& st, const MacGrid& grid) {
  for (ApicParticle& p : st.particles) {
    const VelocitySample s = grid.sample_velocity(p.x);
    p.v = s.velocity;
    p.C = s.gradient;
  }
}

inline void apic_seed(ApicState& st, const MacGrid& grid, Redistribution strategy, int ppc, std::mt19937_64& rng) {
  const auto xs =
      seed_positions(grid, strategy == Redistribution::none ? Redistribution::uniform : strategy, ppc, rng);
  st.particles.assign(xs.size(), ApicParticle{});
  for (std::size_t k = 0; k < xs.size(); ++k) st.particles[k].x = xs[k];
  apic_g2p(st, grid);
}

/// sum w (v + C (x_i - x_p)) / sum w on both face families; empty faces keep
/// their value. Returns the number of empty faces.
inline int apic_p2g(const ApicState& st, MacGrid& grid) {
  FaceAccumulator acc(grid);
  const Lattice lu = grid.u_lattice();
  const Lattice lv = grid.v_lattice();
  for (const ApicParticle& p : st.particles) {
    detail::scatter_taylor(acc.numerator_u(), acc.weight_u(), lu, grid.dx(), p.x, p.v[0], vec2(p.C(0, 0), p.C(0, 1)));
    detail::scatter_taylor(acc.numerator_v(), acc.weight_v(), lv, grid.dx(), p.x, p.v[1], vec2(p.C(1, 0), p.C(1, 1)));
  }
  acc.normalize_into(grid.u(), grid.v(), kEmptyFaceEpsilon);
  grid.wu() = acc.weight_u();
  grid.wv() = acc.weight_v();
  return acc.empty_faces(kEmptyFaceEpsilon);
}

struct ApicStepResult {
  SolveStats stats;
  int clamps = 0;
};

/// G2P, RK4 advection through the current grid field, P2G with the affine
/// term, projection.
inline ApicStepResult apic_step(ApicState& st, MacGrid& grid, const PoissonSolver& solver, double dt) {
  ApicStepResult out;
  apic_g2p(st, grid);
  const GridVelocity field(grid);
  for (ApicParticle& p : st.particles) {
    const Rk4Result r = rk4_march(p.x, Mat2::identity(), field, dt);
    p.x = r.x;
    out.clamps += r.clamps;
  }
  apic_p2g(st, grid);
  out.stats = project(grid, solver);
  return out;
}

}  // namespace pfm
