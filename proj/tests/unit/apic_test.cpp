#include <random>

#include <gtest/gtest.h>

#include "pfm/baselines.hpp"
#include "pfm/diagnostics.hpp"
#include "pfm/scenes.hpp"
#include "test_helpers.hpp"

namespace pfm {
namespace {

using testing::fill_faces;

TEST(Apic, AffineRoundTrip) {
  MacGrid g(16, 16, 1.0 / 16);
  const Mat2 A = mat2(0.3, 0.8, -0.5, -0.3);
  const Vec2 b = vec2(0.02, 0.01);
  fill_faces(g, [&](const Vec2& x) { return A * x + b; });
  const MacGrid ref = g;
  ApicState st;
  std::mt19937_64 rng(1);
  apic_seed(st, g, Redistribution::random, 9, rng);
  for (const ApicParticle& p : st.particles) EXPECT_LT(frobenius(p.C - A), 1e-10);
  apic_p2g(st, g);
  for (int j = 0; j < 16; ++j)
    for (int i = 1; i < 16; ++i) {
      EXPECT_NEAR(g.u()(i, j), ref.u()(i, j), 1e-10);
      EXPECT_NEAR(g.v()(j, i), ref.v()(j, i), 1e-10);
    }
}

// With uniform particle weights the normalized transfer preserves the
// weighted face momentum sum_f w_f u_f = sum_p v_p (for C = 0).
TEST(Apic, MomentumConservedByTransfer) {
  MacGrid g(12, 12, 1.0 / 12);
  ApicState st;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  apic_seed(st, g, Redistribution::uniform, 4, rng);
  Vec2 particle_sum;
  for (ApicParticle& p : st.particles) {
    p.v = vec2(uni(rng), uni(rng));
    p.C = Mat2::zero();
    particle_sum += p.v;
  }
  apic_p2g(st, g);
  Vec2 grid_sum;
  for (std::size_t k = 0; k < g.u().size(); ++k) grid_sum[0] += g.wu().data()[k] * g.u().data()[k];
  for (std::size_t k = 0; k < g.v().size(); ++k) grid_sum[1] += g.wv().data()[k] * g.v().data()[k];
  EXPECT_NEAR(grid_sum[0], particle_sum[0], 1e-10);
  EXPECT_NEAR(grid_sum[1], particle_sum[1], 1e-10);
}

TEST(Apic, SteadyVortexBarelyMovesInOneSmallStep) {
  SceneSpec spec;
  spec.id = SceneId::single_vortex;
  spec.single_vortex.delta = 0.1;
  MacGrid g(32, 32, 1.0 / 32);
  const PoissonSolver solver(32, 32);
  init_scene(spec, g, solver);
  const MacGrid before = g;
  ApicState st;
  std::mt19937_64 rng(1);
  apic_seed(st, g, Redistribution::uniform, 4, rng);
  apic_step(st, g, solver, 0.01);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.u().size(); ++k)
    worst = std::max(worst, std::abs(g.u().data()[k] - before.u().data()[k]));
  EXPECT_LT(worst / before.u().max_abs(), 0.05);
  EXPECT_LT(max_divergence(g), 1e-5);
}

TEST(Apic, RestIsStationary) {
  MacGrid g(16, 16, 1.0 / 16);
  ApicState st;
  std::mt19937_64 rng(1);
  apic_seed(st, g, Redistribution::uniform, 4, rng);
  apic_step(st, g, PoissonSolver(16, 16), 0.1);
  EXPECT_EQ(g.u().max_abs(), 0.0);
  EXPECT_EQ(g.v().max_abs(), 0.0);
}

}  // namespace
}  // namespace pfm
