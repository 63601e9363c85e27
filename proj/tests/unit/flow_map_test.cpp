#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pfm/experiments.hpp"
#include "pfm/flow_map.hpp"
#include "pfm/scenes.hpp"
#include "support/oracles.hpp"
#include "test_helpers.hpp"

namespace pfm {
namespace {

using testing::fill_faces;

struct ConstantGradient {
  Mat2 A;
  Vec2 velocity(const Vec2& x) const { return A * x; }
  Mat2 gradient(const Vec2&) const { return A; }
};

TEST(FlowMap, ZeroVelocityLeavesStateUnchanged) {
  const ConstantGradient still{Mat2::zero()};
  const AnalyticSampler<ConstantGradient> s{still};
  const Mat2 T = mat2(1.1, 0.2, -0.3, 0.9);
  const Rk4Result r = rk4_march(vec2(0.3, 0.4), T, s, 0.25);
  EXPECT_EQ(r.x, vec2(0.3, 0.4));
  EXPECT_EQ(r.J, T);
  EXPECT_EQ(r.clamps, 0);
}

TEST(FlowMap, Rk4MatchesMatrixExponentialAndIsFourthOrder) {
  const double w = 1.3;
  const Mat2 A = mat2(0.0, -w, w, 0.0);
  const ConstantGradient f{A};
  const AnalyticSampler<ConstantGradient> s{f};
  const Mat2 T0 = mat2(1.0, 0.1, -0.2, 1.05);
  auto err = [&](double dt) {
    return frobenius(rk4_march(vec2(0.1, 0.2), T0, s, dt).J - oracle::backward_jacobian(T0, A, dt));
  };
  const double e1 = err(0.2), e2 = err(0.1);
  EXPECT_LT(e1, 1e-4);
  EXPECT_GE(e1 / e2, 15.0);

  // Shear: not normal, still exact to round-off for nilpotent A.
  const Mat2 S = mat2(0.0, 0.7, 0.0, 0.0);
  const ConstantGradient g{S};
  const AnalyticSampler<ConstantGradient> sg{g};
  const Mat2 shear = rk4_march(vec2(0.5, 0.5), T0, sg, 0.3).J;
  EXPECT_NEAR(frobenius(shear - oracle::backward_jacobian(T0, S, 0.3)), 0.0, 1e-14);
}

TEST(FlowMap, ForwardAndBackwardJacobiansAreInverse) {
  const SingleVortexField field;
  const AnalyticSampler<SingleVortexField> s{field};
  Vec2 x = vec2(0.55, 0.6);
  Mat2 F = Mat2::identity(), T = Mat2::identity();
  for (int k = 0; k < 50; ++k) {
    const Rk4Result a = rk4_march_forward(x, F, s, 0.1);
    const Rk4Result b = rk4_march(x, T, s, 0.1);
    EXPECT_EQ(a.x, b.x);
    x = a.x;
    F = a.J;
    T = b.J;
  }
  EXPECT_LT(frobenius(F * T - Mat2::identity()), 1e-6);
}

TEST(FlowMap, ForwardAccumulationEqualsBackwardProduct) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Mat2> grads;
  for (int k = 0; k < 30; ++k) grads.push_back(mat2(uni(rng), uni(rng), uni(rng), uni(rng)));
  const Mat2 a = forward_T_accumulate(grads, 0.05);
  const Mat2 b = backward_T_oracle(grads, 0.05);
  EXPECT_LT(frobenius(a - b), 1e-13);
  // Order matters: reversing the sequence gives a different matrix.
  std::vector<Mat2> rev(grads.rbegin(), grads.rend());
  EXPECT_GT(frobenius(forward_T_accumulate(rev, 0.05) - a), 1e-4);
  const std::vector<Mat2> one{grads[0]};
  EXPECT_EQ(forward_T_accumulate(one, 0.05), backward_T_oracle(one, 0.05));
}

TEST(FlowMap, ComposeLongIsAssociative) {
  const Mat2 a = mat2(1.0, 0.2, 0.1, 0.9), b = mat2(0.8, -0.3, 0.4, 1.2), c = mat2(1.1, 0.0, -0.5, 0.7);
  EXPECT_LT(frobenius(compose_long(compose_long(a, b), c) - compose_long(a, compose_long(b, c))), 1e-15);
  EXPECT_EQ(compose_long(a, Mat2::identity()), a);
  EXPECT_EQ(compose_long(Mat2::identity(), Mat2::identity()), Mat2::identity());
}

TEST(FlowMap, SplitTrajectoryComposes) {
  const SingleVortexField field;
  Vec2 x = vec2(0.47, 0.55);
  std::vector<Mat2> grads;
  for (int k = 0; k < 60; ++k) {
    grads.push_back(field.gradient(x));
    x += 0.05 * field.velocity(x);
  }
  const Mat2 whole = forward_T_accumulate(grads, 0.05);
  auto piece = [&](int a, int b) {
    return forward_T_accumulate(std::vector<Mat2>(grads.begin() + a, grads.begin() + b), 0.05);
  };
  EXPECT_LT(frobenius(compose_long(compose_long(piece(0, 17), piece(17, 41)), piece(41, 60)) - whole), 1e-12);
  EXPECT_LT(frobenius(compose_long(piece(0, 17), compose_long(piece(17, 41), piece(41, 60))) - whole), 1e-12);
}

TEST(FlowMap, FtIdentityErrorGrowsMonotonically) {
  FtIdentitySettings s;
  s.lattice = 16;
  s.steps = 60;
  const auto rows = ft_identity_experiment(s);
  for (std::size_t k = 1; k < rows.size(); ++k)
    EXPECT_GE(rows[k].ft_identity_error, rows[k - 1].ft_identity_error - 1e-12);
}

TEST(FlowMap, ClockSchedule) {
  FlowMapClock c{0, 20, 8};
  std::vector<long> shorts, longs;
  for (long s = 0; s <= 40; ++s) {
    c.step = s;
    if (c.short_fires()) shorts.push_back(s);
    if (c.long_fires()) longs.push_back(s);
  }
  EXPECT_EQ(longs, (std::vector<long>{0, 20, 40}));
  EXPECT_EQ(shorts, (std::vector<long>{0, 8, 16, 20, 24, 32, 40}));
}

TEST(FlowMap, ClockPropertyOverManySteps) {
  for (auto [nl, ns] : {std::pair{20, 8}, std::pair{1, 1}, std::pair{8, 20}, std::pair{40, 8}}) {
    FlowMapClock c{0, nl, ns};
    for (long s = 0; s < 1000; ++s) {
      c.step = s;
      EXPECT_EQ(c.long_fires(), s % nl == 0);
      EXPECT_EQ(c.short_fires(), s % nl == 0 || s % ns == 0);
      EXPECT_TRUE(!c.long_fires() || c.short_fires());
    }
  }
}

TEST(FlowMap, ReinitLongSeedsAndSamples) {
  MacGrid g(8, 8, 1.0 / 8);
  fill_faces(g, [](const Vec2&) { return vec2(0.3, -0.2); });
  ParticleSystem ps;
  std::mt19937_64 rng(1);
  reinit_long(ps, g, Redistribution::uniform, 4, rng);
  ASSERT_EQ(ps.count(), 8u * 8u * 4u);
  for (const Particle& p : ps.particles) {
    EXPECT_TRUE(g.inside_padded(p.x));
    EXPECT_NEAR(p.m_a[0], 0.3, 1e-13);
    EXPECT_NEAR(p.m_a[1], -0.2, 1e-13);
    EXPECT_EQ(p.m_a, p.m_b);
    EXPECT_EQ(p.T_ab, Mat2::identity());
    EXPECT_EQ(p.T_bc, Mat2::identity());
    EXPECT_LT(frobenius(p.grad_m_b), 1e-12);
  }
  ParticleSystem pr;
  reinit_long(pr, g, Redistribution::random, 5, rng);
  EXPECT_EQ(pr.count(), 8u * 8u * 5u);
  EXPECT_THROW(reinit_long(pr, g, Redistribution::uniform, 5, rng), Error);
}

TEST(FlowMap, UniformSeedingIsSubLattice) {
  MacGrid g(8, 8, 1.0 / 8);
  ParticleSystem ps;
  std::mt19937_64 rng(1);
  reinit_long(ps, g, Redistribution::uniform, 16, rng);
  int interior = 0;
  for (const Particle& p : ps.particles) {
    if (p.x[0] <= 1.5 * g.dx() || p.x[0] >= 6.5 * g.dx() || p.x[1] <= 1.5 * g.dx() || p.x[1] >= 6.5 * g.dx())
      continue;
    ++interior;
    for (int d = 0; d < 2; ++d) {
      const double sub = 4.0 * (p.x[d] / g.dx() - std::floor(p.x[d] / g.dx())) - 0.5;
      EXPECT_NEAR(sub, std::round(sub), 1e-12);
    }
  }
  EXPECT_EQ(interior, 20 * 20);  // cells 2..5 fully, half of cells 1 and 6
}

TEST(FlowMap, ReinitLongNoneKeepsPositions) {
  MacGrid g(8, 8, 1.0 / 8);
  fill_faces(g, [](const Vec2& x) { return vec2(x[1], 0.0); });
  ParticleSystem ps;
  std::mt19937_64 rng(1);
  reinit_long(ps, g, Redistribution::none, 4, rng);
  EXPECT_EQ(ps.count(), 256u);
  for (Particle& p : ps.particles) {
    p.x += vec2(0.01, 0.0);
    p.T_bc = mat2(2, 0, 0, 2);
  }
  const auto before = ps.particles;
  reinit_long(ps, g, Redistribution::none, 4, rng);
  ASSERT_EQ(ps.count(), before.size());
  for (std::size_t k = 0; k < ps.count(); ++k) {
    Vec2 expect = before[k].x;
    g.clamp_to_padded(expect);
    EXPECT_EQ(ps.particles[k].x, expect);
    EXPECT_EQ(ps.particles[k].T_bc, Mat2::identity());
  }
}

TEST(FlowMap, ReinitShortFoldsAndResamplesGradient) {
  MacGrid g(16, 16, 1.0 / 16);
  const Mat2 A = mat2(0.2, 0.5, -0.4, -0.2);
  fill_faces(g, [&](const Vec2& x) { return A * x; });
  ParticleSystem ps;
  Particle p;
  p.x = vec2(0.5, 0.45);
  p.T_ab = mat2(1.0, 0.1, 0.0, 1.0);
  p.T_bc = mat2(0.9, 0.0, 0.2, 1.1);
  ps.particles.push_back(p);
  reinit_short(ps, g);
  const Particle& q = ps.particles[0];
  EXPECT_LT(frobenius(q.T_ab - mat2(1.0, 0.1, 0.0, 1.0) * mat2(0.9, 0.0, 0.2, 1.1)), 1e-15);
  EXPECT_EQ(q.T_bc, Mat2::identity());
  EXPECT_LT(frobenius(q.grad_m_b - A), 1e-10);
  EXPECT_LT(norm(q.m_b - A * p.x), 1e-10);
  // With T_bc = I the fold leaves T_ab unchanged.
  const Mat2 folded = q.T_ab;
  reinit_short(ps, g);
  EXPECT_EQ(ps.particles[0].T_ab, folded);
}

TEST(FlowMap, MarchParticlesInUniformFlow) {
  MacGrid g(16, 16, 1.0 / 16);
  fill_faces(g, [](const Vec2&) { return vec2(0.5, 0.25); });
  ParticleSystem ps;
  Particle p;
  p.x = vec2(0.4, 0.4);
  ps.particles.push_back(p);
  EXPECT_EQ(march_particles(ps, GridVelocity(g), 0.2), 0);
  EXPECT_NEAR(ps.particles[0].x[0], 0.5, 1e-13);
  EXPECT_NEAR(ps.particles[0].x[1], 0.45, 1e-13);
  EXPECT_LT(frobenius(ps.particles[0].T_bc - Mat2::identity()), 1e-12);
}

TEST(FlowMap, MarchClampsAtWalls) {
  MacGrid g(16, 16, 1.0 / 16);
  fill_faces(g, [](const Vec2&) { return vec2(-1.0, 0.0); });
  ParticleSystem ps;
  Particle p;
  p.x = vec2(0.2, 0.5);
  ps.particles.push_back(p);
  EXPECT_GT(march_particles(ps, GridVelocity(g), 0.5), 0);
  EXPECT_DOUBLE_EQ(ps.particles[0].x[0], g.padded_lo());
}

}  // namespace
}  // namespace pfm
