#pragma once
// Per-particle two-scale flow maps: position, long-map Jacobian T_ab
// (time b back to a) and short-map Jacobian T_bc (time c back to b), with the
// quantity snapshots taken at the start of each map.
//
// Jacobians are stored in standard orientation, T(i, j) = d psi_i / d x_j, so
// that composition is T_ac = T_ab * T_bc and impulse maps as m_c = T_ac^T m_a.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfm/error.hpp"
#include "pfm/linalg.hpp"
#include "pfm/mac_grid.hpp"

namespace pfm {

struct Particle {
  Vec2 x;
  Mat2 T_ab = Mat2::identity();
  Mat2 T_bc = Mat2::identity();
  Vec2 m_a;
  Vec2 m_b;
  Mat2 grad_m_b;  // grad_m_b(r, c) = d m_r / d x_c at time b
  double rho_s = 0.0;
  Vec2 grad_rho_b;
};

struct ParticleSystem {
  std::vector<Particle> particles;

  std::size_t count() const { return particles.size(); }
  bool all_finite() const {
    for (const Particle& p : particles) {
      for (double c : p.x.c)
        if (!std::isfinite(c)) return false;
      for (double c : p.T_ab.a)
        if (!std::isfinite(c)) return false;
      for (double c : p.T_bc.a)
        if (!std::isfinite(c)) return false;
      for (double c : p.m_a.c)
        if (!std::isfinite(c)) return false;
    }
    return true;
  }
};

enum class Redistribution { uniform, random, none };

inline std::string to_string(Redistribution r) {
  switch (r) {
    case Redistribution::uniform: return "uniform";
    case Redistribution::random: return "random";
    case Redistribution::none: return "none";
  }
  return "uniform";
}

/// Reinitialization schedule. The long map restarts when step % n_long == 0;
/// the short map restarts when step % n_short == 0 or with every long restart.
struct FlowMapClock {
  long step = 0;
  int n_long = 20;
  int n_short = 8;

  bool long_fires() const { return step % n_long == 0; }
  bool short_fires() const { return long_fires() || step % n_short == 0; }
};

/// Velocity sampler over a MAC grid (optionally with substitute face fields,
/// e.g. the midpoint velocity). Positions are clamped to the padded domain.
class GridVelocity {
 public:
  explicit GridVelocity(const MacGrid& grid) : grid_(grid), u_(&grid.u()), v_(&grid.v()) {}
  GridVelocity(const MacGrid& grid, const Field2& u, const Field2& v) : grid_(grid), u_(&u), v_(&v) {}

  VelocitySample sample(const Vec2& x) const { return grid_.sample_velocity(*u_, *v_, x); }
  bool clamp(Vec2& x) const { return grid_.clamp_to_padded(x); }

 private:
  const MacGrid& grid_;
  const Field2* u_;
  const Field2* v_;
};

struct Rk4Result {
  Vec2 x;
  Mat2 J;
  int clamps = 0;  // stage or final positions moved back into the domain
};

/// Classical RK4 on the coupled system dx/dt = u(x), dJ/dt = rate(grad u, J),
/// with the stage layout of the interleaved position/Jacobian scheme.
template <class Sampler, class Rate>
Rk4Result rk4_march_with(Vec2 x, const Mat2& J, const Sampler& field, double dt, Rate rate) {
  Rk4Result out;
  auto stage_pos = [&](Vec2 p) {
    out.clamps += field.clamp(p);
    return p;
  };
  const VelocitySample s1 = field.sample(x);
  const Mat2 k1 = rate(s1.gradient, J);
  const Vec2 x1 = stage_pos(x + (0.5 * dt) * s1.velocity);
  const Mat2 J1 = J + (0.5 * dt) * k1;

  const VelocitySample s2 = field.sample(x1);
  const Mat2 k2 = rate(s2.gradient, J1);
  const Vec2 x2 = stage_pos(x + (0.5 * dt) * s2.velocity);
  const Mat2 J2 = J + (0.5 * dt) * k2;

  const VelocitySample s3 = field.sample(x2);
  const Mat2 k3 = rate(s3.gradient, J2);
  const Vec2 x3 = stage_pos(x + dt * s3.velocity);
  const Mat2 J3 = J + dt * k3;

  const VelocitySample s4 = field.sample(x3);
  const Mat2 k4 = rate(s4.gradient, J3);

  const double h6 = dt / 6.0;
  out.x = stage_pos(x + h6 * (s1.velocity + 2.0 * s2.velocity + 2.0 * s3.velocity + s4.velocity));
  out.J = J + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return out;
}

/// One RK4 step of dx/dt = u, dT/dt = -T grad(u) (backward-map Jacobian).
/// Negative dt is allowed.
template <class Sampler>
Rk4Result rk4_march(const Vec2& x, const Mat2& T, const Sampler& field, double dt) {
  return rk4_march_with(x, T, field, dt, [](const Mat2& g, const Mat2& M) { return -1.0 * (M * g); });
}

/// One RK4 step of dx/dt = u, dF/dt = grad(u) F (forward-map Jacobian).
/// Marching with negative dt from a point x yields d psi / d x of the
/// backtrace psi(x), which is what the midpoint estimator needs.
template <class Sampler>
Rk4Result rk4_march_forward(const Vec2& x, const Mat2& F, const Sampler& field, double dt) {
  return rk4_march_with(x, F, field, dt, [](const Mat2& g, const Mat2& M) { return g * M; });
}

/// Long-map Jacobian from the stored pieces: T_ac = T_ab T_bc.
inline Mat2 compose_long(const Mat2& T_ab, const Mat2& T_bc) { return T_ab * T_bc; }

/// Product of (I - grad_u_i dt) for i = 1..n, built by left-multiplying from
/// the newest factor back to the oldest (the order a backtracing scheme uses).
inline Mat2 backward_T_oracle(std::span<const Mat2> grads, double dt) {
  Mat2 T = Mat2::identity();
  for (auto it = grads.rbegin(); it != grads.rend(); ++it) T = (Mat2::identity() - dt * (*it)) * T;
  return T;
}

/// Same product accumulated the way particles do it: right-multiplying each
/// new factor as the trajectory advances.
inline Mat2 forward_T_accumulate(std::span<const Mat2> grads, double dt) {
  Mat2 T = Mat2::identity();
  for (const Mat2& g : grads) T = T * (Mat2::identity() - dt * g);
  return T;
}

/// Positions for a redistribution pass. `uniform` lays a regular
/// sqrt(ppc) x sqrt(ppc) lattice at sub-cell centres; `random` draws ppc
/// uniform points per cell. Positions are clamped to the padded domain.
inline std::vector<Vec2> seed_positions(const MacGrid& grid, Redistribution strategy, int ppc, std::mt19937_64& rng) {
  std::vector<Vec2> xs;
  xs.reserve(static_cast<std::size_t>(ppc) * grid.nx() * grid.ny());
  const double dx = grid.dx();
  if (strategy == Redistribution::random) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i)
        for (int k = 0; k < ppc; ++k) {
          const double rx = unit(rng);
          const double ry = unit(rng);
          xs.push_back(vec2((i + rx) * dx, (j + ry) * dx));
        }
  } else {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(ppc))));
    if (side * side != ppc) throw Error("uniform particle lattice needs a perfect-square particles_per_cell");
    const double h = dx / side;
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i)
        for (int b = 0; b < side; ++b)
          for (int a = 0; a < side; ++a) xs.push_back(vec2(i * dx + (a + 0.5) * h, j * dx + (b + 0.5) * h));
  }
  for (Vec2& x : xs) grid.clamp_to_padded(x);
  return xs;
}

namespace detail {

inline void restart_short(Particle& p, const MacGrid& grid, const VelocitySample& s) {
  p.T_bc = Mat2::identity();
  p.m_b = s.velocity;
  p.grad_m_b = s.gradient;
  if (grid.has_scalar()) p.grad_rho_b = grid.sample_scalar(p.x).gradient;
}

}  // namespace detail

/// Restarts the long map (and, aligned with it, the short map) from the grid.
/// With `none`, positions are kept unless the system is empty, in which case
/// it is seeded with the uniform lattice.
inline void reinit_long(ParticleSystem& ps, const MacGrid& grid, Redistribution strategy, int ppc,
                        std::mt19937_64& rng) {
  if (strategy != Redistribution::none || ps.particles.empty()) {
    const auto xs =
        seed_positions(grid, strategy == Redistribution::none ? Redistribution::uniform : strategy, ppc, rng);
    ps.particles.assign(xs.size(), Particle{});
    for (std::size_t k = 0; k < xs.size(); ++k) ps.particles[k].x = xs[k];
  }
  for (Particle& p : ps.particles) {
    grid.clamp_to_padded(p.x);
    const VelocitySample s = grid.sample_velocity(p.x);
    p.T_ab = Mat2::identity();
    p.m_a = s.velocity;
    if (grid.has_scalar()) p.rho_s = grid.sample_scalar(p.x).value;
    detail::restart_short(p, grid, s);
  }
}

/// Restarts the short map: folds T_bc into T_ab and resamples the short-map
/// snapshots (impulse, impulse gradient, scalar gradient) from the grid.
inline void reinit_short(ParticleSystem& ps, const MacGrid& grid) {
  for (Particle& p : ps.particles) {
    p.T_ab = compose_long(p.T_ab, p.T_bc);
    detail::restart_short(p, grid, grid.sample_velocity(p.x));
  }
}

/// Advances every particle position and short-map Jacobian by one RK4 step.
/// Returns the number of clamp events.
template <class Sampler>
int march_particles(ParticleSystem& ps, const Sampler& field, double dt) {
  int clamps = 0;
  for (Particle& p : ps.particles) {
    const Rk4Result r = rk4_march(p.x, p.T_bc, field, dt);
    p.x = r.x;
    p.T_bc = r.J;
    clamps += r.clamps;
  }
  return clamps;
}

}  // namespace pfm
