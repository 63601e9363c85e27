#pragma once
// Initial conditions. Each scene has a closed-form velocity field that is
// sampled on the faces and then projected once so the start is divergence free.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pfm/error.hpp"
#include "pfm/linalg.hpp"
#include "pfm/mac_grid.hpp"
#include "pfm/projection.hpp"

namespace pfm {

enum class SceneId { leapfrog2d, single_vortex, taylor2d };

inline std::string to_string(SceneId id) {
  switch (id) {
    case SceneId::leapfrog2d: return "leapfrog2d";
    case SceneId::single_vortex: return "single_vortex";
    case SceneId::taylor2d: return "taylor2d";
  }
  return "leapfrog2d";
}

struct LeapfrogParams {
  double strength = 0.005;
  double delta = 0.02;  // mollification support
  double x = 0.0625;
  std::array<double, 4> ys{0.26, 0.38, 0.62, 0.74};
};

struct SingleVortexParams {
  double amplitude = 0.01;
  double delta = 0.02;
  Vec2 center = vec2(0.5, 0.5);
};

struct TaylorParams {
  double amplitude = 1.0;  // peak azimuthal speed U
  double delta = 0.3;
  double separation = 0.8;
};

struct SceneSpec {
  SceneId id = SceneId::leapfrog2d;
  LeapfrogParams leapfrog;
  SingleVortexParams single_vortex;
  TaylorParams taylor;
  bool smoke = false;  // seed a cell-centered scalar around the vortex cores
};

/// Adapts a closed-form field (velocity(x), gradient(x)) to the sampler
/// interface used by the RK4 marcher. No clamping.
template <class Field>
struct AnalyticSampler {
  const Field& field;
  VelocitySample sample(const Vec2& x) const { return {field.velocity(x), field.gradient(x)}; }
  bool clamp(Vec2&) const { return false; }
};

/// Steady single vortex: u = omega(r) (-(y - cy), x - cx),
/// omega(r) = -A (1 - exp(-r^2/delta^2)) / r.
class SingleVortexField {
 public:
  explicit SingleVortexField(SingleVortexParams p = {}) : p_(p) {}

  double angular_velocity(double r) const {
    if (r < 1e-300) return 0.0;
    return p_.amplitude * std::expm1(-r * r / (p_.delta * p_.delta)) / r;
  }

  Vec2 velocity(const Vec2& x) const {
    const Vec2 d = x - p_.center;
    const double w = angular_velocity(norm(d));
    return vec2(-w * d[1], w * d[0]);
  }

  Mat2 gradient(const Vec2& x) const {
    const Vec2 d = x - p_.center;
    const double r = norm(d);
    if (r < 1e-12) return Mat2::zero();
    const double w = angular_velocity(r);
    const double d2 = p_.delta * p_.delta;
    const double e = std::exp(-r * r / d2);
    const double f = -std::expm1(-r * r / d2);
    // d omega / dr divided by r
    const double dw_r = -p_.amplitude * ((2.0 * r / d2) * e * r - f) / (r * r) / r;
    return mat2(-dw_r * d[0] * d[1], -w - dw_r * d[1] * d[1], w + dw_r * d[0] * d[0], dw_r * d[0] * d[1]);
  }

  const SingleVortexParams& params() const { return p_; }

 private:
  SingleVortexParams p_;
};

/// Superposition of mollified point vortices. A vortex of signed strength G
/// contributes G (1 - exp(-r^2/delta^2)) / r^2 * (dy, -dx): positive strength
/// turns clockwise.
class PointVortexField {
 public:
  struct Vortex {
    Vec2 center;
    double strength;
  };

  PointVortexField(std::vector<Vortex> vortices, double delta) : vortices_(std::move(vortices)), delta_(delta) {}

  Vec2 velocity(const Vec2& x) const {
    Vec2 u;
    for (const Vortex& v : vortices_) {
      const Vec2 d = x - v.center;
      const double g = v.strength * profile(dot(d, d));
      u += vec2(g * d[1], -g * d[0]);
    }
    return u;
  }

  Mat2 gradient(const Vec2& x) const {
    Mat2 G;
    for (const Vortex& v : vortices_) {
      const Vec2 d = x - v.center;
      const double r2 = dot(d, d);
      const double g = v.strength * profile(r2);
      const double dg = v.strength * profile_derivative(r2);  // d g / d (r^2)
      // u = g (dy, -dx); d g / dx_k = dg * 2 d_k
      G(0, 0) += 2.0 * dg * d[0] * d[1];
      G(0, 1) += 2.0 * dg * d[1] * d[1] + g;
      G(1, 0) += -2.0 * dg * d[0] * d[0] - g;
      G(1, 1) += -2.0 * dg * d[0] * d[1];
    }
    return G;
  }

  const std::vector<Vortex>& vortices() const { return vortices_; }

 private:
  // (1 - exp(-r^2/delta^2)) / r^2, finite at r = 0.
  double profile(double r2) const {
    const double d2 = delta_ * delta_;
    if (r2 < 1e-12 * d2) return 1.0 / d2 - 0.5 * r2 / (d2 * d2);
    return -std::expm1(-r2 / d2) / r2;
  }
  double profile_derivative(double r2) const {
    const double d2 = delta_ * delta_;
    if (r2 < 1e-12 * d2) return -0.5 / (d2 * d2);
    const double e = std::exp(-r2 / d2);
    return (e / d2 * r2 + std::expm1(-r2 / d2)) / (r2 * r2);
  }

  std::vector<Vortex> vortices_;
  double delta_;
};

/// Taylor vortices: omega(r) = U/delta (2 - r^2/delta^2) exp((1 - r^2/delta^2)/2),
/// whose azimuthal speed is U (r/delta) exp((1 - r^2/delta^2)/2), counter-clockwise.
class TaylorVortexField {
 public:
  TaylorVortexField(std::vector<Vec2> centers, double amplitude, double delta)
      : centers_(std::move(centers)), amplitude_(amplitude), delta_(delta) {}

  Vec2 velocity(const Vec2& x) const {
    Vec2 u;
    for (const Vec2& c : centers_) {
      const Vec2 d = x - c;
      const double s = speed_over_r(dot(d, d));
      u += vec2(-s * d[1], s * d[0]);
    }
    return u;
  }

  Mat2 gradient(const Vec2& x) const {
    Mat2 G;
    for (const Vec2& c : centers_) {
      const Vec2 d = x - c;
      const double r2 = dot(d, d);
      const double s = speed_over_r(r2);
      const double ds = -s / (delta_ * delta_);  // d s / d(r^2) * 2
      G(0, 0) += -ds * d[0] * d[1];
      G(0, 1) += -s - ds * d[1] * d[1];
      G(1, 0) += s + ds * d[0] * d[0];
      G(1, 1) += ds * d[0] * d[1];
    }
    return G;
  }

  /// Vorticity of one vortex at radius r.
  double vorticity(double r) const {
    const double q = r * r / (delta_ * delta_);
    return amplitude_ / delta_ * (2.0 - q) * std::exp(0.5 * (1.0 - q));
  }
  double azimuthal_speed(double r) const { return speed_over_r(r * r) * r; }

 private:
  double speed_over_r(double r2) const {
    return amplitude_ / delta_ * std::exp(0.5 * (1.0 - r2 / (delta_ * delta_)));
  }

  std::vector<Vec2> centers_;
  double amplitude_;
  double delta_;
};

inline PointVortexField leapfrog_field(const LeapfrogParams& p, double domain_height) {
  std::vector<PointVortexField::Vortex> vs;
  const double mid = 0.5 * domain_height;
  for (double y : p.ys) vs.push_back({vec2(p.x, y), y > mid ? -p.strength : p.strength});
  return PointVortexField(std::move(vs), p.delta);
}

inline TaylorVortexField taylor_field(const TaylorParams& p, const Vec2& domain_center) {
  const double h = 0.5 * p.separation;
  return TaylorVortexField({domain_center - vec2(h, 0.0), domain_center + vec2(h, 0.0)}, p.amplitude, p.delta);
}

/// Samples a closed-form field on every u and v face (boundary faces included).
template <class Field>
void sample_on_faces(const Field& field, MacGrid& grid) {
  for (int j = 0; j < grid.u().nj(); ++j)
    for (int i = 0; i < grid.u().ni(); ++i) grid.u()(i, j) = field.velocity(grid.u_position(i, j))[0];
  for (int j = 0; j < grid.v().nj(); ++j)
    for (int i = 0; i < grid.v().ni(); ++i) grid.v()(i, j) = field.velocity(grid.v_position(i, j))[1];
}

namespace detail {

inline void check_domain(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("scene", what);
}

inline void seed_smoke(MacGrid& grid, const std::vector<Vec2>& centers, double radius) {
  grid.enable_scalar();
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      double rho = 0.0;
      for (const Vec2& c : centers) {
        const Vec2 d = grid.cell_center(i, j) - c;
        rho += std::exp(-dot(d, d) / (radius * radius));
      }
      grid.scalar()(i, j) = std::min(rho, 1.0);
    }
}

}  // namespace detail

inline SolveStats init_leapfrog2d(const SceneSpec& spec, MacGrid& grid, const PoissonSolver& solver) {
  detail::check_domain(grid.nx() == 4 * grid.ny(), "leapfrog2d needs a 4:1 domain");
  const PointVortexField field = leapfrog_field(spec.leapfrog, grid.length_y());
  sample_on_faces(field, grid);
  if (spec.smoke) {
    std::vector<Vec2> centers;
    for (const auto& v : field.vortices()) centers.push_back(v.center);
    detail::seed_smoke(grid, centers, 2.0 * spec.leapfrog.delta);
  }
  return project(grid, solver);
}

inline SolveStats init_single_vortex(const SceneSpec& spec, MacGrid& grid, const PoissonSolver& solver) {
  detail::check_domain(grid.nx() == grid.ny() && std::abs(grid.length_x() - 1.0) < 1e-12,
                       "single_vortex needs the unit square");
  const SingleVortexField field(spec.single_vortex);
  sample_on_faces(field, grid);
  if (spec.smoke) detail::seed_smoke(grid, {spec.single_vortex.center + vec2(0.0, 0.25)}, 0.05);
  return project(grid, solver);
}

inline SolveStats init_taylor2d(const SceneSpec& spec, MacGrid& grid, const PoissonSolver& solver) {
  detail::check_domain(grid.nx() == grid.ny(), "taylor2d needs a square domain");
  const Vec2 center = vec2(0.5 * grid.length_x(), 0.5 * grid.length_y());
  const TaylorVortexField field = taylor_field(spec.taylor, center);
  sample_on_faces(field, grid);
  if (spec.smoke) {
    const double h = 0.5 * spec.taylor.separation;
    detail::seed_smoke(grid, {center - vec2(h, 0.0), center + vec2(h, 0.0)}, spec.taylor.delta);
  }
  return project(grid, solver);
}

inline SolveStats init_scene(const SceneSpec& spec, MacGrid& grid, const PoissonSolver& solver) {
  switch (spec.id) {
    case SceneId::leapfrog2d: return init_leapfrog2d(spec, grid, solver);
    case SceneId::single_vortex: return init_single_vortex(spec, grid, solver);
    case SceneId::taylor2d: return init_taylor2d(spec, grid, solver);
  }
  return {};
}

}  // namespace pfm
