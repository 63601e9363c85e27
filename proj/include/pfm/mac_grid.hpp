#pragma once
// Staggered (MAC) grid: x-velocity on vertical faces, y-velocity on horizontal
// faces, optional cell-centered scalar. Storage is row-major with x fastest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pfm/error.hpp"
#include "pfm/kernel.hpp"
#include "pfm/linalg.hpp"

namespace pfm {

/// Dense 2D array indexed (i, j) with i fastest.
class Field2 {
 public:
  Field2() = default;
  Field2(int ni, int nj, double value = 0.0)
      : ni_(ni), nj_(nj), data_(static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj), value) {}

  int ni() const { return ni_; }
  int nj() const { return nj_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(ni_) + static_cast<std::size_t>(i);
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }
  friend bool operator==(const Field2&, const Field2&) = default;

 private:
  int ni_ = 0;
  int nj_ = 0;
  std::vector<double> data_;
};

/// Velocity and its Jacobian grad(r, c) = d u_r / d x_c at a point.
struct VelocitySample {
  Vec2 velocity;
  Mat2 gradient;
};

struct ScalarSample {
  double value = 0.0;
  Vec2 gradient;
};

/// Particles and backtraces stay at least this many cells away from each wall.
inline constexpr double kPaddingCells = 1.5;

class MacGrid {
 public:
  MacGrid() = default;
  MacGrid(int nx, int ny, double dx)
      : nx_(nx), ny_(ny), dx_(dx), u_(nx + 1, ny), v_(nx, ny + 1), wu_(nx + 1, ny), wv_(nx, ny + 1) {
    if (nx < 4 || ny < 4) throw Error("MacGrid needs at least 4 cells per axis");
    if (!(dx > 0.0)) throw Error("MacGrid cell width must be positive");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double length_x() const { return nx_ * dx_; }
  double length_y() const { return ny_ * dx_; }

  Field2& u() { return u_; }
  const Field2& u() const { return u_; }
  Field2& v() { return v_; }
  const Field2& v() const { return v_; }
  Field2& wu() { return wu_; }
  const Field2& wu() const { return wu_; }
  Field2& wv() { return wv_; }
  const Field2& wv() const { return wv_; }

  bool has_scalar() const { return scalar_.has_value(); }
  void enable_scalar() {
    if (!scalar_) scalar_ = Field2(nx_, ny_);
  }
  Field2& scalar() { return scalar_.value(); }
  const Field2& scalar() const { return scalar_.value(); }

  Lattice u_lattice() const { return {vec2(0.0, 0.5 * dx_), nx_ + 1, ny_}; }
  Lattice v_lattice() const { return {vec2(0.5 * dx_, 0.0), nx_, ny_ + 1}; }
  Lattice cell_lattice() const { return {vec2(0.5 * dx_, 0.5 * dx_), nx_, ny_}; }

  Vec2 u_position(int i, int j) const { return vec2(i * dx_, (j + 0.5) * dx_); }
  Vec2 v_position(int i, int j) const { return vec2((i + 0.5) * dx_, j * dx_); }
  Vec2 cell_center(int i, int j) const { return vec2((i + 0.5) * dx_, (j + 0.5) * dx_); }

  double padded_lo() const { return kPaddingCells * dx_; }
  double padded_hi_x() const { return length_x() - kPaddingCells * dx_; }
  double padded_hi_y() const { return length_y() - kPaddingCells * dx_; }

  bool inside_padded(const Vec2& x) const {
    return x[0] >= padded_lo() && x[0] <= padded_hi_x() && x[1] >= padded_lo() && x[1] <= padded_hi_y();
  }

  /// Clamps x into the padded domain; returns true when x moved.
  bool clamp_to_padded(Vec2& x) const {
    const Vec2 before = x;
    x[0] = std::clamp(x[0], padded_lo(), padded_hi_x());
    x[1] = std::clamp(x[1], padded_lo(), padded_hi_y());
    return !(x == before);
  }

  /// Free-slip walls: normal velocity on the domain boundary is zero.
  void zero_boundary_normals() { zero_boundary_normals(u_, v_); }
  static void zero_boundary_normals(Field2& u, Field2& v) {
    for (int j = 0; j < u.nj(); ++j) {
      u(0, j) = 0.0;
      u(u.ni() - 1, j) = 0.0;
    }
    for (int i = 0; i < v.ni(); ++i) {
      v(i, 0) = 0.0;
      v(i, v.nj() - 1) = 0.0;
    }
  }

  /// Interpolated velocity and Jacobian; each component uses its own lattice.
  VelocitySample sample_velocity(const Vec2& x) const { return sample_velocity(u_, v_, x); }

  VelocitySample sample_velocity(const Field2& u, const Field2& v, const Vec2& x) const {
    const double inv_dx = 1.0 / dx_;
    VelocitySample out;
    {
      const Stencil1D sx = stencil_1d(x[0] * inv_dx, inv_dx);
      const Stencil1D sy = stencil_1d(x[1] * inv_dx - 0.5, inv_dx);
      if (!stencil_inside(sx, nx_ + 1) || !stencil_inside(sy, ny_)) throw_out_of_domain(x);
      accumulate(u, sx, sy, out.velocity[0], out.gradient(0, 0), out.gradient(0, 1));
    }
    {
      const Stencil1D sx = stencil_1d(x[0] * inv_dx - 0.5, inv_dx);
      const Stencil1D sy = stencil_1d(x[1] * inv_dx, inv_dx);
      if (!stencil_inside(sx, nx_) || !stencil_inside(sy, ny_ + 1)) throw_out_of_domain(x);
      accumulate(v, sx, sy, out.velocity[1], out.gradient(1, 0), out.gradient(1, 1));
    }
    return out;
  }

  /// Interpolated cell-centered scalar and its gradient.
  ScalarSample sample_scalar(const Field2& field, const Vec2& x) const {
    const double inv_dx = 1.0 / dx_;
    const Stencil1D sx = stencil_1d(x[0] * inv_dx - 0.5, inv_dx);
    const Stencil1D sy = stencil_1d(x[1] * inv_dx - 0.5, inv_dx);
    if (!stencil_inside(sx, nx_) || !stencil_inside(sy, ny_)) throw_out_of_domain(x);
    ScalarSample s;
    accumulate(field, sx, sy, s.value, s.gradient[0], s.gradient[1]);
    return s;
  }
  ScalarSample sample_scalar(const Vec2& x) const { return sample_scalar(scalar(), x); }

 private:
  static void accumulate(const Field2& f, const Stencil1D& sx, const Stencil1D& sy, double& value,
                         double& ddx, double& ddy) {
    double val = 0.0, gx = 0.0, gy = 0.0;
    for (int b = 0; b < 3; ++b) {
      const double* row = &f.data()[f.index(sx.base, sy.base + b)];
      const double r0 = sx.w[0] * row[0] + sx.w[1] * row[1] + sx.w[2] * row[2];
      const double r1 = sx.dw[0] * row[0] + sx.dw[1] * row[1] + sx.dw[2] * row[2];
      val += sy.w[b] * r0;
      gx += sy.w[b] * r1;
      gy += sy.dw[b] * r0;
    }
    value = val;
    ddx = gx;
    ddy = gy;
  }

  int nx_ = 0;
  int ny_ = 0;
  double dx_ = 1.0;
  Field2 u_, v_;
  Field2 wu_, wv_;
  std::optional<Field2> scalar_;
};

/// Cell-centered (u_right - u_left)/dx + (v_top - v_bottom)/dx.
inline Field2 divergence(const Field2& u, const Field2& v, double dx) {
  const int nx = v.ni();
  const int ny = u.nj();
  Field2 div(nx, ny);
  const double inv_dx = 1.0 / dx;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) div(i, j) = (u(i + 1, j) - u(i, j) + v(i, j + 1) - v(i, j)) * inv_dx;
  return div;
}

inline Field2 divergence(const MacGrid& grid) { return divergence(grid.u(), grid.v(), grid.dx()); }

/// Per-face weighted sums for a normalized particle-to-grid pass.
/// Faces whose weight sum stays below `eps` keep the value passed as fallback.
class FaceAccumulator {
 public:
  explicit FaceAccumulator(const MacGrid& grid)
      : nu_(grid.u().ni(), grid.u().nj()),
        nv_(grid.v().ni(), grid.v().nj()),
        wu_(grid.u().ni(), grid.u().nj()),
        wv_(grid.v().ni(), grid.v().nj()) {}

  Field2& numerator_u() { return nu_; }
  Field2& numerator_v() { return nv_; }
  Field2& weight_u() { return wu_; }
  Field2& weight_v() { return wv_; }

  /// Writes value = sum(w * contribution) / sum(w) wherever sum(w) >= eps.
  void normalize_into(Field2& u, Field2& v, double eps) const {
    finish(nu_, wu_, u, eps);
    finish(nv_, wv_, v, eps);
  }

  /// Number of faces that fell back to their previous value.
  int empty_faces(double eps) const {
    int n = 0;
    for (double w : wu_.data()) n += w < eps;
    for (double w : wv_.data()) n += w < eps;
    return n;
  }

 private:
  static void finish(const Field2& num, const Field2& w, Field2& out, double eps) {
    for (std::size_t k = 0; k < out.size(); ++k)
      if (w.data()[k] >= eps) out.data()[k] = num.data()[k] / w.data()[k];
  }

  Field2 nu_, nv_, wu_, wv_;
};

/// Weight-sum threshold below which a face counts as empty after P2G.
inline constexpr double kEmptyFaceEpsilon = 1e-8;

}  // namespace pfm
