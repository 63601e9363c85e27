#pragma once
// Quadratic B-spline transfer kernel and 3x3 stencils on staggered lattices.

#include <array>
#include <cmath>
#include <sstream>

#include "pfm/error.hpp"
#include "pfm/linalg.hpp"

namespace pfm {

/// Quadratic B-spline N(r), r in cell units. Support is |r| < 3/2.
constexpr double kernel_weight(double r) {
  const double a = r < 0.0 ? -r : r;
  if (a < 0.5) return 0.75 - a * a;
  if (a < 1.5) return 0.5 * (1.5 - a) * (1.5 - a);
  return 0.0;
}

/// dN/dr.
constexpr double kernel_derivative(double r) {
  const double a = r < 0.0 ? -r : r;
  const double s = r < 0.0 ? -1.0 : 1.0;
  if (a < 0.5) return -2.0 * r;
  if (a < 1.5) return -s * (1.5 - a);
  return 0.0;
}

/// A regular lattice of sample nodes: node (i, j) sits at origin + dx * (i, j)
/// for 0 <= i < ni, 0 <= j < nj.
struct Lattice {
  Vec2 origin;
  int ni = 0;
  int nj = 0;
};

/// Weights of the three lattice nodes that bracket a coordinate along one axis.
struct Stencil1D {
  int base = 0;
  std::array<double, 3> w{};
  std::array<double, 3> dw{};  // dN/dx, 1/length units
};

/// base = floor(s - 1/2) places s in [base + 1/2, base + 3/2), so the nodes
/// base, base+1, base+2 carry every non-zero weight.
inline Stencil1D stencil_1d(double s, double inv_dx) {
  Stencil1D st;
  st.base = static_cast<int>(std::floor(s - 0.5));
  const double f = s - st.base;  // distance to node `base`, in [0.5, 1.5)
  const double a0 = 1.5 - f;
  const double a1 = f - 1.0;
  const double a2 = f - 0.5;
  st.w = {0.5 * a0 * a0, 0.75 - a1 * a1, 0.5 * a2 * a2};
  st.dw = {-a0 * inv_dx, -2.0 * a1 * inv_dx, a2 * inv_dx};
  return st;
}

/// Tensor-product stencil: weights(a, b) belongs to node (base_i + a, base_j + b).
struct KernelStencil {
  std::array<int, 2> base{};
  std::array<std::array<double, 3>, 3> weights{};
  std::array<std::array<Vec2, 3>, 3> weight_gradients{};  // d weight / d x
};

inline bool stencil_inside(const Stencil1D& st, int n) { return st.base >= 0 && st.base + 2 < n; }

[[noreturn]] inline void throw_out_of_domain(const Vec2& x) {
  std::ostringstream os;
  os << "position (" << x[0] << ", " << x[1] << ") has no full kernel stencil";
  throw OutOfDomainError(os.str());
}

/// Stencil of the 3x3 lattice nodes within 1.5 cells of x.
/// Throws OutOfDomainError when any of those nodes lies outside the lattice.
inline KernelStencil build_stencil(const Vec2& x, const Lattice& lattice, double dx) {
  const double inv_dx = 1.0 / dx;
  const Stencil1D sx = stencil_1d((x[0] - lattice.origin[0]) * inv_dx, inv_dx);
  const Stencil1D sy = stencil_1d((x[1] - lattice.origin[1]) * inv_dx, inv_dx);
  if (!stencil_inside(sx, lattice.ni) || !stencil_inside(sy, lattice.nj)) throw_out_of_domain(x);
  KernelStencil k;
  k.base = {sx.base, sy.base};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      k.weights[a][b] = sx.w[a] * sy.w[b];
      k.weight_gradients[a][b] = vec2(sx.dw[a] * sy.w[b], sx.w[a] * sy.dw[b]);
    }
  return k;
}

}  // namespace pfm
