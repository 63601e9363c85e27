#pragma once
// Mapping impulse and its gradient along particle flow maps and transferring
// them to the grid with a first-order Taylor term.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfm/flow_map.hpp"
#include "pfm/kernel.hpp"
#include "pfm/linalg.hpp"
#include "pfm/mac_grid.hpp"

namespace pfm {

/// m_c = T_ac^T m_a.
inline Vec2 map_impulse(const Vec2& m_a, const Mat2& T_ac) { return transpose_times(T_ac, m_a); }

/// Inputs of the optional second-derivative term of the gradient map.
struct HessianTerm {
  Tensor2 grad_T_bc;  // grad_T_bc(i, j, k) = d (T_bc)_ij / d x_k
  Vec2 m_b;
};

/// grad_m_c = T_bc^T grad_m_b T_bc, plus sum_i m_b[i] d(T_bc)_ij/dx_k when the
/// Hessian term is supplied.
inline Mat2 map_impulse_gradient(const Mat2& grad_m_b, const Mat2& T_bc,
                                 const std::optional<HessianTerm>& hessian = std::nullopt) {
  Mat2 g = transpose(T_bc) * grad_m_b * T_bc;
  if (hessian) {
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i) g(j, k) += hessian->m_b[i] * hessian->grad_T_bc(i, j, k);
  }
  return g;
}

/// Per-particle quantities at the current time, rebuilt every step.
struct TransportedState {
  std::vector<Vec2> m_c;
  std::vector<Mat2> grad_m_c;
  std::optional<std::vector<Tensor2>> grad_T_bc;
};

/// Particle indices bucketed by containing cell, in particle order.
class CellBuckets {
 public:
  CellBuckets(const ParticleSystem& ps, const MacGrid& grid) : nx_(grid.nx()), ny_(grid.ny()) {
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    cell_of_.resize(ps.count());
    const double inv_dx = 1.0 / grid.dx();
    for (std::size_t p = 0; p < ps.count(); ++p) {
      const int i = std::clamp(static_cast<int>(ps.particles[p].x[0] * inv_dx), 0, nx_ - 1);
      const int j = std::clamp(static_cast<int>(ps.particles[p].x[1] * inv_dx), 0, ny_ - 1);
      cell_of_[p] = j * nx_ + i;
      ++start_[static_cast<std::size_t>(cell_of_[p]) + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    items_.resize(ps.count());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t p = 0; p < ps.count(); ++p)
      items_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of_[p])]++)] = static_cast<int>(p);
  }

  int cell_of(std::size_t p) const { return cell_of_[p]; }

  /// Calls fn(k) for every particle k in cells within `hops` of cell (i, j).
  template <class Fn>
  void for_each_near(int i, int j, int hops, Fn&& fn) const {
    for (int b = std::max(0, j - hops); b <= std::min(ny_ - 1, j + hops); ++b)
      for (int a = std::max(0, i - hops); a <= std::min(nx_ - 1, i + hops); ++a) {
        const std::size_t c = static_cast<std::size_t>(b) * nx_ + a;
        for (int s = start_[c]; s < start_[c + 1]; ++s) fn(items_[static_cast<std::size_t>(s)]);
      }
  }

 private:
  int nx_, ny_;
  std::vector<int> start_;
  std::vector<int> cell_of_;
  std::vector<int> items_;
};

struct HessianResult {
  std::vector<Tensor2> grad_T_bc;
  std::vector<std::uint8_t> isolated;  // 1 where no neighbour lies within the kernel support
  int isolated_count = 0;
};

/// Particle estimate of grad(T_bc): sum_k grad_w_pk (x) T_bc(k) / sum_k w_pk
/// over neighbours within 1.5 cells, gradients taken with respect to x_p.
inline HessianResult compute_hessian(const ParticleSystem& ps, const MacGrid& grid) {
  const CellBuckets buckets(ps, grid);
  const double inv_dx = 1.0 / grid.dx();
  HessianResult out;
  out.grad_T_bc.assign(ps.count(), Tensor2{});
  out.isolated.assign(ps.count(), 0);
  for (std::size_t p = 0; p < ps.count(); ++p) {
    const Vec2 xp = ps.particles[p].x;
    const int cell = buckets.cell_of(p);
    Tensor2 acc;
    double wsum = 0.0;
    int neighbours = 0;
    buckets.for_each_near(cell % grid.nx(), cell / grid.nx(), 2, [&](int k) {
      const Vec2 r = (xp - ps.particles[static_cast<std::size_t>(k)].x) * inv_dx;
      const double wx = kernel_weight(r[0]);
      const double wy = kernel_weight(r[1]);
      const double w = wx * wy;
      if (w <= 0.0) return;
      wsum += w;
      if (static_cast<std::size_t>(k) == p) return;
      ++neighbours;
      const Vec2 gw = vec2(kernel_derivative(r[0]) * wy * inv_dx, wx * kernel_derivative(r[1]) * inv_dx);
      const Mat2& T = ps.particles[static_cast<std::size_t>(k)].T_bc;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int d = 0; d < 2; ++d) acc(i, j, d) += gw[d] * T(i, j);
    });
    if (neighbours == 0) {
      out.isolated[p] = 1;
      ++out.isolated_count;
      continue;
    }
    for (double& a : acc.a) a /= wsum;
    out.grad_T_bc[p] = acc;
  }
  return out;
}

/// Computes m_c and grad_m_c for every particle from its snapshots and maps.
inline TransportedState transport_impulse(const ParticleSystem& ps, const HessianResult* hessian = nullptr) {
  TransportedState st;
  st.m_c.resize(ps.count());
  st.grad_m_c.resize(ps.count());
  for (std::size_t p = 0; p < ps.count(); ++p) {
    const Particle& q = ps.particles[p];
    st.m_c[p] = map_impulse(q.m_a, compose_long(q.T_ab, q.T_bc));
    if (hessian)
      st.grad_m_c[p] = map_impulse_gradient(q.grad_m_b, q.T_bc, HessianTerm{hessian->grad_T_bc[p], q.m_b});
    else
      st.grad_m_c[p] = map_impulse_gradient(q.grad_m_b, q.T_bc);
  }
  if (hessian) st.grad_T_bc = hessian->grad_T_bc;
  return st;
}

namespace detail {

// Adds w * (value + grad . (x_node - x_p)) and w for the 3x3 nodes of one lattice.
inline void scatter_taylor(Field2& num, Field2& wsum, const Lattice& lat, double dx, const Vec2& xp, double value,
                           const Vec2& grad) {
  const double inv_dx = 1.0 / dx;
  const Stencil1D sx = stencil_1d((xp[0] - lat.origin[0]) * inv_dx, inv_dx);
  const Stencil1D sy = stencil_1d((xp[1] - lat.origin[1]) * inv_dx, inv_dx);
  if (!stencil_inside(sx, lat.ni) || !stencil_inside(sy, lat.nj)) throw_out_of_domain(xp);
  for (int b = 0; b < 3; ++b) {
    const int j = sy.base + b;
    const double ry = lat.origin[1] + j * dx - xp[1];
    for (int a = 0; a < 3; ++a) {
      const int i = sx.base + a;
      const double rx = lat.origin[0] + i * dx - xp[0];
      const double w = sx.w[a] * sy.w[b];
      const std::size_t k = num.index(i, j);
      num.data()[k] += w * (value + grad[0] * rx + grad[1] * ry);
      wsum.data()[k] += w;
    }
  }
}

}  // namespace detail

/// Normalized P2G of impulse with the Taylor term, each component on its own
/// face lattice. Faces with weight sum below kEmptyFaceEpsilon keep their
/// current grid value. Weight sums are stored in grid.wu()/wv(). Returns the
/// number of empty faces.
inline int p2g_impulse(const ParticleSystem& ps, const std::vector<Vec2>& m_c, const std::vector<Mat2>& grad_m_c,
                       MacGrid& grid) {
  FaceAccumulator acc(grid);
  const Lattice lu = grid.u_lattice();
  const Lattice lv = grid.v_lattice();
  for (std::size_t p = 0; p < ps.count(); ++p) {
    const Vec2& xp = ps.particles[p].x;
    const Mat2& g = grad_m_c[p];
    detail::scatter_taylor(acc.numerator_u(), acc.weight_u(), lu, grid.dx(), xp, m_c[p][0], vec2(g(0, 0), g(0, 1)));
    detail::scatter_taylor(acc.numerator_v(), acc.weight_v(), lv, grid.dx(), xp, m_c[p][1], vec2(g(1, 0), g(1, 1)));
  }
  acc.normalize_into(grid.u(), grid.v(), kEmptyFaceEpsilon);
  grid.wu() = acc.weight_u();
  grid.wv() = acc.weight_v();
  return acc.empty_faces(kEmptyFaceEpsilon);
}

/// How the scalar gradient carried by particles enters the scalar P2G.
enum class ScalarGradientMode {
  evolved,  // grad_rho_c = T_bc^T grad_rho_b
  stored,   // grad_rho_b used as sampled at the last short restart
  none,     // value-only transfer
};

inline std::string to_string(ScalarGradientMode m) {
  switch (m) {
    case ScalarGradientMode::evolved: return "evolved";
    case ScalarGradientMode::stored: return "stored";
    case ScalarGradientMode::none: return "none";
  }
  return "evolved";
}

inline Vec2 mapped_scalar_gradient(const Particle& p, ScalarGradientMode mode) {
  switch (mode) {
    case ScalarGradientMode::evolved: return transpose_times(p.T_bc, p.grad_rho_b);
    case ScalarGradientMode::stored: return p.grad_rho_b;
    case ScalarGradientMode::none: return Vec2{};
  }
  return Vec2{};
}

/// Cell-centered normalized P2G of particle scalar values with the Taylor
/// term. Empty cells keep their current value.
inline void p2g_scalar(const ParticleSystem& ps, ScalarGradientMode mode, MacGrid& grid) {
  grid.enable_scalar();
  Field2& out = grid.scalar();
  Field2 num(out.ni(), out.nj()), wsum(out.ni(), out.nj());
  const Lattice lc = grid.cell_lattice();
  for (const Particle& p : ps.particles)
    detail::scatter_taylor(num, wsum, lc, grid.dx(), p.x, p.rho_s, mapped_scalar_gradient(p, mode));
  for (std::size_t k = 0; k < out.size(); ++k)
    if (wsum.data()[k] >= kEmptyFaceEpsilon) out.data()[k] = num.data()[k] / wsum.data()[k];
}

}  // namespace pfm
