#pragma once
// Gauge projection: solve lap(phi) = div(m) with homogeneous Neumann walls and
// subtract grad(phi) from the face field.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pfm/error.hpp"
#include "pfm/mac_grid.hpp"

namespace pfm {

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // final max|r| / max|b|
};

struct SolverSettings {
  double tolerance = 1e-6;
  int max_iterations = 2000;
};

/// Face-centered (phi_right - phi_left)/dx on interior faces; boundary normal
/// faces receive zero.
inline void pressure_gradient(const Field2& phi, double dx, Field2& gu, Field2& gv) {
  const int nx = phi.ni();
  const int ny = phi.nj();
  gu = Field2(nx + 1, ny);
  gv = Field2(nx, ny + 1);
  const double inv_dx = 1.0 / dx;
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) gu(i, j) = (phi(i, j) - phi(i - 1, j)) * inv_dx;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) gv(i, j) = (phi(i, j) - phi(i, j - 1)) * inv_dx;
}

/// Modified-incomplete-Cholesky preconditioned CG for the 5-point Neumann
/// Laplacian on an all-fluid nx x ny box. The operator is scaled by dx^2 so
/// its stencil is integer valued: (A p)_c = n_c p_c - sum_neighbours p.
class PoissonSolver {
 public:
  PoissonSolver() = default;
  PoissonSolver(int nx, int ny, SolverSettings settings = {})
      : nx_(nx), ny_(ny), settings_(settings), precon_(static_cast<std::size_t>(nx) * ny) {
    build_preconditioner();
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const SolverSettings& settings() const { return settings_; }

  /// Solves A phi = rhs (rhs already scaled by dx^2). rhs is mean-corrected;
  /// the returned phi has zero mean. Throws SolverError on non-convergence.
  SolveStats solve(std::vector<double> rhs, std::vector<double>& phi) const {
    const std::size_t n = rhs.size();
    remove_mean(rhs);
    phi.assign(n, 0.0);
    const double bnorm = max_abs(rhs);
    SolveStats stats;
    if (bnorm < 1e-300) return stats;

    std::vector<double> r = rhs, z(n), s(n), q(n);
    apply_preconditioner(r, z);
    remove_mean(z);
    s = z;
    double rho = dot(z, r);
    for (int it = 1; it <= settings_.max_iterations; ++it) {
      apply(s, q);
      const double alpha = rho / dot(s, q);
      for (std::size_t k = 0; k < n; ++k) {
        phi[k] += alpha * s[k];
        r[k] -= alpha * q[k];
      }
      stats.iterations = it;
      stats.residual = max_abs(r) / bnorm;
      if (stats.residual <= settings_.tolerance) {
        remove_mean(phi);
        return stats;
      }
      apply_preconditioner(r, z);
      remove_mean(z);
      const double rho_new = dot(z, r);
      const double beta = rho_new / rho;
      rho = rho_new;
      for (std::size_t k = 0; k < n; ++k) s[k] = z[k] + beta * s[k];
    }
    throw SolverError(stats.iterations, stats.residual);
  }

  /// q = A p.
  void apply(const std::vector<double>& p, std::vector<double>& q) const {
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        const std::size_t c = idx(i, j);
        double acc = 0.0;
        int count = 0;
        if (i > 0) acc -= p[c - 1], ++count;
        if (i + 1 < nx_) acc -= p[c + 1], ++count;
        if (j > 0) acc -= p[c - nx_], ++count;
        if (j + 1 < ny_) acc -= p[c + nx_], ++count;
        q[c] = acc + count * p[c];
      }
  }

  static void remove_mean(std::vector<double>& x) {
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / static_cast<double>(x.size());
    for (double& v : x) v -= mean;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
  static double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }

  // MIC(0) with tuning constant 0.97 and a pivot safety floor, after the
  // standard fluid-solver formulation.
  void build_preconditioner() {
    constexpr double tau = 0.97;
    constexpr double sigma = 0.25;
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        const std::size_t c = idx(i, j);
        const double diag = (i > 0) + (i + 1 < nx_) + (j > 0) + (j + 1 < ny_);
        double e = diag;
        // Off-diagonal couplings are -1 between adjacent cells.
        if (i > 0) {
          const double pl = precon_[c - 1];
          e -= pl * pl * (1.0 + (j + 1 < ny_ ? tau : 0.0));
        }
        if (j > 0) {
          const double pb = precon_[c - nx_];
          e -= pb * pb * (1.0 + (i + 1 < nx_ ? tau : 0.0));
        }
        if (e < sigma * diag) e = diag;
        precon_[c] = 1.0 / std::sqrt(e);
      }
  }

  void apply_preconditioner(const std::vector<double>& r, std::vector<double>& z) const {
    std::vector<double>& q = scratch_;
    q.resize(r.size());
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        const std::size_t c = idx(i, j);
        double t = r[c];
        if (i > 0) t += q[c - 1] * precon_[c - 1];
        if (j > 0) t += q[c - nx_] * precon_[c - nx_];
        q[c] = t * precon_[c];
      }
    for (int j = ny_ - 1; j >= 0; --j)
      for (int i = nx_ - 1; i >= 0; --i) {
        const std::size_t c = idx(i, j);
        double t = q[c];
        if (i + 1 < nx_) t += z[c + 1] * precon_[c];
        if (j + 1 < ny_) t += z[c + nx_] * precon_[c];
        z[c] = t * precon_[c];
      }
  }

  int nx_ = 0;
  int ny_ = 0;
  SolverSettings settings_;
  std::vector<double> precon_;
  mutable std::vector<double> scratch_;
};

/// Makes (u, v) discretely divergence free in place: u <- m - grad(phi) with
/// lap(phi) = div(m). Boundary normal faces are zeroed first. `phi_out`, when
/// given, receives the zero-mean gauge field.
inline SolveStats project(Field2& u, Field2& v, double dx, const PoissonSolver& solver,
                          Field2* phi_out = nullptr) {
  MacGrid::zero_boundary_normals(u, v);
  const int nx = solver.nx();
  const int ny = solver.ny();
  const Field2 div = divergence(u, v, dx);
  // A = -dx^2 lap, so A phi = -dx^2 div(m).
  std::vector<double> rhs(div.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = -dx * dx * div.data()[k];
  std::vector<double> phi;
  const SolveStats stats = solver.solve(std::move(rhs), phi);
  Field2 phi_field(nx, ny);
  phi_field.data() = std::move(phi);
  const double inv_dx = 1.0 / dx;
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) u(i, j) -= (phi_field(i, j) - phi_field(i - 1, j)) * inv_dx;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) v(i, j) -= (phi_field(i, j) - phi_field(i, j - 1)) * inv_dx;
  if (phi_out) *phi_out = std::move(phi_field);
  return stats;
}

inline SolveStats project(MacGrid& grid, const PoissonSolver& solver, Field2* phi_out = nullptr) {
  return project(grid.u(), grid.v(), grid.dx(), solver, phi_out);
}

}  // namespace pfm
