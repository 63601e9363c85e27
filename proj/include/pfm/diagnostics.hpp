#pragma once
// Per-step diagnostics, vorticity, and the leapfrog lifetime detector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "pfm/linalg.hpp"
#include "pfm/mac_grid.hpp"

namespace pfm {

/// One CSV row. Fields that do not apply to a run are written as 0.
struct DiagnosticsRecord {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  double kinetic_energy = 0.0;
  double max_divergence = 0.0;
  int solver_iterations = 0;
  double solver_residual = 0.0;
  int midpoint_iterations = 0;
  int clamp_count = 0;
  bool long_reinit = false;
  bool short_reinit = false;
  double ft_identity_error = 0.0;
  double t_equivalence_error = 0.0;
  double reconstruction_error_l2 = 0.0;

  static const char* csv_header() {
    return "step,time,dt,kinetic_energy,max_divergence,solver_iterations,solver_residual,midpoint_iterations,"
           "clamp_count,long_reinit,short_reinit,ft_identity_error,t_equivalence_error,reconstruction_error_l2";
  }

  /// Round-trippable text (17 significant digits).
  std::string csv_row() const {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d,%d,%d,%d,%.17g,%.17g,%.17g", step, time,
                  dt, kinetic_energy, max_divergence, solver_iterations, solver_residual, midpoint_iterations,
                  clamp_count, long_reinit ? 1 : 0, short_reinit ? 1 : 0, ft_identity_error, t_equivalence_error,
                  reconstruction_error_l2);
    return buf;
  }

  bool all_finite() const {
    for (double v : {time, dt, kinetic_energy, max_divergence, solver_residual, ft_identity_error,
                     t_equivalence_error, reconstruction_error_l2})
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void write_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& rows) {
  os << DiagnosticsRecord::csv_header() << '\n';
  for (const auto& r : rows) os << r.csv_row() << '\n';
}

/// (dx^2 / 2) (sum u^2 + sum v^2) over all faces.
inline double kinetic_energy(const Field2& u, const Field2& v, double dx) {
  double s = 0.0;
  for (double x : u.data()) s += x * x;
  for (double x : v.data()) s += x * x;
  return 0.5 * dx * dx * s;
}
inline double kinetic_energy(const MacGrid& g) { return kinetic_energy(g.u(), g.v(), g.dx()); }

inline double max_divergence(const MacGrid& g) { return divergence(g).max_abs(); }

/// Node-centered vorticity dv/dx - du/dy on the (nx+1) x (ny+1) corner
/// lattice. Boundary nodes are left at zero.
inline Field2 vorticity(const MacGrid& g) {
  Field2 w(g.nx() + 1, g.ny() + 1);
  const double inv_dx = 1.0 / g.dx();
  for (int j = 1; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i)
      w(i, j) = (g.v()(i, j) - g.v()(i - 1, j) - g.u()(i, j) + g.u()(i, j - 1)) * inv_dx;
  return w;
}

/// sum | |w(x, y)| - |w(x, H - y)| | / sum |w| over the node lattice.
inline double mirror_asymmetry(const Field2& w) {
  double num = 0.0, den = 0.0;
  const int nj = w.nj();
  for (int j = 0; j < nj; ++j)
    for (int i = 0; i < w.ni(); ++i) {
      num += std::abs(std::abs(w(i, j)) - std::abs(w(i, nj - 1 - j)));
      den += std::abs(w(i, j));
    }
  return den > 0.0 ? num / den : 0.0;
}

struct Extremum {
  Vec2 x;
  double value = 0.0;  // magnitude, already multiplied by the sign
};

/// Local maxima of sign * w above `significance` times the sign's peak,
/// sorted by decreasing magnitude. Plateaus report their first node.
inline std::vector<Extremum> signed_extrema(const Field2& w, double dx, double sign, double significance) {
  double peak = 0.0;
  for (double v : w.data()) peak = std::max(peak, sign * v);
  std::vector<Extremum> out;
  if (peak <= 0.0) return out;
  for (int j = 1; j + 1 < w.nj(); ++j)
    for (int i = 1; i + 1 < w.ni(); ++i) {
      const double f = sign * w(i, j);
      if (f < significance * peak || f <= 0.0) continue;
      bool is_max = true;
      for (int b = -1; b <= 1 && is_max; ++b)
        for (int a = -1; a <= 1; ++a) {
          if (a == 0 && b == 0) continue;
          const double g = sign * w(i + a, j + b);
          const bool earlier = b < 0 || (b == 0 && a < 0);
          if (g > f || (earlier && g == f)) {
            is_max = false;
            break;
          }
        }
      if (is_max) out.push_back({vec2(i * dx, j * dx), f});
    }
  std::stable_sort(out.begin(), out.end(), [](const Extremum& a, const Extremum& b) { return a.value > b.value; });
  return out;
}

struct LifetimeCheck {
  bool merged = false;
  bool asymmetric = false;
  double asymmetry = 0.0;
  bool fired() const { return merged || asymmetric; }
};

/// Merge test: for each sign, a second significant extremum must exist
/// farther than `merge_radius` from the strongest one.
inline LifetimeCheck check_lifetime(const Field2& w, double dx, double merge_radius, double asymmetry_threshold,
                                    double significance) {
  LifetimeCheck c;
  for (double sign : {1.0, -1.0}) {
    const auto ex = signed_extrema(w, dx, sign, significance);
    bool separated = false;
    for (std::size_t k = 1; k < ex.size() && !separated; ++k) separated = norm(ex[k].x - ex[0].x) > merge_radius;
    if (!separated) c.merged = true;
  }
  c.asymmetry = mirror_asymmetry(w);
  c.asymmetric = c.asymmetry > asymmetry_threshold;
  return c;
}

/// Tracks the first time the detector fires. Until then the lifetime is the
/// elapsed time and is reported as censored.
class LifetimeMonitor {
 public:
  LifetimeMonitor(double merge_radius, double asymmetry, double significance)
      : merge_radius_(merge_radius), asymmetry_(asymmetry), significance_(significance) {}

  /// Returns true on the step at which the detector first fires.
  bool observe(const MacGrid& g, double time) {
    elapsed_ = time;
    if (fired_) return false;
    last_ = check_lifetime(vorticity(g), g.dx(), merge_radius_, asymmetry_, significance_);
    if (last_.fired()) {
      fired_ = true;
      lifetime_ = time;
      return true;
    }
    return false;
  }

  bool fired() const { return fired_; }
  bool censored() const { return !fired_; }
  double lifetime() const { return fired_ ? lifetime_ : elapsed_; }
  const LifetimeCheck& last() const { return last_; }

 private:
  double merge_radius_, asymmetry_, significance_;
  bool fired_ = false;
  double lifetime_ = 0.0;
  double elapsed_ = 0.0;
  LifetimeCheck last_;
};

/// 64-bit FNV-1a over raw bytes, used for field and file checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t field_hash(const MacGrid& g) {
  std::uint64_t h = fnv1a(g.u().data().data(), g.u().size() * sizeof(double));
  return fnv1a(g.v().data().data(), g.v().size() * sizeof(double), h);
}

}  // namespace pfm
