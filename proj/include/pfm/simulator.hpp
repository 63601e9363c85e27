#pragma once
// Time loop: reinitialization clock, CFL step, midpoint velocity, flow-map
// marching, impulse mapping, transfer and projection.

#include <algorithm>
#include <optional>
#include <random>

#include "pfm/baselines.hpp"
#include "pfm/config.hpp"
#include "pfm/diagnostics.hpp"
#include "pfm/error.hpp"
#include "pfm/flow_map.hpp"
#include "pfm/impulse_transport.hpp"
#include "pfm/mac_grid.hpp"
#include "pfm/projection.hpp"
#include "pfm/scenes.hpp"

namespace pfm {

/// dt = cfl dx / max(max face |u|, 1e-3 dx).
inline double compute_dt(const MacGrid& grid, double cfl) {
  if (!grid.u().all_finite() || !grid.v().all_finite())
    throw NumericalError("compute_dt", "non-finite grid velocity");
  const double floor = 1e-3 * grid.dx();
  const double umax = std::max(grid.u().max_abs(), grid.v().max_abs());
  return cfl * grid.dx() / std::max(umax, floor);
}

struct MidpointResult {
  Field2 u, v;
  SolveStats stats;
  int clamps = 0;
};

/// Half-step backtrace from every interior face, m = (d psi/dx)^T u(psi),
/// then projection. Boundary normal faces are zero.
inline MidpointResult midpoint_velocity(const MacGrid& grid, double dt, const PoissonSolver& solver) {
  MidpointResult out{Field2(grid.nx() + 1, grid.ny()), Field2(grid.nx(), grid.ny() + 1), {}, 0};
  const GridVelocity field(grid);
  auto pull_back = [&](Vec2 x) {
    out.clamps += grid.clamp_to_padded(x);
    const Rk4Result r = rk4_march_forward(x, Mat2::identity(), field, -0.5 * dt);
    out.clamps += r.clamps;
    return transpose_times(r.J, grid.sample_velocity(r.x).velocity);
  };
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 1; i < grid.nx(); ++i) out.u(i, j) = pull_back(grid.u_position(i, j))[0];
  for (int j = 1; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out.v(i, j) = pull_back(grid.v_position(i, j))[1];
  out.stats = project(out.u, out.v, grid.dx(), solver);
  return out;
}

namespace detail {

inline void check_finite(const Field2& f, const char* pass, const char* what) {
  if (!f.all_finite()) throw NumericalError(pass, std::string("non-finite ") + what);
}

}  // namespace detail

/// Full simulation state for one run. The scheme decides which particle set
/// is used; impulse_apic runs through the flow-map path with n_long = n_short = 1.
class Simulation {
 public:
  explicit Simulation(const SimConfig& config)
      : config_(resolve(config)),
        grid_(config_.nx, config_.ny, config_.dx()),
        solver_(config_.nx, config_.ny, config_.solver),
        rng_(config_.seed),
        clock_{0, config_.n_long, config_.n_short} {
    init_stats_ = init_scene(config_.scene, grid_, solver_);
    detail::check_finite(grid_.u(), "scene", "initial u");
    detail::check_finite(grid_.v(), "scene", "initial v");
  }

  const SimConfig& config() const { return config_; }
  MacGrid& grid() { return grid_; }
  const MacGrid& grid() const { return grid_; }
  const PoissonSolver& solver() const { return solver_; }
  ParticleSystem& particles() { return particles_; }
  const ParticleSystem& particles() const { return particles_; }
  const ApicState& apic() const { return apic_; }
  const SolveStats& init_stats() const { return init_stats_; }
  double time() const { return time_; }
  long step_index() const { return step_; }

  bool finished() const {
    if (config_.steps > 0 && step_ >= config_.steps) return true;
    return config_.max_time > 0.0 && time_ >= config_.max_time;
  }

  DiagnosticsRecord step() { return config_.scheme == Scheme::apic ? apic_advance() : pfm_advance(); }

 private:
  static SimConfig resolve(const SimConfig& c) {
    validate(c);
    return c.scheme == Scheme::impulse_apic ? impulse_apic_config(c) : c;
  }

  DiagnosticsRecord pfm_advance() {
    DiagnosticsRecord rec;
    rec.long_reinit = clock_.long_fires();
    rec.short_reinit = clock_.short_fires();
    if (rec.long_reinit)
      reinit_long(particles_, grid_, config_.redistribution, config_.particles_per_cell, rng_);
    else if (rec.short_reinit)
      reinit_short(particles_, grid_);

    const double dt = compute_dt(grid_, config_.cfl);
    const MidpointResult mid = midpoint_velocity(grid_, dt, solver_);
    detail::check_finite(mid.u, "midpoint", "u_mid");
    detail::check_finite(mid.v, "midpoint", "v_mid");

    int clamps = mid.clamps;
    clamps += march_particles(particles_, GridVelocity(grid_, mid.u, mid.v), dt);
    if (!particles_.all_finite()) throw NumericalError("march", "non-finite particle state");

    std::optional<HessianResult> hessian;
    if (config_.hessian) hessian = compute_hessian(particles_, grid_);
    const TransportedState ts = transport_impulse(particles_, hessian ? &*hessian : nullptr);

    p2g_impulse(particles_, ts.m_c, ts.grad_m_c, grid_);
    detail::check_finite(grid_.u(), "p2g", "u");
    detail::check_finite(grid_.v(), "p2g", "v");
    if (grid_.has_scalar()) {
      p2g_scalar(particles_, config_.smoke_gradient, grid_);
      detail::check_finite(grid_.scalar(), "p2g", "scalar");
    }

    const SolveStats stats = project(grid_, solver_);
    detail::check_finite(grid_.u(), "projection", "u");
    detail::check_finite(grid_.v(), "projection", "v");

    finish_record(rec, dt, stats, clamps);
    rec.midpoint_iterations = mid.stats.iterations;
    return rec;
  }

  DiagnosticsRecord apic_advance() {
    DiagnosticsRecord rec;
    const bool seed = apic_.particles.empty() || (config_.apic_redistribute && clock_.long_fires());
    rec.long_reinit = seed;
    if (seed) apic_seed(apic_, grid_, config_.redistribution, config_.particles_per_cell, rng_);
    const double dt = compute_dt(grid_, config_.cfl);
    const ApicStepResult r = apic_step(apic_, grid_, solver_, dt);
    detail::check_finite(grid_.u(), "projection", "u");
    detail::check_finite(grid_.v(), "projection", "v");
    finish_record(rec, dt, r.stats, r.clamps);
    return rec;
  }

  void finish_record(DiagnosticsRecord& rec, double dt, const SolveStats& stats, int clamps) {
    time_ += dt;
    ++step_;
    clock_.step = step_;
    rec.step = step_;
    rec.time = time_;
    rec.dt = dt;
    rec.kinetic_energy = kinetic_energy(grid_);
    rec.max_divergence = max_divergence(grid_);
    rec.solver_iterations = stats.iterations;
    rec.solver_residual = stats.residual;
    rec.clamp_count = clamps;
  }

  SimConfig config_;
  MacGrid grid_;
  PoissonSolver solver_;
  std::mt19937_64 rng_;
  FlowMapClock clock_;
  ParticleSystem particles_;
  ApicState apic_;
  SolveStats init_stats_;
  double time_ = 0.0;
  long step_ = 0;
};

}  // namespace pfm
