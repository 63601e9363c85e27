#pragma once
// Drives a Simulation to completion, tracks the leapfrog lifetime and
// optionally writes the run directory (manifest, CSV, snapshots).

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfm/config.hpp"
#include "pfm/diagnostics.hpp"
#include "pfm/io.hpp"
#include "pfm/simulator.hpp"
#include "pfm/version.hpp"

namespace pfm {

struct RunResult {
  std::vector<DiagnosticsRecord> rows;
  double lifetime = 0.0;
  bool lifetime_fired = false;  // false: censored at the end of the run
  double initial_energy = 0.0;
  std::string csv;
  std::uint64_t csv_checksum = 0;

  double final_time() const { return rows.empty() ? 0.0 : rows.back().time; }

  /// Kinetic energy at the last step whose time does not exceed t.
  double energy_at(double t) const {
    double e = initial_energy;
    for (const auto& r : rows) {
      if (r.time > t) break;
      e = r.kinetic_energy;
    }
    return e;
  }
};

inline nlohmann::json run_manifest(const SimConfig& config, const std::filesystem::path& out_dir) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return {{"config", to_json(config)},
          {"version", kVersion},
          {"started", stamp},
          {"outputs",
           {{"directory", out_dir.string()},
            {"diagnostics", "diagnostics.csv"},
            {"snapshots", "snapshots"},
            {"particles", "particles"}}}};
}

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const DiagnosticsRecord&)> on_step;
  // With output.stop_at_lifetime, keep stepping at least until this time.
  double continue_until = 0.0;
};

/// Runs `config` until its step or time budget is exhausted (or, with
/// output.stop_at_lifetime, until the lifetime detector has fired and
/// opt.continue_until has passed).
inline RunResult run_simulation(const SimConfig& config, const RunOptions& opt = {}) {
  validate(config);
  namespace fs = std::filesystem;
  if (opt.out_dir) {
    fs::create_directories(*opt.out_dir);
    std::ofstream(*opt.out_dir / "manifest.json") << run_manifest(config, *opt.out_dir).dump(2) << '\n';
  }
  Simulation sim(config);
  RunResult res;
  res.initial_energy = kinetic_energy(sim.grid());
  std::optional<LifetimeMonitor> monitor;
  if (config.scene.id == SceneId::leapfrog2d)
    monitor.emplace(config.lifetime.merge_radius, config.lifetime.asymmetry, config.lifetime.significance);

  const int every = config.output.snapshot_every;
  if (opt.out_dir && every > 0) write_field_snapshot(*opt.out_dir / "snapshots", "step_000000", sim.grid(), 0.0, 0);

  std::ostringstream csv;
  csv << DiagnosticsRecord::csv_header() << '\n';
  while (!sim.finished()) {
    const DiagnosticsRecord rec = sim.step();
    if (!rec.all_finite()) throw NumericalError("diagnostics", "non-finite diagnostics record");
    res.rows.push_back(rec);
    csv << rec.csv_row() << '\n';
    if (opt.on_step) opt.on_step(rec);
    if (opt.out_dir && every > 0 && rec.step % every == 0) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "step_%06ld", rec.step);
      write_field_snapshot(*opt.out_dir / "snapshots", stem, sim.grid(), rec.time, rec.step);
    }
    if (monitor) monitor->observe(sim.grid(), rec.time);
    if (monitor && monitor->fired() && config.output.stop_at_lifetime && rec.time >= opt.continue_until) break;
  }
  if (monitor) {
    res.lifetime = monitor->lifetime();
    res.lifetime_fired = monitor->fired();
  } else {
    res.lifetime = res.final_time();
  }
  res.csv = csv.str();
  res.csv_checksum = fnv1a(res.csv.data(), res.csv.size());
  if (opt.out_dir) {
    std::ofstream(*opt.out_dir / "diagnostics.csv") << res.csv;
    if (config.output.dump_particles)
      write_particle_dump(*opt.out_dir / "particles", "final", sim.particles(), sim.time(), sim.step_index());
    nlohmann::json summary{{"steps", res.rows.size()},
                           {"final_time", res.final_time()},
                           {"lifetime", res.lifetime},
                           {"lifetime_censored", !res.lifetime_fired},
                           {"csv_checksum", res.csv_checksum}};
    std::ofstream(*opt.out_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return res;
}

}  // namespace pfm
