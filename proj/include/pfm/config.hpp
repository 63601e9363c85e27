#pragma once
// Run configuration: JSON parsing with strict key checking, validation and
// serialization of the fully resolved settings.

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "pfm/error.hpp"
#include "pfm/flow_map.hpp"
#include "pfm/impulse_transport.hpp"
#include "pfm/projection.hpp"
#include "pfm/scenes.hpp"

namespace pfm {

enum class Scheme { pfm, apic, impulse_apic };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::pfm: return "pfm";
    case Scheme::apic: return "apic";
    case Scheme::impulse_apic: return "impulse_apic";
  }
  return "pfm";
}

struct OutputSettings {
  int snapshot_every = 0;  // 0 disables field snapshots
  bool dump_particles = false;
  bool stop_at_lifetime = false;  // end the run once the lifetime detector fires

  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct LifetimeSettings {
  double merge_radius = 0.02;
  double asymmetry = 0.2;
  double significance = 0.3;  // extremum must reach this fraction of the sign's peak

  friend bool operator==(const LifetimeSettings&, const LifetimeSettings&) = default;
};

struct SimConfig {
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double cfl = 1.0;
  int n_long = 20;
  int n_short = 8;
  int particles_per_cell = 16;
  Redistribution redistribution = Redistribution::uniform;
  bool hessian = false;
  Scheme scheme = Scheme::pfm;
  ScalarGradientMode smoke_gradient = ScalarGradientMode::evolved;
  SolverSettings solver;
  long steps = 0;         // 0: run until max_time
  double max_time = 0.0;  // 0: run for `steps`
  std::uint64_t seed = 1;
  bool apic_redistribute = true;
  SceneSpec scene;
  OutputSettings output;
  LifetimeSettings lifetime;

  double dx() const { return lx / nx; }
};

/// Impulse-modified APIC is the flow-map scheme restarted every step.
inline SimConfig impulse_apic_config(SimConfig base = {}) {
  base.scheme = Scheme::pfm;
  base.n_long = 1;
  base.n_short = 1;
  base.redistribution = Redistribution::uniform;
  return base;
}

namespace detail {

using nlohmann::json;

// Reads keys out of one JSON object and rejects any key it was not asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(field(key), "required field is missing");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    return convert<T>(at(key), key);
  }
  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    return j_.contains(key) ? convert<T>(j_.at(key), key) : fallback;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

 private:
  template <class T>
  T convert(const json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field(key), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E, std::size_t N>
E parse_enum(const std::string& value, const std::string& field, const std::array<E, N>& options) {
  std::string listed;
  for (E e : options) {
    if (to_string(e) == value) return e;
    listed += (listed.empty() ? "" : ", ") + to_string(e);
  }
  throw ConfigError(field, "unknown value '" + value + "' (expected one of " + listed + ")");
}

inline Vec2 parse_vec2(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(field, "expected an array of two numbers");
  return vec2(v[0].get<double>(), v[1].get<double>());
}

inline SceneSpec parse_scene(const json& j) {
  ObjectReader r(j, "scene");
  SceneSpec s;
  s.id = parse_enum(r.get<std::string>("id"), "scene.id",
                    std::array{SceneId::leapfrog2d, SceneId::single_vortex, SceneId::taylor2d});
  s.smoke = r.get<bool>("smoke", false);
  switch (s.id) {
    case SceneId::leapfrog2d: {
      LeapfrogParams& p = s.leapfrog;
      p.strength = r.get<double>("strength", p.strength);
      p.delta = r.get<double>("delta", p.delta);
      p.x = r.get<double>("x", p.x);
      if (r.has("ys")) {
        const json& ys = r.at("ys");
        if (!ys.is_array() || ys.size() != 4) throw ConfigError("scene.ys", "expected an array of four numbers");
        for (std::size_t k = 0; k < 4; ++k) {
          if (!ys[k].is_number()) throw ConfigError("scene.ys", "expected an array of four numbers");
          p.ys[k] = ys[k].get<double>();
        }
      }
      break;
    }
    case SceneId::single_vortex: {
      SingleVortexParams& p = s.single_vortex;
      p.amplitude = r.get<double>("amplitude", p.amplitude);
      p.delta = r.get<double>("delta", p.delta);
      if (r.has("center")) p.center = parse_vec2(r.at("center"), "scene.center");
      break;
    }
    case SceneId::taylor2d: {
      TaylorParams& p = s.taylor;
      p.amplitude = r.get<double>("amplitude", p.amplitude);
      p.delta = r.get<double>("delta", p.delta);
      p.separation = r.get<double>("separation", p.separation);
      break;
    }
  }
  r.finish();
  return s;
}

inline json scene_to_json(const SceneSpec& s) {
  json j;
  j["id"] = to_string(s.id);
  j["smoke"] = s.smoke;
  switch (s.id) {
    case SceneId::leapfrog2d:
      j["strength"] = s.leapfrog.strength;
      j["delta"] = s.leapfrog.delta;
      j["x"] = s.leapfrog.x;
      j["ys"] = s.leapfrog.ys;
      break;
    case SceneId::single_vortex:
      j["amplitude"] = s.single_vortex.amplitude;
      j["delta"] = s.single_vortex.delta;
      j["center"] = {s.single_vortex.center[0], s.single_vortex.center[1]};
      break;
    case SceneId::taylor2d:
      j["amplitude"] = s.taylor.amplitude;
      j["delta"] = s.taylor.delta;
      j["separation"] = s.taylor.separation;
      break;
  }
  return j;
}

inline void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace detail

/// Throws ConfigError naming the first field that breaks an invariant.
inline void validate(const SimConfig& c) {
  using detail::require;
  require(c.nx >= 4, "nx", "must be at least 4");
  require(c.ny >= 4, "ny", "must be at least 4");
  require(c.lx > 0.0, "lx", "must be positive");
  require(c.ly > 0.0, "ly", "must be positive");
  require(std::abs(c.lx / c.nx - c.ly / c.ny) <= 1e-12 * (c.lx / c.nx), "ly", "cells must be square (lx/nx == ly/ny)");
  require(c.cfl > 0.0 && std::isfinite(c.cfl), "cfl", "must be positive");
  require(c.n_short >= 1, "n_short", "must be at least 1");
  require(c.n_long >= c.n_short, "n_long", "must be at least n_short");
  require(c.particles_per_cell >= 1, "particles_per_cell", "must be at least 1");
  if (c.redistribution != Redistribution::random) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.particles_per_cell))));
    require(side * side == c.particles_per_cell, "particles_per_cell", "must be a perfect square for a uniform lattice");
  }
  require(c.solver.tolerance > 0.0, "solver.tolerance", "must be positive");
  require(c.solver.max_iterations >= 1, "solver.max_iterations", "must be at least 1");
  require(c.steps >= 0, "steps", "must be non-negative");
  require(c.max_time >= 0.0, "max_time", "must be non-negative");
  require(c.steps > 0 || c.max_time > 0.0, "steps", "one of steps or max_time must be positive");
  require(c.output.snapshot_every >= 0, "output.snapshot_every", "must be non-negative");
  switch (c.scene.id) {
    case SceneId::leapfrog2d:
      require(c.nx == 4 * c.ny, "nx", "leapfrog2d needs a 4:1 grid");
      require(c.scene.leapfrog.delta > 0.0, "scene.delta", "must be positive");
      break;
    case SceneId::single_vortex:
      require(c.nx == c.ny && std::abs(c.lx - 1.0) < 1e-12, "lx", "single_vortex needs the unit square");
      require(c.scene.single_vortex.delta > 0.0, "scene.delta", "must be positive");
      break;
    case SceneId::taylor2d:
      require(c.nx == c.ny, "ny", "taylor2d needs a square grid");
      require(c.scene.taylor.delta > 0.0, "scene.delta", "must be positive");
      break;
  }
  require(c.lifetime.merge_radius > 0.0, "lifetime.merge_radius", "must be positive");
  require(c.lifetime.asymmetry > 0.0, "lifetime.asymmetry", "must be positive");
  require(c.lifetime.significance > 0.0 && c.lifetime.significance < 1.0, "lifetime.significance",
          "must lie in (0, 1)");
}

inline SimConfig config_from_json(const nlohmann::json& j) {
  detail::ObjectReader r(j, "");
  SimConfig c;
  c.nx = r.get<int>("nx");
  c.ny = r.get<int>("ny");
  c.lx = r.get<double>("lx");
  c.ly = r.get<double>("ly");
  c.cfl = r.get<double>("cfl");
  c.n_long = r.get<int>("n_long");
  c.n_short = r.get<int>("n_short");
  c.particles_per_cell = r.get<int>("particles_per_cell");
  c.scheme = detail::parse_enum(r.get<std::string>("scheme"), "scheme",
                                std::array{Scheme::pfm, Scheme::apic, Scheme::impulse_apic});
  c.scene = detail::parse_scene(r.at("scene"));
  c.redistribution = detail::parse_enum(r.get<std::string>("redistribution", "uniform"), "redistribution",
                                        std::array{Redistribution::uniform, Redistribution::random,
                                                   Redistribution::none});
  c.smoke_gradient = detail::parse_enum(r.get<std::string>("smoke_gradient", "evolved"), "smoke_gradient",
                                        std::array{ScalarGradientMode::evolved, ScalarGradientMode::stored,
                                                   ScalarGradientMode::none});
  c.hessian = r.get<bool>("hessian", false);
  c.steps = r.get<long>("steps", 0L);
  c.max_time = r.get<double>("max_time", 0.0);
  c.seed = r.get<std::uint64_t>("seed", std::uint64_t{1});
  c.apic_redistribute = r.get<bool>("apic_redistribute", true);
  if (r.has("solver")) {
    detail::ObjectReader s(r.at("solver"), "solver");
    c.solver.tolerance = s.get<double>("tolerance", c.solver.tolerance);
    c.solver.max_iterations = s.get<int>("max_iterations", c.solver.max_iterations);
    s.finish();
  }
  if (r.has("output")) {
    detail::ObjectReader o(r.at("output"), "output");
    c.output.snapshot_every = o.get<int>("snapshot_every", 0);
    c.output.dump_particles = o.get<bool>("dump_particles", false);
    c.output.stop_at_lifetime = o.get<bool>("stop_at_lifetime", false);
    o.finish();
  }
  if (c.scene.id == SceneId::leapfrog2d) c.lifetime.merge_radius = c.scene.leapfrog.delta;
  if (r.has("lifetime")) {
    detail::ObjectReader l(r.at("lifetime"), "lifetime");
    c.lifetime.merge_radius = l.get<double>("merge_radius", c.lifetime.merge_radius);
    c.lifetime.asymmetry = l.get<double>("asymmetry", c.lifetime.asymmetry);
    c.lifetime.significance = l.get<double>("significance", c.lifetime.significance);
    l.finish();
  }
  r.finish();
  validate(c);
  return c;
}

inline SimConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Every setting, defaults included.
inline nlohmann::json to_json(const SimConfig& c) {
  nlohmann::json j;
  j["nx"] = c.nx;
  j["ny"] = c.ny;
  j["lx"] = c.lx;
  j["ly"] = c.ly;
  j["cfl"] = c.cfl;
  j["n_long"] = c.n_long;
  j["n_short"] = c.n_short;
  j["particles_per_cell"] = c.particles_per_cell;
  j["redistribution"] = to_string(c.redistribution);
  j["hessian"] = c.hessian;
  j["scheme"] = to_string(c.scheme);
  j["smoke_gradient"] = to_string(c.smoke_gradient);
  j["solver"] = {{"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}};
  j["steps"] = c.steps;
  j["max_time"] = c.max_time;
  j["seed"] = c.seed;
  j["apic_redistribute"] = c.apic_redistribute;
  j["scene"] = detail::scene_to_json(c.scene);
  j["output"] = {{"snapshot_every", c.output.snapshot_every},
                 {"dump_particles", c.output.dump_particles},
                 {"stop_at_lifetime", c.output.stop_at_lifetime}};
  j["lifetime"] = {{"merge_radius", c.lifetime.merge_radius},
                   {"asymmetry", c.lifetime.asymmetry},
                   {"significance", c.lifetime.significance}};
  return j;
}

/// Sets a dotted key (e.g. "n_short", "scene.delta") to a value given as text.
/// The text is read as JSON when possible and as a bare string otherwise.
inline void apply_override(nlohmann::json& j, const std::string& key, const std::string& text) {
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  nlohmann::json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "malformed key");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace pfm
