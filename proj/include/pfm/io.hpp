#pragma once
// Binary field snapshots, particle dumps and the run manifest.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfm/error.hpp"
#include "pfm/flow_map.hpp"
#include "pfm/mac_grid.hpp"

namespace pfm {

namespace fs = std::filesystem;

namespace detail {

inline void write_f32_le(std::ofstream& os, const std::vector<double>& values) {
  std::vector<unsigned char> buf(values.size() * 4);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[k]));
    for (int b = 0; b < 4; ++b) buf[k * 4 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline void write_f32_file(const fs::path& path, const std::vector<double>& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_f32_le(os, values);
}

inline void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

}  // namespace detail

/// Reads a little-endian float32 array written by the exporters.
inline std::vector<float> read_f32_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::vector<float> out(buf.size() / 4);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[k * 4 + static_cast<std::size_t>(b)]) << (8 * b);
    out[k] = std::bit_cast<float>(bits);
  }
  return out;
}

/// Writes <stem>_u_faces.f32, <stem>_v_faces.f32, <stem>_cell_scalar.f32 (when
/// present) and <stem>.json with {nx, ny, dx, time, step}.
inline void write_field_snapshot(const fs::path& dir, const std::string& stem, const MacGrid& grid, double time,
                                 long step) {
  fs::create_directories(dir);
  nlohmann::json side{{"nx", grid.nx()}, {"ny", grid.ny()}, {"dx", grid.dx()}, {"time", time}, {"step", step}};
  detail::write_f32_file(dir / (stem + "_u_faces.f32"), grid.u().data());
  detail::write_f32_file(dir / (stem + "_v_faces.f32"), grid.v().data());
  if (grid.has_scalar()) detail::write_f32_file(dir / (stem + "_cell_scalar.f32"), grid.scalar().data());
  detail::write_json_file(dir / (stem + ".json"), side);
}

/// Column-major particle dump: one float32 block per column, in the order
/// listed by the sidecar.
inline void write_particle_dump(const fs::path& dir, const std::string& stem, const ParticleSystem& ps, double time,
                                long step) {
  fs::create_directories(dir);
  const std::vector<std::string> names{"x",        "y",        "T_ab_00",  "T_ab_01",  "T_ab_10",  "T_ab_11",
                                       "T_bc_00",  "T_bc_01",  "T_bc_10",  "T_bc_11",  "m_a_x",    "m_a_y",
                                       "m_b_x",    "m_b_y",    "grad_m_b_00", "grad_m_b_01", "grad_m_b_10",
                                       "grad_m_b_11", "rho_s", "grad_rho_b_x", "grad_rho_b_y"};
  std::vector<double> col(ps.count());
  std::ofstream os(dir / (stem + ".f32"), std::ios::binary);
  if (!os) throw Error("cannot open particle dump for writing");
  auto emit = [&](auto get) {
    for (std::size_t p = 0; p < ps.count(); ++p) col[p] = get(ps.particles[p]);
    detail::write_f32_le(os, col);
  };
  emit([](const Particle& p) { return p.x[0]; });
  emit([](const Particle& p) { return p.x[1]; });
  for (int k = 0; k < 4; ++k) emit([k](const Particle& p) { return p.T_ab.a[static_cast<std::size_t>(k)]; });
  for (int k = 0; k < 4; ++k) emit([k](const Particle& p) { return p.T_bc.a[static_cast<std::size_t>(k)]; });
  emit([](const Particle& p) { return p.m_a[0]; });
  emit([](const Particle& p) { return p.m_a[1]; });
  emit([](const Particle& p) { return p.m_b[0]; });
  emit([](const Particle& p) { return p.m_b[1]; });
  for (int k = 0; k < 4; ++k) emit([k](const Particle& p) { return p.grad_m_b.a[static_cast<std::size_t>(k)]; });
  emit([](const Particle& p) { return p.rho_s; });
  emit([](const Particle& p) { return p.grad_rho_b[0]; });
  emit([](const Particle& p) { return p.grad_rho_b[1]; });
  detail::write_json_file(dir / (stem + ".json"),
                          {{"count", ps.count()}, {"columns", names}, {"time", time}, {"step", step}});
}

}  // namespace pfm
