// Command-line driver: run a config, run a validation case, or sweep one key.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfm/pfm.hpp"
#include "validation_cases.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitValidation = 4;

fs::path output_root() {
  if (const char* env = std::getenv("PFM_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw pfm::ConfigError("<file>", "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void print_summary(const pfm::SimConfig& c, const pfm::RunResult& r, const fs::path& dir) {
  std::cout << "scheme " << pfm::to_string(c.scheme) << ", scene " << pfm::to_string(c.scene.id) << ": "
            << r.rows.size() << " steps, t = " << r.final_time() << '\n';
  if (c.scene.id == pfm::SceneId::leapfrog2d)
    std::cout << "lifetime " << r.lifetime << (r.lifetime_fired ? "" : " (censored)") << '\n';
  std::cout << "output " << dir.string() << '\n';
}

int run_command(const std::string& config_path, const std::string& out, bool deterministic) {
  // Every pass is sequential with fixed reduction order, so runs are always
  // reproducible; the flag is accepted for interface compatibility.
  (void)deterministic;
  const pfm::SimConfig c = pfm::parse_config(read_text(config_path));
  const fs::path dir = out.empty() ? output_root() / fs::path(config_path).stem() : fs::path(out);
  pfm::RunOptions opt;
  opt.out_dir = dir;
  const pfm::RunResult r = pfm::run_simulation(c, opt);
  print_summary(c, r, dir);
  return 0;
}

int sweep_command(const std::string& config_path, const std::string& vary, const std::string& out) {
  const auto eq = vary.find('=');
  if (eq == std::string::npos || eq == 0) throw pfm::ConfigError("--vary", "expected key=v1,v2,...");
  const std::string key = vary.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(vary.substr(eq + 1));
  for (std::string v; std::getline(ss, v, ',');)
    if (!v.empty()) values.push_back(v);
  if (values.empty()) throw pfm::ConfigError("--vary", "no values given");

  nlohmann::json base;
  try {
    base = nlohmann::json::parse(read_text(config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw pfm::ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  const fs::path root =
      out.empty() ? output_root() / (fs::path(config_path).stem().string() + "_sweep") : fs::path(out);
  // Validate every variant before running any of them.
  std::vector<pfm::SimConfig> configs;
  for (const std::string& v : values) {
    nlohmann::json j = base;
    pfm::apply_override(j, key, v);
    configs.push_back(pfm::config_from_json(j));
  }
  std::cout << key << ",steps,final_time,lifetime,censored\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    pfm::RunOptions opt;
    opt.out_dir = root / (key + "=" + values[k]);
    const pfm::RunResult r = pfm::run_simulation(configs[k], opt);
    std::cout << values[k] << ',' << r.rows.size() << ',' << r.final_time() << ',' << r.lifetime << ','
              << (r.lifetime_fired ? 0 : 1) << '\n';
  }
  return 0;
}

int validate_command(const std::string& name, const std::string& out) {
  const auto& cases = pfm::tools::validation_cases();
  for (const auto& vc : cases) {
    if (vc.name != name) continue;
    const fs::path dir = out.empty() ? output_root() / "validate" : fs::path(out);
    fs::create_directories(dir);
    const pfm::tools::CaseOutcome o = vc.run();
    if (!o.rows.empty()) {
      std::ofstream os(dir / (name + ".csv"));
      pfm::write_csv(os, o.rows);
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << '\n';
    return o.pass ? 0 : kExitValidation;
  }
  std::cerr << "unknown validation case '" << name << "'; available:";
  for (const auto& vc : cases) std::cerr << ' ' << vc.name;
  std::cerr << '\n';
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle flow map fluid solver"};
  app.require_subcommand(1);

  std::string config_path, out, vary, case_name;
  bool deterministic = false;

  auto* run = app.add_subcommand("run", "Run a simulation from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out, "output directory");
  run->add_flag("--deterministic", deterministic, "bit-reproducible reductions (always on)");

  auto* validate = app.add_subcommand("validate", "Run a validation case");
  validate->add_option("case", case_name, "case name")->required();
  validate->add_option("--out", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "Run one config for several values of a key");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--vary", vary, "key=v1,v2,...")->required();
  sweep->add_option("--out", out, "output root");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, out, deterministic);
    if (*validate) return validate_command(case_name, out);
    if (*sweep) return sweep_command(config_path, vary, out);
  } catch (const pfm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pfm::NumericalError& e) {
    std::cerr << "numerical failure in pass '" << e.pass() << "': " << e.what() << '\n';
    return kExitNumerical;
  } catch (const pfm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
