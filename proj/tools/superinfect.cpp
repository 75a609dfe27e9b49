#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "superinfect/commands.hpp"
#include "superinfect/selftest.hpp"

namespace si = superinfect;

int main(int argc, char** argv) {
  CLI::App app{"Superinfection epidemics on random graphs: thresholds, simulation and sweeps"};
  app.set_version_flag("--version", si::kVersion);

  std::string mode, config_path, manifest_path;
  std::optional<double> alpha, phi, phi_min, phi_max, c, c_min, c_max;
  std::optional<std::size_t> phi_points, c_points, n, replicas, threshold;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::vector<std::string> sets;

  app.add_option("mode", mode, "boundary | compare | heatmap | kernel | selftest")->required();
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--manifest", manifest_path, "rerun from a manifest.json written by an earlier run");
  app.add_option("--alpha", alpha);
  app.add_option("--phi", phi, "single phi value");
  app.add_option("--phi-min", phi_min);
  app.add_option("--phi-max", phi_max);
  app.add_option("--phi-points", phi_points);
  app.add_option("--c", c);
  app.add_option("--c-min", c_min);
  app.add_option("--c-max", c_max);
  app.add_option("--c-points", c_points);
  app.add_option("--n", n);
  app.add_option("--replicas", replicas);
  app.add_option("--threshold", threshold);
  app.add_option("--seed", seed);
  app.add_option("--threads", threads);
  app.add_option("--out", out);
  app.add_option("--set", sets, "extra key=value setting, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    si::RunConfig cfg;
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      if (!in) throw si::ValidationError("cannot read manifest " + manifest_path);
      nlohmann::json j;
      try {
        in >> j;
        cfg = si::config_from_json(j.at("config"));
      } catch (const nlohmann::json::exception& e) {
        throw si::ValidationError(std::string("malformed manifest: ") + e.what());
      }
    }
    if (!config_path.empty()) si::load_config_file(cfg, config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw si::ValidationError("--set expects key=value, got '" + s + "'");
      si::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.mode = si::parse_mode(mode);
    if (alpha) cfg.alpha = *alpha;
    if (phi) {
      cfg.phi_min = cfg.phi_max = cfg.kernel_phi = *phi;
      cfg.phi_points = 1;
    }
    if (phi_min) cfg.phi_min = *phi_min;
    if (phi_max) cfg.phi_max = *phi_max;
    if (phi_points) cfg.phi_points = *phi_points;
    if (c) cfg.c = *c;
    if (c_min) cfg.c_min = *c_min;
    if (c_max) cfg.c_max = *c_max;
    if (c_points) cfg.c_points = *c_points;
    if (n) cfg.n = *n;
    if (replicas) cfg.replicas = *replicas;
    if (threshold) cfg.threshold = *threshold;
    if (seed) cfg.master_seed = *seed;
    if (threads) cfg.threads = *threads;
    if (out) cfg.out_dir = *out;

    si::CommandResult res;
    switch (cfg.mode) {
      case si::Mode::Boundary: res = si::cmd_boundary(cfg); break;
      case si::Mode::Compare: res = si::cmd_compare(cfg); break;
      case si::Mode::Heatmap: res = si::cmd_heatmap(cfg); break;
      case si::Mode::Kernel: res = si::cmd_kernel(cfg); break;
      case si::Mode::Selftest: res = si::cmd_selftest(cfg); break;
    }
    for (const auto& f : res.files) std::cout << "wrote " << cfg.out_dir << "/" << f << '\n';
    return res.exit_code;
  } catch (const si::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const si::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
