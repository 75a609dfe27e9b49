#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "superinfect/csv.hpp"
#include "superinfect/error.hpp"
#include "superinfect/rates.hpp"

namespace superinfect {

inline constexpr const char* kVersion = "1.0.0";

enum class Mode { Boundary, Compare, Heatmap, Kernel, Selftest };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Boundary: return "boundary";
    case Mode::Compare: return "compare";
    case Mode::Heatmap: return "heatmap";
    case Mode::Kernel: return "kernel";
    case Mode::Selftest: return "selftest";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Boundary, Mode::Compare, Mode::Heatmap, Mode::Kernel, Mode::Selftest})
    if (s == to_string(m)) return m;
  throw ValidationError("unknown mode '" + s + "'");
}

/// Everything a run depends on. Defaults follow the c = 10, N = 10^4,
/// threshold 100 operating point.
struct RunConfig {
  Mode mode = Mode::Boundary;
  double alpha = 1.0;
  double phi_min = 1e-3;
  double phi_max = 1e3;
  std::size_t phi_points = 61;
  double c = 10.0;
  double c_min = 1.0;
  double c_max = 30.0;
  std::size_t c_points = 30;
  std::size_t n = 10000;
  std::size_t replicas = 0;  // 0: mode default (compare 1000, heatmap 25)
  std::size_t threshold = 100;
  std::size_t gen_cap = 200;
  bool secondary_off = false;     // beta2 = 0 sentinel run
  bool stop_at_threshold = false; // compare: stop network runs once the outbreak is decided
  bool write_records = false;     // per-replica / per-run CSVs
  std::vector<double> kernel_parent_types{0.0, 0.5, 2.0};
  double kernel_phi = 1.0;
  double kernel_t_max = 5.0;
  std::size_t kernel_grid_points = 21;
  std::size_t kernel_bins = 20;
  std::size_t kernel_samples = 1000000;
  double selftest_tolerance_scale = 1.0;
  std::uint64_t master_seed = 20190101;
  unsigned threads = 1;
  std::string out_dir = ".";

  std::size_t effective_replicas() const {
    if (replicas != 0) return replicas;
    return mode == Mode::Heatmap ? 25 : 1000;
  }

  RateParams rates(double phi) const {
    RateParams p = RateParams::from_alpha_phi(alpha, phi);
    if (secondary_off) p.beta2 = 0.0;
    return p;
  }

  void validate() const {
    require(alpha > 0.0, "alpha must be positive");
    require(phi_min > 0.0 && phi_max >= phi_min && phi_points >= 1, "invalid phi range");
    require(c > 0.0, "c must be positive");
    require(c_min > 0.0 && c_max >= c_min && c_points >= 1, "invalid c range");
    require(n >= 1, "n must be at least 1");
    require(static_cast<double>(n) >= std::max(c, c_max), "c exceeds n");
    require(gen_cap >= 1, "gen_cap must be at least 1");
    require(!kernel_parent_types.empty(), "kernel_parent_types must be nonempty");
    require(kernel_phi > 0.0, "kernel_phi must be positive");
    for (double t : kernel_parent_types) require(t >= 0.0, "parent types must be nonnegative");
    require(kernel_t_max > 0.0 && kernel_grid_points >= 2 && kernel_bins >= 1 && kernel_samples >= 1,
            "invalid kernel grid");
    require(threads >= 1, "threads must be at least 1");
  }
};

namespace detail {

inline std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  const std::from_chars_result res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last)
    throw ValidationError("bad value for " + key + ": '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ValidationError("bad boolean for " + key + ": '" + value + "'");
}

}  // namespace detail

/// Applies one key=value setting. Keys accept '-' or '_'.
inline void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  using detail::parse_number;
  const std::string key = detail::normalize_key(detail::trim(raw_key));
  const std::string value = detail::trim(raw_value);
  if (key == "mode") cfg.mode = parse_mode(value);
  else if (key == "alpha") cfg.alpha = parse_number<double>(key, value);
  else if (key == "phi") cfg.phi_min = cfg.phi_max = parse_number<double>(key, value), cfg.phi_points = 1;
  else if (key == "phi_min") cfg.phi_min = parse_number<double>(key, value);
  else if (key == "phi_max") cfg.phi_max = parse_number<double>(key, value);
  else if (key == "phi_points") cfg.phi_points = parse_number<std::size_t>(key, value);
  else if (key == "c") cfg.c = parse_number<double>(key, value);
  else if (key == "c_min") cfg.c_min = parse_number<double>(key, value);
  else if (key == "c_max") cfg.c_max = parse_number<double>(key, value);
  else if (key == "c_points") cfg.c_points = parse_number<std::size_t>(key, value);
  else if (key == "n") cfg.n = parse_number<std::size_t>(key, value);
  else if (key == "replicas") cfg.replicas = parse_number<std::size_t>(key, value);
  else if (key == "threshold") cfg.threshold = parse_number<std::size_t>(key, value);
  else if (key == "gen_cap") cfg.gen_cap = parse_number<std::size_t>(key, value);
  else if (key == "secondary_off") cfg.secondary_off = detail::parse_bool(key, value);
  else if (key == "stop_at_threshold") cfg.stop_at_threshold = detail::parse_bool(key, value);
  else if (key == "write_records") cfg.write_records = detail::parse_bool(key, value);
  else if (key == "kernel_parent_types") {
    cfg.kernel_parent_types.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      cfg.kernel_parent_types.push_back(parse_number<double>(key, detail::trim(item)));
  } else if (key == "kernel_phi") cfg.kernel_phi = parse_number<double>(key, value);
  else if (key == "kernel_t_max") cfg.kernel_t_max = parse_number<double>(key, value);
  else if (key == "kernel_grid_points") cfg.kernel_grid_points = parse_number<std::size_t>(key, value);
  else if (key == "kernel_bins") cfg.kernel_bins = parse_number<std::size_t>(key, value);
  else if (key == "kernel_samples") cfg.kernel_samples = parse_number<std::size_t>(key, value);
  else if (key == "selftest_tolerance_scale")
    cfg.selftest_tolerance_scale = parse_number<double>(key, value);
  else if (key == "seed" || key == "master_seed") cfg.master_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") cfg.threads = parse_number<unsigned>(key, value);
  else if (key == "out" || key == "out_dir") cfg.out_dir = value;
  else throw ValidationError("unknown config key '" + raw_key + "'");
}

/// Flat key=value text; '#' starts a comment.
inline void load_config_text(RunConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  load_config_text(cfg, in);
}

/// Settings that determine outputs. Thread count and output directory are
/// deliberately absent: they must not change any result.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
  return {
      {"mode", to_string(cfg.mode)},
      {"alpha", cfg.alpha},
      {"phi_min", cfg.phi_min},
      {"phi_max", cfg.phi_max},
      {"phi_points", cfg.phi_points},
      {"c", cfg.c},
      {"c_min", cfg.c_min},
      {"c_max", cfg.c_max},
      {"c_points", cfg.c_points},
      {"n", cfg.n},
      {"replicas", cfg.effective_replicas()},
      {"threshold", cfg.threshold},
      {"gen_cap", cfg.gen_cap},
      {"secondary_off", cfg.secondary_off},
      {"stop_at_threshold", cfg.stop_at_threshold},
      {"write_records", cfg.write_records},
      {"kernel_parent_types", cfg.kernel_parent_types},
      {"kernel_phi", cfg.kernel_phi},
      {"kernel_t_max", cfg.kernel_t_max},
      {"kernel_grid_points", cfg.kernel_grid_points},
      {"kernel_bins", cfg.kernel_bins},
      {"kernel_samples", cfg.kernel_samples},
      {"selftest_tolerance_scale", cfg.selftest_tolerance_scale},
      {"master_seed", cfg.master_seed},
  };
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.mode = parse_mode(j.at("mode").get<std::string>());
  cfg.alpha = j.at("alpha").get<double>();
  cfg.phi_min = j.at("phi_min").get<double>();
  cfg.phi_max = j.at("phi_max").get<double>();
  cfg.phi_points = j.at("phi_points").get<std::size_t>();
  cfg.c = j.at("c").get<double>();
  cfg.c_min = j.at("c_min").get<double>();
  cfg.c_max = j.at("c_max").get<double>();
  cfg.c_points = j.at("c_points").get<std::size_t>();
  cfg.n = j.at("n").get<std::size_t>();
  cfg.replicas = j.at("replicas").get<std::size_t>();
  cfg.threshold = j.at("threshold").get<std::size_t>();
  cfg.gen_cap = j.at("gen_cap").get<std::size_t>();
  cfg.secondary_off = j.at("secondary_off").get<bool>();
  cfg.stop_at_threshold = j.at("stop_at_threshold").get<bool>();
  cfg.write_records = j.at("write_records").get<bool>();
  cfg.kernel_parent_types = j.at("kernel_parent_types").get<std::vector<double>>();
  cfg.kernel_phi = j.at("kernel_phi").get<double>();
  cfg.kernel_t_max = j.at("kernel_t_max").get<double>();
  cfg.kernel_grid_points = j.at("kernel_grid_points").get<std::size_t>();
  cfg.kernel_bins = j.at("kernel_bins").get<std::size_t>();
  cfg.kernel_samples = j.at("kernel_samples").get<std::size_t>();
  cfg.selftest_tolerance_scale = j.at("selftest_tolerance_scale").get<double>();
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  return cfg;
}

inline std::string manifest_hash(const RunConfig& cfg) {
  return hex64(fnv1a64(config_to_json(cfg).dump()));
}

}  // namespace superinfect
