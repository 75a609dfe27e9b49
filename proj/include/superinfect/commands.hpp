#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "superinfect/branching.hpp"
#include "superinfect/config.hpp"
#include "superinfect/csv.hpp"
#include "superinfect/epidemic.hpp"
#include "superinfect/kernel.hpp"
#include "superinfect/rng.hpp"
#include "superinfect/spectral.hpp"

namespace superinfect {

// Seed streams. Sweep point i of a command uses stream (base + i).
inline constexpr std::uint64_t kStreamNetwork = 0x1000000ULL;
inline constexpr std::uint64_t kStreamBranching = 0x2000000ULL;
inline constexpr std::uint64_t kStreamHeatmap = 0x3000000ULL;
inline constexpr std::uint64_t kStreamKernel = 0x4000000ULL;

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> files;  ///< written files, relative to out_dir
};

namespace detail {

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + cfg.out_dir);
  return dir;
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const RunConfig& cfg, const std::filesystem::path& dir,
                           std::vector<std::string>& files, double wall_seconds) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  j["manifest_hash"] = manifest_hash(cfg);
  j["master_seed"] = cfg.master_seed;
  j["seed_rule"] = kSeedRule;
  j["version"] = kVersion;
  j["outputs"] = files;
  j["threads"] = cfg.threads;
  j["created_utc"] = utc_now();
  j["wall_seconds"] = wall_seconds;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw ValidationError("cannot write manifest.json");
  out << j.dump(2) << '\n';
  files.push_back("manifest.json");
}

inline double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::vector<double> phi_grid(const RunConfig& cfg) {
  return log_grid(cfg.phi_min, cfg.phi_max, cfg.phi_points);
}

// lambda = c / c*, or 0 without a secondary.
inline double lambda_at(const RunConfig& cfg, double phi, double c) {
  if (cfg.secondary_off) return 0.0;
  return c / critical_connectivity(cfg.alpha, phi).c_star;
}

}  // namespace detail

/// (observed - expected) / stderr for one histogram bin. The stderr is floored
/// at the Poisson null value sqrt(expected / samples), since a bin that
/// happens to stay empty has zero sample variance.
inline double kernel_discrepancy(double observed, double stderr_obs, double expected, std::size_t samples) {
  const double se = std::max(stderr_obs, std::sqrt(std::max(expected, 0.0) / static_cast<double>(samples)));
  const double diff = observed - expected;
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
}

/// boundary.csv: c*, l, u, gamma per phi, with end-decade log-log slopes as footer comments.
inline CommandResult cmd_boundary(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = detail::prepare_out_dir(cfg);
  const std::string hash = manifest_hash(cfg);
  const auto phis = detail::phi_grid(cfg);
  std::vector<SpectralSolution> sols(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) {
    try {
      sols[i] = critical_connectivity(cfg.alpha, phis[i]);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (phi=" + format_double(phis[i]) + ")");
    }
  }

  CommandResult res;
  {
    CsvWriter w((dir / "boundary.csv").string(), hash, {"phi", "alpha", "c_star", "l", "u", "gamma"});
    for (const auto& s : sols) {
      w.field(s.phi).field(s.alpha).field(s.c_star).field(s.lower_env).field(s.upper_env).field(s.gamma);
      w.end_row();
    }
    auto decade_slope = [&](bool first) -> std::optional<double> {
      std::vector<double> x, y;
      for (const auto& s : sols) {
        const bool in = first ? s.phi <= phis.front() * 10.0 * (1 + 1e-12)
                              : s.phi >= phis.back() / 10.0 * (1 - 1e-12);
        if (in) {
          x.push_back(s.phi);
          y.push_back(s.c_star);
        }
      }
      if (x.size() < 2) return std::nullopt;
      return loglog_slope(x, y);
    };
    if (auto s = decade_slope(true)) w.comment("slope_first_decade=" + format_double(*s));
    if (auto s = decade_slope(false)) w.comment("slope_last_decade=" + format_double(*s));
  }
  res.files.push_back("boundary.csv");
  detail::write_manifest(cfg, dir, res.files, detail::elapsed_since(start));
  return res;
}

/// compare.csv: network outbreak statistics, branching survival and theory verdict per phi.
inline CommandResult cmd_compare(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = detail::prepare_out_dir(cfg);
  const std::string hash = manifest_hash(cfg);
  const auto phis = detail::phi_grid(cfg);
  const std::size_t replicas = cfg.effective_replicas();
  const NetworkSpec net{cfg.n, cfg.c};

  CommandResult res;
  CsvWriter w((dir / "compare.csv").string(), hash,
              {"phi", "lambda", "theory_survives", "network_p", "network_p_stderr",
               "network_fraction", "network_fraction_stderr", "branching_p", "branching_p_stderr"});
  std::unique_ptr<CsvWriter> rep, br;
  if (cfg.write_records) {
    rep = std::make_unique<CsvWriter>(
        (dir / "compare_replicas.csv").string(), hash,
        std::initializer_list<std::string_view>{"replica_id", "seed", "n", "c", "beta1", "rho1", "beta2",
                                                "rho2", "final_primary", "final_secondary", "crossed",
                                                "end_time", "events"});
    br = std::make_unique<CsvWriter>(
        (dir / "compare_branching.csv").string(), hash,
        std::initializer_list<std::string_view>{"run_id", "seed", "outcome", "generations",
                                                "total_individuals"});
  }

  for (std::size_t i = 0; i < phis.size(); ++i) {
    const RateParams p = cfg.rates(phis[i]);
    const double lambda = detail::lambda_at(cfg, phis[i], cfg.c);

    EstimateOptions opt;
    opt.threads = cfg.threads;
    opt.stop_at_threshold = cfg.stop_at_threshold;
    opt.stop_when_secondary_extinct = true;
    opt.stream = kStreamNetwork + i;
    const OutbreakStats ns = estimate_outbreak_stats(net, p, replicas, cfg.threshold, cfg.master_seed, opt);
    const BranchingStats bs = estimate_branching_survival(p, cfg.c, replicas, cfg.threshold + 1, cfg.gen_cap,
                                                          cfg.master_seed, kStreamBranching + i, cfg.threads);

    w.field(phis[i]).field(lambda).field(lambda > 1.0).field(ns.p_outbreak).field(ns.p_outbreak_stderr)
        .field(ns.mean_fraction_infected).field(ns.mean_fraction_stderr).field(bs.survival)
        .field(bs.survival_stderr);
    w.end_row();

    if (rep) {
      for (const auto& r : ns.records) {
        rep->field(i * replicas + r.replica_id).field(r.seed).field(cfg.n).field(cfg.c).field(p.beta1)
            .field(p.rho1).field(p.beta2).field(p.rho2).field(r.outbreak.final_primary_ever_infected)
            .field(r.outbreak.final_secondary_ever_infected).field(r.outbreak.crossed_threshold)
            .field(r.outbreak.end_time).field(r.outbreak.event_count);
        rep->end_row();
      }
      for (const auto& r : bs.records) {
        br->field(i * replicas + r.run_id).field(r.seed).field(std::string_view(to_string(r.record.outcome)))
            .field(r.record.generations()).field(r.record.total_individuals);
        br->end_row();
      }
    }
  }
  if (auto win = cfg.secondary_off ? std::nullopt : survival_window(cfg.alpha, cfg.c))
    w.comment("theory_window=" + format_double(win->first) + "," + format_double(win->second));
  else
    w.comment("theory_window=none");
  res.files.push_back("compare.csv");
  if (rep) {
    res.files.push_back("compare_replicas.csv");
    res.files.push_back("compare_branching.csv");
  }
  rep.reset();
  br.reset();
  detail::write_manifest(cfg, dir, res.files, detail::elapsed_since(start));
  return res;
}

/// heatmap.csv over phi x c, plus the lambda = 1 contour in boundary_overlay.csv.
inline CommandResult cmd_heatmap(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = detail::prepare_out_dir(cfg);
  const std::string hash = manifest_hash(cfg);
  const auto phis = detail::phi_grid(cfg);
  const auto cs = linear_grid(cfg.c_min, cfg.c_max, cfg.c_points);
  const std::size_t replicas = cfg.effective_replicas();

  CommandResult res;
  {
    CsvWriter w((dir / "heatmap.csv").string(), hash,
                {"phi", "c", "lambda", "p_outbreak", "p_outbreak_stderr"});
    for (std::size_t i = 0; i < phis.size(); ++i) {
      const RateParams p = cfg.rates(phis[i]);
      for (std::size_t j = 0; j < cs.size(); ++j) {
        EstimateOptions opt;
        opt.threads = cfg.threads;
        opt.stop_at_threshold = true;
        opt.stop_when_secondary_extinct = true;
        opt.stream = kStreamHeatmap + i * cs.size() + j;
        const OutbreakStats s =
            estimate_outbreak_stats({cfg.n, cs[j]}, p, replicas, cfg.threshold, cfg.master_seed, opt);
        w.field(phis[i]).field(cs[j]).field(detail::lambda_at(cfg, phis[i], cs[j])).field(s.p_outbreak)
            .field(s.p_outbreak_stderr);
        w.end_row();
      }
    }
  }
  {
    CsvWriter w((dir / "boundary_overlay.csv").string(), hash, {"phi", "c_star"});
    for (double phi : phis) {
      w.field(phi).field(critical_connectivity(cfg.alpha, phi).c_star);
      w.end_row();
    }
  }
  res.files = {"heatmap.csv", "boundary_overlay.csv"};
  detail::write_manifest(cfg, dir, res.files, detail::elapsed_since(start));
  return res;
}

/// kernel_grid.csv (closed form) and kernel_empirical.csv (generative sampler vs binned closed form).
inline CommandResult cmd_kernel(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = detail::prepare_out_dir(cfg);
  const std::string hash = manifest_hash(cfg);
  const RateParams p = cfg.rates(cfg.kernel_phi);
  const auto grid = linear_grid(0.0, cfg.kernel_t_max, cfg.kernel_grid_points);

  CommandResult res;
  {
    CsvWriter w((dir / "kernel_grid.csv").string(), hash, {"t", "t_prime", "mu"});
    for (double t : grid)
      for (double tp : grid) {
        w.field(t).field(tp).field(kernel_mu(tp, t, p, cfg.c));
        w.end_row();
      }
  }
  {
    CsvWriter w((dir / "kernel_empirical.csv").string(), hash,
                {"t", "bin_lo", "bin_hi", "intensity", "stderr", "expected", "discrepancy_stderr"});
    const auto edges = linear_grid(0.0, cfg.kernel_t_max, cfg.kernel_bins + 1);
    for (std::size_t k = 0; k < cfg.kernel_parent_types.size(); ++k) {
      const double t = cfg.kernel_parent_types[k];
      const EmpiricalKernel e =
          empirical_kernel(t, p, cfg.c, cfg.kernel_samples, edges,
                           task_seed(cfg.master_seed, kStreamKernel, k), cfg.threads);
      for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        const double expected = kernel_bin_integral(edges[b], edges[b + 1], t, p, cfg.c);
        const double z = kernel_discrepancy(e.bin_intensity[b], e.bin_stderr[b], expected, e.samples);
        w.field(t).field(edges[b]).field(edges[b + 1]).field(e.bin_intensity[b]).field(e.bin_stderr[b])
            .field(expected).field(z);
        w.end_row();
      }
    }
  }
  res.files = {"kernel_grid.csv", "kernel_empirical.csv"};
  detail::write_manifest(cfg, dir, res.files, detail::elapsed_since(start));
  return res;
}

}  // namespace superinfect
