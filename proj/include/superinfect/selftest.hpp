#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "superinfect/branching.hpp"
#include "superinfect/commands.hpp"
#include "superinfect/config.hpp"
#include "superinfect/epidemic.hpp"
#include "superinfect/graph.hpp"
#include "superinfect/kernel.hpp"
#include "superinfect/special_functions.hpp"
#include "superinfect/spectral.hpp"

namespace superinfect {

struct CheckResult {
  std::string name;
  double observed = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

namespace selftest_detail {

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Mean offspring count per parent and its standard error.
inline std::pair<double, double> mean_offspring(double t, const RateParams& p, double c, std::size_t n,
                                                std::uint64_t seed, KernelCase which = KernelCase::All) {
  Rng rng = make_rng(seed);
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double k = 0.0;
    for (const Offspring& o : simulate_offspring(t, p, c, rng)) {
      const bool early = o.transmission_time < t;
      if (which == KernelCase::PrimaryBeforeParentSecondary && !early) continue;
      if (which == KernelCase::PrimaryAfterParentSecondary && early) continue;
      k += 1.0;
    }
    s += k;
    ss += k * k;
  }
  const double m = s / n;
  return {m, std::sqrt((ss / n - m * m) / n)};
}

}  // namespace selftest_detail

/// Reduced-size run of the library invariants. Tolerances are multiplied by
/// tolerance_scale; counts of violated exact invariants use tolerance 0.
inline std::vector<CheckResult> run_selftest(double tolerance_scale, std::uint64_t seed, unsigned threads) {
  using namespace selftest_detail;
  std::vector<CheckResult> out;
  // passes when observed <= tolerance * scale
  auto check_le = [&](std::string name, double observed, double tol) {
    out.push_back({std::move(name), observed, tol * tolerance_scale,
                   observed <= tol * tolerance_scale});
  };
  auto exact = [&](std::string name, double violations) {
    out.push_back({std::move(name), violations, 0.0, violations == 0.0});
  };
  auto check_ge = [&](std::string name, double observed, double bound) {
    out.push_back({std::move(name), observed, bound, observed >= bound});
  };

  // graph-gen
  {
    const Graph g = sample_er_graph(2000, 5.0, seed);
    double bad = 0;
    for (Node u = 0; u < g.size(); ++u) {
      auto nb = g.neighbors(u);
      std::vector<Node> sorted(nb.begin(), nb.end());
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) ++bad;
      for (Node v : nb) {
        if (v == u) ++bad;
        auto back = g.neighbors(v);
        if (std::find(back.begin(), back.end(), u) == back.end()) ++bad;
      }
    }
    exact("graph.symmetric_simple", bad);
    exact("graph.deterministic_in_seed", sample_er_graph(2000, 5.0, seed) == g ? 0.0 : 1.0);
  }
  {
    const std::size_t n = 1000, reps = 50;
    const double c = 4.0, pe = c / n, pairs = n * (n - 1) / 2.0;
    double s = 0;
    for (std::size_t r = 0; r < reps; ++r) s += sample_er_graph(n, c, task_seed(seed, 1, r)).edge_count();
    const double mean = s / reps, sd = std::sqrt(pairs * pe * (1 - pe) / reps);
    check_le("graph.edge_count_mean_z", std::abs(mean - pairs * pe) / sd, 4.0);
  }
  {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    const DegreeSummary d = degree_stats(g);
    exact("graph.degree_stats_triangle", (d.mean_degree == 1.5 && d.max_degree == 2 && d.isolated_count == 1) ? 0 : 1);
  }

  // superinfection-sim
  {
    double bad_state = 0, bad_counts = 0, bad_monotone = 0;
    const RateParams p = RateParams::from_alpha_phi(1.5, 0.7);
    for (std::uint64_t r = 0; r < 20; ++r) {
      Rng rng = make_rng(task_seed(seed, 2, r));
      const Graph g = sample_er_graph(300, 4.0, rng());
      EpidemicState st(g, static_cast<Node>(uniform_index(rng, g.size())));
      std::size_t last_p = st.primary_ever(), last_s = st.secondary_ever();
      while (st.total_rate(p) > 0.0) {
        st.step(g, p, rng);
        for (Node v = 0; v < g.size(); ++v) {
          const auto& nc = st.node(v);
          if (nc.secondary == SecondaryState::Infective && nc.primary != PrimaryState::Infective) ++bad_state;
          if (nc.primary == PrimaryState::Susceptible && nc.secondary != SecondaryState::Susceptible) ++bad_state;
        }
        if (!(st.counts() == st.recount(g))) ++bad_counts;
        if (st.primary_ever() < last_p || st.secondary_ever() < last_s) ++bad_monotone;
        last_p = st.primary_ever();
        last_s = st.secondary_ever();
      }
    }
    exact("sim.compartment_legality", bad_state);
    exact("sim.rate_bookkeeping", bad_counts);
    exact("sim.monotone_counters", bad_monotone);
  }
  {
    RateParams p = RateParams::from_alpha_phi(1.0, 1.0);
    p.beta2 = 0.0;
    const auto s = estimate_outbreak_stats({500, 4.0}, p, 50, 10, seed, {threads});
    double bad = 0;
    for (const auto& r : s.records) bad += r.outbreak.final_secondary_ever_infected != 1;
    exact("sim.beta2_zero_no_secondary_spread", bad);
  }
  {
    const std::size_t reps = 400;
    const RateParams a{1.0, 1.0, 1.0, 1.0}, b{1.0, 1.0, 5.0, 0.2};
    EstimateOptions o{threads};
    o.stream = 3;
    const auto sa = estimate_outbreak_stats({500, 3.0}, a, reps, 10, seed, o);
    o.stream = 4;
    const auto sb = estimate_outbreak_stats({500, 3.0}, b, reps, 10, seed, o);
    std::vector<double> xa, xb;
    for (const auto& r : sa.records) xa.push_back(r.outbreak.final_primary_ever_infected);
    for (const auto& r : sb.records) xb.push_back(r.outbreak.final_primary_ever_infected);
    // critical value at level 0.001
    check_le("sim.primary_marginal_independent_ks", ks_statistic(xa, xb), 1.95 * std::sqrt(2.0 / reps));
  }
  {
    EstimateOptions o{threads};
    o.stop_at_threshold = true;
    o.layer = Layer::Primary;
    o.stream = 5;
    const RateParams p = RateParams::from_alpha_phi(1.0, 1.0);
    check_le("sim.primary_subcritical_c1.5",
             estimate_outbreak_stats({2000, 1.5}, p, 200, 100, seed, o).p_outbreak, 0.05);
    o.stream = 6;
    check_ge("sim.primary_supercritical_c3",
             estimate_outbreak_stats({2000, 3.0}, p, 200, 100, seed, o).p_outbreak, 0.2);
  }

  // branching-sim
  const RateParams unit = RateParams::from_alpha_phi(1.0, 1.0);
  {
    Rng rng = make_rng(task_seed(seed, 7, 0));
    double bad = 0;
    RateParams off = unit;
    off.beta2 = 0.0;
    for (int i = 0; i < 1000; ++i) {
      bad += !simulate_offspring(0.3, unit, 0.0, rng).empty();
      bad += !simulate_offspring(0.3, off, 5.0, rng).empty();
    }
    const auto rec = run_branching(unit, 10.0, 1, 200, rng);
    bad += rec.outcome != BranchingOutcome::ReachedSizeCap || rec.total_individuals != 1;
    exact("branching.degenerate_cases", bad);
  }
  {
    const double t = 0.5, c = 1.0;
    const auto [m, se] = mean_offspring(t, unit, c, 200000, task_seed(seed, 8, 0));
    check_le("branching.mean_offspring_vs_quadrature_z", std::abs(m - kernel_total_intensity(t, unit, c)) / se, 4.0);
    const auto [m2, se2] = mean_offspring(t, unit, 2.0 * c, 200000, task_seed(seed, 8, 1));
    check_le("branching.poisson_thinning_ratio_z", std::abs(m2 - 2.0 * m) / std::hypot(se2, 2.0 * se), 4.0);

    using boost::math::quadrature::gauss_kronrod;
    auto before_density = [&](double tp) { return kernel_mu_cases(tp, t, unit, c).before.value; };
    const double before = gauss_kronrod<double, 15>::integrate(before_density, 0.0, t, 10, 1e-10) +
                          gauss_kronrod<double, 15>::integrate(before_density, t, INFINITY, 10, 1e-10);
    const auto [mb, seb] = mean_offspring(t, unit, c, 200000, task_seed(seed, 8, 2), KernelCase::PrimaryBeforeParentSecondary);
    check_le("branching.case_split_before_z", std::abs(mb - before) / seb, 4.0);
    const auto [ma, sea] = mean_offspring(t, unit, c, 200000, task_seed(seed, 8, 3), KernelCase::PrimaryAfterParentSecondary);
    check_le("branching.case_split_after_z",
             std::abs(ma - (kernel_total_intensity(t, unit, c) - before)) / sea, 4.0);
  }
  {
    // subcritical generation growth: E[Z_n] ~ lambda^n
    const double c = 5.0;
    const std::size_t runs = 20000, gens = 8;
    std::vector<double> z(gens + 1, 0.0);
    for (std::size_t r = 0; r < runs; ++r) {
      Rng rng = make_rng(task_seed(seed, 9, r));
      const auto rec = run_branching(unit, c, 1u << 30, gens, rng);
      for (std::size_t k = 0; k < rec.generation_sizes.size(); ++k) z[k] += rec.generation_sizes[k];
    }
    std::vector<double> x, y;
    for (std::size_t k = 3; k <= gens; ++k) {
      x.push_back(std::exp(static_cast<double>(k)));
      y.push_back(z[k] / runs);
    }
    check_le("branching.generation_growth_rate", std::abs(loglog_slope(x, y) - std::log(top_eigenvalue(c, 1.0, 1.0))), 0.1);
  }

  // kernel
  {
    double neg = 0;
    for (double t : {0.0, 0.5, 2.0, 5.0})
      for (double tp = 0.0; tp <= 20.0; tp += 0.25) neg += kernel_mu(tp, t, unit, 3.0) < 0.0;
    exact("kernel.nonnegative", neg);
    check_le("kernel.tail_decay", kernel_mu(60.0, 1.0, unit, 3.0) / kernel_mu(1.0, 1.0, unit, 3.0), 1e-12);
    double jump = 0.0;
    for (double t : {0.3, 1.0, 4.0})
      jump = std::max(jump, std::abs(kernel_mu(t * (1 + 1e-10), t, unit, 3.0) - kernel_mu(t * (1 - 1e-10), t, unit, 3.0)));
    check_le("kernel.continuity_at_parent_type", jump, 1e-6);
    double err = 0.0;
    const RateParams gen{2.0, 1.0, 0.7, 3.0};
    for (double t : {0.0, 0.4, 1.7})
      for (double tp : {0.0, 0.3, 1.0, 2.5})
        err = std::max(err, std::abs(kernel_mu(tp, t, gen, 2.0) - kernel_mu_quadrature(tp, t, gen, 2.0).value));
    check_le("kernel.closed_form_vs_quadrature", err, 1e-8);
  }

  // special functions
  {
    double bad_zero = 0, bad_phi = 0;
    for (double a : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
      const double j = bessel_first_zero(a);
      bad_zero += !(a * (a + 2) < j * j && j * j < 4 * (a + 1) * (a + 2));
      for (double f : {0.01, 0.3, 0.7, 0.95}) {
        const double z = f * j * j / 4.0, ph = phi_ratio(a, z);
        bad_phi += !(1.0 < ph && ph < 1.0 + 4 * z / (j * j - 4 * z));
      }
    }
    exact("special.bessel_zero_sandwich", bad_zero);
    exact("special.phi_ratio_sandwich", bad_phi);
    check_le("special.first_zero_j0", std::abs(bessel_first_zero(0.0) - 2.404825557695773), 1e-10);
    double rel = 0.0;
    for (double a : {0.5, 2.0, 7.0})
      for (double x : {0.5, 3.0, 9.0}) {
        const double ref = std::tgamma(a + 1) * std::pow(x / 2, -a) * std::cyl_bessel_j(a, x);
        rel = std::max(rel, std::abs(hyp0f1(a + 1, -x * x / 4) - ref) / std::max(1e-300, std::abs(ref)));
      }
    check_le("special.hyp0f1_vs_bessel_j", rel, 1e-9);
  }

  // spectral
  {
    double bad = 0;
    for (double phi : log_grid(1e-3, 1e3, 61)) {
      const auto s = critical_connectivity(1.0, phi);
      bad += !(s.lower_env < s.c_star && s.c_star < s.upper_env);
    }
    exact("spectral.envelope_sandwich_default_grid", bad);
    const auto e = envelope_bounds(1.0, 1.0);
    check_le("spectral.envelope_unit_point", std::max(std::abs(e.upper - 15.0), std::abs(e.lower - 30.0 / 7.0)), 1e-12);

    double worst = 0.0;
    for (auto [a, ph] : {std::pair{1.0, 1.0}, std::pair{0.5, 0.2}, std::pair{3.0, 4.0}}) {
      const RateParams p = RateParams::from_alpha_phi(a, ph);
      const double d = discretized_spectral_radius(p, 10.0, 0.0, 600, threads).lambda_doubled;
      worst = std::max(worst, std::abs(d / top_eigenvalue(10.0, a, ph) - 1.0));
    }
    check_le("spectral.two_oracle_relative", worst, 5e-3);

    const auto series = eigenfunction_series(1.0, 1.0, 10.0, 60);
    check_le("spectral.eigen_residual", eigen_residual(series, 10.0, 21), 1e-6);

    const auto lo = log_grid(1e-3, 1e-2, 11), hi = log_grid(1e2, 1e3, 11);
    std::vector<double> clo, chi;
    for (double phi : lo) clo.push_back(critical_connectivity(1.0, phi).c_star);
    for (double phi : hi) chi.push_back(critical_connectivity(1.0, phi).c_star);
    check_le("spectral.slope_small_phi", std::abs(loglog_slope(lo, clo) + 1.0), 0.05);
    check_le("spectral.slope_large_phi", std::abs(loglog_slope(hi, chi) - 1.0), 0.05);

    const RateParams g{2.0, 1.0, 1.0, 3.0};
    check_le("spectral.time_unit_invariance",
             std::abs(critical_connectivity(g.scaled(3.7)) / critical_connectivity(g) - 1.0), 1e-10);

    int flips = 0;
    bool prev = false;
    const auto grid = log_grid(1e-3, 1e3, 61);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const bool v = top_eigenvalue(10.0, 1.0, grid[i]) > 1.0;
      if (i > 0 && v != prev) ++flips;
      prev = v;
    }
    exact("spectral.reentrance_two_flips", std::abs(flips - 2));
  }

  // sweep plumbing
  {
    const RateParams p = RateParams::from_alpha_phi(1.0, 0.5);
    EstimateOptions one{1}, many{std::max(3u, threads)};
    one.stop_when_secondary_extinct = many.stop_when_secondary_extinct = true;
    const auto a = estimate_outbreak_stats({1000, 6.0}, p, 24, 50, seed, one);
    const auto b = estimate_outbreak_stats({1000, 6.0}, p, 24, 50, seed, many);
    double diff = 0;
    for (std::size_t i = 0; i < a.records.size(); ++i)
      diff += a.records[i].outbreak.final_secondary_ever_infected != b.records[i].outbreak.final_secondary_ever_infected ||
              a.records[i].outbreak.event_count != b.records[i].outbreak.event_count;
    exact("sweep.thread_count_invariance", diff);

    RunConfig cfg;
    cfg.mode = Mode::Compare;
    cfg.alpha = 0.3;
    cfg.master_seed = 99;
    exact("sweep.manifest_roundtrip", manifest_hash(config_from_json(config_to_json(cfg))) == manifest_hash(cfg) ? 0 : 1);
  }
  return out;
}

/// Runs the suite, prints one line per check and writes selftest_report.json.
/// Exit code 0 when everything passes, 3 otherwise.
inline CommandResult cmd_selftest(const RunConfig& cfg, std::ostream& log = std::cout) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = detail::prepare_out_dir(cfg);
  const auto checks = run_selftest(cfg.selftest_tolerance_scale, cfg.master_seed, cfg.threads);
  nlohmann::json report = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& c : checks) {
    failed += !c.passed;
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " observed=" << format_double(c.observed)
        << " tolerance=" << format_double(c.tolerance) << '\n';
    report.push_back({{"name", c.name}, {"observed", c.observed}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  }
  log << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  {
    std::ofstream out(dir / "selftest_report.json", std::ios::binary);
    nlohmann::json j{{"manifest_hash", manifest_hash(cfg)}, {"checks", report}, {"failed", failed}};
    out << j.dump(2) << '\n';
  }
  CommandResult res;
  res.files = {"selftest_report.json"};
  detail::write_manifest(cfg, dir, res.files, detail::elapsed_since(start));
  res.exit_code = failed == 0 ? 0 : 3;
  return res;
}

}  // namespace superinfect
