#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "superinfect/branching.hpp"
#include "superinfect/commands.hpp"
#include "superinfect/kernel.hpp"
#include "superinfect/spectral.hpp"

using namespace superinfect;

namespace {

const RateParams kUnit = RateParams::from_alpha_phi(1.0, 1.0);

std::pair<double, double> mean_count(double t, const RateParams& p, double c, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(simulate_offspring(t, p, c, rng).size());
    s += k;
    ss += k * k;
  }
  const double m = s / n;
  return {m, std::sqrt((ss / n - m * m) / n)};
}

}  // namespace

TEST(Branching, NoOffspringWithoutContactsOrSecondary) {
  Rng rng = make_rng(1);
  RateParams off = kUnit;
  off.beta2 = 0.0;
  for (int i = 0; i < 2000; ++i) {
    EXPECT_TRUE(simulate_offspring(0.4, kUnit, 0.0, rng).empty());
    EXPECT_TRUE(simulate_offspring(0.4, off, 7.0, rng).empty());
  }
}

TEST(Branching, OffspringTypesNonnegative) {
  Rng rng = make_rng(2);
  const RateParams p{2.0, 1.0, 0.5, 3.0};
  for (double t : {0.0, 0.3, 2.0, 6.0})
    for (int i = 0; i < 20000; ++i)
      for (const auto& o : simulate_offspring(t, p, 6.0, rng)) {
        ASSERT_GE(o.type, 0.0);
        ASSERT_GE(o.transmission_time, 0.0);
      }
}

TEST(Branching, MeanOffspringMatchesQuadrature) {
  const auto [m, se] = mean_count(0.0, kUnit, 4.0, 1000000, 11);
  EXPECT_LT(std::abs(m - kernel_total_intensity(0.0, kUnit, 4.0)), 3.0 * se);
}

TEST(Branching, DoublingContactsDoublesMean) {
  const auto [m1, s1] = mean_count(0.7, kUnit, 3.0, 400000, 12);
  const auto [m2, s2] = mean_count(0.7, kUnit, 6.0, 400000, 13);
  // delta method for the ratio
  const double r = m2 / m1, se = r * std::hypot(s1 / m1, s2 / m2);
  EXPECT_LT(std::abs(r - 2.0), 3.0 * se);
}

TEST(Branching, RunEdgeCases) {
  Rng rng = make_rng(3);
  RateParams off = kUnit;
  off.beta2 = 0.0;
  auto r = run_branching(off, 10.0, 100, 200, rng);
  EXPECT_EQ(r.outcome, BranchingOutcome::Extinct);
  EXPECT_EQ(r.total_individuals, 1u);
  r = run_branching(kUnit, 10.0, 1, 200, rng);
  EXPECT_EQ(r.outcome, BranchingOutcome::ReachedSizeCap);
  EXPECT_EQ(r.total_individuals, 1u);
  EXPECT_EQ(r.generations(), 0u);
}

TEST(Branching, GenerationCapCensors) {
  Rng rng = make_rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto r = run_branching(kUnit, 30.0, 1u << 30, 3, rng);
    EXPECT_LE(r.generations(), 3u);
    if (r.outcome == BranchingOutcome::ReachedGenerationCap) { EXPECT_GT(r.generation_sizes.back(), 0u); }
  }
}

TEST(Branching, SurvivalSignMatchesEigenvalue) {
  ASSERT_GT(top_eigenvalue(10.0, 1.0, 1.0), 1.0);
  ASSERT_LT(top_eigenvalue(3.0, 1.0, 1.0), 1.0);
  EXPECT_GT(estimate_branching_survival(kUnit, 10.0, 1000, 100, 200, 5, 0).survival, 0.0);
  EXPECT_EQ(estimate_branching_survival(kUnit, 3.0, 1000, 100, 200, 5, 1).survival, 0.0);
}

TEST(Branching, GenerationMeansDecayAtEigenvalue) {
  const double c = 5.0;
  const double lambda = top_eigenvalue(c, 1.0, 1.0);
  ASSERT_LT(lambda, 1.0);
  const std::size_t runs = 100000;
  std::vector<double> z(7, 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng = make_rng(task_seed(21, 0, r));
    const auto rec = run_branching(kUnit, c, 1u << 30, 6, rng);
    for (std::size_t k = 0; k < rec.generation_sizes.size(); ++k) z[k] += rec.generation_sizes[k];
  }
  std::vector<double> x, y;
  for (int k = 1; k <= 6; ++k) {
    x.push_back(std::exp(k));
    y.push_back(z[k] / runs);
  }
  EXPECT_NEAR(loglog_slope(x, y), std::log(lambda), 0.1);
}

TEST(EmpiricalKernel, ZeroWithoutSecondary) {
  RateParams off = kUnit;
  off.beta2 = 0.0;
  const auto e = empirical_kernel(0.5, off, 3.0, 10000, linear_grid(0, 5, 11), 1);
  for (double x : e.bin_intensity) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(e.outside, 0.0);
}

TEST(EmpiricalKernel, BinsAddUpToMeanOffspring) {
  const auto e = empirical_kernel(0.5, kUnit, 2.0, 200000, {0.0, 1.0, 1e300}, 7);
  const auto [m, se] = mean_count(0.5, kUnit, 2.0, 200000, 8);
  EXPECT_EQ(e.outside, 0.0);
  EXPECT_LT(std::abs(e.total_intensity() - m), 4.0 * std::sqrt(2.0) * se);
}

TEST(EmpiricalKernel, MatchesClosedFormPerBin) {
  const auto edges = linear_grid(0.0, 5.0, 21);
  const auto e = empirical_kernel(0.5, kUnit, 1.0, 1000000, edges, 99);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double expected = kernel_bin_integral(edges[b], edges[b + 1], 0.5, kUnit, 1.0);
    EXPECT_LT(std::abs(kernel_discrepancy(e.bin_intensity[b], e.bin_stderr[b], expected, e.samples)), 4.0)
        << "bin " << b;
  }
}

TEST(EmpiricalKernel, CaseSplitMatchesEachIntegral) {
  using boost::math::quadrature::gauss_kronrod;
  const double t = 1.0, c = 2.0;
  const RateParams p{1.5, 1.0, 2.0, 0.8};
  const auto edges = linear_grid(0.0, 4.0, 9);
  for (auto which : {KernelCase::PrimaryBeforeParentSecondary, KernelCase::PrimaryAfterParentSecondary}) {
    const auto e = empirical_kernel(t, p, c, 400000, edges, 31, 1, which);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      auto density = [&](double tp) {
        const auto k = kernel_mu_cases(tp, t, p, c);
        return which == KernelCase::PrimaryBeforeParentSecondary ? k.before.value : k.after.value;
      };
      double expected = 0.0;
      if (edges[b] < t && t < edges[b + 1])
        expected = gauss_kronrod<double, 15>::integrate(density, edges[b], t, 8, 1e-10) +
                   gauss_kronrod<double, 15>::integrate(density, t, edges[b + 1], 8, 1e-10);
      else
        expected = gauss_kronrod<double, 15>::integrate(density, edges[b], edges[b + 1], 8, 1e-10);
      EXPECT_LT(std::abs(kernel_discrepancy(e.bin_intensity[b], e.bin_stderr[b], expected, e.samples)), 4.0)
          << "bin " << b << " case " << static_cast<int>(which);
    }
  }
}

TEST(Branching, ThreadCountInvariant) {
  const auto a = estimate_branching_survival(kUnit, 10.0, 300, 100, 200, 3, 0, 1);
  const auto b = estimate_branching_survival(kUnit, 10.0, 300, 100, 200, 3, 0, 4);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_EQ(a.records[i].record.generation_sizes, b.records[i].record.generation_sizes);
  const auto edges = linear_grid(0.0, 5.0, 11);
  const auto k1 = empirical_kernel(0.5, kUnit, 2.0, 50000, edges, 4, 1);
  const auto k4 = empirical_kernel(0.5, kUnit, 2.0, 50000, edges, 4, 4);
  EXPECT_EQ(k1.bin_intensity, k4.bin_intensity);
  EXPECT_EQ(k1.bin_stderr, k4.bin_stderr);
}
