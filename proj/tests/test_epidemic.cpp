#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "superinfect/epidemic.hpp"

using namespace superinfect;

namespace {

Graph star(std::size_t leaves) {
  Graph g(leaves + 1);
  for (Node v = 1; v <= leaves; ++v) g.add_edge(0, v);
  return g;
}

void expect_legal(const EpidemicState& s) {
  for (Node v = 0; v < s.size(); ++v) {
    const auto& nc = s.node(v);
    if (nc.secondary == SecondaryState::Infective) { ASSERT_EQ(nc.primary, PrimaryState::Infective); }
    if (nc.primary == PrimaryState::Susceptible) { ASSERT_EQ(nc.secondary, SecondaryState::Susceptible); }
  }
}

}  // namespace

TEST(Epidemic, InitialState) {
  const Graph g = sample_er_graph(5, 0.0, 1);
  const EpidemicState s(g, 0);
  EXPECT_EQ(s.node(0), (NodeCompartments{PrimaryState::Infective, SecondaryState::Infective}));
  for (Node v = 1; v < 5; ++v) EXPECT_EQ(s.node(v), NodeCompartments{});
  EXPECT_EQ(s.time(), 0.0);
  EXPECT_EQ(s.primary_ever(), 1u);
  EXPECT_EQ(s.secondary_ever(), 1u);
}

TEST(Epidemic, InitialRateEdgeless) {
  const RateParams p{0.7, 1.3, 2.0, 0.4};
  const EpidemicState s(Graph(4), 2);
  EXPECT_DOUBLE_EQ(s.total_rate(p), p.rho1 + p.rho2);
}

TEST(Epidemic, InitialRateStarCentre) {
  const RateParams p{0.7, 1.3, 2.0, 0.4};
  const Graph g = star(6);
  const EpidemicState s(g, 0);
  EXPECT_EQ(s.counts(), (RateCounts{6, 1, 0, 1}));
  EXPECT_DOUBLE_EQ(s.total_rate(p), 6 * p.beta1 + p.rho1 + p.rho2);
}

TEST(Epidemic, IsolatedPrimaryOnlyRecovers) {
  // no secondary: beta2 = 0 but rho2 still acts on the seed's secondary
  const Graph g(1);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EpidemicState s(g, 0);
    Rng rng = make_rng(seed);
    const Event e = s.step(g, {1.0, 1.0, 0.0, 1e-300}, rng);
    EXPECT_EQ(e.kind, EventKind::PrimaryRecovery);
    EXPECT_EQ(s.node(0).primary, PrimaryState::Recovered);
    EXPECT_EQ(s.node(0).secondary, SecondaryState::Removed);
  }
}

TEST(Epidemic, BothInfectedPairHasNoSecondaryTarget) {
  Graph g(2);
  g.add_edge(0, 1);
  EpidemicState s(g, 0);
  Rng rng = make_rng(3);
  // primary transmission dominates every other rate by 1e12
  EXPECT_EQ(s.step(g, {1e12, 1.0, 1.0, 1.0}, rng).kind, EventKind::PrimaryTransmission);
  EXPECT_EQ(s.counts(), (RateCounts{0, 2, 1, 1}));
  EXPECT_EQ(s.step(g, {1.0, 1.0, 1e12, 1.0}, rng).kind, EventKind::SecondaryTransmission);
  EXPECT_EQ(s.node(1), (NodeCompartments{PrimaryState::Infective, SecondaryState::Infective}));
  EXPECT_EQ(s.counts(), (RateCounts{0, 2, 0, 2}));
}

TEST(Epidemic, InvariantsAfterEveryEvent) {
  std::mt19937_64 meta(17);
  for (int trial = 0; trial < 60; ++trial) {
    const RateParams p{0.2 + (meta() % 100) / 20.0, 0.2 + (meta() % 100) / 40.0, (meta() % 100) / 20.0,
                       0.1 + (meta() % 100) / 30.0};
    Rng rng = make_rng(meta());
    const Graph g = sample_er_graph(20 + meta() % 200, 1.0 + (meta() % 60) / 10.0, rng());
    EpidemicState s(g, static_cast<Node>(uniform_index(rng, g.size())));
    std::vector<NodeCompartments> prev(g.size());
    for (Node v = 0; v < g.size(); ++v) prev[v] = s.node(v);
    std::size_t pe = s.primary_ever(), se = s.secondary_ever();
    double t = 0.0;
    while (s.total_rate(p) > 0.0) {
      s.step(g, p, rng);
      expect_legal(s);
      ASSERT_EQ(s.counts(), s.recount(g));
      ASSERT_GE(s.primary_ever(), pe);
      ASSERT_GE(s.secondary_ever(), se);
      ASSERT_GE(s.time(), t);
      for (Node v = 0; v < g.size(); ++v) {
        if (prev[v].primary == PrimaryState::Recovered) { ASSERT_EQ(s.node(v).primary, PrimaryState::Recovered); }
        if (prev[v].secondary == SecondaryState::Removed) { ASSERT_EQ(s.node(v).secondary, SecondaryState::Removed); }
        prev[v] = s.node(v);
      }
      pe = s.primary_ever();
      se = s.secondary_ever();
      t = s.time();
    }
    std::size_t ever_p = 0, ever_s = 0;
    for (Node v = 0; v < g.size(); ++v) {
      ever_p += s.node(v).primary != PrimaryState::Susceptible;
      ever_s += s.node(v).secondary != SecondaryState::Susceptible;
    }
    EXPECT_EQ(ever_p, s.primary_ever());
    EXPECT_EQ(ever_s, s.secondary_ever());
  }
}

TEST(Epidemic, EdgelessRunInfectsOnlySeed) {
  Rng rng = make_rng(1);
  const auto r = run_epidemic(Graph(10), {1, 1, 1, 1}, 3, rng);
  EXPECT_EQ(r.final_primary_ever_infected, 1u);
  EXPECT_EQ(r.final_secondary_ever_infected, 1u);
  EXPECT_FALSE(r.censored);
}

TEST(Epidemic, NoSecondarySpreadWithoutBeta2) {
  RateParams p = RateParams::from_alpha_phi(2.0, 1.0);
  p.beta2 = 0.0;
  const auto s = estimate_outbreak_stats({2000, 8.0}, p, 40, 100, 5);
  for (const auto& r : s.records) EXPECT_EQ(r.outbreak.final_secondary_ever_infected, 1u);
  EXPECT_EQ(s.p_outbreak, 0.0);
  EXPECT_EQ(s.mean_fraction_infected, 0.0);
}

TEST(Epidemic, ThresholdZeroAlwaysCrossed) {
  const auto s = estimate_outbreak_stats({500, 3.0}, RateParams::from_alpha_phi(1, 1), 30, 0, 5);
  EXPECT_EQ(s.p_outbreak, 1.0);
}

TEST(Epidemic, StopRulesCensor) {
  Rng rng = make_rng(8);
  const Graph g = sample_er_graph(3000, 10.0, 1);
  StopRules stop;
  stop.max_events = 25;
  const auto r = run_epidemic(g, RateParams::from_alpha_phi(1, 1), 0, rng, stop);
  EXPECT_TRUE(r.censored);
  EXPECT_EQ(r.event_count, 25u);
}

TEST(Epidemic, SecondaryExtinctStopKeepsSecondaryOutcome) {
  const RateParams p = RateParams::from_alpha_phi(1.0, 0.5);
  EstimateOptions full, quick;
  quick.stop_when_secondary_extinct = true;
  const auto a = estimate_outbreak_stats({2000, 10.0}, p, 60, 30, 77, full);
  const auto b = estimate_outbreak_stats({2000, 10.0}, p, 60, 30, 77, quick);
  // same RNG draws up to secondary extinction, so identical secondary results
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_EQ(a.records[i].outbreak.final_secondary_ever_infected,
              b.records[i].outbreak.final_secondary_ever_infected);
}

TEST(Epidemic, PrimaryMarginalIndependentOfSecondaryRates) {
  const std::size_t reps = 2000;
  EstimateOptions o;
  o.stream = 1;
  const auto a = estimate_outbreak_stats({1000, 3.0}, {1, 1, 1, 1}, reps, 10, 123, o);
  o.stream = 2;
  const auto b = estimate_outbreak_stats({1000, 3.0}, {1, 1, 5, 0.2}, reps, 10, 123, o);
  std::vector<double> xa, xb;
  for (const auto& r : a.records) xa.push_back(r.outbreak.final_primary_ever_infected);
  for (const auto& r : b.records) xb.push_back(r.outbreak.final_primary_ever_infected);
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  double d = 0.0;
  for (double x : xa) {
    const double fa = std::upper_bound(xa.begin(), xa.end(), x) - xa.begin();
    const double fb = std::upper_bound(xb.begin(), xb.end(), x) - xb.begin();
    d = std::max(d, std::abs(fa - fb) / reps);
  }
  // two-sample KS critical value at level 0.01
  EXPECT_LT(d, 1.63 * std::sqrt(2.0 / reps));
}

TEST(Epidemic, PrimaryThreshold) {
  EstimateOptions o;
  o.stop_at_threshold = true;
  o.layer = Layer::Primary;
  const RateParams p = RateParams::from_alpha_phi(1.0, 1.0);
  EXPECT_LT(estimate_outbreak_stats({10000, 1.5}, p, 300, 100, 1, o).p_outbreak, 0.02);
  EXPECT_GT(estimate_outbreak_stats({10000, 3.0}, p, 300, 100, 2, o).p_outbreak, 0.2);
}

TEST(Epidemic, ThreadCountInvariant) {
  const RateParams p = RateParams::from_alpha_phi(1.0, 0.7);
  EstimateOptions one{1}, four{4};
  const auto a = estimate_outbreak_stats({1500, 8.0}, p, 40, 50, 9, one);
  const auto b = estimate_outbreak_stats({1500, 8.0}, p, 40, 50, 9, four);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].outbreak.event_count, b.records[i].outbreak.event_count);
    EXPECT_EQ(a.records[i].outbreak.end_time, b.records[i].outbreak.end_time);
  }
  EXPECT_EQ(a.p_outbreak, b.p_outbreak);
  EXPECT_EQ(a.mean_fraction_infected, b.mean_fraction_infected);
}

// Pinned from the first validated run (seed 20190101); guards against silent
// changes to the simulator or the seeding scheme.
TEST(Epidemic, RegressionOperatingPoint) {
  EstimateOptions o;
  o.stop_at_threshold = true;
  o.stop_when_secondary_extinct = true;
  const auto s = estimate_outbreak_stats({10000, 10.0}, RateParams::from_alpha_phi(1, 1), 1000, 100, 20190101, o);
  EXPECT_EQ(s.p_outbreak, 0.186);
}
