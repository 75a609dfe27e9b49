#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <vector>

#include "superinfect/error.hpp"
#include "superinfect/fenwick.hpp"
#include "superinfect/graph.hpp"
#include "superinfect/parallel.hpp"
#include "superinfect/rates.hpp"
#include "superinfect/rng.hpp"

namespace superinfect {

enum class PrimaryState : std::uint8_t { Susceptible, Infective, Recovered };
// Removed covers both secondary recovery and termination by primary recovery.
enum class SecondaryState : std::uint8_t { Susceptible, Infective, Removed };

struct NodeCompartments {
  PrimaryState primary = PrimaryState::Susceptible;
  SecondaryState secondary = SecondaryState::Susceptible;

  bool operator==(const NodeCompartments&) const = default;
};

enum class EventKind : std::uint8_t {
  PrimaryTransmission,
  PrimaryRecovery,
  SecondaryTransmission,
  SecondaryRecovery,
};

struct Event {
  EventKind kind;
  Node source;  ///< transmitting or recovering node
  Node target;  ///< newly infected node (== source for recoveries)
  double time;
};

/// Integer event-class counts. The total rate is
///   beta1*primary_pairs + rho1*primary_infectives
///   + beta2*secondary_pairs + rho2*secondary_infectives.
struct RateCounts {
  std::int64_t primary_pairs = 0;    ///< ordered (I1, S1) adjacent pairs
  std::int64_t primary_infectives = 0;
  std::int64_t secondary_pairs = 0;  ///< ordered (I2, I1&S2) adjacent pairs
  std::int64_t secondary_infectives = 0;

  bool operator==(const RateCounts&) const = default;

  double total_rate(const RateParams& p) const {
    return p.beta1 * static_cast<double>(primary_pairs) +
           p.rho1 * static_cast<double>(primary_infectives) +
           p.beta2 * static_cast<double>(secondary_pairs) +
           p.rho2 * static_cast<double>(secondary_infectives);
  }
};

/// Per-node compartments plus incrementally maintained event-class weights.
/// Each primary infective carries weight = #susceptible neighbours; each
/// secondary infective carries weight = #neighbours that are primary
/// infective and secondary susceptible.
class EpidemicState {
 public:
  EpidemicState(const Graph& g, Node seed_node)
      : nodes_(g.size()),
        primary_weight_(g.size()),
        secondary_weight_(g.size()),
        primary_infectives_(g.size()),
        secondary_infectives_(g.size()) {
    require(seed_node < g.size(), "seed node out of range");
    infect_primary(g, seed_node);
    infect_secondary(g, seed_node);
  }

  std::size_t size() const { return nodes_.size(); }
  const NodeCompartments& node(Node v) const { return nodes_[v]; }
  double time() const { return time_; }
  std::uint64_t event_count() const { return events_; }
  std::size_t primary_ever() const { return primary_ever_; }
  std::size_t secondary_ever() const { return secondary_ever_; }

  RateCounts counts() const {
    return {primary_weight_.total(), static_cast<std::int64_t>(primary_infectives_.size()),
            secondary_weight_.total(), static_cast<std::int64_t>(secondary_infectives_.size())};
  }
  double total_rate(const RateParams& p) const { return counts().total_rate(p); }

  /// Recount of the event classes straight from the compartments.
  RateCounts recount(const Graph& g) const {
    RateCounts c;
    for (Node u = 0; u < g.size(); ++u) {
      if (nodes_[u].primary != PrimaryState::Infective) continue;
      ++c.primary_infectives;
      const bool secondary_source = nodes_[u].secondary == SecondaryState::Infective;
      if (secondary_source) ++c.secondary_infectives;
      for (Node w : g.neighbors(u)) {
        if (nodes_[w].primary == PrimaryState::Susceptible) ++c.primary_pairs;
        if (secondary_source && is_secondary_target(w)) ++c.secondary_pairs;
      }
    }
    return c;
  }

  /// Draws the next event by the direct method and applies it.
  /// Precondition: total_rate(p) > 0.
  Event step(const Graph& g, const RateParams& p, Rng& rng) {
    const RateCounts c = counts();
    const double rates[4] = {
        p.beta1 * static_cast<double>(c.primary_pairs),
        p.rho1 * static_cast<double>(c.primary_infectives),
        p.beta2 * static_cast<double>(c.secondary_pairs),
        p.rho2 * static_cast<double>(c.secondary_infectives)};
    const double total = rates[0] + rates[1] + rates[2] + rates[3];
    if (!(total > 0.0)) throw std::logic_error("step called in an absorbing state");

    time_ += exponential(rng, total);
    double x = uniform01(rng) * total;
    int kind = 0;
    while (kind < 3 && (x >= rates[kind] || rates[kind] == 0.0)) {
      x -= rates[kind];
      ++kind;
    }
    while (rates[kind] == 0.0) --kind;  // rounding at the top edge

    Event ev{static_cast<EventKind>(kind), 0, 0, time_};
    switch (ev.kind) {
      case EventKind::PrimaryTransmission: {
        auto [u, offset] = primary_weight_.find(
            static_cast<std::int64_t>(uniform_index(rng, c.primary_pairs)));
        ev.source = static_cast<Node>(u);
        ev.target = nth_neighbor(g, ev.source, offset, [&](Node w) {
          return nodes_[w].primary == PrimaryState::Susceptible;
        });
        infect_primary(g, ev.target);
        break;
      }
      case EventKind::PrimaryRecovery:
        ev.source = ev.target = primary_infectives_[uniform_index(rng, primary_infectives_.size())];
        recover_primary(g, ev.source);
        break;
      case EventKind::SecondaryTransmission: {
        auto [u, offset] = secondary_weight_.find(
            static_cast<std::int64_t>(uniform_index(rng, c.secondary_pairs)));
        ev.source = static_cast<Node>(u);
        ev.target = nth_neighbor(g, ev.source, offset,
                                 [&](Node w) { return is_secondary_target(w); });
        infect_secondary(g, ev.target);
        break;
      }
      case EventKind::SecondaryRecovery:
        ev.source = ev.target =
            secondary_infectives_[uniform_index(rng, secondary_infectives_.size())];
        recover_secondary(ev.source);
        break;
    }
    ++events_;
    return ev;
  }

 private:
  bool is_secondary_target(Node w) const {
    return nodes_[w].primary == PrimaryState::Infective &&
           nodes_[w].secondary == SecondaryState::Susceptible;
  }

  template <typename Pred>
  static Node nth_neighbor(const Graph& g, Node u, std::int64_t n, Pred pred) {
    for (Node w : g.neighbors(u))
      if (pred(w) && n-- == 0) return w;
    throw std::logic_error("rate bookkeeping out of sync with compartments");
  }

  void infect_primary(const Graph& g, Node v) {
    assert(nodes_[v].primary == PrimaryState::Susceptible);
    nodes_[v].primary = PrimaryState::Infective;
    std::int64_t susceptible_neighbors = 0;
    for (Node w : g.neighbors(v)) {
      const auto& nw = nodes_[w];
      if (nw.primary == PrimaryState::Susceptible) {
        ++susceptible_neighbors;
      } else if (nw.primary == PrimaryState::Infective) {
        primary_weight_.add(w, -1);
        // v is now primary infective and secondary susceptible.
        if (nw.secondary == SecondaryState::Infective) secondary_weight_.add(w, +1);
      }
    }
    primary_weight_.set(v, susceptible_neighbors);
    primary_infectives_.insert(v);
    ++primary_ever_;
  }

  void recover_primary(const Graph& g, Node u) {
    assert(nodes_[u].primary == PrimaryState::Infective);
    nodes_[u].primary = PrimaryState::Recovered;
    primary_weight_.set(u, 0);
    primary_infectives_.erase(u);
    switch (nodes_[u].secondary) {
      case SecondaryState::Infective:
        recover_secondary(u);
        break;
      case SecondaryState::Susceptible:
        for (Node w : g.neighbors(u))
          if (nodes_[w].secondary == SecondaryState::Infective) secondary_weight_.add(w, -1);
        break;
      case SecondaryState::Removed:
        break;
    }
  }

  void infect_secondary(const Graph& g, Node v) {
    assert(is_secondary_target(v));
    nodes_[v].secondary = SecondaryState::Infective;
    std::int64_t targets = 0;
    for (Node w : g.neighbors(v)) {
      if (nodes_[w].secondary == SecondaryState::Infective) secondary_weight_.add(w, -1);
      else if (is_secondary_target(w)) ++targets;
    }
    secondary_weight_.set(v, targets);
    secondary_infectives_.insert(v);
    ++secondary_ever_;
  }

  void recover_secondary(Node u) {
    assert(nodes_[u].secondary == SecondaryState::Infective);
    nodes_[u].secondary = SecondaryState::Removed;
    secondary_weight_.set(u, 0);
    secondary_infectives_.erase(u);
  }

  std::vector<NodeCompartments> nodes_;
  FenwickTree primary_weight_;
  FenwickTree secondary_weight_;
  IndexedSet primary_infectives_;
  IndexedSet secondary_infectives_;
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::size_t primary_ever_ = 0;
  std::size_t secondary_ever_ = 0;
};

/// Seed node carries both infections at t = 0; everyone else is doubly susceptible.
inline EpidemicState init_state(const Graph& g, Node seed_node) {
  return EpidemicState(g, seed_node);
}

inline Event step(EpidemicState& state, const Graph& g, const RateParams& p, Rng& rng) {
  return state.step(g, p, rng);
}

enum class Layer : std::uint8_t { Primary, Secondary };

struct StopRules {
  std::uint64_t max_events = 0;  ///< 0 = unlimited
  std::size_t threshold = 100;   ///< outbreak means ever-infected > threshold
  bool stop_at_threshold = false;
  Layer layer = Layer::Secondary;  ///< layer watched by stop_at_threshold
  /// Secondary counts are final once no secondary infective is left, so the
  /// primary tail can be skipped when only the secondary layer matters.
  bool stop_when_secondary_extinct = false;
};

struct OutbreakRecord {
  std::size_t final_primary_ever_infected = 0;
  std::size_t final_secondary_ever_infected = 0;
  bool crossed_threshold = false;  ///< secondary ever-infected > threshold
  bool primary_crossed_threshold = false;
  bool censored = false;  ///< stopped before absorption
  double end_time = 0.0;
  std::uint64_t event_count = 0;
};

inline OutbreakRecord run_epidemic(const Graph& g, const RateParams& p, Node seed_node, Rng& rng,
                                   const StopRules& stop = {}) {
  p.validate();
  EpidemicState state = init_state(g, seed_node);
  auto watched = [&] {
    return stop.layer == Layer::Primary ? state.primary_ever() : state.secondary_ever();
  };
  bool censored = false;
  while (state.total_rate(p) > 0.0) {
    if (stop.stop_at_threshold && watched() > stop.threshold) {
      censored = true;
      break;
    }
    if (stop.max_events != 0 && state.event_count() >= stop.max_events) {
      censored = true;
      break;
    }
    if (stop.stop_when_secondary_extinct && state.counts().secondary_infectives == 0) {
      censored = true;
      break;
    }
    state.step(g, p, rng);
  }
  OutbreakRecord r;
  r.final_primary_ever_infected = state.primary_ever();
  r.final_secondary_ever_infected = state.secondary_ever();
  r.crossed_threshold = state.secondary_ever() > stop.threshold;
  r.primary_crossed_threshold = state.primary_ever() > stop.threshold;
  r.censored = censored;
  r.end_time = state.time();
  r.event_count = state.event_count();
  return r;
}

struct NetworkSpec {
  std::size_t n = 10000;
  double c = 10.0;
};

struct ReplicaRecord {
  std::uint64_t replica_id = 0;
  std::uint64_t seed = 0;
  OutbreakRecord outbreak;
};

struct OutbreakStats {
  std::size_t replicas = 0;
  double p_outbreak = 0.0;
  double p_outbreak_stderr = 0.0;
  double mean_fraction_infected = 0.0;  ///< mean (final_secondary_ever - 1) / n, index case excluded
  double mean_fraction_stderr = 0.0;
  std::vector<ReplicaRecord> records;
};

struct EstimateOptions {
  unsigned threads = 1;
  bool stop_at_threshold = false;
  Layer layer = Layer::Secondary;  ///< layer whose threshold crossing counts as an outbreak
  bool stop_when_secondary_extinct = false;
  std::uint64_t max_events = 0;
  std::uint64_t stream = 0;  ///< seed stream, lets callers keep sweep points independent
};

/// Monte-Carlo outbreak statistics. Every replica samples a fresh graph and a
/// uniformly random seed node from its own stream
/// task_seed(master_seed, options.stream, replica).
inline OutbreakStats estimate_outbreak_stats(const NetworkSpec& net, const RateParams& p,
                                             std::size_t replicas, std::size_t threshold,
                                             std::uint64_t master_seed,
                                             const EstimateOptions& options = {}) {
  require(replicas >= 1, "replicas must be at least 1");
  p.validate();
  OutbreakStats stats;
  stats.replicas = replicas;
  stats.records.resize(replicas);
  StopRules stop;
  stop.threshold = threshold;
  stop.stop_at_threshold = options.stop_at_threshold;
  stop.layer = options.layer;
  stop.max_events = options.max_events;
  stop.stop_when_secondary_extinct = options.stop_when_secondary_extinct;

  parallel_for(replicas, options.threads, [&](std::size_t r) {
    const std::uint64_t seed = task_seed(master_seed, options.stream, r);
    Rng rng = make_rng(seed);
    const Graph g = sample_er_graph(net.n, net.c, rng());
    const Node seed_node = static_cast<Node>(uniform_index(rng, net.n));
    stats.records[r] = {r, seed, run_epidemic(g, p, seed_node, rng, stop)};
  });

  double hits = 0.0, frac_sum = 0.0, frac_sq = 0.0;
  for (const auto& rec : stats.records) {
    const bool crossed = options.layer == Layer::Primary ? rec.outbreak.primary_crossed_threshold
                                                         : rec.outbreak.crossed_threshold;
    hits += crossed ? 1.0 : 0.0;
    const double f = static_cast<double>(rec.outbreak.final_secondary_ever_infected - 1) /
                     static_cast<double>(net.n);
    frac_sum += f;
    frac_sq += f * f;
  }
  const double m = static_cast<double>(replicas);
  stats.p_outbreak = hits / m;
  stats.p_outbreak_stderr = std::sqrt(stats.p_outbreak * (1.0 - stats.p_outbreak) / m);
  stats.mean_fraction_infected = frac_sum / m;
  const double var = replicas > 1 ? std::max(0.0, (frac_sq - m * stats.mean_fraction_infected *
                                                                 stats.mean_fraction_infected) /
                                                      (m - 1.0))
                                  : 0.0;
  stats.mean_fraction_stderr = std::sqrt(var / m);
  return stats;
}

}  // namespace superinfect
