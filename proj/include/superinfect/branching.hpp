#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "superinfect/error.hpp"
#include "superinfect/parallel.hpp"
#include "superinfect/rates.hpp"
#include "superinfect/rng.hpp"

namespace superinfect {

/// A child that acquired the secondary infection from its parent.
struct Offspring {
  double type;               ///< secondary acquisition time minus primary acquisition time
  double transmission_time;  ///< primary transmission time, measured from the parent's primary
};

/// Offspring of a parent of type t (secondary acquired t after the primary).
///
/// The parent's primary ends at L1 = t + Exp(rho1) and its secondary at
/// L2 = min(t + Exp(rho2), L1); both are drawn once and shared by all
/// Poisson(c) neighbours. For each neighbour the primary crosses at
/// S ~ Exp(beta1) if S < L1; the child's primary lasts Exp(rho1) from S and
/// the secondary clock Exp(beta2) starts at max(S, t). The child is an
/// offspring if that clock fires while both the parent's secondary and the
/// child's primary are alive.
inline std::vector<Offspring> simulate_offspring(double t, const RateParams& p, double c,
                                                 Rng& rng) {
  std::vector<Offspring> out;
  if (c <= 0.0 || p.beta2 <= 0.0) return out;
  std::poisson_distribution<long> neighbours(c);
  const long k = neighbours(rng);
  const double primary_end = t + exponential(rng, p.rho1);
  const double secondary_end = std::min(t + exponential(rng, p.rho2), primary_end);
  for (long i = 0; i < k; ++i) {
    const double s = exponential(rng, p.beta1);
    if (s >= primary_end) continue;
    const double child_primary_end = s + exponential(rng, p.rho1);
    const double fire = std::max(s, t) + exponential(rng, p.beta2);
    if (fire < secondary_end && fire < child_primary_end) out.push_back({fire - s, s});
  }
  return out;
}

enum class BranchingOutcome : std::uint8_t { Extinct, ReachedSizeCap, ReachedGenerationCap };

inline const char* to_string(BranchingOutcome o) {
  switch (o) {
    case BranchingOutcome::Extinct: return "extinct";
    case BranchingOutcome::ReachedSizeCap: return "size_cap";
    case BranchingOutcome::ReachedGenerationCap: return "generation_cap";
  }
  return "?";
}

struct BranchingRecord {
  std::vector<std::size_t> generation_sizes;  ///< Z_0 = 1, Z_1, ...; last entry may be partial at a cap
  BranchingOutcome outcome = BranchingOutcome::Extinct;
  std::size_t total_individuals = 0;

  std::size_t generations() const { return generation_sizes.size() - 1; }
};

/// Generation-by-generation expansion from one type-0 individual. Stops when a
/// generation is empty, when the running total reaches size_cap, or after
/// gen_cap generations.
inline BranchingRecord run_branching(const RateParams& p, double c, std::size_t size_cap,
                                     std::size_t gen_cap, Rng& rng) {
  require(size_cap >= 1 && gen_cap >= 1, "branching caps must be at least 1");
  BranchingRecord rec;
  std::vector<double> current{0.0};
  std::vector<double> next;
  rec.generation_sizes.push_back(1);
  rec.total_individuals = 1;
  if (rec.total_individuals >= size_cap) {
    rec.outcome = BranchingOutcome::ReachedSizeCap;
    return rec;
  }
  for (std::size_t gen = 1;; ++gen) {
    next.clear();
    for (double t : current) {
      for (const Offspring& o : simulate_offspring(t, p, c, rng)) {
        next.push_back(o.type);
        if (++rec.total_individuals >= size_cap) {
          rec.generation_sizes.push_back(next.size());
          rec.outcome = BranchingOutcome::ReachedSizeCap;
          return rec;
        }
      }
    }
    rec.generation_sizes.push_back(next.size());
    if (next.empty()) {
      rec.outcome = BranchingOutcome::Extinct;
      return rec;
    }
    if (gen >= gen_cap) {
      rec.outcome = BranchingOutcome::ReachedGenerationCap;
      return rec;
    }
    current.swap(next);
  }
}

struct BranchingRun {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  BranchingRecord record;
};

struct BranchingStats {
  std::size_t runs = 0;
  double survival = 0.0;  ///< fraction reaching size_cap
  double survival_stderr = 0.0;
  std::vector<BranchingRun> records;
};

inline BranchingStats estimate_branching_survival(const RateParams& p, double c, std::size_t runs,
                                                  std::size_t size_cap, std::size_t gen_cap,
                                                  std::uint64_t master_seed, std::uint64_t stream,
                                                  unsigned threads = 1) {
  require(runs >= 1, "runs must be at least 1");
  BranchingStats s;
  s.runs = runs;
  s.records.resize(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    const std::uint64_t seed = task_seed(master_seed, stream, r);
    Rng rng = make_rng(seed);
    s.records[r] = {r, seed, run_branching(p, c, size_cap, gen_cap, rng)};
  });
  double hits = 0.0;
  for (const auto& r : s.records) hits += r.record.outcome == BranchingOutcome::ReachedSizeCap;
  s.survival = hits / static_cast<double>(runs);
  s.survival_stderr = std::sqrt(s.survival * (1.0 - s.survival) / static_cast<double>(runs));
  return s;
}

/// Which primary-transmission order to keep when histogramming offspring.
enum class KernelCase : std::uint8_t { All, PrimaryBeforeParentSecondary, PrimaryAfterParentSecondary };

struct EmpiricalKernel {
  double parent_type = 0.0;
  std::vector<double> bin_edges;
  std::vector<double> bin_intensity;  ///< offspring per parent falling in each bin
  std::vector<double> bin_stderr;
  double outside = 0.0;  ///< offspring per parent outside [edges.front(), edges.back())
  std::size_t samples = 0;

  double total_intensity() const {
    double s = outside;
    for (double x : bin_intensity) s += x;
    return s;
  }
};

/// Histogram of offspring types from n_samples independent type-t parents.
/// Samples are split into fixed chunks with their own seed streams, so the
/// result is independent of the thread count.
inline EmpiricalKernel empirical_kernel(double t, const RateParams& p, double c,
                                        std::size_t n_samples, std::vector<double> bin_edges,
                                        std::uint64_t seed, unsigned threads = 1,
                                        KernelCase which = KernelCase::All) {
  require(n_samples >= 1, "n_samples must be at least 1");
  require(bin_edges.size() >= 2, "need at least one bin");
  require(std::is_sorted(bin_edges.begin(), bin_edges.end()) &&
              std::adjacent_find(bin_edges.begin(), bin_edges.end()) == bin_edges.end(),
          "bin edges must be strictly increasing");
  const std::size_t bins = bin_edges.size() - 1;
  constexpr std::size_t kChunk = 1 << 14;
  const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;

  struct Partial {
    std::vector<double> sum, sum_sq;
    double outside = 0.0;
  };
  std::vector<Partial> partial(chunks);

  parallel_for(chunks, threads, [&](std::size_t ci) {
    Partial& acc = partial[ci];
    acc.sum.assign(bins, 0.0);
    acc.sum_sq.assign(bins, 0.0);
    Rng rng = make_rng(task_seed(seed, 0x6b65726e656cULL, ci));
    const std::size_t begin = ci * kChunk, end = std::min(n_samples, begin + kChunk);
    std::vector<std::size_t> hit;
    for (std::size_t i = begin; i < end; ++i) {
      hit.clear();
      for (const Offspring& o : simulate_offspring(t, p, c, rng)) {
        const bool early = o.transmission_time < t;
        if ((which == KernelCase::PrimaryBeforeParentSecondary && !early) ||
            (which == KernelCase::PrimaryAfterParentSecondary && early))
          continue;
        if (o.type < bin_edges.front() || o.type >= bin_edges.back()) {
          acc.outside += 1.0;
          continue;
        }
        const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), o.type);
        hit.push_back(static_cast<std::size_t>(it - bin_edges.begin()) - 1);
      }
      std::sort(hit.begin(), hit.end());
      for (std::size_t j = 0; j < hit.size();) {
        std::size_t k = j;
        while (k < hit.size() && hit[k] == hit[j]) ++k;
        const double n = static_cast<double>(k - j);
        acc.sum[hit[j]] += n;
        acc.sum_sq[hit[j]] += n * n;
        j = k;
      }
    }
  });

  EmpiricalKernel ek;
  ek.parent_type = t;
  ek.samples = n_samples;
  ek.bin_edges = std::move(bin_edges);
  std::vector<double> sum(bins, 0.0), sum_sq(bins, 0.0);
  for (const Partial& acc : partial) {
    for (std::size_t b = 0; b < bins; ++b) {
      sum[b] += acc.sum[b];
      sum_sq[b] += acc.sum_sq[b];
    }
    ek.outside += acc.outside;
  }
  const double n = static_cast<double>(n_samples);
  ek.outside /= n;
  ek.bin_intensity.resize(bins);
  ek.bin_stderr.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double mean = sum[b] / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq[b] - n * mean * mean) / (n - 1.0)) : 0.0;
    ek.bin_intensity[b] = mean;
    ek.bin_stderr[b] = std::sqrt(var / n);
  }
  return ek;
}

}  // namespace superinfect
