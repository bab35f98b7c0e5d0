#pragma once

// Estimation-of-distribution training over delivery-time vectors.
//
// A population holds one counter individual (every sampled vector with its
// multiplicity) and a growing list of regular individuals (sets of sampled
// vectors that are pairwise within eps in the infinity norm). Finalization
// turns each regular individual into a weighted local average together with
// a schedule built for the instance that average induces.

#include "edasched/rng.hpp"
#include "edasched/schedule.hpp"
#include "edasched/solvers.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace edasched {

/// Coordinates compared by bit pattern, so 0.0 and -0.0 are distinct.
bool bitwise_equal(const DeliveryVector& a, const DeliveryVector& b);

struct BitwiseHash {
  std::size_t operator()(const DeliveryVector& v) const;
};

struct BitwiseEqual {
  bool operator()(const DeliveryVector& a, const DeliveryVector& b) const { return bitwise_equal(a, b); }
};

class RegularIndividual {
 public:
  explicit RegularIndividual(DeliveryVector first);

  const std::vector<DeliveryVector>& members() const { return members_; }
  Eigen::Index dimension() const { return lower_.size(); }
  bool contains(const DeliveryVector& q) const { return index_.count(q) != 0; }

  /// Coordinate-wise min and max over the members.
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  /// Appends q unless it duplicates a member or lies farther than eps from
  /// one. Returns whether q was appended.
  bool mutate(const DeliveryVector& q, double eps);

 private:
  std::vector<DeliveryVector> members_;
  std::unordered_set<DeliveryVector, BitwiseHash, BitwiseEqual> index_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

struct CounterEntry {
  DeliveryVector vector;
  std::uint64_t count = 0;
};

class CounterIndividual {
 public:
  explicit CounterIndividual(DeliveryVector first);

  /// Rebuilds a counter from stored entries; throws std::invalid_argument if
  /// the entries repeat a vector, hold a zero count or disagree with total.
  static CounterIndividual from_entries(std::vector<CounterEntry> entries, std::uint64_t total);

  const std::vector<CounterEntry>& entries() const { return entries_; }
  std::uint64_t total() const { return total_; }
  Eigen::Index dimension() const { return entries_.front().vector.size(); }
  std::optional<std::uint64_t> count_of(const DeliveryVector& q) const;

  /// Increments the multiplicity of q, adding it first if unseen. Returns
  /// true only when q was new.
  bool mutate(const DeliveryVector& q);

 private:
  CounterIndividual() = default;

  std::vector<CounterEntry> entries_;
  std::unordered_map<DeliveryVector, std::size_t, BitwiseHash, BitwiseEqual> index_;
  std::uint64_t total_ = 0;
};

struct FinalIndividual {
  std::vector<DeliveryVector> members;
  std::vector<std::uint64_t> counts;  // multiplicity of each member in the counter
  std::uint64_t normalizer = 0;       // N, the sum of counts
  std::uint64_t total = 0;            // K at finalization
  std::vector<double> weights;        // counts[i] / N
  DeliveryVector mean;
  Schedule schedule;
  double event_prob = 0.0;  // N / K
  double certified_ratio = 1.0;
  bool certificate_met = true;

  double scheduled_lateness() const { return schedule.max_lateness.value_or(0.0); }
};

struct Population {
  explicit Population(const DeliveryVector& first);
  Population(CounterIndividual counter, std::vector<FinalIndividual> finals, std::uint64_t generation);

  CounterIndividual counter;
  std::vector<RegularIndividual> regulars;
  std::vector<FinalIndividual> finals;
  std::uint64_t generation = 0;
  bool finalized = false;
};

using Scheduler = std::function<SolveResult(const Instance&)>;
using DeliverySampler = std::function<DeliveryVector(Rng&)>;

RegularIndividual init_regular(const DeliveryVector& q);
CounterIndividual init_counter(const DeliveryVector& q);
bool mutate_regular(RegularIndividual& individual, const DeliveryVector& q, double eps);
bool mutate_counter(CounterIndividual& counter, const DeliveryVector& q);

struct StepOutcome {
  bool counter_added = false;
  std::size_t regulars_mutated = 0;
  bool grew = false;
};

/// One generation: the counter records q, every regular individual tries to
/// absorb it, and a new regular individual is seeded with q when none did and
/// q had never been sampled before.
StepOutcome step(Population& pop, const DeliveryVector& q, double eps);

/// Weighted mean sum_i weights[i] * vectors[i].
DeliveryVector convex_combination(const std::vector<DeliveryVector>& vectors, const std::vector<double>& weights);

FinalIndividual finalize_regular(const RegularIndividual& regular, const CounterIndividual& counter,
                                 const StaticJobs& jobs, const Scheduler& scheduler);

/// Finalizes every regular individual in order; the population becomes read-only.
void finalize_population(Population& pop, const StaticJobs& jobs, const Scheduler& scheduler);

struct EdaConfig {
  std::uint64_t generations = 1;  // T
  double eps = 1.0;
  std::uint64_t seed = 0;
};

using StepObserver = std::function<void(const Population&, const DeliveryVector&)>;

/// Seeds a population from one sample, runs T generations and finalizes.
/// The observer, if set, sees the population after initialization and after
/// every generation, together with the sample just consumed.
Population run_eda(const EdaConfig& config, const DeliverySampler& sampler, const StaticJobs& jobs,
                   const Scheduler& scheduler, const StepObserver& observer = {});

struct RobustMatch {
  std::size_t index = 0;
  double distance = 0.0;
  const FinalIndividual* individual = nullptr;
};

/// Nearest final individual whose mean lies within eps of q; lower index on ties.
std::optional<RobustMatch> query_robust_schedule(const Population& pop, const DeliveryVector& q, double eps);

/// Full structural audit (pairwise distances, distinctness, counter totals,
/// weights and the convex-combination bound). Returns one message per
/// violation; empty means consistent.
std::vector<std::string> audit_population(const Population& pop, double eps, double tolerance = 1e-12);

}  // namespace edasched
