#include "edasched/eda.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <stdexcept>

namespace edasched {

namespace {

std::uint64_t bits_of(double x) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &x, sizeof bits);
  return bits;
}

void require_dimension(const char* where, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw std::invalid_argument(std::string(where) + ": delivery vector has dimension " + std::to_string(got) +
                                ", expected " + std::to_string(expected));
  }
}

}  // namespace

bool bitwise_equal(const DeliveryVector& a, const DeliveryVector& b) {
  if (a.size() != b.size()) {
    return false;
  }
  return std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

std::size_t BitwiseHash::operator()(const DeliveryVector& v) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    h ^= bits_of(v(i));
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

// --- regular individual ----------------------------------------------------

RegularIndividual::RegularIndividual(DeliveryVector first) : lower_(first), upper_(first) {
  index_.insert(first);
  members_.push_back(std::move(first));
}

bool RegularIndividual::mutate(const DeliveryVector& q, double eps) {
  require_dimension("mutate_regular", dimension(), q.size());
  if (contains(q)) {
    return false;
  }
  // Some member is farther than eps from q exactly when the coordinate-wise
  // envelope is; rounding of m_j - q_j is monotone in m_j.
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (upper_(j) - q(j) > eps || q(j) - lower_(j) > eps) {
      return false;
    }
  }
  members_.push_back(q);
  index_.insert(q);
  lower_ = lower_.cwiseMin(q);
  upper_ = upper_.cwiseMax(q);
  return true;
}

// --- counter individual ----------------------------------------------------

CounterIndividual::CounterIndividual(DeliveryVector first) {
  index_.emplace(first, 0);
  entries_.push_back({std::move(first), 1});
  total_ = 1;
}

CounterIndividual CounterIndividual::from_entries(std::vector<CounterEntry> entries, std::uint64_t total) {
  if (entries.empty()) {
    throw std::invalid_argument("counter: at least one entry is required");
  }
  CounterIndividual out;
  std::uint64_t sum = 0;
  const Eigen::Index dim = entries.front().vector.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    require_dimension("counter", dim, entries[i].vector.size());
    if (entries[i].count == 0) {
      throw std::invalid_argument("counter: entry " + std::to_string(i) + " has zero count");
    }
    if (!out.index_.emplace(entries[i].vector, i).second) {
      throw std::invalid_argument("counter: entry " + std::to_string(i) + " repeats an earlier vector");
    }
    sum += entries[i].count;
  }
  if (sum != total) {
    throw std::invalid_argument("counter: total " + std::to_string(total) + " differs from the sum of counts " +
                                std::to_string(sum));
  }
  out.entries_ = std::move(entries);
  out.total_ = total;
  return out;
}

std::optional<std::uint64_t> CounterIndividual::count_of(const DeliveryVector& q) const {
  const auto it = index_.find(q);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return entries_[it->second].count;
}

bool CounterIndividual::mutate(const DeliveryVector& q) {
  require_dimension("mutate_counter", dimension(), q.size());
  ++total_;
  const auto it = index_.find(q);
  if (it != index_.end()) {
    ++entries_[it->second].count;
    return false;
  }
  index_.emplace(q, entries_.size());
  entries_.push_back({q, 1});
  return true;
}

// --- population ------------------------------------------------------------

Population::Population(const DeliveryVector& first) : counter(first) { regulars.emplace_back(first); }

Population::Population(CounterIndividual counter_in, std::vector<FinalIndividual> finals_in,
                       std::uint64_t generation_in)
    : counter(std::move(counter_in)), finals(std::move(finals_in)), generation(generation_in), finalized(true) {}

RegularIndividual init_regular(const DeliveryVector& q) { return RegularIndividual(q); }

CounterIndividual init_counter(const DeliveryVector& q) { return CounterIndividual(q); }

bool mutate_regular(RegularIndividual& individual, const DeliveryVector& q, double eps) {
  return individual.mutate(q, eps);
}

bool mutate_counter(CounterIndividual& counter, const DeliveryVector& q) { return counter.mutate(q); }

StepOutcome step(Population& pop, const DeliveryVector& q, double eps) {
  if (pop.finalized) {
    throw std::logic_error("step: population is finalized");
  }
  require_dimension("step", pop.counter.dimension(), q.size());

  StepOutcome out;
  out.counter_added = pop.counter.mutate(q);
  for (RegularIndividual& regular : pop.regulars) {
    if (regular.mutate(q, eps)) {
      ++out.regulars_mutated;
    }
  }
  // A repeated vector is already a member of the regular individual it was
  // first assigned to, so only unseen vectors can seed a new one.
  if (out.regulars_mutated == 0 && out.counter_added) {
    pop.regulars.emplace_back(q);
    out.grew = true;
  }
  ++pop.generation;
  return out;
}

DeliveryVector convex_combination(const std::vector<DeliveryVector>& vectors, const std::vector<double>& weights) {
  if (vectors.empty() || vectors.size() != weights.size()) {
    throw std::invalid_argument("convex_combination: need one weight per vector");
  }
  DeliveryVector mean = DeliveryVector::Zero(vectors.front().size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    mean.noalias() += weights[i] * vectors[i];
  }
  return mean;
}

FinalIndividual finalize_regular(const RegularIndividual& regular, const CounterIndividual& counter,
                                 const StaticJobs& jobs, const Scheduler& scheduler) {
  FinalIndividual out;
  out.members = regular.members();
  out.counts.reserve(out.members.size());
  for (std::size_t i = 0; i < out.members.size(); ++i) {
    const auto k = counter.count_of(out.members[i]);
    if (!k) {
      throw std::logic_error("finalize_regular: member " + std::to_string(i) + " is missing from the counter");
    }
    out.counts.push_back(*k);
    out.normalizer += *k;
  }
  out.total = counter.total();
  out.weights.reserve(out.counts.size());
  for (std::uint64_t k : out.counts) {
    out.weights.push_back(static_cast<double>(k) / static_cast<double>(out.normalizer));
  }
  out.mean = convex_combination(out.members, out.weights);
  out.event_prob = static_cast<double>(out.normalizer) / static_cast<double>(out.total);

  SolveResult solved = scheduler(Instance(jobs, out.mean));
  out.schedule = std::move(solved.schedule);
  out.certified_ratio = solved.certified_ratio;
  out.certificate_met = solved.certificate_met;
  return out;
}

void finalize_population(Population& pop, const StaticJobs& jobs, const Scheduler& scheduler) {
  if (pop.finalized) {
    throw std::logic_error("finalize_population: population is already finalized");
  }
  pop.finals.clear();
  pop.finals.reserve(pop.regulars.size());
  for (const RegularIndividual& regular : pop.regulars) {
    pop.finals.push_back(finalize_regular(regular, pop.counter, jobs, scheduler));
  }
  pop.regulars.clear();
  pop.finalized = true;
}

Population run_eda(const EdaConfig& config, const DeliverySampler& sampler, const StaticJobs& jobs,
                   const Scheduler& scheduler, const StepObserver& observer) {
  if (config.generations < 1) {
    throw std::invalid_argument("run_eda: T must be at least 1");
  }
  if (!(config.eps > 0.0)) {
    throw std::invalid_argument("run_eda: eps must be positive");
  }
  Rng rng(config.seed);
  const DeliveryVector first = sampler(rng);
  require_dimension("run_eda", jobs.size(), first.size());

  Population pop(first);
  if (observer) {
    observer(pop, first);
  }
  for (std::uint64_t t = 0; t < config.generations; ++t) {
    const DeliveryVector q = sampler(rng);
    require_dimension("run_eda", jobs.size(), q.size());
    step(pop, q, config.eps);
    if (observer) {
      observer(pop, q);
    }
  }
  finalize_population(pop, jobs, scheduler);
  return pop;
}

std::optional<RobustMatch> query_robust_schedule(const Population& pop, const DeliveryVector& q, double eps) {
  if (!pop.finalized) {
    throw std::logic_error("query_robust_schedule: population is not finalized");
  }
  std::optional<RobustMatch> best;
  for (std::size_t i = 0; i < pop.finals.size(); ++i) {
    const double d = infinity_distance(q, pop.finals[i].mean);
    if (d <= eps && (!best || d < best->distance)) {
      best = RobustMatch{i, d, &pop.finals[i]};
    }
  }
  return best;
}

// --- audit -------------------------------------------------------------------

namespace {

std::vector<std::uint64_t> bit_key(const DeliveryVector& v) {
  std::vector<std::uint64_t> key(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    key[static_cast<std::size_t>(i)] = bits_of(v(i));
  }
  return key;
}

void audit_member_set(const std::vector<DeliveryVector>& members, double eps, const std::string& who,
                      std::vector<std::string>& issues) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (bitwise_equal(members[i], members[j])) {
        issues.push_back(who + ": members " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      if (infinity_distance(members[i], members[j]) > eps) {
        issues.push_back(who + ": members " + std::to_string(i) + " and " + std::to_string(j) +
                         " are farther apart than eps");
      }
    }
  }
}

}  // namespace

std::vector<std::string> audit_population(const Population& pop, double eps, double tolerance) {
  std::vector<std::string> issues;

  std::map<std::vector<std::uint64_t>, std::uint64_t> counts;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < pop.counter.entries().size(); ++i) {
    const CounterEntry& entry = pop.counter.entries()[i];
    if (entry.count == 0) {
      issues.push_back("counter: entry " + std::to_string(i) + " has zero count");
    }
    if (!counts.emplace(bit_key(entry.vector), entry.count).second) {
      issues.push_back("counter: entry " + std::to_string(i) + " repeats an earlier vector");
    }
    sum += entry.count;
  }
  if (sum != pop.counter.total()) {
    issues.push_back("counter: total differs from the sum of counts");
  }
  if (pop.counter.total() != pop.generation + 1) {
    issues.push_back("counter: total differs from the number of samples consumed");
  }

  auto count_in_counter = [&](const DeliveryVector& v) -> std::uint64_t {
    const auto it = counts.find(bit_key(v));
    return it == counts.end() ? 0 : it->second;
  };

  for (std::size_t r = 0; r < pop.regulars.size(); ++r) {
    const std::string who = "regular " + std::to_string(r);
    const auto& members = pop.regulars[r].members();
    audit_member_set(members, eps, who, issues);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (count_in_counter(members[i]) == 0) {
        issues.push_back(who + ": member " + std::to_string(i) + " is missing from the counter");
      }
    }
  }

  for (std::size_t f = 0; f < pop.finals.size(); ++f) {
    const FinalIndividual& fi = pop.finals[f];
    const std::string who = "final " + std::to_string(f);
    audit_member_set(fi.members, eps, who, issues);
    if (fi.counts.size() != fi.members.size() || fi.weights.size() != fi.members.size()) {
      issues.push_back(who + ": counts and weights do not match the members");
      continue;
    }
    std::uint64_t n_sum = 0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < fi.members.size(); ++i) {
      n_sum += fi.counts[i];
      weight_sum += fi.weights[i];
      if (!(fi.weights[i] > 0.0 && fi.weights[i] <= 1.0)) {
        issues.push_back(who + ": weight " + std::to_string(i) + " outside (0, 1]");
      }
      if (count_in_counter(fi.members[i]) != fi.counts[i]) {
        issues.push_back(who + ": count of member " + std::to_string(i) + " disagrees with the counter");
      }
    }
    if (n_sum != fi.normalizer) {
      issues.push_back(who + ": normalizer differs from the sum of counts");
    }
    if (std::abs(weight_sum - 1.0) > tolerance) {
      issues.push_back(who + ": weights do not sum to 1");
    }
    if (!(fi.event_prob > 0.0 && fi.event_prob <= 1.0)) {
      issues.push_back(who + ": event probability outside (0, 1]");
    }
    DeliveryVector expected = DeliveryVector::Zero(fi.mean.size());
    for (std::size_t i = 0; i < fi.members.size(); ++i) {
      expected += fi.weights[i] * fi.members[i];
    }
    if (infinity_distance(expected, fi.mean) > tolerance * std::max(1.0, fi.mean.cwiseAbs().maxCoeff())) {
      issues.push_back(who + ": mean is not the weighted sum of the members");
    }
    for (std::size_t i = 0; i < fi.members.size(); ++i) {
      if (infinity_distance(fi.mean, fi.members[i]) > (1.0 - fi.weights[i]) * eps + tolerance) {
        issues.push_back(who + ": mean farther than (1 - t) * eps from member " + std::to_string(i));
      }
    }
    if (!is_permutation_of(fi.schedule.perm, fi.mean.size())) {
      issues.push_back(who + ": schedule is not a permutation of the jobs");
    }
  }
  return issues;
}

}  // namespace edasched
