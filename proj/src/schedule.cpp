#include "edasched/schedule.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace edasched {

void StaticJobs::validate() const {
  if (releases.size() != processings.size()) {
    throw std::invalid_argument("jobs: releases and processings differ in length (" +
                                std::to_string(releases.size()) + " vs " +
                                std::to_string(processings.size()) + ")");
  }
  if (releases.size() == 0) {
    throw std::invalid_argument("jobs: at least one job is required");
  }
  for (Eigen::Index i = 0; i < releases.size(); ++i) {
    if (!(releases(i) >= 0.0) || !std::isfinite(releases(i))) {
      throw std::invalid_argument("jobs: release " + std::to_string(i) + " must be a finite value >= 0");
    }
    if (!(processings(i) > 0.0) || !std::isfinite(processings(i))) {
      throw std::invalid_argument("jobs: processing " + std::to_string(i) + " must be a finite value > 0");
    }
  }
}

Instance::Instance(StaticJobs jobs, DeliveryVector q) : statics(std::move(jobs)), delivery(std::move(q)) {
  statics.validate();
  if (delivery.size() != statics.size()) {
    throw std::invalid_argument("instance: delivery vector has length " + std::to_string(delivery.size()) +
                                ", expected " + std::to_string(statics.size()));
  }
  for (Eigen::Index i = 0; i < delivery.size(); ++i) {
    if (!(delivery(i) >= 0.0) || !std::isfinite(delivery(i))) {
      throw std::invalid_argument("instance: delivery " + std::to_string(i) + " must be a finite value >= 0");
    }
  }
}

bool is_permutation_of(const Permutation& perm, Eigen::Index n) {
  if (static_cast<Eigen::Index>(perm.size()) != n) {
    return false;
  }
  std::vector<bool> seen(perm.size(), false);
  for (Eigen::Index job : perm) {
    if (job < 0 || job >= n || seen[static_cast<std::size_t>(job)]) {
      return false;
    }
    seen[static_cast<std::size_t>(job)] = true;
  }
  return true;
}

Eigen::VectorXd starting_times(const StaticJobs& jobs, const Permutation& perm) {
  const Eigen::Index n = jobs.size();
  if (!is_permutation_of(perm, n)) {
    throw std::invalid_argument("starting_times: permutation does not match the " + std::to_string(n) + " jobs");
  }
  Eigen::VectorXd s(n);
  s(0) = jobs.releases(perm[0]);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double machine_free = s(i - 1) + jobs.processings(perm[i - 1]);
    s(i) = std::max(machine_free, jobs.releases(perm[i]));
  }
  return s;
}

Eigen::VectorXd starting_times(const Instance& instance, const Permutation& perm) {
  return starting_times(instance.statics, perm);
}

namespace {

Lateness lateness_from_starts(const Instance& instance, const Permutation& perm, const Eigen::VectorXd& s) {
  Lateness out;
  out.value = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const Eigen::Index job = perm[static_cast<std::size_t>(i)];
    const double delivered = s(i) + instance.processing(job) + instance.delivery(job);
    if (delivered > out.value) {
      out.value = delivered;
      out.critical_index = i;
    }
  }
  return out;
}

}  // namespace

Lateness max_lateness(const Instance& instance, const Permutation& perm) {
  const Eigen::VectorXd s = starting_times(instance.statics, perm);
  return lateness_from_starts(instance, perm, s);
}

Schedule evaluate(const Instance& instance, Permutation perm) {
  Schedule out;
  Eigen::VectorXd s = starting_times(instance.statics, perm);
  const Lateness l = lateness_from_starts(instance, perm, s);
  out.perm = std::move(perm);
  out.start_times = std::move(s);
  out.max_lateness = l.value;
  out.critical_index = l.critical_index;
  return out;
}

Permutation identity_permutation(Eigen::Index n) {
  Permutation perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  return perm;
}

}  // namespace edasched
