#pragma once

// Single-machine scheduling with release, processing and delivery times.
// A job i is released at r_i, occupies the machine for p_i and is then
// delivered q_i time units later; deliveries run in parallel.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace edasched {

using DeliveryVector = Eigen::VectorXd;
using Permutation = std::vector<Eigen::Index>;

/// Release and processing times shared by every instance of a problem.
struct StaticJobs {
  Eigen::VectorXd releases;
  Eigen::VectorXd processings;

  Eigen::Index size() const { return releases.size(); }

  /// Throws std::invalid_argument unless r >= 0, p > 0 and the lengths agree.
  void validate() const;
};

/// One point of the problem space: fixed jobs plus a delivery-times vector.
struct Instance {
  StaticJobs statics;
  DeliveryVector delivery;

  Instance() = default;
  Instance(StaticJobs jobs, DeliveryVector q);

  Eigen::Index size() const { return statics.size(); }
  double release(Eigen::Index i) const { return statics.releases(i); }
  double processing(Eigen::Index i) const { return statics.processings(i); }
};

struct Lateness {
  double value = 0.0;
  Eigen::Index critical_index = 0;  // first position attaining the max
};

struct Schedule {
  Permutation perm;
  std::optional<Eigen::VectorXd> start_times;  // indexed by position
  std::optional<double> max_lateness;
  std::optional<Eigen::Index> critical_index;
};

bool is_permutation_of(const Permutation& perm, Eigen::Index n);

/// s[0] = r_{perm[0]}, s[i] = max(s[i-1] + p_{perm[i-1]}, r_{perm[i]}).
/// Only releases and processings are read.
Eigen::VectorXd starting_times(const StaticJobs& jobs, const Permutation& perm);
Eigen::VectorXd starting_times(const Instance& instance, const Permutation& perm);

/// max over positions of s + p + q; ties resolve to the first position.
Lateness max_lateness(const Instance& instance, const Permutation& perm);

/// Schedule with every evaluation artifact populated.
Schedule evaluate(const Instance& instance, Permutation perm);

Permutation identity_permutation(Eigen::Index n);

/// max_i |a_i - b_i|.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar infinity_distance(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("infinity_distance: length mismatch");
  }
  if (a.size() == 0) {
    return typename DerivedA::Scalar(0);
  }
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace edasched
