#pragma once

// Scoring a trained population against the ground-truth mixture.

#include "edasched/bounds.hpp"
#include "edasched/eda.hpp"
#include "edasched/mixture.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace edasched {

/// Weighted covariance of the columns of `samples` around `mean`:
/// sum_i w_i (x_i - mean)(x_i - mean)^T.
template <typename DerivedX, typename DerivedW, typename DerivedM>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> weighted_covariance(
    const Eigen::MatrixBase<DerivedX>& samples, const Eigen::MatrixBase<DerivedW>& weights,
    const Eigen::MatrixBase<DerivedM>& mean) {
  using Scalar = typename DerivedX::Scalar;
  const auto centered = (samples.colwise() - mean).eval();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cov = centered * weights.asDiagonal() * centered.transpose();
  // Symmetrize away rounding noise.
  return (Scalar(0.5) * (cov + cov.transpose())).eval();
}

struct ConditionalEstimate {
  DeliveryVector mean;
  Eigen::MatrixXd covariance;
};

/// Gaussian fit of the discrete law that puts weight t_i on member i.
ConditionalEstimate estimate_cond_distribution(const FinalIndividual& individual);

struct EventCheck {
  std::vector<std::size_t> corresponding;  // finals whose members all lie in the cube
  double mean_error = std::numeric_limits<double>::quiet_NaN();  // max over corresponding finals
  double estimated_prob = 0.0;   // event_prob of the corresponding final with the most samples
  double true_prob = 0.0;
  double prob_error = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t samples = 0;     // N of that final
};

struct VerificationReport {
  bool u1_occurred = false;
  std::vector<std::size_t> u1_detail;  // uncovered events
  bool u2_occurred = false;
  std::vector<double> u2_detail;       // per-event mean errors; NaN when uncovered
  double coverage_rate = 0.0;
  std::vector<double> event_prob_errors;  // NaN when uncovered
  std::size_t ratio_violations = 0;
  std::size_t ratio_checks = 0;
  std::size_t ratio_unguaranteed = 0;  // answered samples whose bound was vacuous
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
  double min_ratio_bound = std::numeric_limits<double>::quiet_NaN();
  std::size_t fresh_samples = 0;
  std::size_t fresh_tail = 0;
  std::size_t answered = 0;
  std::uint64_t total_samples = 0;  // K
  std::vector<EventCheck> events;

  bool failed() const { return u1_occurred || u2_occurred; }
};

struct VerifyOptions {
  std::size_t fresh_samples = 1000;
  Eigen::Index ratio_cap = 8;  // brute-force J* for n up to this size
};

/// U1/U2 detection against the mixture's cubes and conditional means, plus
/// coverage and ratio checks on fresh samples. Consumes `rng` for the fresh
/// draws only.
VerificationReport verify_run(const Population& pop, const CubeMixture& mixture, const StaticJobs& jobs,
                              const TheoryConstants& tc, const VerifyOptions& options, Rng& rng);

}  // namespace edasched
