#pragma once

// Runtime and failure-probability bounds for the EDA, and the approximation
// ratio guaranteed for instances near a final individual.

#include <cstdint>
#include <optional>

namespace edasched {

struct TheoryConstants {
  double n = 1.0;       // problem size
  double c = 0.0;       // f(n) <= const1 * n^c
  double d = 0.0;       // M_n <= const2 * n^d
  double l = 1.0;       // k = n^(2d + l) samples per event
  double alpha = 0.5;   // Chernoff slack, in (0, 1)
  double delta = 0.1;   // tolerated mean-estimation error
  double eps = 1.0;     // neighbourhood radius
  double min_prob_const = 1.0;  // min Pr(E_j) >= const / f(n)
  double const1 = 1.0;
  double const2 = 1.0;

  /// Throws std::invalid_argument when a constant is out of range.
  void validate() const;

  double f_bound() const;            // const1 * n^c
  double m_bound() const;            // const2 * n^d
  double samples_per_event() const;  // n^(2d + l)
};

/// ceil(const1 / ((1 - alpha) * const) * n^(2d + l + c)).
std::uint64_t required_runtime(const TheoryConstants& tc);

/// 2n * exp(-2 k delta^2 / M^2); not clamped.
double hoeffding_failure_bound(double n, double k, double delta, double bound);

/// exp(-k alpha^2 / (2 (1 - alpha))).
double chernoff_undercount_bound(double k, double alpha);

/// Clamp to [0, 1] for use as a probability.
double as_probability(double bound);

struct FailureBound {
  double undercount_term = 0.0;   // f_bound * chernoff(n^(2d+l), alpha)
  double estimation_term = 0.0;   // Hoeffding with k = n^(2d+l), M = const2 * n^d
  double printed_estimation_term = 0.0;  // 2n exp(n^(-(2 delta^2 / const2^2) l)), kept for reports
  double total = 0.0;

  bool vacuous() const { return total >= 1.0; }
};

/// Upper bound on Pr(U1 or U2(delta)) after the required runtime.
FailureBound theorem3_failure_bound(const TheoryConstants& tc);

/// (J + eps + delta) / (J / r - eps - delta), or empty when the denominator
/// is not positive and no guarantee follows.
std::optional<double> approx_ratio_bound(double scheduled_lateness, double certified_ratio, double eps, double delta);

}  // namespace edasched
