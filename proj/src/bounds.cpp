#include "edasched/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace edasched {

void TheoryConstants::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("theory constants: ") + what);
  };
  require(n >= 1.0, "n must be >= 1");
  require(c >= 0.0, "c must be >= 0");
  require(d >= 0.0, "d must be >= 0");
  require(l > 0.0, "l must be > 0");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(delta > 0.0, "delta must be > 0");
  require(eps > 0.0, "eps must be > 0");
  require(min_prob_const > 0.0, "const must be > 0");
  require(const1 > 0.0, "const1 must be > 0");
  require(const2 > 0.0, "const2 must be > 0");
}

double TheoryConstants::f_bound() const { return const1 * std::pow(n, c); }
double TheoryConstants::m_bound() const { return const2 * std::pow(n, d); }
double TheoryConstants::samples_per_event() const { return std::pow(n, 2.0 * d + l); }

std::uint64_t required_runtime(const TheoryConstants& tc) {
  tc.validate();
  const double t = tc.const1 / ((1.0 - tc.alpha) * tc.min_prob_const) * std::pow(tc.n, 2.0 * tc.d + tc.l + tc.c);
  if (!(t < 9.2e18)) {
    throw std::overflow_error("required_runtime: T = " + std::to_string(t) + " does not fit a 64-bit counter");
  }
  return static_cast<std::uint64_t>(std::ceil(t));
}

double hoeffding_failure_bound(double n, double k, double delta, double bound) {
  return 2.0 * n * std::exp(-2.0 * k * delta * delta / (bound * bound));
}

double chernoff_undercount_bound(double k, double alpha) {
  return std::exp(-k * alpha * alpha / (2.0 * (1.0 - alpha)));
}

double as_probability(double bound) { return bound < 0.0 ? 0.0 : (bound > 1.0 ? 1.0 : bound); }

FailureBound theorem3_failure_bound(const TheoryConstants& tc) {
  tc.validate();
  FailureBound out;
  const double k = tc.samples_per_event();
  out.undercount_term = tc.f_bound() * chernoff_undercount_bound(k, tc.alpha);
  out.estimation_term = hoeffding_failure_bound(tc.n, k, tc.delta, tc.m_bound());
  out.printed_estimation_term =
      2.0 * tc.n * std::exp(std::pow(tc.n, -(2.0 * tc.delta * tc.delta / (tc.const2 * tc.const2)) * tc.l));
  out.total = out.undercount_term + out.estimation_term;
  return out;
}

std::optional<double> approx_ratio_bound(double scheduled_lateness, double certified_ratio, double eps, double delta) {
  const double denominator = scheduled_lateness / certified_ratio - eps - delta;
  if (!(denominator > 0.0)) {
    return std::nullopt;
  }
  return (scheduled_lateness + eps + delta) / denominator;
}

}  // namespace edasched
