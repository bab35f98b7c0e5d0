#include "edasched/verification.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edasched {

ConditionalEstimate estimate_cond_distribution(const FinalIndividual& individual) {
  const Eigen::Index n = individual.mean.size();
  const Eigen::Index l = static_cast<Eigen::Index>(individual.members.size());
  Eigen::MatrixXd samples(n, l);
  Eigen::VectorXd weights(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    samples.col(i) = individual.members[static_cast<std::size_t>(i)];
    weights(i) = individual.weights[static_cast<std::size_t>(i)];
  }
  return {individual.mean, weighted_covariance(samples, weights, individual.mean)};
}

VerificationReport verify_run(const Population& pop, const CubeMixture& mixture, const StaticJobs& jobs,
                              const TheoryConstants& tc, const VerifyOptions& options, Rng& rng) {
  if (!pop.finalized) {
    throw std::invalid_argument("verify_run: population must be finalized");
  }
  if (pop.counter.dimension() != mixture.dimension() || jobs.size() != mixture.dimension()) {
    throw std::invalid_argument("verify_run: population, mixture and jobs disagree on the dimension");
  }

  VerificationReport report;
  report.total_samples = pop.counter.total();
  const std::size_t f = mixture.events();
  report.events.resize(f);
  report.u2_detail.assign(f, std::numeric_limits<double>::quiet_NaN());
  report.event_prob_errors.assign(f, std::numeric_limits<double>::quiet_NaN());

  for (std::size_t j = 0; j < f; ++j) {
    EventCheck& ev = report.events[j];
    ev.true_prob = event_probability(mixture, j);
    const DeliveryVector mu = true_conditional_mean(mixture, j);
    for (std::size_t i = 0; i < pop.finals.size(); ++i) {
      const FinalIndividual& fi = pop.finals[i];
      const bool inside = std::all_of(fi.members.begin(), fi.members.end(),
                                      [&](const DeliveryVector& m) { return in_event(mixture, m, j); });
      if (!inside) continue;
      ev.corresponding.push_back(i);
      const double err = infinity_distance(fi.mean, mu);
      ev.mean_error = std::isnan(ev.mean_error) ? err : std::max(ev.mean_error, err);
      if (fi.normalizer > ev.samples) {
        ev.samples = fi.normalizer;
        ev.estimated_prob = fi.event_prob;
      }
    }
    if (ev.corresponding.empty()) {
      report.u1_occurred = true;
      report.u1_detail.push_back(j);
      continue;
    }
    ev.prob_error = std::abs(ev.estimated_prob - ev.true_prob);
    report.u2_detail[j] = ev.mean_error;
    report.event_prob_errors[j] = ev.prob_error;
    if (ev.mean_error >= tc.delta) {
      report.u2_occurred = true;
    }
  }

  const bool check_ratios = jobs.size() <= options.ratio_cap;
  const SolverCaps caps{std::max<Eigen::Index>(options.ratio_cap, 1), 30};
  for (std::size_t s = 0; s < options.fresh_samples; ++s) {
    const MixtureSample draw = sample(mixture, rng);
    ++report.fresh_samples;
    if (!draw.event) ++report.fresh_tail;

    const auto match = query_robust_schedule(pop, draw.q, tc.eps);
    if (!match) continue;
    ++report.answered;
    if (!draw.event || !check_ratios) continue;

    const Instance rho(jobs, draw.q);
    const double achieved = max_lateness(rho, match->individual->schedule.perm).value;
    const double optimum = brute_force_optimum(rho, caps).value;
    const double ratio = achieved / optimum;
    const auto bound = approx_ratio_bound(match->individual->scheduled_lateness(), match->individual->certified_ratio,
                                          tc.eps, tc.delta);
    report.max_ratio = std::isnan(report.max_ratio) ? ratio : std::max(report.max_ratio, ratio);
    if (!bound) {
      ++report.ratio_unguaranteed;
      continue;
    }
    ++report.ratio_checks;
    report.min_ratio_bound = std::isnan(report.min_ratio_bound) ? *bound : std::min(report.min_ratio_bound, *bound);
    if (ratio > *bound) {
      ++report.ratio_violations;
    }
  }
  report.coverage_rate =
      report.fresh_samples == 0 ? 0.0 : static_cast<double>(report.answered) / static_cast<double>(report.fresh_samples);
  return report;
}

}  // namespace edasched
