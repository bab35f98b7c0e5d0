#pragma once

// Monte Carlo campaigns: independent seeded replications of train + verify,
// aggregated against the theoretical failure bound.

#include "edasched/bounds.hpp"
#include "edasched/eda.hpp"
#include "edasched/mixture.hpp"
#include "edasched/verification.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <ostream>
#include <vector>

namespace edasched {

struct CampaignConfig {
  MixtureSpec mixture;
  StaticJobs jobs;
  TheoryConstants theory;
  std::optional<std::uint64_t> generations;     // overrides required_runtime
  std::optional<std::uint64_t> generation_cap;  // applied after the override
  std::size_t replications = 10;
  std::uint64_t master_seed = 0;
  VerifyOptions verify;
  SolverCaps caps;
  double target_ratio = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ReplicationResult {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::uint64_t generations = 0;
  std::size_t final_individuals = 0;
  std::vector<std::string> audit;  // audit_population on the finalized population
  VerificationReport report;

  double max_mean_error() const;
  double max_prob_error() const;
};

struct CampaignReport {
  std::vector<ReplicationResult> rows;  // ordered by replication index
  FailureBound theory;
  std::uint64_t generations = 0;
  double empirical_failure_rate = 0.0;  // fraction of replications with U1 or U2
  double mean_coverage = 0.0;
  double mean_prob_error = 0.0;         // over covered (replication, event) cells
  std::size_t ratio_violations = 0;

  bool within_theory() const { return theory.vacuous() || empirical_failure_rate <= theory.total; }
};

/// Generations a campaign or training run uses: the override if given,
/// otherwise required_runtime, then capped.
std::uint64_t effective_generations(const TheoryConstants& tc, std::optional<std::uint64_t> override_t,
                                    std::optional<std::uint64_t> cap);

/// Per-replication observer factory; each replication gets its own observer,
/// and replications may run on different threads.
using ObserverFactory = std::function<StepObserver(std::size_t replication)>;

CampaignReport run_campaign(const CampaignConfig& config, const ObserverFactory& observers = {});

void write_campaign_csv(const CampaignReport& report, std::ostream& out);

/// Summary document. The timestamp lives under "header" and is the only
/// field that varies between identical runs.
nlohmann::json campaign_summary(const CampaignReport& report, const CampaignConfig& config);

}  // namespace edasched
