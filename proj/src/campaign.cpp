#include "edasched/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace edasched {

namespace {

double nan_max(const std::vector<double>& values) {
  double out = std::numeric_limits<double>::quiet_NaN();
  for (double v : values) {
    if (std::isnan(v)) continue;
    out = std::isnan(out) ? v : std::max(out, v);
  }
  return out;
}

ReplicationResult run_replication(const CampaignConfig& config, const CubeMixture& mixture, std::size_t index,
                                  std::uint64_t generations, const ObserverFactory& observers) {
  ReplicationResult out;
  out.replication = index;
  out.seed = derive_seed(config.master_seed, index);
  out.generations = generations;

  EdaConfig eda;
  eda.generations = generations;
  eda.eps = config.theory.eps;
  eda.seed = derive_seed(out.seed, 0);

  const DeliverySampler sampler = [&mixture](Rng& rng) { return sample(mixture, rng).q; };
  const Scheduler scheduler = [&config](const Instance& instance) {
    return approx_scheduler(instance, config.target_ratio, config.caps);
  };
  const StepObserver observer = observers ? observers(index) : StepObserver{};

  const Population pop = run_eda(eda, sampler, config.jobs, scheduler, observer);
  out.final_individuals = pop.finals.size();
  out.audit = audit_population(pop, config.theory.eps);

  Rng fresh(derive_seed(out.seed, 1));
  out.report = verify_run(pop, mixture, config.jobs, config.theory, config.verify, fresh);
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double ReplicationResult::max_mean_error() const { return nan_max(report.u2_detail); }
double ReplicationResult::max_prob_error() const { return nan_max(report.event_prob_errors); }

std::uint64_t effective_generations(const TheoryConstants& tc, std::optional<std::uint64_t> override_t,
                                    std::optional<std::uint64_t> cap) {
  std::uint64_t t = override_t ? *override_t : required_runtime(tc);
  if (t < 1) throw std::invalid_argument("T must be at least 1");
  if (cap) t = std::min(t, *cap);
  return t;
}

CampaignReport run_campaign(const CampaignConfig& config, const ObserverFactory& observers) {
  config.theory.validate();
  config.jobs.validate();
  if (config.replications == 0) {
    throw std::invalid_argument("campaign: at least one replication is required");
  }
  if (config.jobs.size() != config.mixture.n) {
    throw std::invalid_argument("campaign: jobs and mixture disagree on n");
  }
  const CubeMixture mixture = build_cube_mixture(config.mixture);

  CampaignReport report;
  report.theory = theorem3_failure_bound(config.theory);
  report.generations = effective_generations(config.theory, config.generations, config.generation_cap);
  report.rows.resize(config.replications);

  std::vector<std::exception_ptr> errors(config.replications);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < config.replications; i = next++) {
      try {
        report.rows[i] = run_replication(config, mixture, i, report.generations, observers);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.replications));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(i) + ": " + e.what());
    }
  }

  // Fold in replication order.
  std::size_t failures = 0;
  std::size_t prob_cells = 0;
  double coverage = 0.0;
  double prob_error = 0.0;
  for (const ReplicationResult& row : report.rows) {
    if (row.report.failed()) ++failures;
    coverage += row.report.coverage_rate;
    report.ratio_violations += row.report.ratio_violations;
    for (double e : row.report.event_prob_errors) {
      if (std::isnan(e)) continue;
      prob_error += e;
      ++prob_cells;
    }
  }
  const double reps = static_cast<double>(report.rows.size());
  report.empirical_failure_rate = static_cast<double>(failures) / reps;
  report.mean_coverage = coverage / reps;
  report.mean_prob_error = prob_cells == 0 ? std::numeric_limits<double>::quiet_NaN()
                                           : prob_error / static_cast<double>(prob_cells);
  return report;
}

void write_campaign_csv(const CampaignReport& report, std::ostream& out) {
  out << "replication,seed,T,u1,u2,coverage_rate,max_mean_err,max_prob_err,max_ratio,ratio_bound,theory_bound,"
         "vacuous_flag\n";
  for (const ReplicationResult& row : report.rows) {
    out << row.replication << ',' << row.seed << ',' << row.generations << ',' << (row.report.u1_occurred ? 1 : 0)
        << ',' << (row.report.u2_occurred ? 1 : 0) << ',' << format_double(row.report.coverage_rate) << ','
        << format_double(row.max_mean_error()) << ',' << format_double(row.max_prob_error()) << ','
        << format_double(row.report.max_ratio) << ',' << format_double(row.report.min_ratio_bound) << ','
        << format_double(report.theory.total) << ',' << (report.theory.vacuous() ? 1 : 0) << '\n';
  }
}

nlohmann::json campaign_summary(const CampaignReport& report, const CampaignConfig& config) {
  using nlohmann::json;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");

  auto number = [](double v) -> json { return std::isnan(v) ? json(nullptr) : json(v); };

  json header = {
      {"generated_at", stamp.str()},
      {"estimation_term_note",
       "theory_bound uses 2n*exp(-2*delta^2*n^l/const2^2), obtained from the Hoeffding bound with k = n^(2d+l) and "
       "M = const2*n^d; the alternative printed form 2n*exp(n^(-(2*delta^2/const2^2)*l)) is reported as "
       "printed_estimation_term and exceeds 1 for every n >= 1"},
  };

  std::size_t u1 = 0;
  std::size_t u2 = 0;
  for (const auto& row : report.rows) {
    u1 += row.report.u1_occurred ? 1 : 0;
    u2 += row.report.u2_occurred ? 1 : 0;
  }

  json events = json::array();
  for (std::size_t j = 0; j < config.mixture.events; ++j) {
    std::size_t covered = 0;
    for (const auto& row : report.rows) {
      if (j < row.report.events.size() && !row.report.events[j].corresponding.empty()) ++covered;
    }
    events.push_back({{"event", j},
                      {"coverage_fraction", static_cast<double>(covered) / static_cast<double>(report.rows.size())}});
  }

  return json{
      {"header", header},
      {"replications", report.rows.size()},
      {"master_seed", config.master_seed},
      {"T", report.generations},
      {"theory",
       {{"n", config.theory.n},
        {"c", config.theory.c},
        {"d", config.theory.d},
        {"l", config.theory.l},
        {"alpha", config.theory.alpha},
        {"delta", config.theory.delta},
        {"eps", config.theory.eps},
        {"const", config.theory.min_prob_const},
        {"const1", config.theory.const1},
        {"const2", config.theory.const2},
        {"undercount_term", report.theory.undercount_term},
        {"estimation_term", report.theory.estimation_term},
        {"printed_estimation_term", report.theory.printed_estimation_term},
        {"theory_bound", report.theory.total},
        {"vacuous", report.theory.vacuous()}}},
      {"empirical",
       {{"failure_rate", report.empirical_failure_rate},
        {"u1_replications", u1},
        {"u2_replications", u2},
        {"mean_coverage", report.mean_coverage},
        {"mean_prob_error", number(report.mean_prob_error)},
        {"ratio_violations", report.ratio_violations},
        {"within_theory", report.within_theory()}}},
      {"events", events},
  };
}

}  // namespace edasched
