// edasched: generate mixtures, train the EDA, query robust schedules and run
// verification campaigns.
//
// Exit codes: 0 success, 1 validation or parse error, 2 I/O error,
// 3 no robust schedule within eps (query only).

#include "edasched/bounds.hpp"
#include "edasched/campaign.hpp"
#include "edasched/eda.hpp"
#include "edasched/io.hpp"
#include "edasched/mixture.hpp"
#include "edasched/solvers.hpp"

#include <CLI11.hpp>
#include <algorithm>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace edasched;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitNoSchedule = 3;

// Flags mirroring TheoryConstants; unset values default from the mixture.
struct TheoryFlags {
  std::optional<double> alpha, delta, eps, l, c, d, min_prob_const, const1, const2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Chernoff slack in (0,1) [0.5]");
    cmd->add_option("--delta", delta, "tolerated mean-estimation error [eps/4]");
    cmd->add_option("--eps", eps, "neighbourhood radius [mixture eps]");
    cmd->add_option("--l", l, "sample-count exponent [1]");
    cmd->add_option("--c", c, "event-count exponent [0]");
    cmd->add_option("--d", d, "delivery-bound exponent [0]");
    cmd->add_option("--const", min_prob_const, "min event probability constant [mixture const]");
    cmd->add_option("--const1", const1, "event-count constant [f / n^c]");
    cmd->add_option("--const2", const2, "delivery-bound constant [M / n^d]");
  }

  TheoryConstants resolve(const MixtureSpec& m) const {
    TheoryConstants tc;
    tc.n = static_cast<double>(m.n);
    tc.alpha = alpha.value_or(0.5);
    tc.eps = eps.value_or(m.eps);
    tc.delta = delta.value_or(tc.eps / 4.0);
    tc.l = l.value_or(1.0);
    tc.c = c.value_or(0.0);
    tc.d = d.value_or(0.0);
    tc.min_prob_const = min_prob_const.value_or(m.min_prob_const);
    tc.const1 = const1.value_or(static_cast<double>(m.events) / std::pow(tc.n, tc.c));
    tc.const2 = const2.value_or(m.bound / std::pow(tc.n, tc.d));
    tc.validate();
    return tc;
  }
};

struct CapsFlags {
  Eigen::Index enumeration = 10;
  Eigen::Index branch_and_bound = 30;

  void attach(CLI::App* cmd) {
    cmd->add_option("--enum-cap", enumeration, "largest n solved by enumeration");
    cmd->add_option("--bnb-cap", branch_and_bound, "largest n solved by branch and bound");
  }
  SolverCaps caps() const { return {enumeration, branch_and_bound}; }
};

std::string fmt_vector(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ']';
  return os.str();
}

std::string fmt_perm(const Permutation& perm) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < perm.size(); ++i) os << (i ? ", " : "") << perm[i];
  os << ']';
  return os.str();
}

// --- generate ----------------------------------------------------------------

struct GenerateArgs {
  long long n = 4;
  std::size_t events = 3;
  double eps = 0.5;
  double bound = 10.0;
  std::optional<double> min_prob_const;
  double tail = 0.0;
  std::string law = "uniform";
  std::optional<double> grid;
  bool overlap = false;
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  std::string out_dir = ".";
};

int cmd_generate(const GenerateArgs& a) {
  ProblemSpec problem;
  MixtureSpec& m = problem.mixture;
  m.n = a.n;
  m.events = a.events;
  m.eps = a.eps;
  m.bound = a.bound;
  m.tail_mass = a.tail;
  m.min_prob_const = a.min_prob_const.value_or(1.0 - a.tail);
  m.law = parse_cube_law(a.law);
  m.grid = a.grid;
  m.separated = !a.overlap;
  m.seed = a.seed;
  const CubeMixture mixture = build_cube_mixture(m);
  problem.jobs = random_static_jobs(m.n, derive_seed(m.seed, 1));

  fs::create_directories(a.out_dir);
  const fs::path spec_path = fs::path(a.out_dir) / "mixture.json";
  write_json_file(spec_path, problem_to_json(problem));
  std::cout << "wrote " << spec_path.string() << ": n=" << m.n << " f=" << m.events << " eps=" << m.eps
            << " M=" << m.bound << " grid=" << m.grid_step() << '\n';
  for (std::size_t i = 0; i < m.events; ++i) {
    std::cout << "  event " << i << ": p=" << mixture.event_probs(static_cast<Eigen::Index>(i))
              << " center=" << fmt_vector(mixture.centers.col(static_cast<Eigen::Index>(i))) << '\n';
  }

  Rng rng(derive_seed(m.seed, 2));
  for (std::size_t i = 0; i < a.instances; ++i) {
    const MixtureSample s = sample(mixture, rng);
    const fs::path path = fs::path(a.out_dir) / ("instance_" + std::to_string(i) + ".json");
    write_json_file(path, instance_to_json(Instance(problem.jobs, s.q)));
    std::cout << "wrote " << path.string() << (s.event ? " (event " + std::to_string(*s.event) + ")" : " (tail)")
              << '\n';
  }
  return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  std::string spec;
  TheoryFlags theory;
  CapsFlags caps;
  std::optional<std::uint64_t> generations;
  std::optional<std::uint64_t> generation_cap;
  std::uint64_t seed = 0;
  double target_ratio = 1.0;
  std::string out = "population.json";
};

int cmd_train(const TrainArgs& a) {
  const ProblemSpec problem = problem_from_json(read_json_file(a.spec));
  const TheoryConstants tc = a.theory.resolve(problem.mixture);
  const CubeMixture mixture = build_cube_mixture(problem.mixture);
  const std::uint64_t required = required_runtime(tc);

  EdaConfig config;
  config.generations = effective_generations(tc, a.generations, a.generation_cap);
  config.eps = tc.eps;
  config.seed = a.seed;
  const SolverCaps caps = a.caps.caps();
  const Population pop = run_eda(
      config, [&mixture](Rng& rng) { return sample(mixture, rng).q; }, problem.jobs,
      [&](const Instance& instance) { return approx_scheduler(instance, a.target_ratio, caps); });

  write_json_file(a.out, population_to_json(pop, problem.jobs, tc.eps), -1);

  std::cout << "T = " << config.generations << " (required runtime " << required << ")\n";
  std::cout << "final individuals: " << pop.finals.size() << "\n";
  std::cout << "K = " << pop.counter.total() << ", distinct vectors: " << pop.counter.entries().size() << "\n";
  for (std::size_t i = 0; i < pop.finals.size(); ++i) {
    const FinalIndividual& fi = pop.finals[i];
    std::cout << "  individual " << i << ": members=" << fi.members.size() << " N=" << fi.normalizer
              << " r=" << fi.event_prob << " J=" << fi.scheduled_lateness() << " ratio=" << fi.certified_ratio
              << (fi.certificate_met ? "" : " (target ratio not certified)") << '\n';
  }
  std::size_t covered = 0;
  for (std::size_t j = 0; j < mixture.events(); ++j) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pop.finals.size(); ++i) {
      const auto& members = pop.finals[i].members;
      const bool inside = std::all_of(members.begin(), members.end(),
                                      [&](const DeliveryVector& q) { return in_event(mixture, q, j); });
      if (inside && (!best || pop.finals[i].normalizer > pop.finals[*best].normalizer)) best = i;
    }
    std::cout << "  event " << j << ": Pr=" << event_probability(mixture, j);
    if (best) {
      ++covered;
      std::cout << " r_j=" << pop.finals[*best].event_prob << " (individual " << *best << ")\n";
    } else {
      std::cout << " r_j=- (no corresponding individual)\n";
    }
  }
  if (covered < mixture.events()) {
    std::cout << "warning: " << (mixture.events() - covered) << " of " << mixture.events()
              << " events have no corresponding final individual; U1 occurred\n";
  }
  if (config.generations < required) {
    std::cout << "warning: T is below the required runtime; U1 is probable\n";
  }
  std::cout << "wrote " << a.out << '\n';
  return 0;
}

// --- query -------------------------------------------------------------------

struct QueryArgs {
  std::string population;
  std::string instance;
  std::optional<double> eps;
  std::optional<double> delta;
};

int cmd_query(const QueryArgs& a) {
  const PopulationFile file = population_from_json(read_json_file(a.population));
  const Instance rho = instance_from_json(read_json_file(a.instance));
  if (rho.size() != file.jobs.size()) {
    throw std::invalid_argument("instance has " + std::to_string(rho.size()) + " jobs, population was trained on " +
                                std::to_string(file.jobs.size()));
  }
  const double eps = a.eps.value_or(file.eps);
  const double delta = a.delta.value_or(eps / 4.0);

  const auto match = query_robust_schedule(file.population, rho.delivery, eps);
  if (!match) {
    std::cout << "no robust schedule: no final individual lies within eps = " << eps << " of the delivery vector\n";
    return kExitNoSchedule;
  }
  const FinalIndividual& fi = *match->individual;
  const double achieved = max_lateness(rho, fi.schedule.perm).value;
  const auto bound = approx_ratio_bound(fi.scheduled_lateness(), fi.certified_ratio, eps, delta);

  std::cout << std::setprecision(10);
  std::cout << "individual: " << match->index << '\n';
  std::cout << "distance: " << match->distance << '\n';
  std::cout << "permutation: " << fmt_perm(fi.schedule.perm) << '\n';
  std::cout << "max_lateness: " << achieved << '\n';
  std::cout << "scheduled_lateness: " << fi.scheduled_lateness() << '\n';
  std::cout << "certified_ratio: " << fi.certified_ratio << '\n';
  if (bound) {
    std::cout << "approx_ratio_bound: " << *bound << '\n';
  } else {
    std::cout << "approx_ratio_bound: none (eps + delta too large for a guarantee)\n";
  }
  return 0;
}

// --- verify ------------------------------------------------------------------

struct VerifyArgs {
  std::string spec;
  TheoryFlags theory;
  CapsFlags caps;
  std::optional<std::uint64_t> generations;
  std::optional<std::uint64_t> generation_cap;
  std::size_t replications = 20;
  std::uint64_t seed = 0;
  std::size_t fresh = 1000;
  Eigen::Index ratio_cap = 8;
  unsigned threads = 0;
  double target_ratio = 1.0;
  std::string out_dir = ".";
};

int cmd_verify(const VerifyArgs& a) {
  const ProblemSpec problem = problem_from_json(read_json_file(a.spec));
  CampaignConfig config;
  config.mixture = problem.mixture;
  config.jobs = problem.jobs;
  config.theory = a.theory.resolve(problem.mixture);
  config.generations = a.generations;
  config.generation_cap = a.generation_cap;
  config.replications = a.replications;
  config.master_seed = a.seed;
  config.verify.fresh_samples = a.fresh;
  config.verify.ratio_cap = a.ratio_cap;
  config.caps = a.caps.caps();
  config.target_ratio = a.target_ratio;
  config.threads = a.threads;

  const CampaignReport report = run_campaign(config);

  fs::create_directories(a.out_dir);
  const fs::path csv_path = fs::path(a.out_dir) / "campaign.csv";
  const fs::path json_path = fs::path(a.out_dir) / "summary.json";
  std::ostringstream csv;
  write_campaign_csv(report, csv);
  write_text_file(csv_path, csv.str());
  write_json_file(json_path, campaign_summary(report, config));

  std::cout << "replications: " << report.rows.size() << ", T = " << report.generations << '\n';
  std::cout << "empirical Pr(U1 or U2): " << report.empirical_failure_rate << '\n';
  std::cout << "theory bound: " << report.theory.total << (report.theory.vacuous() ? " (vacuous)" : "") << '\n';
  std::cout << "mean coverage: " << report.mean_coverage << ", ratio violations: " << report.ratio_violations
            << '\n';
  std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
  return 0;
}

// Subcommand config files are not read by CLI11 itself, so the file's entries
// are spliced in as flags right after the subcommand name.
void expand_config(const CLI::App& app, std::vector<std::string>& args) {
  if (args.empty()) return;
  const CLI::App* cmd = nullptr;
  try {
    cmd = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return;
  }
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return;
  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(*path)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == cmd->get_name())) continue;
    const std::string flag = "--" + item.name;
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt == nullptr) throw CLI::ConfigError::Extras(item.name);
    if (opt->get_type_size() == 0) {
      if (item.inputs.size() == 1 && CLI::detail::to_flag_value(item.inputs[0]) > 0) injected.push_back(flag);
      continue;
    }
    injected.push_back(flag);
    injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EDA training and robust-schedule lookup for single-machine scheduling with uncertain delivery times"};
  app.require_subcommand(1);
  // Later occurrences win, so command-line flags override the config file.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  const auto with_config = [&config_path](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key = value file; keys match flag names and flags override it");
    return cmd;
  };

  GenerateArgs gen;
  auto* generate = with_config(app.add_subcommand("generate", "write a mixture spec and sample instances"));
  generate->add_option("--n", gen.n, "jobs (dimension)")->capture_default_str();
  generate->add_option("--events,--f", gen.events, "number of cubes f")->capture_default_str();
  generate->add_option("--eps", gen.eps, "cube side")->capture_default_str();
  generate->add_option("--M", gen.bound, "delivery-time bound")->capture_default_str();
  generate->add_option("--const", gen.min_prob_const, "min event probability constant [1 - tail]");
  generate->add_option("--tail", gen.tail, "tail mass")->capture_default_str();
  generate->add_option("--law", gen.law, "uniform | truncated_gaussian")->capture_default_str();
  generate->add_option("--grid", gen.grid, "quantization step; 0 disables [eps/10]");
  generate->add_flag("--overlap", gen.overlap, "allow overlapping cubes");
  generate->add_option("--seed", gen.seed, "seed")->required();
  generate->add_option("--instances", gen.instances, "sample instance files to write")->capture_default_str();
  generate->add_option("--out-dir", gen.out_dir, "output directory")->capture_default_str();

  TrainArgs train;
  auto* train_cmd = with_config(app.add_subcommand("train", "run the EDA and write the finalized population"));
  train_cmd->add_option("--spec", train.spec, "mixture spec file")->required();
  train.theory.attach(train_cmd);
  train.caps.attach(train_cmd);
  train_cmd->add_option("--T", train.generations, "generations [required runtime]");
  train_cmd->add_option("--T-cap", train.generation_cap, "upper limit on T");
  train_cmd->add_option("--seed", train.seed, "seed")->required();
  train_cmd->add_option("--target-ratio", train.target_ratio, "approximation ratio requested from the scheduler");
  train_cmd->add_option("--out", train.out, "population file")->capture_default_str();

  QueryArgs query;
  auto* query_cmd = with_config(app.add_subcommand("query", "look up the robust schedule for an instance"));
  query_cmd->add_option("--population", query.population, "population file")->required();
  query_cmd->add_option("--instance", query.instance, "instance file")->required();
  query_cmd->add_option("--eps", query.eps, "neighbourhood radius [population eps]");
  query_cmd->add_option("--delta", query.delta, "mean-estimation slack for the ratio bound [eps/4]");

  VerifyArgs verify;
  auto* verify_cmd = with_config(app.add_subcommand("verify", "run a verification campaign and write CSV + JSON reports"));
  verify_cmd->add_option("--spec", verify.spec, "mixture spec file")->required();
  verify.theory.attach(verify_cmd);
  verify.caps.attach(verify_cmd);
  verify_cmd->add_option("--T", verify.generations, "generations [required runtime]");
  verify_cmd->add_option("--T-cap", verify.generation_cap, "upper limit on T");
  verify_cmd->add_option("--replications", verify.replications, "replications")->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "master seed")->required();
  verify_cmd->add_option("--fresh", verify.fresh, "fresh samples per replication")->capture_default_str();
  verify_cmd->add_option("--ratio-cap", verify.ratio_cap, "largest n for brute-force ratio checks")
      ->capture_default_str();
  verify_cmd->add_option("--threads", verify.threads, "worker threads; 0 uses all cores")->capture_default_str();
  verify_cmd->add_option("--target-ratio", verify.target_ratio, "approximation ratio requested from the scheduler");
  verify_cmd->add_option("--out-dir", verify.out_dir, "output directory")->capture_default_str();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    expand_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (*generate) return guarded([&] { return cmd_generate(gen); });
  if (*train_cmd) return guarded([&] { return cmd_train(train); });
  if (*query_cmd) return guarded([&] { return cmd_query(query); });
  return guarded([&] { return cmd_verify(verify); });
}
