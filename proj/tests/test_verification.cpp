#include "edasched/campaign.hpp"
#include "edasched/verification.hpp"

#include <doctest.h>

#include <sstream>

using namespace edasched;

namespace {

MixtureSpec small_mixture(Eigen::Index n, std::size_t f, double tail, std::uint64_t seed) {
  MixtureSpec s;
  s.n = n;
  s.events = f;
  s.eps = 1.25;
  s.bound = 10;
  s.grid = 0.125;
  s.tail_mass = tail;
  s.min_prob_const = 1.0 - tail;
  s.seed = seed;
  return s;
}

TheoryConstants theory_for(const MixtureSpec& m, double l) {
  TheoryConstants tc;
  tc.n = static_cast<double>(m.n);
  tc.l = l;
  tc.alpha = 0.5;
  tc.eps = m.eps;
  tc.delta = m.eps / 4;
  tc.min_prob_const = m.min_prob_const;
  tc.const1 = static_cast<double>(m.events);
  tc.const2 = m.bound;
  return tc;
}

Population train(const CubeMixture& m, const StaticJobs& jobs, std::uint64_t generations, std::uint64_t seed) {
  return run_eda({generations, m.spec.eps, seed}, [&m](Rng& rng) { return sample(m, rng).q; }, jobs,
                 [](const Instance& inst) { return approx_scheduler(inst, 1.0); });
}

}  // namespace

TEST_CASE("conditional distribution estimate") {
  FinalIndividual fi;
  SUBCASE("single member") {
    fi.members = {Eigen::Vector3d(1, 2, 3)};
    fi.weights = {1.0};
    fi.mean = fi.members[0];
    const ConditionalEstimate e = estimate_cond_distribution(fi);
    CHECK(e.mean == fi.mean);
    CHECK(e.covariance == Eigen::MatrixXd::Zero(3, 3));
  }
  SUBCASE("two-point variance") {
    const double a = 0.75;
    fi.members = {Eigen::Vector3d(1 - a, 2, 3), Eigen::Vector3d(1 + a, 2, 3)};
    fi.weights = {0.5, 0.5};
    fi.mean = Eigen::Vector3d(1, 2, 3);
    const ConditionalEstimate e = estimate_cond_distribution(fi);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(0, 0) = a * a;
    CHECK(e.covariance == expected);
  }
  SUBCASE("symmetric positive semi-definite") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 200; ++t) {
      const int l = 1 + t % 7;
      Eigen::MatrixXd x(4, l);
      Eigen::VectorXd w(l);
      for (int i = 0; i < l; ++i) {
        for (int j = 0; j < 4; ++j) x(j, i) = 5 * u(rng);
        w(i) = 0.1 + u(rng);
      }
      w /= w.sum();
      const Eigen::VectorXd mean = x * w;
      const Eigen::MatrixXd cov = weighted_covariance(x, w, mean);
      CHECK(cov == cov.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
  }
  SUBCASE("works for other scalar types") {
    Eigen::Matrix<float, 2, 2> x;
    x << 0, 2, 0, 0;
    const Eigen::Vector2f w(0.5f, 0.5f);
    const Eigen::Vector2f mean(1, 0);
    const Eigen::MatrixXf cov = weighted_covariance(x, w, mean);
    CHECK(cov(0, 0) == 1.0f);
    CHECK(cov(1, 1) == 0.0f);
  }
}

TEST_CASE("verify_run") {
  SUBCASE("single cube, long run") {
    const MixtureSpec spec = small_mixture(4, 1, 0.0, 3);
    const CubeMixture m = build_cube_mixture(spec);
    const StaticJobs jobs = random_static_jobs(4, 1);
    const Population pop = train(m, jobs, 5000, 11);
    Rng fresh(12);
    const TheoryConstants tc = theory_for(spec, 1);
    const VerificationReport r = verify_run(pop, m, jobs, tc, {500, 8}, fresh);
    CHECK_FALSE(r.u1_occurred);
    CHECK_FALSE(r.u2_occurred);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].mean_error < tc.delta / 4);
    CHECK(r.events[0].estimated_prob == 1.0);
    CHECK(r.events[0].prob_error == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.coverage_rate == 1.0);
    CHECK(r.ratio_violations == 0);
    CHECK(r.ratio_checks + r.ratio_unguaranteed == 500);
    CHECK(r.total_samples == 5001);
    CHECK_FALSE(r.failed());
  }
  SUBCASE("one generation cannot cover three events") {
    const MixtureSpec spec = small_mixture(4, 3, 0.0, 4);
    const CubeMixture m = build_cube_mixture(spec);
    const StaticJobs jobs = random_static_jobs(4, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Population pop = train(m, jobs, 1, seed);
      Rng fresh(seed);
      const VerificationReport r = verify_run(pop, m, jobs, theory_for(spec, 1), {50, 8}, fresh);
      CHECK(r.u1_occurred);
      CHECK(r.u1_detail.size() >= 1);
      CHECK(r.failed());
      std::size_t covered = 0;
      for (const auto& ev : r.events) covered += ev.corresponding.empty() ? 0 : 1;
      CHECK(covered <= 2);
      CHECK(r.u1_detail.size() + covered == 3);
    }
  }
  SUBCASE("measured ratios never exceed the bound") {
    const MixtureSpec spec = small_mixture(5, 3, 0.05, 6);
    const CubeMixture m = build_cube_mixture(spec);
    const StaticJobs jobs = random_static_jobs(5, 2);
    const TheoryConstants tc = theory_for(spec, 2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Population pop = train(m, jobs, required_runtime(tc), seed);
      Rng fresh(100 + seed);
      const VerificationReport r = verify_run(pop, m, jobs, tc, {400, 8}, fresh);
      CHECK(r.ratio_checks > 0);
      CHECK(r.ratio_violations == 0);
      CHECK(r.max_ratio >= 1.0);
      CHECK(r.max_ratio <= r.min_ratio_bound);
      CHECK(r.coverage_rate >= 0.0);
      CHECK(r.coverage_rate <= 1.0);
      for (double e : r.event_prob_errors) {
        if (!std::isnan(e)) CHECK(e >= 0.0);
      }
    }
  }
  SUBCASE("errors") {
    const MixtureSpec spec = small_mixture(4, 1, 0.0, 3);
    const CubeMixture m = build_cube_mixture(spec);
    const Population pop = train(m, random_static_jobs(4, 1), 10, 1);
    Rng fresh(1);
    CHECK_THROWS_AS(verify_run(pop, m, random_static_jobs(3, 1), theory_for(spec, 1), {}, fresh),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_run(Population(Eigen::VectorXd::Zero(4)), m, random_static_jobs(4, 1),
                               theory_for(spec, 1), {}, fresh),
                    std::invalid_argument);
  }
}

TEST_CASE("campaigns") {
  CampaignConfig config;
  config.mixture = small_mixture(4, 2, 0.02, 8);
  config.jobs = random_static_jobs(4, 3);
  config.theory = theory_for(config.mixture, 2);
  config.replications = 12;
  config.master_seed = 77;
  config.verify.fresh_samples = 200;

  SUBCASE("results do not depend on the thread count") {
    config.threads = 1;
    const CampaignReport a = run_campaign(config);
    config.threads = 4;
    const CampaignReport b = run_campaign(config);
    std::ostringstream ca, cb;
    write_campaign_csv(a, ca);
    write_campaign_csv(b, cb);
    CHECK(ca.str() == cb.str());
    CHECK(a.empirical_failure_rate == b.empirical_failure_rate);
  }
  SUBCASE("report rows") {
    const CampaignReport r = run_campaign(config);
    const FailureBound theory = theorem3_failure_bound(config.theory);
    REQUIRE(r.rows.size() == 12);
    CHECK(r.generations == required_runtime(config.theory));
    CHECK(r.theory.total == theory.total);
    std::ostringstream csv;
    write_campaign_csv(r, csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line ==
          "replication,seed,T,u1,u2,coverage_rate,max_mean_err,max_prob_err,max_ratio,ratio_bound,theory_bound,"
          "vacuous_flag");
    int rows = 0;
    while (std::getline(lines, line)) {
      std::vector<std::string> cells;
      std::istringstream cellstream(line);
      std::string cell;
      while (std::getline(cellstream, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 12);
      CHECK(std::stod(cells[10]) == theory.total);
      CHECK(cells[11] == (theory.vacuous() ? "1" : "0"));
      CHECK(std::stoull(cells[0]) == static_cast<unsigned long long>(rows));
      CHECK(std::stoull(cells[1]) == derive_seed(config.master_seed, static_cast<std::uint64_t>(rows)));
      ++rows;
    }
    CHECK(rows == 12);
    CHECK((r.within_theory() || r.theory.vacuous()));
    const nlohmann::json summary = campaign_summary(r, config);
    CHECK(summary["theory"]["theory_bound"].get<double>() == theory.total);
    CHECK(summary["header"].contains("generated_at"));
    CHECK(summary["events"].size() == 2);
  }
  SUBCASE("overrides and caps on T") {
    config.generations = 50;
    CHECK(run_campaign(config).generations == 50);
    config.generation_cap = 20;
    CHECK(run_campaign(config).generations == 20);
    CHECK(effective_generations(config.theory, std::nullopt, 3) == 3);
    CHECK_THROWS_AS(effective_generations(config.theory, 0, std::nullopt), std::invalid_argument);
  }
  SUBCASE("errors carry the replication index") {
    config.target_ratio = 0.5;
    try {
      run_campaign(config);
      FAIL("expected a scheduler error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).rfind("replication 0:", 0) == 0);
    }
    CampaignConfig empty = config;
    empty.replications = 0;
    CHECK_THROWS_AS(run_campaign(empty), std::invalid_argument);
  }
  SUBCASE("event-probability error shrinks with more generations") {
    config.replications = 40;
    config.verify.fresh_samples = 0;
    std::vector<double> errors;
    for (std::uint64_t t : {100, 400, 1600}) {
      config.generations = t;
      errors.push_back(run_campaign(config).mean_prob_error);
    }
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
  }
  SUBCASE("small campaign stays within the (possibly vacuous) bound") {
    config.replications = 100;
    config.verify.fresh_samples = 0;
    const CampaignReport r = run_campaign(config);
    CHECK(r.within_theory());
    if (!r.theory.vacuous()) CHECK(r.empirical_failure_rate <= r.theory.total);
  }
}
