#include "edasched/mixture.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace edasched;

namespace {

MixtureSpec spec_of(Eigen::Index n, std::size_t f, double eps, double bound, double tail, std::uint64_t seed) {
  MixtureSpec s;
  s.n = n;
  s.events = f;
  s.eps = eps;
  s.bound = bound;
  s.tail_mass = tail;
  s.min_prob_const = 1.0 - tail;
  s.seed = seed;
  return s;
}

// |observed - p| within 3 binomial standard errors.
bool within_3_sigma(std::size_t hits, std::size_t draws, double p) {
  const double freq = static_cast<double>(hits) / static_cast<double>(draws);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(draws));
  return std::abs(freq - p) <= 3 * sigma + 1e-15;
}

}  // namespace

TEST_CASE("building mixtures") {
  SUBCASE("single event takes all the mass") {
    const CubeMixture m = build_cube_mixture(spec_of(3, 1, 0.5, 10, 0, 1));
    CHECK(m.event_probs.size() == 1);
    CHECK(m.event_probs(0) == 1.0);
  }
  SUBCASE("two events with a full floor are equiprobable") {
    const CubeMixture m = build_cube_mixture(spec_of(3, 2, 0.5, 10, 0, 2));
    CHECK(m.event_probs(0) == 0.5);
    CHECK(m.event_probs(1) == 0.5);
  }
  SUBCASE("geometry, floors and separation") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      MixtureSpec s = spec_of(4, 1 + seed % 5, 0.5 + 0.25 * static_cast<double>(seed % 3), 10, 0.05, seed);
      s.min_prob_const = 0.5;
      const CubeMixture m = build_cube_mixture(s);
      REQUIRE(m.centers.cols() == static_cast<Eigen::Index>(s.events));
      CHECK(m.event_probs.sum() == doctest::Approx(0.95).epsilon(1e-12));
      CHECK(m.event_probs.minCoeff() >= 0.5 / static_cast<double>(s.events) - 1e-15);
      CHECK((m.lower.array() >= 0.0).all());
      CHECK((m.upper.array() <= s.bound).all());
      CHECK(((m.upper - m.lower).array() <= s.eps + 1e-12).all());
      for (std::size_t i = 0; i < s.events; ++i) {
        for (std::size_t j = i + 1; j < s.events; ++j) {
          CHECK(infinity_distance(m.centers.col(static_cast<Eigen::Index>(i)),
                                  m.centers.col(static_cast<Eigen::Index>(j))) >= 3 * s.eps);
        }
      }
    }
  }
  SUBCASE("centers sit on the grid") {
    MixtureSpec s = spec_of(3, 3, 1.25, 10, 0, 4);
    s.grid = 0.125;
    const CubeMixture m = build_cube_mixture(s);
    for (Eigen::Index i = 0; i < m.centers.size(); ++i) {
      const double k = m.centers(i) / 0.125;
      CHECK(k == std::round(k));
    }
  }
  SUBCASE("same seed, same mixture") {
    const CubeMixture a = build_cube_mixture(spec_of(5, 3, 0.5, 10, 0.1, 9));
    const CubeMixture b = build_cube_mixture(spec_of(5, 3, 0.5, 10, 0.1, 9));
    CHECK(a.centers == b.centers);
    CHECK(a.event_probs == b.event_probs);
  }
  SUBCASE("invalid configurations") {
    CHECK_THROWS_AS(build_cube_mixture(spec_of(3, 1, 11, 10, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(build_cube_mixture(spec_of(0, 1, 1, 10, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(build_cube_mixture(spec_of(3, 0, 1, 10, 0, 1)), std::invalid_argument);
    CHECK_THROWS_AS(build_cube_mixture(spec_of(3, 1, 1, 10, 1.0, 1)), std::invalid_argument);
    MixtureSpec greedy = spec_of(3, 2, 1, 10, 0.2, 1);
    greedy.min_prob_const = 0.9;
    CHECK_THROWS_AS(build_cube_mixture(greedy), std::invalid_argument);
    // Three 3-eps-separated cubes cannot fit on a line of length 2 eps.
    CHECK_THROWS_AS(build_cube_mixture(spec_of(1, 3, 1, 2, 0, 1)), std::invalid_argument);
    MixtureSpec overlap = spec_of(1, 3, 1, 2, 0, 1);
    overlap.separated = false;
    CHECK_NOTHROW(build_cube_mixture(overlap));
  }
  SUBCASE("law names") {
    CHECK(parse_cube_law("uniform") == CubeLaw::uniform);
    CHECK(parse_cube_law("truncated_gaussian") == CubeLaw::truncated_gaussian);
    CHECK(parse_cube_law(to_string(CubeLaw::truncated_gaussian)) == CubeLaw::truncated_gaussian);
    CHECK_THROWS_AS(parse_cube_law("cauchy"), std::invalid_argument);
  }
}

TEST_CASE("quantization rounds half up to the grid") {
  CHECK(quantize(1.2345, 0.1) == 1.2);
  CHECK(quantize(0.25, 0.5) == 0.5);
  CHECK(quantize(0.2499, 0.5) == 0.0);
  CHECK(quantize(0.375, 0.125) == 0.375);
  CHECK(quantize(0.4375, 0.125) == 0.5);
  CHECK(quantize(3.14159, 0.0) == 3.14159);
}

TEST_CASE("sampling") {
  SUBCASE("single uniform cube stays within eps/2 of its center") {
    MixtureSpec s = spec_of(4, 1, 0.5, 10, 0, 3);
    s.grid = 0.0;
    const CubeMixture m = build_cube_mixture(s);
    Rng rng(1);
    for (int t = 0; t < 2000; ++t) {
      const MixtureSample x = sample(m, rng);
      REQUIRE(x.event == std::optional<std::size_t>(0));
      CHECK(infinity_distance(x.q, m.centers.col(0)) <= 0.25);
    }
  }
  SUBCASE("event and tail frequencies match the weights") {
    MixtureSpec s = spec_of(3, 3, 0.5, 10, 0.1, 5);
    s.min_prob_const = 0.3;
    const CubeMixture m = build_cube_mixture(s);
    Rng rng(7);
    const std::size_t draws = 100000;
    std::vector<std::size_t> hits(3, 0);
    std::size_t tail = 0;
    for (std::size_t t = 0; t < draws; ++t) {
      const MixtureSample x = sample(m, rng);
      if (x.event) {
        ++hits[*x.event];
      } else {
        ++tail;
      }
      REQUIRE((x.q.array() >= 0.0).all());
      REQUIRE((x.q.array() <= s.bound).all());
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(within_3_sigma(hits[i], draws, m.event_probs(static_cast<Eigen::Index>(i))));
    CHECK(within_3_sigma(tail, draws, 0.1));
  }
  SUBCASE("quantized samples land on grid offsets and repeat") {
    MixtureSpec s = spec_of(2, 2, 0.5, 10, 0, 8);
    s.grid = 0.05;
    const CubeMixture m = build_cube_mixture(s);
    Rng rng(9);
    std::vector<std::vector<Eigen::VectorXd>> by_event(2);
    std::set<std::pair<double, double>> distinct;
    const int draws = 2000;
    for (int t = 0; t < draws; ++t) {
      const MixtureSample x = sample(m, rng);
      by_event[*x.event].push_back(x.q);
      distinct.insert({x.q(0), x.q(1)});
      CHECK_FALSE(std::signbit(x.q(0)));
    }
    for (const auto& group : by_event) {
      for (std::size_t i = 1; i < group.size(); ++i) {
        const Eigen::VectorXd k = (group[i] - group[0]) / 0.05;
        CHECK(infinity_distance(k, k.array().round().matrix()) < 1e-9);
      }
    }
    CHECK(distinct.size() < static_cast<std::size_t>(draws));
  }
  SUBCASE("same seed, same stream") {
    const CubeMixture m = build_cube_mixture(spec_of(3, 2, 0.5, 10, 0.2, 3));
    Rng a(5), b(5);
    for (int t = 0; t < 100; ++t) CHECK(sample(m, a).q == sample(m, b).q);
  }
}

TEST_CASE("conditional means") {
  SUBCASE("continuous symmetric laws have the center as mean") {
    for (CubeLaw law : {CubeLaw::uniform, CubeLaw::truncated_gaussian}) {
      MixtureSpec s = spec_of(3, 2, 0.5, 10, 0, 11);
      s.grid = 0.0;
      s.law = law;
      const CubeMixture m = build_cube_mixture(s);
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(infinity_distance(true_conditional_mean(m, i), m.centers.col(static_cast<Eigen::Index>(i))) <= 1e-12);
      }
    }
  }
  SUBCASE("quantized laws match a Monte Carlo estimate") {
    for (CubeLaw law : {CubeLaw::uniform, CubeLaw::truncated_gaussian}) {
      // 0.3 does not divide the cube side, so the quantized law is skewed.
      MixtureSpec s = spec_of(2, 1, 1.0, 10, 0, 12);
      s.grid = 0.3;
      s.law = law;
      const CubeMixture m = build_cube_mixture(s);
      const Eigen::VectorXd exact = true_conditional_mean(m, 0);
      Rng rng(13);
      const int draws = 1000000;
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(2), sum2 = Eigen::VectorXd::Zero(2);
      for (int t = 0; t < draws; ++t) {
        const Eigen::VectorXd q = sample(m, rng).q;
        sum += q;
        sum2 += q.cwiseProduct(q);
      }
      const Eigen::VectorXd mean = sum / draws;
      const Eigen::VectorXd var = sum2 / draws - mean.cwiseProduct(mean);
      for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK(std::abs(mean(j) - exact(j)) <= 3 * std::sqrt(var(j) / draws));
      }
    }
  }
  SUBCASE("index is checked") {
    const CubeMixture m = build_cube_mixture(spec_of(2, 1, 1.0, 10, 0, 12));
    CHECK_THROWS_AS(true_conditional_mean(m, 1), std::invalid_argument);
  }
}

TEST_CASE("event membership and probabilities") {
  SUBCASE("center, outside and overlap") {
    MixtureSpec s = spec_of(1, 2, 1.0, 4, 0, 1);
    s.separated = false;
    CubeMixture m = build_cube_mixture(s);
    m.centers << 1.0, 1.5;
    m.lower << 0.5, 1.0;
    m.upper << 1.5, 2.0;
    CHECK(true_event_of(m, Eigen::VectorXd::Constant(1, 1.0)) == std::optional<std::size_t>(0));
    CHECK(true_event_of(m, Eigen::VectorXd::Constant(1, 1.75)) == std::optional<std::size_t>(1));
    CHECK(true_event_of(m, Eigen::VectorXd::Constant(1, 1.25)) == std::optional<std::size_t>(0));
    CHECK_FALSE(true_event_of(m, Eigen::VectorXd::Constant(1, 3.0)));
    CHECK_THROWS_AS(in_event(m, Eigen::VectorXd::Zero(2), 0), std::invalid_argument);
  }
  SUBCASE("landing probabilities match Monte Carlo, overlaps and tail included") {
    for (CubeLaw law : {CubeLaw::uniform, CubeLaw::truncated_gaussian}) {
      MixtureSpec s = spec_of(2, 3, 1.0, 3, 0.3, 21);
      s.separated = false;
      s.min_prob_const = 0.6;
      s.law = law;
      const CubeMixture m = build_cube_mixture(s);
      Rng rng(22);
      const std::size_t draws = 200000;
      std::vector<std::size_t> hits(3, 0);
      for (std::size_t t = 0; t < draws; ++t) {
        const Eigen::VectorXd q = sample(m, rng).q;
        for (std::size_t i = 0; i < 3; ++i) hits[i] += in_event(m, q, i) ? 1 : 0;
      }
      for (std::size_t i = 0; i < 3; ++i) {
        const double p = event_probability(m, i);
        CHECK(p >= m.event_probs(static_cast<Eigen::Index>(i)));
        CHECK(within_3_sigma(hits[i], draws, p));
      }
    }
  }
}

TEST_CASE("random static jobs") {
  const StaticJobs a = random_static_jobs(12, 5);
  const StaticJobs b = random_static_jobs(12, 5);
  CHECK(a.releases == b.releases);
  CHECK(a.processings == b.processings);
  CHECK((a.releases.array() >= 0).all());
  CHECK((a.releases.array() <= 24).all());
  CHECK((a.processings.array() >= 1).all());
  CHECK((a.processings.array() <= 6).all());
  CHECK_NOTHROW(a.validate());
  CHECK_THROWS_AS(random_static_jobs(0, 1), std::invalid_argument);
}
