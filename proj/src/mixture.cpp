#include "edasched/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace edasched {

std::string to_string(CubeLaw law) {
  switch (law) {
    case CubeLaw::uniform:
      return "uniform";
    case CubeLaw::truncated_gaussian:
      return "truncated_gaussian";
  }
  return "uniform";
}

CubeLaw parse_cube_law(const std::string& name) {
  if (name == "uniform") return CubeLaw::uniform;
  if (name == "truncated_gaussian" || name == "gaussian") return CubeLaw::truncated_gaussian;
  throw std::invalid_argument("unknown cube law '" + name + "' (expected uniform or truncated_gaussian)");
}

void MixtureSpec::validate() const {
  if (n < 1) throw std::invalid_argument("mixture: n must be >= 1");
  if (events < 1) throw std::invalid_argument("mixture: at least one event is required");
  if (!(eps > 0.0)) throw std::invalid_argument("mixture: eps must be > 0");
  if (!(bound >= eps)) {
    throw std::invalid_argument("mixture: eps (" + std::to_string(eps) + ") exceeds the bound M (" +
                                std::to_string(bound) + "); the cubes cannot fit in [0, M]^n");
  }
  if (!(tail_mass >= 0.0 && tail_mass < 1.0)) throw std::invalid_argument("mixture: tail_mass must lie in [0, 1)");
  if (!(min_prob_const > 0.0)) throw std::invalid_argument("mixture: const must be > 0");
  if (min_prob_const > 1.0 - tail_mass + 1e-12) {
    throw std::invalid_argument("mixture: const must not exceed 1 - tail_mass, the largest achievable f * min Pr(E_j)");
  }
  if (grid && !(*grid >= 0.0)) throw std::invalid_argument("mixture: grid step must be >= 0");
}

namespace {

// k-th multiple of step; divides by 1/step when that is an integer so that
// decimal steps such as 0.1 yield the double nearest to k/10.
double grid_value(double k, double step) {
  const double inverse = std::round(1.0 / step);
  if (inverse >= 1.0 && std::abs(1.0 / step - inverse) <= 1e-9 * inverse) return k / inverse;
  return k * step;
}

}  // namespace

double quantize(double x, double step) {
  if (step <= 0.0) return x;
  return grid_value(std::floor(x / step + 0.5), step);
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Law of one coordinate before quantization: uniform or a normal truncated to [lo, hi].
struct CoordinateLaw {
  double lo = 0.0;
  double hi = 0.0;
  bool gaussian = false;
  double mu = 0.0;
  double sigma = 1.0;

  double cdf(double x) const {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    if (!gaussian) return (x - lo) / (hi - lo);
    const double a = normal_cdf((lo - mu) / sigma);
    const double b = normal_cdf((hi - mu) / sigma);
    return (normal_cdf((x - mu) / sigma) - a) / (b - a);
  }

  double continuous_mean() const {
    if (!gaussian || hi == lo) return 0.5 * (lo + hi);
    const double alpha = (lo - mu) / sigma;
    const double beta = (hi - mu) / sigma;
    return mu + sigma * (normal_pdf(alpha) - normal_pdf(beta)) / (normal_cdf(beta) - normal_cdf(alpha));
  }

  double draw(Rng& rng) const {
    if (!gaussian) return std::uniform_real_distribution<double>(lo, hi)(rng);
    std::normal_distribution<double> normal(mu, sigma);
    for (;;) {
      const double x = normal(rng);
      if (x >= lo && x <= hi) return x;
    }
  }
};

double emitted(double x, double step, double lo, double hi) {
  return std::clamp(quantize(x, step), lo, hi) + 0.0;
}

// Visits every output value of the quantized coordinate with its probability.
template <typename Visit>
void for_each_cell(const CoordinateLaw& law, double step, Visit&& visit) {
  const double k_lo = std::floor(law.lo / step + 0.5);
  const double k_hi = std::floor(law.hi / step + 0.5);
  for (double k = k_lo; k <= k_hi; k += 1.0) {
    const double a = std::max(law.lo, (k - 0.5) * step);
    const double b = std::min(law.hi, (k + 0.5) * step);
    if (b <= a) continue;
    visit(std::clamp(grid_value(k, step), law.lo, law.hi), law.cdf(b) - law.cdf(a));
  }
}

double coordinate_mean(const CoordinateLaw& law, double step) {
  if (step <= 0.0 || law.hi == law.lo) return law.continuous_mean();
  double mean = 0.0;
  for_each_cell(law, step, [&](double value, double prob) { mean += value * prob; });
  return mean;
}

double coordinate_prob_in(const CoordinateLaw& law, double step, double a, double b) {
  if (step <= 0.0 || law.hi == law.lo) {
    if (law.hi == law.lo) return (law.lo >= a && law.lo <= b) ? 1.0 : 0.0;
    const double from = std::max(a, law.lo);
    const double to = std::min(b, law.hi);
    return to >= from ? law.cdf(to) - law.cdf(from) : 0.0;
  }
  double prob = 0.0;
  for_each_cell(law, step, [&](double value, double p) {
    if (value >= a && value <= b) prob += p;
  });
  return prob;
}

CoordinateLaw cube_coordinate(const CubeMixture& mixture, std::size_t i, Eigen::Index j) {
  const Eigen::Index col = static_cast<Eigen::Index>(i);
  CoordinateLaw law;
  law.lo = mixture.lower(j, col);
  law.hi = mixture.upper(j, col);
  law.gaussian = mixture.spec.law == CubeLaw::truncated_gaussian;
  law.mu = mixture.centers(j, col);
  law.sigma = mixture.gaussian_sigma();
  return law;
}

CoordinateLaw tail_coordinate(const CubeMixture& mixture) {
  CoordinateLaw law;
  law.lo = 0.0;
  law.hi = mixture.spec.bound;
  return law;
}

void check_event_index(const CubeMixture& mixture, std::size_t i) {
  if (i >= mixture.events()) {
    throw std::invalid_argument("event index " + std::to_string(i) + " out of range (mixture has " +
                                std::to_string(mixture.events()) + " events)");
  }
}

}  // namespace

CubeMixture build_cube_mixture(const MixtureSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n;
  const Eigen::Index f = static_cast<Eigen::Index>(spec.events);
  const double half = spec.eps / 2.0;
  const double step = spec.grid_step();
  Rng rng(spec.seed);

  CubeMixture out;
  out.spec = spec;
  out.centers.resize(n, f);

  // Centers are snapped to the grid when one is in use so that quantized
  // samples stay symmetric around them.
  auto draw_center = [&]() {
    Eigen::VectorXd c(n);
    const double k_lo = step > 0.0 ? std::ceil(half / step) : 0.0;
    const double k_hi = step > 0.0 ? std::floor((spec.bound - half) / step) : -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (step > 0.0 && k_lo <= k_hi) {
        std::uniform_int_distribution<long long> pick(static_cast<long long>(k_lo), static_cast<long long>(k_hi));
        c(j) = grid_value(static_cast<double>(pick(rng)), step);
      } else {
        c(j) = std::uniform_real_distribution<double>(half, spec.bound - half)(rng);
      }
    }
    return c;
  };

  constexpr int kPlacementAttempts = 10000;
  for (Eigen::Index i = 0; i < f; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Eigen::VectorXd c = draw_center();
      placed = true;
      if (spec.separated) {
        for (Eigen::Index prev = 0; prev < i && placed; ++prev) {
          placed = infinity_distance(c, out.centers.col(prev)) >= 3.0 * spec.eps;
        }
      }
      if (placed) out.centers.col(i) = c;
    }
    if (!placed) {
      throw std::invalid_argument("mixture: could not place " + std::to_string(f) +
                                  " cubes pairwise 3*eps apart inside [0, M]^n; disable separation or enlarge M");
    }
  }

  out.lower = (out.centers.array() - half).max(0.0).matrix();
  out.upper = (out.centers.array() + half).min(spec.bound).matrix();

  // const / f floor plus a random share of the remaining mass.
  Eigen::VectorXd raw(f);
  for (Eigen::Index i = 0; i < f; ++i) raw(i) = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double floor_prob = spec.min_prob_const / static_cast<double>(f);
  const double spare = std::max(0.0, 1.0 - spec.tail_mass - spec.min_prob_const);
  out.event_probs = Eigen::VectorXd::Constant(f, floor_prob) + spare * raw / raw.sum();
  return out;
}

MixtureSample sample(const CubeMixture& mixture, Rng& rng) {
  const Eigen::Index n = mixture.dimension();
  const double step = mixture.spec.grid_step();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

  MixtureSample out;
  out.q.resize(n);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < mixture.events(); ++i) {
    cumulative += mixture.event_probs(static_cast<Eigen::Index>(i));
    if (u < cumulative) {
      out.event = i;
      break;
    }
  }
  if (out.event) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const CoordinateLaw law = cube_coordinate(mixture, *out.event, j);
      out.q(j) = emitted(law.draw(rng), step, law.lo, law.hi);
    }
  } else {
    const CoordinateLaw law = tail_coordinate(mixture);
    for (Eigen::Index j = 0; j < n; ++j) {
      out.q(j) = emitted(law.draw(rng), step, law.lo, law.hi);
    }
  }
  return out;
}

DeliveryVector true_conditional_mean(const CubeMixture& mixture, std::size_t i) {
  check_event_index(mixture, i);
  DeliveryVector mean(mixture.dimension());
  for (Eigen::Index j = 0; j < mixture.dimension(); ++j) {
    mean(j) = coordinate_mean(cube_coordinate(mixture, i, j), mixture.spec.grid_step());
  }
  return mean;
}

bool in_event(const CubeMixture& mixture, const DeliveryVector& q, std::size_t i) {
  check_event_index(mixture, i);
  if (q.size() != mixture.dimension()) {
    throw std::invalid_argument("in_event: delivery vector dimension mismatch");
  }
  const Eigen::Index col = static_cast<Eigen::Index>(i);
  return (q.array() >= mixture.lower.col(col).array()).all() && (q.array() <= mixture.upper.col(col).array()).all();
}

std::optional<std::size_t> true_event_of(const CubeMixture& mixture, const DeliveryVector& q) {
  for (std::size_t i = 0; i < mixture.events(); ++i) {
    if (in_event(mixture, q, i)) return i;
  }
  return std::nullopt;
}

double event_probability(const CubeMixture& mixture, std::size_t i) {
  check_event_index(mixture, i);
  const double step = mixture.spec.grid_step();
  const Eigen::Index col = static_cast<Eigen::Index>(i);

  auto landing = [&](auto&& law_of) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < mixture.dimension() && p > 0.0; ++j) {
      p *= coordinate_prob_in(law_of(j), step, mixture.lower(j, col), mixture.upper(j, col));
    }
    return p;
  };

  double prob = 0.0;
  for (std::size_t source = 0; source < mixture.events(); ++source) {
    prob += mixture.event_probs(static_cast<Eigen::Index>(source)) *
            landing([&](Eigen::Index j) { return cube_coordinate(mixture, source, j); });
  }
  prob += mixture.spec.tail_mass * landing([&](Eigen::Index) { return tail_coordinate(mixture); });
  return prob;
}

StaticJobs random_static_jobs(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_static_jobs: n must be >= 1");
  Rng rng(seed);
  std::uniform_int_distribution<int> release(0, static_cast<int>(2 * n));
  std::uniform_int_distribution<int> processing(1, 6);
  StaticJobs jobs;
  jobs.releases.resize(n);
  jobs.processings.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jobs.releases(i) = release(rng);
    jobs.processings(i) = processing(rng);
  }
  return jobs;
}

}  // namespace edasched
