#pragma once

// Synthetic uncertainty models: delivery vectors concentrated on f
// axis-aligned cubes of side eps inside [0, M]^n, plus a uniform tail.

#include "edasched/rng.hpp"
#include "edasched/schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace edasched {

enum class CubeLaw { uniform, truncated_gaussian };

std::string to_string(CubeLaw law);
CubeLaw parse_cube_law(const std::string& name);

struct MixtureSpec {
  Eigen::Index n = 4;
  std::size_t events = 1;  // f
  double eps = 0.5;
  double bound = 10.0;         // M
  double min_prob_const = 1.0;  // every event has probability >= const / f
  double tail_mass = 0.0;
  CubeLaw law = CubeLaw::uniform;
  std::optional<double> grid;  // unset: eps / 10; 0: continuous
  bool separated = true;       // centers pairwise >= 3 eps apart
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an infeasible configuration.
  void validate() const;
  double grid_step() const { return grid.value_or(eps / 10.0); }
};

struct CubeMixture {
  MixtureSpec spec;
  Eigen::MatrixXd centers;  // n x f, one column per event
  Eigen::MatrixXd lower;    // cube bounds, same layout
  Eigen::MatrixXd upper;
  Eigen::VectorXd event_probs;  // component weights, summing to 1 - tail_mass

  Eigen::Index dimension() const { return centers.rows(); }
  std::size_t events() const { return static_cast<std::size_t>(centers.cols()); }
  double half_width() const { return spec.eps / 2.0; }
  double gaussian_sigma() const { return spec.eps / 4.0; }
};

CubeMixture build_cube_mixture(const MixtureSpec& spec);

struct MixtureSample {
  DeliveryVector q;
  std::optional<std::size_t> event;  // generating cube; empty for the tail
};

/// Draws a component, then a point from it. With a grid each coordinate is
/// rounded half-up to a multiple of the step and clamped back into the cube
/// (or the box, for tail draws).
MixtureSample sample(const CubeMixture& mixture, Rng& rng);

/// Exact mean of the (quantized) within-cube law of cube i.
DeliveryVector true_conditional_mean(const CubeMixture& mixture, std::size_t i);

bool in_event(const CubeMixture& mixture, const DeliveryVector& q, std::size_t i);

/// Smallest i whose cube contains q.
std::optional<std::size_t> true_event_of(const CubeMixture& mixture, const DeliveryVector& q);

/// Probability that a sample lands in cube i, counting draws from the tail and
/// from overlapping cubes.
double event_probability(const CubeMixture& mixture, std::size_t i);

double quantize(double x, double step);

/// Integer-valued release and processing times for n jobs.
StaticJobs random_static_jobs(Eigen::Index n, std::uint64_t seed);

}  // namespace edasched
