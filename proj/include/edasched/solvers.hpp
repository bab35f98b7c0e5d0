#pragma once

// Exact and approximate solvers for 1|r_j|L_max in the head-body-tail form.

#include "edasched/schedule.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edasched {

/// Raised when an exact solver is asked for more jobs than its cap allows.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& solver, Eigen::Index n, Eigen::Index cap);

  Eigen::Index cap() const { return cap_; }

 private:
  Eigen::Index cap_;
};

struct SolverCaps {
  Eigen::Index enumeration = 10;
  Eigen::Index branch_and_bound = 30;
};

struct SolveResult {
  Schedule schedule;
  double value = 0.0;          // J* when exact, J_pi^max otherwise
  double certified_ratio = 1;  // value <= certified_ratio * J*
  bool exact = false;
  bool certificate_met = true;  // false when the caller's target ratio could not be certified
};

/// Enumerates all n! orders and keeps the lexicographically first optimum.
SolveResult brute_force_optimum(const Instance& instance, const SolverCaps& caps = {});

/// Greedy list schedule: whenever the machine frees up, start the released job
/// with the largest delivery time (smaller index on ties); idle until the next
/// release when nothing is available. Certified within a factor of 2.
SolveResult schrage_heuristic(const Instance& instance);

/// Value of the preemptive relaxation (largest delivery time first, preempting
/// when a job with a longer delivery time is released). A lower bound on J*.
double preemptive_lower_bound(const Instance& instance);

struct BranchAndBoundStats {
  std::uint64_t nodes = 0;
};

/// Carlier's branch and bound: Schrage upper bounds, preemptive lower bounds
/// and branching on the interference job of the critical block.
SolveResult exact_branch_and_bound(const Instance& instance, const SolverCaps& caps = {},
                                   BranchAndBoundStats* stats = nullptr);

/// Exact when n fits the branch-and-bound cap, Schrage otherwise. When the
/// heuristic's factor of 2 exceeds target_ratio the result is flagged with
/// certificate_met = false.
SolveResult approx_scheduler(const Instance& instance, double target_ratio, const SolverCaps& caps = {});

}  // namespace edasched
