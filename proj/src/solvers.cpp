#include "edasched/solvers.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace edasched {

CapacityError::CapacityError(const std::string& solver, Eigen::Index n, Eigen::Index cap)
    : std::runtime_error(solver + ": " + std::to_string(n) + " jobs exceed the configured cap of " +
                         std::to_string(cap)),
      cap_(cap) {}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Permutation order_by_release(const Eigen::VectorXd& releases) {
  Permutation order = identity_permutation(releases.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return releases(a) < releases(b); });
  return order;
}

// Heap order: largest tail on top, smaller index wins ties.
struct TailPriority {
  const Eigen::VectorXd* tails;
  bool operator()(Eigen::Index a, Eigen::Index b) const {
    if ((*tails)(a) != (*tails)(b)) {
      return (*tails)(a) < (*tails)(b);
    }
    return a > b;
  }
};

Permutation schrage_order(const Eigen::VectorXd& heads, const Eigen::VectorXd& bodies, const Eigen::VectorXd& tails) {
  const Eigen::Index n = heads.size();
  const Permutation by_release = order_by_release(heads);
  std::priority_queue<Eigen::Index, std::vector<Eigen::Index>, TailPriority> ready(TailPriority{&tails});

  Permutation perm;
  perm.reserve(static_cast<std::size_t>(n));
  double t = -kInf;
  std::size_t next = 0;
  while (static_cast<Eigen::Index>(perm.size()) < n) {
    while (next < by_release.size() && heads(by_release[next]) <= t) {
      ready.push(by_release[next++]);
    }
    if (ready.empty()) {
      t = heads(by_release[next]);
      continue;
    }
    const Eigen::Index job = ready.top();
    ready.pop();
    perm.push_back(job);
    t = std::max(t, heads(job)) + bodies(job);
  }
  return perm;
}

double preemptive_bound(const Eigen::VectorXd& heads, const Eigen::VectorXd& bodies, const Eigen::VectorXd& tails) {
  const Eigen::Index n = heads.size();
  const Permutation by_release = order_by_release(heads);
  std::priority_queue<Eigen::Index, std::vector<Eigen::Index>, TailPriority> ready(TailPriority{&tails});
  Eigen::VectorXd remaining = bodies;

  double bound = -kInf;
  double t = heads(by_release.front());
  std::size_t next = 0;
  Eigen::Index done = 0;
  while (done < n) {
    while (next < by_release.size() && heads(by_release[next]) <= t) {
      ready.push(by_release[next++]);
    }
    if (ready.empty()) {
      t = heads(by_release[next]);
      continue;
    }
    const Eigen::Index job = ready.top();
    const double next_release = next < by_release.size() ? heads(by_release[next]) : kInf;
    if (t + remaining(job) <= next_release) {
      t += remaining(job);
      remaining(job) = 0.0;
      ready.pop();
      ++done;
      bound = std::max(bound, t + tails(job));
    } else {
      remaining(job) -= next_release - t;
      t = next_release;
    }
  }
  return bound;
}

struct Evaluation {
  Eigen::VectorXd starts;
  double value = -kInf;
  std::size_t last_critical = 0;
};

Evaluation evaluate_node(const Eigen::VectorXd& heads, const Eigen::VectorXd& bodies, const Eigen::VectorXd& tails,
                         const Permutation& perm) {
  Evaluation ev;
  const Eigen::Index n = heads.size();
  ev.starts.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index job = perm[static_cast<std::size_t>(i)];
    ev.starts(i) = i == 0 ? heads(job) : std::max(ev.starts(i - 1) + bodies(perm[static_cast<std::size_t>(i - 1)]), heads(job));
    const double delivered = ev.starts(i) + bodies(job) + tails(job);
    if (delivered >= ev.value) {
      ev.value = delivered;
      ev.last_critical = static_cast<std::size_t>(i);
    }
  }
  return ev;
}

SolveResult make_result(const Instance& instance, Permutation perm, double ratio, bool exact) {
  SolveResult out;
  out.schedule = evaluate(instance, std::move(perm));
  out.value = *out.schedule.max_lateness;
  out.certified_ratio = ratio;
  out.exact = exact;
  return out;
}

struct Node {
  Eigen::VectorXd heads;
  Eigen::VectorXd tails;
  double lower = -kInf;
};

}  // namespace

namespace {

// Lateness of an order already known to be a permutation; no allocation.
double lateness_of(const Instance& instance, const Permutation& perm) {
  const Eigen::VectorXd& r = instance.statics.releases;
  const Eigen::VectorXd& p = instance.statics.processings;
  const Eigen::VectorXd& q = instance.delivery;
  double t = r(perm[0]);
  double worst = -kInf;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const Eigen::Index j = perm[i];
    t = std::max(t, r(j)) + p(j);
    worst = std::max(worst, t + q(j));
  }
  return worst;
}

}  // namespace

SolveResult brute_force_optimum(const Instance& instance, const SolverCaps& caps) {
  const Eigen::Index n = instance.size();
  if (n > caps.enumeration) {
    throw CapacityError("brute_force_optimum", n, caps.enumeration);
  }
  Permutation perm = identity_permutation(n);
  Permutation best = perm;
  double best_value = kInf;
  do {
    const double value = lateness_of(instance, perm);
    if (value < best_value) {
      best_value = value;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return make_result(instance, std::move(best), 1.0, true);
}

SolveResult schrage_heuristic(const Instance& instance) {
  Permutation perm = schrage_order(instance.statics.releases, instance.statics.processings, instance.delivery);
  return make_result(instance, std::move(perm), 2.0, false);
}

double preemptive_lower_bound(const Instance& instance) {
  return preemptive_bound(instance.statics.releases, instance.statics.processings, instance.delivery);
}

SolveResult exact_branch_and_bound(const Instance& instance, const SolverCaps& caps, BranchAndBoundStats* stats) {
  const Eigen::Index n = instance.size();
  if (n > caps.branch_and_bound) {
    throw CapacityError("exact_branch_and_bound", n, caps.branch_and_bound);
  }
  const Eigen::VectorXd& bodies = instance.statics.processings;

  Permutation best = schrage_order(instance.statics.releases, bodies, instance.delivery);
  double best_value = max_lateness(instance, best).value;
  std::uint64_t visited = 0;

  std::vector<Node> stack;
  Node root{instance.statics.releases, instance.delivery, -kInf};
  root.lower = preemptive_bound(root.heads, bodies, root.tails);
  stack.push_back(std::move(root));

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (node.lower >= best_value) {
      continue;
    }
    ++visited;

    const Permutation perm = schrage_order(node.heads, bodies, node.tails);
    // Heads and tails only ever grow along a branch, so the original data
    // never scores a permutation worse than the node does.
    const double original_value = max_lateness(instance, perm).value;
    if (original_value < best_value) {
      best_value = original_value;
      best = perm;
    }

    const Evaluation ev = evaluate_node(node.heads, bodies, node.tails, perm);
    if (ev.value <= node.lower) {
      continue;  // Schrage is optimal for this node
    }

    // Critical block [a, b]: no idle time between the start of a and the end of b.
    const std::size_t b = ev.last_critical;
    std::size_t a = b;
    while (a > 0 && ev.starts(static_cast<Eigen::Index>(a)) ==
                        ev.starts(static_cast<Eigen::Index>(a - 1)) + bodies(perm[a - 1])) {
      --a;
    }

    const double tail_b = node.tails(perm[b]);
    std::optional<std::size_t> interference;
    for (std::size_t pos = b; pos-- > a;) {
      if (node.tails(perm[pos]) < tail_b) {
        interference = pos;
        break;
      }
    }
    if (!interference) {
      continue;
    }
    const std::size_t c = *interference;
    const Eigen::Index job_c = perm[c];

    double block_head = kInf;
    double block_body = 0.0;
    double block_tail = kInf;
    for (std::size_t pos = c + 1; pos <= b; ++pos) {
      block_head = std::min(block_head, node.heads(perm[pos]));
      block_body += bodies(perm[pos]);
      block_tail = std::min(block_tail, node.tails(perm[pos]));
    }
    const double block_bound = block_head + block_body + block_tail;
    const double with_c_bound = std::min(block_head, node.heads(job_c)) + block_body + bodies(job_c) +
                                std::min(block_tail, node.tails(job_c));
    const double inherited = std::max({node.lower, block_bound, with_c_bound});

    // c after the block.
    Node after{node.heads, node.tails, inherited};
    after.heads(job_c) = std::max(after.heads(job_c), block_head + block_body);
    after.lower = std::max(inherited, preemptive_bound(after.heads, bodies, after.tails));

    // c before the block.
    Node before{std::move(node.heads), std::move(node.tails), inherited};
    before.tails(job_c) = std::max(before.tails(job_c), block_tail + block_body);
    before.lower = std::max(inherited, preemptive_bound(before.heads, bodies, before.tails));

    // Explore the child with the smaller lower bound first.
    if (after.lower < before.lower) {
      if (before.lower < best_value) stack.push_back(std::move(before));
      if (after.lower < best_value) stack.push_back(std::move(after));
    } else {
      if (after.lower < best_value) stack.push_back(std::move(after));
      if (before.lower < best_value) stack.push_back(std::move(before));
    }
  }

  if (stats != nullptr) {
    stats->nodes = visited;
  }
  return make_result(instance, std::move(best), 1.0, true);
}

SolveResult approx_scheduler(const Instance& instance, double target_ratio, const SolverCaps& caps) {
  if (!(target_ratio >= 1.0)) {
    throw std::invalid_argument("approx_scheduler: target ratio must be >= 1");
  }
  if (instance.size() <= caps.branch_and_bound) {
    return exact_branch_and_bound(instance, caps);
  }
  SolveResult out = schrage_heuristic(instance);
  out.certificate_met = out.certified_ratio <= target_ratio;
  return out;
}

}  // namespace edasched
