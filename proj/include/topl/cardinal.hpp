#pragma once
#ifndef TOPL_CARDINAL_HPP
#define TOPL_CARDINAL_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "topl/instance.hpp"
#include "topl/rng.hpp"

namespace topl {

/// Weighted l-centrum instance over explicit distances: client c carries weights[c]
/// copies of its cost min_{f in F} dist(c, f).
struct CardinalProblem {
  std::vector<CandidateId> facilities;  // global ids, reported back in solutions
  std::vector<std::size_t> weights;     // one per client
  std::vector<double> dist;             // clients x facilities, row-major
  std::size_t k = 1;
  std::size_t ell = 1;

  std::size_t num_clients() const { return weights.size(); }
  std::size_t num_facilities() const { return facilities.size(); }
  double d(std::size_t c, std::size_t f) const { return dist[c * facilities.size() + f]; }

  void validate() const {
    require(!facilities.empty(), "CardinalProblem: no facilities");
    require(dist.size() == weights.size() * facilities.size(), "CardinalProblem: distance table size");
    require(k >= 1, "CardinalProblem: k must be positive");
    const std::size_t total = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
    require(ell >= 1 && ell <= total, "CardinalProblem: ell must lie in [1, total weight]");
  }

  /// Per-client cost of a set of facility indices.
  std::vector<double> costs(std::span<const std::size_t> open) const {
    std::vector<double> out(num_clients(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < out.size(); ++c)
      for (std::size_t f : open) out[c] = std::min(out[c], d(c, f));
    return out;
  }

  double objective(std::span<const std::size_t> open) const {
    return topl_cost_weighted(costs(open), weights, ell);
  }
};

/// Unit-weight problem: every agent is a client, every candidate a facility.
inline CardinalProblem problem_from_instance(const MetricInstance& inst, std::size_t k, std::size_t ell) {
  CardinalProblem p;
  p.facilities.resize(inst.num_candidates());
  std::iota(p.facilities.begin(), p.facilities.end(), CandidateId{0});
  p.weights.assign(inst.num_agents(), 1);
  p.dist = inst.matrix();
  p.k = k;
  p.ell = ell;
  return p;
}

struct CardinalSolution {
  Committee committee;
  double value = 0.0;
  /// Weighted l-th largest client cost of the returned solution.
  double t_ell = 0.0;
  std::size_t evaluated = 0;
};

/// Weighted l-th largest entry.
inline double weighted_kth_largest(std::span<const double> values, std::span<const std::size_t> weights,
                                   std::size_t ell) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::size_t seen = 0;
  for (std::size_t i : order) {
    seen += weights[i];
    if (seen >= ell) return values[i];
  }
  throw ParameterError("weighted_kth_largest: ell exceeds total weight");
}

/// min over rho in {0} u {costs} of ell*rho + sum_c w_c (cost_c - rho)^+. The minimum of
/// the piecewise-linear proxy is attained at a breakpoint, so this equals the weighted
/// Top-l value.
inline double proxy_sweep(std::span<const double> costs, std::span<const std::size_t> weights, std::size_t ell) {
  std::vector<std::size_t> order(costs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] > costs[b]; });
  // Descending sweep: W = weight strictly above rho, S = weighted sum strictly above.
  double best = std::numeric_limits<double>::infinity();
  double S = 0.0;
  double W = 0.0;
  for (std::size_t idx = 0; idx <= order.size(); ++idx) {
    const double rho = idx < order.size() ? costs[order[idx]] : 0.0;
    best = std::min(best, static_cast<double>(ell) * rho + S - W * rho);
    if (idx < order.size()) {
      S += static_cast<double>(weights[order[idx]]) * rho;
      W += static_cast<double>(weights[order[idx]]);
    }
  }
  return best;
}

inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t r, std::uint64_t cap) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    // acc * (n - r + i) / i stays integral; guard the multiplication.
    const std::uint64_t num = n - r + i;
    if (acc > (std::numeric_limits<std::uint64_t>::max() / num)) return cap + 1;
    acc = acc * num / i;
    if (acc > cap) return cap + 1;
  }
  return acc;
}

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Exhaustive search over all min(k, |F|)-subsets in lexicographic order; the first
/// minimum found wins. Each committee is scored lazily: clients are scanned in
/// decreasing order of the incumbent's costs and the scan stops as soon as the running
/// Top-l of the scanned prefix reaches the incumbent value.
inline CardinalSolution solve_exact(const CardinalProblem& p, std::uint64_t cap = kDefaultEnumerationCap) {
  p.validate();
  const std::size_t nf = p.num_facilities();
  const std::size_t nc = p.num_clients();
  const std::size_t r = std::min(p.k, nf);
  const std::uint64_t count = binomial_capped(nf, r, cap);
  if (count > cap) {
    throw CapExceeded("solve_exact: C(" + std::to_string(nf) + "," + std::to_string(r) +
                      ") committees exceed the cap of " + std::to_string(cap) + "; use a heuristic solver");
  }

  std::vector<std::size_t> comb(r);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  // prefix[t][c] = min over comb[0..t) of d(c, .); prefix[0] = +inf.
  std::vector<std::vector<double>> prefix(r, std::vector<double>(nc, std::numeric_limits<double>::infinity()));
  auto rebuild_from = [&](std::size_t t) {
    for (std::size_t level = std::max<std::size_t>(t, 1); level < r; ++level)
      for (std::size_t c = 0; c < nc; ++c)
        prefix[level][c] = std::min(prefix[level - 1][c], p.d(c, comb[level - 1]));
  };
  rebuild_from(1);

  std::vector<std::size_t> scan(nc);
  std::iota(scan.begin(), scan.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_comb;
  std::vector<double> best_costs;
  std::size_t evaluated = 0;

  using Entry = std::pair<double, std::size_t>;  // (value, weight)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  while (true) {
    ++evaluated;
    const std::size_t last = comb[r - 1];
    const auto& base = prefix[r - 1];
    // Running Top-l over the scanned prefix.
    heap = {};
    double heap_sum = 0.0;
    std::size_t heap_weight = 0;
    bool pruned = false;
    for (std::size_t c : scan) {
      if (p.weights[c] == 0) continue;
      const double v = std::min(base[c], p.d(c, last));
      heap.emplace(v, p.weights[c]);
      heap_sum += v * static_cast<double>(p.weights[c]);
      heap_weight += p.weights[c];
      while (!heap.empty() && heap_weight - heap.top().second >= p.ell) {
        heap_sum -= heap.top().first * static_cast<double>(heap.top().second);
        heap_weight -= heap.top().second;
        heap.pop();
      }
      double partial = heap_sum;
      if (heap_weight > p.ell) partial -= heap.top().first * static_cast<double>(heap_weight - p.ell);
      if (partial >= best) {
        pruned = true;
        break;
      }
    }
    if (!pruned) {
      double value = heap_sum;
      if (heap_weight > p.ell) value -= heap.top().first * static_cast<double>(heap_weight - p.ell);
      best = value;
      best_comb = comb;
      best_costs.resize(nc);
      for (std::size_t c = 0; c < nc; ++c) best_costs[c] = std::min(base[c], p.d(c, last));
      std::stable_sort(scan.begin(), scan.end(),
                       [&](std::size_t a, std::size_t b) { return best_costs[a] > best_costs[b]; });
      if (best <= 0.0) break;
    }

    // Next combination in lexicographic order.
    std::size_t pos = r;
    while (pos > 0 && comb[pos - 1] == nf - r + pos - 1) --pos;
    if (pos == 0) break;
    ++comb[pos - 1];
    for (std::size_t t = pos; t < r; ++t) comb[t] = comb[t - 1] + 1;
    rebuild_from(pos);
  }

  CardinalSolution sol;
  std::vector<CandidateId> members;
  for (std::size_t f : best_comb) members.push_back(p.facilities[f]);
  sol.committee = Committee(std::move(members));
  sol.value = best;
  sol.t_ell = weighted_kth_largest(best_costs, p.weights, p.ell);
  sol.evaluated = evaluated;
  return sol;
}

/// Single-swap local search on the proxy objective. Seeded by the best single facility
/// followed by farthest-client additions; accepts the best improving swap per pass.
inline CardinalSolution solve_local_search(const CardinalProblem& p, Rng& rng, std::size_t max_iters = 200) {
  p.validate();
  const std::size_t nf = p.num_facilities();
  const std::size_t nc = p.num_clients();
  const std::size_t r = std::min(p.k, nf);
  std::size_t evaluated = 0;
  auto score = [&](const std::vector<std::size_t>& open) {
    ++evaluated;
    return proxy_sweep(p.costs(open), p.weights, p.ell);
  };

  std::vector<std::size_t> open;
  {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      const double v = score({f});
      if (v < best) best = v, arg = f;
    }
    open.push_back(arg);
  }
  std::vector<bool> is_open(nf, false);
  is_open[open.front()] = true;
  while (open.size() < r) {
    const auto costs = p.costs(open);
    std::size_t far = 0;
    for (std::size_t c = 1; c < nc; ++c)
      if (p.weights[c] > 0 && (p.weights[far] == 0 || costs[c] > costs[far])) far = c;
    std::size_t pick = nf;
    for (std::size_t f = 0; f < nf; ++f)
      if (!is_open[f] && (pick == nf || p.d(far, f) < p.d(far, pick))) pick = f;
    open.push_back(pick);
    is_open[pick] = true;
  }

  double current = score(open);
  std::vector<std::size_t> closed_order;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    closed_order.clear();
    for (std::size_t f = 0; f < nf; ++f)
      if (!is_open[f]) closed_order.push_back(f);
    rng.shuffle(closed_order);
    double best = current;
    std::size_t best_pos = r, best_in = nf;
    for (std::size_t pos = 0; pos < r; ++pos) {
      for (std::size_t in : closed_order) {
        auto trial = open;
        trial[pos] = in;
        const double v = score(trial);
        if (v < best * (1.0 - 1e-12)) best = v, best_pos = pos, best_in = in;
      }
    }
    if (best_pos == r) break;
    is_open[open[best_pos]] = false;
    is_open[best_in] = true;
    open[best_pos] = best_in;
    current = best;
  }

  CardinalSolution sol;
  std::vector<CandidateId> members;
  for (std::size_t f : open) members.push_back(p.facilities[f]);
  sol.committee = Committee(std::move(members));
  const auto costs = p.costs(open);
  sol.value = topl_cost_weighted(costs, p.weights, p.ell);
  sol.t_ell = weighted_kth_largest(costs, p.weights, p.ell);
  sol.evaluated = evaluated;
  return sol;
}

enum class SolverKind { exact, local_search, automatic };

inline const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::exact: return "exact";
    case SolverKind::local_search: return "local_search";
    case SolverKind::automatic: return "auto";
  }
  return "?";
}

inline SolverKind parse_solver_kind(std::string_view s) {
  if (s == "exact") return SolverKind::exact;
  if (s == "local_search") return SolverKind::local_search;
  if (s == "auto") return SolverKind::automatic;
  throw ParameterError("unknown solver: " + std::string(s));
}

/// The cardinal algorithm plugged into the mechanisms. `automatic` enumerates when
/// the problem fits under the cap and falls back to local search otherwise.
struct CardinalSolver {
  SolverKind kind = SolverKind::exact;
  std::uint64_t cap = kDefaultEnumerationCap;
  std::size_t max_iters = 200;
  std::uint64_t seed = 0x5eed;

  /// Approximation factor fed to the reduction. Local search has no proven factor;
  /// 2 is a nominal value.
  double declared_factor() const { return kind == SolverKind::exact ? 1.0 : 2.0; }
  bool guaranteed() const { return kind == SolverKind::exact; }

  CardinalSolution solve(const CardinalProblem& p) const {
    if (kind == SolverKind::exact) return solve_exact(p, cap);
    if (kind == SolverKind::automatic &&
        binomial_capped(p.num_facilities(), std::min(p.k, p.num_facilities()), cap) <= cap) {
      return solve_exact(p, cap);
    }
    Rng rng(seed);
    return solve_local_search(p, rng, max_iters);
  }
};

}  // namespace topl

#endif  // TOPL_CARDINAL_HPP
