#pragma once
#ifndef TOPL_ESTIMATORS_HPP
#define TOPL_ESTIMATORS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <vector>

#include "topl/instance.hpp"
#include "topl/oracle.hpp"
#include "topl/rng.hpp"

namespace topl {

enum class EstimateKind { boruvka, boruvka_gen, kcenter, kcenter_gen, kmedian };

inline const char* to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::boruvka: return "boruvka";
    case EstimateKind::boruvka_gen: return "boruvka_gen";
    case EstimateKind::kcenter: return "kcenter";
    case EstimateKind::kcenter_gen: return "kcenter_gen";
    case EstimateKind::kmedian: return "kmedian";
  }
  return "?";
}

struct EstimateRecord {
  EstimateKind kind{};
  /// Estimate of OPT_l (B, B_1 or B_n).
  double value = 0.0;
  /// k-center only: the covering radius max_j d(j, S).
  double radius = 0.0;
  /// value lies in [OPT_l, ratio * OPT_l]; for kmedian only with probability >= 1/2.
  double ratio = 1.0;
  bool in_expectation = false;
  Committee companion;
  QueryCounters queries;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

namespace detail {

struct ForestEdge {
  double cost;
  std::size_t u, v;  // u < v, node ids
  auto key() const { return std::tie(cost, u, v); }
  bool operator<(const ForestEdge& o) const { return key() < o.key(); }
  bool operator==(const ForestEdge& o) const { return key() == o.key(); }
};

inline ForestEdge make_edge(double cost, std::size_t a, std::size_t b) {
  return {cost, std::min(a, b), std::max(a, b)};
}

/// Adds the per-component minimum edges of one round; returns the number of merges.
inline std::size_t merge_round(DisjointSets& dsu, std::vector<ForestEdge>& forest,
                               const std::vector<std::pair<std::size_t, ForestEdge>>& proposals,
                               std::size_t nodes) {
  std::vector<int> has(nodes, 0);
  std::vector<ForestEdge> best(nodes);
  for (const auto& [comp, e] : proposals) {
    if (!has[comp] || e < best[comp]) best[comp] = e, has[comp] = 1;
  }
  std::vector<ForestEdge> chosen;
  for (std::size_t c = 0; c < nodes; ++c)
    if (has[c]) chosen.push_back(best[c]);
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  std::size_t merges = 0;
  for (const auto& e : chosen) {
    if (dsu.unite(e.u, e.v)) {
      forest.push_back(e);
      ++merges;
    }
  }
  return merges;
}

/// Drops the `drop` heaviest edges and returns the total cost of the rest.
inline double prune_forest(std::vector<ForestEdge>& forest, std::size_t drop) {
  std::sort(forest.begin(), forest.end());
  forest.resize(forest.size() - std::min(drop, forest.size()));
  double sum = 0.0;
  for (const auto& e : forest) sum += e.cost;
  return sum;
}

}  // namespace detail

/// Minimum-cost k-forest by Boruvka rounds on the complete graph over C (A = C), with
/// B = n * cost. Each agent spends one query per round on its nearest vertex outside
/// its component. OPT_l <= B <= n^2 OPT_l.
inline EstimateRecord boruvka_estimate(MeteredOracle& oracle, std::size_t k) {
  require(oracle.colocated(), "boruvka_estimate: requires candidates = agents");
  const std::size_t n = oracle.num_agents();
  require(k >= 1 && k <= n, "boruvka_estimate: k must lie in [1, n]");
  DisjointSets dsu(n);
  std::vector<detail::ForestEdge> forest;
  std::size_t components = n;
  std::vector<std::pair<std::size_t, detail::ForestEdge>> proposals;
  while (components > 1) {
    proposals.clear();
    for (AgentId v = 0; v < n; ++v) {
      const std::size_t cv = dsu.find(v);
      for (CandidateId u : oracle.ranking(v)) {
        if (dsu.find(u) == cv) continue;
        proposals.emplace_back(cv, detail::make_edge(oracle.value_query(v, u), v, u));
        break;
      }
    }
    const std::size_t merges = detail::merge_round(dsu, forest, proposals, n);
    if (merges == 0) throw InternalError("boruvka_estimate: round without progress");
    components -= merges;
  }
  const double cost = detail::prune_forest(forest, k - 1);

  DisjointSets parts(n);
  for (const auto& e : forest) parts.unite(e.u, e.v);
  std::vector<CandidateId> reps;
  std::vector<int> taken(n, 0);
  for (AgentId v = 0; v < n; ++v) {
    const std::size_t r = parts.find(v);
    if (!taken[r]) taken[r] = 1, reps.push_back(v);
  }

  EstimateRecord rec;
  rec.kind = EstimateKind::boruvka;
  rec.value = static_cast<double>(n) * cost;
  rec.ratio = static_cast<double>(n) * static_cast<double>(n);
  rec.companion = Committee(std::move(reps));
  rec.queries = oracle.counters();
  return rec;
}

/// Boruvka on the bipartite graph between C and the favourite set {top(j)}. Nodes are
/// agents 0..n-1 followed by candidates n + a. Starts from the star edges (j, top(j)).
/// B = n * (forest cost + sum_j d(j, top(j))).
inline EstimateRecord boruvka_estimate_gen(MeteredOracle& oracle, std::size_t k) {
  const std::size_t n = oracle.num_agents();
  const std::size_t m = oracle.num_candidates();
  require(k >= 1 && k <= m, "boruvka_estimate_gen: k must lie in [1, m]");
  std::vector<int> favourite(m, 0);
  for (AgentId j = 0; j < n; ++j) favourite[oracle.top(j)] = 1;

  const std::size_t nodes = n + m;
  DisjointSets dsu(nodes);
  std::vector<detail::ForestEdge> forest;
  double star = 0.0;
  for (AgentId j = 0; j < n; ++j) {
    const CandidateId a = oracle.top(j);
    const double c = oracle.value_query(j, a);
    star += c;
    const auto e = detail::make_edge(c, j, n + a);
    if (dsu.unite(e.u, e.v)) forest.push_back(e);
  }
  std::size_t components = 0;
  for (std::size_t x = 0; x < nodes; ++x)
    if ((x < n || favourite[x - n]) && dsu.find(x) == x) ++components;

  std::vector<std::pair<std::size_t, detail::ForestEdge>> proposals;
  while (components > 1) {
    proposals.clear();
    for (AgentId j = 0; j < n; ++j) {
      const std::size_t cj = dsu.find(j);
      for (CandidateId a : oracle.ranking(j)) {
        if (!favourite[a] || dsu.find(n + a) == cj) continue;
        proposals.emplace_back(cj, detail::make_edge(oracle.value_query(j, a), j, n + a));
        break;
      }
    }
    const std::size_t merges = detail::merge_round(dsu, forest, proposals, nodes);
    if (merges == 0) throw InternalError("boruvka_estimate_gen: round without progress");
    components -= merges;
  }
  const double cost = detail::prune_forest(forest, k - 1);

  // One favourite candidate per remaining tree.
  DisjointSets parts(nodes);
  for (const auto& e : forest) parts.unite(e.u, e.v);
  std::vector<int> taken(nodes, 0);
  std::vector<CandidateId> reps;
  for (CandidateId a = 0; a < m; ++a) {
    if (!favourite[a]) continue;
    const std::size_t r = parts.find(n + a);
    if (!taken[r]) taken[r] = 1, reps.push_back(a);
  }
  if (reps.size() > k) reps.resize(k);

  EstimateRecord rec;
  rec.kind = EstimateKind::boruvka_gen;
  rec.value = static_cast<double>(n) * (cost + star);
  rec.ratio = 5.0 * static_cast<double>(n) * static_cast<double>(n);
  rec.companion = Committee(std::move(reps));
  rec.queries = oracle.counters();
  return rec;
}

/// Gonzalez farthest-point traversal through bottom-of-cluster queries (A = C). The
/// first center is agent 0. B' = max_j d(j, S) <= 2 OPT_1 and B_1 = l B'.
inline EstimateRecord kcenter_estimate(MeteredOracle& oracle, std::size_t k, std::size_t ell) {
  require(oracle.colocated(), "kcenter_estimate: requires candidates = agents");
  const std::size_t n = oracle.num_agents();
  require(k >= 1 && k <= n, "kcenter_estimate: k must lie in [1, n]");
  require(ell >= 1 && ell <= n, "kcenter_estimate: ell must lie in [1, n]");
  std::vector<CandidateId> S{0};
  std::vector<std::vector<AgentId>> clusters;
  double radius = 0.0;
  while (true) {
    clusters.assign(S.size(), {});
    for (AgentId j = 0; j < n; ++j) {
      const CandidateId c = oracle.top_in(j, S);
      const auto pos = static_cast<std::size_t>(std::find(S.begin(), S.end(), c) - S.begin());
      clusters[pos].push_back(j);
    }
    double best = -1.0;
    CandidateId best_center = 0, far = 0;
    for (std::size_t p = 0; p < S.size(); ++p) {
      const CandidateId i = S[p];
      const CandidateId b = oracle.bottom_in(i, clusters[p]);
      const double v = oracle.value_query(i, b);
      if (v > best || (v == best && i < best_center)) best = v, best_center = i, far = b;
    }
    radius = best;
    if (S.size() == k || best <= 0.0) break;
    S.push_back(far);
  }
  EstimateRecord rec;
  rec.kind = EstimateKind::kcenter;
  rec.radius = radius;
  rec.value = static_cast<double>(ell) * radius;
  rec.ratio = 2.0 * static_cast<double>(ell);
  rec.companion = Committee(std::move(S));
  rec.queries = oracle.counters();
  return rec;
}

/// Farthest-point traversal for general A: the farthest agent s opens top(s). Each
/// round every agent queries its nearest open center. radius <= 3 OPT_1.
inline EstimateRecord kcenter_estimate_gen(MeteredOracle& oracle, std::size_t k, std::size_t ell = 1) {
  const std::size_t n = oracle.num_agents();
  require(k >= 1 && k <= oracle.num_candidates(), "kcenter_estimate_gen: k must lie in [1, m]");
  require(ell >= 1 && ell <= n, "kcenter_estimate_gen: ell must lie in [1, n]");
  std::vector<CandidateId> S{oracle.top(0)};
  double radius = 0.0;
  while (true) {
    double best = -1.0;
    AgentId far = 0;
    for (AgentId j = 0; j < n; ++j) {
      const double v = oracle.nearest_in_set_cost(j, S);
      if (v > best) best = v, far = j;
    }
    radius = best;
    if (S.size() == k || best <= 0.0) break;
    const CandidateId next = oracle.top(far);
    if (std::find(S.begin(), S.end(), next) != S.end()) break;
    S.push_back(next);
  }
  EstimateRecord rec;
  rec.kind = EstimateKind::kcenter_gen;
  rec.radius = radius;
  rec.value = static_cast<double>(ell) * radius;
  rec.ratio = 3.0 * static_cast<double>(ell);
  rec.companion = Committee(std::move(S));
  rec.queries = oracle.counters();
  return rec;
}

/// D-sampling (A = C): first center uniform, then k-1 draws proportional to d(j, S).
/// B_n = sum_j d(j, S_k); E[B_n] <= 4(ln k + 2) OPT_n.
inline EstimateRecord kmedian_estimate(MeteredOracle& oracle, std::size_t k, std::size_t ell, Rng& rng) {
  require(oracle.colocated(), "kmedian_estimate: requires candidates = agents");
  const std::size_t n = oracle.num_agents();
  require(k >= 1 && k <= n, "kmedian_estimate: k must lie in [1, n]");
  require(ell >= 1 && ell <= n, "kmedian_estimate: ell must lie in [1, n]");
  std::vector<CandidateId> S{static_cast<CandidateId>(rng.below(n))};
  std::vector<int> in_s(n, 0);
  in_s[S.front()] = 1;
  std::vector<double> w(n);
  auto refresh = [&] {
    double total = 0.0;
    for (AgentId j = 0; j < n; ++j) {
      w[j] = in_s[j] ? 0.0 : oracle.nearest_in_set_cost(j, S);
      total += w[j];
    }
    return total;
  };
  double total = refresh();
  while (S.size() < k && total > 0.0) {
    const auto s = static_cast<CandidateId>(rng.discrete(w));
    S.push_back(s);
    in_s[s] = 1;
    total = refresh();
  }
  EstimateRecord rec;
  rec.kind = EstimateKind::kmedian;
  rec.value = total;
  rec.ratio = 8.0 * (std::log(static_cast<double>(k)) + 2.0) * static_cast<double>(n) / static_cast<double>(ell);
  rec.in_expectation = true;
  rec.companion = Committee(std::move(S));
  rec.queries = oracle.counters();
  return rec;
}

}  // namespace topl

#endif  // TOPL_ESTIMATORS_HPP
