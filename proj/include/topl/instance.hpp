#pragma once
#ifndef TOPL_INSTANCE_HPP
#define TOPL_INSTANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topl/errors.hpp"

namespace topl {

using AgentId = std::uint32_t;
using CandidateId = std::uint32_t;
using Point = std::vector<double>;

inline constexpr double kMetricTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Top-l aggregation

/// Sum of the `ell` largest entries of `v`.
inline double topl_cost(std::span<const double> v, std::size_t ell) {
  require(ell >= 1 && ell <= v.size(), "topl_cost: ell must lie in [1, len(v)]");
  std::vector<double> sorted(v.begin(), v.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(ell - 1),
                   sorted.end(), std::greater<>());
  // nth_element leaves the ell largest in the prefix, unordered.
  return std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(ell), 0.0);
}

/// Top-l cost of the vector holding `weights[i]` copies of `values[i]`.
inline double topl_cost_weighted(std::span<const double> values,
                                 std::span<const std::size_t> weights, std::size_t ell) {
  require(values.size() == weights.size(), "topl_cost_weighted: size mismatch");
  const std::size_t total = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  require(ell >= 1 && ell <= total, "topl_cost_weighted: ell must lie in [1, total weight]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  double sum = 0.0;
  std::size_t remaining = ell;
  for (std::size_t i : order) {
    const std::size_t take = std::min(remaining, weights[i]);
    sum += static_cast<double>(take) * values[i];
    remaining -= take;
    if (remaining == 0) break;
  }
  return sum;
}

/// Separable surrogate `ell * rho + sum_i (v_i - rho)^+`. Upper-bounds topl_cost for
/// every rho >= 0 and is within (1 + eps) of it when rho is in [v_l, (1 + eps) v_l].
inline double proxy_cost(std::span<const double> v, std::size_t ell, double rho) {
  require(ell >= 1 && ell <= v.size(), "proxy_cost: ell must lie in [1, len(v)]");
  require(rho >= 0.0, "proxy_cost: rho must be nonnegative");
  double sum = static_cast<double>(ell) * rho;
  for (double x : v) sum += std::max(x - rho, 0.0);
  return sum;
}

/// The ell-th largest entry of v.
inline double kth_largest(std::span<const double> v, std::size_t ell) {
  require(ell >= 1 && ell <= v.size(), "kth_largest: ell out of range");
  std::vector<double> sorted(v.begin(), v.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(ell - 1),
                   sorted.end(), std::greater<>());
  return sorted[ell - 1];
}

// ---------------------------------------------------------------------------
// Metric instance

/// Agents C (n of them), candidates A (m of them) and the exact metric d(i, a).
/// When `colocated()` holds, A = C: candidate j is agent j and d is a full symmetric
/// metric on C. Mechanisms never read distances from here directly; they go through
/// MeteredOracle.
class MetricInstance {
 public:
  MetricInstance() = default;

  /// Row-major n x m distance table. Validation runs the triangle (A = C) or
  /// quadrilateral (A != C) check at kMetricTolerance.
  static MetricInstance from_matrix(std::size_t n, std::size_t m, bool colocated,
                                    std::vector<double> dist, bool validate = true) {
    require(n >= 1 && m >= 1, "MetricInstance: need at least one agent and one candidate");
    require(dist.size() == n * m, "MetricInstance: matrix must have n*m entries");
    require(!colocated || n == m, "MetricInstance: colocated instance needs n == m");
    for (double x : dist) {
      require(std::isfinite(x) && x >= 0.0, "MetricInstance: distances must be finite and >= 0");
    }
    MetricInstance inst;
    inst.n_ = n;
    inst.m_ = m;
    inst.colocated_ = colocated;
    inst.dist_ = std::move(dist);
    if (validate) {
      if (auto problem = inst.metric_violation()) throw ParameterError("MetricInstance: " + *problem);
    }
    return inst;
  }

  /// Euclidean instance. `candidates` empty means A = C.
  static MetricInstance from_points(std::vector<Point> agents, std::vector<Point> candidates = {}) {
    require(!agents.empty(), "MetricInstance: no agents");
    const bool colocated = candidates.empty();
    const std::vector<Point>& cands = colocated ? agents : candidates;
    const std::size_t dim = agents.front().size();
    for (const auto& p : agents) require(p.size() == dim, "MetricInstance: mixed dimensions");
    for (const auto& p : cands) require(p.size() == dim, "MetricInstance: mixed dimensions");
    const std::size_t n = agents.size();
    const std::size_t m = cands.size();
    std::vector<double> dist(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < m; ++a) {
        double s = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
          const double diff = agents[i][t] - cands[a][t];
          s += diff * diff;
        }
        dist[i * m + a] = std::sqrt(s);
      }
    }
    if (colocated) {
      // Exact symmetry and zero diagonal despite rounding.
      for (std::size_t i = 0; i < n; ++i) {
        dist[i * m + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) dist[j * m + i] = dist[i * m + j];
      }
    }
    MetricInstance inst = from_matrix(n, m, colocated, std::move(dist), /*validate=*/false);
    inst.agent_points_ = std::move(agents);
    if (!colocated) inst.candidate_points_ = std::move(candidates);
    return inst;
  }

  std::size_t num_agents() const { return n_; }
  std::size_t num_candidates() const { return m_; }
  bool colocated() const { return colocated_; }

  /// Ground-truth d(i, a).
  double distance(AgentId i, CandidateId a) const { return dist_[std::size_t{i} * m_ + a]; }

  std::span<const double> row(AgentId i) const {
    return {dist_.data() + std::size_t{i} * m_, m_};
  }
  const std::vector<double>& matrix() const { return dist_; }

  bool has_points() const { return !agent_points_.empty(); }
  const std::vector<Point>& agent_points() const { return agent_points_; }
  const std::vector<Point>& candidate_points() const { return candidate_points_; }

  /// First violated metric property, if any. O(n^3) for A = C, O(n^2 m) otherwise.
  std::optional<std::string> metric_violation(double tol = kMetricTolerance) const {
    if (colocated_) {
      for (std::size_t i = 0; i < n_; ++i) {
        if (std::abs(distance(i, i)) > tol) return "d(i,i) != 0 for i=" + std::to_string(i);
        for (std::size_t j = 0; j < n_; ++j) {
          if (std::abs(distance(i, j) - distance(j, i)) > tol) {
            return "asymmetric pair (" + std::to_string(i) + "," + std::to_string(j) + ")";
          }
        }
      }
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          for (std::size_t l = 0; l < n_; ++l)
            if (distance(i, j) > distance(i, l) + distance(l, j) + tol) {
              return "triangle violated at (" + std::to_string(i) + "," + std::to_string(j) +
                     "," + std::to_string(l) + ")";
            }
      return std::nullopt;
    }
    // d(i,a) <= d(i,b) + d(j,b) + d(j,a): via[i][j] = min_b d(i,b) + d(j,b).
    std::vector<double> via(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < m_; ++b) best = std::min(best, distance(i, b) + distance(j, b));
        via[i * n_ + j] = best;
      }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t a = 0; a < m_; ++a)
        for (std::size_t j = 0; j < n_; ++j)
          if (distance(i, a) > via[i * n_ + j] + distance(j, a) + tol) {
            return "quadrilateral violated at agent " + std::to_string(i) + ", candidate " +
                   std::to_string(a) + " via agent " + std::to_string(j);
          }
    return std::nullopt;
  }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  bool colocated_ = false;
  std::vector<double> dist_;
  std::vector<Point> agent_points_;
  std::vector<Point> candidate_points_;
};

// ---------------------------------------------------------------------------
// Preference profile

/// Per-agent total order over A, nondecreasing in distance.
class PreferenceProfile {
 public:
  PreferenceProfile() = default;

  /// The profile induced by the metric, ties broken by ascending candidate id.
  static PreferenceProfile from_metric(const MetricInstance& inst) {
    const std::size_t n = inst.num_agents();
    const std::size_t m = inst.num_candidates();
    std::vector<std::vector<CandidateId>> rankings(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = rankings[i];
      r.resize(m);
      std::iota(r.begin(), r.end(), CandidateId{0});
      const auto row = inst.row(static_cast<AgentId>(i));
      std::stable_sort(r.begin(), r.end(),
                       [&](CandidateId a, CandidateId b) { return row[a] < row[b]; });
    }
    return PreferenceProfile(std::move(rankings), m);
  }

  /// An explicitly supplied profile; throws unless every ranking is a permutation of A
  /// consistent with the metric.
  static PreferenceProfile from_rankings(const MetricInstance& inst,
                                         std::vector<std::vector<CandidateId>> rankings) {
    require(rankings.size() == inst.num_agents(), "PreferenceProfile: one ranking per agent");
    PreferenceProfile p(std::move(rankings), inst.num_candidates());
    require(p.consistent_with(inst), "PreferenceProfile: ranking inconsistent with metric");
    return p;
  }

  std::size_t num_agents() const { return rankings_.size(); }
  std::size_t num_candidates() const { return m_; }

  std::span<const CandidateId> ranking(AgentId i) const { return rankings_[i]; }
  /// Position of `a` in agent i's ranking (0 = favourite).
  std::uint32_t rank(AgentId i, CandidateId a) const { return position_[std::size_t{i} * m_ + a]; }

  CandidateId top(AgentId i) const { return rankings_[i].front(); }

  /// i's favourite among `set` (nonempty).
  CandidateId top_in(AgentId i, std::span<const CandidateId> set) const {
    require(!set.empty(), "top_in: empty set");
    CandidateId best = set.front();
    for (CandidateId a : set)
      if (rank(i, a) < rank(i, best)) best = a;
    return best;
  }

  /// i's least-preferred member of `set` (nonempty).
  CandidateId bottom_in(AgentId i, std::span<const CandidateId> set) const {
    require(!set.empty(), "bottom_in: empty set");
    CandidateId worst = set.front();
    for (CandidateId a : set)
      if (rank(i, a) > rank(i, worst)) worst = a;
    return worst;
  }

  /// Scanning each ranking, distances never decrease.
  bool consistent_with(const MetricInstance& inst, double tol = kMetricTolerance) const {
    if (inst.num_agents() != rankings_.size() || inst.num_candidates() != m_) return false;
    for (std::size_t i = 0; i < rankings_.size(); ++i) {
      const auto& r = rankings_[i];
      for (std::size_t p = 1; p < r.size(); ++p) {
        if (inst.distance(i, r[p - 1]) > inst.distance(i, r[p]) + tol) return false;
      }
    }
    return true;
  }

  bool operator==(const PreferenceProfile& other) const { return rankings_ == other.rankings_; }

 private:
  PreferenceProfile(std::vector<std::vector<CandidateId>> rankings, std::size_t m)
      : rankings_(std::move(rankings)), m_(m), position_(rankings_.size() * m) {
    for (std::size_t i = 0; i < rankings_.size(); ++i) {
      require(rankings_[i].size() == m, "PreferenceProfile: ranking must list every candidate");
      std::vector<bool> seen(m, false);
      for (std::size_t p = 0; p < m; ++p) {
        const CandidateId a = rankings_[i][p];
        require(a < m && !seen[a], "PreferenceProfile: ranking is not a permutation");
        seen[a] = true;
        position_[i * m + a] = static_cast<std::uint32_t>(p);
      }
    }
  }

  std::vector<std::vector<CandidateId>> rankings_;
  std::size_t m_ = 0;
  std::vector<std::uint32_t> position_;
};

// ---------------------------------------------------------------------------
// Committees and cost vectors

/// A set of candidates, stored sorted and duplicate-free.
struct Committee {
  std::vector<CandidateId> members;

  Committee() = default;
  explicit Committee(std::vector<CandidateId> m) : members(std::move(m)) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
  }

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  bool contains(CandidateId a) const {
    return std::binary_search(members.begin(), members.end(), a);
  }
  bool operator==(const Committee&) const = default;
};

/// True when the committee is a nonempty subset of A with at most k members.
inline bool valid_committee(const MetricInstance& inst, const Committee& c, std::size_t k) {
  if (c.empty() || c.size() > k) return false;
  return std::all_of(c.members.begin(), c.members.end(),
                     [&](CandidateId a) { return a < inst.num_candidates(); });
}

/// costs[i] = d(i, S). Ground truth; used by harnesses and tests, never by mechanisms.
inline std::vector<double> cost_vector(const MetricInstance& inst, std::span<const CandidateId> set) {
  require(!set.empty(), "cost_vector: empty center set");
  std::vector<double> costs(inst.num_agents());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (CandidateId a : set) best = std::min(best, inst.distance(static_cast<AgentId>(i), a));
    costs[i] = best;
  }
  return costs;
}

inline double committee_cost(const MetricInstance& inst, std::span<const CandidateId> set,
                             std::size_t ell) {
  return topl_cost(cost_vector(inst, set), ell);
}

// ---------------------------------------------------------------------------
// Weighted (sparsified) instances

/// Agents collapsed onto O(k) support points. `support` lists candidates; weights[p]
/// counts the agents whose favourite support point is support[p]. `representatives[p]`
/// is the agent that speaks for support[p] in value queries (the point itself when
/// A = C). `assignment[j]` is the support index of original agent j.
struct WeightedInstance {
  std::vector<CandidateId> support;
  std::vector<std::size_t> weights;
  std::vector<AgentId> representatives;
  std::vector<std::size_t> assignment;

  std::size_t total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  }

  /// w'_p = min(w_p, ell).
  std::vector<std::size_t> capped_weights(std::size_t ell) const {
    std::vector<std::size_t> out(weights.size());
    std::transform(weights.begin(), weights.end(), out.begin(),
                   [ell](std::size_t w) { return std::min(w, ell); });
    return out;
  }
};

/// Ordinal sparsification: each agent moves to its favourite member of S. No value
/// queries. Representatives default to the support points themselves and must be
/// replaced by agents when A != C (see attach_representatives in blackbox.hpp).
inline WeightedInstance induce_weighted_instance(const PreferenceProfile& profile,
                                                 const Committee& S) {
  require(!S.empty(), "induce_weighted_instance: empty committee");
  WeightedInstance w;
  w.support = S.members;
  w.weights.assign(S.size(), 0);
  w.representatives.assign(S.members.begin(), S.members.end());
  w.assignment.resize(profile.num_agents());
  for (std::size_t j = 0; j < profile.num_agents(); ++j) {
    const CandidateId top = profile.top_in(static_cast<AgentId>(j), S.members);
    const auto it = std::lower_bound(S.members.begin(), S.members.end(), top);
    const std::size_t p = static_cast<std::size_t>(it - S.members.begin());
    w.weights[p] += 1;
    w.assignment[j] = p;
  }
  return w;
}

}  // namespace topl

#endif  // TOPL_INSTANCE_HPP
