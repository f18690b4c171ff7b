#pragma once
#ifndef TOPL_BLACKBOX_HPP
#define TOPL_BLACKBOX_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "topl/cardinal.hpp"
#include "topl/instance.hpp"
#include "topl/oracle.hpp"

namespace topl {

/// Replaces each support point's representative by an agent assigned to it, the one
/// nearest to it (lowest id on ties). Needed when A != C, since candidates cannot be
/// queried. Costs at most one query per agent, none for pairs already cached.
inline void attach_representatives(MeteredOracle& oracle, WeightedInstance& w) {
  if (oracle.colocated()) {
    w.representatives.assign(w.support.begin(), w.support.end());
    return;
  }
  const std::size_t s = w.support.size();
  std::vector<double> best(s, std::numeric_limits<double>::infinity());
  w.representatives.assign(s, 0);
  for (AgentId j = 0; j < w.assignment.size(); ++j) {
    const std::size_t p = w.assignment[j];
    const double v = oracle.value_query(j, w.support[p]);
    if (v < best[p]) best[p] = v, w.representatives[p] = j;
  }
}

struct SensingParams {
  double B = 1.0;      // estimate of OPT, within factor alpha above it
  double alpha = 1.0;
  double rho = 1.0;    // factor of the plugged cardinal algorithm
  double eps = 0.5;
  std::size_t ell = 1;

  void validate() const {
    require(B > 0.0 && std::isfinite(B), "sense_intervals: B must be positive and finite");
    require(alpha >= 1.0, "sense_intervals: alpha must be >= 1");
    require(rho >= 1.0, "sense_intervals: rho must be >= 1");
    require(eps > 0.0 && eps <= 1.0, "sense_intervals: eps must lie in (0, 1]");
    require(ell >= 1, "sense_intervals: ell must be positive");
  }
};

/// Distance levels sensed by one weighted support point.
struct AgentSensing {
  std::size_t support_index = 0;
  AgentId agent = 0;
  std::size_t capped_weight = 0;
  double base = 0.0;   // B_{i,0}
  std::size_t q = 0;
  double tail = 0.0;   // eps B / (alpha n w')
  /// sets[r] = support indices within base (1+eps)^-r; nested.
  std::vector<std::vector<std::size_t>> sets;
  /// level[f] = deepest r with f in sets[r], or -1.
  std::vector<int> level;

  double threshold(std::size_t r, double eps) const { return base * std::pow(1.0 + eps, -static_cast<double>(r)); }

  /// [lower, upper] implied for the distance to support point f.
  std::pair<double, double> interval(std::size_t f, double eps) const {
    const int r = level[f];
    if (r < 0) return {base, std::numeric_limits<double>::infinity()};
    if (static_cast<std::size_t>(r) == q) return {0.0, tail};
    return {threshold(static_cast<std::size_t>(r) + 1, eps), threshold(static_cast<std::size_t>(r), eps)};
  }
};

struct IntervalSensing {
  SensingParams params;
  std::size_t n = 0;  // total weight
  std::vector<CandidateId> support;
  std::vector<AgentSensing> agents;  // one per positive-weight support point
};

inline std::size_t sensing_levels(double alpha, std::size_t capped_weight, double base, std::size_t n,
                                  double eps, double B) {
  const double arg = alpha * static_cast<double>(capped_weight) * base * static_cast<double>(n) / (eps * B);
  if (arg <= 1.0) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(arg) / std::log1p(eps) - 1e-12));
}

/// Nested balls around each positive-weight support point, one restricted ball query each.
inline IntervalSensing sense_intervals(MeteredOracle& oracle, const WeightedInstance& w,
                                       const SensingParams& params) {
  params.validate();
  require(w.representatives.size() == w.support.size(), "sense_intervals: missing representatives");
  IntervalSensing out;
  out.params = params;
  out.n = w.total_weight();
  out.support = w.support;
  const std::size_t s = w.support.size();
  for (std::size_t p = 0; p < s; ++p) {
    if (w.weights[p] == 0) continue;
    AgentSensing a;
    a.support_index = p;
    a.agent = w.representatives[p];
    a.capped_weight = std::min(w.weights[p], params.ell);
    const double wc = static_cast<double>(a.capped_weight);
    a.base = params.rho * (1.0 + 3.0 * params.eps) * params.B / wc;
    a.q = sensing_levels(params.alpha, a.capped_weight, a.base, out.n, params.eps, params.B);
    a.tail = params.eps * params.B / (params.alpha * static_cast<double>(out.n) * wc);
    a.level.assign(s, -1);
    for (std::size_t r = 0; r <= a.q; ++r) {
      const auto ball = oracle.ball_query(a.agent, a.threshold(r, params.eps), w.support);
      std::vector<std::size_t> idx;
      idx.reserve(ball.size());
      for (CandidateId c : ball) {
        const auto f = static_cast<std::size_t>(std::lower_bound(w.support.begin(), w.support.end(), c) -
                                                w.support.begin());
        idx.push_back(f);
        a.level[f] = static_cast<int>(r);
      }
      std::sort(idx.begin(), idx.end());
      a.sets.push_back(std::move(idx));
    }
    out.agents.push_back(std::move(a));
  }
  return out;
}

/// A metric on the nodes of the sparsified instance. Facility nodes 0..s-1 are the
/// support candidates; client nodes are the sensed points, which coincide with their
/// facility node when A = C and are extra nodes s.. otherwise.
struct ReconstructedMetric {
  std::size_t nodes = 0;
  std::vector<std::size_t> client_node;  // per sensed agent
  std::vector<double> lower, upper, value;  // nodes x nodes

  double at(std::size_t x, std::size_t y) const { return value[x * nodes + y]; }
  double d(std::size_t client, std::size_t facility) const { return at(client_node[client], facility); }

  /// Largest violation of interval bounds, symmetry or the triangle inequality.
  double max_violation() const {
    double worst = 0.0;
    for (std::size_t x = 0; x < nodes; ++x) {
      worst = std::max(worst, std::abs(at(x, x)));
      for (std::size_t y = 0; y < nodes; ++y) {
        const std::size_t e = x * nodes + y;
        worst = std::max(worst, lower[e] - value[e]);
        if (std::isfinite(upper[e])) worst = std::max(worst, value[e] - upper[e]);
        worst = std::max(worst, std::abs(value[e] - at(y, x)));
        for (std::size_t z = 0; z < nodes; ++z) worst = std::max(worst, at(x, y) - at(x, z) - at(z, y));
      }
    }
    return worst;
  }

  void write_csv(std::ostream& os) const {
    os << "x,y,lower,upper,value,slack_lower,slack_upper\n";
    for (std::size_t x = 0; x < nodes; ++x)
      for (std::size_t y = x + 1; y < nodes; ++y) {
        const std::size_t e = x * nodes + y;
        os << x << ',' << y << ',' << lower[e] << ',' << upper[e] << ',' << value[e] << ','
           << value[e] - lower[e] << ',' << upper[e] - value[e] << '\n';
      }
  }
};

/// Shortest-path closure of the sensed upper bounds. The closure is the largest metric
/// below the upper bounds, so it meets every lower bound whenever any consistent metric
/// exists; missing upper bounds are capped at the largest finite bound, which keeps the
/// truncated true metric feasible. Throws InternalError if the bounds are contradictory.
inline ReconstructedMetric reconstruct_metric(const IntervalSensing& sensing, bool colocated) {
  const std::size_t s = sensing.support.size();
  const double eps = sensing.params.eps;
  ReconstructedMetric out;
  out.nodes = colocated ? s : s + sensing.agents.size();
  for (std::size_t c = 0; c < sensing.agents.size(); ++c)
    out.client_node.push_back(colocated ? sensing.agents[c].support_index : s + c);
  const std::size_t N = out.nodes;
  const double inf = std::numeric_limits<double>::infinity();
  out.lower.assign(N * N, 0.0);
  out.upper.assign(N * N, inf);

  double cap = 0.0;
  for (std::size_t c = 0; c < sensing.agents.size(); ++c) {
    const auto& a = sensing.agents[c];
    const std::size_t x = out.client_node[c];
    for (std::size_t f = 0; f < s; ++f) {
      if (x == f) continue;
      const auto [lo, hi] = a.interval(f, eps);
      for (std::size_t e : {x * N + f, f * N + x}) {
        out.lower[e] = std::max(out.lower[e], lo);
        out.upper[e] = std::min(out.upper[e], hi);
      }
      cap = std::max(cap, lo);
      if (std::isfinite(hi)) cap = std::max(cap, hi);
    }
  }
  for (std::size_t x = 0; x < N; ++x) out.upper[x * N + x] = 0.0;

  out.value.resize(N * N);
  for (std::size_t e = 0; e < N * N; ++e) out.value[e] = std::min(out.upper[e], cap);
  for (std::size_t z = 0; z < N; ++z)
    for (std::size_t x = 0; x < N; ++x) {
      const double xz = out.value[x * N + z];
      for (std::size_t y = 0; y < N; ++y) {
        const double via = xz + out.value[z * N + y];
        if (via < out.value[x * N + y]) out.value[x * N + y] = via;
      }
    }

  const double tol = kMetricTolerance * std::max(1.0, cap);
  for (std::size_t e = 0; e < N * N; ++e) {
    if (out.value[e] < out.lower[e] - tol) {
      throw InternalError("reconstruct_metric: sensed intervals admit no metric (pair " +
                          std::to_string(e / N) + "," + std::to_string(e % N) + ")");
    }
    out.value[e] = std::max(out.value[e], out.lower[e]);
  }
  return out;
}

struct BlackBoxResult {
  Committee committee;
  double surrogate_value = 0.0;  // solver objective under the reconstructed metric
  IntervalSensing sensing;
  ReconstructedMetric metric;
};

/// Sense, reconstruct and solve the weighted l-centrum problem on the support.
inline BlackBoxResult bb_topl(MeteredOracle& oracle, const WeightedInstance& w, double B, double alpha,
                              double eps, std::size_t k, std::size_t ell, const CardinalSolver& solver) {
  SensingParams params{B, alpha, solver.declared_factor(), eps, ell};
  BlackBoxResult res;
  res.sensing = sense_intervals(oracle, w, params);
  res.metric = reconstruct_metric(res.sensing, oracle.colocated());

  CardinalProblem prob;
  prob.facilities = w.support;
  prob.k = k;
  prob.ell = ell;
  const std::size_t s = w.support.size();
  for (std::size_t c = 0; c < res.sensing.agents.size(); ++c) {
    prob.weights.push_back(w.weights[res.sensing.agents[c].support_index]);
    for (std::size_t f = 0; f < s; ++f) prob.dist.push_back(res.metric.d(c, f));
  }
  const auto sol = solver.solve(prob);
  res.committee = sol.committee;
  res.surrogate_value = sol.value;
  return res;
}

}  // namespace topl

#endif  // TOPL_BLACKBOX_HPP
