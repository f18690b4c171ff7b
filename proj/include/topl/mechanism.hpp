#pragma once
#ifndef TOPL_MECHANISM_HPP
#define TOPL_MECHANISM_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "topl/instance.hpp"
#include "topl/oracle.hpp"

namespace topl {

/// One inner randomized run (a Meyerson pass or an adaptive-sampling pass).
struct RunTrace {
  double parameter = 0.0;  // B_i or t_l
  std::size_t repetition = 0;
  std::size_t rounds = 0;
  std::size_t size = 0;
  double score = 0.0;      // evaluated Top-l cost, or ring estimate
  bool kept = true;
  std::size_t fresh_queries = 0;
};

struct MechanismResult {
  Committee committee;
  /// Pre-sparsification bicriteria solution, when the mechanism builds one.
  Committee bicriteria;
  double estimate = 0.0;  // coarse OPT estimate driving the mechanism
  bool failure = false;
  std::string note;
  std::vector<RunTrace> runs;
  QueryCounters queries;
};

/// Top-l cost of S with one query per agent (cached pairs are free).
inline double evaluate_committee(MeteredOracle& oracle, std::span<const CandidateId> S, std::size_t ell) {
  std::vector<double> costs(oracle.num_agents());
  for (AgentId j = 0; j < costs.size(); ++j) costs[j] = oracle.nearest_in_set_cost(j, S);
  return topl_cost(costs, ell);
}

/// ceil(log2(1/delta)), at least 1.
inline std::size_t repetitions_for(double delta) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  const double r = std::ceil(std::log2(1.0 / delta) - 1e-12);
  return std::max<std::size_t>(1, static_cast<std::size_t>(r));
}

/// ceil(log_{1+eps}(x)) for x >= 1, else 0.
inline std::size_t log_ceil(double x, double eps) {
  if (x <= 1.0) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(x) / std::log1p(eps) - 1e-12));
}

inline void check_common(const MeteredOracle& oracle, std::size_t k, std::size_t ell, double eps) {
  require(k >= 1 && k <= oracle.num_candidates(), "k must lie in [1, m]");
  require(ell >= 1 && ell <= oracle.num_agents(), "ell must lie in [1, n]");
  require(eps > 0.0 && eps <= 1.0, "eps must lie in (0, 1]");
}

}  // namespace topl

#endif  // TOPL_MECHANISM_HPP
