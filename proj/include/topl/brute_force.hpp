#pragma once
#ifndef TOPL_BRUTE_FORCE_HPP
#define TOPL_BRUTE_FORCE_HPP

#include "topl/cardinal.hpp"
#include "topl/instance.hpp"

namespace topl {

struct BruteForceResult {
  Committee committee;
  double value = 0.0;
  /// l-th largest assignment cost of the returned optimum.
  double t_star = 0.0;
  std::size_t enumerated = 0;
};

/// Exact OPT_l over all k-subsets of A by enumeration. Throws CapExceeded when
/// C(m, min(k, m)) exceeds `cap`.
inline BruteForceResult brute_force_opt(const MetricInstance& inst, std::size_t k, std::size_t ell,
                                        std::uint64_t cap = kDefaultEnumerationCap) {
  require(k >= 1, "brute_force_opt: k must be positive");
  require(ell >= 1 && ell <= inst.num_agents(), "brute_force_opt: ell must lie in [1, n]");
  const auto sol = solve_exact(problem_from_instance(inst, k, ell), cap);
  return {sol.committee, sol.value, sol.t_ell, sol.evaluated};
}

}  // namespace topl

#endif  // TOPL_BRUTE_FORCE_HPP
