#pragma once
#ifndef TOPL_MEYERSON_HPP
#define TOPL_MEYERSON_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "topl/blackbox.hpp"
#include "topl/cardinal.hpp"
#include "topl/estimators.hpp"
#include "topl/mechanism.hpp"
#include "topl/oracle.hpp"
#include "topl/rng.hpp"

namespace topl {

struct MeyersonRun {
  std::vector<CandidateId> centers;  // in opening order
  std::vector<double> deltas;        // per arrival, deltas[0] = 0 for x_1
  std::vector<AgentId> order;
};

/// Online facility location for Top-l over a given arrival order. Facility cost B/k;
/// an arrival x opens x (nu = 0) or top(x) (nu = 1) with probability
/// min(1, (d(x, S) - (3 + nu) B / l)^+ / f). One query per arrival after the first.
inline MeyersonRun meyerson_topl_ordered(MeteredOracle& oracle, std::vector<AgentId> order, std::size_t k,
                                         std::size_t ell, double B, int nu, Rng& rng) {
  require(nu == 0 || nu == 1, "meyerson_topl: nu must be 0 or 1");
  require(nu == 1 || oracle.colocated(), "meyerson_topl: nu = 0 requires candidates = agents");
  require(B > 0.0, "meyerson_topl: B must be positive");
  require(!order.empty(), "meyerson_topl: no agents");
  const double f = B / static_cast<double>(k);
  const double shift = (3.0 + nu) * B / static_cast<double>(ell);
  MeyersonRun run;
  auto open_for = [&](AgentId x) { return nu == 0 ? static_cast<CandidateId>(x) : oracle.top(x); };
  std::vector<char> open(oracle.num_candidates(), 0);
  run.centers.push_back(open_for(order.front()));
  open[run.centers.back()] = 1;
  run.deltas.push_back(0.0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const AgentId x = order[i];
    const double delta = std::max(0.0, oracle.nearest_in_set_cost(x, run.centers) - shift);
    run.deltas.push_back(delta);
    if (delta <= 0.0) continue;
    if (rng.uniform() < std::min(1.0, delta / f)) {
      const CandidateId c = open_for(x);
      if (!open[c]) open[c] = 1, run.centers.push_back(c);
    }
  }
  run.order = std::move(order);
  return run;
}

inline MeyersonRun meyerson_topl(MeteredOracle& oracle, std::size_t k, std::size_t ell, double B, int nu,
                                 Rng& rng) {
  std::vector<AgentId> order(oracle.num_agents());
  std::iota(order.begin(), order.end(), AgentId{0});
  rng.shuffle(order);
  return meyerson_topl_ordered(oracle, std::move(order), k, ell, B, nu, rng);
}

struct MeyersonBBOptions {
  double eps = 0.5;
  double delta = 0.25;
  /// Runs with |S| > size_filter * k are discarded; defaults to 104 (120 for general A).
  std::optional<double> size_filter;
  double b_multiplier = 354.0;
};

/// Sparsify onto S-bar and finish with the black-box reduction.
inline Committee sparsify_and_solve(MeteredOracle& oracle, const Committee& sbar, double B, double alpha,
                                    double eps, std::size_t k, std::size_t ell, const CardinalSolver& solver) {
  oracle.set_phase("blackbox");
  auto w = induce_weighted_instance(oracle.profile(), sbar);
  attach_representatives(oracle, w);
  return bb_topl(oracle, w, B, alpha, eps, k, ell, solver).committee;
}

namespace detail {

struct MeyersonSchedule {
  std::size_t first, last;  // inclusive exponent range
  double offset;            // B_i = 2^(i - offset) B' / n^2
  int nu;
  double alpha_factor;      // alpha = alpha_factor * n^2
};

inline MechanismResult meyerson_bb_impl(MeteredOracle& oracle, std::size_t k, std::size_t ell,
                                        const MeyersonBBOptions& opt, const CardinalSolver& solver, Rng& rng,
                                        bool general) {
  check_common(oracle, k, ell, opt.eps);
  const std::size_t n = oracle.num_agents();
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  MechanismResult res;

  oracle.set_phase("estimate");
  const EstimateRecord est = general ? boruvka_estimate_gen(oracle, k) : boruvka_estimate(oracle, k);
  res.estimate = est.value;
  if (est.value <= 0.0) {
    res.committee = est.companion;
    res.bicriteria = est.companion;
    res.note = "zero estimate: forest companion has cost 0";
    res.queries = oracle.counters();
    return res;
  }

  const MeyersonSchedule sched =
      general ? MeyersonSchedule{1, static_cast<std::size_t>(std::ceil(std::log2(5.0 * n2) - 1e-12)) + 1, 1.0, 1, 5.0}
              : MeyersonSchedule{0, static_cast<std::size_t>(std::ceil(std::log2(n2) - 1e-12)), 0.0, 0, 1.0};
  const std::size_t reps = repetitions_for(opt.delta);
  const double filter = opt.size_filter.value_or(general ? 120.0 : 104.0);

  oracle.set_phase("meyerson");
  std::vector<CandidateId> s0(k);
  std::iota(s0.begin(), s0.end(), CandidateId{0});
  Committee best(s0);
  double best_cost = evaluate_committee(oracle, best.members, ell);
  bool any_kept = false;

  std::vector<AgentId> order(n);
  std::iota(order.begin(), order.end(), AgentId{0});
  rng.shuffle(order);
  for (std::size_t i = sched.first; i <= sched.last; ++i) {
    const double Bi = std::ldexp(est.value / n2, static_cast<int>(i) - static_cast<int>(sched.offset));
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t before = oracle.counters().total;
      const auto run = meyerson_topl_ordered(oracle, order, k, ell, Bi, sched.nu, rng);
      RunTrace t;
      t.parameter = Bi;
      t.repetition = r;
      t.rounds = n;
      t.size = run.centers.size();
      t.kept = static_cast<double>(run.centers.size()) <= filter * static_cast<double>(k);
      if (t.kept) {
        any_kept = true;
        Committee S(run.centers);
        t.score = evaluate_committee(oracle, S.members, ell);
        if (t.score < best_cost) best_cost = t.score, best = std::move(S);
      }
      t.fresh_queries = oracle.counters().total - before;
      res.runs.push_back(t);
    }
  }
  res.bicriteria = best;
  if (!any_kept) {
    res.failure = true;
    res.committee = Committee(s0);
    res.note = "every Meyerson run exceeded the size filter";
    res.queries = oracle.counters();
    return res;
  }
  res.committee = sparsify_and_solve(oracle, best, opt.b_multiplier * est.value, sched.alpha_factor * n2,
                                     opt.eps, k, ell, solver);
  res.queries = oracle.counters();
  return res;
}

}  // namespace detail

/// Boruvka estimate, a geometric sweep of Meyerson runs, sparsification of the best
/// small run, then the black-box reduction. Requires A = C.
inline MechanismResult meyerson_bb(MeteredOracle& oracle, std::size_t k, std::size_t ell,
                                   const MeyersonBBOptions& opt, const CardinalSolver& solver, Rng& rng) {
  require(oracle.colocated(), "meyerson_bb: requires candidates = agents");
  return detail::meyerson_bb_impl(oracle, k, ell, opt, solver, rng, false);
}

/// Variant for general A: bipartite Boruvka estimate, nu = 1 runs, filter 120k.
inline MechanismResult meyerson_bb_gen(MeteredOracle& oracle, std::size_t k, std::size_t ell,
                                       const MeyersonBBOptions& opt, const CardinalSolver& solver, Rng& rng) {
  return detail::meyerson_bb_impl(oracle, k, ell, opt, solver, rng, true);
}

}  // namespace topl

#endif  // TOPL_MEYERSON_HPP
