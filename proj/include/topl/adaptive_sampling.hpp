#pragma once
#ifndef TOPL_ADAPTIVE_SAMPLING_HPP
#define TOPL_ADAPTIVE_SAMPLING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "topl/blackbox.hpp"
#include "topl/cardinal.hpp"
#include "topl/estimators.hpp"
#include "topl/mechanism.hpp"
#include "topl/meyerson.hpp"
#include "topl/oracle.hpp"
#include "topl/rng.hpp"

namespace topl {

inline std::size_t adsample_rounds(std::size_t k, double factor) {
  return static_cast<std::size_t>(std::ceil(factor * (static_cast<double>(k) + std::sqrt(static_cast<double>(k))) - 1e-9));
}

struct AdsampleRun {
  std::vector<CandidateId> centers;  // opening order
  std::size_t rounds = 0;            // rounds actually executed
  bool stopped_early = false;
};

struct AdsampleOptions {
  double shift = 2.0;           // weights (d(s, S) - shift * t)^+
  bool open_top = false;        // open top(s) rather than s
  std::optional<std::size_t> rounds;  // default ceil(28 (k + sqrt k)), 38 with open_top
};

/// Adaptive sampling with shifted weights. The first pick is uniform over C; later
/// picks have probability proportional to (d(s, S) - shift t)^+, one query per agent
/// outside S per round. Stops early once every weight vanishes.
inline AdsampleRun adsample(MeteredOracle& oracle, std::size_t k, double t, Rng& rng, const AdsampleOptions& opt) {
  require(t >= 0.0, "adsample: t must be nonnegative");
  require(opt.open_top || oracle.colocated(), "adsample: opening s itself requires candidates = agents");
  const std::size_t n = oracle.num_agents();
  const std::size_t R = opt.rounds.value_or(adsample_rounds(k, opt.open_top ? 38.0 : 28.0));
  AdsampleRun run;
  std::vector<char> open(oracle.num_candidates(), 0);
  auto open_for = [&](AgentId s) {
    const CandidateId c = opt.open_top ? oracle.top(s) : static_cast<CandidateId>(s);
    if (!open[c]) open[c] = 1, run.centers.push_back(c);
  };
  if (R == 0) return run;
  open_for(static_cast<AgentId>(rng.below(n)));
  run.rounds = 1;
  std::vector<double> w(n);
  for (std::size_t round = 1; round < R; ++round) {
    double total = 0.0;
    for (AgentId j = 0; j < n; ++j) {
      if (oracle.colocated() && open[j]) {
        w[j] = 0.0;
        continue;
      }
      w[j] = std::max(0.0, oracle.nearest_in_set_cost(j, run.centers) - opt.shift * t);
      total += w[j];
    }
    if (!(total > 0.0)) {
      run.stopped_early = true;
      break;
    }
    open_for(static_cast<AgentId>(rng.discrete(w)));
    ++run.rounds;
  }
  return run;
}

inline AdsampleRun adsample_topl(MeteredOracle& oracle, std::size_t k, double t, Rng& rng,
                                 std::optional<std::size_t> rounds = std::nullopt) {
  return adsample(oracle, k, t, rng, AdsampleOptions{2.0, false, rounds});
}

inline AdsampleRun adsample_topl_gen(MeteredOracle& oracle, std::size_t k, double t, Rng& rng,
                                     std::optional<std::size_t> rounds = std::nullopt) {
  return adsample(oracle, k, t, rng, AdsampleOptions{3.0, true, rounds});
}

// ---------------------------------------------------------------------------
// Guess sets

enum class GuessProvenance { T1_from_kcenter, T2_from_kmedian, Tot_from_kcenter, Gen_from_kcenter };

inline const char* to_string(GuessProvenance p) {
  switch (p) {
    case GuessProvenance::T1_from_kcenter: return "T1_from_kcenter";
    case GuessProvenance::T2_from_kmedian: return "T2_from_kmedian";
    case GuessProvenance::Tot_from_kcenter: return "Tot_from_kcenter";
    case GuessProvenance::Gen_from_kcenter: return "Gen_from_kcenter";
  }
  return "?";
}

struct GuessSet {
  std::vector<double> values;  // descending
  GuessProvenance provenance{};
  std::optional<EstimateRecord> kcenter;
  std::optional<EstimateRecord> kmedian;
};

/// {top * (1 + eps)^-r : r = 0..ceil(log_{1+eps}(span))}.
inline std::vector<double> geometric_guesses(double top, double span, double eps) {
  const std::size_t last = log_ceil(span, eps);
  std::vector<double> v(last + 1);
  for (std::size_t r = 0; r <= last; ++r) v[r] = top * std::pow(1.0 + eps, -static_cast<double>(r));
  return v;
}

inline std::size_t t1_size(std::size_t ell, double eps) {
  const double l = static_cast<double>(ell);
  return log_ceil(2.0 * l * l / eps, eps) + 1;
}

inline std::size_t t2_size(std::size_t k, std::size_t n, double eps) {
  return log_ceil((8.0 * std::log(static_cast<double>(k)) + 4.0) * static_cast<double>(n) / eps, eps) + 1;
}

/// Runs the k-center and k-median estimators and returns the shorter of the two grids
/// (T1 on ties).
inline GuessSet build_guess_sets(MeteredOracle& oracle, std::size_t k, std::size_t ell, double eps, Rng& rng) {
  check_common(oracle, k, ell, eps);
  const std::size_t n = oracle.num_agents();
  GuessSet g;
  g.kcenter = kcenter_estimate(oracle, k, ell);
  g.kmedian = kmedian_estimate(oracle, k, ell, rng);
  const double l = static_cast<double>(ell);
  if (t1_size(ell, eps) <= t2_size(k, n, eps)) {
    g.values = geometric_guesses(g.kcenter->value, 2.0 * l * l / eps, eps);
    g.provenance = GuessProvenance::T1_from_kcenter;
  } else {
    g.values = geometric_guesses(
        g.kmedian->value, (8.0 * std::log(static_cast<double>(k)) + 4.0) * static_cast<double>(n) / eps, eps);
    g.provenance = GuessProvenance::T2_from_kmedian;
  }
  return g;
}

// ---------------------------------------------------------------------------
// SampleMech

struct SampleMechOptions {
  double eps = 0.5;
  double delta = 0.25;
  /// Extra committees entered into the candidate pool before sampling.
  std::vector<Committee> seed_pool;
};

namespace detail {

/// Queries C x S-bar and solves the resulting unit-weight problem.
inline Committee solve_on_facilities(MeteredOracle& oracle, const Committee& sbar, std::size_t k, std::size_t ell,
                                     const CardinalSolver& solver) {
  oracle.set_phase("final");
  CardinalProblem prob;
  prob.facilities = sbar.members;
  prob.weights.assign(oracle.num_agents(), 1);
  prob.k = k;
  prob.ell = ell;
  prob.dist.reserve(oracle.num_agents() * sbar.size());
  for (AgentId j = 0; j < oracle.num_agents(); ++j)
    for (CandidateId a : sbar.members) prob.dist.push_back(oracle.value_query(j, a));
  return solver.solve(prob).committee;
}

inline void pick_best(MeteredOracle& oracle, const std::vector<double>& guesses, std::size_t reps, std::size_t k,
                      std::size_t ell, Rng& rng, bool general, MechanismResult& res, Committee& best,
                      double& best_cost) {
  oracle.set_phase("sampling");
  for (double t : guesses) {
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t before = oracle.counters().total;
      const auto run = general ? adsample_topl_gen(oracle, k, t, rng) : adsample_topl(oracle, k, t, rng);
      Committee S(run.centers);
      RunTrace tr;
      tr.parameter = t;
      tr.repetition = r;
      tr.rounds = run.rounds;
      tr.size = S.size();
      tr.score = evaluate_committee(oracle, S.members, ell);
      tr.fresh_queries = oracle.counters().total - before;
      res.runs.push_back(tr);
      if (tr.score < best_cost) best_cost = tr.score, best = std::move(S);
    }
  }
}

}  // namespace detail

/// Adaptive sampling over a grid of threshold guesses, keep the cheapest sampled set,
/// then solve exactly on it with every agent as a client. Requires A = C.
inline MechanismResult samplemech(MeteredOracle& oracle, std::size_t k, std::size_t ell, const SampleMechOptions& opt,
                                  const CardinalSolver& solver, Rng& rng) {
  require(oracle.colocated(), "samplemech: requires candidates = agents");
  check_common(oracle, k, ell, opt.eps);
  MechanismResult res;
  oracle.set_phase("estimate");
  const GuessSet g = build_guess_sets(oracle, k, ell, opt.eps, rng);
  res.estimate = g.kcenter->value;
  Committee best;
  double best_cost = std::numeric_limits<double>::infinity();
  oracle.set_phase("sampling");
  for (const auto& c : opt.seed_pool) {
    const double v = evaluate_committee(oracle, c.members, ell);
    if (v < best_cost) best_cost = v, best = c;
  }
  detail::pick_best(oracle, g.values, repetitions_for(opt.delta), k, ell, rng, false, res, best, best_cost);
  res.bicriteria = best;
  res.committee = detail::solve_on_facilities(oracle, best, k, ell, solver);
  res.queries = oracle.counters();
  return res;
}

/// General-A variant: guesses l B (1 + eps)^-r from the modified k-center radius B,
/// sampling opens favourites.
inline MechanismResult samplemech_gen(MeteredOracle& oracle, std::size_t k, std::size_t ell,
                                      const SampleMechOptions& opt, const CardinalSolver& solver, Rng& rng) {
  check_common(oracle, k, ell, opt.eps);
  MechanismResult res;
  oracle.set_phase("estimate");
  const EstimateRecord kc = kcenter_estimate_gen(oracle, k, ell);
  res.estimate = kc.value;
  const double l = static_cast<double>(ell);
  const auto guesses = geometric_guesses(l * kc.radius, 3.0 * l / opt.eps, opt.eps);
  Committee best;
  double best_cost = std::numeric_limits<double>::infinity();
  oracle.set_phase("sampling");
  for (const auto& c : opt.seed_pool) {
    const double v = evaluate_committee(oracle, c.members, ell);
    if (v < best_cost) best_cost = v, best = c;
  }
  detail::pick_best(oracle, guesses, repetitions_for(opt.delta), k, ell, rng, true, res, best, best_cost);
  res.bicriteria = best;
  res.committee = detail::solve_on_facilities(oracle, best, k, ell, solver);
  res.queries = oracle.counters();
  return res;
}

// ---------------------------------------------------------------------------
// Ring sampling

/// Agents outside S bucketed by level h = min{h : d(j, S) <= zeta_h}, zeta_h = B / 2^(N - h).
/// Levels are maintained from ball queries issued by the centers only.
class RingSampler {
 public:
  RingSampler(MeteredOracle& oracle, const std::vector<CandidateId>& initial, double B, double eps)
      : oracle_(&oracle), B_(B) {
    require(oracle.colocated(), "RingSampler: requires candidates = agents");
    require(B > 0.0, "RingSampler: B must be positive");
    require(eps > 0.0 && eps <= 1.0, "RingSampler: eps must lie in (0, 1]");
    const double n = static_cast<double>(oracle.num_agents());
    N_ = static_cast<std::size_t>(std::ceil(std::log2(2.0 * n * n / eps) - 1e-12));
    zeta_.resize(N_ + 1);
    for (std::size_t h = 0; h <= N_; ++h) zeta_[h] = std::ldexp(B, -static_cast<int>(N_ - h));
    level_.assign(oracle.num_agents(), kOutside);
    in_s_.assign(oracle.num_agents(), 0);
    for (CandidateId c : initial) add_center(c);
  }

  static constexpr std::size_t kOutside = std::numeric_limits<std::size_t>::max();

  void add_center(CandidateId c) {
    if (in_s_[c]) return;
    in_s_[c] = 1;
    centers_.push_back(c);
    for (std::size_t h = 0; h <= N_; ++h)
      for (CandidateId j : oracle_->ball_query(c, zeta_[h])) level_[j] = std::min(level_[j], h);
  }

  std::size_t N() const { return N_; }
  double B() const { return B_; }
  double zeta(std::size_t h) const { return zeta_[h]; }
  const std::vector<CandidateId>& centers() const { return centers_; }
  bool in_set(AgentId j) const { return in_s_[j] != 0; }
  /// Level of j, or kOutside if j is farther than B from every center.
  std::size_t level(AgentId j) const { return level_[j]; }

  /// zeta of j's ring, 0 inside S.
  double perturbed(AgentId j) const {
    if (in_s_[j]) return 0.0;
    if (level_[j] == kOutside) throw InternalError("RingSampler: agent beyond the outermost ring");
    return zeta_[level_[j]];
  }

  std::vector<double> perturbed_all() const {
    std::vector<double> v(level_.size());
    for (AgentId j = 0; j < v.size(); ++j) v[j] = perturbed(j);
    return v;
  }

  std::vector<std::size_t> ring_sizes() const {
    std::vector<std::size_t> sizes(N_ + 1, 0);
    for (AgentId j = 0; j < level_.size(); ++j)
      if (!in_s_[j]) ++sizes[level_[j]];
    return sizes;
  }

  /// Per-agent sampling probabilities (d~(j) - shift t)^+ / total; empty if all vanish.
  std::vector<double> distribution(double t, double shift = 4.0) const {
    std::vector<double> p(level_.size(), 0.0);
    double total = 0.0;
    for (AgentId j = 0; j < p.size(); ++j) {
      if (in_s_[j]) continue;
      p[j] = std::max(0.0, perturbed(j) - shift * t);
      total += p[j];
    }
    if (!(total > 0.0)) return {};
    for (double& x : p) x /= total;
    return p;
  }

  /// Ring h with probability proportional to |R_h| (zeta_h - shift t)^+, then a uniform
  /// member of it. nullopt when every weight vanishes.
  std::optional<AgentId> sample(double t, Rng& rng, double shift = 4.0) const {
    const auto sizes = ring_sizes();
    std::vector<double> w(N_ + 1);
    double total = 0.0;
    for (std::size_t h = 0; h <= N_; ++h) {
      w[h] = static_cast<double>(sizes[h]) * std::max(0.0, zeta_[h] - shift * t);
      total += w[h];
    }
    if (!(total > 0.0)) return std::nullopt;
    const std::size_t h = rng.discrete(w);
    std::size_t pick = rng.below(sizes[h]);
    for (AgentId j = 0; j < level_.size(); ++j) {
      if (in_s_[j] || level_[j] != h) continue;
      if (pick == 0) return j;
      --pick;
    }
    throw InternalError("RingSampler: ring bookkeeping out of sync");
  }

  /// Top-l of the perturbed cost vector: walk rings from the outside in until l agents
  /// are covered; fewer than l agents outside S contribute their full sum.
  double estimate(std::size_t ell) const {
    const auto sizes = ring_sizes();
    double sum = 0.0;
    std::size_t remaining = ell;
    for (std::size_t h = N_ + 1; h-- > 0 && remaining > 0;) {
      const std::size_t take = std::min(remaining, sizes[h]);
      sum += static_cast<double>(take) * zeta_[h];
      remaining -= take;
    }
    return sum;
  }

 private:
  MeteredOracle* oracle_;
  double B_;
  std::size_t N_ = 0;
  std::vector<double> zeta_;
  std::vector<std::size_t> level_;
  std::vector<char> in_s_;
  std::vector<CandidateId> centers_;
};

struct RingRun {
  std::vector<CandidateId> centers;
  double estimate = 0.0;
  std::size_t rounds = 0;
  bool stopped_early = false;
};

/// Ring-based adaptive sampling seeded with the k-center solution `seed` of radius B.
/// Runs 124k rounds unless every weight vanishes.
inline RingRun adsample_ring(MeteredOracle& oracle, std::size_t k, std::size_t ell, double t, double eps,
                             const EstimateRecord& seed, Rng& rng, std::optional<std::size_t> rounds = std::nullopt) {
  RingRun out;
  if (seed.radius <= 0.0) {
    out.centers = seed.companion.members;
    return out;
  }
  RingSampler rs(oracle, seed.companion.members, seed.radius, eps);
  const std::size_t R = rounds.value_or(124 * k);
  for (std::size_t i = 0; i < R; ++i) {
    const auto s = rs.sample(t, rng);
    if (!s) {
      out.stopped_early = true;
      break;
    }
    rs.add_center(*s);
    ++out.rounds;
  }
  out.centers = rs.centers();
  out.estimate = rs.estimate(ell);
  return out;
}

/// Ring sampling over guesses l B' (1 + eps)^-r, best run by its ring estimate,
/// sparsification and pairwise queries within the chosen set, then the cardinal solver
/// on the weighted instance. Requires A = C.
inline MechanismResult samplemech_tot(MeteredOracle& oracle, std::size_t k, std::size_t ell,
                                      const SampleMechOptions& opt, const CardinalSolver& solver, Rng& rng) {
  require(oracle.colocated(), "samplemech_tot: requires candidates = agents");
  check_common(oracle, k, ell, opt.eps);
  MechanismResult res;
  oracle.set_phase("estimate");
  const EstimateRecord kc = kcenter_estimate(oracle, k, ell);
  res.estimate = kc.value;
  if (kc.radius <= 0.0) {
    res.committee = kc.companion;
    res.bicriteria = kc.companion;
    res.note = "zero radius: k-center companion has cost 0";
    res.queries = oracle.counters();
    return res;
  }
  const double l = static_cast<double>(ell);
  const auto guesses = geometric_guesses(l * kc.radius, 2.0 * l * l / opt.eps, opt.eps);
  const std::size_t reps = repetitions_for(opt.delta);

  oracle.set_phase("ring_sampling");
  Committee best;
  double best_est = std::numeric_limits<double>::infinity();
  for (double t : guesses) {
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t before = oracle.counters().total;
      const auto run = adsample_ring(oracle, k, ell, t, opt.eps, kc, rng);
      RunTrace tr;
      tr.parameter = t;
      tr.repetition = r;
      tr.rounds = run.rounds;
      tr.size = run.centers.size();
      tr.score = run.estimate;
      tr.fresh_queries = oracle.counters().total - before;
      res.runs.push_back(tr);
      if (run.estimate < best_est) best_est = run.estimate, best = Committee(run.centers);
    }
  }
  res.bicriteria = best;

  oracle.set_phase("final");
  const auto w = induce_weighted_instance(oracle.profile(), best);
  CardinalProblem prob;
  prob.facilities = w.support;
  prob.k = k;
  prob.ell = ell;
  for (std::size_t p = 0; p < w.support.size(); ++p) {
    if (w.weights[p] == 0) continue;
    prob.weights.push_back(w.weights[p]);
    for (CandidateId f : w.support) prob.dist.push_back(oracle.value_query(w.support[p], f));
  }
  res.committee = solver.solve(prob).committee;
  res.queries = oracle.counters();
  return res;
}

// ---------------------------------------------------------------------------
// In-expectation wrappers

enum class WrappedMechanism { meyerson_bb, samplemech, samplemech_tot };

struct InExpectationOptions {
  double eps = 0.5;
  /// Overrides the Meyerson size filter, e.g. 0 to force the fallback path.
  std::optional<double> size_filter;
};

/// Failure probability for each wrapped mechanism, capped at 1/2.
inline double in_expectation_delta(WrappedMechanism m, std::size_t n, std::size_t k, std::size_t ell) {
  const double l = static_cast<double>(ell);
  const double spread = std::min(l, std::log(static_cast<double>(k)) * static_cast<double>(n) / l);
  double inv = 0.0;
  switch (m) {
    case WrappedMechanism::meyerson_bb: inv = std::max(static_cast<double>(k), spread); break;
    case WrappedMechanism::samplemech: inv = spread; break;
    case WrappedMechanism::samplemech_tot: inv = l; break;
  }
  return std::min(0.5, 1.0 / std::max(inv, 1.0));
}

/// Runs a mechanism with its failure probability tuned so that the fallback keeps the
/// expected distortion bounded. Never reports failure.
inline MechanismResult in_expectation_wrapper(WrappedMechanism m, MeteredOracle& oracle, std::size_t k,
                                              std::size_t ell, const InExpectationOptions& opt,
                                              const CardinalSolver& solver, Rng& rng) {
  const double delta = in_expectation_delta(m, oracle.num_agents(), k, ell);
  switch (m) {
    case WrappedMechanism::meyerson_bb: {
      MeyersonBBOptions mo;
      mo.eps = opt.eps;
      mo.delta = delta;
      mo.size_filter = opt.size_filter;
      MechanismResult res = meyerson_bb(oracle, k, ell, mo, solver, rng);
      if (!res.failure) return res;
      oracle.set_phase("fallback");
      const auto kc = kcenter_estimate(oracle, k, ell);
      const auto km = kmedian_estimate(oracle, k, ell, rng);
      std::vector<CandidateId> merged = kc.companion.members;
      merged.insert(merged.end(), km.companion.members.begin(), km.companion.members.end());
      res.bicriteria = Committee(std::move(merged));
      const double n2 = static_cast<double>(oracle.num_agents()) * static_cast<double>(oracle.num_agents());
      res.committee = sparsify_and_solve(oracle, res.bicriteria, mo.b_multiplier * res.estimate, n2, opt.eps, k,
                                         ell, solver);
      res.failure = false;
      res.note = "fallback: estimator committees";
      res.queries = oracle.counters();
      return res;
    }
    case WrappedMechanism::samplemech: {
      SampleMechOptions so;
      so.eps = opt.eps;
      so.delta = delta;
      oracle.set_phase("estimate");
      so.seed_pool.push_back(kcenter_estimate(oracle, k, ell).companion);
      so.seed_pool.push_back(kmedian_estimate(oracle, k, ell, rng).companion);
      return samplemech(oracle, k, ell, so, solver, rng);
    }
    case WrappedMechanism::samplemech_tot: {
      SampleMechOptions so;
      so.eps = opt.eps;
      so.delta = delta;
      return samplemech_tot(oracle, k, ell, so, solver, rng);
    }
  }
  throw ParameterError("in_expectation_wrapper: unknown mechanism");
}

}  // namespace topl

#endif  // TOPL_ADAPTIVE_SAMPLING_HPP
