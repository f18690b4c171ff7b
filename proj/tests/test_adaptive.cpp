#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "topl/adaptive_sampling.hpp"
#include "topl/brute_force.hpp"
#include "topl/generators.hpp"

using namespace topl;

namespace {

MetricInstance groups_instance(std::size_t groups, std::size_t per_group) {
  std::vector<double> xs;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t r = 0; r < per_group; ++r) xs.push_back(30.0 * static_cast<double>(g));
  return line_instance(xs);
}

std::size_t true_level(const RingSampler& rs, double d) {
  for (std::size_t h = 0; h <= rs.N(); ++h)
    if (d <= rs.zeta(h)) return h;
  return RingSampler::kOutside;
}

double dist_to(const MetricInstance& inst, AgentId j, const std::vector<CandidateId>& S) {
  double best = std::numeric_limits<double>::infinity();
  for (CandidateId c : S) best = std::min(best, inst.distance(j, c));
  return best;
}

}  // namespace

TEST(Adsample, ShiftedWeightsExample) {
  // S = {agent at 0}, t = 1: distances [0, 1, 3, 5] give weights [0, 0, 1, 3]
  const auto inst = line_instance({0.0, 1.0, 3.0, 5.0});
  std::size_t conditioned = 0, last = 0;
  for (std::uint64_t seed = 0; seed < 8000; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto run = adsample_topl(o, 1, 1.0, rng, 2);
    if (run.centers.front() != 0) continue;
    ++conditioned;
    ASSERT_EQ(run.centers.size(), 2u);
    EXPECT_TRUE(run.centers[1] == 2 || run.centers[1] == 3);
    if (run.centers[1] == 3) ++last;
  }
  ASSERT_GT(conditioned, 1500u);
  EXPECT_NEAR(static_cast<double>(last) / static_cast<double>(conditioned), 0.75, 0.05);
}

TEST(Adsample, EarlyStopWhenEveryoneIsClose) {
  const auto inst = line_instance({0.0, 1.0, 2.0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto run = adsample_topl(o, 2, 1.0, rng);
    EXPECT_TRUE(run.stopped_early);
    EXPECT_EQ(run.centers.size(), 1u);
    EXPECT_EQ(run.rounds, 1u);
  }
}

TEST(Adsample, EarlyStopSoundness) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = euclidean_gaussian_clusters(20, 0, 2, 2, 0.02, seed);
    const double t = 0.05 + 0.1 * static_cast<double>(seed % 3);
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto run = adsample_topl(o, 2, t, rng);
    if (!run.stopped_early) continue;
    for (AgentId j = 0; j < 20; ++j) EXPECT_LE(dist_to(inst, j, run.centers), 2.0 * t + 1e-12);
  }
}

TEST(Adsample, RoundCaps) {
  EXPECT_EQ(adsample_rounds(1, 28.0), 56u);
  EXPECT_EQ(adsample_rounds(4, 28.0), 168u);
  EXPECT_EQ(adsample_rounds(4, 38.0), 228u);
  for (std::size_t k = 1; k <= 40; ++k) {
    EXPECT_LE(adsample_rounds(k, 28.0), 56 * k);
    EXPECT_LE(adsample_rounds(k, 38.0), 76 * k);
  }
  const auto inst = euclidean_uniform(300, 0, 2, 1);
  Rng rng(1);
  MeteredOracle o(inst);
  const auto run = adsample_topl(o, 2, 0.0, rng);
  EXPECT_EQ(run.centers.size(), adsample_rounds(2, 28.0));
  EXPECT_LE(run.centers.size(), 112u);
  // one fresh query per agent per round at most
  EXPECT_LE(o.counters().max_per_agent, run.rounds);
}

TEST(AdsampleGen, OpensFavouritesAndStops) {
  const auto one = line_instance({0.0, 3.0, 7.0}, {1.0});
  Rng rng(4);
  MeteredOracle o(one);
  const auto run = adsample_topl_gen(o, 2, 0.0, rng);
  EXPECT_EQ(run.centers, (std::vector<CandidateId>{0}));
  EXPECT_FALSE(run.stopped_early);
  // distances 1, 2, 6 all fall under 3t once t = 2
  MeteredOracle o2(one);
  const auto quiet = adsample_topl_gen(o2, 2, 2.0, rng);
  EXPECT_EQ(quiet.centers, (std::vector<CandidateId>{0}));
  EXPECT_TRUE(quiet.stopped_early);

  const auto inst = euclidean_uniform(30, 12, 2, 3);
  const auto profile = PreferenceProfile::from_metric(inst);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    MeteredOracle og(inst, profile);
    const auto g = adsample_topl_gen(og, 2, 0.01, r);
    EXPECT_LE(g.centers.size(), 76u * 2u);
    for (CandidateId c : g.centers) {
      bool favourite = false;
      for (AgentId j = 0; j < 30; ++j) favourite |= profile.top(j) == c;
      EXPECT_TRUE(favourite);
    }
  }
}

TEST(AdsampleGen, ColocatedUsesThreeShift) {
  // with t = 1, an agent at distance 3 has zero weight under the 3t shift
  const auto inst = line_instance({0.0, 3.0});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto g = adsample_topl_gen(o, 1, 1.0, rng);
    EXPECT_EQ(g.centers.size(), 1u);
    Rng rng2(seed);
    MeteredOracle o2(inst);
    const auto p = adsample_topl(o2, 1, 1.0, rng2);
    EXPECT_EQ(p.centers.size(), 2u);
  }
}

TEST(Guesses, SizesAndChoice) {
  const double eps = 0.5;
  EXPECT_EQ(t1_size(1, eps), log_ceil(2.0 / eps, eps) + 1);
  EXPECT_EQ(t1_size(1, eps), 5u);  // ceil(log_1.5 4) = 4
  EXPECT_EQ(t2_size(3, 20, eps), log_ceil((8.0 * std::log(3.0) + 4.0) * 20.0 / eps, eps) + 1);
  const auto g = geometric_guesses(10.0, 4.0, eps);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 10.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i - 1] / g[i], 1.5, 1e-12);

  const auto inst = euclidean_uniform(20, 0, 2, 5);
  for (std::size_t ell : {std::size_t{1}, std::size_t{20}}) {
    Rng rng(1);
    MeteredOracle o(inst);
    const auto gs = build_guess_sets(o, 3, ell, eps, rng);
    const std::size_t expected = std::min(t1_size(ell, eps), t2_size(3, 20, eps));
    EXPECT_EQ(gs.values.size(), expected);
    const auto want = ell == 1 ? GuessProvenance::T1_from_kcenter : GuessProvenance::T2_from_kmedian;
    EXPECT_EQ(gs.provenance, want);
    EXPECT_TRUE(std::is_sorted(gs.values.rbegin(), gs.values.rend()));
  }
}

TEST(Guesses, SoundWhenEstimatesHold) {
  const double eps = 0.5;
  std::size_t audited = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = 6 + seed % 7;
    const auto inst = euclidean_uniform(n, 0, 2, 3000 + seed);
    const std::size_t k = 1 + seed % 3;
    const std::size_t ell = 1 + (seed * 7) % n;
    const auto bf = brute_force_opt(inst, k, ell);
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto gs = build_guess_sets(o, k, ell, eps, rng);
    const double l = static_cast<double>(ell);
    const double km_cap = (8.0 * std::log(static_cast<double>(k)) + 4.0) * static_cast<double>(n) / l * bf.value;
    if (gs.provenance == GuessProvenance::T2_from_kmedian && gs.kmedian->value > km_cap + 1e-9) continue;
    ++audited;
    const double hi = std::max((1.0 + eps) * bf.t_star, eps * bf.value / l);
    bool hit = false;
    for (double t : gs.values) hit |= t >= bf.t_star - 1e-12 && t <= hi + 1e-12;
    EXPECT_TRUE(hit) << "seed " << seed;
  }
  EXPECT_GT(audited, 40u);
}

TEST(SampleMech, ColocatedGroupsCostZero) {
  const auto inst = groups_instance(3, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = samplemech(o, 3, 6, {}, CardinalSolver{}, rng);
    EXPECT_DOUBLE_EQ(committee_cost(inst, res.committee.members, 6), 0.0);
    Rng rng2(seed);
    MeteredOracle o2(inst);
    const auto tot = samplemech_tot(o2, 3, 6, {}, CardinalSolver{}, rng2);
    EXPECT_DOUBLE_EQ(committee_cost(inst, tot.committee.members, 6), 0.0);
    Rng rng3(seed);
    MeteredOracle o3(inst);
    const auto gen = samplemech_gen(o3, 3, 6, {}, CardinalSolver{}, rng3);
    EXPECT_DOUBLE_EQ(committee_cost(inst, gen.committee.members, 6), 0.0);
  }
}

TEST(SampleMech, GeneralGroupsCostZero) {
  std::vector<double> agents, cands;
  for (int g = 0; g < 3; ++g) {
    for (int r = 0; r < 4; ++r) agents.push_back(50.0 * g);
    cands.push_back(50.0 * g);
    cands.push_back(50.0 * g + 7.0);
  }
  const auto inst = line_instance(agents, cands);
  Rng rng(3);
  MeteredOracle o(inst);
  const auto res = samplemech_gen(o, 3, 12, {}, CardinalSolver{}, rng);
  EXPECT_DOUBLE_EQ(committee_cost(inst, res.committee.members, 12), 0.0);
}

TEST(SampleMech, RunsPerGuessAndBudget) {
  const auto inst = euclidean_uniform(16, 0, 2, 12);
  Rng rng(5);
  MeteredOracle o(inst);
  SampleMechOptions opt;
  opt.delta = 0.2;  // 3 repetitions
  const auto res = samplemech(o, 2, 4, opt, CardinalSolver{}, rng);
  Rng rng2(5);
  MeteredOracle o2(inst);
  const auto gs = build_guess_sets(o2, 2, 4, 0.5, rng2);
  EXPECT_EQ(res.runs.size(), gs.values.size() * 3);
  EXPECT_TRUE(valid_committee(inst, res.committee, 2));
  EXPECT_TRUE(res.committee.members.size() <= 2);
  for (CandidateId c : res.committee.members) EXPECT_TRUE(res.bicriteria.contains(c));
}

TEST(SampleMech, DistortionOnRandomInstances) {
  std::size_t good = 0;
  const std::size_t trials = 30;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    const auto inst = euclidean_uniform(14, 0, 2, 5000 + seed);
    const double opt = brute_force_opt(inst, 3, 4).value;
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = samplemech(o, 3, 4, {}, CardinalSolver{}, rng);
    if (committee_cost(inst, res.committee.members, 4) <= 40.0 * opt) ++good;
  }
  EXPECT_GE(good, trials * 3 / 4);
}

TEST(Ring, ThresholdExample) {
  // B = 8, eps = 0.5, n = 4: N = ceil(log2 64) = 6, zeta = 0.125 ... 8
  const auto inst = line_instance({0.0, 3.0, 5.0, 8.0});
  MeteredOracle o(inst);
  RingSampler rs(o, {0}, 8.0, 0.5);
  EXPECT_EQ(rs.N(), 6u);
  EXPECT_DOUBLE_EQ(rs.zeta(0), 0.125);
  EXPECT_DOUBLE_EQ(rs.zeta(6), 8.0);
  EXPECT_DOUBLE_EQ(rs.zeta(5), 4.0);
  EXPECT_EQ(rs.level(1), 5u);
  EXPECT_DOUBLE_EQ(rs.perturbed(1), 4.0);
  EXPECT_DOUBLE_EQ(rs.perturbed(0), 0.0);
}

TEST(Ring, SingleInnerRing) {
  const auto inst = line_instance({0.0, 0.0, 0.0, 9.0, 9.0});
  MeteredOracle o(inst);
  RingSampler rs(o, {0, 3}, 9.0, 0.5);
  const auto sizes = rs.ring_sizes();
  EXPECT_EQ(sizes[0], 3u);
  EXPECT_DOUBLE_EQ(rs.estimate(2), 2.0 * rs.zeta(0));
  EXPECT_DOUBLE_EQ(rs.estimate(5), 3.0 * rs.zeta(0));
}

TEST(Ring, PartitionExactAndSandwich) {
  const double eps = 0.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 10 + seed % 15;
    const auto inst = euclidean_gaussian_clusters(n, 0, 2, 3, 0.1, 80 + seed);
    MeteredOracle o(inst);
    const auto kc = kcenter_estimate(o, 3, 1);
    RingSampler rs(o, kc.companion.members, kc.radius, eps);
    Rng rng(seed);
    for (int step = 0; step < 8; ++step) {
      const auto& S = rs.centers();
      for (AgentId j = 0; j < n; ++j) {
        if (rs.in_set(j)) continue;
        const double d = dist_to(inst, j, S);
        EXPECT_EQ(rs.level(j), true_level(rs, d));
        const double pd = rs.perturbed(j);
        const double nn = static_cast<double>(n);
        EXPECT_GE(pd, d - 1e-12);
        EXPECT_LE(pd, 2.0 * d + eps * rs.B() / (2.0 * nn * nn) + 1e-12);
      }
      const auto s = rs.sample(0.0, rng);
      if (!s) break;
      const std::size_t before = o.agent_count(*s);
      rs.add_center(*s);
      EXPECT_LE(o.agent_count(*s) - before, (rs.N() + 1) * search_probes(n));
    }
  }
}

TEST(Ring, SamplingDistributionChiSquare) {
  const auto inst = line_instance({0.0, 0.4, 1.1, 1.7, 2.6, 3.3, 4.0, 5.2, 6.1, 7.5});
  MeteredOracle o(inst);
  RingSampler rs(o, {0, 6}, 8.0, 0.5);
  const double t = 0.1;
  const auto p = rs.distribution(t);
  ASSERT_EQ(p.size(), 10u);
  // closed form from the hidden metric
  double total = 0.0;
  std::vector<double> expect(10, 0.0);
  for (AgentId j = 0; j < 10; ++j) {
    if (rs.in_set(j)) continue;
    expect[j] = std::max(0.0, rs.zeta(true_level(rs, dist_to(inst, j, {0, 6}))) - 4.0 * t);
    total += expect[j];
  }
  for (AgentId j = 0; j < 10; ++j) EXPECT_NEAR(p[j], expect[j] / total, 1e-12);

  Rng rng(42);
  const std::size_t draws = 100000;
  std::vector<double> counts(10, 0.0);
  for (std::size_t i = 0; i < draws; ++i) counts[*rs.sample(t, rng)] += 1.0;
  double chi2 = 0.0;
  std::size_t cells = 0;
  for (AgentId j = 0; j < 10; ++j) {
    if (p[j] == 0.0) {
      EXPECT_EQ(counts[j], 0.0);
      continue;
    }
    const double e = p[j] * static_cast<double>(draws);
    chi2 += (counts[j] - e) * (counts[j] - e) / e;
    ++cells;
  }
  const boost::math::chi_squared dist(static_cast<double>(cells - 1));
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
}

TEST(Ring, EstimateSandwichAcrossRuns) {
  const double eps = 0.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 12 + seed % 10;
    const auto inst = euclidean_uniform(n, 0, 2, 90 + seed);
    const std::size_t ell = 1 + seed % n;
    MeteredOracle o(inst);
    const auto kc = kcenter_estimate(o, 2, ell);
    Rng rng(seed);
    const auto run = adsample_ring(o, 2, ell, 0.02, eps, kc, rng);
    EXPECT_LE(run.centers.size(), 125u * 2u);
    const double top = committee_cost(inst, run.centers, ell);
    const double nn = static_cast<double>(n);
    EXPECT_GE(run.estimate, top - 1e-12);
    EXPECT_LE(run.estimate, 2.0 * top + static_cast<double>(ell) * eps * kc.radius / (2.0 * nn * nn) + 1e-12);
  }
}

TEST(Ring, RoundCapAndEarlyStop) {
  const auto inst = euclidean_uniform(40, 0, 2, 7);
  MeteredOracle o(inst);
  const auto kc = kcenter_estimate(o, 1, 1);
  Rng rng(1);
  const auto run = adsample_ring(o, 1, 5, 0.0, 0.5, kc, rng, 10);
  EXPECT_EQ(run.rounds, 10u);
  EXPECT_EQ(run.centers.size(), 11u);
  // a large threshold removes every weight
  Rng rng2(1);
  const auto quiet = adsample_ring(o, 1, 5, 10.0, 0.5, kc, rng2);
  EXPECT_TRUE(quiet.stopped_early);
  EXPECT_EQ(quiet.centers.size(), 1u);
}

TEST(Wrappers, DeltaValues) {
  // n = 24, k = 3, l = 6: min{6, ln 3 * 4} = 4.39
  const double spread = std::min(6.0, std::log(3.0) * 24.0 / 6.0);
  EXPECT_NEAR(in_expectation_delta(WrappedMechanism::samplemech, 24, 3, 6), 1.0 / spread, 1e-12);
  EXPECT_NEAR(in_expectation_delta(WrappedMechanism::meyerson_bb, 24, 3, 6), 1.0 / std::max(3.0, spread), 1e-12);
  EXPECT_NEAR(in_expectation_delta(WrappedMechanism::samplemech_tot, 24, 3, 6), 1.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(in_expectation_delta(WrappedMechanism::samplemech_tot, 24, 3, 1), 0.5);
  EXPECT_DOUBLE_EQ(in_expectation_delta(WrappedMechanism::samplemech, 24, 1, 6), 0.5);
}

TEST(Wrappers, ForcedFailureUsesEstimatorCommittees) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = euclidean_uniform(12, 0, 2, 700 + seed);
    Rng rng(seed);
    MeteredOracle o(inst);
    InExpectationOptions opt;
    opt.size_filter = 0.0;
    const auto res = in_expectation_wrapper(WrappedMechanism::meyerson_bb, o, 2, 6, opt, CardinalSolver{}, rng);
    EXPECT_FALSE(res.failure);
    EXPECT_EQ(res.note, "fallback: estimator committees");
    EXPECT_TRUE(valid_committee(inst, res.committee, 2));
    EXPECT_LE(res.bicriteria.size(), 4u);
    for (CandidateId c : res.committee.members) EXPECT_TRUE(res.bicriteria.contains(c));
  }
}

TEST(Wrappers, AllMechanismsReturnValidCommittees) {
  const auto inst = euclidean_uniform(14, 0, 2, 4);
  for (auto m : {WrappedMechanism::meyerson_bb, WrappedMechanism::samplemech, WrappedMechanism::samplemech_tot}) {
    Rng rng(1);
    MeteredOracle o(inst);
    const auto res = in_expectation_wrapper(m, o, 3, 5, {}, CardinalSolver{}, rng);
    EXPECT_FALSE(res.failure);
    EXPECT_TRUE(valid_committee(inst, res.committee, 3));
  }
}

TEST(Wrappers, SeedPoolNeverWorseThanCompanions) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = euclidean_uniform(14, 0, 2, 40 + seed);
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = in_expectation_wrapper(WrappedMechanism::samplemech, o, 2, 4, {}, CardinalSolver{}, rng);
    MeteredOracle probe(inst);
    const auto kc = kcenter_estimate(probe, 2, 4);
    EXPECT_LE(committee_cost(inst, res.bicriteria.members, 4), committee_cost(inst, kc.companion.members, 4) + 1e-12);
  }
}

TEST(Mechanisms, RejectGeneralCandidatesWhereRequired) {
  const auto inst = euclidean_uniform(8, 5, 2, 1);
  Rng rng(1);
  MeteredOracle o(inst);
  EXPECT_THROW(samplemech(o, 2, 3, {}, CardinalSolver{}, rng), ParameterError);
  EXPECT_THROW(samplemech_tot(o, 2, 3, {}, CardinalSolver{}, rng), ParameterError);
  EXPECT_THROW(adsample_topl(o, 2, 0.0, rng), ParameterError);
}
