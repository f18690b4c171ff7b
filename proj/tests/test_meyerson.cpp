#include <gtest/gtest.h>

#include <cmath>

#include "topl/brute_force.hpp"
#include "topl/generators.hpp"
#include "topl/meyerson.hpp"

using namespace topl;

namespace {

MetricInstance groups_instance(std::size_t groups, std::size_t per_group) {
  std::vector<double> xs;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t r = 0; r < per_group; ++r) xs.push_back(40.0 * static_cast<double>(g));
  return line_instance(xs);
}

struct Means {
  double size = 0.0;
  double cost = 0.0;
};

Means meyerson_means(const MetricInstance& inst, std::size_t k, std::size_t ell, double B, int nu,
                     std::size_t seeds) {
  Means m;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    Rng rng(derive_seed(0xfeed, s));
    MeteredOracle o(inst);
    const auto run = meyerson_topl(o, k, ell, B, nu, rng);
    m.size += static_cast<double>(run.centers.size());
    m.cost += committee_cost(inst, run.centers, ell);
  }
  m.size /= static_cast<double>(seeds);
  m.cost /= static_cast<double>(seeds);
  return m;
}

}  // namespace

TEST(Meyerson, ColocatedOpensFirstArrival) {
  const auto inst = groups_instance(1, 7);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto run = meyerson_topl(o, 2, 7, 1.0, 0, rng);
    ASSERT_EQ(run.centers.size(), 1u);
    EXPECT_EQ(run.centers.front(), run.order.front());
    for (double d : run.deltas) EXPECT_DOUBLE_EQ(d, 0.0);
  }
}

TEST(Meyerson, HugeBudgetOpensOnlyFirst) {
  const auto inst = euclidean_uniform(15, 0, 2, 4);
  const double B = 15.0 * 2.0;  // >= l * max distance / 3 since distances are below sqrt(2)
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto run = meyerson_topl(o, 3, 15, B, 0, rng);
    EXPECT_EQ(run.centers.size(), 1u);
    for (std::size_t i = 1; i < run.deltas.size(); ++i) EXPECT_DOUBLE_EQ(run.deltas[i], 0.0);
  }
}

TEST(Meyerson, OneQueryPerArrival) {
  const auto inst = euclidean_uniform(20, 0, 2, 9);
  Rng rng(3);
  MeteredOracle o(inst);
  const auto run = meyerson_topl(o, 3, 5, 0.3, 0, rng);
  EXPECT_LE(o.counters().max_per_agent, 1u);
  EXPECT_LE(o.counters().total, 19u);
  EXPECT_EQ(run.order.size(), 20u);
  EXPECT_EQ(o.agent_count(run.order.front()), 0u);
}

TEST(Meyerson, StructuralCentersAndDeltas) {
  for (int nu : {0, 1}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto inst = nu == 0 ? euclidean_uniform(14, 0, 2, seed) : euclidean_uniform(14, 9, 2, seed);
      const auto profile = PreferenceProfile::from_metric(inst);
      Rng rng(seed);
      MeteredOracle o(inst, profile);
      const double B = 0.4;
      const std::size_t ell = 5;
      const auto run = meyerson_topl(o, 2, ell, B, nu, rng);
      // the first arrival's own choice is always open
      const CandidateId first = nu == 0 ? run.order.front() : profile.top(run.order.front());
      EXPECT_EQ(run.centers.front(), first);
      for (CandidateId c : run.centers) {
        bool opened_by_arrival = false;
        for (AgentId x : run.order) opened_by_arrival |= (nu == 0 ? CandidateId{x} : profile.top(x)) == c;
        EXPECT_TRUE(opened_by_arrival);
      }
      // independent replay on the same random stream
      Rng replay(seed);
      std::vector<AgentId> order(14);
      std::iota(order.begin(), order.end(), AgentId{0});
      replay.shuffle(order);
      ASSERT_EQ(order, run.order);
      std::vector<CandidateId> open{first};
      for (std::size_t i = 1; i < order.size(); ++i) {
        const AgentId x = order[i];
        double d = std::numeric_limits<double>::infinity();
        for (CandidateId c : open) d = std::min(d, inst.distance(x, c));
        const double delta = std::max(0.0, d - (3.0 + nu) * B / static_cast<double>(ell));
        EXPECT_NEAR(run.deltas[i], delta, 1e-12);
        if (delta > 0.0 && replay.uniform() < std::min(1.0, delta / (B / 2.0))) {
          const CandidateId mine = nu == 0 ? CandidateId{x} : profile.top(x);
          if (std::find(open.begin(), open.end(), mine) == open.end()) open.push_back(mine);
        }
      }
      EXPECT_EQ(open, run.centers);
    }
  }
}

TEST(Meyerson, RejectsBadInput) {
  const auto gen = euclidean_uniform(5, 3, 2, 1);
  MeteredOracle o(gen);
  Rng rng(1);
  EXPECT_THROW(meyerson_topl(o, 1, 2, 1.0, 0, rng), ParameterError);
  EXPECT_THROW(meyerson_topl(o, 1, 2, 0.0, 1, rng), ParameterError);
  EXPECT_THROW(meyerson_topl(o, 1, 2, 1.0, 2, rng), ParameterError);
}

TEST(Meyerson, LineMeansWithinBounds) {
  const auto inst = line_instance({0.0, 1.0, 3.0, 7.0});
  const double opt = brute_force_opt(inst, 2, 4).value;
  ASSERT_DOUBLE_EQ(opt, 3.0);
  const auto m = meyerson_means(inst, 2, 4, opt, 0, 2000);
  EXPECT_LE(m.size, 26.0 * 2);
  EXPECT_LE(m.cost, 15.0 * opt + 14.0 * opt);
}

TEST(Meyerson, RandomMeansWithinBounds) {
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto inst = euclidean_gaussian_clusters(16, 0, 2, 3, 0.05, 30 + seed);
    for (std::size_t ell : {std::size_t{4}, std::size_t{16}}) {
      const double opt = brute_force_opt(inst, 3, ell).value;
      const auto m0 = meyerson_means(inst, 3, ell, opt, 0, 1000);
      EXPECT_LE(m0.size, 26.0 * 3 * 1.1);
      EXPECT_LE(m0.cost, (15.0 * opt + 14.0 * opt) * 1.1);
      const auto m1 = meyerson_means(inst, 3, ell, opt, 1, 1000);
      EXPECT_LE(m1.size, 42.0 * 3 * 1.1);
      EXPECT_LE(m1.cost, (19.0 * opt + 27.0 * opt) * 1.1);
    }
  }
}

TEST(Sparsification, LossBoundsAgainstBruteForce) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 5 + seed % 6;
    const auto inst = euclidean_uniform(n, 0, 2, 1300 + seed);
    const auto profile = PreferenceProfile::from_metric(inst);
    Rng rng(seed);
    const std::size_t k = 1 + seed % 2;
    const std::size_t ell = 1 + rng.below(n);
    const double opt = brute_force_opt(inst, k, ell).value;
    ASSERT_GT(opt, 0.0);
    std::vector<CandidateId> pick;
    for (CandidateId a = 0; a < n; ++a)
      if (rng.below(2)) pick.push_back(a);
    if (pick.empty()) pick.push_back(static_cast<CandidateId>(rng.below(n)));
    const Committee S(pick);
    const double alpha = committee_cost(inst, S.members, ell) / opt;
    const auto w = induce_weighted_instance(profile, S);

    CardinalProblem p;
    p.facilities = S.members;
    p.k = k;
    p.ell = ell;
    for (std::size_t s = 0; s < S.size(); ++s) {
      p.weights.push_back(w.weights[s]);
      for (CandidateId f : S.members) p.dist.push_back(inst.distance(S.members[s], f));
    }
    const auto best = solve_exact(p);
    EXPECT_LE(best.value, 2.0 * (alpha + 1.0) * opt + 1e-9) << "seed " << seed;
    EXPECT_LE(committee_cost(inst, best.committee.members, ell), (alpha + 2.0 * (alpha + 1.0)) * opt + 1e-9);

    // every k-subset T of S, with its own approximation factor rho_T
    const std::size_t r = std::min(k, S.size());
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      const double wcost = p.objective(idx);
      std::vector<CandidateId> T;
      for (std::size_t i : idx) T.push_back(S.members[i]);
      if (best.value > 0.0) {
        const double rho = wcost / best.value;
        EXPECT_LE(committee_cost(inst, T, ell), (alpha + 2.0 * rho * (alpha + 1.0)) * opt + 1e-9);
      }
      std::size_t i = r;
      while (i > 0 && idx[i - 1] == S.size() - r + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

TEST(MeyersonBB, ColocatedGroupsCostZero) {
  const auto inst = groups_instance(3, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = meyerson_bb(o, 3, 15, {}, CardinalSolver{}, rng);
    EXPECT_DOUBLE_EQ(committee_cost(inst, res.committee.members, 15), 0.0);
    EXPECT_EQ(res.committee.size(), 3u);
    EXPECT_FALSE(res.failure);
  }
}

TEST(MeyersonBB, SeparatedNonzeroGroups) {
  // three tight groups: every group must get its own center
  std::vector<double> xs;
  for (int g = 0; g < 3; ++g)
    for (int r = 0; r < 4; ++r) xs.push_back(100.0 * g + 0.1 * r);
  const auto inst = line_instance(xs);
  const double opt = brute_force_opt(inst, 3, 12).value;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = meyerson_bb(o, 3, 12, {}, CardinalSolver{}, rng);
    EXPECT_FALSE(res.failure);
    EXPECT_LE(committee_cost(inst, res.committee.members, 12), 40.0 * opt);
  }
}

TEST(MeyersonBB, ForcedFailureReturnsFallback) {
  const auto inst = euclidean_uniform(12, 0, 2, 5);
  Rng rng(1);
  MeteredOracle o(inst);
  MeyersonBBOptions opt;
  opt.size_filter = 0.0;
  const auto res = meyerson_bb(o, 3, 4, opt, CardinalSolver{}, rng);
  EXPECT_TRUE(res.failure);
  EXPECT_EQ(res.committee, Committee({0, 1, 2}));
  for (const auto& t : res.runs) EXPECT_FALSE(t.kept);
}

TEST(MeyersonBB, RunScheduleAndRepetitions) {
  const std::size_t n = 10;
  const auto inst = euclidean_uniform(n, 0, 2, 6);
  Rng rng(2);
  MeteredOracle o(inst);
  MeyersonBBOptions opt;
  opt.delta = 0.1;  // 4 repetitions
  const auto res = meyerson_bb(o, 2, 3, opt, CardinalSolver{}, rng);
  // i = 0..ceil(log2 n^2) = 0..7
  ASSERT_EQ(res.runs.size(), 8u * 4u);
  EXPECT_NEAR(res.runs.front().parameter, res.estimate / 100.0, 1e-12);
  EXPECT_NEAR(res.runs.back().parameter, res.estimate * 128.0 / 100.0, 1e-9);
  EXPECT_TRUE(valid_committee(inst, res.committee, 2));
}

TEST(MeyersonBB, DistortionOnRandomInstances) {
  std::size_t good = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = euclidean_uniform(14, 0, 2, 2000 + seed);
    const std::size_t ell = seed % 2 ? 14 : 4;
    const double opt = brute_force_opt(inst, 3, ell).value;
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = meyerson_bb(o, 3, ell, {}, CardinalSolver{}, rng);
    ASSERT_TRUE(valid_committee(inst, res.committee, 3));
    ++total;
    if (committee_cost(inst, res.committee.members, ell) <= 40.0 * opt) ++good;
  }
  EXPECT_GE(static_cast<double>(good), 0.75 * static_cast<double>(total));
}

TEST(MeyersonBB, RequiresColocated) {
  const auto inst = euclidean_uniform(6, 4, 2, 1);
  Rng rng(1);
  MeteredOracle o(inst);
  EXPECT_THROW(meyerson_bb(o, 2, 3, {}, CardinalSolver{}, rng), ParameterError);
}

TEST(MeyersonBBGen, InterleavedLine) {
  std::vector<double> agents, cands;
  for (int i = 0; i < 8; ++i) agents.push_back(i < 4 ? 0.3 * i : 20.0 + 0.3 * i);
  for (int i = 0; i < 6; ++i) cands.push_back(i < 3 ? 0.5 * i + 0.1 : 20.3 + 0.5 * i);
  const auto inst = line_instance(agents, cands);
  const double opt = brute_force_opt(inst, 2, 8).value;
  std::size_t good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    MeteredOracle o(inst);
    const auto res = meyerson_bb_gen(o, 2, 8, {}, CardinalSolver{}, rng);
    ASSERT_TRUE(valid_committee(inst, res.committee, 2));
    if (committee_cost(inst, res.committee.members, 8) <= 40.0 * opt) ++good;
  }
  EXPECT_GE(good, 15u);
}

TEST(MeyersonBBGen, ScheduleUsesGeneralRange) {
  const std::size_t n = 6;
  const auto inst = euclidean_uniform(n, 5, 2, 8);
  Rng rng(2);
  MeteredOracle o(inst);
  const auto res = meyerson_bb_gen(o, 2, 3, {}, CardinalSolver{}, rng);
  // i = 1..ceil(log2 5n^2)+1 = 1..9, two repetitions each at delta = 1/4
  ASSERT_EQ(res.runs.size(), 9u * 2u);
  EXPECT_NEAR(res.runs.front().parameter, res.estimate / 36.0, 1e-12);
}
