#pragma once
#ifndef TOPL_ORACLE_HPP
#define TOPL_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "topl/instance.hpp"

namespace topl {

struct QueryCounters {
  std::size_t max_per_agent = 0;
  std::size_t total = 0;
  bool operator==(const QueryCounters&) const = default;
};

struct QueryLogEntry {
  std::uint64_t trial;
  std::string phase;
  AgentId agent;
  CandidateId candidate;
  double value;
};

/// Gateway to cardinal information. Counts each distinct (agent, candidate) pair once;
/// ordinal accessors are free. Single-owner mutable state.
class MeteredOracle {
 public:
  /// Oracles over one instance may share a profile; it is never modified.
  MeteredOracle(const MetricInstance& inst, std::shared_ptr<const PreferenceProfile> profile)
      : inst_(&inst),
        profile_(std::move(profile)),
        seen_(inst.num_agents() * inst.num_candidates(), 0),
        per_agent_(inst.num_agents(), 0) {
    require(profile_ != nullptr, "MeteredOracle: null profile");
    require(profile_->num_agents() == inst.num_agents() &&
                profile_->num_candidates() == inst.num_candidates(),
            "MeteredOracle: profile shape does not match instance");
  }

  MeteredOracle(const MetricInstance& inst, PreferenceProfile profile)
      : MeteredOracle(inst, std::make_shared<const PreferenceProfile>(std::move(profile))) {}

  explicit MeteredOracle(const MetricInstance& inst)
      : MeteredOracle(inst, PreferenceProfile::from_metric(inst)) {}

  std::size_t num_agents() const { return inst_->num_agents(); }
  std::size_t num_candidates() const { return inst_->num_candidates(); }
  bool colocated() const { return inst_->colocated(); }

  // ---- cardinal -----------------------------------------------------------

  double value_query(AgentId i, CandidateId a) {
    require(i < num_agents(), "value_query: unknown agent " + std::to_string(i));
    require(a < num_candidates(), "value_query: unknown candidate " + std::to_string(a));
    const double v = inst_->distance(i, a);
    auto& flag = seen_[std::size_t{i} * num_candidates() + a];
    if (!flag) {
      flag = 1;
      ++per_agent_[i];
      ++total_;
      if (logging_) log_.push_back({trial_, phase_, i, a, v});
    }
    return v;
  }

  bool is_cached(AgentId i, CandidateId a) const {
    return seen_[std::size_t{i} * num_candidates() + a] != 0;
  }

  /// {a in A : d(i, a) <= tau}, as a prefix of i's ranking, by binary search.
  std::vector<CandidateId> ball_query(AgentId i, double tau) {
    const auto r = profile_->ranking(i);
    const std::size_t len = prefix_within(i, r, tau);
    return {r.begin(), r.begin() + static_cast<std::ptrdiff_t>(len)};
  }

  /// {a in within : d(i, a) <= tau}, searching i's ranking restricted to `within`.
  std::vector<CandidateId> ball_query(AgentId i, double tau, std::span<const CandidateId> within) {
    std::vector<CandidateId> r(within.begin(), within.end());
    std::sort(r.begin(), r.end(),
              [&](CandidateId a, CandidateId b) { return profile_->rank(i, a) < profile_->rank(i, b); });
    r.resize(prefix_within(i, r, tau));
    return r;
  }

  /// d(j, S) through one query on top_S(j).
  double nearest_in_set_cost(AgentId j, std::span<const CandidateId> S) {
    require(!S.empty(), "nearest_in_set_cost: empty set");
    return value_query(j, profile_->top_in(j, S));
  }

  // ---- ordinal (free) -----------------------------------------------------

  const PreferenceProfile& profile() const { return *profile_; }
  std::span<const CandidateId> ranking(AgentId i) const { return profile_->ranking(i); }
  CandidateId top(AgentId i) const { return profile_->top(i); }
  CandidateId top_in(AgentId i, std::span<const CandidateId> S) const { return profile_->top_in(i, S); }
  CandidateId bottom_in(AgentId i, std::span<const CandidateId> S) const { return profile_->bottom_in(i, S); }

  // ---- accounting ---------------------------------------------------------

  QueryCounters counters() const {
    QueryCounters c;
    c.total = total_;
    for (std::size_t x : per_agent_) c.max_per_agent = std::max(c.max_per_agent, x);
    return c;
  }
  std::size_t agent_count(AgentId i) const { return per_agent_[i]; }
  const std::vector<std::size_t>& per_agent_counts() const { return per_agent_; }

  void set_phase(std::string phase) { phase_ = std::move(phase); }
  const std::string& phase() const { return phase_; }
  void enable_log(std::uint64_t trial) {
    logging_ = true;
    trial_ = trial;
  }
  const std::vector<QueryLogEntry>& log() const { return log_; }

  void write_log_csv(std::ostream& os, bool header = true) const {
    if (header) os << "trial,mechanism_phase,agent,candidate,value\n";
    for (const auto& e : log_)
      os << e.trial << ',' << e.phase << ',' << e.agent << ',' << e.candidate << ',' << e.value << '\n';
  }

  /// Uncounted access to the hidden metric, for audits in tests and harnesses only.
  const MetricInstance& ground_truth() const { return *inst_; }

 private:
  // Length of the longest prefix of r (ordered by i's preference) within distance tau.
  std::size_t prefix_within(AgentId i, std::span<const CandidateId> r, double tau) {
    std::size_t lo = 0, hi = r.size();  // answer in [lo, hi]
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (value_query(i, r[mid]) <= tau) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }

  const MetricInstance* inst_;
  std::shared_ptr<const PreferenceProfile> profile_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::size_t> per_agent_;
  std::size_t total_ = 0;
  std::string phase_ = "init";
  bool logging_ = false;
  std::uint64_t trial_ = 0;
  std::vector<QueryLogEntry> log_;
};

/// ceil(log2(x + 1)): probes used by a binary search over x items.
inline std::size_t search_probes(std::size_t x) {
  std::size_t p = 0;
  while ((std::size_t{1} << p) < x + 1) ++p;
  return p;
}

}  // namespace topl

#endif  // TOPL_ORACLE_HPP
