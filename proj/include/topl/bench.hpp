#pragma once
#ifndef TOPL_BENCH_HPP
#define TOPL_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "topl/adaptive_sampling.hpp"
#include "topl/brute_force.hpp"
#include "topl/estimators.hpp"
#include "topl/generators.hpp"
#include "topl/io.hpp"
#include "topl/meyerson.hpp"
#include "topl/rng.hpp"

namespace topl {

enum class MechanismId {
  meyerson_bb,
  meyerson_bb_gen,
  samplemech,
  samplemech_gen,
  samplemech_tot,
  ie_meyerson_bb,
  ie_samplemech,
  ie_samplemech_tot,
  est_boruvka,
  est_boruvka_gen,
  est_kcenter,
  est_kcenter_gen,
  est_kmedian,
};

inline constexpr MechanismId kAllMechanisms[] = {
    MechanismId::meyerson_bb,     MechanismId::meyerson_bb_gen, MechanismId::samplemech,
    MechanismId::samplemech_gen,  MechanismId::samplemech_tot,  MechanismId::ie_meyerson_bb,
    MechanismId::ie_samplemech,   MechanismId::ie_samplemech_tot, MechanismId::est_boruvka,
    MechanismId::est_boruvka_gen, MechanismId::est_kcenter,     MechanismId::est_kcenter_gen,
    MechanismId::est_kmedian};

inline const char* to_string(MechanismId m) {
  switch (m) {
    case MechanismId::meyerson_bb: return "meyerson_bb";
    case MechanismId::meyerson_bb_gen: return "meyerson_bb_gen";
    case MechanismId::samplemech: return "samplemech";
    case MechanismId::samplemech_gen: return "samplemech_gen";
    case MechanismId::samplemech_tot: return "samplemech_tot";
    case MechanismId::ie_meyerson_bb: return "ie_meyerson_bb";
    case MechanismId::ie_samplemech: return "ie_samplemech";
    case MechanismId::ie_samplemech_tot: return "ie_samplemech_tot";
    case MechanismId::est_boruvka: return "est_boruvka";
    case MechanismId::est_boruvka_gen: return "est_boruvka_gen";
    case MechanismId::est_kcenter: return "est_kcenter";
    case MechanismId::est_kcenter_gen: return "est_kcenter_gen";
    case MechanismId::est_kmedian: return "est_kmedian";
  }
  return "?";
}

inline MechanismId parse_mechanism(std::string_view s) {
  for (auto m : kAllMechanisms)
    if (s == to_string(m)) return m;
  throw ParameterError("unknown mechanism: " + std::string(s));
}

inline bool needs_colocated(MechanismId m) {
  switch (m) {
    case MechanismId::meyerson_bb_gen:
    case MechanismId::samplemech_gen:
    case MechanismId::est_boruvka_gen:
    case MechanismId::est_kcenter_gen: return false;
    default: return true;
  }
}

struct ExperimentConfig {
  InstanceKind kind = InstanceKind::euclidean_uniform;
  GeneratorParams gen;
  std::optional<std::string> instance_path;
  /// Fixed instance seed; when unset each trial generates its own instance.
  std::optional<std::uint64_t> instance_seed;
  std::size_t k = 3;
  std::size_t ell = 1;
  MechanismId mechanism = MechanismId::samplemech;
  double eps = 0.5;
  double delta = 0.25;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  SolverKind solver = SolverKind::exact;
  std::uint64_t cap = kDefaultEnumerationCap;
  bool brute_force = true;
  bool timing = false;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string mechanism;
  std::size_t n = 0, m = 0, k = 0, ell = 0;
  double delta = 0.0;
  std::vector<CandidateId> committee;
  double cost = 0.0;
  std::optional<double> opt;
  std::optional<double> distortion;
  bool zero_opt = false;
  double estimate = 0.0;
  std::size_t max_per_agent = 0;
  std::size_t total_queries = 0;
  double wall_ms = 0.0;
  bool success = true;
  std::string note;
};

inline void validate(const ExperimentConfig& c, const MetricInstance& inst) {
  require(c.eps > 0.0 && c.eps <= 1.0, "eps must lie in (0, 1]");
  require(c.delta > 0.0 && c.delta < 1.0, "delta must lie in (0, 1)");
  require(c.trials >= 1, "trials must be positive");
  require(c.ell >= 1 && c.ell <= inst.num_agents(), "ell must lie in [1, n]");
  require(c.k >= 1 && c.k <= inst.num_candidates(), "k must lie in [1, m]");
  require(!needs_colocated(c.mechanism) || inst.colocated(),
          std::string(to_string(c.mechanism)) + " requires candidates = agents");
}

inline MetricInstance experiment_instance(const ExperimentConfig& c, std::uint64_t trial_seed) {
  if (c.instance_path) return load_instance(*c.instance_path);
  return generate_instance(c.kind, c.gen, c.instance_seed.value_or(derive_seed(trial_seed, 1)));
}

/// Runs one mechanism on a fresh oracle and fills cost, committee and counters.
inline TrialRecord run_mechanism(const ExperimentConfig& c, const MetricInstance& inst, std::uint64_t trial_seed) {
  TrialRecord r;
  r.seed = trial_seed;
  r.mechanism = to_string(c.mechanism);
  r.n = inst.num_agents();
  r.m = inst.num_candidates();
  r.k = c.k;
  r.ell = c.ell;
  r.delta = c.delta;
  MeteredOracle oracle(inst);
  Rng rng(trial_seed);
  CardinalSolver solver;
  solver.kind = c.solver;
  solver.cap = c.cap;
  solver.seed = derive_seed(trial_seed, 2);

  auto take = [&](const MechanismResult& res) {
    r.committee = res.committee.members;
    r.estimate = res.estimate;
    r.success = !res.failure;
    r.note = res.note;
  };
  auto take_estimate = [&](const EstimateRecord& e) {
    r.committee = e.companion.members;
    r.estimate = e.value;
    r.note = std::string("estimate kind ") + to_string(e.kind);
  };
  switch (c.mechanism) {
    case MechanismId::meyerson_bb:
    case MechanismId::meyerson_bb_gen: {
      MeyersonBBOptions o;
      o.eps = c.eps;
      o.delta = c.delta;
      take(c.mechanism == MechanismId::meyerson_bb ? meyerson_bb(oracle, c.k, c.ell, o, solver, rng)
                                                   : meyerson_bb_gen(oracle, c.k, c.ell, o, solver, rng));
      break;
    }
    case MechanismId::samplemech:
    case MechanismId::samplemech_gen:
    case MechanismId::samplemech_tot: {
      SampleMechOptions o;
      o.eps = c.eps;
      o.delta = c.delta;
      if (c.mechanism == MechanismId::samplemech) take(samplemech(oracle, c.k, c.ell, o, solver, rng));
      else if (c.mechanism == MechanismId::samplemech_gen) take(samplemech_gen(oracle, c.k, c.ell, o, solver, rng));
      else take(samplemech_tot(oracle, c.k, c.ell, o, solver, rng));
      break;
    }
    case MechanismId::ie_meyerson_bb:
    case MechanismId::ie_samplemech:
    case MechanismId::ie_samplemech_tot: {
      const auto w = c.mechanism == MechanismId::ie_meyerson_bb ? WrappedMechanism::meyerson_bb
                     : c.mechanism == MechanismId::ie_samplemech ? WrappedMechanism::samplemech
                                                                  : WrappedMechanism::samplemech_tot;
      r.delta = in_expectation_delta(w, r.n, c.k, c.ell);
      take(in_expectation_wrapper(w, oracle, c.k, c.ell, InExpectationOptions{c.eps, std::nullopt}, solver, rng));
      break;
    }
    case MechanismId::est_boruvka: take_estimate(boruvka_estimate(oracle, c.k)); break;
    case MechanismId::est_boruvka_gen: take_estimate(boruvka_estimate_gen(oracle, c.k)); break;
    case MechanismId::est_kcenter: take_estimate(kcenter_estimate(oracle, c.k, c.ell)); break;
    case MechanismId::est_kcenter_gen: take_estimate(kcenter_estimate_gen(oracle, c.k, c.ell)); break;
    case MechanismId::est_kmedian: take_estimate(kmedian_estimate(oracle, c.k, c.ell, rng)); break;
  }
  const auto q = oracle.counters();
  r.max_per_agent = q.max_per_agent;
  r.total_queries = q.total;
  r.cost = committee_cost(inst, r.committee, c.ell);
  return r;
}

/// Trial i uses seed derive_seed(config.seed, i) and a fresh oracle.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& c) {
  require(c.trials >= 1, "trials must be positive");
  std::vector<TrialRecord> out;
  std::optional<MetricInstance> fixed;
  std::optional<double> fixed_opt;
  const bool shared = c.instance_path.has_value() || c.instance_seed.has_value() ||
                      c.kind == InstanceKind::explicit_matrix || c.kind == InstanceKind::fixture_thm1_d1 ||
                      c.kind == InstanceKind::fixture_thm1_d2 || c.kind == InstanceKind::fixture_dsample_bad;
  for (std::size_t i = 0; i < c.trials; ++i) {
    const std::uint64_t s = derive_seed(c.seed, i);
    if (!fixed || !shared) {
      fixed = experiment_instance(c, s);
      validate(c, *fixed);
      fixed_opt.reset();
    }
    const MetricInstance& inst = *fixed;
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord r;
    try {
      r = run_mechanism(c, inst, s);
    } catch (const CapExceeded& e) {
      r.seed = s;
      r.mechanism = to_string(c.mechanism);
      r.n = inst.num_agents();
      r.m = inst.num_candidates();
      r.k = c.k;
      r.ell = c.ell;
      r.delta = c.delta;
      r.success = false;
      r.note = std::string("solver refused: ") + e.what();
    }
    r.trial = i;
    if (c.timing) {
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    if (c.brute_force && r.success) {
      if (!fixed_opt) {
        try {
          fixed_opt = brute_force_opt(inst, c.k, c.ell, c.cap).value;
        } catch (const CapExceeded&) {
          fixed_opt = std::nullopt;
        }
      }
      if (fixed_opt) {
        r.opt = *fixed_opt;
        if (*fixed_opt > 0.0) r.distortion = r.cost / *fixed_opt;
        else r.zero_opt = true;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records CSV

inline const char* kRecordHeader =
    "trial,seed,mechanism,n,m,k,ell,delta,committee,cost,opt,distortion,zero_opt,estimate,"
    "max_per_agent,total_queries,success,wall_ms,note";

namespace detail {
inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) out.push_back(cur), cur.clear();
    else cur.push_back(ch);
  }
  out.push_back(cur);
  return out;
}
}  // namespace detail

inline void write_records_csv(std::ostream& os, const std::vector<TrialRecord>& recs) {
  os << kRecordHeader << '\n';
  for (const auto& r : recs) {
    std::string members;
    for (std::size_t i = 0; i < r.committee.size(); ++i) members += (i ? ";" : "") + std::to_string(r.committee[i]);
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    os << r.trial << ',' << r.seed << ',' << r.mechanism << ',' << r.n << ',' << r.m << ',' << r.k << ',' << r.ell
       << ',' << detail::fmt(r.delta) << ',' << members << ',' << detail::fmt(r.cost) << ','
       << (r.opt ? detail::fmt(*r.opt) : "") << ',' << (r.distortion ? detail::fmt(*r.distortion) : "") << ','
       << (r.zero_opt ? 1 : 0) << ',' << detail::fmt(r.estimate) << ',' << r.max_per_agent << ','
       << r.total_queries << ',' << (r.success ? 1 : 0) << ',' << detail::fmt(r.wall_ms) << ',' << note << '\n';
  }
}

inline std::vector<TrialRecord> read_records_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line == kRecordHeader, "records file: bad header");
  std::vector<TrialRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    require(f.size() == 19, "records file: expected 19 columns");
    try {
      TrialRecord r;
      r.trial = std::stoull(f[0]);
      r.seed = std::stoull(f[1]);
      r.mechanism = f[2];
      r.n = std::stoull(f[3]);
      r.m = std::stoull(f[4]);
      r.k = std::stoull(f[5]);
      r.ell = std::stoull(f[6]);
      r.delta = std::stod(f[7]);
      if (!f[8].empty())
        for (const auto& id : detail::split(f[8], ';')) r.committee.push_back(static_cast<CandidateId>(std::stoul(id)));
      r.cost = std::stod(f[9]);
      if (!f[10].empty()) r.opt = std::stod(f[10]);
      if (!f[11].empty()) r.distortion = std::stod(f[11]);
      r.zero_opt = f[12] == "1";
      r.estimate = std::stod(f[13]);
      r.max_per_agent = std::stoull(f[14]);
      r.total_queries = std::stoull(f[15]);
      r.success = f[16] == "1";
      r.wall_ms = std::stod(f[17]);
      r.note = f[18];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParameterError("records file: malformed line: " + line);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

/// Shape of the query bound each mechanism is measured against; fitted constants are
/// observed counts divided by this.
inline double query_bound_shape(const TrialRecord& r, bool& uses_total) {
  const double lg_n = std::log2(static_cast<double>(std::max<std::size_t>(r.n, 2)));
  const double lg_k = std::log2(static_cast<double>(std::max<std::size_t>(r.k, 2)));
  const double lg_d = std::log2(1.0 / r.delta);
  const double lg_l = std::max(1.0, std::log2(static_cast<double>(r.ell)));
  const double kk = static_cast<double>(r.k);
  uses_total = false;
  if (r.mechanism == "meyerson_bb" || r.mechanism == "meyerson_bb_gen" || r.mechanism == "ie_meyerson_bb")
    return (lg_d + lg_k) * lg_n;
  if (r.mechanism == "samplemech" || r.mechanism == "ie_samplemech") {
    const double mn = std::min(static_cast<double>(r.ell), static_cast<double>(r.n) / static_cast<double>(r.ell));
    return kk * std::max(1.0, lg_d) * std::max(1.0, std::log2(mn));
  }
  if (r.mechanism == "samplemech_gen") return kk * lg_l * std::max(1.0, lg_d);
  if (r.mechanism == "samplemech_tot" || r.mechanism == "ie_samplemech_tot") {
    uses_total = true;
    return kk * kk * lg_n * lg_n * lg_l;
  }
  return lg_n;
}

struct ReportRow {
  std::string mechanism;
  std::size_t n = 0, k = 0, ell = 0;
  std::size_t trials = 0, successes = 0, zero_opt = 0;
  std::optional<double> mean_distortion, median_distortion, p90_distortion, max_distortion;
  double mean_cost = 0.0;
  std::size_t max_per_agent = 0;
  double mean_total = 0.0;
  std::size_t max_total = 0;
  double fitted_c = 0.0;
  std::string fitted_on;
};

/// Linear-interpolation quantile of sorted data.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Aggregates per (mechanism, n, k, ell), in that sort order.
inline std::vector<ReportRow> summarize(const std::vector<TrialRecord>& recs) {
  require(!recs.empty(), "report: no records");
  std::map<std::tuple<std::string, std::size_t, std::size_t, std::size_t>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : recs) groups[{r.mechanism, r.n, r.k, r.ell}].push_back(&r);
  std::vector<ReportRow> rows;
  for (const auto& [key, members] : groups) {
    ReportRow row;
    std::tie(row.mechanism, row.n, row.k, row.ell) = key;
    std::vector<double> dist;
    double cost_sum = 0.0, total_sum = 0.0;
    for (const TrialRecord* r : members) {
      ++row.trials;
      row.successes += r->success ? 1 : 0;
      row.zero_opt += r->zero_opt ? 1 : 0;
      if (r->distortion) dist.push_back(*r->distortion);
      cost_sum += r->cost;
      total_sum += static_cast<double>(r->total_queries);
      row.max_per_agent = std::max(row.max_per_agent, r->max_per_agent);
      row.max_total = std::max(row.max_total, r->total_queries);
      bool uses_total = false;
      const double shape = query_bound_shape(*r, uses_total);
      const double observed = static_cast<double>(uses_total ? r->total_queries : r->max_per_agent);
      row.fitted_c = std::max(row.fitted_c, observed / shape);
      row.fitted_on = uses_total ? "total" : "per_agent";
    }
    row.mean_cost = cost_sum / static_cast<double>(row.trials);
    row.mean_total = total_sum / static_cast<double>(row.trials);
    if (!dist.empty()) {
      std::sort(dist.begin(), dist.end());
      double s = 0.0;
      for (double x : dist) s += x;
      row.mean_distortion = s / static_cast<double>(dist.size());
      row.median_distortion = quantile(dist, 0.5);
      row.p90_distortion = quantile(dist, 0.9);
      row.max_distortion = dist.back();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

enum class ReportFormat { csv, json, table };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  if (s == "table") return ReportFormat::table;
  throw ParameterError("unknown format: " + std::string(s));
}

inline std::string report(const std::vector<TrialRecord>& recs, ReportFormat format) {
  const auto rows = summarize(recs);
  auto opt_str = [](const std::optional<double>& x, int prec) {
    if (!x) return std::string("-");
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << *x;
    return os.str();
  };
  std::ostringstream os;
  if (format == ReportFormat::json) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json j;
      j["mechanism"] = r.mechanism;
      j["n"] = r.n;
      j["k"] = r.k;
      j["ell"] = r.ell;
      j["trials"] = r.trials;
      j["successes"] = r.successes;
      j["zero_opt"] = r.zero_opt;
      j["mean_distortion"] = r.mean_distortion ? nlohmann::json(*r.mean_distortion) : nlohmann::json(nullptr);
      j["median_distortion"] = r.median_distortion ? nlohmann::json(*r.median_distortion) : nlohmann::json(nullptr);
      j["p90_distortion"] = r.p90_distortion ? nlohmann::json(*r.p90_distortion) : nlohmann::json(nullptr);
      j["max_distortion"] = r.max_distortion ? nlohmann::json(*r.max_distortion) : nlohmann::json(nullptr);
      j["mean_cost"] = r.mean_cost;
      j["max_per_agent_queries"] = r.max_per_agent;
      j["mean_total_queries"] = r.mean_total;
      j["max_total_queries"] = r.max_total;
      j["fitted_c"] = r.fitted_c;
      j["fitted_on"] = r.fitted_on;
      arr.push_back(std::move(j));
    }
    os << arr.dump(2) << '\n';
    return os.str();
  }
  const std::vector<std::string> header = {"mechanism",  "n",         "k",          "ell",       "trials",
                                           "successes",  "zero_opt",  "mean_dist",  "median_dist", "p90_dist",
                                           "max_dist",   "mean_cost", "max_agent_q", "mean_total_q", "max_total_q",
                                           "fitted_c",   "fitted_on"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::ostringstream mc, mt, fc;
    mc << std::fixed << std::setprecision(4) << r.mean_cost;
    mt << std::fixed << std::setprecision(1) << r.mean_total;
    fc << std::fixed << std::setprecision(3) << r.fitted_c;
    cells.push_back({r.mechanism, std::to_string(r.n), std::to_string(r.k), std::to_string(r.ell),
                     std::to_string(r.trials), std::to_string(r.successes), std::to_string(r.zero_opt),
                     opt_str(r.mean_distortion, 3), opt_str(r.median_distortion, 3), opt_str(r.p90_distortion, 3),
                     opt_str(r.max_distortion, 3), mc.str(), std::to_string(r.max_per_agent), mt.str(),
                     std::to_string(r.max_total), fc.str(), r.fitted_on});
  }
  if (format == ReportFormat::csv) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : cells) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << "  ";
      if (i == 0) os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      else os << std::right << std::setw(static_cast<int>(width[i])) << row[i];
    }
    os << '\n';
  };
  emit(header);
  std::size_t total_width = 0;
  for (auto w : width) total_width += w + 2;
  os << std::string(total_width - 2, '-') << '\n';
  for (const auto& row : cells) emit(row);
  return os.str();
}

}  // namespace topl

#endif  // TOPL_BENCH_HPP
