#pragma once
#ifndef TOPL_GENERATORS_HPP
#define TOPL_GENERATORS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "topl/instance.hpp"
#include "topl/rng.hpp"

namespace topl {

enum class InstanceKind {
  euclidean_uniform,
  euclidean_gaussian_clusters,
  line,
  explicit_matrix,
  fixture_thm1_d1,
  fixture_thm1_d2,
  fixture_dsample_bad,
};

inline const char* to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::euclidean_uniform: return "euclidean_uniform";
    case InstanceKind::euclidean_gaussian_clusters: return "euclidean_gaussian_clusters";
    case InstanceKind::line: return "line";
    case InstanceKind::explicit_matrix: return "explicit_matrix";
    case InstanceKind::fixture_thm1_d1: return "fixture_thm1_d1";
    case InstanceKind::fixture_thm1_d2: return "fixture_thm1_d2";
    case InstanceKind::fixture_dsample_bad: return "fixture_dsample_bad";
  }
  return "?";
}

inline InstanceKind parse_instance_kind(std::string_view s) {
  for (auto k : {InstanceKind::euclidean_uniform, InstanceKind::euclidean_gaussian_clusters,
                 InstanceKind::line, InstanceKind::explicit_matrix, InstanceKind::fixture_thm1_d1,
                 InstanceKind::fixture_thm1_d2, InstanceKind::fixture_dsample_bad}) {
    if (s == to_string(k)) return k;
  }
  throw ParameterError("unknown instance kind: " + std::string(s));
}

struct GeneratorParams {
  std::size_t n = 16;
  std::size_t m = 0;  // 0: candidates coincide with agents
  std::size_t dim = 2;
  std::size_t clusters = 3;
  double spread = 0.05;     // gaussian std-dev, unit-box centers
  double extent = 1.0;      // side of the sampling box / line segment
  std::vector<double> positions;  // line: explicit agent coordinates
  std::vector<double> candidate_positions;  // line with m > 0
  std::vector<std::vector<double>> matrix;  // explicit_matrix, n x m rows
  bool colocated = true;    // explicit_matrix
  double tau = 1.0;         // fixture_dsample_bad
  double L = 10.0;
  double eps = 0.1;
};

namespace detail {

inline double standard_normal(Rng& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u = 1.0 - rng.uniform();
  const double v = rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

inline std::vector<Point> uniform_points(std::size_t count, std::size_t dim, double extent, Rng& rng) {
  std::vector<Point> pts(count, Point(dim));
  for (auto& p : pts)
    for (auto& x : p) x = extent * rng.uniform();
  return pts;
}

inline std::vector<Point> line_points(const std::vector<double>& xs) {
  std::vector<Point> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back(Point{x});
  return pts;
}

}  // namespace detail

inline MetricInstance euclidean_uniform(std::size_t n, std::size_t m, std::size_t dim,
                                        std::uint64_t seed, double extent = 1.0) {
  require(n >= 1 && dim >= 1, "euclidean_uniform: n and dim must be positive");
  Rng rng(seed);
  auto agents = detail::uniform_points(n, dim, extent, rng);
  auto cands = m == 0 ? std::vector<Point>{} : detail::uniform_points(m, dim, extent, rng);
  return MetricInstance::from_points(std::move(agents), std::move(cands));
}

/// Cluster centres uniform in the unit box, members offset by N(0, spread^2) per axis.
/// Agents are dealt round-robin to clusters; candidates likewise.
inline MetricInstance euclidean_gaussian_clusters(std::size_t n, std::size_t m, std::size_t dim,
                                                  std::size_t clusters, double spread,
                                                  std::uint64_t seed) {
  require(n >= 1 && dim >= 1 && clusters >= 1, "gaussian_clusters: bad sizes");
  require(spread >= 0.0, "gaussian_clusters: spread must be nonnegative");
  Rng rng(seed);
  const auto centres = detail::uniform_points(clusters, dim, 1.0, rng);
  auto draw = [&](std::size_t count) {
    std::vector<Point> pts(count, Point(dim));
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t t = 0; t < dim; ++t)
        pts[i][t] = centres[i % clusters][t] + spread * detail::standard_normal(rng);
    return pts;
  };
  auto agents = draw(n);
  auto cands = m == 0 ? std::vector<Point>{} : draw(m);
  return MetricInstance::from_points(std::move(agents), std::move(cands));
}

inline MetricInstance line_instance(const std::vector<double>& agents,
                                    const std::vector<double>& candidates = {}) {
  return MetricInstance::from_points(detail::line_points(agents), detail::line_points(candidates));
}

inline MetricInstance explicit_matrix(const std::vector<std::vector<double>>& rows, bool colocated) {
  require(!rows.empty(), "explicit_matrix: no rows");
  const std::size_t m = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * m);
  for (const auto& r : rows) {
    require(r.size() == m, "explicit_matrix: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return MetricInstance::from_matrix(rows.size(), m, colocated, std::move(flat));
}

// Four voters w, x, y, z (ids 0..3) on a line. Under d1 the pairs {w,x} coincide and
// under d2 the pair {y,z} does; both metrics induce the same rankings.
inline constexpr AgentId kW = 0, kX = 1, kY = 2, kZ = 3;

inline MetricInstance fixture_thm1_d1() { return line_instance({0.0, 0.0, 1.0, 2.0}); }
inline MetricInstance fixture_thm1_d2() { return line_instance({0.0, 1.0, 2.0, 2.0}); }

/// Rankings shared by both fixtures (id tie-breaking differs between the two metrics).
inline std::vector<std::vector<CandidateId>> fixture_thm1_rankings() {
  return {{kW, kX, kY, kZ}, {kX, kW, kY, kZ}, {kY, kZ, kX, kW}, {kZ, kY, kX, kW}};
}

/// Smallest integer strictly above 2 tau + 2 tau L / eps.
inline std::size_t dsample_bad_cluster_size(double tau, double L, double eps) {
  require(tau > 0.0 && eps > 0.0, "fixture_dsample_bad: tau and eps must be positive");
  require(L > 1.0, "fixture_dsample_bad: L must exceed 1");
  const double bound = 2.0 * tau + 2.0 * tau * L / eps;
  return static_cast<std::size_t>(std::floor(bound + 1e-9)) + 1;
}

/// Agents 0..c-1 pairwise at distance 1; the outlier (last id) at distance L from all.
inline MetricInstance fixture_dsample_bad(double tau, double L, double eps) {
  const std::size_t c = dsample_bad_cluster_size(tau, L, eps);
  const std::size_t n = c + 1;
  std::vector<double> dist(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i * n + i] = 0.0;
    if (i < c) {
      dist[i * n + c] = L;
      dist[c * n + i] = L;
    }
  }
  return MetricInstance::from_matrix(n, n, true, std::move(dist), /*validate=*/false);
}

inline MetricInstance generate_instance(InstanceKind kind, const GeneratorParams& p,
                                        std::uint64_t seed) {
  switch (kind) {
    case InstanceKind::euclidean_uniform:
      return euclidean_uniform(p.n, p.m, p.dim, seed, p.extent);
    case InstanceKind::euclidean_gaussian_clusters:
      return euclidean_gaussian_clusters(p.n, p.m, p.dim, p.clusters, p.spread, seed);
    case InstanceKind::line: {
      if (!p.positions.empty()) return line_instance(p.positions, p.candidate_positions);
      Rng rng(seed);
      std::vector<double> xs(p.n), cs(p.m);
      for (auto& x : xs) x = p.extent * rng.uniform();
      for (auto& x : cs) x = p.extent * rng.uniform();
      return line_instance(xs, cs);
    }
    case InstanceKind::explicit_matrix:
      return explicit_matrix(p.matrix, p.colocated);
    case InstanceKind::fixture_thm1_d1:
      return fixture_thm1_d1();
    case InstanceKind::fixture_thm1_d2:
      return fixture_thm1_d2();
    case InstanceKind::fixture_dsample_bad:
      return fixture_dsample_bad(p.tau, p.L, p.eps);
  }
  throw ParameterError("generate_instance: unhandled kind");
}

}  // namespace topl

#endif  // TOPL_GENERATORS_HPP
