#pragma once
#ifndef TOPL_IO_HPP
#define TOPL_IO_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "topl/instance.hpp"

namespace topl {

/// {"n", "m", "colocated", "points": [...]} when coordinates are known (agents first,
/// then candidates if not colocated), {"n", "m", "colocated", "matrix": [[...]]} otherwise.
inline nlohmann::json instance_to_json(const MetricInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.num_agents();
  j["m"] = inst.num_candidates();
  j["colocated"] = inst.colocated();
  if (inst.has_points()) {
    auto pts = nlohmann::json::array();
    for (const auto& p : inst.agent_points()) pts.push_back(p);
    for (const auto& p : inst.candidate_points()) pts.push_back(p);
    j["points"] = std::move(pts);
  } else {
    auto rows = nlohmann::json::array();
    for (AgentId i = 0; i < inst.num_agents(); ++i) {
      const auto r = inst.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["matrix"] = std::move(rows);
  }
  return j;
}

inline MetricInstance instance_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto m = j.at("m").get<std::size_t>();
    const bool colocated = j.at("colocated").get<bool>();
    if (j.contains("points")) {
      auto pts = j.at("points").get<std::vector<Point>>();
      const std::size_t expected = colocated ? n : n + m;
      require(pts.size() == expected, "instance file: expected " + std::to_string(expected) + " points");
      require(!colocated || n == m, "instance file: colocated instance needs n == m");
      std::vector<Point> cands;
      if (!colocated) cands.assign(pts.begin() + static_cast<std::ptrdiff_t>(n), pts.end());
      pts.resize(n);
      return MetricInstance::from_points(std::move(pts), std::move(cands));
    }
    const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    require(rows.size() == n, "instance file: matrix must have n rows");
    std::vector<double> flat;
    flat.reserve(n * m);
    for (const auto& r : rows) {
      require(r.size() == m, "instance file: matrix rows must have m entries");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return MetricInstance::from_matrix(n, m, colocated, std::move(flat), /*validate=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("instance file: ") + e.what());
  }
}

inline MetricInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open instance file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("instance file " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

inline void save_instance(const MetricInstance& inst, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write instance file " + path);
  out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace topl

#endif  // TOPL_IO_HPP
