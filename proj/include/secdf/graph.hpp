#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "secdf/linalg.hpp"

namespace secdf {

using Edge = std::pair<int, int>;

// Undirected graph on sensors 0..N-1. Edges are stored once as (lo, hi),
// sorted; duplicate or reversed copies collapse.
class SensorGraph {
 public:
  SensorGraph(int n_sensors, const std::vector<Edge>& edges);

  // Edge list using the 1-based indices of graph files.
  static SensorGraph from_one_based(int n_sensors, const std::vector<Edge>& edges);

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

struct SpectralParams {
  double lambda2 = 0.0;
  double lambda_max = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
};

Matrix laplacian(const SensorGraph& g);
bool reaches_all(const SensorGraph& g);
bool is_connected(const SensorGraph& g);
SpectralParams spectral_params(const SensorGraph& g);
int min_consensus_steps(double gamma, double norm_A);
int min_consensus_steps(const SensorGraph& g, double norm_A);
// Longest shortest path; -1 when disconnected.
int diameter(const SensorGraph& g);

SensorGraph fig1_graph();
SensorGraph complete_graph(int n);
SensorGraph path_graph(int n);
// Node 0 is the hub.
SensorGraph star_graph(int n);
SensorGraph ring_graph(int n);
SensorGraph named_graph(const std::string& name, int n);

// {"n": N, "edges": [[i, j], ...]} with 1-based indices, or {"named": ..., "n": N}.
SensorGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const SensorGraph& g);

}  // namespace secdf
