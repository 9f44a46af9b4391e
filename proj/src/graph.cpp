#include "secdf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>


#include "secdf/error.hpp"

namespace secdf {

SensorGraph::SensorGraph(int n_sensors, const std::vector<Edge>& edges)
    : n_(n_sensors), adjacency_(n_sensors > 0 ? n_sensors : 0) {
  if (n_sensors <= 0) throw Error(ErrorCode::InvalidGraph, "graph needs at least one sensor");
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_)
      throw Error(ErrorCode::InvalidGraph, "edge endpoint out of range");
    if (a == b) throw Error(ErrorCode::InvalidGraph, "self loop at sensor " + std::to_string(a + 1));
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

SensorGraph SensorGraph::from_one_based(int n_sensors, const std::vector<Edge>& edges) {
  std::vector<Edge> shifted;
  shifted.reserve(edges.size());
  for (auto [a, b] : edges) shifted.emplace_back(a - 1, b - 1);
  return SensorGraph(n_sensors, shifted);
}

Matrix laplacian(const SensorGraph& g) {
  Matrix l = Matrix::Zero(g.size(), g.size());
  for (auto [a, b] : g.edges()) {
    l(a, b) -= 1.0;
    l(b, a) -= 1.0;
    l(a, a) += 1.0;
    l(b, b) += 1.0;
  }
  return l;
}

bool reaches_all(const SensorGraph& g) {
  std::vector<bool> seen(g.size(), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == g.size();
}

namespace {

double second_eigenvalue(const Vector& ev) { return ev.size() > 1 ? ev(1) : 0.0; }

}  // namespace

bool is_connected(const SensorGraph& g) {
  const bool traversal = reaches_all(g);
  if (g.size() == 1) return traversal;
  const bool spectral = second_eigenvalue(symmetric_eigenvalues(laplacian(g))) > kTolEig;
  if (traversal != spectral)
    throw Error(ErrorCode::SpectralDisagreement,
                "breadth-first search and lambda2 disagree on connectivity");
  return traversal;
}

SpectralParams spectral_params(const SensorGraph& g) {
  if (g.size() == 1) {
    // one node is already in agreement; rounds are no-ops
    SpectralParams one;
    one.lambda2 = 0.0;
    one.lambda_max = 0.0;
    one.alpha = 1.0;
    one.gamma = 0.0;
    return one;
  }
  if (g.size() < 1) throw Error(ErrorCode::NotConnected, "empty sensor graph");
  Vector ev = symmetric_eigenvalues(laplacian(g));
  SpectralParams sp;
  sp.lambda2 = second_eigenvalue(ev);
  sp.lambda_max = ev(ev.size() - 1);
  if (sp.lambda2 <= kTolEig)
    throw Error(ErrorCode::NotConnected, "lambda2 = " + std::to_string(sp.lambda2));
  sp.alpha = 2.0 / (sp.lambda2 + sp.lambda_max);
  sp.gamma = (sp.lambda_max - sp.lambda2) / (sp.lambda_max + sp.lambda2);
  // the complete graph is exactly gamma = 0; keep rounding noise from making it negative
  sp.gamma = std::max(0.0, sp.gamma);
  return sp;
}

int min_consensus_steps(double gamma, double norm_A) {
  if (gamma < 0.0 || gamma >= 1.0)
    throw Error(ErrorCode::InvalidArgument, "gamma must lie in [0, 1)");
  if (norm_A <= 1.0 || gamma == 0.0) return 1;
  int L = 1;
  double factor = gamma;
  while (norm_A * factor >= 1.0) {
    ++L;
    factor *= gamma;
  }
  return L;
}

int min_consensus_steps(const SensorGraph& g, double norm_A) {
  return min_consensus_steps(spectral_params(g).gamma, norm_A);
}

int diameter(const SensorGraph& g) {
  int best = 0;
  for (int src = 0; src < g.size(); ++src) {
    std::vector<int> dist(g.size(), -1);
    std::queue<int> frontier;
    dist[src] = 0;
    frontier.push(src);
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int v : g.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          frontier.push(v);
        }
      }
    }
    for (int d : dist) {
      if (d < 0) return -1;
      best = std::max(best, d);
    }
  }
  return best;
}

SensorGraph fig1_graph() {
  static const std::vector<Edge> edges = {
      {1, 2},   {1, 7},   {2, 8},   {2, 9},   {3, 4},   {3, 9},   {3, 10},  {4, 11},
      {5, 10},  {5, 12},  {6, 12},  {7, 14},  {8, 15},  {9, 14},  {9, 16},  {11, 16},
      {11, 17}, {11, 18}, {13, 19}, {13, 20}, {14, 20}, {15, 22}, {16, 22}, {17, 12},
      {17, 23}, {18, 24}, {19, 26}, {19, 25}, {20, 21}, {20, 27}, {21, 26}, {21, 16},
      {22, 28}, {22, 23}, {22, 29}, {24, 29}, {24, 30}, {27, 28}};
  return SensorGraph::from_one_based(30, edges);
}

SensorGraph complete_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return SensorGraph(n, e);
}

SensorGraph path_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return SensorGraph(n, e);
}

SensorGraph star_graph(int n) {
  std::vector<Edge> e;
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return SensorGraph(n, e);
}

SensorGraph ring_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (n > 2) e.emplace_back(n - 1, 0);
  return SensorGraph(n, e);
}

SensorGraph named_graph(const std::string& name, int n) {
  if (name == "fig1") {
    if (n != 0 && n != 30) throw Error(ErrorCode::InvalidGraph, "fig1 has exactly 30 sensors");
    return fig1_graph();
  }
  if (n <= 0) throw Error(ErrorCode::InvalidGraph, "named graph '" + name + "' needs n > 0");
  if (name == "complete") return complete_graph(n);
  if (name == "path") return path_graph(n);
  if (name == "star") return star_graph(n);
  if (name == "ring") return ring_graph(n);
  throw Error(ErrorCode::InvalidGraph, "unknown named graph '" + name + "'");
}

SensorGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidGraph, "graph must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "n" && it.key() != "edges" && it.key() != "named")
      throw Error(ErrorCode::InvalidGraph, "unknown graph key '" + it.key() + "'");
  if (j.contains("named")) {
    if (j.contains("edges"))
      throw Error(ErrorCode::InvalidGraph, "give either 'named' or 'edges', not both");
    return named_graph(j.at("named").get<std::string>(), j.value("n", 0));
  }
  if (!j.contains("n") || !j.contains("edges"))
    throw Error(ErrorCode::InvalidGraph, "graph needs 'n' and 'edges'");
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::InvalidGraph, "edge must be [i, j]");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return SensorGraph::from_one_based(j.at("n").get<int>(), edges);
}

nlohmann::json graph_to_json(const SensorGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a + 1, b + 1});
  return {{"n", g.size()}, {"edges", edges}};
}

}  // namespace secdf
