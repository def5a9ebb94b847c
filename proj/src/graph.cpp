#include "chainopt/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace chainopt {

namespace {

std::string edge_str(const Edge& e) {
  return "(" + std::to_string(e.from + 1) + ", " + std::to_string(e.to + 1) + ")";
}

}  // namespace

std::optional<int> Graph::find_edge(int from, int to) const {
  Edge key{from, to};
  auto it = std::lower_bound(edges.begin(), edges.end(), key);
  if (it == edges.end() || !(*it == key)) return std::nullopt;
  return static_cast<int>(it - edges.begin());
}

bool is_strongly_connected(const Graph& g, const std::vector<char>& mask) {
  if (g.nodes == 0) return false;
  auto reach = [&](bool forward) {
    std::vector<char> seen(g.nodes, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int e = 0; e < g.edge_count(); ++e) {
        if (!mask.empty() && !mask[e]) continue;
        int a = forward ? g.edges[e].from : g.edges[e].to;
        int b = forward ? g.edges[e].to : g.edges[e].from;
        if (a == u && !seen[b]) {
          seen[b] = 1;
          ++count;
          stack.push_back(b);
        }
      }
    }
    return count == g.nodes;
  };
  return reach(true) && reach(false);
}

Graph make_graph(int nodes, std::vector<Edge> edges, std::vector<int> risky) {
  if (nodes < 1) throw std::invalid_argument("graph needs at least one node");
  if (edges.empty()) throw std::invalid_argument("graph has no edges");

  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= nodes || e.to < 0 || e.to >= nodes)
      throw std::invalid_argument("edge " + edge_str(e) + " endpoint out of range");
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] == edges[i - 1])
      throw std::invalid_argument("duplicate edge " + edge_str(edges[i]));
  }

  Graph g;
  g.nodes = nodes;
  g.edges = std::move(edges);

  g.out_edges.assign(nodes, {});
  for (int e = 0; e < g.edge_count(); ++e) g.out_edges[g.edges[e].from].push_back(e);
  for (int i = 0; i < nodes; ++i) {
    if (g.out_edges[i].empty())
      throw std::invalid_argument("node " + std::to_string(i + 1) + " has no outgoing edge");
  }

  g.reverse_edge.assign(g.edge_count(), -1);
  for (int e = 0; e < g.edge_count(); ++e) {
    auto rev = g.find_edge(g.edges[e].to, g.edges[e].from);
    g.reverse_edge[e] = rev ? *rev : -1;
  }

  std::sort(risky.begin(), risky.end());
  for (std::size_t i = 0; i < risky.size(); ++i) {
    if (risky[i] < 0 || risky[i] >= g.edge_count())
      throw std::invalid_argument("risky edge id out of range");
    if (i > 0 && risky[i] == risky[i - 1])
      throw std::invalid_argument("risky edge listed twice");
  }
  g.risky = std::move(risky);

  std::vector<char> backbone(g.edge_count(), 1);
  for (int e : g.risky) backbone[e] = 0;
  if (!is_strongly_connected(g, backbone))
    throw std::invalid_argument(
        g.risky.empty() ? "graph is not strongly connected"
                        : "backbone (non-risky edges) is not strongly connected");
  return g;
}

Matrix transition_matrix(const Graph& g, const Vector& x) {
  if (x.size() != g.edge_count())
    throw std::invalid_argument("weight vector length does not match edge count");
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!(x[e] >= 0.0))
      throw std::invalid_argument("negative weight on edge " + edge_str(g.edges[e]));
  }
  Matrix P = Matrix::Zero(g.nodes, g.nodes);
  for (int i = 0; i < g.nodes; ++i) {
    double s = 0.0;
    for (int e : g.out_edges[i]) s += x[e];
    if (s <= 0.0)
      throw std::invalid_argument("node " + std::to_string(i + 1) +
                                  " has zero total outgoing weight");
    for (int e : g.out_edges[i]) P(i, g.edges[e].to) = x[e] / s;
  }
  return P;
}

Vector uniform_weights(const Graph& g) { return Vector::Ones(g.edge_count()); }

bool in_weight_set(const Graph& g, const Vector& x, double eps, double tol) {
  if (x.size() != g.edge_count()) return false;
  for (int e = 0; e < g.edge_count(); ++e)
    if (x[e] < eps - tol) return false;
  for (int i = 0; i < g.nodes; ++i) {
    double s = 0.0;
    for (int e : g.out_edges[i]) s += x[e];
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

bool is_symmetric_weights(const Graph& g, const Vector& x, double tol) {
  if (x.size() != g.edge_count()) return false;
  for (int e = 0; e < g.edge_count(); ++e) {
    int r = g.reverse_edge[e];
    if (r < 0) {
      if (std::abs(x[e]) > tol) return false;
    } else if (std::abs(x[e] - x[r]) > tol) {
      return false;
    }
  }
  return true;
}

bool check_reversible(const Matrix& P, const Vector& pi, double tol) {
  for (int i = 0; i < P.rows(); ++i)
    for (int j = 0; j < P.cols(); ++j)
      if (std::abs(pi[i] * P(i, j) - pi[j] * P(j, i)) > tol) return false;
  return true;
}

}  // namespace chainopt
