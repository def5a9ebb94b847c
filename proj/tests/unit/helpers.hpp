#pragma once

#include <string>
#include <vector>

#include "chainopt/graph.hpp"
#include "chainopt/projections.hpp"
#include "chainopt/rng.hpp"

namespace chainopt::testing {

inline std::string data_path(const std::string& name) {
  return std::string(CHAINOPT_DATA_DIR) + "/" + name;
}

// Two nodes, both self-loops present: the smallest graph with a
// two-dimensional feasible direction space.
inline Graph two_node_graph() {
  return make_graph(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

inline Graph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) edges.push_back({i, j});
  return make_graph(n, edges);
}

inline Graph cycle_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return make_graph(n, edges);
}

inline Graph undirected_cycle_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.push_back({i, (i + 1) % n});
    edges.push_back({(i + 1) % n, i});
  }
  return make_graph(n, edges);
}

// The Petersen graph: outer 5-cycle, inner pentagram, spokes. All edges
// bidirectional.
inline Graph petersen_graph() {
  std::vector<Edge> undirected = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                                  {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5},
                                  {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}};
  std::vector<Edge> edges;
  for (const Edge& e : undirected) {
    edges.push_back(e);
    edges.push_back({e.to, e.from});
  }
  return make_graph(10, edges);
}

inline Matrix random_chain_matrix(std::mt19937_64& rng, int n) {
  Matrix P(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      P(i, j) = 0.05 + u01(rng);
      s += P(i, j);
    }
    P.row(i) /= s;
  }
  return P;
}

inline Vector random_feasible_weights(const Graph& g, std::mt19937_64& rng,
                                      double eps = 1e-3) {
  Vector x(g.edge_count());
  for (int e = 0; e < x.size(); ++e) x[e] = 0.05 + u01(rng);
  return project_blockwise_simplex(g, x, eps);
}

}  // namespace chainopt::testing
