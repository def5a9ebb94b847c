#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace chainopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  int from = 0;
  int to = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// A weighted digraph with a fixed edge ordering. Edges are stored sorted
// lexicographically by (from, to); all weight vectors in the library are
// indexed by position in `edges`. `risky` lists edge ids that may fail at
// runtime; the backbone (all other edges) must stay strongly connected so
// every failure pattern leaves a usable chain.
struct Graph {
  int nodes = 0;
  std::vector<Edge> edges;
  std::vector<int> risky;

  // out_edges[i] = ids of edges leaving i, ascending.
  std::vector<std::vector<int>> out_edges;
  // reverse_edge[e] = id of the opposite-direction edge, or -1.
  std::vector<int> reverse_edge;

  int edge_count() const { return static_cast<int>(edges.size()); }
  std::optional<int> find_edge(int from, int to) const;
};

// Validates and indexes a graph. Throws std::invalid_argument on duplicate
// edges, endpoints out of range, nodes without outgoing edges, unknown or
// repeated risky ids, or a backbone that is not strongly connected.
Graph make_graph(int nodes, std::vector<Edge> edges, std::vector<int> risky = {});

// Strong connectivity restricted to edges with mask[e] != 0 (empty mask =
// all edges).
bool is_strongly_connected(const Graph& g, const std::vector<char>& mask = {});

// Row-normalizes weights into a transition matrix: P(i,j) = x_e / sum of x
// over edges leaving i. Requires x >= 0 elementwise and a positive sum in
// every block; throws std::invalid_argument otherwise.
Matrix transition_matrix(const Graph& g, const Vector& x);

// All weights equal to one.
Vector uniform_weights(const Graph& g);

// Membership test for the feasible weight set: per-node block sums equal to
// one and every weight at least eps, both within tol.
bool in_weight_set(const Graph& g, const Vector& x, double eps, double tol = 1e-9);

// True when x assigns equal weight to every edge and its reverse. Edges
// without a reverse must carry weight <= tol.
bool is_symmetric_weights(const Graph& g, const Vector& x, double tol = 1e-9);

// Detailed balance check: pi_i P(i,j) == pi_j P(j,i) within tol.
bool check_reversible(const Matrix& P, const Vector& pi, double tol = 1e-9);

}  // namespace chainopt
