#include "chainopt/constraints.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "chainopt/errors.hpp"

namespace chainopt {

int rref_inplace(Matrix& M, int pivot_cols, double tol) {
  const int rows = static_cast<int>(M.rows());
  int rank = 0;
  for (int col = 0; col < pivot_cols && rank < rows; ++col) {
    int best = rank;
    double best_abs = std::abs(M(rank, col));
    for (int r = rank + 1; r < rows; ++r) {
      double v = std::abs(M(r, col));
      if (v > best_abs) {
        best = r;
        best_abs = v;
      }
    }
    if (best_abs <= tol) {
      M.block(rank, col, rows - rank, 1).setZero();
      continue;
    }
    M.row(rank).swap(M.row(best));
    M.row(rank) /= M(rank, col);
    for (int r = 0; r < rows; ++r) {
      if (r == rank) continue;
      double factor = M(r, col);
      if (factor != 0.0) M.row(r) -= factor * M.row(rank);
    }
    ++rank;
  }
  return rank;
}

Matrix nullspace_basis(const Matrix& A, double rel_tol) {
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  double cutoff = sigma.size() > 0 ? rel_tol * sigma[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma[i] > cutoff) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

namespace {

// Least-norm solution of a full-row-rank-or-reduced system via complete
// orthogonal decomposition.
Vector least_norm_solution(const Matrix& A, const Vector& b) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  return cod.solve(b);
}

ConstraintSystem finish_system(Matrix A, Vector b) {
  ConstraintSystem sys;
  sys.basis = nullspace_basis(A);
  sys.rank = static_cast<int>(A.cols() - sys.basis.cols());
  sys.least_norm = least_norm_solution(A, b);
  // COD returns a least-squares point even for inconsistent systems; an
  // exact residual check separates those (e.g. pair constraints on a star).
  if ((A * sys.least_norm - b).cwiseAbs().maxCoeff() > 1e-8)
    throw InfeasibleError("equality constraints are inconsistent");
  sys.A = std::move(A);
  sys.b = std::move(b);
  return sys;
}

}  // namespace

ConstraintSystem equality_system(const Graph& g) {
  Matrix A = Matrix::Zero(g.nodes, g.edge_count());
  for (int i = 0; i < g.nodes; ++i)
    for (int e : g.out_edges[i]) A(i, e) = 1.0;
  return finish_system(std::move(A), Vector::Ones(g.nodes));
}

ConstraintSystem stationary_system(const Graph& g, const Vector& target) {
  if (target.size() != g.nodes)
    throw std::invalid_argument("target distribution length does not match node count");
  if (target.minCoeff() <= 0.0 || std::abs(target.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("target distribution must be positive and sum to one");

  const int E = g.edge_count();
  // Block sums s_i = 1 turn the stationarity conditions
  // sum_i target_i x_(i,j) / s_i = target_j into linear rows.
  Matrix M = Matrix::Zero(2 * g.nodes, E + 1);
  for (int i = 0; i < g.nodes; ++i) {
    for (int e : g.out_edges[i]) M(i, e) = 1.0;
    M(i, E) = 1.0;
  }
  for (int e = 0; e < E; ++e) M(g.nodes + g.edges[e].to, e) = target[g.edges[e].from];
  for (int j = 0; j < g.nodes; ++j) M(g.nodes + j, E) = target[j];

  int rank = rref_inplace(M, E);
  // A row reduced to (0 ... 0 | nonzero) certifies inconsistency.
  for (int r = rank; r < M.rows(); ++r) {
    if (std::abs(M(r, E)) > 1e-8)
      throw InfeasibleError("no weight vector realizes this stationary distribution");
  }
  return finish_system(M.topLeftCorner(rank, E), M.col(E).head(rank));
}

std::vector<ReciprocalPair> reciprocal_pairs(const Graph& g) {
  std::vector<ReciprocalPair> pairs;
  for (int e = 0; e < g.edge_count(); ++e) {
    int r = g.reverse_edge[e];
    if (r < 0) continue;
    const Edge& edge = g.edges[e];
    if (edge.from > edge.to) continue;  // count each pair once; keeps self-loops
    pairs.push_back({edge.from, edge.to, e, r});
  }
  return pairs;
}

Vector PairSpace::expand(const Vector& y) const {
  if (y.size() != dim()) throw std::invalid_argument("pair vector length mismatch");
  Vector x = Vector::Zero(edge_count);
  for (int p = 0; p < dim(); ++p) {
    x[pairs[p].forward] = y[p];
    x[pairs[p].backward] = y[p];
  }
  return x;
}

Vector PairSpace::restrict_to(const Vector& x) const {
  if (x.size() != edge_count) throw std::invalid_argument("edge vector length mismatch");
  Vector y(dim());
  for (int p = 0; p < dim(); ++p)
    y[p] = 0.5 * (x[pairs[p].forward] + x[pairs[p].backward]);
  return y;
}

PairSpace pair_space(const Graph& g) {
  PairSpace ps;
  ps.pairs = reciprocal_pairs(g);
  ps.edge_count = g.edge_count();
  return ps;
}

ConstraintSystem pair_equality_system(const Graph& g, const PairSpace& ps) {
  if (ps.pairs.empty()) throw InfeasibleError("graph has no reciprocal edge pairs");
  std::vector<char> mask(g.edge_count(), 0);
  for (const auto& p : ps.pairs) {
    mask[p.forward] = 1;
    mask[p.backward] = 1;
  }
  if (!is_strongly_connected(g, mask))
    throw InfeasibleError("reciprocal pairs do not form a strongly connected subgraph");

  Matrix A = Matrix::Zero(g.nodes, ps.dim());
  for (int p = 0; p < ps.dim(); ++p) {
    A(ps.pairs[p].a, p) += 1.0;  // self-loop: single entry, counted once
    if (ps.pairs[p].b != ps.pairs[p].a) A(ps.pairs[p].b, p) += 1.0;
  }
  return finish_system(std::move(A), Vector::Ones(g.nodes));
}

}  // namespace chainopt
