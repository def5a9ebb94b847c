#pragma once

#include "chainopt/graph.hpp"

namespace chainopt {

// Linear equality system A x = b together with an orthonormal basis of the
// null space of A and the least-norm solution. Feasible perturbations of a
// weight vector live in span(basis); feasible points are least_norm +
// basis * u for reduced coordinates u.
struct ConstraintSystem {
  Matrix A;
  Vector b;
  Matrix basis;       // columns orthonormal, A * basis = 0
  Vector least_norm;  // min-norm solution of A x = b
  int rank = 0;

  int dim() const { return static_cast<int>(basis.cols()); }
};

// Reduces M in place to reduced row echelon form with partial pivoting.
// Columns beyond `pivot_cols` never host a pivot (pass the width of A when M
// is an augmented [A | b]). Returns the rank; tol is the pivot threshold.
int rref_inplace(Matrix& M, int pivot_cols, double tol = 1e-10);

// Orthonormal null-space basis of A via SVD. Singular values below
// rel_tol * sigma_max count as zero.
Matrix nullspace_basis(const Matrix& A, double rel_tol = 1e-10);

// Per-node normalization constraints: block sums of outgoing weights equal
// one. Rank is always the node count.
ConstraintSystem equality_system(const Graph& g);

// Normalization plus stationarity of a prescribed target distribution:
// sum_i target_i x_(i,j) / s_i = target_j with block sums s_i = 1, which is
// linear in x. Rows are jointly reduced; an inconsistent system throws
// InfeasibleError. `target` must be a positive distribution.
ConstraintSystem stationary_system(const Graph& g, const Vector& target);

// Reciprocal pair (i, j), i <= j, with the edge ids of both directions.
// Self-loops pair with themselves (forward == backward).
struct ReciprocalPair {
  int a = 0;        // smaller endpoint
  int b = 0;        // larger endpoint
  int forward = 0;  // edge id a -> b
  int backward = 0; // edge id b -> a
};

// All reciprocal pairs of g, ordered by (a, b). Edges without a reverse are
// simply not part of any pair; symmetric weight vectors put zero on them.
std::vector<ReciprocalPair> reciprocal_pairs(const Graph& g);

// Maps between pair space (one variable per reciprocal pair) and edge
// space (zero on unpaired edges).
struct PairSpace {
  std::vector<ReciprocalPair> pairs;
  int edge_count = 0;

  int dim() const { return static_cast<int>(pairs.size()); }
  Vector expand(const Vector& y) const;    // pair -> edge space
  Vector restrict_to(const Vector& x) const;  // edge -> pair space (averages)
};

PairSpace pair_space(const Graph& g);

// Block-sum constraints expressed over pair variables: for each node, the
// pair weights incident to it sum to one. Symmetric weight vectors are
// exactly least_norm + basis * u with all pair weights positive.
ConstraintSystem pair_equality_system(const Graph& g, const PairSpace& ps);

}  // namespace chainopt
