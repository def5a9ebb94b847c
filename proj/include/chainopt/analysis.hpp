#pragma once

#include "chainopt/graph.hpp"

namespace chainopt {

// Stationary distribution, ergodic projector, deviation matrix and mean
// first passage times of an irreducible chain. Invariants: D * 1 = 0,
// pi' * D = 0, M(i,i) = 1 / pi(i).
struct ChainAnalytics {
  Matrix P;
  Vector pi;
  Matrix projector;  // 1 * pi'
  Matrix deviation;  // (I - P + projector)^{-1} - projector
  Matrix mfpt;       // M(i,j) = expected steps from i to j (return time on the diagonal)
};

// Solves pi' P = pi', sum(pi) = 1. Throws std::invalid_argument when P is
// not row-stochastic, NumericalError when the solution is not strictly
// positive (reducible or numerically singular chain).
Vector stationary_distribution(const Matrix& P);

// Deviation matrix for a given (P, pi) pair.
Matrix deviation_matrix(const Matrix& P, const Vector& pi);

// Mean first passage times from the deviation matrix.
Matrix mfpt_from_deviation(const Matrix& deviation, const Vector& pi);

// Full pipeline. Verifies the support of P is strongly connected first so
// failures surface as NumericalError instead of garbage output.
ChainAnalytics analyze_chain(const Matrix& P);

enum class ConnectivityMode {
  Unit,       // C = 1 1' - I: plain sum of off-diagonal passage times
  Kemeny,     // C = pi pi': Kemeny constant (depends on the current chain)
  TargetPi,   // C = target target' for a fixed reference distribution
  Custom,     // caller-supplied nonnegative weights
};

// Weighting scheme for the connectivity objective S = sum C(i,j) M(i,j).
struct ConnectivityWeights {
  ConnectivityMode mode = ConnectivityMode::Unit;
  Vector target;  // TargetPi mode
  Matrix custom;  // Custom mode

  static ConnectivityWeights unit();
  static ConnectivityWeights kemeny();
  static ConnectivityWeights target_pi(Vector target);
  static ConnectivityWeights custom_matrix(Matrix C);

  // Materializes C for a chain with stationary distribution pi.
  Matrix matrix(int nodes, const Vector& pi) const;
};

double connectivity_objective(const ChainAnalytics& a, const ConnectivityWeights& C);
double connectivity_objective(const Matrix& P, const ConnectivityWeights& C);

// Kemeny constant; equals trace(deviation) + 1.
double kemeny_constant(const Matrix& P);

// Pairwise effective resistance of a reversibly weighted graph, via the
// commute-time identity R(i,j) = (M(i,j) + M(j,i)) / (total weight).
// Requires symmetric weights; throws std::invalid_argument otherwise.
Matrix effective_resistance(const Graph& g, const Vector& x);
double effective_resistance_total(const Graph& g, const Vector& x);

}  // namespace chainopt
