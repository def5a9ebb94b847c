#pragma once

#include "chainopt/analysis.hpp"
#include "chainopt/constraints.hpp"

namespace chainopt {

// Directional derivatives of the chain analytics along a weight
// perturbation, propagated through the row normalization.
struct DirectionalDerivatives {
  Matrix dP;
  Vector dpi;
  Matrix dprojector;
  Matrix ddeviation;
  Matrix dmfpt;
};

// d/dt P(x + t dx) at t = 0. dx need not be feasible; block sums of x must
// be positive.
Matrix transition_direction(const Graph& g, const Vector& x, const Vector& dx);

// Chain rule through pi, the projector, the deviation matrix and the mean
// first passage times, given dP. Uses dpi' = pi' dP D and
// dD = -dProjector * D + D dP D.
DirectionalDerivatives directional_derivatives(const ChainAnalytics& a, const Matrix& dP);

// Derivative of S = sum C(i,j) M(i,j) along dP. In Kemeny mode C = pi pi'
// moves with the chain, contributing sum (dpi_i pi_j + pi_i dpi_j) M(i,j).
double objective_directional_derivative(const ChainAnalytics& a,
                                        const DirectionalDerivatives& d,
                                        const ConnectivityWeights& C);

// Steepest feasible descent direction at x_var (variable-space coordinates:
// edge weights, or pair weights when `ps` is given). Collects the derivative
// along every basis column and returns the negative gradient in the
// feasible subspace, plus its Euclidean normalization (zero when the raw
// direction vanishes).
struct DescentDirection {
  Vector raw;           // variable space
  Vector unit;          // raw / ||raw||, or zero
  Vector coefficients;  // per-basis-column derivatives of S
};

DescentDirection steepest_feasible_descent(const Graph& g, const Vector& x_var,
                                           const ConnectivityWeights& C,
                                           const ConstraintSystem& sys,
                                           const PairSpace* ps = nullptr);

}  // namespace chainopt
