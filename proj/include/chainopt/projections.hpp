#pragma once

#include "chainopt/constraints.hpp"
#include "chainopt/graph.hpp"

namespace chainopt {

// Euclidean projection onto {w : w >= eps, sum(w) = 1} by sorting and
// thresholding. Requires eps * n <= 1 (InfeasibleError otherwise).
Vector project_scaled_simplex(const Vector& v, double eps);

// Projection onto the box [lo, hi] elementwise.
Vector project_box(const Vector& v, double lo, double hi);

// Projection onto the affine set {x : A x = b} using the system's
// orthonormal null-space basis: least_norm + B B' (v - least_norm).
Vector project_affine(const Vector& v, const ConstraintSystem& sys);

// Independent per-node scaled-simplex projections over the graph's blocks.
Vector project_blockwise_simplex(const Graph& g, const Vector& v, double eps);

struct DykstraOptions {
  double tol = 1e-10;   // iterate and box correction must both settle below this
  int max_iter = 10000; // hitting the cap returns the best iterate + a flag
};

struct DykstraResult {
  Vector point;
  int iterations = 0;
  bool converged = true;
  double residual = 0.0;  // worst box violation of the returned point
};

// Dykstra's alternating projection onto (box [lo, hi]) intersected with
// {A x = b}. The correction term is carried on the box step only; the
// affine step is exact. Converges to the Euclidean projection when the
// intersection is nonempty; an empty intersection exhausts the iteration
// cap with the residual reporting the leftover box violation.
DykstraResult dykstra_project(const Vector& v, const ConstraintSystem& sys,
                              double lo, double hi,
                              const DykstraOptions& opts = {});

}  // namespace chainopt
