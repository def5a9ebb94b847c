#pragma once

#include <functional>
#include <optional>

#include "chainopt/constraints.hpp"
#include "chainopt/graph.hpp"

namespace chainopt {

// Independent checks used by the test suites and the `verify` CLI command.
// Everything here recomputes quantities from first principles, bypassing
// the production code paths it is used to validate.

// Mean first passage times by first-step analysis: for each target j solve
// (I - P_without_column_j) m = 1 and recover the return time from one extra
// step. O(n^4); intended for small test chains.
Matrix mfpt_first_step(const Matrix& P);

// Central finite difference of a scalar function along a direction.
double finite_difference_directional(const std::function<double(const Vector&)>& f,
                                     const Vector& x, const Vector& direction,
                                     double h);

// Backtracking search for a directed Hamiltonian cycle, returned as a node
// sequence of length `nodes` starting at 0 (the closing edge back to the
// start exists). Guarded to 16 nodes.
std::optional<std::vector<int>> hamiltonian_cycle_search(const Graph& g);

// Closed forms for unit-rate tours and their reversible counterparts: a
// deterministic Hamiltonian tour on n nodes scores n^2 (n - 1) / 2, while
// any reversible chain scores at least n (n - 1)^2.
double hamiltonian_tour_objective(int nodes);
double reversible_objective_lower_bound(int nodes);

// Exact expectation of the simultaneous-perturbation gradient estimate by
// enumerating all sign patterns. Guarded to 20 basis columns.
Vector exhaustive_spsa_expectation(const std::function<double(const Vector&)>& f,
                                   const Vector& x, const Matrix& basis, double eta);

// Euclidean projection onto {w >= eps, sum(w) = 1} by brute-force active-set
// enumeration over all support patterns. Exponential; for small n only.
Vector simplex_projection_active_set(const Vector& v, double eps);

// Euclidean projection onto {A x = b, lo <= x <= hi} by active-set
// enumeration over box faces, solving an equality-constrained least-squares
// problem per pattern and checking KKT multiplier signs. Small n only.
Vector box_affine_projection_active_set(const Vector& v, const Matrix& A,
                                        const Vector& b, double lo, double hi);

}  // namespace chainopt
