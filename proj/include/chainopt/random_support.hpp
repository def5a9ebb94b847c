#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "chainopt/analysis.hpp"
#include "chainopt/graph.hpp"

namespace chainopt {

// Random edge-failure model over a graph's risky edges. Each risky edge
// fails independently with its probability, unless correlation is enabled
// (one-factor Gaussian copula with loading rho) or reciprocal coupling ties
// an edge to its reverse (both fail together; preserves reversibility of
// the realized chain under symmetric weights).
struct FailureModel {
  std::vector<double> fail_prob;  // per risky edge, aligned with Graph::risky
  bool couple_reciprocal = false;
  bool correlated = false;
  double rho = 0.0;  // common-factor loading in [0, 1)

  bool empty() const { return fail_prob.empty(); }
};

// survives[k] = 1 if risky edge k (index into Graph::risky) is present.
struct Realization {
  std::vector<std::uint8_t> survives;
};

// Failure units: groups of risky-edge slots that fail together. Singletons
// unless reciprocal coupling merges an edge with its (risky) reverse.
// Coupled units must have equal failure probabilities.
std::vector<std::vector<int>> failure_units(const Graph& g, const FailureModel& fm);

// Removes failed edges from P and renormalizes each affected row over the
// surviving support. Throws NumericalError if a row loses all its mass.
Matrix redistribute(const Matrix& P, const Graph& g, const FailureModel& fm,
                    const Realization& r);

// Probability of an exact survival pattern under independent units.
// Correlated models have no product form; throws std::invalid_argument.
double realization_probability(const Graph& g, const FailureModel& fm,
                               const Realization& r);

// Draws `count` realizations. Independent and coupled models use one
// uniform per unit; the correlated model uses a shared standard normal
// factor per realization plus one idiosyncratic normal per unit, failing a
// unit when the latent value falls below the probability quantile.
std::vector<Realization> sample_realizations(const Graph& g, const FailureModel& fm,
                                             int count, std::mt19937_64& rng);

// Exact expectation of the connectivity objective by enumerating all unit
// survival patterns. Guarded: at most `max_units` units (default 20), and
// only product-form (non-correlated) models.
double expected_objective(const Graph& g, const Vector& x, const ConnectivityWeights& C,
                          const FailureModel& fm, int max_units = 20);

// Monte Carlo counterpart over a fixed batch of realizations; reusing one
// batch at two evaluation points gives common-random-number differences.
double sample_average_objective(const Matrix& P, const Graph& g,
                                const ConnectivityWeights& C, const FailureModel& fm,
                                const std::vector<Realization>& batch);

}  // namespace chainopt
