#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainopt/analysis.hpp"
#include "chainopt/constraints.hpp"
#include "chainopt/random_support.hpp"

namespace chainopt {

enum class ConstraintMode {
  Simplex,     // per-node block sums = 1 (projection: blockwise simplex)
  Stationary,  // block sums = 1 and a pinned stationary distribution
  Symmetric,   // reciprocal pair weights, block sums = 1 (reversible chains)
};

enum class SupportMode {
  Fixed,   // exact objective on the full graph
  Random,  // sample-average objective over edge-failure realizations
  Online,  // one fresh realization per iteration (common across the pair)
};

struct SpsaConfig {
  // Gain sequences: step alpha / (alpha0 + k + 1)^gamma_alpha and
  // perturbation eta / (k + 1)^gamma_eta.
  double alpha = 1.0;
  double alpha0 = 1e5;
  double gamma_alpha = 0.602;  // must satisfy 1/2 < gamma_alpha <= 1
  double eta = 1e-8;
  double gamma_eta = 0.2;      // must satisfy gamma_eta > (1 - gamma_alpha) / 2

  double epsilon = 1e-4;       // weight floor of the feasible set
  double epsilon_decay = 0.0;  // optional: floor shrinks as epsilon / (k+1)^decay

  long iterations = 100000;      // hard cap K
  long checkpoint_every = 1000;  // l: averaging window anchor and check cadence
  double tolerance = 1e-3;       // stop when successive averaged objectives differ less

  double max_step_norm = 0.0;  // optional cap on ||gain * gradient step|| (0 = off)

  int restarts = 1;        // restart 0 starts uniform, others random interior
  std::uint64_t seed = 1;
  int threads = 1;

  int batch_size = 8;      // realizations per gradient estimate (Random mode)
  int eval_batch = 256;    // realizations per checkpoint objective (Random/Online)

  long sample_stride = 0;  // record every n-th iterate for diagnostics (0 = off)
  bool log_realizations = false;  // Online mode: keep per-iteration survival bits
};

// Optimization problem: graph + objective weighting + constraint space +
// support model. `target` is required in Stationary mode.
struct Problem {
  const Graph* graph = nullptr;
  ConnectivityWeights objective;
  ConstraintMode constraint = ConstraintMode::Simplex;
  Vector target;  // Stationary mode
  SupportMode support = SupportMode::Fixed;
  FailureModel failures;  // Random / Online modes
};

enum class StopReason {
  Converged,       // averaged objective stabilized within tolerance
  IterationLimit,  // hit the iteration cap
  EmptyBasis,      // no feasible directions: the start point is the answer
};

struct Checkpoint {
  long iteration = 0;
  double objective = 0.0;      // objective at the averaged iterate
  double gradient_norm = 0.0;  // last simultaneous-perturbation estimate
  double feasibility = 0.0;    // equality residual + floor violation of x_k
  double seconds = 0.0;        // wall clock since restart start (not in traces)
};

struct RestartResult {
  Vector variables;   // variable space (edge or pair weights)
  double objective = 0.0;
  StopReason stop = StopReason::IterationLimit;
  long iterations = 0;
  std::vector<Checkpoint> checkpoints;
  std::vector<Vector> samples;  // sample_stride diagnostics
  std::vector<std::pair<long, std::vector<std::uint8_t>>> realization_log;
};

struct OptimizeResult {
  Vector variables;       // best restart, variable space
  Vector edge_weights;    // same point expanded to edge space
  double objective = 0.0;
  StopReason stop = StopReason::IterationLimit;
  int best_restart = 0;
  long iterations = 0;    // iterations used by the best restart
  std::vector<Checkpoint> checkpoints;  // best restart's trace
  std::vector<double> restart_objectives;
  std::vector<RestartResult> restarts;
  int dykstra_warnings = 0;  // projections that hit the iteration cap
  int dimension = 0;         // feasible-direction count
};

// Validates the gain-sequence conditions (given the feasible dimension) and
// basic ranges; throws std::invalid_argument with a specific message.
void validate_config(const SpsaConfig& cfg, int dimension);

// Two-sided simultaneous-perturbation gradient step direction for a scalar
// function J evaluated at v +- eta * B * delta:
// (J(minus) - J(plus)) / (2 eta) * B * delta.
Vector spsa_direction(const Vector& bdelta, double j_plus, double j_minus, double eta);

// Polyak-Ruppert average of the recorded iterates floor(l*i/2) .. l*i
// (inclusive); exposed for oracle checks against the engine's running-sum
// implementation.
Vector polyak_average(const std::vector<Vector>& iterates, long i, long l);

// Runs constrained SPSA with restarts. Deterministic for fixed config:
// every random stream is derived from (seed, restart, purpose) and restart
// results are merged in index order regardless of thread count.
OptimizeResult run_optimization(const Problem& prob, const SpsaConfig& cfg);

// One standard (unconstrained) simultaneous perturbation of the rows of P
// contrasted with a feasible-subspace perturbation of the same magnitude:
// the standard points leave the stochastic-matrix set, the constrained ones
// keep row sums at exactly one.
struct PerturbationDemo {
  Vector row_sums_plus;
  Vector row_sums_minus;
  double min_entry_plus = 0.0;
  double min_entry_minus = 0.0;
  bool plus_stochastic = false;
  bool minus_stochastic = false;
  Vector constrained_sums_plus;
  Vector constrained_sums_minus;
  bool constrained_feasible = false;
};

PerturbationDemo standard_perturbation_demo(const Graph& g, const Vector& x,
                                            const Vector& delta, double eta);

// The worked 3-node complete-graph instance of the demo above.
PerturbationDemo standard_perturbation_example();

const char* to_string(StopReason r);

}  // namespace chainopt
