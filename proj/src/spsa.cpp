#include "chainopt/spsa.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "chainopt/derivatives.hpp"
#include "chainopt/errors.hpp"
#include "chainopt/projections.hpp"
#include "chainopt/rng.hpp"

namespace chainopt {

namespace {

// Stream tags for deriving independent generators from (seed, restart).
constexpr std::uint64_t kTagIterations = 0x11;
constexpr std::uint64_t kTagStart = 0x22;
constexpr std::uint64_t kTagEval = 0x33;

struct EngineSpace {
  const Graph* g = nullptr;
  ConstraintMode mode = ConstraintMode::Simplex;
  ConstraintSystem sys;  // variable space
  PairSpace pairs;       // Symmetric mode only

  int dim() const { return sys.dim(); }
  int var_count() const { return static_cast<int>(sys.A.cols()); }

  Vector expand(const Vector& v) const {
    return mode == ConstraintMode::Symmetric ? pairs.expand(v) : v;
  }

  Vector project(const Vector& v, double eps, int* dykstra_warnings) const {
    if (mode == ConstraintMode::Simplex) return project_blockwise_simplex(*g, v, eps);
    DykstraResult r = dykstra_project(v, sys, eps, 1.0);
    if (!r.converged && dykstra_warnings) ++*dykstra_warnings;
    // Dykstra anchors its iterate on the equality set, so a cut-short drain
    // can leave entries outside the box and a negative weight would poison
    // the objective. Clamp: evaluation needs box-clean weights, and row
    // normalization absorbs the (at most tol-sized) equality slack.
    return r.point.cwiseMax(eps).cwiseMin(1.0);
  }

  double residual(const Vector& v, double eps) const {
    double r = (sys.A * v - sys.b).cwiseAbs().maxCoeff();
    double floor_violation = std::max(0.0, eps - v.minCoeff());
    return std::max(r, floor_violation);
  }
};

EngineSpace build_space(const Problem& prob) {
  EngineSpace s;
  s.g = prob.graph;
  s.mode = prob.constraint;
  switch (prob.constraint) {
    case ConstraintMode::Simplex:
      s.sys = equality_system(*prob.graph);
      break;
    case ConstraintMode::Stationary:
      if (prob.target.size() != prob.graph->nodes)
        throw std::invalid_argument("stationary mode needs a target distribution");
      s.sys = stationary_system(*prob.graph, prob.target);
      break;
    case ConstraintMode::Symmetric:
      s.pairs = pair_space(*prob.graph);
      s.sys = pair_equality_system(*prob.graph, s.pairs);
      break;
  }
  return s;
}

struct Evaluator {
  const Problem* prob;
  const EngineSpace* space;

  double exact(const Vector& v) const {
    return connectivity_objective(transition_matrix(*space->g, space->expand(v)),
                                  prob->objective);
  }

  double with_batch(const Vector& v, const std::vector<Realization>& batch) const {
    Matrix P = transition_matrix(*space->g, space->expand(v));
    return sample_average_objective(P, *space->g, prob->objective, prob->failures, batch);
  }

  // Checkpoint-quality objective: exact in Fixed mode, fresh sample average
  // otherwise.
  double checkpoint(const Vector& v, const SpsaConfig& cfg, std::mt19937_64& rng) const {
    if (prob->support == SupportMode::Fixed) return exact(v);
    auto batch = sample_realizations(*space->g, prob->failures, cfg.eval_batch, rng);
    return with_batch(v, batch);
  }
};

Vector start_point(const EngineSpace& space, const SpsaConfig& cfg, int restart,
                   int* dykstra_warnings) {
  if (restart == 0) {
    Vector ones = Vector::Ones(space.var_count());
    return space.project(ones, cfg.epsilon, dykstra_warnings);
  }
  auto rng = make_rng(cfg.seed, mix_seed(kTagStart, static_cast<std::uint64_t>(restart)));
  Vector v(space.var_count());
  for (int i = 0; i < v.size(); ++i) v[i] = cfg.epsilon + u01(rng);
  return space.project(v, cfg.epsilon, dykstra_warnings);
}

RestartResult run_restart(const Problem& prob, const SpsaConfig& cfg,
                          const EngineSpace& space, int restart, int* dykstra_warnings) {
  const auto t0 = std::chrono::steady_clock::now();
  Evaluator eval{&prob, &space};
  auto rng = make_rng(cfg.seed, mix_seed(kTagIterations, static_cast<std::uint64_t>(restart)));
  auto eval_rng = make_rng(cfg.seed, mix_seed(kTagEval, static_cast<std::uint64_t>(restart)));

  const long K = cfg.iterations;
  const long l = cfg.checkpoint_every;
  const int dim = space.dim();

  // Checkpoint iterations: multiples of l, plus a trailing partial window.
  std::vector<long> checkpoint_iters;
  for (long m = l; m <= K; m += l) checkpoint_iters.push_back(m);
  if (checkpoint_iters.empty() || checkpoint_iters.back() != K) checkpoint_iters.push_back(K);

  // Averaging windows [floor(m/2), m] need the running sum just before the
  // window opens; collect those marks up front.
  std::vector<long> marks;
  for (long m : checkpoint_iters) marks.push_back(m / 2 - 1);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  RestartResult out;
  Vector x = start_point(space, cfg, restart, dykstra_warnings);
  Vector cumsum = x;  // running sum of iterates x_0 .. x_k
  std::map<long, Vector> snapshots;
  if (!marks.empty() && marks.front() < 0) snapshots[-1] = Vector::Zero(x.size());
  std::size_t next_mark = 0;
  while (next_mark < marks.size() && marks[next_mark] < 0) ++next_mark;
  if (next_mark < marks.size() && marks[next_mark] == 0) {
    snapshots[0] = cumsum;
    ++next_mark;
  }

  double last_gnorm = 0.0;
  double prev_avg_objective = 0.0;
  bool have_prev = false;
  std::size_t next_checkpoint = 0;

  auto record_elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (cfg.sample_stride > 0) out.samples.push_back(x);

  for (long k = 0; k < K; ++k) {
    double eta_k = cfg.eta / std::pow(static_cast<double>(k + 1), cfg.gamma_eta);
    double gain_k = cfg.alpha / std::pow(cfg.alpha0 + k + 1, cfg.gamma_alpha);
    double eps_k = cfg.epsilon_decay > 0.0
                       ? cfg.epsilon / std::pow(static_cast<double>(k + 1), cfg.epsilon_decay)
                       : cfg.epsilon;

    Vector delta(dim);
    for (int i = 0; i < dim; ++i) delta[i] = rademacher(rng);
    Vector bdelta = space.sys.basis * delta;

    double jp, jm;
    if (prob.support == SupportMode::Fixed) {
      jp = eval.exact(x + eta_k * bdelta);
      jm = eval.exact(x - eta_k * bdelta);
    } else {
      int batch_n = prob.support == SupportMode::Online ? 1 : cfg.batch_size;
      auto batch = sample_realizations(*space.g, prob.failures, batch_n, rng);
      if (cfg.log_realizations && prob.support == SupportMode::Online)
        out.realization_log.emplace_back(k, batch[0].survives);
      jp = eval.with_batch(x + eta_k * bdelta, batch);
      jm = eval.with_batch(x - eta_k * bdelta, batch);
    }

    Vector descent = spsa_direction(bdelta, jp, jm, eta_k);
    last_gnorm = descent.norm();
    Vector step = gain_k * descent;
    if (cfg.max_step_norm > 0.0) {
      double sn = step.norm();
      if (sn > cfg.max_step_norm) step *= cfg.max_step_norm / sn;
    }
    x = space.project(x + step, eps_k, dykstra_warnings);
    cumsum += x;
    long t = k + 1;  // x_t just entered the running sum
    if (next_mark < marks.size() && marks[next_mark] == t) {
      snapshots[t] = cumsum;
      ++next_mark;
    }
    if (cfg.sample_stride > 0 && t % cfg.sample_stride == 0) out.samples.push_back(x);

    if (next_checkpoint < checkpoint_iters.size() && checkpoint_iters[next_checkpoint] == t) {
      ++next_checkpoint;
      long lo = t / 2;
      const Vector& base = snapshots.at(lo - 1);
      Vector avg = (cumsum - base) / static_cast<double>(t - lo + 1);
      Vector avg_feasible = space.project(avg, eps_k, dykstra_warnings);
      double j_avg = eval.checkpoint(avg_feasible, cfg, eval_rng);

      Checkpoint row;
      row.iteration = t;
      row.objective = j_avg;
      row.gradient_norm = last_gnorm;
      row.feasibility = space.residual(x, eps_k);
      row.seconds = record_elapsed();
      out.checkpoints.push_back(row);

      out.variables = avg_feasible;
      out.objective = j_avg;
      out.iterations = t;
      if (have_prev && std::abs(j_avg - prev_avg_objective) < cfg.tolerance) {
        out.stop = StopReason::Converged;
        return out;
      }
      prev_avg_objective = j_avg;
      have_prev = true;
    }
  }
  out.stop = StopReason::IterationLimit;
  return out;
}

}  // namespace

void validate_config(const SpsaConfig& cfg, int dimension) {
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("gain alpha must be positive");
  if (!(cfg.alpha0 >= 0.0)) throw std::invalid_argument("gain offset alpha0 must be nonnegative");
  if (!(cfg.gamma_alpha > 0.5 && cfg.gamma_alpha <= 1.0))
    throw std::invalid_argument("gain exponent must lie in (1/2, 1]");
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("perturbation size eta must be positive");
  if (!(cfg.gamma_eta > (1.0 - cfg.gamma_alpha) / 2.0))
    throw std::invalid_argument("perturbation decay too slow against the gain exponent");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("weight floor epsilon must be positive");
  if (cfg.epsilon_decay < 0.0) throw std::invalid_argument("epsilon decay must be nonnegative");
  if (cfg.epsilon_decay > 0.0 && cfg.epsilon_decay > cfg.gamma_eta)
    throw std::invalid_argument("epsilon decay must not outpace the perturbation decay");
  if (cfg.iterations < 1) throw std::invalid_argument("iteration cap must be at least one");
  if (cfg.checkpoint_every < 1) throw std::invalid_argument("checkpoint cadence must be positive");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg.max_step_norm < 0.0) throw std::invalid_argument("step cap must be nonnegative");
  if (cfg.restarts < 1) throw std::invalid_argument("need at least one restart");
  if (cfg.threads < 1) throw std::invalid_argument("need at least one thread");
  if (cfg.batch_size < 1 || cfg.eval_batch < 1)
    throw std::invalid_argument("realization batch sizes must be positive");
  if (cfg.sample_stride < 0) throw std::invalid_argument("sample stride must be nonnegative");
  if (dimension > 0 && !(cfg.eta * std::sqrt(static_cast<double>(dimension)) < cfg.epsilon))
    throw std::invalid_argument(
        "eta too large: perturbed points can leave the feasible set "
        "(need eta * sqrt(dimension) < epsilon)");
}

Vector spsa_direction(const Vector& bdelta, double j_plus, double j_minus, double eta) {
  return (j_minus - j_plus) / (2.0 * eta) * bdelta;
}

Vector polyak_average(const std::vector<Vector>& iterates, long i, long l) {
  long hi = l * i;
  long lo = hi / 2;
  if (hi >= static_cast<long>(iterates.size()))
    throw std::invalid_argument("averaging window exceeds the recorded iterates");
  Vector acc = Vector::Zero(iterates[0].size());
  for (long t = lo; t <= hi; ++t) acc += iterates[t];
  return acc / static_cast<double>(hi - lo + 1);
}

OptimizeResult run_optimization(const Problem& prob, const SpsaConfig& cfg) {
  if (!prob.graph) throw std::invalid_argument("problem has no graph");
  if (prob.support != SupportMode::Fixed && prob.graph->risky.empty())
    throw std::invalid_argument("random support needs risky edges in the graph");

  EngineSpace space = build_space(prob);
  validate_config(cfg, space.dim());

  OptimizeResult result;
  result.dimension = space.dim();

  if (space.dim() == 0) {
    // The constraint set is a single point; report it.
    int warnings = 0;
    Vector x = space.sys.least_norm;
    if (x.minCoeff() < cfg.epsilon - 1e-9)
      throw InfeasibleError("the unique feasible point violates the weight floor");
    Evaluator eval{&prob, &space};
    auto eval_rng = make_rng(cfg.seed, mix_seed(kTagEval, 0));
    double j = eval.checkpoint(x, cfg, eval_rng);
    Checkpoint row;
    row.iteration = 0;
    row.objective = j;
    row.feasibility = space.residual(x, cfg.epsilon);
    result.variables = x;
    result.edge_weights = space.expand(x);
    result.objective = j;
    result.stop = StopReason::EmptyBasis;
    result.checkpoints.push_back(row);
    result.restart_objectives.assign(1, j);
    RestartResult rr;
    rr.variables = x;
    rr.objective = j;
    rr.stop = StopReason::EmptyBasis;
    rr.checkpoints = result.checkpoints;
    result.restarts.push_back(std::move(rr));
    result.dykstra_warnings = warnings;
    return result;
  }

  if (prob.constraint != ConstraintMode::Simplex) {
    // Fail fast when the equality set and the weight floor have no common
    // point (a structurally forced zero weight, say): the projection then
    // never settles and every perturbed iterate is garbage.
    DykstraOptions probe;
    probe.max_iter = 200000;
    DykstraResult r =
        dykstra_project(space.sys.least_norm, space.sys, cfg.epsilon, 1.0, probe);
    if (!r.converged && r.residual > 0.5 * cfg.epsilon)
      throw InfeasibleError(
          "no weights satisfy both the equality constraints and the weight floor");
  }

  std::vector<RestartResult> restarts(cfg.restarts);
  std::vector<int> warnings(cfg.restarts, 0);
  if (cfg.threads > 1 && cfg.restarts > 1) {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int r; (r = next.fetch_add(1)) < cfg.restarts;)
        restarts[r] = run_restart(prob, cfg, space, r, &warnings[r]);
    };
    std::vector<std::thread> pool;
    int nthreads = std::min(cfg.threads, cfg.restarts);
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  } else {
    for (int r = 0; r < cfg.restarts; ++r)
      restarts[r] = run_restart(prob, cfg, space, r, &warnings[r]);
  }

  int best = 0;
  for (int r = 1; r < cfg.restarts; ++r)
    if (restarts[r].objective < restarts[best].objective) best = r;

  for (int r = 0; r < cfg.restarts; ++r) {
    result.restart_objectives.push_back(restarts[r].objective);
    result.dykstra_warnings += warnings[r];
  }
  result.variables = restarts[best].variables;
  result.edge_weights = space.expand(result.variables);
  result.objective = restarts[best].objective;
  result.stop = restarts[best].stop;
  result.best_restart = best;
  result.iterations = restarts[best].iterations;
  result.checkpoints = restarts[best].checkpoints;
  result.restarts = std::move(restarts);
  return result;
}

PerturbationDemo standard_perturbation_demo(const Graph& g, const Vector& x,
                                            const Vector& delta, double eta) {
  if (x.size() != g.edge_count() || delta.size() != g.edge_count())
    throw std::invalid_argument("weight and perturbation vectors must match the edge count");
  PerturbationDemo demo;
  Vector plus = x + eta * delta;
  Vector minus = x - eta * delta;
  auto row_sums = [&](const Vector& v) {
    Vector s = Vector::Zero(g.nodes);
    for (int e = 0; e < g.edge_count(); ++e) s[g.edges[e].from] += v[e];
    return s;
  };
  auto stochastic = [&](const Vector& v, const Vector& sums) {
    return v.minCoeff() >= 0.0 && (sums.array() - 1.0).abs().maxCoeff() <= 1e-12;
  };
  demo.row_sums_plus = row_sums(plus);
  demo.row_sums_minus = row_sums(minus);
  demo.min_entry_plus = plus.minCoeff();
  demo.min_entry_minus = minus.minCoeff();
  demo.plus_stochastic = stochastic(plus, demo.row_sums_plus);
  demo.minus_stochastic = stochastic(minus, demo.row_sums_minus);

  ConstraintSystem sys = equality_system(g);
  Vector feasible_dir = sys.basis * (sys.basis.transpose() * delta);
  demo.constrained_sums_plus = row_sums(x + eta * feasible_dir);
  demo.constrained_sums_minus = row_sums(x - eta * feasible_dir);
  demo.constrained_feasible =
      (demo.constrained_sums_plus.array() - 1.0).abs().maxCoeff() <= 1e-12 &&
      (demo.constrained_sums_minus.array() - 1.0).abs().maxCoeff() <= 1e-12;
  return demo;
}

PerturbationDemo standard_perturbation_example() {
  std::vector<Edge> edges;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) edges.push_back({i, j});
  Graph g = make_graph(3, edges);
  Vector x = Vector::Constant(6, 0.5);  // uniform chain on the complete 3-graph
  Vector delta(6);
  delta << 1, 1, -1, 1, 1, 1;
  return standard_perturbation_demo(g, x, delta, 0.01);
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::IterationLimit: return "iteration-limit";
    case StopReason::EmptyBasis: return "empty-basis";
  }
  return "unknown";
}

}  // namespace chainopt
