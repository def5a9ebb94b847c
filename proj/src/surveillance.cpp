#include "chainopt/surveillance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "chainopt/errors.hpp"
#include "chainopt/rng.hpp"

namespace chainopt {

namespace {

constexpr std::uint64_t kTagWalk = 0x51;
constexpr std::uint64_t kTagEnvironment = 0x52;

// Cumulative row distributions for O(log n) stepping.
struct Walker {
  Matrix cum;

  explicit Walker(const Matrix& P) : cum(P) {
    for (int i = 0; i < P.rows(); ++i) {
      double acc = 0.0;
      for (int j = 0; j < P.cols(); ++j) {
        acc += P(i, j);
        cum(i, j) = acc;
      }
      cum(i, P.cols() - 1) = 1.0;  // absorb rounding in the last slot
    }
  }

  int step(int from, std::mt19937_64& rng) const {
    double u = u01(rng);
    const int n = static_cast<int>(cum.cols());
    int lo = 0;
    int hi = n - 1;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (cum(from, mid) > u)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }
};

double run_replication(const Matrix& P, const Graph& g, const SimulationSpec& spec,
                       const FailureModel* fm, int rep) {
  std::uint64_t rep_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(rep));
  auto walk_rng = make_rng(rep_seed, kTagWalk);

  Matrix Q = P;
  if (spec.random_support) {
    // Environment draws come from their own stream so fixed-support and
    // zero-probability-failure runs walk identical trajectories.
    auto env_rng = make_rng(rep_seed, kTagEnvironment);
    auto realization = sample_realizations(g, *fm, 1, env_rng);
    Q = redistribute(P, g, *fm, realization[0]);
  }
  Walker walker(Q);

  const int n = static_cast<int>(Q.rows());
  auto draw_node = [&]() { return std::min(n - 1, static_cast<int>(u01(walk_rng) * n)); };

  int agent = draw_node();
  int caught = 0;
  for (int m = 0; m < spec.intruders; ++m) {
    int intruder = draw_node();
    if (spec.reset_agent_per_intruder && m > 0) agent = draw_node();
    bool hit = spec.capture_on_appearance && agent == intruder;
    for (int t = 1; t < spec.residence; ++t) {
      agent = walker.step(agent, walk_rng);
      if (agent == intruder) hit = true;
    }
    if (hit) ++caught;
    agent = walker.step(agent, walk_rng);  // move into the next arrival instant
  }
  return 100.0 * static_cast<double>(caught) / static_cast<double>(spec.intruders);
}

}  // namespace

SimulationStats simulate_surveillance(const Graph& g, const Vector& x,
                                      const SimulationSpec& spec, const FailureModel* fm) {
  if (spec.intruders < 1 || spec.residence < 1 || spec.replications < 1)
    throw std::invalid_argument("intruders, residence and replications must be positive");
  if (spec.threads < 1) throw std::invalid_argument("need at least one thread");
  if (spec.random_support && (!fm || fm->empty()))
    throw std::invalid_argument("random support needs a failure model");

  Matrix P = transition_matrix(g, x);
  std::vector<double> results(spec.replications);
  if (spec.threads > 1 && spec.replications > 1) {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int r; (r = next.fetch_add(1)) < spec.replications;)
        results[r] = run_replication(P, g, spec, fm, r);
    };
    std::vector<std::thread> pool;
    int nthreads = std::min(spec.threads, spec.replications);
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  } else {
    for (int r = 0; r < spec.replications; ++r) results[r] = run_replication(P, g, spec, fm, r);
  }

  SimulationStats stats;
  stats.per_replication = results;
  stats.min = *std::min_element(results.begin(), results.end());
  stats.max = *std::max_element(results.begin(), results.end());
  double sum = 0.0;
  for (double v : results) sum += v;
  stats.mean = sum / results.size();
  double ss = 0.0;
  for (double v : results) ss += (v - stats.mean) * (v - stats.mean);
  stats.stddev = results.size() > 1 ? std::sqrt(ss / (results.size() - 1)) : 0.0;
  return stats;
}

}  // namespace chainopt
