#include "chainopt/random_support.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "chainopt/errors.hpp"
#include "chainopt/rng.hpp"

namespace chainopt {

double standard_normal(std::mt19937_64& rng) {
  double u1 = u01(rng);
  double u2 = u01(rng);
  // Guard log(0); the shift keeps u1 in (0, 1].
  u1 = 1.0 - u1;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double inverse_normal_cdf(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability outside [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  // Rational approximation (relative error ~1e-9), then one Halley step
  // against the exact CDF brings it to machine precision.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

std::vector<std::vector<int>> failure_units(const Graph& g, const FailureModel& fm) {
  const int k = static_cast<int>(g.risky.size());
  if (static_cast<int>(fm.fail_prob.size()) != k)
    throw std::invalid_argument("failure probabilities do not match the risky edge list");
  for (double q : fm.fail_prob)
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("failure probability outside [0, 1]");

  std::vector<int> slot_of_edge(g.edge_count(), -1);
  for (int s = 0; s < k; ++s) slot_of_edge[g.risky[s]] = s;

  std::vector<std::vector<int>> units;
  std::vector<char> grouped(k, 0);
  for (int s = 0; s < k; ++s) {
    if (grouped[s]) continue;
    grouped[s] = 1;
    std::vector<int> unit{s};
    if (fm.couple_reciprocal) {
      int rev = g.reverse_edge[g.risky[s]];
      int rs = rev >= 0 ? slot_of_edge[rev] : -1;
      if (rs >= 0 && rs != s && !grouped[rs]) {
        if (std::abs(fm.fail_prob[s] - fm.fail_prob[rs]) > 1e-12)
          throw std::invalid_argument("coupled reciprocal edges need equal failure probabilities");
        grouped[rs] = 1;
        unit.push_back(rs);
      }
    }
    units.push_back(std::move(unit));
  }
  return units;
}

Matrix redistribute(const Matrix& P, const Graph& g, const FailureModel& fm,
                    const Realization& r) {
  if (r.survives.size() != g.risky.size())
    throw std::invalid_argument("realization length does not match the risky edge list");
  (void)fm;
  Matrix Q = P;
  std::vector<char> touched(g.nodes, 0);
  for (std::size_t s = 0; s < g.risky.size(); ++s) {
    if (r.survives[s]) continue;
    const Edge& e = g.edges[g.risky[s]];
    Q(e.from, e.to) = 0.0;
    touched[e.from] = 1;
  }
  for (int i = 0; i < g.nodes; ++i) {
    if (!touched[i]) continue;
    double s = Q.row(i).sum();
    if (s <= 1e-12)
      throw NumericalError("node " + std::to_string(i + 1) +
                           " lost all outgoing probability in a failure realization");
    Q.row(i) /= s;
  }
  return Q;
}

double realization_probability(const Graph& g, const FailureModel& fm,
                               const Realization& r) {
  if (fm.correlated)
    throw std::invalid_argument("correlated failures have no per-realization product form");
  if (r.survives.size() != g.risky.size())
    throw std::invalid_argument("realization length does not match the risky edge list");
  double prob = 1.0;
  for (const auto& unit : failure_units(g, fm)) {
    std::uint8_t first = r.survives[unit[0]];
    for (int s : unit)
      if (r.survives[s] != first)
        throw std::invalid_argument("realization splits a coupled failure unit");
    prob *= first ? 1.0 - fm.fail_prob[unit[0]] : fm.fail_prob[unit[0]];
  }
  return prob;
}

std::vector<Realization> sample_realizations(const Graph& g, const FailureModel& fm,
                                             int count, std::mt19937_64& rng) {
  if (count < 0) throw std::invalid_argument("negative sample count");
  auto units = failure_units(g, fm);
  if (fm.correlated && (fm.rho < 0.0 || fm.rho >= 1.0))
    throw std::invalid_argument("correlation loading must lie in [0, 1)");

  std::vector<double> thresholds;
  if (fm.correlated) {
    thresholds.reserve(units.size());
    for (const auto& unit : units) thresholds.push_back(inverse_normal_cdf(fm.fail_prob[unit[0]]));
  }

  std::vector<Realization> out(count);
  for (int n = 0; n < count; ++n) {
    Realization r;
    r.survives.assign(g.risky.size(), 1);
    if (fm.correlated) {
      double common = standard_normal(rng);
      double sr = std::sqrt(fm.rho);
      double si = std::sqrt(1.0 - fm.rho);
      for (std::size_t u = 0; u < units.size(); ++u) {
        double z = sr * common + si * standard_normal(rng);
        if (z < thresholds[u])
          for (int s : units[u]) r.survives[s] = 0;
      }
    } else {
      for (const auto& unit : units) {
        if (u01(rng) < fm.fail_prob[unit[0]])
          for (int s : unit) r.survives[s] = 0;
      }
    }
    out[n] = std::move(r);
  }
  return out;
}

double expected_objective(const Graph& g, const Vector& x, const ConnectivityWeights& C,
                          const FailureModel& fm, int max_units) {
  if (fm.correlated)
    throw std::invalid_argument("exact expectation needs a product-form failure model");
  auto units = failure_units(g, fm);
  if (static_cast<int>(units.size()) > max_units)
    throw std::invalid_argument("too many failure units for exact enumeration");

  Matrix P = transition_matrix(g, x);
  double total = 0.0;
  const std::uint64_t patterns = 1ULL << units.size();
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    Realization r;
    r.survives.assign(g.risky.size(), 1);
    double prob = 1.0;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if ((mask >> u) & 1ULL) {
        prob *= fm.fail_prob[units[u][0]];
        for (int s : units[u]) r.survives[s] = 0;
      } else {
        prob *= 1.0 - fm.fail_prob[units[u][0]];
      }
    }
    if (prob == 0.0) continue;
    total += prob * connectivity_objective(redistribute(P, g, fm, r), C);
  }
  return total;
}

double sample_average_objective(const Matrix& P, const Graph& g,
                                const ConnectivityWeights& C, const FailureModel& fm,
                                const std::vector<Realization>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty realization batch");
  double total = 0.0;
  for (const Realization& r : batch)
    total += connectivity_objective(redistribute(P, g, fm, r), C);
  return total / static_cast<double>(batch.size());
}

}  // namespace chainopt
