#include "chainopt/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chainopt/errors.hpp"

namespace chainopt {

Vector project_scaled_simplex(const Vector& v, double eps) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw std::invalid_argument("cannot project an empty vector");
  double mass = 1.0 - eps * n;
  if (mass < -1e-12)
    throw InfeasibleError("floor too large: eps * n exceeds one");
  mass = std::max(mass, 0.0);

  // Shift by the floor, project onto the simplex of size `mass`, shift back.
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = v[i] - eps;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (int k = 0; k < n; ++k) {
    cumsum += u[k];
    double candidate = (cumsum - mass) / (k + 1);
    if (k + 1 == n || u[k + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = std::max(v[i] - eps - theta, 0.0) + eps;
  return w;
}

Vector project_box(const Vector& v, double lo, double hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

Vector project_affine(const Vector& v, const ConstraintSystem& sys) {
  return sys.least_norm + sys.basis * (sys.basis.transpose() * (v - sys.least_norm));
}

Vector project_blockwise_simplex(const Graph& g, const Vector& v, double eps) {
  if (v.size() != g.edge_count())
    throw std::invalid_argument("weight vector length does not match edge count");
  Vector out(v.size());
  for (int i = 0; i < g.nodes; ++i) {
    const auto& block = g.out_edges[i];
    Vector sub(block.size());
    for (std::size_t k = 0; k < block.size(); ++k) sub[k] = v[block[k]];
    Vector proj = project_scaled_simplex(sub, eps);
    for (std::size_t k = 0; k < block.size(); ++k) out[block[k]] = proj[k];
  }
  return out;
}

DykstraResult dykstra_project(const Vector& v, const ConstraintSystem& sys,
                              double lo, double hi, const DykstraOptions& opts) {
  if (lo > hi) throw std::invalid_argument("empty box: lo > hi");
  DykstraResult res;
  Vector x = v;
  Vector correction = Vector::Zero(v.size());
  for (int it = 0; it < opts.max_iter; ++it) {
    Vector boxed = project_box(x + correction, lo, hi);
    Vector shifted = (x + correction) - boxed;
    Vector next = project_affine(boxed, sys);
    // The iterate can sit still for several sweeps while the box correction
    // still drains, so both must settle before the point is trusted. An
    // empty intersection never settles: the correction grows without bound
    // and the loop runs into the cap.
    double move = std::max((next - x).cwiseAbs().maxCoeff(),
                           (shifted - correction).cwiseAbs().maxCoeff());
    correction = shifted;
    x = next;
    res.iterations = it + 1;
    if (move < opts.tol) {
      res.point = x;
      res.residual = std::max({0.0, (lo - x.minCoeff()), (x.maxCoeff() - hi)});
      return res;
    }
  }
  res.point = x;
  res.converged = false;
  res.residual = std::max({0.0, (lo - x.minCoeff()), (x.maxCoeff() - hi)});
  return res;
}

}  // namespace chainopt
