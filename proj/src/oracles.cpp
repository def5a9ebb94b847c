#include "chainopt/oracles.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "chainopt/errors.hpp"

namespace chainopt {

Matrix mfpt_first_step(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  if (P.cols() != n || n < 1) throw std::invalid_argument("square matrix required");
  Matrix M(n, n);
  for (int j = 0; j < n; ++j) {
    // m_i = 1 + sum_{k != j} P(i,k) m_k for i != j.
    Matrix A = Matrix::Identity(n - 1, n - 1);
    for (int i = 0, r = 0; i < n; ++i) {
      if (i == j) continue;
      for (int k = 0, c = 0; k < n; ++k) {
        if (k == j) continue;
        A(r, c) -= P(i, k);
        ++c;
      }
      ++r;
    }
    Vector m = n > 1 ? Vector(A.partialPivLu().solve(Vector::Ones(n - 1))) : Vector();
    if (n > 1 && !m.allFinite()) throw NumericalError("first-step system is singular");
    for (int i = 0, r = 0; i < n; ++i) {
      if (i == j) continue;
      M(i, j) = m[r++];
    }
    double ret = 1.0;
    for (int k = 0, r = 0; k < n; ++k) {
      if (k == j) continue;
      ret += P(j, k) * m[r++];
    }
    M(j, j) = ret;
  }
  return M;
}

double finite_difference_directional(const std::function<double(const Vector&)>& f,
                                     const Vector& x, const Vector& direction,
                                     double h) {
  return (f(x + h * direction) - f(x - h * direction)) / (2.0 * h);
}

std::optional<std::vector<int>> hamiltonian_cycle_search(const Graph& g) {
  if (g.nodes > 16) throw std::invalid_argument("cycle search is guarded to 16 nodes");
  std::vector<int> path{0};
  std::vector<char> used(g.nodes, 0);
  used[0] = 1;

  std::function<bool()> extend = [&]() {
    if (static_cast<int>(path.size()) == g.nodes)
      return g.find_edge(path.back(), 0).has_value();
    for (int e : g.out_edges[path.back()]) {
      int v = g.edges[e].to;
      if (used[v]) continue;
      used[v] = 1;
      path.push_back(v);
      if (extend()) return true;
      path.pop_back();
      used[v] = 0;
    }
    return false;
  };
  if (extend()) return path;
  return std::nullopt;
}

double hamiltonian_tour_objective(int nodes) {
  double n = nodes;
  return n * n * (n - 1.0) / 2.0;
}

double reversible_objective_lower_bound(int nodes) {
  double n = nodes;
  return n * (n - 1.0) * (n - 1.0);
}

Vector exhaustive_spsa_expectation(const std::function<double(const Vector&)>& f,
                                   const Vector& x, const Matrix& basis, double eta) {
  const int dim = static_cast<int>(basis.cols());
  if (dim > 20) throw std::invalid_argument("expectation enumeration is guarded to 20 columns");
  Vector acc = Vector::Zero(x.size());
  const std::uint64_t patterns = 1ULL << dim;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    Vector delta(dim);
    for (int b = 0; b < dim; ++b) delta[b] = (mask >> b) & 1ULL ? 1.0 : -1.0;
    Vector bdelta = basis * delta;
    double jp = f(x + eta * bdelta);
    double jm = f(x - eta * bdelta);
    acc += (jm - jp) / (2.0 * eta) * bdelta;
  }
  return acc / static_cast<double>(patterns);
}

Vector simplex_projection_active_set(const Vector& v, double eps) {
  const int n = static_cast<int>(v.size());
  if (n > 20) throw std::invalid_argument("active-set enumeration is guarded to 20 entries");
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  // Choose the set F of entries pinned at the floor; the rest share the
  // remaining mass with a common shift (KKT stationarity).
  for (std::uint64_t mask = 0; mask + 1 < (1ULL << n); ++mask) {
    double pinned_mass = 0.0;
    double free_sum = 0.0;
    int free_count = 0;
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1ULL) {
        pinned_mass += eps;
      } else {
        free_sum += v[i];
        ++free_count;
      }
    }
    double shift = (1.0 - pinned_mass - free_sum) / free_count;
    Vector w(n);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1ULL) {
        w[i] = eps;
        // KKT: pinned entries need a nonnegative multiplier.
        if (v[i] + shift > eps + 1e-12) ok = false;
      } else {
        w[i] = v[i] + shift;
        if (w[i] < eps - 1e-12) ok = false;
      }
    }
    if (!ok) continue;
    double dist = (w - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = w;
    }
  }
  if (best.size() == 0) throw InfeasibleError("no feasible active set found");
  return best;
}

Vector box_affine_projection_active_set(const Vector& v, const Matrix& A,
                                        const Vector& b, double lo, double hi) {
  const int n = static_cast<int>(v.size());
  if (n > 12) throw std::invalid_argument("active-set enumeration is guarded to 12 entries");
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  // Each entry is free, pinned at lo, or pinned at hi: 3^n patterns. For a
  // pattern, the free part solves min ||w - v||^2 s.t. A_free w = b - A_pin p
  // via the KKT system; pinned entries must have correctly signed gradients.
  std::vector<int> state(n, 0);
  const int rows = static_cast<int>(A.rows());
  while (true) {
    std::vector<int> free_idx;
    Vector w(n);
    Vector rhs = b;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 0) {
        free_idx.push_back(i);
      } else {
        w[i] = state[i] == 1 ? lo : hi;
        rhs -= A.col(i) * w[i];
      }
    }
    const int nf = static_cast<int>(free_idx.size());
    bool ok = true;
    Vector lambda = Vector::Zero(rows);
    if (nf > 0) {
      Matrix Af(rows, nf);
      Vector vf(nf);
      for (int k = 0; k < nf; ++k) {
        Af.col(k) = A.col(free_idx[k]);
        vf[k] = v[free_idx[k]];
      }
      // KKT: [I Af'; Af 0] [w; lambda] = [vf; rhs].
      Matrix K = Matrix::Zero(nf + rows, nf + rows);
      K.topLeftCorner(nf, nf).setIdentity();
      K.topRightCorner(nf, rows) = Af.transpose();
      K.bottomLeftCorner(rows, nf) = Af;
      Vector krhs(nf + rows);
      krhs.head(nf) = vf;
      krhs.tail(rows) = rhs;
      Eigen::FullPivLU<Matrix> lu(K);
      if (lu.rank() < K.rows()) {
        ok = false;
      } else {
        Vector sol = lu.solve(krhs);
        for (int k = 0; k < nf; ++k) {
          w[free_idx[k]] = sol[k];
          if (sol[k] < lo - 1e-10 || sol[k] > hi + 1e-10) ok = false;
        }
        lambda = sol.tail(rows);
      }
    } else {
      if ((A * w - b).cwiseAbs().maxCoeff() > 1e-10) ok = false;
    }
    if (ok) {
      // Pinned multipliers: mu_i = w_i - v_i + A_i' lambda, >= 0 at lo, <= 0 at hi.
      for (int i = 0; i < n && ok; ++i) {
        if (state[i] == 0) continue;
        double mu = w[i] - v[i] + A.col(i).dot(lambda);
        if (state[i] == 1 && mu < -1e-10) ok = false;
        if (state[i] == 2 && mu > 1e-10) ok = false;
      }
      if (ok && (A * w - b).cwiseAbs().maxCoeff() < 1e-8) {
        double dist = (w - v).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = w;
        }
      }
    }
    int carry = 0;
    while (carry < n && ++state[carry] == 3) state[carry++] = 0;
    if (carry == n) break;
  }
  if (best.size() == 0) throw InfeasibleError("no feasible active set found");
  return best;
}

}  // namespace chainopt
