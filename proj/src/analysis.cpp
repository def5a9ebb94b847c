#include "chainopt/analysis.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

#include "chainopt/errors.hpp"

namespace chainopt {

namespace {

void require_stochastic(const Matrix& P) {
  if (P.rows() != P.cols() || P.rows() < 1)
    throw std::invalid_argument("transition matrix must be square and non-empty");
  for (int i = 0; i < P.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < P.cols(); ++j) {
      if (P(i, j) < -1e-12 || !std::isfinite(P(i, j)))
        throw std::invalid_argument("transition matrix has a negative or non-finite entry");
      s += P(i, j);
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("transition matrix row does not sum to one");
  }
}

bool support_strongly_connected(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        double w = forward ? P(u, v) : P(v, u);
        if (w > 1e-14 && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reach(true) && reach(false);
}

}  // namespace

Vector stationary_distribution(const Matrix& P) {
  require_stochastic(P);
  const int n = static_cast<int>(P.rows());
  // (I - P') pi = 0 with the last equation replaced by sum(pi) = 1.
  Matrix A = Matrix::Identity(n, n) - P.transpose();
  A.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::PartialPivLU<Matrix> lu(A);
  Vector pi = lu.solve(rhs);
  if (!pi.allFinite() || (A * pi - rhs).cwiseAbs().maxCoeff() > 1e-8)
    throw NumericalError("stationary solve failed; chain may be periodic in structure");
  pi /= pi.sum();
  if (pi.minCoeff() <= 0.0)
    throw NumericalError("stationary distribution is not strictly positive; chain is reducible");
  return pi;
}

Matrix deviation_matrix(const Matrix& P, const Vector& pi) {
  const int n = static_cast<int>(P.rows());
  Matrix projector = Vector::Ones(n) * pi.transpose();
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - P + projector);
  Matrix D = lu.solve(Matrix::Identity(n, n)) - projector;
  // D 1 = 0 and pi' D = 0 hold exactly in the algebra; large violations
  // mean the fundamental-matrix solve went bad.
  double scale = 1.0 + D.cwiseAbs().maxCoeff();
  if (!D.allFinite() || (D * Vector::Ones(n)).cwiseAbs().maxCoeff() > 1e-6 * scale ||
      (pi.transpose() * D).cwiseAbs().maxCoeff() > 1e-6 * scale)
    throw NumericalError("deviation matrix solve lost its defining invariants");
  return D;
}

Matrix mfpt_from_deviation(const Matrix& deviation, const Vector& pi) {
  const int n = static_cast<int>(deviation.rows());
  Matrix M(n, n);
  for (int j = 0; j < n; ++j) {
    double djj = deviation(j, j);
    for (int i = 0; i < n; ++i) {
      double delta = (i == j) ? 1.0 : 0.0;
      M(i, j) = (delta - deviation(i, j) + djj) / pi[j];
    }
  }
  return M;
}

ChainAnalytics analyze_chain(const Matrix& P) {
  require_stochastic(P);
  if (!support_strongly_connected(P))
    throw NumericalError("chain support is not strongly connected");
  ChainAnalytics a;
  a.P = P;
  a.pi = stationary_distribution(P);
  a.projector = Vector::Ones(P.rows()) * a.pi.transpose();
  a.deviation = deviation_matrix(P, a.pi);
  a.mfpt = mfpt_from_deviation(a.deviation, a.pi);
  return a;
}

ConnectivityWeights ConnectivityWeights::unit() { return {ConnectivityMode::Unit, {}, {}}; }

ConnectivityWeights ConnectivityWeights::kemeny() { return {ConnectivityMode::Kemeny, {}, {}}; }

ConnectivityWeights ConnectivityWeights::target_pi(Vector target) {
  if (target.size() < 1 || target.minCoeff() <= 0.0 || std::abs(target.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("target distribution must be positive and sum to one");
  return {ConnectivityMode::TargetPi, std::move(target), {}};
}

ConnectivityWeights ConnectivityWeights::custom_matrix(Matrix C) {
  if (C.rows() != C.cols() || C.rows() < 1 || C.minCoeff() < 0.0)
    throw std::invalid_argument("custom connectivity weights must be square and nonnegative");
  return {ConnectivityMode::Custom, {}, std::move(C)};
}

Matrix ConnectivityWeights::matrix(int nodes, const Vector& pi) const {
  switch (mode) {
    case ConnectivityMode::Unit:
      return Matrix::Ones(nodes, nodes) - Matrix::Identity(nodes, nodes);
    case ConnectivityMode::Kemeny:
      if (pi.size() != nodes)
        throw std::invalid_argument("kemeny weighting needs the current stationary distribution");
      return pi * pi.transpose();
    case ConnectivityMode::TargetPi:
      if (target.size() != nodes)
        throw std::invalid_argument("target distribution length does not match node count");
      return target * target.transpose();
    case ConnectivityMode::Custom:
      if (custom.rows() != nodes)
        throw std::invalid_argument("custom weight matrix size does not match node count");
      return custom;
  }
  throw std::invalid_argument("unknown connectivity mode");
}

double connectivity_objective(const ChainAnalytics& a, const ConnectivityWeights& C) {
  Matrix weights = C.matrix(static_cast<int>(a.P.rows()), a.pi);
  return weights.cwiseProduct(a.mfpt).sum();
}

double connectivity_objective(const Matrix& P, const ConnectivityWeights& C) {
  return connectivity_objective(analyze_chain(P), C);
}

double kemeny_constant(const Matrix& P) {
  return connectivity_objective(P, ConnectivityWeights::kemeny());
}

Matrix effective_resistance(const Graph& g, const Vector& x) {
  if (!is_symmetric_weights(g, x))
    throw std::invalid_argument("effective resistance needs symmetric weights");
  ChainAnalytics a = analyze_chain(transition_matrix(g, x));
  double total_weight = x.sum();
  Matrix R(g.nodes, g.nodes);
  for (int i = 0; i < g.nodes; ++i) {
    R(i, i) = 0.0;
    for (int j = i + 1; j < g.nodes; ++j) {
      double r = (a.mfpt(i, j) + a.mfpt(j, i)) / total_weight;
      R(i, j) = r;
      R(j, i) = r;
    }
  }
  return R;
}

double effective_resistance_total(const Graph& g, const Vector& x) {
  Matrix R = effective_resistance(g, x);
  double total = 0.0;
  for (int i = 0; i < g.nodes; ++i)
    for (int j = i + 1; j < g.nodes; ++j) total += R(i, j);
  return total;
}

}  // namespace chainopt
