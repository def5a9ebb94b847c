#include "chainopt/derivatives.hpp"

#include <stdexcept>

namespace chainopt {

Matrix transition_direction(const Graph& g, const Vector& x, const Vector& dx) {
  if (x.size() != g.edge_count() || dx.size() != g.edge_count())
    throw std::invalid_argument("weight vector length does not match edge count");
  Matrix dP = Matrix::Zero(g.nodes, g.nodes);
  for (int i = 0; i < g.nodes; ++i) {
    double s = 0.0;
    double t = 0.0;
    for (int e : g.out_edges[i]) {
      s += x[e];
      t += dx[e];
    }
    if (s <= 0.0)
      throw std::invalid_argument("node " + std::to_string(i + 1) +
                                  " has zero total outgoing weight");
    // d/dt (x_e / s) = (dx_e - (x_e / s) * t) / s.
    for (int e : g.out_edges[i]) dP(i, g.edges[e].to) = (dx[e] - (x[e] / s) * t) / s;
  }
  return dP;
}

DirectionalDerivatives directional_derivatives(const ChainAnalytics& a, const Matrix& dP) {
  const int n = static_cast<int>(a.P.rows());
  DirectionalDerivatives d;
  d.dP = dP;
  d.dpi = (a.pi.transpose() * dP * a.deviation).transpose();
  d.dprojector = Vector::Ones(n) * d.dpi.transpose();
  d.ddeviation = -d.dprojector * a.deviation + a.deviation * dP * a.deviation;

  // M(i,j) = (delta_ij - D(i,j) + D(j,j)) / pi_j, differentiated in D and pi.
  d.dmfpt.resize(n, n);
  for (int j = 0; j < n; ++j) {
    double djj = a.deviation(j, j);
    double ddjj = d.ddeviation(j, j);
    double inv_pi = 1.0 / a.pi[j];
    double dpi_term = -d.dpi[j] * inv_pi * inv_pi;
    for (int i = 0; i < n; ++i) {
      double delta = (i == j) ? 1.0 : 0.0;
      double numer = delta - a.deviation(i, j) + djj;
      d.dmfpt(i, j) = (-d.ddeviation(i, j) + ddjj) * inv_pi + numer * dpi_term;
    }
  }
  return d;
}

double objective_directional_derivative(const ChainAnalytics& a,
                                        const DirectionalDerivatives& d,
                                        const ConnectivityWeights& C) {
  const int n = static_cast<int>(a.P.rows());
  Matrix weights = C.matrix(n, a.pi);
  double value = weights.cwiseProduct(d.dmfpt).sum();
  if (C.mode == ConnectivityMode::Kemeny) {
    // C = pi pi' moves with the chain: dC(i,j) = dpi_i pi_j + pi_i dpi_j.
    Matrix dC = d.dpi * a.pi.transpose() + a.pi * d.dpi.transpose();
    value += dC.cwiseProduct(a.mfpt).sum();
  }
  return value;
}

DescentDirection steepest_feasible_descent(const Graph& g, const Vector& x_var,
                                           const ConnectivityWeights& C,
                                           const ConstraintSystem& sys,
                                           const PairSpace* ps) {
  Vector x_edge = ps ? ps->expand(x_var) : x_var;
  ChainAnalytics a = analyze_chain(transition_matrix(g, x_edge));

  const int dim = sys.dim();
  DescentDirection out;
  out.coefficients.resize(dim);
  for (int c = 0; c < dim; ++c) {
    Vector dvar = sys.basis.col(c);
    Vector dx_edge = ps ? ps->expand(dvar) : dvar;
    Matrix dP = transition_direction(g, x_edge, dx_edge);
    DirectionalDerivatives d = directional_derivatives(a, dP);
    out.coefficients[c] = objective_directional_derivative(a, d, C);
  }
  out.raw = -(sys.basis * out.coefficients);
  double norm = out.raw.norm();
  out.unit = norm > 1e-12 ? Vector(out.raw / norm) : Vector(Vector::Zero(out.raw.size()));
  return out;
}

}  // namespace chainopt
