#pragma once

// Gauss-Legendre and Gauss-Hermite rules from the Golub-Welsch eigenvalue
// formulation of the three-term recurrence.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spdc/units.hpp"

namespace spdc {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Affine map of a rule on [-1, 1] onto [a, b].
  QuadratureRule mapped(double a, double b) const {
    QuadratureRule out;
    out.nodes.resize(size());
    out.weights.resize(size());
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < size(); ++i) {
      out.nodes[i] = mid + half * nodes[i];
      out.weights[i] = half * weights[i];
    }
    return out;
  }
};

namespace detail {

// Symmetric tridiagonal Jacobi matrix with zero diagonal; `mu0` is the
// zeroth moment of the weight function.
inline QuadratureRule golub_welsch(int n, double mu0, double (*offdiag)(int)) {
  if (n < 1) throw std::invalid_argument("quadrature rule needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  // Symmetrize: both weight functions are even.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(int n) {
  return detail::golub_welsch(n, 2.0, [](int k) {
    const double kk = static_cast<double>(k);
    return kk / std::sqrt(4.0 * kk * kk - 1.0);
  });
}

inline QuadratureRule gauss_legendre(int n, double a, double b) {
  return gauss_legendre(n).mapped(a, b);
}

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
inline QuadratureRule gauss_hermite(int n) {
  return detail::golub_welsch(n, std::sqrt(kPi), [](int k) {
    return std::sqrt(0.5 * static_cast<double>(k));
  });
}

}  // namespace spdc
