#pragma once

// Tensor-product Gauss-Hermite evaluation of
//   int exp(-x^T A x + b^T x + c) d^6x
// after whitening with the real Cholesky factor of Re(A): x = L^-T y.
// Uses neither the determinant nor the inverse of A.

#include <functional>
#include <random>

#include <Eigen/Dense>

#include "spdc/kernel.hpp"
#include "spdc/quadrature.hpp"

namespace spdc::testing {

inline Complex hermite_oracle(const MMatrices& m, int nodes) {
  const Eigen::Matrix<double, 6, 6> re = m.M2.real();
  const Eigen::Matrix<double, 6, 6> im = m.M2.imag();
  Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(re);
  const Eigen::Matrix<double, 6, 6> L = llt.matrixL();
  const Eigen::Matrix<double, 6, 6> Linv = L.inverse();
  const Eigen::Matrix<double, 6, 6> C = Linv * im * Linv.transpose();
  const Vector6c beta = Linv.cast<Complex>() * m.M1;
  double det_l = 1.0;
  for (int i = 0; i < 6; ++i) det_l *= L(i, i);

  const QuadratureRule gh = gauss_hermite(nodes);
  const Complex I{0.0, 1.0};
  double y[6];
  Complex sum{0.0, 0.0};
  std::function<void(int, Complex, double)> level = [&](int d, Complex exponent, double weight) {
    if (d == 6) {
      sum += weight * std::exp(exponent);
      return;
    }
    for (int a = 0; a < nodes; ++a) {
      const double v = gh.nodes[a];
      Complex e = exponent - I * C(d, d) * v * v + beta[d] * v;
      for (int j = 0; j < d; ++j) e -= 2.0 * I * C(d, j) * y[j] * v;
      y[d] = v;
      level(d + 1, e, weight * gh.weights[a]);
    }
  };
  level(0, m.M0, 1.0);
  return sum / det_l;
}

inline Eigen::Matrix<double, 6, 6> random_spd(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ev(lo, hi);
  Eigen::Matrix<double, 6, 6> g;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) g(i, j) = u(rng);
  const Eigen::HouseholderQR<Eigen::Matrix<double, 6, 6>> qr(g);
  const Eigen::Matrix<double, 6, 6> q = qr.householderQ();
  Eigen::Matrix<double, 6, 1> lambda;
  for (int i = 0; i < 6; ++i) lambda[i] = ev(rng);
  return q * lambda.asDiagonal() * q.transpose();
}

inline Eigen::Matrix<double, 6, 6> random_symmetric(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::Matrix<double, 6, 6> s;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) s(i, j) = s(j, i) = u(rng);
  return s;
}

/// Random integrable instance: Re(M2) eigenvalues in [0.5, 4], entries of
/// Im(M2) up to `imag_scale`, M1 components up to 1.5 in modulus.
inline MMatrices random_instance(std::mt19937_64& rng, double imag_scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MMatrices m;
  m.M2 = random_spd(rng, 0.5, 4.0).cast<Complex>();
  if (imag_scale > 0.0)
    m.M2 += Complex(0.0, 1.0) * random_symmetric(rng, imag_scale).cast<Complex>();
  for (int i = 0; i < 6; ++i)
    m.M1[i] = imag_scale > 0.0 ? Complex(u(rng), u(rng)) : Complex(1.5 * u(rng), 0.0);
  m.M0 = imag_scale > 0.0 ? Complex(0.3 * u(rng), 2.0 * u(rng)) : Complex(0.5 * u(rng), 0.0);
  return m;
}

}  // namespace spdc::testing
