#pragma once

// Analytic transverse integration of the fiber-projected pair amplitude
// product. With kappa~ = (kappa_s, kappa_i, kappa_i') the transverse
// integrand of the density matrix is
//
//   exp(-kappa~^T M2 kappa~ + M1^T kappa~ + M0),
//
// whose integral over R^6 is pi^3 exp(M0 + M1^T M2^{-1} M1 / 4) / sqrt(det M2).
// The pi^3 factor, like the mode normalizations of u_p and u_i, is absorbed
// into the final trace normalization.

#include <complex>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "spdc/dispersion.hpp"
#include "spdc/error.hpp"
#include "spdc/paraxial.hpp"

namespace spdc {

using Complex = std::complex<double>;
using Vector6c = Eigen::Matrix<Complex, 6, 1>;
using Matrix6c = Eigen::Matrix<Complex, 6, 6>;

struct BeamGeometry {
  double pump_waist = 100.0;   ///< w_p, um
  double fiber_waist = 100.0;  ///< w_f, um

  void validate() const {
    if (!(pump_waist > 0.0) || !(fiber_waist > 0.0))
      throw DomainError("beam waists must be positive");
  }
};

struct KernelConfig {
  CrystalConfig crystal;
  GeometryConfig geometry;
  BeamGeometry beams;
};

struct MMatrices {
  Complex M0{0.0, 0.0};
  Vector6c M1 = Vector6c::Zero();
  Matrix6c M2 = Matrix6c::Zero();
  // Node the matrices were assembled for (diagnostics only).
  double omega_s = 0.0;
  double omega_i = 0.0;
  double omega_i_prime = 0.0;
  double z = 0.0;
  double z_prime = 0.0;

  std::string describe_node() const {
    std::ostringstream os;
    os << "(omega_s=" << omega_s << ", omega_i=" << omega_i
       << ", omega_i'=" << omega_i_prime << " rad/fs, z=" << z
       << ", z'=" << z_prime << " um)";
    return os.str();
  }
};

/// The z-independent, real part of M2.
inline Eigen::Matrix<double, 6, 6> geometric_m2(const BeamGeometry& beams) {
  const double wp2 = beams.pump_waist * beams.pump_waist;
  const double ratio = 1.0 + (beams.fiber_waist * beams.fiber_waist) / wp2;
  Eigen::Matrix<double, 6, 6> g = Eigen::Matrix<double, 6, 6>::Zero();
  for (int c = 0; c < 2; ++c) {
    g(c, c) = 2.0;
    g(c, 2 + c) = g(2 + c, c) = 1.0;
    g(c, 4 + c) = g(4 + c, c) = 1.0;
    g(2 + c, 2 + c) = ratio;
    g(4 + c, 4 + c) = ratio;
  }
  return 0.5 * wp2 * g;
}

/// Builds M0, M1, M2 for the unprimed expansion at (omega_s, omega_i) and the
/// primed one at (omega_s, omega_i'), slice positions z and z'.
inline MMatrices assemble_M(const ParaxialExpansion& e, const ParaxialExpansion& ep,
                            double z, double z_prime, const BeamGeometry& beams) {
  if (e.omega_s != ep.omega_s) {
    throw ContractViolation("assemble_M: expansions must share omega_s");
  }
  const Complex I{0.0, 1.0};
  const double wp2 = beams.pump_waist * beams.pump_waist;

  MMatrices m;
  m.omega_s = e.omega_s;
  m.omega_i = e.omega_i;
  m.omega_i_prime = ep.omega_i;
  m.z = z;
  m.z_prime = z_prime;

  m.M2 = geometric_m2(beams).cast<Complex>();
  // kappa~^T (i z D2) kappa~ on (s, i) and -i z' D2' on (s, i').
  m.M2.topLeftCorner<4, 4>() += (I * z) * e.D2.cast<Complex>();
  constexpr int primed[4] = {0, 1, 4, 5};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      m.M2(primed[a], primed[b]) -= (I * z_prime) * ep.D2(a, b);

  const Eigen::Vector2d d0(e.delta0().kx, e.delta0().ky);
  const Eigen::Vector2d d0p(ep.delta0().kx, ep.delta0().ky);
  m.M1.segment<2>(0) = (-(d0 + d0p) * wp2).cast<Complex>() -
                       (I * z) * e.D1.head<2>().cast<Complex>() +
                       (I * z_prime) * ep.D1.head<2>().cast<Complex>();
  m.M1.segment<2>(2) =
      (-d0 * wp2).cast<Complex>() - (I * z) * e.D1.tail<2>().cast<Complex>();
  m.M1.segment<2>(4) =
      (-d0p * wp2).cast<Complex>() + (I * z_prime) * ep.D1.tail<2>().cast<Complex>();

  m.M0 = -0.5 * wp2 * (d0.squaredNorm() + d0p.squaredNorm()) - I * z * e.dkz0 +
         I * z_prime * ep.dkz0;
  return m;
}

/// Unpivoted LDL^T factorization of a complex symmetric matrix (A = A^T, not
/// Hermitian). When Re(A) is positive definite every Schur complement keeps a
/// positive definite real part, so the pivots all have Re > 0 and the sum of
/// their principal logarithms is the branch of log det A continuously
/// connected to the real matrix Re(A).
template <int N>
class ComplexSymmetricLdlt {
 public:
  using Matrix = Eigen::Matrix<Complex, N, N>;
  using Vector = Eigen::Matrix<Complex, N, 1>;

  explicit ComplexSymmetricLdlt(const Matrix& a) : lu_(a) {
    for (int k = 0; k < N; ++k) {
      const Complex pivot = lu_(k, k);
      if (!(pivot.real() > 0.0)) {
        ok_ = false;
        return;
      }
      for (int i = k + 1; i < N; ++i) lu_(i, k) /= pivot;
      for (int i = k + 1; i < N; ++i) {
        const Complex scaled = lu_(i, k) * pivot;
        for (int j = k + 1; j <= i; ++j) lu_(i, j) -= scaled * lu_(j, k);
      }
    }
    // Upper triangle was never touched; lu_ holds L below the diagonal and D
    // on it.
  }

  bool ok() const { return ok_; }

  Complex pivot(int k) const { return lu_(k, k); }

  Complex log_determinant() const {
    Complex sum{0.0, 0.0};
    for (int k = 0; k < N; ++k) sum += std::log(lu_(k, k));
    return sum;
  }

  Complex determinant() const {
    Complex prod{1.0, 0.0};
    for (int k = 0; k < N; ++k) prod *= lu_(k, k);
    return prod;
  }

  Vector solve(const Vector& b) const {
    Vector x = b;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (int i = 0; i < N; ++i) x[i] /= lu_(i, i);
    for (int i = N - 1; i >= 0; --i)
      for (int j = i + 1; j < N; ++j) x[i] -= lu_(j, i) * x[j];
    return x;
  }

 private:
  Matrix lu_;
  bool ok_ = true;
};

/// exp(M0 + M1^T M2^{-1} M1 / 4) / sqrt(det M2), with sqrt(det M2) taken as
/// exp(log det M2 / 2) on the branch connected to Re(M2).
inline Complex gaussian_integral(const MMatrices& m) {
  const Eigen::Matrix<double, 6, 6> real_part = m.M2.real();
  Eigen::LLT<Eigen::Matrix<double, 6, 6>> cholesky(real_part);
  if (cholesky.info() != Eigen::Success) {
    throw IntegrabilityError("Re(M2) is not positive definite at node " +
                             m.describe_node());
  }
  const ComplexSymmetricLdlt<6> ldlt(m.M2);
  if (!ldlt.ok()) {
    throw IntegrabilityError("LDL^T pivot without positive real part at node " +
                             m.describe_node());
  }
  const Complex quad = m.M1.transpose() * ldlt.solve(m.M1);
  return std::exp(m.M0 + 0.25 * quad - 0.5 * ldlt.log_determinant());
}

/// Inner double-z integrand of the density matrix at one node.
inline Complex integrand(double omega_s, double omega_i, double omega_i_prime,
                         double z, double z_prime, const KernelConfig& config,
                         ExpansionCache* cache = nullptr) {
  auto expansion = [&](double ws, double wi) {
    return cache ? cache->get(ws, wi)
                 : expand_delta_kz(ws, wi, config.crystal, config.geometry);
  };
  const ParaxialExpansion e = expansion(omega_s, omega_i);
  const ParaxialExpansion ep = expansion(omega_s, omega_i_prime);
  return gaussian_integral(assemble_M(e, ep, z, z_prime, config.beams));
}

}  // namespace spdc
