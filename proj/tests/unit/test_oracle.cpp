#include <cmath>

#include <gtest/gtest.h>

#include "spdc/oracle.hpp"

using namespace spdc;

namespace {

QuadratureSpec small(int points, int nz = 8, int nws = 16) {
  QuadratureSpec q;
  q.nz = q.nzp = nz;
  q.nws = nws;
  q.grid = {790, 810, points};
  return q;
}

SourceConfig with_waists(double w) {
  SourceConfig s;
  s.beams.pump_waist = s.beams.fiber_waist = w;
  return s;
}

}  // namespace

TEST(ZIntegral, ClosedForm) {
  EXPECT_EQ(z_integral(0.0, 1000.0), 1000.0);
  EXPECT_NEAR(z_integral(0.01, 1000.0), 1000.0 * std::sin(5.0) / 5.0, 1e-10);
  EXPECT_NEAR(z_integral(2 * kPi / 1000.0, 1000.0), 0.0, 1e-10);
}

TEST(PsiDirect, ForcedZeroMismatchGivesGaussianOverlap) {
  const SourceConfig s;
  const GeometryConfig g = s.geometry();
  const double w0 = s.omega0();
  const TransverseK ks{central_transverse_k(w0, g, Leg::Signal).kx + 2e-3, 1e-3};
  const auto zero = [](TransverseK, TransverseK) { return 0.0; };
  const std::complex<double> psi = psi_i_direct(ks, w0, w0, s, g, gauss_hermite(32), zero);
  // int d^2k exp(-a |k|^2) exp(-b |d + k|^2) = pi / (a + b) exp(-a b |d|^2 / (a + b))
  const double a = 100.0 * 100.0 / 2, b = 100.0 * 100.0 / 2;
  const TransverseK d = ks + central_transverse_k(w0, g, Leg::Idler);
  const double overlap = kPi / (a + b) * std::exp(-a * b * d.norm2() / (a + b));
  const double expected = s.pump.amplitude(2 * w0).real() * s.crystal.length * overlap;
  EXPECT_NEAR(psi.real(), expected, 1e-10 * expected);
}

TEST(PsiDirect, SuppressedWhenCollectionIsDetuned) {
  const SourceConfig s;
  const GeometryConfig matched = s.geometry();
  GeometryConfig detuned = matched;
  detuned.alpha += deg_to_rad(1.0);
  const double w0 = s.omega0();
  const TransverseK ks = central_transverse_k(w0, matched, Leg::Signal);
  const auto gh = gauss_hermite(24);
  const double on = std::abs(psi_i_direct(ks, w0, w0, s, matched, gh));
  const double off = std::abs(psi_i_direct(ks, w0, w0, s, detuned, gh));
  EXPECT_GT(on, 1e3 * off);
}

TEST(PsiDirect, EvenInSignalKy) {
  const SourceConfig s;
  const GeometryConfig g = s.geometry();
  const double w0 = s.omega0();
  const TransverseK ks = central_transverse_k(w0, g, Leg::Signal);
  const auto gh = gauss_hermite(20);
  const auto up = psi_i_direct({ks.kx + 1e-3, 4e-3}, w0, 1.01 * w0, s, g, gh);
  const auto down = psi_i_direct({ks.kx + 1e-3, -4e-3}, w0, 1.01 * w0, s, g, gh);
  EXPECT_LT(std::abs(up - down), 1e-12 * std::abs(up));
}

TEST(Compare, IdentityAndScaleInvariance) {
  const DensityMatrix x = compute_density_matrix(SourceConfig{}, small(3));
  const OracleReport same = compare(x, x);
  EXPECT_EQ(same.rel_frobenius_error, 0.0);
  EXPECT_EQ(same.max_abs_entry_error, 0.0);
  DensityMatrix twice = x;
  twice.values *= 2.0;
  EXPECT_LT(compare(x, twice).rel_frobenius_error, 1e-15);
  const DensityMatrix other = compute_density_matrix(SourceConfig{}, small(4));
  EXPECT_THROW(compare(x, other), ContractViolation);
}

TEST(QuadraticDirect, MatchesPipelineOnSmallGrid) {
  const SourceConfig s;
  const QuadratureSpec q = small(5);
  const DensityMatrix pipeline = compute_density_matrix(s, q);
  const DensityMatrix direct = density_matrix_quadratic_direct(s, q);
  EXPECT_LT(direct.hermiticity_residual(), 1e-12);
  EXPECT_LE(compare(pipeline, direct).rel_frobenius_error, 1e-3);

  // Halving the transverse nodes moves the oracle more than it disagrees
  // with the pipeline.
  OracleOptions coarse;
  coarse.transverse_nodes = 12;
  const DensityMatrix half = density_matrix_quadratic_direct(s, q, coarse);
  EXPECT_GT(compare(half, direct).rel_frobenius_error, compare(pipeline, direct).rel_frobenius_error);
}

TEST(QuadraticDirect, ConvergesWithTransverseNodes) {
  // Narrow beams widen the transverse integrand, so the node dependence is
  // visible above round-off.
  const SourceConfig s = with_waists(30.0);
  const QuadratureSpec q = small(3);
  const DensityMatrix pipeline = compute_density_matrix(s, q);
  double previous = INFINITY;
  for (int nodes : {12, 24, 48}) {
    OracleOptions o;
    o.transverse_nodes = nodes;
    const double err = compare(pipeline, density_matrix_quadratic_direct(s, q, o)).rel_frobenius_error;
    EXPECT_LT(err, previous) << nodes;
    previous = err;
  }
}

TEST(QuadraticDirect, GridLimit) {
  EXPECT_THROW(density_matrix_quadratic_direct(SourceConfig{}, small(6)), ContractViolation);
  EXPECT_THROW(density_matrix_direct(SourceConfig{}, small(9)), ContractViolation);
}

TEST(ExactDirect, HermitianPositiveTraceAndParaxialAgreement) {
  const SourceConfig s;
  const QuadratureSpec q = small(3, 8, 8);
  OracleOptions o;
  o.transverse_nodes = 16;
  const DensityMatrix direct = density_matrix_direct(s, q, o);
  EXPECT_LT(direct.hermiticity_residual(), 1e-12);
  EXPECT_GT(direct.trace(), 0.0);
  EXPECT_LE(compare(compute_density_matrix(s, q), direct).rel_frobenius_error, 0.02);
}

TEST(ExactDirect, ParaxialErrorShrinksWithWaist) {
  const QuadratureSpec q = small(3, 8, 8);
  OracleOptions o;
  o.transverse_nodes = 24;
  auto error = [&](double w) {
    const SourceConfig s = with_waists(w);
    return compare(compute_density_matrix(s, q), density_matrix_direct(s, q, o)).rel_frobenius_error;
  };
  EXPECT_LT(error(200.0), error(50.0));
}
