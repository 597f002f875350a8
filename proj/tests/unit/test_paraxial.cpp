#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "spdc/paraxial.hpp"
#include "spdc/source.hpp"

using namespace spdc;

namespace {

struct Fixture {
  SourceConfig source;
  CrystalConfig crystal = source.crystal;
  GeometryConfig geometry = source.geometry();
  double w0 = source.omega0();
};

}  // namespace

TEST(Expansion, VanishesAtPhaseMatching) {
  Fixture f;
  const ParaxialExpansion e = expand_delta_kz(f.w0, f.w0, f.crystal, f.geometry);
  EXPECT_LT(std::abs(e.dkz0), 1e-9);
  EXPECT_EQ(e.delta0().kx, 0.0);
  EXPECT_EQ(e.delta0().ky, 0.0);
}

TEST(Expansion, PlaneGeometryDecouplesXY) {
  Fixture f;
  const ParaxialExpansion e = expand_delta_kz(1.02 * f.w0, 0.98 * f.w0, f.crystal, f.geometry);
  EXPECT_EQ(e.D1[1], 0.0);
  EXPECT_EQ(e.D1[3], 0.0);
  for (int a : {0, 2})
    for (int b : {1, 3}) {
      EXPECT_EQ(e.D2(a, b), 0.0);
      EXPECT_EQ(e.D2(b, a), 0.0);
    }
  EXPECT_TRUE(e.D1.allFinite());
  EXPECT_TRUE(e.D2.allFinite());
}

TEST(Expansion, SymmetricSecondOrder) {
  Fixture f;
  const DeltaKzDerivatives d = differentiate_delta_kz(1.01 * f.w0, 0.99 * f.w0, f.crystal, f.geometry);
  EXPECT_LE((d.hessian - d.hessian.transpose()).norm(), 1e-10 * d.hessian.norm());
  EXPECT_EQ(d.d_si(), d.d_is().transpose());
}

TEST(Expansion, RichardsonCrossCheckWithHalfStep) {
  Fixture f;
  for (double scale : {0.97, 1.0, 1.03}) {
    const double ws = scale * f.w0, wi = (2.0 - scale) * f.w0;
    const auto a = differentiate_delta_kz(ws, wi, f.crystal, f.geometry, 2, kDefaultDerivativeStep);
    const auto b = differentiate_delta_kz(ws, wi, f.crystal, f.geometry, 2, 0.5 * kDefaultDerivativeStep);
    for (int i = 0; i < 4; ++i)
      EXPECT_NEAR(a.gradient[i], b.gradient[i], 1e-6 * b.gradient.cwiseAbs().maxCoeff());
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        EXPECT_NEAR(a.hessian(i, j), b.hessian(i, j), 1e-6 * b.hessian.cwiseAbs().maxCoeff());
  }
}

TEST(Expansion, FirstOrderOnlySkipsHessian) {
  Fixture f;
  const auto d = differentiate_delta_kz(f.w0, f.w0, f.crystal, f.geometry, 1);
  EXPECT_TRUE(d.gradient.allFinite());
  EXPECT_THROW(differentiate_delta_kz(f.w0, f.w0, f.crystal, f.geometry, 3), ContractViolation);
}

TEST(Expansion, QuadraticModelWithinFiberBall) {
  Fixture f;
  const ParaxialExpansion e = expand_delta_kz(f.w0, f.w0, f.crystal, f.geometry);
  const ExpansionResidual r = expansion_residual(e, f.crystal, 1.0 / 100.0, 9);
  EXPECT_GT(r.exact_variation, 0.0);
  EXPECT_LT(r.relative(), 0.01);
}

TEST(Expansion, ResidualOnWorkingGrid) {
  // Signal range sqrt(1/w_f^2 + 1/w_p^2) for 100 um waists, idler over the
  // 760-840 nm idler window, signal over the pump window.
  Fixture f;
  const double radius = std::sqrt(2.0) / 100.0;
  for (double lambda = 760.0; lambda <= 840.0; lambda += 20.0) {
    const double wi = omega_from_wavelength_nm(lambda);
    for (double d : {-0.05, 0.0, 0.05}) {
      const ParaxialExpansion e = expand_delta_kz(2 * f.w0 - wi + d, wi, f.crystal, f.geometry);
      EXPECT_LT(expansion_residual(e, f.crystal, radius, 5).relative(), 1e-4) << lambda;
    }
  }
}

TEST(Expansion, CoefficientsVarySmoothly) {
  // Largest D1 change between neighbors of a 64-point 760-840 nm grid on the
  // energy-conserving diagonal, measured once: 8.5e-5 rad/um per rad/um.
  constexpr double kBound = 1e-4;
  Fixture f;
  Eigen::Vector4d previous;
  for (int j = 0; j < 64; ++j) {
    const double wi = omega_from_wavelength_nm(760.0 + j * 80.0 / 63.0);
    const ParaxialExpansion e = expand_delta_kz(2 * f.w0 - wi, wi, f.crystal, f.geometry);
    if (j > 0) {
      EXPECT_LT((e.D1 - previous).cwiseAbs().maxCoeff(), kBound) << j;
    }
    previous = e.D1;
  }
}

TEST(Expansion, TooCloseToEvanescenceThrows) {
  Fixture f;
  GeometryConfig g = f.geometry;
  // Central directions almost grazing: +-3h leaves the propagating domain.
  const double n = refractive_index_at_omega(Material::BBO, Polarization::Ordinary, f.w0);
  const double k = n * f.w0 / kSpeedOfLight;
  g.alpha = std::asin((k - 0.01) / k);
  EXPECT_THROW(expand_delta_kz(f.w0, f.w0, f.crystal, g), DomainError);
}

TEST(Expansion, EvaluateMatchesDefinition) {
  Fixture f;
  const ParaxialExpansion e = expand_delta_kz(1.01 * f.w0, 0.99 * f.w0, f.crystal, f.geometry);
  const Eigen::Vector4d kappa(1e-3, -2e-3, 5e-4, 1e-3);
  EXPECT_DOUBLE_EQ(e.evaluate(kappa), e.dkz0 + e.D1.dot(kappa) + kappa.dot(e.D2 * kappa));
}

TEST(ExpansionCache, ConcurrentReadsAgree) {
  Fixture f;
  ExpansionCache cache([&](double ws, double wi) {
    return expand_delta_kz(ws, wi, f.crystal, f.geometry);
  });
  const ParaxialExpansion direct = expand_delta_kz(f.w0, 1.01 * f.w0, f.crystal, f.geometry);
  std::vector<std::jthread> workers;
  std::vector<double> seen(8);
  for (int t = 0; t < 8; ++t)
    workers.emplace_back([&, t] { seen[t] = cache.get(f.w0, 1.01 * f.w0).D2(0, 2); });
  workers.clear();
  for (double v : seen) EXPECT_EQ(v, direct.D2(0, 2));
  EXPECT_EQ(cache.size(), 1u);
  cache.get(f.w0, f.w0);
  EXPECT_EQ(cache.size(), 2u);
  cache.clear();
  EXPECT_EQ(cache.size(), 0u);
}
