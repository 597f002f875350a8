#include <cmath>

#include <gtest/gtest.h>

#include "spdc/dispersion.hpp"
#include "spdc/units.hpp"

using namespace spdc;

namespace {

constexpr double kOmega800 = 2.0 * kPi * kSpeedOfLight / 0.8;

CrystalConfig bbo(double theta_deg = 30.0) {
  CrystalConfig c;
  c.cut_angle = deg_to_rad(theta_deg);
  return c;
}

// Independent evaluation of the index ellipsoid for the on-axis pump.
double n_theta(double lambda_um, double theta) {
  const double no = refractive_index(Material::BBO, Polarization::Ordinary, lambda_um);
  const double ne = refractive_index(Material::BBO, Polarization::ExtraordinaryPrincipal, lambda_um);
  const double c = std::cos(theta), s = std::sin(theta);
  return 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
}

}  // namespace

TEST(RefractiveIndex, FrozenSellmeierValues) {
  // Reference values evaluated separately from the Sellmeier polynomial.
  EXPECT_NEAR(refractive_index(Material::BBO, Polarization::Ordinary, 0.8), 1.660553524880645, 1e-12);
  EXPECT_NEAR(refractive_index(Material::BBO, Polarization::ExtraordinaryPrincipal, 0.4),
              1.5678876665187913, 1e-12);
  EXPECT_NEAR(refractive_index(Material::BBO, Polarization::Ordinary, 0.4), 1.6929832659808661, 1e-12);
}

TEST(RefractiveIndex, NormalDispersion) {
  EXPECT_GT(refractive_index(Material::BBO, Polarization::Ordinary, 0.4),
            refractive_index(Material::BBO, Polarization::Ordinary, 0.8));
  for (double l = 0.25; l < 1.05; l += 0.05) {
    EXPECT_GT(refractive_index(Material::BBO, Polarization::Ordinary, l), 1.0);
    EXPECT_GT(refractive_index(Material::BBO, Polarization::ExtraordinaryPrincipal, l), 1.0);
  }
}

TEST(RefractiveIndex, OutsideWindowNamesTheWindow) {
  try {
    refractive_index(Material::BBO, Polarization::Ordinary, 1.5);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("[0.2, 1.1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(refractive_index(Material::BBO, Polarization::Ordinary, 0.1), DomainError);
}

TEST(RefractiveIndex, LipschitzRegressionBound) {
  // max |dn/dlambda| over the window, measured once: 4.18 / um.
  constexpr double kBound = 4.2;
  const double delta = 1e-5;  // 0.01 nm
  for (auto pol : {Polarization::Ordinary, Polarization::ExtraordinaryPrincipal}) {
    for (double l = 0.2; l + delta <= 1.1; l += 1e-3) {
      const double dn = std::abs(refractive_index(Material::BBO, pol, l + delta) -
                                 refractive_index(Material::BBO, pol, l));
      ASSERT_LE(dn, kBound * delta) << l;
    }
  }
}

TEST(KzOrdinary, ClosedForms) {
  const double n = refractive_index_at_omega(Material::BBO, Polarization::Ordinary, kOmega800);
  const double k = n * kOmega800 / kSpeedOfLight;
  EXPECT_NEAR(kz_ordinary({0, 0}, kOmega800, Material::BBO), k, 1e-12 * k);
  EXPECT_NEAR(kz_ordinary({k, 0}, kOmega800, Material::BBO), 0.0, 1e-6);
  EXPECT_NEAR(kz_ordinary({k / 2, k / 2}, kOmega800, Material::BBO), k / std::sqrt(2.0), 1e-12 * k);
  EXPECT_THROW(kz_ordinary({1.01 * k, 0}, kOmega800, Material::BBO), DomainError);
}

TEST(KzOrdinary, OnAxisMatchesIndex) {
  for (double l = 0.3; l < 1.05; l += 0.1) {
    const double w = omega_from_wavelength_um(l);
    const double n = refractive_index(Material::BBO, Polarization::Ordinary, l);
    EXPECT_NEAR(kz_ordinary({0, 0}, w, Material::BBO) * kSpeedOfLight / w, n, 1e-12 * n);
  }
}

TEST(KzExtraordinary, PrincipalAxes) {
  const double w = 2.0 * kOmega800;
  const double k0 = w / kSpeedOfLight;
  const double no = refractive_index(Material::BBO, Polarization::Ordinary, 0.4);
  const double ne = refractive_index(Material::BBO, Polarization::ExtraordinaryPrincipal, 0.4);
  EXPECT_NEAR(kz_extraordinary({0, 0}, w, 0.0, Material::BBO), no * k0, 1e-12 * k0);
  EXPECT_NEAR(kz_extraordinary({0, 0}, w, kPi / 2, Material::BBO), ne * k0, 1e-12 * k0);
  const double theta = deg_to_rad(30.0);
  EXPECT_NEAR(kz_extraordinary({0, 0}, w, theta, Material::BBO), n_theta(0.4, theta) * k0, 1e-12 * k0);
  EXPECT_NEAR(n_theta(0.4, theta), 1.658923127845143, 1e-12);
}

TEST(KzExtraordinary, EvenInKy) {
  const double w = 2.0 * kOmega800;
  for (double kx : {-0.3, 0.0, 0.2})
    for (double ky : {0.05, 0.4})
      EXPECT_EQ(kz_extraordinary({kx, ky}, w, 0.5, Material::BBO),
                kz_extraordinary({kx, -ky}, w, 0.5, Material::BBO));
}

TEST(KzExtraordinary, SatisfiesUniaxialDispersionRelation) {
  const double w = 2.0 * kOmega800, k0 = w / kSpeedOfLight, theta = 0.5;
  const double no = refractive_index(Material::BBO, Polarization::Ordinary, 0.4);
  const double ne = refractive_index(Material::BBO, Polarization::ExtraordinaryPrincipal, 0.4);
  const TransverseK kp{0.7, -0.4};
  const double kz = kz_extraordinary(kp, w, theta, Material::BBO);
  const double along = kp.kx * std::sin(theta) + kz * std::cos(theta);
  const double perp2 = kp.kx * kp.kx + kp.ky * kp.ky + kz * kz - along * along;
  EXPECT_NEAR(along * along / (no * no) + perp2 / (ne * ne), k0 * k0, 1e-10 * k0 * k0);
  EXPECT_GT(kz, 0.0);
  EXPECT_THROW(kz_extraordinary({2 * k0, 0}, w, theta, Material::BBO), DomainError);
}

TEST(CentralTransverseK, Conventions) {
  GeometryConfig g;
  g.omega0 = kOmega800;
  g.alpha = 0.0;
  const TransverseK zero = central_transverse_k(kOmega800, g, Leg::Idler);
  EXPECT_EQ(zero.kx, 0.0);
  EXPECT_EQ(zero.ky, 0.0);

  g.alpha = deg_to_rad(2.0);
  g.convention = AngleConvention::Vacuum;
  const TransverseK ki = central_transverse_k(kOmega800, g, Leg::Idler);
  EXPECT_NEAR(ki.kx, -kOmega800 * std::sin(g.alpha) / kSpeedOfLight, 1e-15);
  EXPECT_EQ(ki.ky, 0.0);

  g.convention = AngleConvention::InCrystal;
  const double n = refractive_index_at_omega(Material::BBO, Polarization::Ordinary, kOmega800);
  const TransverseK ks = central_transverse_k(kOmega800, g, Leg::Signal);
  const TransverseK ki2 = central_transverse_k(kOmega800, g, Leg::Idler);
  EXPECT_NEAR(ks.kx, n * kOmega800 * std::sin(g.alpha) / kSpeedOfLight, 1e-15);
  EXPECT_EQ(ks.kx + ki2.kx, 0.0);
  EXPECT_EQ(ks.ky + ki2.ky, 0.0);
}

TEST(PhaseMatchingAngle, FrozenSolution) {
  const auto sol = solve_phase_matching_angle(bbo(), kOmega800);
  EXPECT_NEAR(rad_to_deg(sol.alpha), 2.5391795965554413, 1e-6);
  EXPECT_LT(sol.residual, 1e-9);
  EXPECT_NEAR(rad_to_deg(sol.alpha), 2.2, 0.5);
}

TEST(PhaseMatchingAngle, VacuumConventionFrozen) {
  const auto sol = solve_phase_matching_angle(bbo(), kOmega800, AngleConvention::Vacuum);
  // Equivalent to the in-crystal angle through n_o sin(a_in) = sin(a_vac).
  const double n = refractive_index(Material::BBO, Polarization::Ordinary, 0.8);
  EXPECT_NEAR(std::sin(sol.alpha), n * std::sin(deg_to_rad(2.5391795965554413)), 1e-8);
}

TEST(PhaseMatchingAngle, ResidualAtSolutionBelowTolerance) {
  GeometryConfig g;
  g.omega0 = kOmega800;
  g.alpha = solve_phase_matching_angle(bbo(), kOmega800).alpha;
  EXPECT_LT(std::abs(central_delta_kz(kOmega800, kOmega800, bbo(), g)), 1e-9);
}

TEST(PhaseMatchingAngle, NoBracketListsInterval) {
  try {
    solve_phase_matching_angle(bbo(10.0), kOmega800);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("10"), std::string::npos);
  }
}

TEST(PhaseMatchingAngle, CollinearCutAngle) {
  // Independent bisection over theta_c of the collinear degenerate mismatch.
  const double np2 = 2.0 * kOmega800 / kSpeedOfLight;
  const double no = refractive_index(Material::BBO, Polarization::Ordinary, 0.8);
  auto f = [&](double theta) { return n_theta(0.4, theta) * np2 - 2.0 * no * kOmega800 / kSpeedOfLight; };
  double lo = deg_to_rad(20.0), hi = deg_to_rad(40.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
  }
  const double theta_star = 0.5 * (lo + hi);
  EXPECT_NEAR(rad_to_deg(theta_star), 29.178082919813924, 1e-9);

  // Just above the collinear cut the non-collinear angle is small, and it
  // grows with theta_c around 30 deg.
  const double small = solve_phase_matching_angle(bbo(rad_to_deg(theta_star) + 0.01), kOmega800).alpha;
  EXPECT_LT(rad_to_deg(small), 0.5);
  double previous = 0.0;
  for (double t = 29.6; t <= 30.4 + 1e-9; t += 0.2) {
    const double a = solve_phase_matching_angle(bbo(t), kOmega800).alpha;
    EXPECT_GT(a, previous);
    previous = a;
  }
}

TEST(DeltaKz, DetunedAngleMatchesHandEvaluation) {
  GeometryConfig g;
  g.omega0 = kOmega800;
  g.alpha = solve_phase_matching_angle(bbo(), kOmega800).alpha + deg_to_rad(1.0);
  const double dk = central_delta_kz(kOmega800, kOmega800, bbo(), g);

  const double no = refractive_index(Material::BBO, Polarization::Ordinary, 0.8);
  const double k = no * kOmega800 / kSpeedOfLight;
  const double kx = k * std::sin(g.alpha);
  const double kp = n_theta(0.4, deg_to_rad(30.0)) * 2.0 * kOmega800 / kSpeedOfLight;
  const double expected = kp - 2.0 * std::sqrt(k * k - kx * kx);
  EXPECT_NEAR(dk, expected, 1e-12 * kp);
  EXPECT_GT(dk, 0.0);
}

TEST(DeltaKz, EvenInKy) {
  const double ws = 2.30, wi = 2.41;
  const CrystalConfig c = bbo();
  EXPECT_EQ(delta_kz({0.1, 0.03}, ws, {-0.12, -0.02}, wi, c),
            delta_kz({0.1, -0.03}, ws, {-0.12, 0.02}, wi, c));
}

TEST(Config, Validation) {
  CrystalConfig c;
  c.length = -1;
  EXPECT_THROW(c.validate(), DomainError);
  c = CrystalConfig{};
  c.cut_angle = 2.0;
  EXPECT_THROW(c.validate(), DomainError);
  GeometryConfig g;
  g.omega0 = 2.0;
  g.alpha = 2.0;
  EXPECT_THROW(g.validate(), DomainError);
}
