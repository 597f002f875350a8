#pragma once

// Dispersion of a negative uniaxial crystal: Sellmeier indices, longitudinal
// wave-vector components of ordinary and extraordinary waves, the exact
// type-I phase mismatch and the phase-matching angle solver.
//
// Conventions: the optic axis lies in the xz-plane at angle theta_c to z,
// the pump is extraordinary, signal and idler are ordinary. The signal is
// emitted towards +x and the idler towards -x.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>

#include "spdc/error.hpp"
#include "spdc/units.hpp"

namespace spdc {

enum class Material { BBO };

enum class Polarization { Ordinary, ExtraordinaryPrincipal };

inline std::string_view to_string(Material m) {
  switch (m) {
    case Material::BBO:
      return "BBO";
  }
  return "unknown";
}

/// n^2 = a + b / (lambda^2 - c) - d * lambda^2, lambda in um.
struct SellmeierCoefficients {
  double a;
  double b;
  double c;
  double d;

  double index(double lambda_um) const {
    const double l2 = lambda_um * lambda_um;
    return std::sqrt(a + b / (l2 - c) - d * l2);
  }
};

struct TransparencyWindow {
  double min_um;
  double max_um;

  bool contains(double lambda_um) const {
    return lambda_um >= min_um && lambda_um <= max_um;
  }
};

struct MaterialModel {
  SellmeierCoefficients ordinary;
  SellmeierCoefficients extraordinary;
  TransparencyWindow window;
};

/// beta-BaB2O4, K. Kato, IEEE J. Quantum Electron. QE-22, 1013 (1986).
/// See docs/dispersion.md for the provenance of these constants.
inline constexpr MaterialModel kBboKato1986{
    {2.7359, 0.01878, 0.01822, 0.01354},
    {2.3753, 0.01224, 0.01667, 0.01516},
    {0.20, 1.10},
};

inline const MaterialModel& material_model(Material m) {
  switch (m) {
    case Material::BBO:
      return kBboKato1986;
  }
  throw DomainError("unknown material");
}

/// Refractive index of `m` for the given polarization at vacuum wavelength
/// `lambda_um`. Throws DomainError outside the fit's window.
inline double refractive_index(Material m, Polarization pol, double lambda_um) {
  const MaterialModel& model = material_model(m);
  if (!(model.window.contains(lambda_um))) {
    std::ostringstream msg;
    msg << "wavelength " << lambda_um << " um outside the " << to_string(m)
        << " dispersion window [" << model.window.min_um << ", "
        << model.window.max_um << "] um";
    throw DomainError(msg.str());
  }
  return pol == Polarization::Ordinary ? model.ordinary.index(lambda_um)
                                       : model.extraordinary.index(lambda_um);
}

inline double refractive_index_at_omega(Material m, Polarization pol,
                                        double omega) {
  return refractive_index(m, pol, wavelength_um_from_omega(omega));
}

struct CrystalConfig {
  Material material = Material::BBO;
  double length = 1000.0;      ///< um
  double cut_angle = kPi / 6;  ///< theta_c, rad

  void validate() const {
    if (!(length > 0.0)) throw DomainError("crystal length must be positive");
    if (!(cut_angle >= 0.0 && cut_angle <= kPi / 2))
      throw DomainError("cut angle must lie in [0, pi/2]");
  }
};

/// Transverse wave vector [rad/um].
struct TransverseK {
  double kx = 0.0;
  double ky = 0.0;

  double norm2() const { return kx * kx + ky * ky; }

  friend TransverseK operator+(TransverseK a, TransverseK b) {
    return {a.kx + b.kx, a.ky + b.ky};
  }
  friend TransverseK operator-(TransverseK a, TransverseK b) {
    return {a.kx - b.kx, a.ky - b.ky};
  }
  friend bool operator==(const TransverseK&, const TransverseK&) = default;
};

/// How the observation angle alpha maps onto a transverse wave vector.
///  - InCrystal: alpha is the propagation angle inside the crystal,
///    |k_perp0| = n_o(omega) omega sin(alpha) / c.
///  - Vacuum: |k_perp0| = omega sin(alpha) / c, i.e. alpha is the angle
///    after the (transverse-momentum conserving) exit face.
enum class AngleConvention { InCrystal, Vacuum };

struct GeometryConfig {
  double alpha = 0.0;    ///< rad
  double omega0 = 0.0;   ///< degenerate frequency, rad/fs
  int signal_side = +1;  ///< sign of x for the signal; the idler takes the other
  AngleConvention convention = AngleConvention::InCrystal;

  void validate() const {
    if (!(std::abs(alpha) < kPi / 2)) throw DomainError("|alpha| must be < pi/2");
    if (!(omega0 > 0.0)) throw DomainError("omega0 must be positive");
    if (signal_side != 1 && signal_side != -1)
      throw DomainError("signal_side must be +1 or -1");
  }
};

enum class Leg { Signal, Idler };

namespace detail {

inline double kz_from_radicand(double radicand, const char* what) {
  if (radicand < 0.0) {
    throw DomainError(std::string("evanescent ") + what +
                      " wave: transverse wave vector exceeds |k|");
  }
  return std::sqrt(radicand);
}

/// +z root of the uniaxial dispersion relation for an extraordinary wave
/// with indices (n_o, n_e) at vacuum wave number k0 = omega / c.
inline double kz_extraordinary_from_indices(TransverseK k, double k0,
                                            double n_o, double n_e,
                                            double theta_c) {
  const double inv_o = 1.0 / (n_o * n_o);
  const double inv_e = 1.0 / (n_e * n_e);
  const double diff = inv_o - inv_e;
  const double s = std::sin(theta_c);
  const double c = std::cos(theta_c);
  // a2 kz^2 + a1 kz + a0 = 0
  const double a2 = inv_e + diff * c * c;
  const double a1 = 2.0 * diff * s * c * k.kx;
  const double a0 = diff * s * s * k.kx * k.kx + inv_e * k.norm2() - k0 * k0;
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc < 0.0) {
    throw DomainError("no real extraordinary-wave solution for this k_perp");
  }
  const double sq = std::sqrt(disc);
  double root;
  if (a1 >= 0.0) {
    const double q = -0.5 * (a1 + sq);
    root = (q != 0.0) ? a0 / q : 0.0;
  } else {
    const double q = -0.5 * (a1 - sq);
    root = q / a2;
  }
  if (root < 0.0) {
    throw DomainError("extraordinary wave does not propagate towards +z");
  }
  return root;
}

}  // namespace detail

/// Longitudinal wave-vector component of an ordinary wave.
inline double kz_ordinary(TransverseK k_perp, double omega, Material m) {
  const double n = refractive_index_at_omega(m, Polarization::Ordinary, omega);
  const double k = n * omega / kSpeedOfLight;
  return detail::kz_from_radicand(k * k - k_perp.norm2(), "ordinary");
}

/// Longitudinal wave-vector component of an extraordinary wave, optic axis
/// (sin theta_c, 0, cos theta_c).
inline double kz_extraordinary(TransverseK k_perp, double omega,
                               double theta_c, Material m) {
  const double lambda = wavelength_um_from_omega(omega);
  const double n_o = refractive_index(m, Polarization::Ordinary, lambda);
  const double n_e = refractive_index(m, Polarization::ExtraordinaryPrincipal, lambda);
  return detail::kz_extraordinary_from_indices(k_perp, omega / kSpeedOfLight,
                                               n_o, n_e, theta_c);
}

/// Transverse wave vector of the phase-matching direction for one leg.
inline TransverseK central_transverse_k(double omega, const GeometryConfig& geometry,
                                        Leg leg, Material m = Material::BBO) {
  double magnitude = omega * std::sin(geometry.alpha) / kSpeedOfLight;
  if (geometry.convention == AngleConvention::InCrystal) {
    magnitude *= refractive_index_at_omega(m, Polarization::Ordinary, omega);
  }
  const int side = leg == Leg::Signal ? geometry.signal_side : -geometry.signal_side;
  return {side * magnitude, 0.0};
}

/// Exact type-I phase mismatch at fixed frequencies (omega_s, omega_i).
/// Refractive indices are evaluated once on construction, so repeated calls
/// with different transverse wave vectors are cheap.
class PhaseMismatch {
 public:
  PhaseMismatch(double omega_s, double omega_i, const CrystalConfig& crystal)
      : omega_s_(omega_s), omega_i_(omega_i), theta_c_(crystal.cut_angle) {
    const Material m = crystal.material;
    const double omega_p = omega_s + omega_i;
    const double lp = wavelength_um_from_omega(omega_p);
    kp0_ = omega_p / kSpeedOfLight;
    np_o_ = refractive_index(m, Polarization::Ordinary, lp);
    np_e_ = refractive_index(m, Polarization::ExtraordinaryPrincipal, lp);
    ks_ = refractive_index_at_omega(m, Polarization::Ordinary, omega_s) *
          omega_s / kSpeedOfLight;
    ki_ = refractive_index_at_omega(m, Polarization::Ordinary, omega_i) *
          omega_i / kSpeedOfLight;
  }

  double operator()(TransverseK k_s, TransverseK k_i) const {
    const double kpz = detail::kz_extraordinary_from_indices(k_s + k_i, kp0_,
                                                             np_o_, np_e_, theta_c_);
    const double ksz = detail::kz_from_radicand(ks_ * ks_ - k_s.norm2(), "signal");
    const double kiz = detail::kz_from_radicand(ki_ * ki_ - k_i.norm2(), "idler");
    return kpz - ksz - kiz;
  }

  double omega_s() const { return omega_s_; }
  double omega_i() const { return omega_i_; }
  /// |k| of the ordinary signal / idler waves.
  double signal_k() const { return ks_; }
  double idler_k() const { return ki_; }

 private:
  double omega_s_;
  double omega_i_;
  double theta_c_;
  double kp0_;
  double np_o_;
  double np_e_;
  double ks_;
  double ki_;
};

/// k_pz(k_s + k_i, omega_s + omega_i) - k_sz(k_s, omega_s) - k_iz(k_i, omega_i)
inline double delta_kz(TransverseK k_perp_s, double omega_s, TransverseK k_perp_i,
                       double omega_i, const CrystalConfig& crystal) {
  return PhaseMismatch(omega_s, omega_i, crystal)(k_perp_s, k_perp_i);
}

/// Phase mismatch at the central directions of both legs.
inline double central_delta_kz(double omega_s, double omega_i,
                               const CrystalConfig& crystal,
                               const GeometryConfig& geometry) {
  const TransverseK ks0 =
      central_transverse_k(omega_s, geometry, Leg::Signal, crystal.material);
  const TransverseK ki0 =
      central_transverse_k(omega_i, geometry, Leg::Idler, crystal.material);
  return delta_kz(ks0, omega_s, ki0, omega_i, crystal);
}

struct PhaseMatchingSolution {
  double alpha;     ///< rad
  double residual;  ///< |delta k_z| at alpha, rad/um
};

/// Observation angle alpha in (0, 10 deg] at which the degenerate pair
/// (omega0, omega0) is phase matched with a collinear pump at 2 omega0.
/// Scans in 0.01 deg steps for a sign change, then bisects.
inline PhaseMatchingSolution solve_phase_matching_angle(
    const CrystalConfig& crystal, double omega0,
    AngleConvention convention = AngleConvention::InCrystal) {
  constexpr double kStepDeg = 0.01;
  constexpr double kMaxDeg = 10.0;
  constexpr double kTolerance = 1e-9;

  GeometryConfig geometry;
  geometry.omega0 = omega0;
  geometry.convention = convention;
  auto mismatch = [&](double alpha) {
    geometry.alpha = alpha;
    return central_delta_kz(omega0, omega0, crystal, geometry);
  };

  const int steps = static_cast<int>(std::lround(kMaxDeg / kStepDeg));
  double lo = deg_to_rad(kStepDeg);
  double f_lo = mismatch(lo);
  if (f_lo == 0.0) return {lo, 0.0};
  bool bracketed = false;
  double hi = lo;
  double f_hi = f_lo;
  for (int step = 2; step <= steps; ++step) {
    hi = deg_to_rad(step * kStepDeg);
    f_hi = mismatch(hi);
    if (f_hi == 0.0) return {hi, 0.0};
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (!bracketed) {
    std::ostringstream msg;
    msg << "no phase-matching angle: delta k_z keeps its sign over alpha in ["
        << kStepDeg << ", " << kMaxDeg << "] deg (theta_c = "
        << rad_to_deg(crystal.cut_angle) << " deg, degenerate wavelength "
        << wavelength_nm_from_omega(omega0) << " nm)";
    throw NumericError(msg.str());
  }

  double mid = 0.5 * (lo + hi);
  double f_mid = mismatch(mid);
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(f_mid) < kTolerance * 1e-3 || hi - lo < 1e-15) break;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    mid = 0.5 * (lo + hi);
    f_mid = mismatch(mid);
  }
  if (std::abs(f_mid) >= kTolerance) {
    throw NumericError("phase-matching bisection did not reach |delta k_z| < 1e-9");
  }
  return {mid, std::abs(f_mid)};
}

}  // namespace spdc
