#pragma once

// Internal unit system: lengths in um, time in fs, angular frequency in
// rad/fs, wave numbers in rad/um.

#include <numbers>

namespace spdc {

inline constexpr double kPi = std::numbers::pi;

/// Speed of light in vacuum [um/fs].
inline constexpr double kSpeedOfLight = 0.299792458;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Vacuum wavelength [um] -> angular frequency [rad/fs].
constexpr double omega_from_wavelength_um(double lambda_um) {
  return 2.0 * kPi * kSpeedOfLight / lambda_um;
}

constexpr double wavelength_um_from_omega(double omega) {
  return 2.0 * kPi * kSpeedOfLight / omega;
}

constexpr double omega_from_wavelength_nm(double lambda_nm) {
  return omega_from_wavelength_um(lambda_nm * 1e-3);
}

constexpr double wavelength_nm_from_omega(double omega) {
  return wavelength_um_from_omega(omega) * 1e3;
}

/// Converts a small wavelength interval around `center_nm` into the
/// corresponding angular-frequency interval (first order in the width).
constexpr double omega_width_from_wavelength_width(double width_nm,
                                                   double center_nm) {
  return 2.0 * kPi * kSpeedOfLight * (width_nm * 1e-3) /
         ((center_nm * 1e-3) * (center_nm * 1e-3));
}

}  // namespace spdc
