#pragma once

// Physical description of a pulsed type-I source with a fiber-coupled idler
// arm, plus the discretization used to evaluate its density matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "spdc/dispersion.hpp"
#include "spdc/error.hpp"
#include "spdc/kernel.hpp"
#include "spdc/units.hpp"

namespace spdc {

/// Spectral amplitude of the pump, either a transform-limited Gaussian pulse
/// or a sampled complex amplitude (linear interpolation in omega).
class PumpSpectrum {
 public:
  enum class Kind { Gaussian, Tabulated };

  /// A(omega) = sqrt(tau) / pi^(1/4) exp(-tau^2 (omega - omega_center)^2 / 2),
  /// normalized to unit integrated intensity.
  static PumpSpectrum gaussian(double duration_fs, double omega_center) {
    if (!(duration_fs > 0.0)) throw DomainError("pump duration must be positive");
    if (!(omega_center > 0.0)) throw DomainError("pump center must be positive");
    PumpSpectrum p;
    p.kind_ = Kind::Gaussian;
    p.duration_ = duration_fs;
    p.center_ = omega_center;
    return p;
  }

  /// Samples need not be sorted; at least two distinct frequencies.
  static PumpSpectrum tabulated(std::vector<double> omega,
                                std::vector<std::complex<double>> amplitude) {
    if (omega.size() != amplitude.size() || omega.size() < 2)
      throw DomainError("tabulated pump needs >= 2 (omega, amplitude) samples");
    std::vector<std::size_t> order(omega.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return omega[a] < omega[b]; });
    PumpSpectrum p;
    p.kind_ = Kind::Tabulated;
    for (std::size_t i : order) {
      if (!p.omega_.empty() && omega[i] <= p.omega_.back())
        throw DomainError("tabulated pump frequencies must be distinct");
      p.omega_.push_back(omega[i]);
      p.amplitude_.push_back(amplitude[i]);
    }
    // Intensity-weighted mean frequency.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < p.omega_.size(); ++i) {
      const double dw = p.omega_[i + 1] - p.omega_[i];
      const double i0 = std::norm(p.amplitude_[i]);
      const double i1 = std::norm(p.amplitude_[i + 1]);
      num += 0.5 * dw * (i0 * p.omega_[i] + i1 * p.omega_[i + 1]);
      den += 0.5 * dw * (i0 + i1);
    }
    if (!(den > 0.0)) throw DomainError("tabulated pump has zero intensity");
    p.center_ = num / den;
    return p;
  }

  Kind kind() const { return kind_; }
  double duration() const { return duration_; }
  double center() const { return center_; }
  const std::vector<double>& sample_omega() const { return omega_; }
  const std::vector<std::complex<double>>& sample_amplitude() const {
    return amplitude_;
  }

  /// Frequency range where the amplitude is defined.
  std::pair<double, double> support() const {
    if (kind_ == Kind::Gaussian)
      return {-std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
    return {omega_.front(), omega_.back()};
  }

  std::complex<double> amplitude(double omega) const {
    if (kind_ == Kind::Gaussian) {
      const double x = omega - center_;
      return std::sqrt(duration_) / std::pow(kPi, 0.25) *
             std::exp(-0.5 * duration_ * duration_ * x * x);
    }
    if (omega < omega_.front() || omega > omega_.back()) {
      std::ostringstream msg;
      msg << "pump frequency " << omega << " rad/fs outside tabulated support ["
          << omega_.front() << ", " << omega_.back() << "]";
      throw DomainError(msg.str());
    }
    const auto it = std::upper_bound(omega_.begin(), omega_.end(), omega);
    if (it == omega_.end()) return amplitude_.back();
    const std::size_t hi = static_cast<std::size_t>(it - omega_.begin());
    const std::size_t lo = hi - 1;
    const double t = (omega - omega_[lo]) / (omega_[hi] - omega_[lo]);
    return (1.0 - t) * amplitude_[lo] + t * amplitude_[hi];
  }

 private:
  Kind kind_ = Kind::Gaussian;
  double duration_ = 0.0;
  double center_ = 0.0;
  std::vector<double> omega_;
  std::vector<std::complex<double>> amplitude_;
};

/// Gaussian amplitude transmission with intensity FWHM `sigma` (rad/fs).
struct SpectralFilter {
  double sigma = 0.0;
  double omega_center = 0.0;

  static SpectralFilter from_wavelength(double fwhm_nm, double center_nm) {
    return {omega_width_from_wavelength_width(fwhm_nm, center_nm),
            omega_from_wavelength_nm(center_nm)};
  }

  double transmission(double omega) const {
    const double x = omega - omega_center;
    return std::exp(-2.0 * std::log(2.0) * x * x / (sigma * sigma));
  }

  void validate() const {
    if (!(sigma > 0.0)) throw DomainError("filter width must be positive");
    if (!(omega_center > 0.0)) throw DomainError("filter center must be positive");
  }
};

/// Output grid, uniform in vacuum wavelength.
struct WavelengthGrid {
  double lambda_min_nm = 780.0;
  double lambda_max_nm = 820.0;
  int points = 32;

  double wavelength_nm(int j) const {
    if (points == 1) return lambda_min_nm;
    const double step = (lambda_max_nm - lambda_min_nm) / (points - 1);
    return lambda_min_nm + j * step;
  }
};

struct QuadratureSpec {
  int nz = 24;
  int nzp = 24;
  int nws = 32;
  /// Half-width of the omega_s window in units of 1/tau_p.
  double window = 5.0;
  WavelengthGrid grid;

  void validate() const {
    if (nz < 4 || nzp < 4 || nws < 4)
      throw DomainError("quadrature node counts must be >= 4");
    // Fraction of |A|^2 inside +-W/tau is erf(W).
    if (!(std::erf(window) >= 0.9999))
      throw DomainError("omega_s window must cover >= 99.99% of the pump power");
    if (grid.points < 1) throw DomainError("output grid needs at least one point");
    if (!(grid.lambda_min_nm > 0.0) || grid.lambda_max_nm < grid.lambda_min_nm ||
        (grid.points > 1 && grid.lambda_max_nm == grid.lambda_min_nm))
      throw DomainError("output grid interval is empty or reversed");
  }
};

struct SourceConfig {
  CrystalConfig crystal;
  BeamGeometry beams;
  PumpSpectrum pump = PumpSpectrum::gaussian(100.0, omega_from_wavelength_nm(400.0));
  /// Observation angle; solved for perfect degenerate phase matching when empty.
  std::optional<double> alpha;
  AngleConvention convention = AngleConvention::InCrystal;
  std::optional<SpectralFilter> filter;

  /// Degenerate signal/idler frequency, half the pump center.
  double omega0() const { return 0.5 * pump.center(); }

  void validate() const {
    crystal.validate();
    beams.validate();
    if (beams.pump_waist < 1.0 || beams.fiber_waist < 1.0)
      throw DomainError("beam waists below 1 um are outside the paraxial regime");
    if (alpha && !(std::abs(*alpha) < kPi / 2))
      throw DomainError("|alpha| must be < 90 deg");
    if (filter) filter->validate();
  }

  /// Observation angle, solving for it if not configured.
  double resolved_alpha() const {
    if (alpha) return *alpha;
    return solve_phase_matching_angle(crystal, omega0(), convention).alpha;
  }

  GeometryConfig geometry() const {
    GeometryConfig g;
    g.alpha = resolved_alpha();
    g.omega0 = omega0();
    g.convention = convention;
    return g;
  }

  KernelConfig kernel_config() const { return {crystal, geometry(), beams}; }
};

}  // namespace spdc
