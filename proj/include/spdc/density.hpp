#pragma once

// Spectral density matrix of the fiber-coupled idler:
//
//   rho(w, w') = int dws A*(ws + w) A(ws + w') int dz int dz' K(ws, w, w', z, z')
//
// with K the analytically integrated transverse kernel. The outer integrals
// use Gauss-Legendre rules; the omega_s window follows the support of the
// pump product for each matrix entry separately, so every entry is a
// grid-independent pointwise evaluation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc/error.hpp"
#include "spdc/kernel.hpp"
#include "spdc/parallel.hpp"
#include "spdc/paraxial.hpp"
#include "spdc/quadrature.hpp"
#include "spdc/source.hpp"
#include "spdc/units.hpp"

namespace spdc {

struct DensityMatrix {
  std::vector<double> omega;    ///< rad/fs, ordered by ascending wavelength
  std::vector<double> weights;  ///< quadrature weights in omega
  Eigen::MatrixXcd values;      ///< rho[j, k] = rho(omega_j, omega_k)
  bool normalized = false;

  int size() const { return static_cast<int>(omega.size()); }
  double wavelength_nm(int j) const { return wavelength_nm_from_omega(omega[j]); }

  /// Quadrature-weighted diagonal sum.
  double trace() const {
    double t = 0.0;
    for (int j = 0; j < size(); ++j) t += weights[j] * values(j, j).real();
    return t;
  }

  /// max |rho - rho^dagger| / max |rho|.
  double hermiticity_residual() const {
    const double scale = values.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (values - values.adjoint()).cwiseAbs().maxCoeff() / scale;
  }
};

/// Trapezoidal weights on a (possibly non-uniform, unsorted) set of nodes.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * std::abs(x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

/// Output nodes (uniform in wavelength) converted to angular frequency.
inline std::pair<std::vector<double>, std::vector<double>> output_grid(
    const WavelengthGrid& grid) {
  std::vector<double> omega(grid.points);
  for (int j = 0; j < grid.points; ++j)
    omega[j] = omega_from_wavelength_nm(grid.wavelength_nm(j));
  return {omega, trapezoid_weights(omega)};
}

inline std::complex<double> pump_amplitude(const PumpSpectrum& spectrum, double omega) {
  return spectrum.amplitude(omega);
}

/// omega_s interval over which A*(ws + w) A(ws + w') is integrated.
inline std::optional<std::pair<double, double>> signal_window(
    const PumpSpectrum& pump, double window, double omega_i, double omega_i_prime) {
  if (pump.kind() == PumpSpectrum::Kind::Gaussian) {
    const double center = pump.center() - 0.5 * (omega_i + omega_i_prime);
    const double half = window / pump.duration();
    return std::pair{center - half, center + half};
  }
  const auto [lo, hi] = pump.support();
  const double a = std::max(lo - omega_i, lo - omega_i_prime);
  const double b = std::min(hi - omega_i, hi - omega_i_prime);
  if (!(b > a)) return std::nullopt;
  return std::pair{a, b};
}

struct ComputeOptions {
  unsigned threads = 0;  ///< 0 = hardware concurrency
  /// Evaluate every entry instead of mirroring the upper triangle.
  bool full_matrix = false;
};

namespace detail {

struct DensityIntegrator {
  const SourceConfig& config;
  const QuadratureSpec& quad;
  KernelConfig kernel;
  QuadratureRule z_rule;
  QuadratureRule zp_rule;
  QuadratureRule ws_reference;
  ExpansionCache cache;

  DensityIntegrator(const SourceConfig& cfg, const QuadratureSpec& q)
      : config(cfg),
        quad(q),
        kernel(cfg.kernel_config()),
        z_rule(gauss_legendre(q.nz, -0.5 * cfg.crystal.length, 0.5 * cfg.crystal.length)),
        zp_rule(gauss_legendre(q.nzp, -0.5 * cfg.crystal.length, 0.5 * cfg.crystal.length)),
        ws_reference(gauss_legendre(q.nws)),
        cache([k = kernel](double ws, double wi) {
          return expand_delta_kz(ws, wi, k.crystal, k.geometry);
        }) {}

  std::complex<double> entry(double omega_i, double omega_i_prime) {
    const auto window = signal_window(config.pump, quad.window, omega_i, omega_i_prime);
    if (!window) return {0.0, 0.0};
    const QuadratureRule ws_rule = ws_reference.mapped(window->first, window->second);
    std::complex<double> total{0.0, 0.0};
    for (std::size_t n = 0; n < ws_rule.size(); ++n) {
      const double ws = ws_rule.nodes[n];
      const std::complex<double> spectral =
          std::conj(config.pump.amplitude(ws + omega_i)) *
          config.pump.amplitude(ws + omega_i_prime);
      if (spectral == 0.0) continue;
      const ParaxialExpansion e = cache.get(ws, omega_i);
      const ParaxialExpansion ep = cache.get(ws, omega_i_prime);
      std::complex<double> inner{0.0, 0.0};
      for (std::size_t a = 0; a < z_rule.size(); ++a) {
        std::complex<double> row{0.0, 0.0};
        for (std::size_t b = 0; b < zp_rule.size(); ++b) {
          row += zp_rule.weights[b] *
                 gaussian_integral(assemble_M(e, ep, z_rule.nodes[a], zp_rule.nodes[b],
                                              kernel.beams));
        }
        inner += z_rule.weights[a] * row;
      }
      total += ws_rule.weights[n] * spectral * inner;
    }
    return total;
  }
};

}  // namespace detail

/// Unnormalized, unfiltered density matrix on the configured output grid.
inline DensityMatrix compute_density_matrix(const SourceConfig& config,
                                            const QuadratureSpec& quad,
                                            const ComputeOptions& options = {}) {
  config.validate();
  quad.validate();
  detail::DensityIntegrator integrator(config, quad);

  DensityMatrix rho;
  std::tie(rho.omega, rho.weights) = output_grid(quad.grid);
  const int n = rho.size();
  rho.values = Eigen::MatrixXcd::Zero(n, n);

  std::vector<std::pair<int, int>> entries;
  for (int j = 0; j < n; ++j)
    for (int k = options.full_matrix ? 0 : j; k < n; ++k) entries.emplace_back(j, k);

  parallel_for(entries.size(), options.threads, [&](std::size_t idx) {
    const auto [j, k] = entries[idx];
    rho.values(j, k) = integrator.entry(rho.omega[j], rho.omega[k]);
  });
  if (!options.full_matrix) {
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) rho.values(k, j) = std::conj(rho.values(j, k));
  }
  return rho;
}

/// rho(w, w') -> L(w) L(w') rho(w, w'); the result is unnormalized.
inline DensityMatrix apply_filter(const DensityMatrix& rho, const SpectralFilter& filter) {
  DensityMatrix out = rho;
  for (int j = 0; j < rho.size(); ++j)
    for (int k = 0; k < rho.size(); ++k)
      out.values(j, k) *= filter.transmission(rho.omega[j]) *
                          filter.transmission(rho.omega[k]);
  out.normalized = false;
  return out;
}

inline DensityMatrix normalize(const DensityMatrix& rho) {
  const double t = rho.trace();
  if (!(t > 0.0)) {
    throw InvalidStateError("cannot normalize a density matrix with trace " +
                            std::to_string(t));
  }
  DensityMatrix out = rho;
  out.values /= t;
  out.normalized = true;
  return out;
}

/// Tr(rho^2) under the grid weights.
inline double purity(const DensityMatrix& rho) {
  if (!rho.normalized) throw ContractViolation("purity requires a normalized matrix");
  double p = 0.0;
  for (int j = 0; j < rho.size(); ++j)
    for (int k = 0; k < rho.size(); ++k)
      p += rho.weights[j] * rho.weights[k] * std::norm(rho.values(j, k));
  return p;
}

struct SpectralModes {
  Eigen::VectorXd eigenvalues;  ///< descending
  /// Columns are modes, orthonormal under the grid weights, such that
  /// rho = modes * diag(eigenvalues) * modes^dagger.
  Eigen::MatrixXcd modes;
};

inline SpectralModes eigenmodes(const DensityMatrix& rho) {
  const int n = rho.size();
  Eigen::VectorXd sqrt_w(n);
  for (int j = 0; j < n; ++j) sqrt_w[j] = std::sqrt(rho.weights[j]);
  const Eigen::MatrixXcd weighted =
      sqrt_w.asDiagonal() * rho.values * sqrt_w.asDiagonal();
  // Hermitian part only; the anti-Hermitian remainder is round-off.
  const Eigen::MatrixXcd hermitian = 0.5 * (weighted + weighted.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian);
  SpectralModes out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.modes = sqrt_w.cwiseInverse().asDiagonal() * solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Diagonal of rho (real part).
inline std::vector<double> marginal_spectrum(const DensityMatrix& rho) {
  std::vector<double> m(rho.size());
  for (int j = 0; j < rho.size(); ++j) m[j] = rho.values(j, j).real();
  return m;
}

/// Full width at half maximum of the marginal spectrum along the wavelength
/// axis (linear interpolation between grid points). Empty if the spectrum
/// does not fall below half maximum on both sides within the grid.
inline std::optional<double> intensity_fwhm_nm(const DensityMatrix& rho) {
  const std::vector<double> m = marginal_spectrum(rho);
  if (m.size() < 3) return std::nullopt;
  const auto peak_it = std::max_element(m.begin(), m.end());
  const int peak = static_cast<int>(peak_it - m.begin());
  const double half = 0.5 * *peak_it;
  if (!(half > 0.0)) return std::nullopt;
  auto crossing = [&](int from, int step) -> std::optional<double> {
    for (int j = from; j + step >= 0 && j + step < rho.size(); j += step) {
      const int next = j + step;
      if (m[next] < half) {
        const double t = (m[j] - half) / (m[j] - m[next]);
        return rho.wavelength_nm(j) + t * (rho.wavelength_nm(next) - rho.wavelength_nm(j));
      }
    }
    return std::nullopt;
  };
  const auto left = crossing(peak, -1);
  const auto right = crossing(peak, +1);
  if (!left || !right) return std::nullopt;
  return std::abs(*right - *left);
}

/// Intensity-weighted mean wavelength of the marginal spectrum.
inline double marginal_centroid_nm(const DensityMatrix& rho) {
  const std::vector<double> m = marginal_spectrum(rho);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < rho.size(); ++j) {
    num += rho.weights[j] * m[j] * rho.wavelength_nm(j);
    den += rho.weights[j] * m[j];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace spdc
