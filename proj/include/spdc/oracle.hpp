#pragma once

// Brute-force reference integrators for the density matrix.
//
//  - density_matrix_direct: exact dispersion, no transverse expansion. The
//    fiber-projected amplitude Psi_i(k_s, w_s, w_i) is integrated over k_i by
//    Gauss-Hermite quadrature with the z integral in closed form; rho is then
//    the (w_s, k_s) quadrature of Psi_i^* Psi_i'.
//  - density_matrix_quadratic_direct: the quadratic phase model that the
//    kernel integrates analytically, integrated instead by tensor-product
//    Gauss-Hermite quadrature over all six transverse coordinates, with the
//    same z, z' and w_s nodes as the main pipeline.
//
// Both use unnormalized Gaussian mode functions; compare() normalizes.

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdc/density.hpp"
#include "spdc/dispersion.hpp"
#include "spdc/error.hpp"
#include "spdc/parallel.hpp"
#include "spdc/paraxial.hpp"
#include "spdc/quadrature.hpp"
#include "spdc/source.hpp"

namespace spdc {

struct OracleOptions {
  int transverse_nodes = 24;  ///< Gauss-Hermite nodes per transverse dimension
  unsigned threads = 0;
};

struct OracleReport {
  double rel_frobenius_error = 0.0;
  double max_abs_entry_error = 0.0;
  int transverse_nodes = 0;
  int grid_points = 0;
  double runtime_s = 0.0;
};

/// int_{-L/2}^{L/2} exp(i dk z) dz = L sinc(dk L / 2).
inline double z_integral(double delta_kz, double length) {
  const double x = 0.5 * delta_kz * length;
  if (x == 0.0) return length;
  return length * std::sin(x) / x;
}

/// Replaces the exact phase mismatch in psi_i_direct (test hook).
using PhaseMismatchFn = std::function<double(TransverseK, TransverseK)>;

namespace detail {

struct TransverseScales {
  double idler;   ///< kappa_i = idler * t, so u_i(kappa_i) = exp(-t^2)
  double signal;  ///< 1 / w_eff, w_eff^-2 = w_p^-2 + w_f^-2
};

inline TransverseScales transverse_scales(const BeamGeometry& beams) {
  const double wp = beams.pump_waist;
  const double wf = beams.fiber_waist;
  return {std::sqrt(2.0) / wf, std::sqrt(1.0 / (wp * wp) + 1.0 / (wf * wf))};
}

inline void require_grid_size(const QuadratureSpec& quad, int max_points,
                              const char* who) {
  if (quad.grid.points > max_points) {
    throw ContractViolation(std::string(who) + " supports at most " +
                            std::to_string(max_points) + " grid points per axis");
  }
}

inline QuadratureRule signal_rule(const SourceConfig& config, const QuadratureSpec& quad,
                                  const QuadratureRule& reference, double omega_i,
                                  double omega_i_prime) {
  const auto window = signal_window(config.pump, quad.window, omega_i, omega_i_prime);
  if (!window) return {};
  return reference.mapped(window->first, window->second);
}

template <class EntryFn>
DensityMatrix assemble_hermitian(const QuadratureSpec& quad, unsigned threads,
                                 EntryFn&& entry) {
  DensityMatrix rho;
  std::tie(rho.omega, rho.weights) = output_grid(quad.grid);
  const int n = rho.size();
  rho.values = Eigen::MatrixXcd::Zero(n, n);
  std::vector<std::pair<int, int>> entries;
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) entries.emplace_back(j, k);
  parallel_for(entries.size(), threads, [&](std::size_t idx) {
    const auto [j, k] = entries[idx];
    rho.values(j, k) = entry(rho.omega[j], rho.omega[k]);
  });
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) rho.values(k, j) = std::conj(rho.values(j, k));
  return rho;
}

}  // namespace detail

/// Fiber-projected two-photon amplitude with the exact phase mismatch:
///   A(ws + wi) int d^2k_i u_i(k_i - k_i0) u_p(k_s + k_i) L sinc(dk L / 2).
/// `k_perp_s` is the absolute signal transverse wave vector.
inline std::complex<double> psi_i_direct(TransverseK k_perp_s, double omega_s,
                                         double omega_i, const SourceConfig& config,
                                         const GeometryConfig& geometry,
                                         const QuadratureRule& hermite,
                                         const PhaseMismatchFn& mismatch_override = {}) {
  const PhaseMismatch exact(omega_s, omega_i, config.crystal);
  const TransverseK ki0 =
      central_transverse_k(omega_i, geometry, Leg::Idler, config.crystal.material);
  const double scale = detail::transverse_scales(config.beams).idler;
  const double wp2 = config.beams.pump_waist * config.beams.pump_waist;
  const double length = config.crystal.length;

  double sum = 0.0;
  for (std::size_t a = 0; a < hermite.size(); ++a) {
    const double kix = ki0.kx + scale * hermite.nodes[a];
    const double px = k_perp_s.kx + kix;
    const double gx = hermite.weights[a] * std::exp(-0.5 * wp2 * px * px);
    if (gx == 0.0) continue;
    for (std::size_t b = 0; b < hermite.size(); ++b) {
      const double kiy = ki0.ky + scale * hermite.nodes[b];
      const double py = k_perp_s.ky + kiy;
      const double g = gx * hermite.weights[b] * std::exp(-0.5 * wp2 * py * py);
      if (g == 0.0) continue;
      const TransverseK ki{kix, kiy};
      const double dk = mismatch_override ? mismatch_override(k_perp_s, ki)
                                          : exact(k_perp_s, ki);
      sum += g * z_integral(dk, length);
    }
  }
  return config.pump.amplitude(omega_s + omega_i) * (scale * scale * sum);
}

/// Density matrix from exact dispersion end-to-end (grid <= 8 x 8).
inline DensityMatrix density_matrix_direct(const SourceConfig& config,
                                           const QuadratureSpec& quad,
                                           const OracleOptions& options = {}) {
  config.validate();
  quad.validate();
  detail::require_grid_size(quad, 8, "density_matrix_direct");
  const GeometryConfig geometry = config.geometry();
  const QuadratureRule hermite = gauss_hermite(options.transverse_nodes);
  const QuadratureRule ws_reference = gauss_legendre(quad.nws);
  const auto scales = detail::transverse_scales(config.beams);
  const Material m = config.crystal.material;

  auto entry = [&](double wj, double wk) {
    const QuadratureRule ws_rule =
        detail::signal_rule(config, quad, ws_reference, wj, wk);
    std::complex<double> total{0.0, 0.0};
    for (std::size_t n = 0; n < ws_rule.size(); ++n) {
      const double ws = ws_rule.nodes[n];
      const TransverseK ks0 = central_transverse_k(ws, geometry, Leg::Signal, m);
      const TransverseK d0 = ks0 + central_transverse_k(wj, geometry, Leg::Idler, m);
      const TransverseK d0p = ks0 + central_transverse_k(wk, geometry, Leg::Idler, m);
      // |Psi|^2 is centred on kappa_s = -delta0 for each idler frequency.
      const double cx = -0.5 * (d0.kx + d0p.kx);
      std::complex<double> inner{0.0, 0.0};
      for (std::size_t a = 0; a < hermite.size(); ++a) {
        for (std::size_t b = 0; b < hermite.size(); ++b) {
          const double tx = hermite.nodes[a];
          const double ty = hermite.nodes[b];
          const double w = hermite.weights[a] * hermite.weights[b] *
                           std::exp(tx * tx + ty * ty);
          const TransverseK ks{ks0.kx + cx + scales.signal * tx, ks0.ky + scales.signal * ty};
          const auto psi_j = psi_i_direct(ks, ws, wj, config, geometry, hermite);
          const auto psi_k = (wj == wk) ? psi_j
                                        : psi_i_direct(ks, ws, wk, config, geometry, hermite);
          inner += w * std::conj(psi_j) * psi_k;
        }
      }
      total += ws_rule.weights[n] * scales.signal * scales.signal * inner;
    }
    return total;
  };
  return detail::assemble_hermitian(quad, options.threads, entry);
}

/// Density matrix from the quadratic phase model by direct transverse
/// quadrature (grid <= 5 x 5). The x and y transverse components decouple
/// because the expansion has no x-y cross terms, so the tensor-product sum is
/// evaluated as a product of x and y partial sums.
inline DensityMatrix density_matrix_quadratic_direct(const SourceConfig& config,
                                                     const QuadratureSpec& quad,
                                                     const OracleOptions& options = {}) {
  config.validate();
  quad.validate();
  detail::require_grid_size(quad, 5, "density_matrix_quadratic_direct");
  const KernelConfig kernel = config.kernel_config();
  const QuadratureRule hermite = gauss_hermite(options.transverse_nodes);
  const QuadratureRule ws_reference = gauss_legendre(quad.nws);
  const double half = 0.5 * config.crystal.length;
  const QuadratureRule z_rule = gauss_legendre(quad.nz, -half, half);
  const QuadratureRule zp_rule = gauss_legendre(quad.nzp, -half, half);
  const auto scales = detail::transverse_scales(config.beams);
  const double wp2 = config.beams.pump_waist * config.beams.pump_waist;
  const std::size_t nh = hermite.size();
  using cplx = std::complex<double>;

  // Psi(kappa_s) on the (x, y) signal node grid for one idler expansion and
  // z rule: sum_z w_z exp(i z dkz0) X_z(kappa_sx) Y_z(kappa_sy).
  auto psi_grid = [&](const ParaxialExpansion& e, const QuadratureRule& zr, double cx) {
    const Eigen::Matrix4d& D2 = e.D2;
    if (e.D1[1] != 0.0 || e.D1[3] != 0.0 || D2(0, 1) != 0.0 || D2(0, 3) != 0.0 ||
        D2(2, 1) != 0.0 || D2(2, 3) != 0.0) {
      throw ContractViolation(
          "quadratic oracle requires an expansion without x-y coupling");
    }
    const double d0x = e.delta0().kx;
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(nh, nh);
    std::vector<cplx> xs(nh), ys(nh);
    for (std::size_t iz = 0; iz < zr.size(); ++iz) {
      const double z = zr.nodes[iz];
      for (std::size_t a = 0; a < nh; ++a) {
        const double ksx = cx + scales.signal * hermite.nodes[a];
        const double ksy = scales.signal * hermite.nodes[a];
        cplx sx{0.0, 0.0}, sy{0.0, 0.0};
        for (std::size_t b = 0; b < nh; ++b) {
          const double ki = scales.idler * hermite.nodes[b];
          const double qx = e.D1[0] * ksx + e.D1[2] * ki + D2(0, 0) * ksx * ksx +
                            2.0 * D2(0, 2) * ksx * ki + D2(2, 2) * ki * ki;
          const double qy = D2(1, 1) * ksy * ksy + 2.0 * D2(1, 3) * ksy * ki +
                            D2(3, 3) * ki * ki;
          const double px = d0x + ksx + ki;
          const double py = ksy + ki;
          sx += hermite.weights[b] * std::exp(-0.5 * wp2 * px * px) *
                std::polar(1.0, z * qx);
          sy += hermite.weights[b] * std::exp(-0.5 * wp2 * py * py) *
                std::polar(1.0, z * qy);
        }
        xs[a] = scales.idler * sx;
        ys[a] = scales.idler * sy;
      }
      const cplx phase = zr.weights[iz] * std::polar(1.0, z * e.dkz0);
      for (std::size_t a = 0; a < nh; ++a)
        for (std::size_t b = 0; b < nh; ++b) psi(a, b) += phase * xs[a] * ys[b];
    }
    return psi;
  };

  auto entry = [&](double wj, double wk) {
    const QuadratureRule ws_rule =
        detail::signal_rule(config, quad, ws_reference, wj, wk);
    cplx total{0.0, 0.0};
    for (std::size_t n = 0; n < ws_rule.size(); ++n) {
      const double ws = ws_rule.nodes[n];
      const cplx spectral =
          std::conj(config.pump.amplitude(ws + wj)) * config.pump.amplitude(ws + wk);
      if (spectral == 0.0) continue;
      const ParaxialExpansion e =
          expand_delta_kz(ws, wj, kernel.crystal, kernel.geometry);
      const ParaxialExpansion ep =
          expand_delta_kz(ws, wk, kernel.crystal, kernel.geometry);
      const double cx = -0.5 * (e.delta0().kx + ep.delta0().kx);
      const Eigen::MatrixXcd psi_j = psi_grid(e, z_rule, cx);
      const Eigen::MatrixXcd psi_k = psi_grid(ep, zp_rule, cx);
      cplx inner{0.0, 0.0};
      for (std::size_t a = 0; a < nh; ++a)
        for (std::size_t b = 0; b < nh; ++b) {
          const double tx = hermite.nodes[a];
          const double ty = hermite.nodes[b];
          const double w = hermite.weights[a] * hermite.weights[b] *
                           std::exp(tx * tx + ty * ty);
          inner += w * std::conj(psi_j(a, b)) * psi_k(a, b);
        }
      total += ws_rule.weights[n] * spectral * scales.signal * scales.signal * inner;
    }
    return total;
  };
  return detail::assemble_hermitian(quad, options.threads, entry);
}

/// Errors of `a` against the reference `b` after normalizing both.
inline OracleReport compare(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.omega != b.omega) throw ContractViolation("compare: grids differ");
  const auto t0 = std::chrono::steady_clock::now();
  const DensityMatrix na = a.normalized ? a : normalize(a);
  const DensityMatrix nb = b.normalized ? b : normalize(b);
  const Eigen::MatrixXcd diff = na.values - nb.values;
  OracleReport r;
  r.rel_frobenius_error = diff.norm() / nb.values.norm();
  r.max_abs_entry_error = diff.cwiseAbs().maxCoeff();
  r.grid_points = a.size();
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace spdc
