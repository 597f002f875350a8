#pragma once

// One end-to-end run: raw matrix, optional filter, normalization and the
// scalar diagnostics reported by the CLI and checked by the acceptance suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "spdc/density.hpp"
#include "spdc/source.hpp"

namespace spdc {

struct Diagnostics {
  double trace_before_normalize = 0.0;  ///< after filtering, if any
  double purity = 0.0;
  std::optional<double> fwhm_nm;
  double centroid_nm = 0.0;
  double peak_nm = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double hermiticity_residual = 0.0;
  double imag_to_real = 0.0;  ///< max |Im rho| / max |Re rho|
  double normalized_trace = 0.0;
};

struct RunResult {
  double alpha = 0.0;  ///< rad, as used
  DensityMatrix raw;    ///< unfiltered, unnormalized
  DensityMatrix state;  ///< filtered (if configured) and normalized
  SpectralModes modes;
  Diagnostics diagnostics;
  double compute_seconds = 0.0;
};

inline Diagnostics diagnose(const DensityMatrix& unnormalized, const DensityMatrix& state,
                            const SpectralModes& modes) {
  Diagnostics d;
  d.trace_before_normalize = unnormalized.trace();
  d.purity = purity(state);
  d.fwhm_nm = intensity_fwhm_nm(state);
  d.centroid_nm = marginal_centroid_nm(state);
  const auto m = marginal_spectrum(state);
  d.peak_nm = state.wavelength_nm(
      static_cast<int>(std::max_element(m.begin(), m.end()) - m.begin()));
  d.lambda_max = modes.eigenvalues.size() ? modes.eigenvalues[0] : 0.0;
  d.lambda_min = modes.eigenvalues.size() ? modes.eigenvalues.minCoeff() : 0.0;
  d.hermiticity_residual = state.hermiticity_residual();
  const double re = state.values.real().cwiseAbs().maxCoeff();
  d.imag_to_real = re > 0.0 ? state.values.imag().cwiseAbs().maxCoeff() / re : 0.0;
  d.normalized_trace = state.trace();
  return d;
}

/// Filters and normalizes an already computed raw matrix.
inline RunResult finish_run(const SourceConfig& config, DensityMatrix raw) {
  RunResult r;
  r.alpha = config.resolved_alpha();
  r.raw = std::move(raw);
  const DensityMatrix filtered = config.filter ? apply_filter(r.raw, *config.filter) : r.raw;
  r.state = normalize(filtered);
  r.modes = eigenmodes(r.state);
  r.diagnostics = diagnose(filtered, r.state, r.modes);
  return r;
}

inline RunResult run(const SourceConfig& config, const QuadratureSpec& quad,
                     const ComputeOptions& options = {}) {
  SourceConfig resolved = config;
  resolved.alpha = config.resolved_alpha();
  const auto t0 = std::chrono::steady_clock::now();
  DensityMatrix raw = compute_density_matrix(resolved, quad, options);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  RunResult r = finish_run(resolved, std::move(raw));
  r.compute_seconds = seconds;
  return r;
}

}  // namespace spdc
