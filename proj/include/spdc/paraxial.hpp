#pragma once

// Second-order expansion of the phase mismatch in the transverse deviations
// kappa = (k_s - k_s0, k_i - k_i0), ordered (ksx, ksy, kix, kiy):
//
//   delta_kz ~ dkz0 + D1 . kappa + kappa^T D2 kappa,   D2 = Hessian / 2.
//
// The expansion point moves with the frequency pair; dispersion stays exact
// in frequency.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <Eigen/Dense>

#include "spdc/dispersion.hpp"
#include "spdc/error.hpp"

namespace spdc {

/// Finite-difference step for the transverse derivatives [rad/um].
inline constexpr double kDefaultDerivativeStep = 1e-2;

struct DeltaKzDerivatives {
  Eigen::Vector4d gradient = Eigen::Vector4d::Zero();
  Eigen::Matrix4d hessian = Eigen::Matrix4d::Zero();

  Eigen::Vector2d d_s() const { return gradient.head<2>(); }
  Eigen::Vector2d d_i() const { return gradient.tail<2>(); }
  Eigen::Matrix2d d_ss() const { return hessian.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d d_si() const { return hessian.topRightCorner<2, 2>(); }
  Eigen::Matrix2d d_is() const { return hessian.bottomLeftCorner<2, 2>(); }
  Eigen::Matrix2d d_ii() const { return hessian.bottomRightCorner<2, 2>(); }
};

struct ParaxialExpansion {
  double dkz0 = 0.0;
  Eigen::Vector4d D1 = Eigen::Vector4d::Zero();
  Eigen::Matrix4d D2 = Eigen::Matrix4d::Zero();
  double omega_s = 0.0;
  double omega_i = 0.0;
  TransverseK ks0;
  TransverseK ki0;

  /// Quadratic model at kappa = (ksx, ksy, kix, kiy) deviations.
  double evaluate(const Eigen::Vector4d& kappa) const {
    return dkz0 + D1.dot(kappa) + kappa.dot(D2 * kappa);
  }

  /// k_s0 + k_i0.
  TransverseK delta0() const { return ks0 + ki0; }
};

namespace detail {

inline void check_derivative_margin(const PhaseMismatch& mismatch, TransverseK ks0,
                                    TransverseK ki0, double step) {
  const double margin = 3.0 * step;
  const std::array<TransverseK, 5> offsets{
      TransverseK{0, 0}, {margin, 0}, {-margin, 0}, {0, margin}, {0, -margin}};
  try {
    for (const auto& ds : offsets)
      for (const auto& di : offsets) (void)mismatch(ks0 + ds, ki0 + di);
  } catch (const DomainError& e) {
    std::ostringstream msg;
    msg << "expansion point (omega_s=" << mismatch.omega_s()
        << ", omega_i=" << mismatch.omega_i()
        << ") lies within 3h of a k_z domain boundary: " << e.what();
    throw DomainError(msg.str());
  }
}

}  // namespace detail

/// Central finite differences of delta_kz with respect to the four
/// transverse components, refined once by Richardson extrapolation
/// (steps h and h/2). `max_order` = 1 skips the Hessian.
inline DeltaKzDerivatives differentiate_delta_kz(
    double omega_s, double omega_i, const CrystalConfig& crystal,
    const GeometryConfig& geometry, int max_order = 2,
    double step = kDefaultDerivativeStep) {
  if (max_order != 1 && max_order != 2)
    throw ContractViolation("derivative order must be 1 or 2");
  const PhaseMismatch mismatch(omega_s, omega_i, crystal);
  const TransverseK ks0 =
      central_transverse_k(omega_s, geometry, Leg::Signal, crystal.material);
  const TransverseK ki0 =
      central_transverse_k(omega_i, geometry, Leg::Idler, crystal.material);
  detail::check_derivative_margin(mismatch, ks0, ki0, step);

  auto f = [&](const Eigen::Vector4d& kappa) {
    return mismatch(ks0 + TransverseK{kappa[0], kappa[1]},
                    ki0 + TransverseK{kappa[2], kappa[3]});
  };
  const double f0 = f(Eigen::Vector4d::Zero());

  auto gradient_at = [&](double h) {
    Eigen::Vector4d g;
    for (int a = 0; a < 4; ++a) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e[a] = h;
      g[a] = (f(e) - f(-e)) / (2.0 * h);
    }
    return g;
  };
  auto hessian_at = [&](double h) {
    Eigen::Matrix4d hess;
    for (int a = 0; a < 4; ++a) {
      Eigen::Vector4d ea = Eigen::Vector4d::Zero();
      ea[a] = h;
      hess(a, a) = (f(ea) - 2.0 * f0 + f(-ea)) / (h * h);
      for (int b = a + 1; b < 4; ++b) {
        Eigen::Vector4d eb = Eigen::Vector4d::Zero();
        eb[b] = h;
        hess(a, b) = hess(b, a) =
            (f(ea + eb) - f(ea - eb) - f(-ea + eb) + f(-ea - eb)) / (4.0 * h * h);
      }
    }
    return hess;
  };

  DeltaKzDerivatives out;
  out.gradient = (4.0 * gradient_at(0.5 * step) - gradient_at(step)) / 3.0;
  if (max_order == 2) {
    out.hessian = (4.0 * hessian_at(0.5 * step) - hessian_at(step)) / 3.0;
  }
  return out;
}

inline ParaxialExpansion expand_delta_kz(double omega_s, double omega_i,
                                         const CrystalConfig& crystal,
                                         const GeometryConfig& geometry,
                                         double step = kDefaultDerivativeStep) {
  ParaxialExpansion e;
  e.omega_s = omega_s;
  e.omega_i = omega_i;
  e.ks0 = central_transverse_k(omega_s, geometry, Leg::Signal, crystal.material);
  e.ki0 = central_transverse_k(omega_i, geometry, Leg::Idler, crystal.material);
  e.dkz0 = delta_kz(e.ks0, omega_s, e.ki0, omega_i, crystal);
  const DeltaKzDerivatives d =
      differentiate_delta_kz(omega_s, omega_i, crystal, geometry, 2, step);
  e.D1 = d.gradient;
  e.D2 = 0.5 * d.hessian;
  return e;
}

struct ExpansionResidual {
  double max_abs_residual = 0.0;  ///< max |model - exact| over the ball
  double exact_variation = 0.0;   ///< max exact - min exact over the ball
  double relative() const {
    return exact_variation > 0.0 ? max_abs_residual / exact_variation : 0.0;
  }
};

/// Compares the quadratic model with the exact mismatch on a tensor grid of
/// `points_per_dim`^4 deviations restricted to |kappa| <= radius.
inline ExpansionResidual expansion_residual(const ParaxialExpansion& e,
                                            const CrystalConfig& crystal,
                                            double radius, int points_per_dim = 9) {
  const PhaseMismatch mismatch(e.omega_s, e.omega_i, crystal);
  ExpansionResidual r;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const int n = points_per_dim;
  auto coord = [&](int idx) {
    return n == 1 ? 0.0 : -radius + 2.0 * radius * idx / (n - 1);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const Eigen::Vector4d kappa(coord(a), coord(b), coord(c), coord(d));
          if (kappa.norm() > radius * (1.0 + 1e-12)) continue;
          const double exact = mismatch(e.ks0 + TransverseK{kappa[0], kappa[1]},
                                        e.ki0 + TransverseK{kappa[2], kappa[3]});
          lo = std::min(lo, exact);
          hi = std::max(hi, exact);
          r.max_abs_residual =
              std::max(r.max_abs_residual, std::abs(e.evaluate(kappa) - exact));
        }
  r.exact_variation = hi - lo;
  return r;
}

/// Thread-safe memo of expansions keyed by the exact bit patterns of the
/// frequency pair. Concurrent inserts of the same key store identical values.
class ExpansionCache {
 public:
  using Factory = std::function<ParaxialExpansion(double, double)>;

  explicit ExpansionCache(Factory factory) : factory_(std::move(factory)) {}

  ParaxialExpansion get(double omega_s, double omega_i) {
    const Key key{std::bit_cast<std::uint64_t>(omega_s),
                  std::bit_cast<std::uint64_t>(omega_i)};
    {
      std::shared_lock lock(mutex_);
      if (auto it = map_.find(key); it != map_.end()) return it->second;
    }
    ParaxialExpansion value = factory_(omega_s, omega_i);
    std::unique_lock lock(mutex_);
    return map_.try_emplace(key, std::move(value)).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    map_.clear();
  }

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.first * 0x9E3779B97F4A7C15ULL ^ k.second);
    }
  };

  Factory factory_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, ParaxialExpansion, KeyHash> map_;
};

}  // namespace spdc
