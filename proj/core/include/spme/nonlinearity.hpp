#pragma once

#include "spme/measure_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace spme {

enum class NonlinearityKind { Linear, AtanSaturated, LinearPlusAtan, SlopeClampedPower };

std::string_view to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(std::string_view name);

struct NonlinearityParams {
  double k1 = 1.0;     // linear slope
  double k2 = 1.0;     // atan gain
  double m = 2.0;      // power, m >= 1
  double s_max = 4.0;  // slope clamp for the power kind
};

/// Nondecreasing Lipschitz Psi with Psi(0) = 0.
///
///   linear               Psi(r) = k1 r
///   atan_saturated       Psi(r) = k2 atan(r)
///   linear_plus_atan     Psi(r) = k1 r + k2 atan(r)
///   slope_clamped_power  Psi(r) = sign(r)|r|^m, continued linearly with slope
///                        s_max beyond the point where m|r|^{m-1} = s_max
///
/// All four are odd.
class Nonlinearity {
 public:
  Nonlinearity(NonlinearityKind kind, NonlinearityParams params);

  static Nonlinearity linear(double k1) { return {NonlinearityKind::Linear, {.k1 = k1}}; }
  static Nonlinearity atan_saturated(double k2) {
    return {NonlinearityKind::AtanSaturated, {.k2 = k2}};
  }
  static Nonlinearity linear_plus_atan(double k1, double k2) {
    return {NonlinearityKind::LinearPlusAtan, {.k1 = k1, .k2 = k2}};
  }
  static Nonlinearity slope_clamped_power(double m, double s_max) {
    return {NonlinearityKind::SlopeClampedPower, {.m = m, .s_max = s_max}};
  }

  NonlinearityKind kind() const noexcept { return kind_; }
  const NonlinearityParams& params() const noexcept { return params_; }

  double operator()(double r) const;
  double derivative(double r) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  Eigen::VectorXd derivative(const Eigen::VectorXd& r) const;

  /// Declared Lipschitz constant k = Lip Psi.
  double lipschitz() const noexcept { return lipschitz_; }
  /// c with Psi(r) r >= c r^2 for all r, when such c > 0 exists.
  std::optional<double> coercivity() const noexcept { return coercivity_; }
  /// True when Psi is r -> slope * r (the Jacobian is then a fixed multiple of L).
  bool is_linear() const noexcept { return kind_ == NonlinearityKind::Linear; }

 private:
  NonlinearityKind kind_;
  NonlinearityParams params_;
  double lipschitz_ = 0.0;
  std::optional<double> coercivity_;
  double clamp_r_ = 0.0;    // |r| where the power slope reaches s_max
  double clamp_psi_ = 0.0;  // Psi at clamp_r_
};

/// Pointwise composition Psi(u).
Field apply(const Nonlinearity& psi, const Field& u);

/// (k + 1)^{-1}, the constant in (Psi(r) - Psi(r'))(r - r') >= a |Psi(r) - Psi(r')|^2.
double alpha_tilde(const Nonlinearity& psi);

struct MonotoneInequalityReport {
  std::size_t samples = 0;
  double alpha_tilde = 0.0;
  double worst_margin = 0.0;  // min over pairs of lhs - rhs
  double worst_r = 0.0;
  double worst_r_prime = 0.0;
  bool passed = false;
};

/// Samples pairs with magnitudes log-uniform in [1e-6, 1e6] and random signs.
MonotoneInequalityReport check_monotone_inequality(const Nonlinearity& psi, std::size_t samples,
                                                   std::uint64_t seed, double tol = 1e-12);

struct H1Report {
  std::size_t samples = 0;
  bool psi_zero_ok = false;
  double worst_monotone_margin = 0.0;    // min (Psi(r') - Psi(r)) over r <= r'
  double worst_lipschitz_margin = 0.0;   // min (k|r - r'| - |Psi(r) - Psi(r')|)
  double max_difference_quotient = 0.0;
  double worst_oddness = 0.0;            // max |Psi(-r) + Psi(r)|
  std::optional<double> worst_coercivity_margin;  // min (Psi(r) r - c r^2) on a log grid
  bool passed = false;
};

/// Sampled checks of monotonicity, the declared Lipschitz constant, Psi(0) = 0,
/// oddness and (when declared) coercivity.
H1Report validate_h1(const Nonlinearity& psi, std::size_t samples, std::uint64_t seed,
                     double tol = 1e-12);

}  // namespace spme
