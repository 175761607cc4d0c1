#pragma once

#include "spme/measure_space.hpp"
#include "spme/triple.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace spme {

struct NoiseParams {
  double c0 = 1.0;     // state-independent gain
  double c1 = 0.5;     // gain per unit ||u||_{F*}
  double c2 = 0.5;     // time modulation amplitude
  double gamma = 0.5;  // Hoelder exponent of the time profile, in (0, 1]
  double beta = 1.0;   // smoothing exponent of K = (1 - L)^{-beta}
};

/// B(t, u)[v] = theta(t) g(u) K v with
///   theta(t) = 1 + c2 (t/T)^gamma,  g(u) = c0 + c1 ||u||_{F*},  K = (1 - L)^{-beta}.
///
/// The declared constants follow in closed form from ||K||_{L_2(L^2, F*)}:
///   C1 = sup theta * c1 * ||K||,  C2 = sup theta * max(c0, c1) * ||K||,
///   C_H = c2 T^{-gamma} max(c0, c1) ||K||  (|a^g - b^g| <= |a - b|^g on [0, 1]).
class NoiseCoefficient {
 public:
  NoiseCoefficient(TripleContext ctx, NoiseParams params, double horizon);

  const TripleContext& context() const noexcept { return ctx_; }
  const NoiseParams& params() const noexcept { return params_; }
  double horizon() const noexcept { return horizon_; }

  double theta(double t) const;
  double gain(const Field& u) const;
  double gain_from_coeffs(const Eigen::VectorXd& c) const;
  /// Mode gains m_k = (1 - lambda_k)^{-beta}.
  const Eigen::VectorXd& mode_gains() const noexcept { return mode_gains_; }
  /// ||K||_{L_2(L^2(mu), F*_{1,2})}.
  double kernel_hs_norm() const noexcept { return kernel_hs_; }
  bool state_independent() const noexcept { return params_.c1 == 0.0; }

  /// Dense point-coordinates matrix of B(t, u).
  Eigen::MatrixXd assemble(double t, const Field& u) const;

  double lipschitz_constant() const;
  double growth_constant() const;
  double holder_constant() const;

 private:
  TripleContext ctx_;
  NoiseParams params_;
  double horizon_;
  Eigen::VectorXd mode_gains_;
  double kernel_hs_ = 0.0;
};

/// theta(t) g(u) K v. Throws DomainError for t outside [0, T].
DualField apply(const NoiseCoefficient& b, double t, const Field& u, const Field& v);

/// ||B(t, u)||_{L_2(L^2, F*_{1,2})}.
double hs_norm(const NoiseCoefficient& b, double t, const Field& u);

struct HypothesisReport {
  std::size_t samples = 0;
  // Largest sampled ratios lhs / (declared-constant-free right side).
  double worst_lipschitz_ratio = 0.0;  // ||B(t,u)-B(t,v)|| / ||u-v||_{F*}
  double worst_growth_ratio = 0.0;     // ||B(t,u)|| / (||u||_{F*} + 1)
  double worst_holder_ratio = 0.0;     // ||B(t1,u)-B(t2,u)|| / ((||u||+1)|t1-t2|^gamma)
  double declared_lipschitz = 0.0;
  double declared_growth = 0.0;
  double declared_holder = 0.0;
  // min over samples of declared * rhs - lhs, normalized by max(1, rhs)
  double lipschitz_margin = 0.0;
  double growth_margin = 0.0;
  double holder_margin = 0.0;
  bool lipschitz_ok = false;
  bool growth_ok = false;
  bool holder_ok = false;
  bool all_pass() const { return lipschitz_ok && growth_ok && holder_ok; }
};

/// Sampled H2(i), H2(ii), H3 checks against the declared constants.
HypothesisReport validate_hypotheses(const NoiseCoefficient& b, std::size_t samples,
                                     std::uint64_t seed, double tol = 1e-12);

/// Same checks for an arbitrary coefficient given as t, u -> dense matrix,
/// with Hilbert-Schmidt norms taken column by column through the F* norm.
struct DenseNoiseFamily {
  std::function<Eigen::MatrixXd(double, const Field&)> matrix;
  double horizon = 1.0;
  double gamma = 1.0;
  double declared_lipschitz = 0.0;
  double declared_growth = 0.0;
  double declared_holder = 0.0;
};
HypothesisReport validate_hypotheses(const TripleContext& ctx, const DenseNoiseFamily& family,
                                     std::size_t samples, std::uint64_t seed, double tol = 1e-12);

}  // namespace spme
