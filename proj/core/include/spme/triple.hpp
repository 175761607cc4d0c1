#pragma once

#include "spme/generator.hpp"
#include "spme/measure_space.hpp"

#include <Eigen/Dense>

namespace spme {

/// Element of F*_{1,2}. Same point-value storage as Field; the distinct type
/// marks the norm it is measured in.
class DualField {
 public:
  explicit DualField(Field f) : field_(std::move(f)) {}
  const Field& field() const noexcept { return field_; }
  const Eigen::VectorXd& values() const noexcept { return field_.values(); }
  const GridPtr& grid() const noexcept { return field_.grid(); }

 private:
  Field field_;
};

/// The Gelfand triple L^2(mu) c F*_{1,2} c (L^2(mu))* built on a generator.
/// The Riesz map identifying F_{1,2} with F*_{1,2} is (1-L)^{-1}.
class TripleContext {
 public:
  explicit TripleContext(SpectralGenerator g, double default_nu = 1.0);

  const SpectralGenerator& generator() const noexcept { return gen_; }
  double default_nu() const noexcept { return nu0_; }

  /// Coefficient-space versions used by the solvers (c = eigen-coefficients).
  double fstar_norm_coeffs(const Eigen::VectorXd& c, double nu) const;
  double fstar_norm_coeffs(const Eigen::VectorXd& c) const { return fstar_norm_coeffs(c, nu0_); }
  double f12_norm_coeffs(const Eigen::VectorXd& c) const;

 private:
  SpectralGenerator gen_;
  double nu0_;
};

/// ||eta||_{F*,nu} = <eta, (nu - L)^{-1} eta>_2^{1/2}.
double norm_fstar(const TripleContext& ctx, const DualField& eta, double nu);
double norm_fstar(const TripleContext& ctx, const DualField& eta);
double norm_fstar(const TripleContext& ctx, const Field& eta, double nu);
double norm_fstar(const TripleContext& ctx, const Field& eta);

/// <eta, zeta>_{F*,nu} = <(nu - L)^{-1} eta, zeta>_2.
double inner_fstar(const TripleContext& ctx, const Field& eta, const Field& zeta, double nu);

/// ||f||_{F_{1,2}} = |(1 - L)^{1/2} f|_2.
double norm_f12(const TripleContext& ctx, const Field& f);

struct PairingResult {
  double dual_pairing;  // (L^2)*<(1-L)u, v>_{L^2}, through the F* inner product
  double l2_inner;      // int u v dmu
};

/// Both sides of the isometry identity (L^2)*<(1-L)u, v> = int u v dmu.
/// The left side applies 1-L as a dense point-space matrix and dualizes
/// through the spectral resolvent; the right side is the weighted sum.
PairingResult pairing_check(const TripleContext& ctx, const Field& u, const Field& v);

/// Hilbert-Schmidt norm of `op` (point-coordinates matrix, L^2 -> F*_{1,2,nu})
/// summed over the L^2(mu)-orthonormal point basis 1_i / sqrt(mu_i).
double hs_norm_to_fstar(const TripleContext& ctx, const Eigen::MatrixXd& op, double nu);
/// Same sum over an arbitrary L^2(mu)-orthonormal basis given as columns.
double hs_norm_to_fstar(const TripleContext& ctx, const Eigen::MatrixXd& op, double nu,
                        const Eigen::MatrixXd& orthonormal_basis);

}  // namespace spme
