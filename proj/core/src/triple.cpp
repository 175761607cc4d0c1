#include "spme/triple.hpp"

#include "spme/errors.hpp"

#include <cmath>

namespace spme {

namespace {

void require_nu(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("dual shift nu must be > 0");
}

}  // namespace

TripleContext::TripleContext(SpectralGenerator g, double default_nu)
    : gen_(std::move(g)), nu0_(default_nu) {
  require_nu(nu0_);
}

double TripleContext::fstar_norm_coeffs(const Eigen::VectorXd& c, double nu) const {
  require_nu(nu);
  const auto& lam = gen_.eigenvalues().array();
  return std::sqrt((c.array().square() / (nu - lam)).sum());
}

double TripleContext::f12_norm_coeffs(const Eigen::VectorXd& c) const {
  const auto& lam = gen_.eigenvalues().array();
  return std::sqrt(((1.0 - lam) * c.array().square()).sum());
}

double norm_fstar(const TripleContext& ctx, const DualField& eta, double nu) {
  return norm_fstar(ctx, eta.field(), nu);
}

double norm_fstar(const TripleContext& ctx, const DualField& eta) {
  return norm_fstar(ctx, eta.field(), ctx.default_nu());
}

double norm_fstar(const TripleContext& ctx, const Field& eta, double nu) {
  return ctx.fstar_norm_coeffs(ctx.generator().coefficients(eta), nu);
}

double norm_fstar(const TripleContext& ctx, const Field& eta) {
  return norm_fstar(ctx, eta, ctx.default_nu());
}

double inner_fstar(const TripleContext& ctx, const Field& eta, const Field& zeta, double nu) {
  return inner_l2(resolvent_apply(ctx.generator(), nu, eta), zeta);
}

double norm_f12(const TripleContext& ctx, const Field& f) {
  return ctx.f12_norm_coeffs(ctx.generator().coefficients(f));
}

PairingResult pairing_check(const TripleContext& ctx, const Field& u, const Field& v) {
  require_same_grid(u, v);
  const auto& g = ctx.generator();
  const Eigen::MatrixXd a = g.matrix();
  const Field one_minus_l_u(u.grid(), u.values() - a * u.values());
  // V*<z, v>_V = <z, v>_H with H = F*_{1,2}, whose inner product uses (1-L)^{-1}.
  return {inner_l2(one_minus_l_u, resolvent_apply(g, 1.0, v)), inner_l2(u, v)};
}

double hs_norm_to_fstar(const TripleContext& ctx, const Eigen::MatrixXd& op, double nu) {
  const Eigen::VectorXd inv_sqrt_w = ctx.generator().grid()->weights().cwiseSqrt().cwiseInverse();
  return hs_norm_to_fstar(ctx, op, nu, Eigen::MatrixXd(inv_sqrt_w.asDiagonal()));
}

double hs_norm_to_fstar(const TripleContext& ctx, const Eigen::MatrixXd& op, double nu,
                        const Eigen::MatrixXd& orthonormal_basis) {
  require_nu(nu);
  const auto n = static_cast<Eigen::Index>(ctx.generator().size());
  if (op.rows() != n || op.cols() != n) throw DimensionError("operator does not match the grid");
  if (orthonormal_basis.rows() != n || orthonormal_basis.cols() != n) {
    throw DimensionError("basis does not match the grid");
  }
  const Eigen::MatrixXd images = op * orthonormal_basis;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double nj = norm_fstar(ctx, Field(ctx.generator().grid(), images.col(j)), nu);
    sum += nj * nj;
  }
  return std::sqrt(sum);
}

}  // namespace spme
