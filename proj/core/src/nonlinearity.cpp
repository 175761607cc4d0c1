#include "spme/nonlinearity.hpp"

#include "spme/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace spme {

std::string_view to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::Linear: return "linear";
    case NonlinearityKind::AtanSaturated: return "atan_saturated";
    case NonlinearityKind::LinearPlusAtan: return "linear_plus_atan";
    case NonlinearityKind::SlopeClampedPower: return "slope_clamped_power";
  }
  return "unknown";
}

NonlinearityKind nonlinearity_kind_from_string(std::string_view name) {
  if (name == "linear") return NonlinearityKind::Linear;
  if (name == "atan_saturated") return NonlinearityKind::AtanSaturated;
  if (name == "linear_plus_atan") return NonlinearityKind::LinearPlusAtan;
  if (name == "slope_clamped_power") return NonlinearityKind::SlopeClampedPower;
  throw ValidationError("unknown nonlinearity kind '" + std::string(name) + "'");
}

Nonlinearity::Nonlinearity(NonlinearityKind kind, NonlinearityParams params)
    : kind_(kind), params_(params) {
  auto nonneg = [](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(std::string(what) + " must be >= 0");
  };
  switch (kind_) {
    case NonlinearityKind::Linear:
      nonneg(params_.k1, "k1");
      lipschitz_ = params_.k1;
      if (params_.k1 > 0.0) coercivity_ = params_.k1;
      break;
    case NonlinearityKind::AtanSaturated:
      nonneg(params_.k2, "k2");
      lipschitz_ = params_.k2;
      break;
    case NonlinearityKind::LinearPlusAtan:
      nonneg(params_.k1, "k1");
      nonneg(params_.k2, "k2");
      lipschitz_ = params_.k1 + params_.k2;
      if (params_.k1 > 0.0) coercivity_ = params_.k1;
      break;
    case NonlinearityKind::SlopeClampedPower:
      if (!std::isfinite(params_.m) || params_.m < 1.0) {
        throw ValidationError("m must be >= 1 (smaller powers are not Lipschitz at 0)");
      }
      if (!std::isfinite(params_.s_max) || !(params_.s_max > 0.0)) {
        throw ValidationError("s_max must be > 0");
      }
      if (params_.m == 1.0) {
        lipschitz_ = std::min(1.0, params_.s_max);
        coercivity_ = lipschitz_;
      } else {
        clamp_r_ = std::pow(params_.s_max / params_.m, 1.0 / (params_.m - 1.0));
        clamp_psi_ = std::pow(clamp_r_, params_.m);
        lipschitz_ = params_.s_max;
      }
      break;
  }
}

double Nonlinearity::operator()(double r) const {
  switch (kind_) {
    case NonlinearityKind::Linear: return params_.k1 * r;
    case NonlinearityKind::AtanSaturated: return params_.k2 * std::atan(r);
    case NonlinearityKind::LinearPlusAtan: return params_.k1 * r + params_.k2 * std::atan(r);
    case NonlinearityKind::SlopeClampedPower: {
      if (params_.m == 1.0) return lipschitz_ * r;
      const double a = std::abs(r);
      const double mag = a <= clamp_r_ ? std::pow(a, params_.m)
                                       : clamp_psi_ + params_.s_max * (a - clamp_r_);
      return std::copysign(mag, r);
    }
  }
  return 0.0;
}

double Nonlinearity::derivative(double r) const {
  switch (kind_) {
    case NonlinearityKind::Linear: return params_.k1;
    case NonlinearityKind::AtanSaturated: return params_.k2 / (1.0 + r * r);
    case NonlinearityKind::LinearPlusAtan: return params_.k1 + params_.k2 / (1.0 + r * r);
    case NonlinearityKind::SlopeClampedPower: {
      if (params_.m == 1.0) return lipschitz_;
      const double a = std::abs(r);
      return a <= clamp_r_ ? params_.m * std::pow(a, params_.m - 1.0) : params_.s_max;
    }
  }
  return 0.0;
}

Eigen::VectorXd Nonlinearity::apply(const Eigen::VectorXd& r) const {
  return r.unaryExpr([this](double v) { return (*this)(v); });
}

Eigen::VectorXd Nonlinearity::derivative(const Eigen::VectorXd& r) const {
  return r.unaryExpr([this](double v) { return derivative(v); });
}

Field apply(const Nonlinearity& psi, const Field& u) {
  return Field(u.grid(), psi.apply(u.values()));
}

double alpha_tilde(const Nonlinearity& psi) { return 1.0 / (psi.lipschitz() + 1.0); }

namespace {

double log_uniform_signed(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> expo(-6.0, 6.0);
  std::bernoulli_distribution sign(0.5);
  const double mag = std::pow(10.0, expo(rng));
  return sign(rng) ? mag : -mag;
}

}  // namespace

MonotoneInequalityReport check_monotone_inequality(const Nonlinearity& psi, std::size_t samples,
                                                   std::uint64_t seed, double tol) {
  if (samples < 1) throw DomainError("need at least one sample");
  MonotoneInequalityReport rep;
  rep.samples = samples;
  rep.alpha_tilde = alpha_tilde(psi);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const double r = log_uniform_signed(rng);
    // Every fourth pair is a near-coincident one, where the two sides are closest.
    const double rp = (i % 4 == 3) ? r * (1.0 + 1e-3 * (log_uniform_signed(rng) > 0 ? 1 : -1))
                                   : log_uniform_signed(rng);
    const double d = psi(r) - psi(rp);
    const double margin = d * (r - rp) - rep.alpha_tilde * d * d;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_r = r;
      rep.worst_r_prime = rp;
    }
  }
  rep.passed = rep.worst_margin >= -tol;
  return rep;
}

H1Report validate_h1(const Nonlinearity& psi, std::size_t samples, std::uint64_t seed, double tol) {
  if (samples < 1) throw DomainError("need at least one sample");
  H1Report rep;
  rep.samples = samples;
  rep.psi_zero_ok = psi(0.0) == 0.0;
  rep.worst_monotone_margin = std::numeric_limits<double>::infinity();
  rep.worst_lipschitz_margin = std::numeric_limits<double>::infinity();
  const double k = psi.lipschitz();

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    double r = log_uniform_signed(rng);
    double rp = log_uniform_signed(rng);
    if (r > rp) std::swap(r, rp);
    const double pr = psi(r);
    const double prp = psi(rp);
    rep.worst_monotone_margin = std::min(rep.worst_monotone_margin, prp - pr);
    // Lipschitz margin relative to the size of the increment.
    const double dr = rp - r;
    const double scale = std::max(1.0, k * dr);
    rep.worst_lipschitz_margin =
        std::min(rep.worst_lipschitz_margin, (k * dr - std::abs(prp - pr)) / scale);
    if (dr > 0.0) rep.max_difference_quotient = std::max(rep.max_difference_quotient,
                                                         std::abs(prp - pr) / dr);
    rep.worst_oddness = std::max(rep.worst_oddness, std::abs(psi(-r) + pr));
  }

  if (const auto c = psi.coercivity()) {
    double worst = std::numeric_limits<double>::infinity();
    for (int e = -60; e <= 60; ++e) {
      const double r = std::pow(10.0, e / 10.0);
      for (double s : {r, -r}) worst = std::min(worst, (psi(s) * s - *c * s * s) / (s * s));
    }
    rep.worst_coercivity_margin = worst;
  }

  rep.passed = rep.psi_zero_ok && rep.worst_monotone_margin >= -tol &&
               rep.worst_lipschitz_margin >= -tol && rep.worst_oddness <= tol &&
               (!rep.worst_coercivity_margin || *rep.worst_coercivity_margin >= -tol);
  return rep;
}

}  // namespace spme
