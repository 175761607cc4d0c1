#include "spme/diffusion.hpp"

#include "spme/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace spme {

NoiseCoefficient::NoiseCoefficient(TripleContext ctx, NoiseParams params, double horizon)
    : ctx_(std::move(ctx)), params_(params), horizon_(horizon) {
  auto nonneg = [](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError(std::string(what) + " must be >= 0");
  };
  nonneg(params_.c0, "c0");
  nonneg(params_.c1, "c1");
  nonneg(params_.c2, "c2");
  nonneg(params_.beta, "beta");
  if (!(params_.gamma > 0.0 && params_.gamma <= 1.0)) {
    throw ValidationError("gamma must lie in (0, 1]");
  }
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ValidationError("horizon T must be > 0");

  const Eigen::ArrayXd one_minus = 1.0 - ctx_.generator().eigenvalues().array();
  mode_gains_ = one_minus.pow(-params_.beta).matrix();
  kernel_hs_ = std::sqrt((mode_gains_.array().square() / one_minus).sum());
}

double NoiseCoefficient::theta(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) throw DomainError("time outside [0, T]");
  return 1.0 + params_.c2 * std::pow(t / horizon_, params_.gamma);
}

double NoiseCoefficient::gain(const Field& u) const {
  return params_.c0 + (params_.c1 == 0.0 ? 0.0 : params_.c1 * norm_fstar(ctx_, u));
}

double NoiseCoefficient::gain_from_coeffs(const Eigen::VectorXd& c) const {
  return params_.c0 + (params_.c1 == 0.0 ? 0.0 : params_.c1 * ctx_.fstar_norm_coeffs(c));
}

Eigen::MatrixXd NoiseCoefficient::assemble(double t, const Field& u) const {
  const auto& g = ctx_.generator();
  const double s = theta(t) * gain(u);
  return s * g.eigenbasis() * mode_gains_.asDiagonal() * g.eigenbasis().transpose() *
         g.grid()->weights().asDiagonal();
}

double NoiseCoefficient::lipschitz_constant() const {
  return (1.0 + params_.c2) * params_.c1 * kernel_hs_;
}

double NoiseCoefficient::growth_constant() const {
  return (1.0 + params_.c2) * std::max(params_.c0, params_.c1) * kernel_hs_;
}

double NoiseCoefficient::holder_constant() const {
  return params_.c2 * std::pow(horizon_, -params_.gamma) * std::max(params_.c0, params_.c1) *
         kernel_hs_;
}

DualField apply(const NoiseCoefficient& b, double t, const Field& u, const Field& v) {
  require_same_grid(u, v);
  const auto& g = b.context().generator();
  const double s = b.theta(t) * b.gain(u);
  Eigen::VectorXd c = g.coefficients(v);
  c.array() *= s * b.mode_gains().array();
  return DualField(g.synthesize(c));
}

double hs_norm(const NoiseCoefficient& b, double t, const Field& u) {
  return b.theta(t) * b.gain(u) * b.kernel_hs_norm();
}

namespace {

struct SampleSource {
  const GridPtr& grid;
  double horizon;
  std::mt19937_64 rng;

  Field field() {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> expo(-3.0, 3.0);
    const double scale = std::pow(10.0, expo(rng));
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = scale * normal(rng);
    return Field(grid, std::move(v));
  }
  double time() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return horizon * unit(rng);
  }
};

template <class HsDiff, class Hs>
HypothesisReport run_checks(const TripleContext& ctx, double horizon, double gamma,
                            double c_lip, double c_growth, double c_holder, HsDiff&& hs_diff,
                            Hs&& hs, std::size_t samples, std::uint64_t seed, double tol) {
  if (samples < 1) throw DomainError("need at least one sample");
  HypothesisReport rep;
  rep.samples = samples;
  rep.declared_lipschitz = c_lip;
  rep.declared_growth = c_growth;
  rep.declared_holder = c_holder;
  rep.lipschitz_margin = rep.growth_margin = rep.holder_margin =
      std::numeric_limits<double>::infinity();

  SampleSource src{ctx.generator().grid(), horizon, std::mt19937_64(seed)};
  for (std::size_t i = 0; i < samples; ++i) {
    const Field u = src.field();
    // Half the Lipschitz pairs are small perturbations of u.
    Field v = (i % 2 == 0) ? src.field() : u + 1e-3 * src.field();
    const double t1 = src.time();
    const double t2 = src.time();
    const double nu = norm_fstar(ctx, u);

    const double dist = norm_fstar(ctx, u - v);
    const double lip_lhs = hs_diff(t1, u, t1, v);
    if (dist > 0.0) rep.worst_lipschitz_ratio = std::max(rep.worst_lipschitz_ratio, lip_lhs / dist);
    rep.lipschitz_margin =
        std::min(rep.lipschitz_margin, (c_lip * dist - lip_lhs) / std::max(1.0, c_lip * dist));

    const double grow_lhs = hs(t1, u);
    rep.worst_growth_ratio = std::max(rep.worst_growth_ratio, grow_lhs / (nu + 1.0));
    rep.growth_margin = std::min(rep.growth_margin, (c_growth * (nu + 1.0) - grow_lhs) /
                                                        std::max(1.0, c_growth * (nu + 1.0)));

    const double hol_rhs = (nu + 1.0) * std::pow(std::abs(t1 - t2), gamma);
    const double hol_lhs = hs_diff(t1, u, t2, u);
    if (hol_rhs > 0.0) rep.worst_holder_ratio = std::max(rep.worst_holder_ratio, hol_lhs / hol_rhs);
    rep.holder_margin = std::min(rep.holder_margin, (c_holder * hol_rhs - hol_lhs) /
                                                        std::max(1.0, c_holder * hol_rhs));
  }
  rep.lipschitz_ok = rep.lipschitz_margin >= -tol;
  rep.growth_ok = rep.growth_margin >= -tol;
  rep.holder_ok = rep.holder_margin >= -tol;
  return rep;
}

}  // namespace

HypothesisReport validate_hypotheses(const NoiseCoefficient& b, std::size_t samples,
                                     std::uint64_t seed, double tol) {
  auto hs_diff = [&](double t1, const Field& u, double t2, const Field& v) {
    return std::abs(b.theta(t1) * b.gain(u) - b.theta(t2) * b.gain(v)) * b.kernel_hs_norm();
  };
  auto hs = [&](double t, const Field& u) { return hs_norm(b, t, u); };
  return run_checks(b.context(), b.horizon(), b.params().gamma, b.lipschitz_constant(),
                    b.growth_constant(), b.holder_constant(), hs_diff, hs, samples, seed, tol);
}

HypothesisReport validate_hypotheses(const TripleContext& ctx, const DenseNoiseFamily& family,
                                     std::size_t samples, std::uint64_t seed, double tol) {
  const double nu = ctx.default_nu();
  auto hs_diff = [&](double t1, const Field& u, double t2, const Field& v) {
    return hs_norm_to_fstar(ctx, family.matrix(t1, u) - family.matrix(t2, v), nu);
  };
  auto hs = [&](double t, const Field& u) { return hs_norm_to_fstar(ctx, family.matrix(t, u), nu); };
  return run_checks(ctx, family.horizon, family.gamma, family.declared_lipschitz,
                    family.declared_growth, family.declared_holder, hs_diff, hs, samples, seed,
                    tol);
}

}  // namespace spme
