#include "spme/skeleton.hpp"

#include "spme/errors.hpp"
#include "stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spme {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Control::Control(double horizon, std::vector<Field> cells)
    : horizon_(horizon), cells_(std::move(cells)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw DomainError("control horizon must be positive");
  if (cells_.empty()) throw ValidationError("control needs at least one cell");
  for (const auto& c : cells_) require_same_grid(c, cells_.front());
}

Control Control::zero(GridPtr grid, double horizon, std::size_t cells) {
  if (cells == 0) throw ValidationError("control needs at least one cell");
  return Control(horizon, std::vector<Field>(cells, Field::zeros(std::move(grid))));
}

std::vector<double> Control::time_grid() const {
  const std::size_t n = cells_.size();
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = horizon_ * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

std::size_t Control::cell_for_step(std::size_t step, std::size_t steps) const {
  if (steps == 0 || step >= steps) throw DomainError("step outside the solver grid");
  return step * cells_.size() / steps;
}

double Control::energy() const {
  double s = 0.0;
  for (const auto& c : cells_) {
    const double v = norm_l2(c);
    s += v * v;
  }
  return s * cell_width();
}

bool Control::is_zero() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](const Field& c) { return (c.values().array() == 0.0).all(); });
}

namespace detail {
namespace {

struct StepResult {
  VectorXd y;
  int iterations = 0;
  double residual = 0.0;
  bool picard = false;
};

class ImplicitSolver {
 public:
  ImplicitSolver(const Model& model, Regularization reg, double dt, const SolverOptions& opts)
      : model_(model), reg_(reg), dt_(dt), opts_(opts) {
    const auto& g = model.generator();
    const auto n = static_cast<Eigen::Index>(g.size());
    linear_ = model.psi.is_linear();
    if (!linear_) {
      shifted_ = g.matrix();
      shifted_.diagonal().array() -= reg.nu;
    }
    lam_ = g.eigenvalues();
    identity_ = MatrixXd::Identity(n, n);
  }

  StepResult solve(const VectorXd& rhs, const VectorXd& guess, std::size_t step) const {
    const auto& ctx = model_.context();
    const double target = opts_.tol * std::max(1.0, fstar(rhs));
    if (linear_) {
      // Psi' + lambda is uniform, so the system is diagonal in the eigenbasis.
      const double s = model_.psi.params().k1 + reg_.lambda;
      const auto& g = model_.generator();
      VectorXd c = g.coefficients(rhs);
      for (Eigen::Index k = 0; k < c.size(); ++k) c(k) /= 1.0 - dt_ * (lam_(k) - reg_.nu) * s;
      StepResult out;
      out.y = g.synthesize_values(c);
      out.iterations = 1;
      VectorXd rc = c - g.coefficients(rhs);
      for (Eigen::Index k = 0; k < c.size(); ++k) rc(k) -= dt_ * (lam_(k) - reg_.nu) * s * c(k);
      out.residual = ctx.fstar_norm_coeffs(rc);
      check_finite(out.y, step);
      return out;
    }

    StepResult out;
    VectorXd y = guess;
    VectorXd r = residual(y, rhs);
    double rn = fstar(r);
    bool stalled = false;
    int it = 0;
    while (rn > target && it < opts_.max_newton) {
      ++it;
      const VectorXd d = model_.psi.derivative(y).array() + reg_.lambda;
      const MatrixXd jac = identity_ - dt_ * (shifted_ * d.asDiagonal());
      const VectorXd delta = jac.partialPivLu().solve(-r);
      double a = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls, a *= 0.5) {
        const VectorXd yt = y + a * delta;
        const VectorXd rt = residual(yt, rhs);
        const double rtn = fstar(rt);
        if (std::isfinite(rtn) && rtn < (1.0 - 1e-4 * a) * rn) {
          y = yt;
          r = rt;
          rn = rtn;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        stalled = true;
        break;
      }
    }
    if (rn > target && (stalled || it >= opts_.max_newton)) {
      out.picard = true;
      const double norm_l = model_.generator().spectral_radius() + reg_.nu;
      const double omega = alpha_tilde(model_.psi) / (1.0 + dt_ * norm_l);
      int pit = 0;
      while (rn > target && pit < opts_.max_picard) {
        y -= omega * r;
        r = residual(y, rhs);
        rn = fstar(r);
        ++pit;
        if (!std::isfinite(rn)) break;
      }
      it += pit;
    }
    check_finite(y, step);
    if (!(rn <= target)) {
      std::ostringstream msg;
      msg << "implicit step " << step << " did not converge (residual " << rn << ")";
      throw StepFailure(msg.str(), step);
    }
    out.y = std::move(y);
    out.iterations = it;
    out.residual = rn;
    return out;
  }

 private:
  VectorXd residual(const VectorXd& y, const VectorXd& rhs) const {
    VectorXd phi = model_.psi.apply(y);
    if (reg_.lambda != 0.0) phi += reg_.lambda * y;
    return y - dt_ * (shifted_ * phi) - rhs;
  }
  double fstar(const VectorXd& values) const {
    return model_.context().fstar_norm_coeffs(model_.generator().coefficients(values));
  }
  static void check_finite(const VectorXd& y, std::size_t step) {
    if (!y.allFinite()) throw DivergenceError("non-finite state at step " + std::to_string(step), step);
  }

  const Model& model_;
  Regularization reg_;
  double dt_;
  SolverOptions opts_;
  bool linear_ = false;
  MatrixXd shifted_;
  MatrixXd identity_;
  VectorXd lam_;
};

void record(PathSolution& p, const Model& model, const VectorXd& c, const VectorXd& psi_integral) {
  const auto& ctx = model.context();
  double l2 = std::sqrt(c.squaredNorm());
  p.l2_norm.push_back(l2);
  p.fstar_norm.push_back(ctx.fstar_norm_coeffs(c));
  p.psi_integral_f12.push_back(ctx.f12_norm_coeffs(psi_integral));
}

}  // namespace

PathSolution evolve(const Model& model, const Control& h, const Field& x, std::size_t steps,
                    Regularization reg, const SolverOptions& opts, const IncrementFn& noise) {
  const auto& g = model.generator();
  const double T = model.horizon();
  if (steps == 0) throw DomainError("N_t must be at least 1");
  if (!(reg.nu >= 0.0 && reg.nu < 1.0)) throw DomainError("nu must lie in [0, 1)");
  if (!(reg.lambda >= 0.0 && reg.lambda < 1.0)) throw DomainError("lambda must lie in [0, 1)");
  if (x.grid().get() != g.grid().get() && !same_grid(*x.grid(), *g.grid()))
    throw DimensionError("initial state lives on a different grid");
  require_same_grid(h.cell(0), x);
  if (std::abs(h.horizon() - T) > 1e-12 * T) throw DomainError("control horizon differs from T");

  PathSolution p;
  p.control_energy = h.energy();
  if (opts.energy_bound && p.control_energy > *opts.energy_bound) {
    std::ostringstream msg;
    msg << "control energy " << p.control_energy << " exceeds M = " << *opts.energy_bound;
    throw DomainError(msg.str());
  }

  const double dt = T / static_cast<double>(steps);
  const double stiffness = dt * (model.psi.lipschitz() + reg.lambda) * (g.spectral_radius() + reg.nu);
  if (stiffness > opts.coarse_limit) {
    std::ostringstream msg;
    msg << "time step too coarse: dt*k*||L|| = " << stiffness << " > " << opts.coarse_limit;
    throw DomainError(msg.str());
  }
  if (stiffness > opts.coarse_warn) {
    std::ostringstream msg;
    msg << "dt*k*||L|| = " << stiffness << " exceeds " << opts.coarse_warn;
    p.warnings.push_back(msg.str());
  }

  p.times.resize(steps + 1);
  for (std::size_t m = 0; m <= steps; ++m)
    p.times[m] = T * static_cast<double>(m) / static_cast<double>(steps);
  p.states.reserve(steps + 1);
  const auto n = static_cast<Eigen::Index>(g.size());

  const bool zero_x = (x.values().array() == 0.0).all();
  if (zero_x && h.is_zero() && model.noise.params().c0 == 0.0 && !noise) {
    const VectorXd z = VectorXd::Zero(n);
    for (std::size_t m = 0; m <= steps; ++m) {
      p.states.push_back(Field::zeros(g.grid()));
      record(p, model, z, z);
      p.iterations.push_back(0);
      p.residuals.push_back(0.0);
    }
    return p;
  }

  std::vector<VectorXd> hc;
  hc.reserve(h.cells());
  for (const auto& cell : h.values()) hc.push_back(g.coefficients(cell));

  const VectorXd& gains = model.noise.mode_gains();
  ImplicitSolver solver(model, reg, dt, opts);

  VectorXd y = x.values();
  VectorXd c = g.coefficients(y);
  VectorXd psi_int = VectorXd::Zero(n);
  p.states.push_back(x);
  record(p, model, c, psi_int);
  p.iterations.push_back(0);
  p.residuals.push_back(0.0);

  VectorXd dw = VectorXd::Zero(n);
  VectorXd forcing(n);
  for (std::size_t m = 0; m < steps; ++m) {
    const double scale = model.noise.theta(p.times[m]) * model.noise.gain_from_coeffs(c);
    const VectorXd& hm = hc[h.cell_for_step(m, steps)];
    if (noise) {
      noise(m, dw);
      forcing = scale * (gains.array() * (dt * hm.array() + dw.array())).matrix();
    } else {
      forcing = scale * (gains.array() * (dt * hm.array())).matrix();
    }
    const VectorXd rhs = y + g.synthesize_values(forcing);
    StepResult s = solver.solve(rhs, y, m);
    y = std::move(s.y);
    c = g.coefficients(y);
    psi_int += dt * g.coefficients(model.psi.apply(y));
    p.states.emplace_back(g.grid(), y);
    record(p, model, c, psi_int);
    p.iterations.push_back(s.iterations);
    p.residuals.push_back(s.residual);
    p.used_picard = p.used_picard || s.picard;
  }
  return p;
}

}  // namespace detail

PathSolution solve_skeleton(const Model& model, const Control& h, const Field& x,
                            std::size_t steps, const SolverOptions& opts) {
  return solve_regularized(model, h, x, steps, {}, opts);
}

PathSolution solve_regularized(const Model& model, const Control& h, const Field& x,
                               std::size_t steps, Regularization reg, const SolverOptions& opts) {
  return detail::evolve(model, h, x, steps, reg, opts, {});
}

double integral_identity_defect(const Model& model, const Control& h, const Field& x,
                                const PathSolution& path, Regularization reg) {
  const auto& g = model.generator();
  const auto& ctx = model.context();
  const std::size_t steps = path.steps();
  if (steps == 0) return 0.0;
  const double dt = model.horizon() / static_cast<double>(steps);
  const auto n = static_cast<Eigen::Index>(g.size());

  VectorXd drift_int = VectorXd::Zero(n);    // coefficients of dt sum (Psi + lambda)(Y_j)
  VectorXd control_int = VectorXd::Zero(n);  // coefficients of dt sum B(t_j, Y_j) h_j
  const VectorXd x_c = g.coefficients(x);
  double worst = 0.0;
  for (std::size_t m = 1; m <= steps; ++m) {
    const Field& prev = path.states[m - 1];
    const Field b = apply(model.noise, path.times[m - 1], prev, h.at_step(m - 1, steps)).field();
    control_int += dt * g.coefficients(b);
    const auto& ym = path.states[m].values();
    VectorXd phi = model.psi.apply(ym) + reg.lambda * ym;
    drift_int += dt * g.coefficients(phi);
    VectorXd defect = g.coefficients(ym) - x_c - control_int;
    for (Eigen::Index k = 0; k < n; ++k) defect(k) -= (g.eigenvalues()(k) - reg.nu) * drift_int(k);
    worst = std::max(worst, ctx.fstar_norm_coeffs(defect));
  }
  return worst;
}

double sup_fstar_distance_sq(const TripleContext& ctx, const PathSolution& a,
                             const PathSolution& b) {
  if (a.states.size() != b.states.size()) throw DimensionError("paths on different time grids");
  double worst = 0.0;
  for (std::size_t m = 0; m < a.states.size(); ++m) {
    const double d = norm_fstar(ctx, a.states[m] - b.states[m]);
    worst = std::max(worst, d * d);
  }
  return worst;
}

namespace {

void require_decreasing(const std::vector<double>& v, const char* what) {
  if (v.size() < 2) throw DomainError(std::string(what) + " needs at least two values");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw DomainError(std::string(what) + " must be positive");
    if (i > 0 && !(v[i] < v[i - 1])) throw DomainError(std::string(what) + " must be decreasing");
  }
}

RateReport finish(std::vector<RatePair> pairs) {
  RateReport r;
  r.pairs = std::move(pairs);
  r.monotone = true;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    if (i > 0 && r.pairs[i].distance > r.pairs[i - 1].distance * (1.0 + 1e-12) + 1e-300)
      r.monotone = false;
    if (r.pairs[i].distance > 0.0) {
      xs.push_back(r.pairs[i].abscissa);
      ys.push_back(r.pairs[i].distance);
    }
  }
  if (xs.size() >= 2) {
    r.fit = fit_loglog(xs, ys);
  } else {
    r.fit.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace

RateReport lambda_rate_study(const Model& model, const Control& h, const Field& x,
                             std::size_t steps, double nu, const std::vector<double>& lambdas,
                             const SolverOptions& opts) {
  require_decreasing(lambdas, "lambdas");
  std::vector<PathSolution> paths;
  for (double l : lambdas) paths.push_back(solve_regularized(model, h, x, steps, {nu, l}, opts));
  std::vector<RatePair> pairs;
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    pairs.push_back({lambdas[i], lambdas[i + 1], lambdas[i] + lambdas[i + 1],
                     sup_fstar_distance_sq(model.context(), paths[i], paths[i + 1])});
  }
  return finish(std::move(pairs));
}

RateReport nu_rate_study(const Model& model, const Control& h, const Field& x, std::size_t steps,
                         const std::vector<double>& nus, const SolverOptions& opts) {
  require_decreasing(nus, "nus");
  std::vector<PathSolution> paths;
  for (double v : nus) paths.push_back(solve_regularized(model, h, x, steps, {v, 0.0}, opts));
  std::vector<RatePair> pairs;
  for (std::size_t i = 0; i + 1 < nus.size(); ++i) {
    pairs.push_back({nus[i], nus[i + 1], nus[i] * nus[i] + nus[i + 1] * nus[i + 1],
                     sup_fstar_distance_sq(model.context(), paths[i], paths[i + 1])});
  }
  return finish(std::move(pairs));
}

}  // namespace spme
