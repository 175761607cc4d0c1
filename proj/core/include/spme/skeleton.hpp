#pragma once

#include "spme/diffusion.hpp"
#include "spme/fit.hpp"
#include "spme/generator.hpp"
#include "spme/measure_space.hpp"
#include "spme/nonlinearity.hpp"
#include "spme/triple.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spme {

/// Drift, noise coefficient and horizon of dY = L Psi(Y) dt + B(t, Y) h dt.
/// The generator and the dual norms come from the noise coefficient's context.
struct Model {
  Nonlinearity psi;
  NoiseCoefficient noise;

  const TripleContext& context() const noexcept { return noise.context(); }
  const SpectralGenerator& generator() const noexcept { return noise.context().generator(); }
  double horizon() const noexcept { return noise.horizon(); }
};

/// Piecewise-constant control h in L^2([0,T]; L^2(mu)): value `cell(c)` on
/// [c T/N, (c+1) T/N).
class Control {
 public:
  Control(double horizon, std::vector<Field> cells);
  static Control zero(GridPtr grid, double horizon, std::size_t cells);

  double horizon() const noexcept { return horizon_; }
  std::size_t cells() const noexcept { return cells_.size(); }
  double cell_width() const noexcept { return horizon_ / static_cast<double>(cells_.size()); }
  const Field& cell(std::size_t c) const { return cells_.at(c); }
  const std::vector<Field>& values() const noexcept { return cells_; }
  /// Instants 0, T/N, ..., T.
  std::vector<double> time_grid() const;

  /// Left-constant injection onto a solver grid with `steps` steps.
  std::size_t cell_for_step(std::size_t step, std::size_t steps) const;
  const Field& at_step(std::size_t step, std::size_t steps) const {
    return cells_[cell_for_step(step, steps)];
  }

  /// int_0^T |h(s)|_2^2 ds.
  double energy() const;
  bool in_ball(double m) const { return energy() <= m; }
  bool is_zero() const;

 private:
  double horizon_;
  std::vector<Field> cells_;
};

struct Regularization {
  double nu = 0.0;      // drift (L - nu); 0 is the skeleton equation itself
  double lambda = 0.0;  // Psi(r) + lambda r
};

struct SolverOptions {
  double tol = 1e-10;            // F* residual, relative to max(1, ||rhs||_{F*})
  int max_newton = 50;
  int max_picard = 5000;
  std::optional<double> energy_bound;  // enforce h in S_M
  double coarse_warn = 1.0;      // dt * Lip * ||L - nu|| above this: warning
  double coarse_limit = 10.0;    // ... above this: DomainError
};

/// States on the uniform time grid plus per-instant diagnostics.
struct PathSolution {
  std::vector<double> times;
  std::vector<Field> states;
  std::vector<double> l2_norm;      // |Y(t_m)|_2
  std::vector<double> fstar_norm;   // ||Y(t_m)||_{F*_{1,2}}
  std::vector<double> psi_integral_f12;  // ||dt sum_{j<=m} Psi(Y_j)||_{F_{1,2}}
  std::vector<int> iterations;      // nonlinear iterations of the step ending at t_m
  std::vector<double> residuals;    // final F* residual of that step
  std::vector<std::string> warnings;
  double control_energy = 0.0;
  bool used_picard = false;

  std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
  const Field& final_state() const { return states.back(); }
};

/// Backward Euler in L Psi, forward in the control term:
///   Y_{m+1} - dt L Psi(Y_{m+1}) = Y_m + dt B(t_m, Y_m) h_m.
PathSolution solve_skeleton(const Model& model, const Control& h, const Field& x,
                            std::size_t steps, const SolverOptions& opts = {});

/// Same scheme with drift (L - nu)(Psi(Y) + lambda Y). nu = lambda = 0 is
/// exactly solve_skeleton.
PathSolution solve_regularized(const Model& model, const Control& h, const Field& x,
                               std::size_t steps, Regularization reg,
                               const SolverOptions& opts = {});

/// max_m ||Y(t_m) - (L - nu)[dt sum_{j=1}^m (Psi + lambda)(Y_j)] - x
///         - dt sum_{j<m} B(t_j, Y_j) h_j||_{F*}: the discrete integral identity.
double integral_identity_defect(const Model& model, const Control& h, const Field& x,
                                const PathSolution& path, Regularization reg = {});

/// sup_m ||a(t_m) - b(t_m)||^2_{F*_{1,2}} (default shift).
double sup_fstar_distance_sq(const TripleContext& ctx, const PathSolution& a,
                             const PathSolution& b);

struct RatePair {
  double first = 0.0;
  double second = 0.0;
  double abscissa = 0.0;  // lambda + lambda' or nu^2 + nu'^2
  double distance = 0.0;  // sup_m ||Y - Y'||^2_{F*}
};

struct RateReport {
  std::vector<RatePair> pairs;
  LineFit fit;             // over the pairs with distance > 0
  bool monotone = false;   // distances non-increasing along the sequence
};

/// Consecutive-pair distances of Y_{nu,lambda} for the given lambdas and the
/// slope of log D against log(lambda + lambda').
RateReport lambda_rate_study(const Model& model, const Control& h, const Field& x,
                             std::size_t steps, double nu, const std::vector<double>& lambdas,
                             const SolverOptions& opts = {});

/// Consecutive-pair distances of Y_nu and the slope against log(nu^2 + nu'^2).
RateReport nu_rate_study(const Model& model, const Control& h, const Field& x, std::size_t steps,
                         const std::vector<double>& nus, const SolverOptions& opts = {});

}  // namespace spme
