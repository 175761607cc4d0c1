#pragma once

#include "spme/fit.hpp"
#include "spme/skeleton.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace spme {

/// Terminal-value control problem: steer the skeleton from x to `target`
/// at time T with controls spanned by the first `control_modes` eigenvectors,
/// constant on `control_cells` equal time cells.
struct RateProblem {
  Model model;
  Field x;
  std::size_t steps = 64;
  Field target;
  double terminal_tol = 1e-3;  // reported reachability threshold on the F* gap
  std::size_t control_modes = 1;
  std::size_t control_cells = 1;

  /// Throws ValidationError if the subspace or the grids are inconsistent.
  void validate() const;
  std::size_t dimension() const { return control_modes * control_cells; }
};

/// 1/2 int_0^T |h|_2^2.
double rate_evaluate(const Control& h);

/// Control from subspace coordinates w, ordered cell-major; the map is
/// scaled so that rate_evaluate(h) = |w|^2 / 2.
Control control_from_coordinates(const RateProblem& p, const Eigen::VectorXd& w);
/// Orthogonal projection of h onto the subspace, in the same coordinates.
Eigen::VectorXd coordinates_from_control(const RateProblem& p, const Control& h);

/// ||Y^h(T) - target||_{F*}.
double endpoint_gap(const RateProblem& p, const Control& h);

struct MinimizeOptions {
  std::vector<double> penalties{1e-1, 1e-2, 1e-3};
  int max_iterations = 200;  // quasi-Newton iterations per penalty level
  double fd_step = 1e-5;     // relative central-difference step
  double grad_tol = 1e-10;
  std::optional<double> energy_bound;  // project iterates back into S_M
  SolverOptions solver;
};

struct ActionResult {
  Control control;
  double rate = 0.0;
  double endpoint_gap = 0.0;
  bool reached = false;   // endpoint_gap <= terminal_tol
  bool degraded = false;  // a line search failed or the iteration cap was hit
  int iterations = 0;
  std::vector<double> objective_per_level;
};

/// Minimizes 1/2 |w|^2 + ||Y^{h(w)}(T) - target||^2_{F*} / delta along the
/// penalty schedule with warm starts (BFGS, central finite differences).
ActionResult minimize_action(const RateProblem& p, const MinimizeOptions& opts = {});

struct OracleResult {
  Control control;
  double rate = 0.0;
  double endpoint_gap = 0.0;  // of the discrete linear model
  Eigen::Index rank = 0;
  Eigen::MatrixXd response;      // dY(T) coefficients per unit w
  Eigen::VectorXd displacement;  // target - free flow, coefficients
  Eigen::VectorXd w;
};

/// Minimum-energy control of the linear, state-independent case from the
/// per-mode discrete propagators (1 - dt k1 lambda_k)^{-1}; F*-weighted
/// least squares, minimum norm on the reachable subspace.
OracleResult linear_oracle(const RateProblem& p, double rank_tol = 1e-10);

struct DecayReport {
  std::vector<int> ns;
  std::vector<double> distances;  // sup_m ||Y^{h_n} - Y^h||_{F*}
  bool strictly_decreasing = false;
  double last_over_first = 0.0;
  LineFit fit;  // log d_n against log n; slope near -1 for 1/n decay
  bool passed() const { return strictly_decreasing && last_over_first <= 0.2; }
};

struct WeakTestOptions {
  unsigned threads = 1;
  SolverOptions solver;
};

/// h_n = h + A sin(2 pi n t / T) e_1 with e_1 the leading eigenvector, sine
/// averaged over each solver step. Needs at least 8 steps per oscillation.
DecayReport weak_convergence_test(const Model& model, const Field& x, std::size_t steps,
                                  const Control& h, double amplitude, const std::vector<int>& n_list,
                                  const WeakTestOptions& opts = {});

}  // namespace spme
