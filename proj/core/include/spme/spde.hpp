#pragma once

#include "spme/fit.hpp"
#include "spme/skeleton.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spme {

/// Truncated cylindrical Wiener process: independent Brownian motions on the
/// first `modes` eigenvectors (0 means all n).
struct WienerConfig {
  std::size_t modes = 0;
  std::uint64_t seed = 0;
};

/// Counter-based standard normal keyed by (seed, sample, step, mode).
/// Pure function: no state, so any evaluation order gives the same numbers.
double normal_variate(std::uint64_t seed, std::uint64_t sample, std::uint64_t step,
                      std::uint64_t mode);

struct SdeRun {
  PathSolution path;
  double epsilon = 0.0;
  Control control;
  WienerConfig wiener;
  std::uint64_t sample = 0;
};

/// Semi-implicit Euler-Maruyama for
///   dX = L Psi(X) dt + B(t, X) h dt + sqrt(eps) B(t, X) dW,
/// implicit in L Psi and explicit (left point) in B. eps = 0 takes the
/// skeleton code path exactly. `sample` selects an independent stream.
SdeRun simulate(const Model& model, const Control& h, const Field& x, std::size_t steps,
                double epsilon, const WienerConfig& wiener, std::uint64_t sample = 0,
                const SolverOptions& opts = {});

struct McOptions {
  std::size_t modes = 0;   // Wiener truncation, 0 = all
  unsigned threads = 1;
  double max_failed_fraction = 0.05;
  SolverOptions solver;
};

struct McRow {
  double epsilon = 0.0;
  double mean = 0.0;          // E sup_m ||X - Y||^2_{F*}
  double stderr_mean = 0.0;
  double terminal_mean = 0.0;  // E ||X(T) - Y(T)||^2_{F*}
  double terminal_stderr = 0.0;
  std::size_t n_effective = 0;
  std::size_t failed = 0;
};

struct McReport {
  std::vector<McRow> rows;
  LineFit fit;              // log mean against log eps
  bool monotone = false;    // means non-increasing in eps within 2 pooled stderr
  std::vector<std::string> warnings;
};

/// Monte Carlo estimate of E sup_m ||X^{h,eps}(t_m) - Y^h(t_m)||^2_{F*} per eps.
/// Samples share their Brownian increments across eps (common random numbers).
McReport mc_condition_a(const Model& model, const Control& h, const Field& x, std::size_t steps,
                        const std::vector<double>& eps_list, std::size_t n_samples,
                        std::uint64_t seed, const McOptions& opts = {});

/// Exact E ||X(T) - X_0(T)||^2_{F*} of the discrete scheme when Psi = 0 and B
/// is state independent: eps c0^2 dt sum_m theta(t_m)^2 sum_{k<J} m_k^2 / (nu - lambda_k)
/// with nu the context's default shift.
double gaussian_terminal_moment(const Model& model, std::size_t steps, double epsilon,
                                std::size_t modes = 0);

}  // namespace spme
