#pragma once

// Shared time-stepper behind solve_regularized and simulate.

#include "spme/skeleton.hpp"

#include <Eigen/Dense>

#include <functional>

namespace spme::detail {

// Fills the noise increment in eigen-coefficients for step m, already scaled
// by sqrt(eps).
using IncrementFn = std::function<void(std::size_t step, Eigen::VectorXd& dw)>;

// Runs the semi-implicit scheme. With `noise` empty the forcing is exactly
// the skeleton one, so eps = 0 reproduces solve_skeleton bit for bit.
PathSolution evolve(const Model& model, const Control& h, const Field& x, std::size_t steps,
                    Regularization reg, const SolverOptions& opts, const IncrementFn& noise);

}  // namespace spme::detail
