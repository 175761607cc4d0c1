#pragma once

#include <span>

namespace spme {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares line through (log x_i, log y_i). Needs two or more points
/// with x_i, y_i > 0.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace spme
