#pragma once

#include "spme/skeleton.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace spme::testing {

inline SpectralGenerator laplacian(std::size_t n, double length = 2.0 * std::numbers::pi) {
  return SpectralGenerator::periodic_laplacian(MeasureGrid::periodic1d(n, length));
}

inline Model make_model(const SpectralGenerator& g, Nonlinearity psi, NoiseParams np = {},
                        double horizon = 1.0) {
  return Model{std::move(psi), NoiseCoefficient(TripleContext(g), np, horizon)};
}

// state independent, no time modulation
inline NoiseParams constant_noise(double c0 = 1.0, double beta = 1.0) {
  return {.c0 = c0, .c1 = 0.0, .c2 = 0.0, .gamma = 1.0, .beta = beta};
}

inline Field sine(const GridPtr& grid, double k, double amp = 1.0) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
  const double length = *grid->spacing() * static_cast<double>(grid->size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = amp * std::sin(2.0 * std::numbers::pi * k * (*grid->labels())(i) / length);
  return Field(grid, v);
}

inline Field random_field(const GridPtr& grid, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = scale * nd(rng);
  return Field(grid, v);
}

// Dense matrix of L rebuilt from the periodic stencil, independent of the
// eigendecomposition.
inline Eigen::MatrixXd stencil_matrix(std::size_t n, double length) {
  const double h = length / static_cast<double>(n);
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, i) -= 2.0 / (h * h);
    a(i, (i + 1) % m) += 1.0 / (h * h);
    a(i, (i + m - 1) % m) += 1.0 / (h * h);
  }
  return a;
}

}  // namespace spme::testing
