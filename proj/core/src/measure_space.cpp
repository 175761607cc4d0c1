#include "spme/measure_space.hpp"

#include "spme/errors.hpp"

#include <cmath>
#include <string>

namespace spme {

MeasureGrid::MeasureGrid(Eigen::VectorXd weights, std::optional<Eigen::VectorXd> labels,
                         std::optional<double> spacing)
    : weights_(std::move(weights)), labels_(std::move(labels)), spacing_(spacing) {
  if (weights_.size() < 1) throw ValidationError("grid must have at least one point");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    const double w = weights_(i);
    if (!std::isfinite(w) || !(w > 0.0)) {
      throw ValidationError("grid weight " + std::to_string(i) +
                            " must be strictly positive and finite");
    }
  }
}

GridPtr MeasureGrid::periodic1d(std::size_t n, double length) {
  if (n < 1) throw ValidationError("periodic1d grid needs n >= 1");
  if (!std::isfinite(length) || !(length > 0.0)) {
    throw ValidationError("periodic1d grid needs a positive finite length");
  }
  const double h = length / static_cast<double>(n);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), h);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = h * static_cast<double>(i);
  return GridPtr(new MeasureGrid(std::move(w), std::move(x), h));
}

GridPtr MeasureGrid::from_weights(std::vector<double> weights) {
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
      weights.data(), static_cast<Eigen::Index>(weights.size()));
  return GridPtr(new MeasureGrid(std::move(w), std::nullopt, std::nullopt));
}

bool same_grid(const MeasureGrid& a, const MeasureGrid& b) noexcept {
  if (&a == &b) return true;
  return a.size() == b.size() && a.weights() == b.weights();
}

Field::Field(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("field needs a grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
    throw DimensionError("field has " + std::to_string(values_.size()) +
                         " values on a grid of " + std::to_string(grid_->size()) + " points");
  }
  if (!values_.allFinite()) throw ValidationError("field values must be finite");
}

Field Field::zeros(GridPtr grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return Field(std::move(grid), Eigen::VectorXd::Zero(n));
}

Field Field::constant(GridPtr grid, double value) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return Field(std::move(grid), Eigen::VectorXd::Constant(n, value));
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  values_ += other.values_;
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  values_ -= other.values_;
  return *this;
}

Field& Field::operator*=(double s) {
  values_ *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void require_same_grid(const Field& u, const Field& v) {
  if (!same_grid(*u.grid(), *v.grid())) {
    throw DimensionError("fields live on different grids");
  }
}

double inner_l2(const Field& u, const Field& v) {
  require_same_grid(u, v);
  return (u.grid()->weights().array() * u.values().array() * v.values().array()).sum();
}

double norm_l2(const Field& u) { return std::sqrt(inner_l2(u, u)); }

}  // namespace spme
