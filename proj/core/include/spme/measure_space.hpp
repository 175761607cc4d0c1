#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <vector>

namespace spme {

class MeasureGrid;
using GridPtr = std::shared_ptr<const MeasureGrid>;

/// Finite weighted point set standing in for (E, B(E), mu).
///
/// Every weight is strictly positive and finite. Builtin geometries carry the
/// point coordinates in `labels()`; grids built from raw weights do not.
class MeasureGrid {
 public:
  /// Uniform periodic grid of `n` points on [0, length), each of mass length/n.
  static GridPtr periodic1d(std::size_t n, double length);
  /// Arbitrary strictly positive weights.
  static GridPtr from_weights(std::vector<double> weights);

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }
  double total_mass() const noexcept { return weights_.sum(); }
  const std::optional<Eigen::VectorXd>& labels() const noexcept { return labels_; }
  /// Uniform spacing of a periodic1d grid; empty otherwise.
  std::optional<double> spacing() const noexcept { return spacing_; }

 private:
  MeasureGrid(Eigen::VectorXd weights, std::optional<Eigen::VectorXd> labels,
              std::optional<double> spacing);

  Eigen::VectorXd weights_;
  std::optional<Eigen::VectorXd> labels_;
  std::optional<double> spacing_;
};

/// Element of L^2(mu): one finite real value per grid point.
class Field {
 public:
  Field(GridPtr grid, Eigen::VectorXd values);
  static Field zeros(GridPtr grid);
  static Field constant(GridPtr grid, double value);

  const GridPtr& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Throws DimensionError unless both fields live on the same grid.
void require_same_grid(const Field& u, const Field& v);
bool same_grid(const MeasureGrid& a, const MeasureGrid& b) noexcept;

/// Discrete integral of u*v against mu.
double inner_l2(const Field& u, const Field& v);
double norm_l2(const Field& u);

}  // namespace spme
