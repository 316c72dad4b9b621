#pragma once

#include "fsplab/grid.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace fsp {

/// Real nodal values on a grid.
class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(GridSpec grid);
  ScalarField(GridSpec grid, std::vector<double> values);

  template <class Fn>
  static ScalarField sample(const GridSpec& grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t n = 0; n < grid.node_count(); ++n) f.values_[n] = fn(grid.point(n));
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  double max_abs() const;
  /// Throws NumericalFailure naming the first non-finite node.
  void require_finite(const char* context) const;

private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// N-component nodal field (N = grid dimension).
class VectorField {
public:
  VectorField() = default;
  explicit VectorField(GridSpec grid);
  VectorField(GridSpec grid, std::vector<std::vector<double>> components);

  template <class Fn>
  static VectorField sample(const GridSpec& grid, Fn&& fn) {
    VectorField v(grid);
    for (std::size_t n = 0; n < grid.node_count(); ++n) {
      const auto val = fn(grid.point(n));
      for (int k = 0; k < v.components(); ++k) v.comps_[static_cast<std::size_t>(k)][n] = val[static_cast<std::size_t>(k)];
    }
    return v;
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return static_cast<int>(comps_.size()); }
  std::size_t size() const { return grid_.node_count(); }
  std::span<double> component(int k) { return comps_[static_cast<std::size_t>(k)]; }
  std::span<const double> component(int k) const { return comps_[static_cast<std::size_t>(k)]; }
  std::vector<double>& data(int k) { return comps_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& data(int k) const { return comps_[static_cast<std::size_t>(k)]; }
  ScalarField component_field(int k) const { return ScalarField(grid_, comps_[static_cast<std::size_t>(k)]); }

  /// Euclidean magnitude per node.
  ScalarField magnitude() const;
  /// max over nodes of max_k |u_k|
  double max_abs() const;
  void require_finite(const char* context) const;

private:
  GridSpec grid_;
  std::vector<std::vector<double>> comps_;
};

/// Symmetric N×N tensor per node; entry(i, j) and entry(j, i) alias the
/// same storage so symmetry is exact.
class TensorField {
public:
  explicit TensorField(GridSpec grid);

  const GridSpec& grid() const { return grid_; }
  std::span<double> entry(int i, int j) { return storage_[slot(i, j)]; }
  std::span<const double> entry(int i, int j) const { return storage_[slot(i, j)]; }
  /// Frobenius norm |T| = (T_ij T_ij)^(1/2) at each node.
  ScalarField frobenius() const;

private:
  std::size_t slot(int i, int j) const;
  GridSpec grid_;
  std::vector<std::vector<double>> storage_;
};

} // namespace fsp
