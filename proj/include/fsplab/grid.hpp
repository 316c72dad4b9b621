#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fsp {

enum class Boundary { periodic, dirichlet_zero };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& name);

/// One axis of a uniform lattice.
///
/// Periodic axes carry `cells` nodes at lower + i*h (the node at `upper`
/// is identified with the one at `lower`). Dirichlet axes carry cells+1
/// nodes including both end points, which are held at zero by the solvers.
struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  int cells = 1;
  Boundary bc = Boundary::dirichlet_zero;

  double spacing() const { return (upper - lower) / cells; }
  int nodes() const { return bc == Boundary::periodic ? cells : cells + 1; }
  double coord(int i) const { return lower + i * spacing(); }
  /// Length of the node's dual cell [x - h/2, x + h/2] clipped to the box.
  double weight(int i) const;
  /// Wrap or clamp a node index; returns -1 outside a dirichlet axis.
  int neighbor(int i, int offset) const;

  bool operator==(const Axis&) const = default;
};

using Point = std::array<double, 2>;

/// Uniform 1D or 2D lattice. Nodes are stored x-fastest; the last axis
/// is the "normal" coordinate x_N used by half-space experiments.
class GridSpec {
public:
  GridSpec() = default;
  explicit GridSpec(std::vector<Axis> axes);

  static GridSpec line(double lower, double upper, int cells, Boundary bc);
  static GridSpec square(double lower, double upper, int cells, Boundary bc);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  int nodes(int a) const { return axis(a).nodes(); }
  double spacing(int a) const { return axis(a).spacing(); }
  double min_spacing() const;
  std::size_t node_count() const { return count_; }

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) * static_cast<std::size_t>(j);
  }
  /// Per-axis integer coordinates of a flat node index.
  std::array<int, 2> unflatten(std::size_t idx) const;
  Point point(std::size_t idx) const;
  /// Quadrature weight of a node (product of axis dual-cell lengths).
  double weight(std::size_t idx) const;
  /// The grid with every axis rescaled by `factor` about the origin.
  GridSpec scaled(double factor) const;
  /// Same box, cell count multiplied by `factor` on every axis.
  GridSpec refined(int factor) const;

  std::string describe() const;

  bool operator==(const GridSpec&) const = default;

private:
  std::vector<Axis> axes_;
  int nx_ = 1;
  std::size_t count_ = 0;
};

} // namespace fsp
