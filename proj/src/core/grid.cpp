#include "fsplab/grid.hpp"

#include "fsplab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsp {

std::string to_string(Boundary bc) {
  return bc == Boundary::periodic ? "periodic" : "dirichlet";
}

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::periodic;
  if (name == "dirichlet" || name == "dirichlet-zero") return Boundary::dirichlet_zero;
  throw InvalidArgument("unknown boundary kind '" + name + "'");
}

double Axis::weight(int i) const {
  const double h = spacing();
  if (bc == Boundary::periodic) return h;
  return (i == 0 || i == cells) ? 0.5 * h : h;
}

int Axis::neighbor(int i, int offset) const {
  const int n = nodes();
  const int j = i + offset;
  if (bc == Boundary::periodic) return ((j % n) + n) % n;
  return (j < 0 || j >= n) ? -1 : j;
}

GridSpec::GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 2)
    throw InvalidArgument("grid dimension must be 1 or 2");
  count_ = 1;
  for (const Axis& a : axes_) {
    if (a.cells < 1) throw InvalidArgument("cells per axis must be positive");
    if (!(a.upper > a.lower) || !std::isfinite(a.lower) || !std::isfinite(a.upper))
      throw InvalidArgument("axis bounds must satisfy lower < upper");
    count_ *= static_cast<std::size_t>(a.nodes());
  }
  nx_ = axes_[0].nodes();
}

GridSpec GridSpec::line(double lower, double upper, int cells, Boundary bc) {
  return GridSpec({Axis{lower, upper, cells, bc}});
}

GridSpec GridSpec::square(double lower, double upper, int cells, Boundary bc) {
  return GridSpec({Axis{lower, upper, cells, bc}, Axis{lower, upper, cells, bc}});
}

double GridSpec::min_spacing() const {
  double h = axes_[0].spacing();
  for (const Axis& a : axes_) h = std::min(h, a.spacing());
  return h;
}

std::array<int, 2> GridSpec::unflatten(std::size_t idx) const {
  if (dim() == 1) return {static_cast<int>(idx), 0};
  return {static_cast<int>(idx % static_cast<std::size_t>(nx_)),
          static_cast<int>(idx / static_cast<std::size_t>(nx_))};
}

Point GridSpec::point(std::size_t idx) const {
  const auto ij = unflatten(idx);
  Point x{axes_[0].coord(ij[0]), 0.0};
  if (dim() == 2) x[1] = axes_[1].coord(ij[1]);
  return x;
}

double GridSpec::weight(std::size_t idx) const {
  const auto ij = unflatten(idx);
  double w = axes_[0].weight(ij[0]);
  if (dim() == 2) w *= axes_[1].weight(ij[1]);
  return w;
}

GridSpec GridSpec::scaled(double factor) const {
  std::vector<Axis> ax = axes_;
  for (Axis& a : ax) {
    a.lower *= factor;
    a.upper *= factor;
    if (factor < 0) std::swap(a.lower, a.upper);
  }
  return GridSpec(std::move(ax));
}

GridSpec GridSpec::refined(int factor) const {
  std::vector<Axis> ax = axes_;
  for (Axis& a : ax) a.cells *= factor;
  return GridSpec(std::move(ax));
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "N=" << dim() << " cells=";
  for (int a = 0; a < dim(); ++a) os << (a ? "," : "") << axis(a).cells;
  os << " bounds=";
  for (int a = 0; a < dim(); ++a) os << (a ? "," : "") << axis(a).lower << ":" << axis(a).upper;
  os << " bc=";
  for (int a = 0; a < dim(); ++a) os << (a ? "," : "") << to_string(axis(a).bc);
  return os.str();
}

} // namespace fsp
