#include "fsplab/field.hpp"

#include "fsplab/error.hpp"
#include "fsplab/reduce.hpp"

#include <sstream>

namespace fsp {

namespace {

void report_non_finite(const GridSpec& grid, std::span<const double> values, const char* context,
                       int component) {
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (!std::isfinite(values[n])) {
      const auto ij = grid.unflatten(n);
      std::ostringstream os;
      os << context << ": non-finite value " << values[n] << " at node " << n << " (i=" << ij[0];
      if (grid.dim() == 2) os << ", j=" << ij[1];
      os << ")";
      if (component >= 0) os << " component " << component;
      throw NumericalFailure(os.str());
    }
  }
}

} // namespace

ScalarField::ScalarField(GridSpec grid) : grid_(std::move(grid)), values_(grid_.node_count(), 0.0) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.node_count())
    throw InvalidArgument("field value count does not match grid node count");
}

double ScalarField::max_abs() const {
  return parallel_max(values_.size(), [&](std::size_t n) { return std::abs(values_[n]); });
}

void ScalarField::require_finite(const char* context) const {
  report_non_finite(grid_, values_, context, -1);
}

VectorField::VectorField(GridSpec grid)
    : grid_(std::move(grid)),
      comps_(static_cast<std::size_t>(grid_.dim()), std::vector<double>(grid_.node_count(), 0.0)) {}

VectorField::VectorField(GridSpec grid, std::vector<std::vector<double>> components)
    : grid_(std::move(grid)), comps_(std::move(components)) {
  if (comps_.size() != static_cast<std::size_t>(grid_.dim()))
    throw InvalidArgument("vector field needs one component per dimension");
  for (const auto& c : comps_)
    if (c.size() != grid_.node_count())
      throw InvalidArgument("vector component size does not match grid node count");
}

ScalarField VectorField::magnitude() const {
  ScalarField m(grid_);
  auto out = m.values();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
    double s = 0.0;
    for (const auto& c : comps_) s += c[static_cast<std::size_t>(n)] * c[static_cast<std::size_t>(n)];
    out[static_cast<std::size_t>(n)] = std::sqrt(s);
  }
  return m;
}

double VectorField::max_abs() const {
  double best = 0.0;
  for (const auto& c : comps_)
    best = std::max(best, parallel_max(c.size(), [&](std::size_t n) { return std::abs(c[n]); }));
  return best;
}

void VectorField::require_finite(const char* context) const {
  for (std::size_t k = 0; k < comps_.size(); ++k)
    report_non_finite(grid_, comps_[k], context, static_cast<int>(k));
}

TensorField::TensorField(GridSpec grid) : grid_(std::move(grid)) {
  const std::size_t d = static_cast<std::size_t>(grid_.dim());
  storage_.assign(d * (d + 1) / 2, std::vector<double>(grid_.node_count(), 0.0));
}

std::size_t TensorField::slot(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int d = grid_.dim();
  // upper-triangular packing: (0,0),(0,1),...,(1,1),...
  return static_cast<std::size_t>(i * d - i * (i - 1) / 2 + (j - i));
}

ScalarField TensorField::frobenius() const {
  ScalarField out(grid_);
  const int d = grid_.dim();
  for (std::size_t n = 0; n < grid_.node_count(); ++n) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double e = storage_[slot(i, j)][n];
        s += e * e;
      }
    out[n] = std::sqrt(s);
  }
  return out;
}

} // namespace fsp
