#include "fsplab/ops.hpp"

#include "fsplab/error.hpp"
#include "fsplab/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fsp {

bool ModelParams::thm1_applicable() const {
  return p >= (3.0 * dim + 2.0) / (dim + 2.0);
}

bool ModelParams::thm2_applicable() const {
  return p >= (3.0 * dim + 1.0) / (dim + 1.0);
}

void ModelParams::validate(bool require_degenerate) const {
  if (!(mu1 > 0.0) || !std::isfinite(mu1)) throw InvalidArgument("mu1 must be > 0");
  if (dim != 1 && dim != 2) throw InvalidArgument("dimension N must be 1 or 2");
  if (!std::isfinite(p) || p < 2.0) throw InvalidArgument("p must be >= 2");
  if (require_degenerate && !(p > 2.0))
    throw InvalidArgument("finite-speed runs require p > 2 (got p = " + std::to_string(p) + ")");
}

namespace {

struct LineLayout {
  std::size_t lines;
  std::size_t stride;
  int n;
  std::size_t start(std::size_t line, const GridSpec& grid, int axis) const {
    if (grid.dim() == 1) return 0;
    return axis == 0 ? line * static_cast<std::size_t>(grid.nodes(0)) : line;
  }
};

LineLayout layout(const GridSpec& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) throw InvalidArgument("axis out of range");
  const int n = grid.nodes(axis);
  if (n < 2) throw InvalidArgument("derivative needs at least 2 nodes on the axis");
  const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(grid.nodes(0));
  return {grid.node_count() / static_cast<std::size_t>(n), stride, n};
}

} // namespace

void derivative(const GridSpec& grid, int axis, std::span<const double> f, std::span<double> out) {
  const LineLayout L = layout(grid, axis);
  const Axis& ax = grid.axis(axis);
  const double inv2h = 0.5 / ax.spacing();
  const double invh = 1.0 / ax.spacing();
  const bool periodic = ax.bc == Boundary::periodic;
  const int n = L.n;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t line = 0; line < static_cast<std::ptrdiff_t>(L.lines); ++line) {
    const std::size_t s0 = L.start(static_cast<std::size_t>(line), grid, axis);
    auto at = [&](int i) { return f[s0 + static_cast<std::size_t>(i) * L.stride]; };
    auto put = [&](int i, double v) { out[s0 + static_cast<std::size_t>(i) * L.stride] = v; };
    for (int i = 1; i + 1 < n; ++i) put(i, (at(i + 1) - at(i - 1)) * inv2h);
    if (periodic) {
      put(0, (at(1 % n) - at(n - 1)) * inv2h);
      put(n - 1, (at(0) - at(n - 2 >= 0 ? n - 2 : 0)) * inv2h);
    } else if (n >= 3) {
      put(0, (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h);
      put(n - 1, (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h);
    } else {
      put(0, (at(1) - at(0)) * invh);
      put(1, (at(1) - at(0)) * invh);
    }
  }
}

void derivative_transpose(const GridSpec& grid, int axis, std::span<const double> g, std::span<double> out) {
  const LineLayout L = layout(grid, axis);
  const Axis& ax = grid.axis(axis);
  const double inv2h = 0.5 / ax.spacing();
  const double invh = 1.0 / ax.spacing();
  const bool periodic = ax.bc == Boundary::periodic;
  const int n = L.n;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t line = 0; line < static_cast<std::ptrdiff_t>(L.lines); ++line) {
    const std::size_t s0 = L.start(static_cast<std::size_t>(line), grid, axis);
    auto in = [&](int i) { return g[s0 + static_cast<std::size_t>(i) * L.stride]; };
    auto acc = [&](int i) -> double& { return out[s0 + static_cast<std::size_t>(i) * L.stride]; };
    for (int i = 0; i < n; ++i) acc(i) = 0.0;
    // rows of the derivative matrix, scattered along one line only
    for (int i = 1; i + 1 < n; ++i) {
      acc(i + 1) += in(i) * inv2h;
      acc(i - 1) -= in(i) * inv2h;
    }
    if (periodic) {
      acc(1 % n) += in(0) * inv2h;
      acc(n - 1) -= in(0) * inv2h;
      acc(0) += in(n - 1) * inv2h;
      acc(n - 2 >= 0 ? n - 2 : 0) -= in(n - 1) * inv2h;
    } else if (n >= 3) {
      acc(0) += -3.0 * in(0) * inv2h;
      acc(1) += 4.0 * in(0) * inv2h;
      acc(2) += -1.0 * in(0) * inv2h;
      acc(n - 1) += 3.0 * in(n - 1) * inv2h;
      acc(n - 2) += -4.0 * in(n - 1) * inv2h;
      acc(n - 3) += in(n - 1) * inv2h;
    } else {
      acc(1) += (in(0) + in(1)) * invh;
      acc(0) -= (in(0) + in(1)) * invh;
    }
  }
}

VectorField gradient(const ScalarField& f) {
  VectorField g(f.grid());
  for (int a = 0; a < f.grid().dim(); ++a) derivative(f.grid(), a, f.values(), g.component(a));
  return g;
}

std::vector<std::vector<std::vector<double>>> velocity_gradient(const VectorField& v) {
  const GridSpec& grid = v.grid();
  const std::size_t d = static_cast<std::size_t>(grid.dim());
  std::vector<std::vector<std::vector<double>>> out(
      d, std::vector<std::vector<double>>(d, std::vector<double>(grid.node_count())));
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t a = 0; a < d; ++a)
      derivative(grid, static_cast<int>(a), v.component(static_cast<int>(k)), out[k][a]);
  return out;
}

TensorField deformation_tensor(const VectorField& v) {
  const GridSpec& grid = v.grid();
  if (grid.dim() != 2) throw InvalidArgument("deformation_tensor needs a 2D vector field; use gradient in 1D");
  const auto du = velocity_gradient(v);
  TensorField D(grid);
  auto xx = D.entry(0, 0);
  auto yy = D.entry(1, 1);
  auto xy = D.entry(0, 1);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    xx[n] = du[0][0][n];
    yy[n] = du[1][1][n];
    xy[n] = 0.5 * (du[0][1][n] + du[1][0][n]);
  }
  return D;
}

ScalarField divergence(const VectorField& v) {
  const GridSpec& grid = v.grid();
  ScalarField div(grid);
  std::vector<double> tmp(grid.node_count());
  for (int a = 0; a < grid.dim(); ++a) {
    derivative(grid, a, v.component(a), tmp);
    for (std::size_t n = 0; n < tmp.size(); ++n) div[n] += tmp[n];
  }
  return div;
}

namespace {

void check_exponent(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("norm exponent q must be in [1, inf)");
}

double powq(double a, double q) {
  if (q == 1.0) return a;
  if (q == 2.0) return a * a;
  if (q == 3.0) return a * a * a;
  return std::pow(a, q);
}

} // namespace

double lp_norm(const ScalarField& f, double q) {
  check_exponent(q);
  const GridSpec& grid = f.grid();
  const auto v = f.values();
  const double s = deterministic_sum(v.size(), [&](std::size_t n) { return powq(std::abs(v[n]), q) * grid.weight(n); });
  return std::pow(s, 1.0 / q);
}

double lp_norm(const VectorField& v, double q) {
  check_exponent(q);
  return lp_norm(v.magnitude(), q);
}

double layer_overlap(const Axis& axis, int j, double s) {
  const double h = axis.spacing();
  const double x = axis.coord(j);
  double lo, hi;
  if (axis.bc == Boundary::periodic) {
    lo = x;
    hi = x + h;
  } else {
    lo = std::max(axis.lower, x - 0.5 * h);
    hi = std::min(axis.upper, x + 0.5 * h);
  }
  return std::max(0.0, hi - std::max(lo, s));
}

std::vector<double> layer_profile(const GridSpec& grid, std::span<const double> density) {
  const int last = grid.dim() - 1;
  const int layers = grid.nodes(last);
  std::vector<double> profile(static_cast<std::size_t>(layers));
  if (grid.dim() == 1) {
    std::copy(density.begin(), density.end(), profile.begin());
    return profile;
  }
  const int nx = grid.nodes(0);
  const Axis& ax = grid.axis(0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < layers; ++j) {
    std::vector<double> row(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) row[static_cast<std::size_t>(i)] = density[grid.index(i, j)] * ax.weight(i);
    profile[static_cast<std::size_t>(j)] = pairwise_sum(row);
  }
  return profile;
}

double restrict_profile(const GridSpec& grid, std::span<const double> profile, double s) {
  const Axis& ax = grid.axis(grid.dim() - 1);
  const int n = ax.nodes();
  // first layer whose dual cell reaches above s
  const double h = ax.spacing();
  int j0 = static_cast<int>(std::floor((s - ax.lower) / h)) - 1;
  j0 = std::clamp(j0, 0, n);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n - j0));
  for (int j = j0; j < n; ++j) {
    const double w = layer_overlap(ax, j, s);
    if (w > 0.0) terms.push_back(profile[static_cast<std::size_t>(j)] * w);
  }
  return pairwise_sum(terms);
}

double restrict_integral(const ScalarField& f, double q, double s) {
  check_exponent(q);
  const auto v = f.values();
  std::vector<double> dens(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) dens[n] = powq(std::abs(v[n]), q);
  return restrict_profile(f.grid(), layer_profile(f.grid(), dens), s);
}

double restrict_integral(const VectorField& v, double q, double s) {
  return restrict_integral(v.magnitude(), q, s);
}

} // namespace fsp
