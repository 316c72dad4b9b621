#include "fsplab/exact.hpp"

#include "fsplab/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

namespace fsp {

double BarenblattParams::k() const {
  return ((p - 2.0) / p) * std::pow(beta() / mu1, 1.0 / (p - 1.0));
}

BarenblattParams make_barenblatt(double p, int dim, double mu1, double C) {
  if (!(p > 2.0) || !std::isfinite(p)) throw InvalidArgument("Barenblatt profile needs p > 2");
  if (dim != 1 && dim != 2) throw InvalidArgument("Barenblatt dimension must be 1 or 2");
  if (!(mu1 > 0.0)) throw InvalidArgument("mu1 must be > 0");
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidArgument("Barenblatt constant C must be > 0");
  return BarenblattParams{p, dim, mu1, C};
}

double barenblatt_radial(const BarenblattParams& bp, double r, double t) {
  if (!(t > 0.0)) throw InvalidArgument("Barenblatt profile is defined for t > 0 only");
  const double xi = std::abs(r) * std::pow(t, -bp.beta());
  const double inner = bp.C - bp.k() * std::pow(xi, bp.q());
  if (inner <= 0.0) return 0.0;
  return std::pow(t, -bp.alpha()) * std::pow(inner, bp.m());
}

double barenblatt_value(const BarenblattParams& bp, const Point& x, double t) {
  double r2 = x[0] * x[0];
  if (bp.dim == 2) r2 += x[1] * x[1];
  return barenblatt_radial(bp, std::sqrt(r2), t);
}

double barenblatt_front_radius(const BarenblattParams& bp, double t) {
  if (!(t > 0.0)) throw InvalidArgument("front radius is defined for t > 0 only");
  return std::pow(bp.C / bp.k(), (bp.p - 1.0) / bp.p) * std::pow(t, bp.beta());
}

double barenblatt_mass(const BarenblattParams& bp) {
  const double R = barenblatt_front_radius(bp, 1.0);
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto profile = [&](double r) {
    const double inner = bp.C - bp.k() * std::pow(r, bp.q());
    return inner > 0.0 ? std::pow(inner, bp.m()) : 0.0;
  };
  if (bp.dim == 1) return 2.0 * integrator.integrate(profile, 0.0, R);
  return 2.0 * std::numbers::pi * integrator.integrate([&](double r) { return profile(r) * r; }, 0.0, R);
}

BarenblattParams barenblatt_for_mass(double p, int dim, double mu1, double mass) {
  if (!(mass > 0.0)) throw InvalidArgument("prescribed mass must be > 0");
  auto mass_of = [&](double C) { return barenblatt_mass(make_barenblatt(p, dim, mu1, C)); };
  double lo = 1.0, hi = 1.0;
  while (mass_of(lo) > mass) lo *= 0.5;
  while (mass_of(hi) < mass) hi *= 2.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass_of(mid);
    if (std::abs(m - mass) <= 1e-10) return make_barenblatt(p, dim, mu1, mid);
    (m < mass ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  return make_barenblatt(p, dim, mu1, 0.5 * (lo + hi));
}

ScalarField sample_barenblatt(const GridSpec& grid, const BarenblattParams& bp, double t, const Point& center) {
  if (grid.dim() != bp.dim) throw InvalidArgument("grid dimension differs from Barenblatt dimension");
  return ScalarField::sample(grid, [&](const Point& x) {
    return barenblatt_value(bp, {x[0] - center[0], x[1] - center[1]}, t);
  });
}

std::array<double, 2> taylor_green(double mu1, double x, double y, double t) {
  const double decay = std::exp(-mu1 * t);
  return {std::sin(x) * std::cos(y) * decay, -std::cos(x) * std::sin(y) * decay};
}

VectorField sample_taylor_green(const GridSpec& grid, double mu1, double t) {
  if (grid.dim() != 2) throw InvalidArgument("Taylor-Green field is two-dimensional");
  return VectorField::sample(grid, [&](const Point& x) { return taylor_green(mu1, x[0], x[1], t); });
}

} // namespace fsp
