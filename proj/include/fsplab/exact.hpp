#pragma once

#include "fsplab/field.hpp"

#include <array>

namespace fsp {

/// Self-similar compactly supported solution of u_t = μ₁ div(|∇u|^{p-2}∇u):
///
///   u(x, t) = t^{-α} ( C - k (|x| t^{-β})^{p/(p-1)} )_+^{(p-1)/(p-2)}
///
/// with β = 1/(p + N(p-2)), α = Nβ and k = ((p-2)/p) (β/μ₁)^{1/(p-1)}.
struct BarenblattParams {
  double p = 3.0;
  int dim = 1;
  double mu1 = 1.0;
  double C = 1.0;

  double beta() const { return 1.0 / (p + dim * (p - 2.0)); }
  double alpha() const { return dim * beta(); }
  double k() const;
  /// Exponents of the profile: |ξ|^{q} inside, (.)^{m} outside.
  double q() const { return p / (p - 1.0); }
  double m() const { return (p - 1.0) / (p - 2.0); }
};

/// Validated constructor: p > 2, N in {1,2}, μ₁ > 0, C > 0.
BarenblattParams make_barenblatt(double p, int dim, double mu1, double C);

double barenblatt_radial(const BarenblattParams& bp, double r, double t);
double barenblatt_value(const BarenblattParams& bp, const Point& x, double t);
double barenblatt_front_radius(const BarenblattParams& bp, double t);

/// L¹ mass (time-independent), by tanh-sinh quadrature of the profile.
double barenblatt_mass(const BarenblattParams& bp);
/// Bisection on C so that the mass matches `mass` to 1e-10.
BarenblattParams barenblatt_for_mass(double p, int dim, double mu1, double mass);

ScalarField sample_barenblatt(const GridSpec& grid, const BarenblattParams& bp, double t,
                              const Point& center = {0.0, 0.0});

/// Taylor–Green vortex (sin x cos y, -cos x sin y) e^{-μ₁ t} on [0, 2π]².
/// With p = 2, μ₁ div(Du) = (μ₁/2)Δu = -μ₁u and (u·∇)u is a gradient,
/// so this solves the incompressible system exactly.
std::array<double, 2> taylor_green(double mu1, double x, double y, double t);
VectorField sample_taylor_green(const GridSpec& grid, double mu1, double t);

} // namespace fsp
