#pragma once

#include "fsplab/field.hpp"

#include <span>
#include <vector>

namespace fsp {

/// (p, μ₁, N) of the power-law model with the envelope range flags.
struct ModelParams {
  double p = 3.0;
  double mu1 = 1.0;
  int dim = 1;

  /// p >= (3N+2)/(N+2)
  bool thm1_applicable() const;
  /// p >= (3N+1)/(N+1)
  bool thm2_applicable() const;
  bool degenerate() const { return p > 2.0; }
  /// Throws InvalidArgument unless mu1 > 0, p >= 2 and dim in {1, 2};
  /// with `require_degenerate` p must exceed 2.
  void validate(bool require_degenerate) const;
};

// Discrete derivatives. Centered second-order in the interior, wraparound
// on periodic axes, second-order one-sided at dirichlet end nodes.

/// d/dx_axis of nodal values into `out` (sized node_count).
void derivative(const GridSpec& grid, int axis, std::span<const double> values, std::span<double> out);
/// Adjoint of `derivative` in the unweighted l2 pairing.
void derivative_transpose(const GridSpec& grid, int axis, std::span<const double> values, std::span<double> out);

VectorField gradient(const ScalarField& f);
/// Components of ∇u_k: result[k][a] = ∂u_k/∂x_a.
std::vector<std::vector<std::vector<double>>> velocity_gradient(const VectorField& v);
/// (Du)_ij = ½(∂u_i/∂x_j + ∂u_j/∂x_i). Two-dimensional fields only.
TensorField deformation_tensor(const VectorField& v);
ScalarField divergence(const VectorField& v);

/// (Σ|v|^q w)^(1/q) with dual-cell weights; vector fields use |v| Euclidean.
double lp_norm(const ScalarField& f, double q);
double lp_norm(const VectorField& v, double q);

/// Integral of |f|^q over {x_N >= s}. A node's dual cell that straddles
/// the cut contributes its covered fraction, so the result is continuous
/// and nonincreasing in s.
double restrict_integral(const ScalarField& f, double q, double s);
double restrict_integral(const VectorField& v, double q, double s);

/// Integrals of a nodal density over each x_N-layer: entry j is
/// Σ_{nodes in layer j} density * (transverse weight). restrict_profile
/// then integrates {x_N >= s} using the same cell-fraction rule.
std::vector<double> layer_profile(const GridSpec& grid, std::span<const double> density);
double restrict_profile(const GridSpec& grid, std::span<const double> profile, double s);
/// Fraction of layer j's dual cell lying in {x_N >= s}, times its length.
double layer_overlap(const Axis& axis, int j, double s);

} // namespace fsp
