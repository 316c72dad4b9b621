#pragma once

#include "fsplab/field.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fsp {

/// Samples of a nonnegative nonincreasing function on an increasing grid,
/// read as the piecewise-linear interpolant extended by its end values.
struct MonotoneSamples {
  std::vector<double> s;
  std::vector<double> f;

  /// InvalidArgument unless sizes match, s increases, f >= 0 and f is
  /// nonincreasing within 1e-12 slack.
  void validate() const;
  double operator()(double x) const;
};

struct RelationReport {
  std::vector<double> s;
  /// f(s + f(s)) <= ε f(s) at each s in `s`
  std::vector<bool> holds;
  std::size_t violations = 0;
  bool all() const { return violations == 0; }
};

/// Per-sample truth of f(s + f(s)) <= ε f(s) for samples s >= s0, with an
/// absolute slack of 1e-12 max f for roundoff.
RelationReport check_stampacchia_relation(const MonotoneSamples& f, double s0, double eps);

struct VanishingReport {
  double point = 0;
  /// max f over samples at or beyond `point`
  double max_beyond = 0;
  bool confirmed = false;
};

/// s0 + f(s0)/(1-ε) after checking the relation on the grid (InvalidArgument
/// listing the violations otherwise); confirmed iff f <= vanish_tol beyond it.
/// vanish_tol defaults to 1e-12 f(s0).
VanishingReport stampacchia_vanishing_point(const MonotoneSamples& f, double s0, double eps,
                                            std::optional<double> vanish_tol = std::nullopt);

struct StampacchiaCase {
  MonotoneSamples f;
  double s0 = 0;
  double eps = 0;
};

/// Random piecewise-linear f satisfying the relation by construction.
/// Knots s_{k+1} = s_k + σ_k f_k with f_{k+1} = ρ_k f_k, ρ_k <= ε and
/// σ_k in [1-ρ_k, 1-ρ_k σ_{k+1}]: f has slope >= -1, so s + f(s) is
/// nondecreasing and lands at least two knots ahead.
StampacchiaCase random_stampacchia_case(std::uint64_t seed);

/// θ = (1/b - 1/a)/(1/b + 1/N - 1/d); InvalidArgument unless a > 1,
/// 0 < b < a, d > 1 and θ in [0, 1).
double gn_theta(double a, double b, double d, int N);

/// ‖v‖_a / (‖∇v‖_d^θ ‖v‖_b^{1-θ} + slab) with slab = δ^{-N(a-b)/(ab)} ‖v‖_b when
/// δ is given, else 0. InvalidArgument for a zero field.
double gn_ratio(const ScalarField& v, double a, double b, double d, std::optional<double> delta_slab = std::nullopt);

} // namespace fsp
