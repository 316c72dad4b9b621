#pragma once

#include "fsplab/trajectory.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fsp {

struct TheoryExponents {
  double p = 0;
  int N = 0;
  double alpha1 = 0, beta1 = 0, alpha2 = 0, beta2 = 0, beta = 0;
  double theta1 = 0, theta2 = 0;

  static TheoryExponents make(double p, int N);
  /// max{T^{α₁(1+β₂)}, T^{α₂(1+β₁)}}
  double F(double T) const;
};

enum class GradientNorm {
  /// |∇u|, all first derivatives
  full,
  /// |Du|, the symmetric part (vector fields)
  deformation
};

/// Space-time tail integrals over Q_T(s) = (t_first, T) × {x_N >= s} of a
/// trajectory: space by restrict_profile, time by the trapezoid rule over
/// snapshots (the integrand is interpolated linearly to T). Nodes with
/// |u| <= floor contribute nothing.
class TailIntegrals {
public:
  TailIntegrals(const ScalarTrajectory& traj, double p, double T, double floor = 0.0);
  TailIntegrals(const VectorTrajectory& traj, double p, double T, double floor = 0.0,
                GradientNorm norm = GradientNorm::full);

  double T() const { return T_; }
  double t_first() const { return times_.front(); }
  double p() const { return p_; }
  const GridSpec& grid() const { return grid_; }

  /// ∬|u|^p
  double A(double s) const;
  /// ∬|u|³
  double B(double s) const;
  /// ∬|u|²
  double L2(double s) const;
  /// ∬|∇u|^p (or |Du|^p)
  double grad_p(double s) const;
  /// max over snapshots of ∫_{x_N >= s}|u|²
  double sup_L2(double s) const;

private:
  enum Kind { kp, k3, k2, kg, kinds };
  void add_snapshot(double t, const std::vector<double>* density);
  void integrate();
  double time_integral(int kind, double s) const;

  GridSpec grid_;
  double p_ = 0, T_ = 0;
  std::vector<double> times_;
  /// profiles_[kind][snapshot] = integral of the density over each x_N layer
  std::vector<std::vector<double>> profiles_[kinds];
  /// trapezoid-in-time integral of each layer
  std::vector<double> integrated_[kinds];
};

double energy_A(const ScalarTrajectory& traj, double s, double T, double p, double floor = 0.0);
double energy_B(const ScalarTrajectory& traj, double s, double T, double p, double floor = 0.0);

struct LedgerOptions {
  /// the constant 2c̃ inside δ_T^{(1)}, δ_T^{(2)}
  double j_constant = 1.0;
  bool with_L = true;
  double mu1 = 1.0;
};

struct EnergyLedger {
  double T = 0;
  TheoryExponents exponents;
  double F = 0;
  double j_constant = 1.0;
  std::vector<double> s, A, B, C;
  std::vector<double> J, L;
};

/// A, B, C = A^{1+β₂} + B^{1+β₁}, J = max{(2c̃ F C^{β₁})^{1/(pβ)}, (2c̃ F C^{β₂})^{1/β}}
/// and L(s) = sup_t ∫_{Ω(s)}u² + (1/T)∬u² + μ₁∬|∇u|^p on the s-grid.
EnergyLedger build_ledger(const TailIntegrals& tails, const std::vector<double>& s_grid, const TheoryExponents& exps,
                          const LedgerOptions& options = {});

struct CalibrationReport {
  double c_tilde = 0;
  double s = 0, delta = 0;
  std::size_t pairs = 0;
};

/// c̃ as the max over (s, δ) with C(s) > 0 of
/// C(s+δ) / (F(T) (δ^{-pβ} C(s)^{1+β₁} + δ^{-β} C(s)^{1+β₂})).
CalibrationReport calibrate_c_tilde(const TailIntegrals& tails, const TheoryExponents& exps,
                                    const std::vector<double>& s_grid, const std::vector<double>& deltas);

struct IterationReport {
  double eps = 0;
  std::vector<bool> holds;
  /// relation holds at every grid point from index `from` onward
  bool satisfied = false;
  std::size_t from = 0;
  double s0 = 0, J0 = 0;
  double point = 0;
  double max_beyond = 0;
  double floor = 0;
  bool vanishes = false;
};

/// Tests J(s + J(s)) <= ε J(s) on the s-grid (J linearly interpolated,
/// extended by its end values); where it holds from s₀ onward, predicts
/// s₀ + J(s₀)/(1-ε) and checks J <= floor beyond (floor defaults to
/// 1e-12 max J).
IterationReport check_iteration(const EnergyLedger& ledger, double eps, std::optional<double> floor = std::nullopt);

struct Lemma21Report {
  double lhs = 0;
  double rhs = 0;
  /// lhs/rhs; 0 when both vanish, +inf when only rhs does
  double ratio = 0;
};

/// lhs = sup_t ∫_{Ω(s+δ)}|u|² + (1/T)∬_{Q(s+δ)}|u|² + μ₁∬_{Q(s+δ)}|∇u|^p,
/// rhs = δ^{-p}∬_{Q(s)}|u|^p + δ^{-1}∬_{Q(s)}|u|³.
Lemma21Report check_lemma21(const TailIntegrals& tails, double s, double delta, double mu1);
Lemma21Report check_lemma21(const ScalarTrajectory& traj, double s, double delta, double T, double mu1, double p,
                            double floor = 0.0);

/// c̃ T (s^{-N(p-1)} + s^{-2N/(p+N(p-3))})
double decay_bound(double s, double T, double Theta, double p, int N, double c_tilde);

struct DecayReport {
  double Theta = 0;
  /// max over t of ‖u(t)‖₁/‖u₀‖₁
  double l1_ratio = 0;
  /// max over s > 0 of (A+B)/bound with unit constant
  double c_tilde = 0;
  double s_at_max = 0;
  std::vector<double> s, sum, bound;
};

/// Calibrates c̃ over s-grid points s > 0. VerificationFailure if
/// ‖u(t)‖₁ > ‖u₀‖₁ (1 + 1e-6) at any snapshot.
DecayReport check_decay(const ScalarTrajectory& traj, const TailIntegrals& tails, const std::vector<double>& s_grid, int N);

void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger);
std::string lemma21_report(const Lemma21Report& r);
std::string iteration_report(const IterationReport& r);
std::string decay_report(const DecayReport& r);
std::string calibration_report(const CalibrationReport& r);

} // namespace fsp
