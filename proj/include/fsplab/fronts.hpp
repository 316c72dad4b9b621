#pragma once

#include "fsplab/field.hpp"
#include "fsplab/trajectory.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fsp {

enum class FrontGeometry {
  /// sup{x_N : max_k |u_k| > τ}
  halfspace,
  /// sup{|x - center| : |u| > τ}
  radial
};

/// Front position with linear interpolation of |u| - τ between each
/// super-threshold node and a sub-threshold neighbor further out. nullopt
/// when no node exceeds τ. InvalidArgument unless τ > 0.
std::optional<double> support_front(const ScalarField& f, double tau, FrontGeometry geometry = FrontGeometry::halfspace,
                                    Point center = {0.0, 0.0});
std::optional<double> support_front(const VectorField& f, double tau, FrontGeometry geometry = FrontGeometry::halfspace,
                                    Point center = {0.0, 0.0});

struct SupportTrace {
  double tau = 0;
  std::vector<double> t;
  std::vector<std::optional<double>> front;

  std::size_t size() const { return t.size(); }
  void push(double time, std::optional<double> value);
};

SupportTrace trace_support(const ScalarTrajectory& traj, double tau, FrontGeometry geometry = FrontGeometry::halfspace,
                           Point center = {0.0, 0.0});
SupportTrace trace_support(const VectorTrajectory& traj, double tau, FrontGeometry geometry = FrontGeometry::halfspace,
                           Point center = {0.0, 0.0});

/// Exponents of the two envelope formulas: small-time and large-time branch.
double thm1_small_exponent(double p, int N);
double thm1_large_exponent(double p, int N);
double thm2_small_exponent(double p, int N);
double thm2_large_exponent(double p, int N);

/// c1 max{t^{2/(2p+N(p-2))}, t^{(2p+N(p-3))/(2p+N(p-2))}}; needs p >= (3N+2)/(N+2).
double gamma_thm1(double p, int N, double t, double c1);
/// c2 max{t^{1/(p+N(p-2))}, t^{(p+N(p-3))/(p+N(p-2))}}; needs p >= (3N+1)/(N+1).
double gamma_thm2(double p, int N, double t, double c2);

enum class GammaKind { thm1, thm2 };
std::string to_string(GammaKind kind);
double gamma(GammaKind kind, double p, int N, double t, double c);

struct FitWindow {
  /// fraction of the present samples dropped at each end
  double drop_fraction = 0.1;
  std::optional<double> t_min;
  std::optional<double> t_max;
};

struct ExponentFit {
  double slope = 0;
  double intercept = 0;
  double t_a = 0;
  double t_b = 0;
  double residual_rms = 0;
  std::size_t samples = 0;
};

/// Least squares of log front against log t over the window. InvalidArgument
/// with fewer than 8 positive fronts in the window.
ExponentFit fit_exponent(const SupportTrace& trace, const FitWindow& window = {});

struct EnvelopeViolation {
  double t;
  double front;
  double gamma;
};

struct EnvelopeReport {
  GammaKind kind = GammaKind::thm1;
  double c = 0;
  double t_ref = 0;
  double front_ref = 0;
  double tol = 0;
  /// max over checked samples of front / Γ
  double max_ratio = 0;
  std::size_t checked = 0;
  std::vector<EnvelopeViolation> violations;
};

/// Calibrates c so Γ(t_ref) equals the front at the sample nearest t_ref
/// (within 5% of t_ref), then flags every t >= t_ref with front > Γ (1 + tol).
EnvelopeReport check_envelope(const SupportTrace& trace, GammaKind kind, double p, int N, double t_ref, double tol = 0.02);

/// `t,front` with an empty front column when no support is present.
void write_trace_csv(std::ostream& out, const SupportTrace& trace);
SupportTrace read_trace_csv(std::istream& in);
/// key=value lines
std::string fit_report(const ExponentFit& fit);
std::string envelope_report(const EnvelopeReport& report);

} // namespace fsp
