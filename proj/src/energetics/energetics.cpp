#include "fsplab/energetics.hpp"

#include "fsplab/error.hpp"
#include "fsplab/field_io.hpp"
#include "fsplab/lemmas.hpp"
#include "fsplab/ops.hpp"
#include "fsplab/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace fsp {

TheoryExponents TheoryExponents::make(double p, int N) {
  if (N < 1 || N > 2) throw InvalidArgument("dimension must be 1 or 2");
  if (!(p >= 2.0)) throw InvalidArgument("exponents need p >= 2");
  TheoryExponents e;
  e.p = p;
  e.N = N;
  const double D = 2 * p + N * (p - 2);
  e.alpha1 = 2 * p / D;
  e.beta1 = p * (p - 2) / D;
  e.alpha2 = (2 * p + N * (p - 3)) / D;
  e.beta2 = p / D;
  e.beta = (1 + e.beta1) * (1 + e.beta2);
  e.theta1 = N * (p - 1) / (p + N * (p - 1));
  e.theta2 = 2 * N * p / (3 * (p + N * (p - 1)));
  return e;
}

double TheoryExponents::F(double T) const {
  if (!(T > 0.0)) throw InvalidArgument("F(T) needs T > 0");
  return std::max(std::pow(T, alpha1 * (1 + beta2)), std::pow(T, alpha2 * (1 + beta1)));
}

namespace {

template <class Traj>
void check_window(const Traj& traj, double T) {
  if (traj.size() < 2) throw InvalidArgument("tail integrals need at least two snapshots");
  if (!(T > traj.front().t)) throw InvalidArgument("T must exceed the first snapshot time");
  if (T > traj.back().t * (1.0 + 1e-12)) throw InvalidArgument("T lies beyond the end of the trajectory");
}

} // namespace

TailIntegrals::TailIntegrals(const ScalarTrajectory& traj, double p, double T, double floor)
    : grid_(traj.empty() ? GridSpec() : traj.front().field.grid()), p_(p), T_(T) {
  check_window(traj, T);
  if (!(p >= 2.0)) throw InvalidArgument("tail integrals need p >= 2");
  std::vector<double> d[kinds];
  for (auto& x : d) x.resize(grid_.node_count());
  for (const auto& snap : traj) {
    const ScalarField& u = snap.field;
    const VectorField g = gradient(u);
    for (std::size_t n = 0; n < u.size(); ++n) {
      const double a = std::abs(u[n]);
      if (!(a > floor)) {
        for (auto& x : d) x[n] = 0.0;
        continue;
      }
      double g2 = 0.0;
      for (int k = 0; k < g.components(); ++k) g2 += g.component(k)[n] * g.component(k)[n];
      d[kp][n] = std::pow(a, p);
      d[k3][n] = a * a * a;
      d[k2][n] = a * a;
      d[kg][n] = std::pow(g2, 0.5 * p);
    }
    add_snapshot(snap.t, d);
    if (times_.back() >= T) break;
  }
  integrate();
}

TailIntegrals::TailIntegrals(const VectorTrajectory& traj, double p, double T, double floor, GradientNorm norm)
    : grid_(traj.empty() ? GridSpec() : traj.front().field.grid()), p_(p), T_(T) {
  check_window(traj, T);
  if (!(p >= 2.0)) throw InvalidArgument("tail integrals need p >= 2");
  std::vector<double> d[kinds];
  for (auto& x : d) x.resize(grid_.node_count());
  for (const auto& snap : traj) {
    const VectorField& u = snap.field;
    std::vector<double> g2(u.size(), 0.0);
    if (norm == GradientNorm::full) {
      const auto G = velocity_gradient(u);
      for (const auto& row : G)
        for (const auto& col : row)
          for (std::size_t n = 0; n < u.size(); ++n) g2[n] += col[n] * col[n];
    } else {
      const ScalarField f = deformation_tensor(u).frobenius();
      for (std::size_t n = 0; n < u.size(); ++n) g2[n] = f[n] * f[n];
    }
    const ScalarField mag = u.magnitude();
    for (std::size_t n = 0; n < u.size(); ++n) {
      const double a = mag[n];
      if (!(a > floor)) {
        for (auto& x : d) x[n] = 0.0;
        continue;
      }
      d[kp][n] = std::pow(a, p);
      d[k3][n] = a * a * a;
      d[k2][n] = a * a;
      d[kg][n] = std::pow(g2[n], 0.5 * p);
    }
    add_snapshot(snap.t, d);
    if (times_.back() >= T) break;
  }
  integrate();
}

void TailIntegrals::add_snapshot(double t, const std::vector<double>* density) {
  std::vector<double> prof[kinds];
  for (int k = 0; k < kinds; ++k) prof[k] = layer_profile(grid_, density[k]);
  if (t > T_ && !times_.empty()) {
    // interpolate the last segment to end at T
    const double w = (T_ - times_.back()) / (t - times_.back());
    for (int k = 0; k < kinds; ++k) {
      const auto& prev = profiles_[k].back();
      for (std::size_t j = 0; j < prof[k].size(); ++j) prof[k][j] = (1.0 - w) * prev[j] + w * prof[k][j];
    }
    t = T_;
  }
  times_.push_back(t);
  for (int k = 0; k < kinds; ++k) profiles_[k].push_back(std::move(prof[k]));
}

void TailIntegrals::integrate() {
  // trapezoid weights applied layer by layer: restrict_profile is linear
  const std::size_t m = times_.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) {
    w[i - 1] += 0.5 * (times_[i] - times_[i - 1]);
    w[i] += 0.5 * (times_[i] - times_[i - 1]);
  }
  std::vector<double> terms(m);
  for (int k = 0; k < kinds; ++k) {
    const std::size_t layers = profiles_[k].front().size();
    integrated_[k].assign(layers, 0.0);
    for (std::size_t j = 0; j < layers; ++j) {
      for (std::size_t i = 0; i < m; ++i) terms[i] = w[i] * profiles_[k][i][j];
      integrated_[k][j] = pairwise_sum(terms);
    }
  }
}

double TailIntegrals::time_integral(int kind, double s) const { return restrict_profile(grid_, integrated_[kind], s); }

double TailIntegrals::A(double s) const { return time_integral(kp, s); }
double TailIntegrals::B(double s) const { return time_integral(k3, s); }
double TailIntegrals::L2(double s) const { return time_integral(k2, s); }
double TailIntegrals::grad_p(double s) const { return time_integral(kg, s); }

double TailIntegrals::sup_L2(double s) const {
  double best = 0.0;
  for (const auto& prof : profiles_[k2]) best = std::max(best, restrict_profile(grid_, prof, s));
  return best;
}

double energy_A(const ScalarTrajectory& traj, double s, double T, double p, double floor) {
  return TailIntegrals(traj, p, T, floor).A(s);
}

double energy_B(const ScalarTrajectory& traj, double s, double T, double p, double floor) {
  return TailIntegrals(traj, p, T, floor).B(s);
}

EnergyLedger build_ledger(const TailIntegrals& tails, const std::vector<double>& s_grid, const TheoryExponents& e,
                          const LedgerOptions& options) {
  if (std::abs(e.p - tails.p()) > 1e-15) throw InvalidArgument("ledger exponents and trajectory use different p");
  if (e.N != tails.grid().dim()) throw InvalidArgument("ledger exponents and trajectory use different N");
  if (!(options.j_constant > 0.0)) throw InvalidArgument("J constant must be > 0");
  for (std::size_t i = 1; i < s_grid.size(); ++i)
    if (!(s_grid[i] > s_grid[i - 1])) throw InvalidArgument("s-grid must be strictly increasing");
  EnergyLedger L;
  L.T = tails.T();
  L.exponents = e;
  L.F = e.F(tails.T());
  L.j_constant = options.j_constant;
  L.s = s_grid;
  const std::size_t n = s_grid.size();
  L.A.resize(n);
  L.B.resize(n);
  L.C.resize(n);
  L.J.resize(n);
  if (options.with_L) L.L.resize(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double s = s_grid[i];
    L.A[i] = tails.A(s);
    L.B[i] = tails.B(s);
    L.C[i] = std::pow(L.A[i], 1 + e.beta2) + std::pow(L.B[i], 1 + e.beta1);
    const double k = options.j_constant * L.F;
    const double d1 = std::pow(k * std::pow(L.C[i], e.beta1), 1.0 / (e.p * e.beta));
    const double d2 = std::pow(k * std::pow(L.C[i], e.beta2), 1.0 / e.beta);
    L.J[i] = L.C[i] > 0.0 ? std::max(d1, d2) : 0.0;
    if (options.with_L) L.L[i] = tails.sup_L2(s) + tails.L2(s) / tails.T() + options.mu1 * tails.grad_p(s);
  }
  return L;
}

namespace {

double c_of(const TailIntegrals& tails, const TheoryExponents& e, double s) {
  return std::pow(tails.A(s), 1 + e.beta2) + std::pow(tails.B(s), 1 + e.beta1);
}

} // namespace

CalibrationReport calibrate_c_tilde(const TailIntegrals& tails, const TheoryExponents& e,
                                    const std::vector<double>& s_grid, const std::vector<double>& deltas) {
  for (double d : deltas)
    if (!(d > 0.0)) throw InvalidArgument("calibration δ values must be > 0");
  const double F = e.F(tails.T());
  CalibrationReport r;
  for (double s : s_grid) {
    const double c = c_of(tails, e, s);
    if (!(c > 0.0)) continue;
    for (double d : deltas) {
      const double rhs = F * (std::pow(d, -e.p * e.beta) * std::pow(c, 1 + e.beta1) + std::pow(d, -e.beta) * std::pow(c, 1 + e.beta2));
      const double ratio = c_of(tails, e, s + d) / rhs;
      ++r.pairs;
      if (ratio > r.c_tilde) {
        r.c_tilde = ratio;
        r.s = s;
        r.delta = d;
      }
    }
  }
  return r;
}

IterationReport check_iteration(const EnergyLedger& ledger, double eps, std::optional<double> floor) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("ε must lie in (0, 1)");
  if (ledger.J.empty() || ledger.J.size() != ledger.s.size()) throw InvalidArgument("ledger has no J_T column");
  MonotoneSamples J{ledger.s, ledger.J};
  double jmax = 0.0;
  for (double x : ledger.J) jmax = std::max(jmax, x);
  IterationReport r;
  r.eps = eps;
  r.floor = floor ? *floor : 1e-12 * jmax;
  const double slack = 1e-12 * jmax;
  const std::size_t n = ledger.s.size();
  r.holds.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.holds[i] = J(ledger.s[i] + ledger.J[i]) <= eps * ledger.J[i] + slack;
  std::size_t from = n;
  while (from > 0 && r.holds[from - 1]) --from;
  if (from == n) return r;
  r.satisfied = true;
  r.from = from;
  r.s0 = ledger.s[from];
  r.J0 = ledger.J[from];
  r.point = r.s0 + r.J0 / (1.0 - eps);
  for (std::size_t i = 0; i < n; ++i)
    if (ledger.s[i] >= r.point) r.max_beyond = std::max(r.max_beyond, ledger.J[i]);
  if (ledger.s.back() < r.point) r.max_beyond = std::max(r.max_beyond, ledger.J.back());
  r.vanishes = r.max_beyond <= r.floor;
  return r;
}

Lemma21Report check_lemma21(const TailIntegrals& tails, double s, double delta, double mu1) {
  if (!(delta > 0.0)) throw InvalidArgument("δ must be > 0");
  if (!(mu1 > 0.0)) throw InvalidArgument("μ₁ must be > 0");
  Lemma21Report r;
  const double sd = s + delta;
  r.lhs = tails.sup_L2(sd) + tails.L2(sd) / tails.T() + mu1 * tails.grad_p(sd);
  r.rhs = std::pow(delta, -tails.p()) * tails.A(s) + tails.B(s) / delta;
  if (r.rhs > 0.0)
    r.ratio = r.lhs / r.rhs;
  else
    r.ratio = r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return r;
}

Lemma21Report check_lemma21(const ScalarTrajectory& traj, double s, double delta, double T, double mu1, double p, double floor) {
  if (!(delta > 0.0)) throw InvalidArgument("δ must be > 0");
  return check_lemma21(TailIntegrals(traj, p, T, floor), s, delta, mu1);
}

double decay_bound(double s, double T, double Theta, double p, int N, double c_tilde) {
  if (!(p + N * (p - 3) > 0.0)) throw InvalidArgument("decay exponent undefined: p + N(p-3) <= 0");
  if (!ModelParams{p, 1.0, N}.thm2_applicable()) throw InvalidArgument("thm2_applicable is false: decay bound needs p >= (3N+1)/(N+1)");
  if (!(s > 0.0) || !(T > 0.0) || !(Theta > 0.0)) throw InvalidArgument("decay bound needs s, T, Θ > 0");
  return c_tilde * T * (std::pow(s, -N * (p - 1)) + std::pow(s, -2.0 * N / (p + N * (p - 3))));
}

DecayReport check_decay(const ScalarTrajectory& traj, const TailIntegrals& tails, const std::vector<double>& s_grid, int N) {
  if (traj.empty()) throw InvalidArgument("empty trajectory");
  DecayReport r;
  const double m0 = lp_norm(traj.front().field, 1.0);
  r.Theta = m0;
  for (const auto& snap : traj) {
    const double m = lp_norm(snap.field, 1.0);
    r.l1_ratio = std::max(r.l1_ratio, m0 > 0.0 ? m / m0 : (m > 0.0 ? std::numeric_limits<double>::infinity() : 1.0));
  }
  if (r.l1_ratio > 1.0 + 1e-6) {
    std::ostringstream msg;
    msg << "L1 norm grew to " << r.l1_ratio << " times its initial value; the L1 hypothesis of the decay estimate fails";
    throw VerificationFailure(msg.str());
  }
  if (m0 == 0.0) return r;
  for (double s : s_grid) {
    if (!(s > 0.0)) continue;
    const double sum = tails.A(s) + tails.B(s);
    const double bound = decay_bound(s, tails.T(), m0, tails.p(), N, 1.0);
    r.s.push_back(s);
    r.sum.push_back(sum);
    r.bound.push_back(bound);
    if (sum / bound > r.c_tilde) {
      r.c_tilde = sum / bound;
      r.s_at_max = s;
    }
  }
  return r;
}

void write_ledger_csv(std::ostream& out, const EnergyLedger& L) {
  const auto& e = L.exponents;
  out << "# T=" << format_double(L.T) << " p=" << format_double(e.p) << " N=" << e.N << " F=" << format_double(L.F)
      << " j_constant=" << format_double(L.j_constant) << " alpha1=" << format_double(e.alpha1)
      << " beta1=" << format_double(e.beta1) << " alpha2=" << format_double(e.alpha2) << " beta2=" << format_double(e.beta2)
      << " beta=" << format_double(e.beta) << '\n';
  const bool withL = !L.L.empty();
  out << "s,A,B,C,J" << (withL ? ",L" : "") << '\n';
  for (std::size_t i = 0; i < L.s.size(); ++i) {
    out << format_double(L.s[i]) << ',' << format_double(L.A[i]) << ',' << format_double(L.B[i]) << ','
        << format_double(L.C[i]) << ',' << format_double(L.J[i]);
    if (withL) out << ',' << format_double(L.L[i]);
    out << '\n';
  }
}

std::string lemma21_report(const Lemma21Report& r) {
  std::ostringstream s;
  s << "lhs=" << format_double(r.lhs) << "\nrhs=" << format_double(r.rhs) << "\nratio=" << format_double(r.ratio) << '\n';
  return s.str();
}

std::string iteration_report(const IterationReport& r) {
  std::ostringstream s;
  s << "eps=" << format_double(r.eps) << "\nsatisfied=" << (r.satisfied ? "true" : "false") << "\ns0=" << format_double(r.s0)
    << "\nJ0=" << format_double(r.J0) << "\nvanishing_point=" << format_double(r.point)
    << "\nmax_J_beyond=" << format_double(r.max_beyond) << "\nfloor=" << format_double(r.floor)
    << "\nvanishes=" << (r.vanishes ? "true" : "false") << '\n';
  return s.str();
}

std::string decay_report(const DecayReport& r) {
  std::ostringstream s;
  s << "theta_l1=" << format_double(r.Theta) << "\nl1_ratio=" << format_double(r.l1_ratio)
    << "\nc_tilde=" << format_double(r.c_tilde) << "\ns_at_max=" << format_double(r.s_at_max) << '\n';
  return s.str();
}

std::string calibration_report(const CalibrationReport& r) {
  std::ostringstream s;
  s << "c_tilde=" << format_double(r.c_tilde) << "\ns_at_max=" << format_double(r.s) << "\ndelta_at_max=" << format_double(r.delta)
    << "\npairs=" << r.pairs << '\n';
  return s.str();
}

} // namespace fsp
