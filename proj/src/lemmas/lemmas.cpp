#include "fsplab/lemmas.hpp"

#include "fsplab/error.hpp"
#include "fsplab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace fsp {

void MonotoneSamples::validate() const {
  if (s.empty() || s.size() != f.size()) throw InvalidArgument("monotone samples need matching nonempty s and f");
  double fmax = 0.0;
  for (double x : f) fmax = std::max(fmax, std::abs(x));
  const double slack = 1e-12 * std::max(fmax, 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || !std::isfinite(f[i])) throw InvalidArgument("monotone samples must be finite");
    if (f[i] < -slack) throw InvalidArgument("monotone samples must be nonnegative");
    if (i > 0 && !(s[i] > s[i - 1])) throw InvalidArgument("sample grid must be strictly increasing");
    if (i > 0 && f[i] > f[i - 1] + slack) throw InvalidArgument("samples must be nonincreasing");
  }
}

double MonotoneSamples::operator()(double x) const {
  if (x <= s.front()) return f.front();
  if (x >= s.back()) return f.back();
  const auto it = std::upper_bound(s.begin(), s.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - s.begin());
  const double w = (x - s[i - 1]) / (s[i] - s[i - 1]);
  return (1.0 - w) * f[i - 1] + w * f[i];
}

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("ε must lie in (0, 1)");
}

} // namespace

RelationReport check_stampacchia_relation(const MonotoneSamples& f, double s0, double eps) {
  f.validate();
  check_eps(eps);
  if (s0 < f.s.front() || s0 > f.s.back()) throw InvalidArgument("s0 must lie within the sample grid");
  double fmax = 0.0;
  for (double x : f.f) fmax = std::max(fmax, x);
  const double slack = 1e-12 * fmax;
  RelationReport r;
  for (std::size_t i = 0; i < f.s.size(); ++i) {
    if (f.s[i] < s0) continue;
    const double fs = f.f[i];
    const bool ok = f(f.s[i] + fs) <= eps * fs + slack;
    r.s.push_back(f.s[i]);
    r.holds.push_back(ok);
    if (!ok) ++r.violations;
  }
  return r;
}

VanishingReport stampacchia_vanishing_point(const MonotoneSamples& f, double s0, double eps, std::optional<double> vanish_tol) {
  const RelationReport rel = check_stampacchia_relation(f, s0, eps);
  if (!rel.all()) {
    std::ostringstream msg;
    msg << "relation f(s+f(s)) <= eps f(s) violated at " << rel.violations << " samples:";
    int listed = 0;
    for (std::size_t i = 0; i < rel.s.size() && listed < 10; ++i)
      if (!rel.holds[i]) {
        msg << ' ' << rel.s[i];
        ++listed;
      }
    throw InvalidArgument(msg.str());
  }
  const double f0 = f(s0);
  const double tol = vanish_tol ? *vanish_tol : 1e-12 * f0;
  VanishingReport r;
  r.point = s0 + f0 / (1.0 - eps);
  for (std::size_t i = 0; i < f.s.size(); ++i)
    if (f.s[i] >= r.point) r.max_beyond = std::max(r.max_beyond, f.f[i]);
  if (f.s.back() < r.point) r.max_beyond = std::max(r.max_beyond, f.f.back());
  r.confirmed = r.max_beyond <= tol;
  return r;
}

StampacchiaCase random_stampacchia_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  StampacchiaCase c;
  c.eps = 0.1 + 0.8 * U(rng);
  c.s0 = -2.0 + 4.0 * U(rng);
  const double f0 = 0.1 + 2.0 * U(rng);
  const int knots = 3 + static_cast<int>(U(rng) * 10);
  // ρ and σ per piece; the last piece drops to zero (ρ = 0, σ = 1)
  std::vector<double> rho(static_cast<std::size_t>(knots)), sigma(static_cast<std::size_t>(knots));
  for (auto& r : rho) r = c.eps * (0.05 + 0.95 * U(rng));
  // keep the pieces resolvable in double precision
  double level = 1.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    level *= rho[i];
    if (level < 1e-6) {
      rho.resize(i + 1);
      sigma.resize(i + 1);
      break;
    }
  }
  rho.back() = 0.0;
  sigma.back() = 1.0;
  for (int k = static_cast<int>(rho.size()) - 2; k >= 0; --k) {
    const std::size_t i = static_cast<std::size_t>(k);
    const double lo = 1.0 - rho[i], hi = 1.0 - rho[i] * sigma[i + 1];
    sigma[i] = lo + (hi - lo) * U(rng);
  }
  std::vector<double> ks{c.s0}, kf{f0};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    ks.push_back(ks.back() + sigma[i] * kf.back());
    kf.push_back(rho[i] * kf.back());
  }
  // knots plus a few interior points per piece, then a zero tail
  const double end = ks.back();
  const double span = end - c.s0;
  c.f.s.push_back(c.s0 - 0.1 * span);
  c.f.f.push_back(f0);
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    const int fill = 1 + static_cast<int>(U(rng) * 6);
    for (int m = 0; m < fill; ++m) {
      const double w = static_cast<double>(m) / fill;
      c.f.s.push_back(ks[i] + w * (ks[i + 1] - ks[i]));
      c.f.f.push_back(kf[i] + w * (kf[i + 1] - kf[i]));
    }
  }
  c.f.s.push_back(end);
  c.f.f.push_back(0.0);
  const double tail = c.s0 + f0 / (1.0 - c.eps) + 0.5 * span + 1.0;
  for (int m = 1; m <= 8; ++m) {
    c.f.s.push_back(end + (tail - end) * m / 8.0);
    c.f.f.push_back(0.0);
  }
  return c;
}

double gn_theta(double a, double b, double d, int N) {
  if (N < 1) throw InvalidArgument("dimension must be >= 1");
  if (!(a > 1.0)) throw InvalidArgument("gn_theta needs a > 1");
  if (!(b > 0.0 && b < a)) throw InvalidArgument("gn_theta needs 0 < b < a");
  if (!(d > 1.0)) throw InvalidArgument("gn_theta needs d > 1");
  const double denom = 1.0 / b + 1.0 / N - 1.0 / d;
  const double theta = (1.0 / b - 1.0 / a) / denom;
  if (!(denom > 0.0) || !(theta >= 0.0 && theta < 1.0))
    throw InvalidArgument("interpolation exponent θ outside [0, 1)");
  return theta;
}

double gn_ratio(const ScalarField& v, double a, double b, double d, std::optional<double> delta_slab) {
  const int N = v.grid().dim();
  const double theta = gn_theta(a, b, d, N);
  if (v.max_abs() == 0.0) throw InvalidArgument("gn_ratio of a zero field");
  if (delta_slab && !(*delta_slab > 0.0)) throw InvalidArgument("slab width must be > 0");
  const double na = lp_norm(v, a), nb = lp_norm(v, b), nd = lp_norm(gradient(v), d);
  double den = std::pow(nd, theta) * std::pow(nb, 1.0 - theta);
  if (delta_slab) den += std::pow(*delta_slab, -N * (a - b) / (a * b)) * nb;
  return na / den;
}

} // namespace fsp
