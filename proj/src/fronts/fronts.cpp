#include "fsplab/fronts.hpp"

#include "fsplab/error.hpp"
#include "fsplab/field_io.hpp"
#include "fsplab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace fsp {

namespace {

std::optional<double> front_of(const GridSpec& g, const std::vector<double>& v, double tau, FrontGeometry geometry, Point c) {
  if (!(tau > 0.0)) throw InvalidArgument("support threshold τ must be > 0");
  const int N = g.dim();
  const int last = N - 1;
  auto radius = [&](const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < N; ++a) r2 += (x[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)]) * (x[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)]);
    return std::sqrt(r2);
  };
  std::optional<double> best;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!(v[n] > tau)) continue;
    const Point x = g.point(n);
    const auto ij = g.unflatten(n);
    double pos = geometry == FrontGeometry::halfspace ? x[static_cast<std::size_t>(last)] : radius(x);
    for (int a = 0; a < N; ++a) {
      if (geometry == FrontGeometry::halfspace && a != last) continue;
      for (int off : {-1, 1}) {
        if (geometry == FrontGeometry::halfspace && off < 0) continue;
        const int k = ij[static_cast<std::size_t>(a)] + off;
        if (k < 0 || k >= g.nodes(a)) continue;
        auto q = ij;
        q[static_cast<std::size_t>(a)] = k;
        const std::size_t m = g.index(q[0], q[1]);
        if (v[m] > tau) continue;
        const double w = (v[n] - tau) / (v[n] - v[m]);
        Point xm = g.point(m), xs = x;
        for (int b = 0; b < N; ++b)
          xs[static_cast<std::size_t>(b)] += w * (xm[static_cast<std::size_t>(b)] - x[static_cast<std::size_t>(b)]);
        if (geometry == FrontGeometry::halfspace) {
          pos = std::max(pos, xs[static_cast<std::size_t>(last)]);
        } else if (radius(xm) > radius(x)) {
          pos = std::max(pos, radius(xs));
        }
      }
    }
    if (!best || pos > *best) best = pos;
  }
  return best;
}

std::vector<double> point_values(const VectorField& f, FrontGeometry geometry) {
  std::vector<double> v(f.size(), 0.0);
  for (std::size_t n = 0; n < f.size(); ++n)
    for (int k = 0; k < f.components(); ++k) {
      const double x = f.component(k)[n];
      v[n] = geometry == FrontGeometry::halfspace ? std::max(v[n], std::abs(x)) : v[n] + x * x;
    }
  if (geometry == FrontGeometry::radial)
    for (double& x : v) x = std::sqrt(x);
  return v;
}

template <class Traj, class Front>
SupportTrace trace_impl(const Traj& traj, double tau, Front&& front) {
  if (traj.empty()) throw InvalidArgument("cannot trace an empty trajectory");
  if (!(tau > 0.0)) throw InvalidArgument("support threshold τ must be > 0");
  std::vector<std::optional<double>> fronts(traj.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(traj.size()); ++k)
    fronts[static_cast<std::size_t>(k)] = front(traj[static_cast<std::size_t>(k)].field);
  SupportTrace out;
  out.tau = tau;
  for (std::size_t k = 0; k < traj.size(); ++k) out.push(traj[k].t, fronts[k]);
  return out;
}

void check_range(bool ok, const char* flag, double p, int N) {
  if (!ok) {
    std::ostringstream msg;
    msg << flag << " is false for p = " << p << ", N = " << N;
    throw InvalidArgument(msg.str());
  }
}

} // namespace

std::optional<double> support_front(const ScalarField& f, double tau, FrontGeometry geometry, Point center) {
  std::vector<double> v(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) v[n] = std::abs(f[n]);
  return front_of(f.grid(), v, tau, geometry, center);
}

std::optional<double> support_front(const VectorField& f, double tau, FrontGeometry geometry, Point center) {
  return front_of(f.grid(), point_values(f, geometry), tau, geometry, center);
}

void SupportTrace::push(double time, std::optional<double> value) {
  if (!t.empty() && !(time > t.back())) throw InvalidArgument("trace times must be strictly increasing");
  t.push_back(time);
  front.push_back(value);
}

SupportTrace trace_support(const ScalarTrajectory& traj, double tau, FrontGeometry geometry, Point center) {
  return trace_impl(traj, tau, [&](const ScalarField& f) { return support_front(f, tau, geometry, center); });
}

SupportTrace trace_support(const VectorTrajectory& traj, double tau, FrontGeometry geometry, Point center) {
  return trace_impl(traj, tau, [&](const VectorField& f) { return support_front(f, tau, geometry, center); });
}

double thm1_small_exponent(double p, int N) { return 2.0 / (2 * p + N * (p - 2)); }
double thm1_large_exponent(double p, int N) { return (2 * p + N * (p - 3)) / (2 * p + N * (p - 2)); }
double thm2_small_exponent(double p, int N) { return 1.0 / (p + N * (p - 2)); }
double thm2_large_exponent(double p, int N) { return (p + N * (p - 3)) / (p + N * (p - 2)); }

double gamma_thm1(double p, int N, double t, double c1) {
  check_range(ModelParams{p, 1.0, N}.thm1_applicable(), "thm1_applicable", p, N);
  if (!(t > 0.0)) throw InvalidArgument("Γ needs t > 0");
  if (!(c1 > 0.0)) throw InvalidArgument("Γ needs c1 > 0");
  return c1 * std::max(std::pow(t, thm1_small_exponent(p, N)), std::pow(t, thm1_large_exponent(p, N)));
}

double gamma_thm2(double p, int N, double t, double c2) {
  check_range(ModelParams{p, 1.0, N}.thm2_applicable(), "thm2_applicable", p, N);
  if (!(t > 0.0)) throw InvalidArgument("Γ needs t > 0");
  if (!(c2 > 0.0)) throw InvalidArgument("Γ needs c2 > 0");
  return c2 * std::max(std::pow(t, thm2_small_exponent(p, N)), std::pow(t, thm2_large_exponent(p, N)));
}

std::string to_string(GammaKind kind) { return kind == GammaKind::thm1 ? "thm1" : "thm2"; }

double gamma(GammaKind kind, double p, int N, double t, double c) {
  return kind == GammaKind::thm1 ? gamma_thm1(p, N, t, c) : gamma_thm2(p, N, t, c);
}

ExponentFit fit_exponent(const SupportTrace& trace, const FitWindow& window) {
  if (!(window.drop_fraction >= 0.0 && window.drop_fraction < 0.5)) throw InvalidArgument("drop_fraction must lie in [0, 0.5)");
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double t = trace.t[k];
    if (!trace.front[k] || !(*trace.front[k] > 0.0) || !(t > 0.0)) continue;
    if (window.t_min && t < *window.t_min) continue;
    if (window.t_max && t > *window.t_max) continue;
    keep.push_back(k);
  }
  const std::size_t drop = static_cast<std::size_t>(std::floor(window.drop_fraction * static_cast<double>(keep.size())));
  if (keep.size() < 2 * drop + 8) {
    std::ostringstream msg;
    msg << "fit_exponent needs at least 8 samples with fronts in the window, found "
        << (keep.size() > 2 * drop ? keep.size() - 2 * drop : 0);
    throw InvalidArgument(msg.str());
  }
  std::vector<double> X, Y;
  for (std::size_t i = drop; i + drop < keep.size(); ++i) {
    X.push_back(std::log(trace.t[keep[i]]));
    Y.push_back(std::log(*trace.front[keep[i]]));
  }
  const double n = static_cast<double>(X.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit window spans a single time");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double r = Y[i] - (fit.intercept + fit.slope * X[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.t_a = trace.t[keep[drop]];
  fit.t_b = trace.t[keep[keep.size() - 1 - drop]];
  fit.samples = X.size();
  return fit;
}

EnvelopeReport check_envelope(const SupportTrace& trace, GammaKind kind, double p, int N, double t_ref, double tol) {
  if (!(t_ref > 0.0)) throw InvalidArgument("t_ref must be > 0");
  if (!(tol >= 0.0)) throw InvalidArgument("envelope tolerance must be >= 0");
  std::optional<std::size_t> ref;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (!trace.front[k]) continue;
    if (!ref || std::abs(trace.t[k] - t_ref) < std::abs(trace.t[*ref] - t_ref)) ref = k;
  }
  if (!ref || std::abs(trace.t[*ref] - t_ref) > 0.05 * t_ref)
    throw InvalidArgument("trace has no front sample near t_ref");
  EnvelopeReport r;
  r.kind = kind;
  r.tol = tol;
  r.t_ref = trace.t[*ref];
  r.front_ref = *trace.front[*ref];
  if (!(r.front_ref > 0.0)) throw InvalidArgument("front at t_ref must be positive to calibrate c");
  r.c = r.front_ref / gamma(kind, p, N, r.t_ref, 1.0);
  for (std::size_t k = *ref; k < trace.size(); ++k) {
    if (!trace.front[k]) continue;
    const double G = gamma(kind, p, N, trace.t[k], r.c);
    const double f = *trace.front[k];
    ++r.checked;
    r.max_ratio = std::max(r.max_ratio, f / G);
    if (f > G * (1.0 + tol)) r.violations.push_back({trace.t[k], f, G});
  }
  return r;
}

void write_trace_csv(std::ostream& out, const SupportTrace& trace) {
  out << "t,front\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << format_double(trace.t[k]) << ',';
    if (trace.front[k]) out << format_double(*trace.front[k]);
    out << '\n';
  }
}

SupportTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,front", 0) != 0) throw InvalidArgument("trace CSV must start with a t,front header");
  SupportTrace trace;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("trace CSV row " + std::to_string(row) + " has no comma");
    try {
      const double t = std::stod(line.substr(0, comma));
      const std::string rest = line.substr(comma + 1);
      trace.push(t, rest.empty() ? std::nullopt : std::optional<double>(std::stod(rest)));
    } catch (const std::logic_error&) {
      throw InvalidArgument("trace CSV row " + std::to_string(row) + " is not numeric");
    }
  }
  return trace;
}

std::string fit_report(const ExponentFit& fit) {
  std::ostringstream s;
  s << "slope=" << format_double(fit.slope) << '\n'
    << "intercept=" << format_double(fit.intercept) << '\n'
    << "t_a=" << format_double(fit.t_a) << '\n'
    << "t_b=" << format_double(fit.t_b) << '\n'
    << "residual_rms=" << format_double(fit.residual_rms) << '\n'
    << "samples=" << fit.samples << '\n';
  return s.str();
}

std::string envelope_report(const EnvelopeReport& r) {
  std::ostringstream s;
  s << "gamma=" << to_string(r.kind) << '\n'
    << "c=" << format_double(r.c) << '\n'
    << "t_ref=" << format_double(r.t_ref) << '\n'
    << "front_ref=" << format_double(r.front_ref) << '\n'
    << "tol=" << format_double(r.tol) << '\n'
    << "checked=" << r.checked << '\n'
    << "max_ratio=" << format_double(r.max_ratio) << '\n'
    << "violations=" << r.violations.size() << '\n';
  return s.str();
}

} // namespace fsp
