#include "fsplab/plaplace.hpp"

#include "fsplab/error.hpp"
#include "fsplab/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsp {

void SolverConfig::validate() const {
  params.validate(false);
  if (!(eps_reg >= 0.0) || !std::isfinite(eps_reg)) throw InvalidArgument("eps_reg must be >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidArgument("safety factor must lie in (0, 1]");
  if (!(dt_min > 0.0) || !(dt_max >= dt_min)) throw InvalidArgument("need 0 < dt_min <= dt_max");
  if (dt_policy == DtPolicy::fixed && !(dt > 0.0)) throw InvalidArgument("fixed dt must be > 0");
  if (!(implicit_dt_multiplier > 0.0)) throw InvalidArgument("implicit_dt_multiplier must be > 0");
  if (max_inner < 1) throw InvalidArgument("max_inner must be >= 1");
  if (!(sentinel.margin_fraction >= 0.0 && sentinel.margin_fraction < 0.5))
    throw InvalidArgument("sentinel margin must lie in [0, 0.5)");
}

double flux_diffusivity(double g, const SolverConfig& cfg) {
  const double p = cfg.params.p;
  const double s = g * g + cfg.eps_reg * cfg.eps_reg;
  if (p == 2.0) return cfg.params.mu1;
  return cfg.params.mu1 * std::pow(s, 0.5 * (p - 2.0));
}

namespace {

void check_grid(const GridSpec& grid, const SolverConfig& cfg) {
  if (grid.dim() != cfg.params.dim)
    throw InvalidArgument("field dimension " + std::to_string(grid.dim()) + " differs from model dimension " +
                          std::to_string(cfg.params.dim));
}

template <class ValueAt>
void sentinel_scan(const GridSpec& grid, const SentinelConfig& cfg, ValueAt&& magnitude) {
  if (!cfg.enabled) return;
  const int nx = grid.nodes(0);
  const int ny = grid.dim() == 2 ? grid.nodes(1) : 1;
  for (int a = 0; a < grid.dim(); ++a) {
    if (!(cfg.axis_mask & (1u << a))) continue;
    const Axis& ax = grid.axis(a);
    const double band = cfg.margin_fraction * (ax.upper - ax.lower);
    const int n = ax.nodes();
    // guard-band index ranges [0, lo) and (hi, n)
    int lo = 0;
    while (lo < n && ax.coord(lo) < ax.lower + band) ++lo;
    int hi = n - 1;
    while (hi >= 0 && ax.coord(hi) > ax.upper - band) --hi;
    auto test = [&](int i, int j) {
      const std::size_t k = grid.index(i, j);
      const double v = magnitude(k);
      if (v > cfg.threshold) {
        std::ostringstream os;
        os << "support reached the guard band of axis " << a << " at x=" << grid.point(k)[static_cast<std::size_t>(a)]
           << " (|u|=" << v << ", band " << cfg.margin_fraction << " of the box); enlarge the domain";
        throw BoundarySentinelError(os.str());
      }
    };
    const int other = a == 0 ? ny : nx;
    for (int o = 0; o < other; ++o)
      for (int k = 0; k < n; ++k) {
        if (k == lo) k = std::max(hi + 1, lo);
        if (k >= n) break;
        if (a == 0) test(k, o);
        else test(o, k);
      }
  }
}

} // namespace

void check_sentinel(const ScalarField& u, const SentinelConfig& cfg) {
  sentinel_scan(u.grid(), cfg, [&](std::size_t n) { return std::abs(u[n]); });
}

void check_sentinel(const VectorField& u, const SentinelConfig& cfg) {
  sentinel_scan(u.grid(), cfg, [&](std::size_t n) {
    double m = 0.0;
    for (int k = 0; k < u.components(); ++k) m = std::max(m, std::abs(u.component(k)[n]));
    return m;
  });
}

ScalarField apply_operator(const ScalarField& u, const SolverConfig& cfg) {
  check_grid(u.grid(), cfg);
  FaceEnergy fe(u.grid(), cfg);
  ScalarField out(u.grid());
  fe.apply(u.values(), out.values());
  return out;
}

double dirichlet_energy(const ScalarField& u, const SolverConfig& cfg) {
  check_grid(u.grid(), cfg);
  FaceEnergy fe(u.grid(), cfg);
  return fe.energy(u.values());
}

namespace {

void explicit_update(FaceEnergy& fe, std::span<const double> u, std::span<double> out, double dt) {
  fe.apply(u, out);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
    const std::size_t k = static_cast<std::size_t>(n);
    out[k] = u[k] + dt * out[k];
  }
}

double cfl_from(double dmax, const GridSpec& grid, const SolverConfig& cfg) {
  if (!(dmax > 0.0)) return cfg.dt_max;
  const double h = grid.min_spacing();
  const double p = cfg.params.p;
  const double dt = cfg.safety * h * h / (2.0 * grid.dim() * dmax * std::max(p - 1.0, 1.0));
  return std::clamp(dt, cfg.dt_min, cfg.dt_max);
}

// Proximal solves reuse one FaceEnergy and scratch buffers across steps.
class ProximalSolver {
public:
  ProximalSolver(const GridSpec& grid, const SolverConfig& cfg)
      : cfg_(cfg), fe_(grid, cfg), n_(grid.node_count()), g_(n_), d_(n_), diag_(n_), off_(n_), r_(n_), z_(n_),
        pv_(n_), ap_(n_), trial_(n_), grad_(n_) {}

  FaceEnergy& energy() { return fe_; }

  ProximalResult solve(std::span<const double> u, std::span<double> v, double dt) {
    const double scale = std::max(parallel_max(n_, [&](std::size_t k) { return std::abs(u[k]); }), 1e-300);
    std::copy(u.begin(), u.end(), v.begin());
    ProximalResult res;
    double J = objective(u, v, dt);
    res.objective_start = J;
    double rnorm = optimality(u, v, dt, scale);
    int it = 0;
    while (rnorm > cfg_.tol) {
      if (it >= cfg_.max_inner) {
        std::ostringstream os;
        os << "proximal step did not converge in " << cfg_.max_inner << " iterations (residual " << rnorm << ")";
        throw IterationLimitError(os.str(), rnorm);
      }
      ++it;
      newton_direction(v, dt, rnorm);
      double slope = 0.0;
      for (std::size_t k = 0; k < n_; ++k) slope += g_[k] * d_[k];
      if (!(slope < 0.0)) {
        // Newton system solved too loosely; fall back to steepest descent
        for (std::size_t k = 0; k < n_; ++k) d_[k] = fe_.fixed(k) ? 0.0 : -g_[k] * dt / fe_.weight(k);
        slope = 0.0;
        for (std::size_t k = 0; k < n_; ++k) slope += g_[k] * d_[k];
      }
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t k = 0; k < n_; ++k) trial_[k] = v[k] + alpha * d_[k];
        const double Jt = objective(u, trial_, dt);
        if (Jt <= J + 1e-4 * alpha * slope) {
          accepted = true;
        } else if (Jt <= J + 1e-13 * std::abs(J)) {
          // objective change below roundoff: accept if optimality improves
          const double rt = optimality(u, trial_, dt, scale);
          accepted = rt < rnorm;
        }
        if (accepted) {
          std::copy(trial_.begin(), trial_.end(), v.begin());
          J = Jt;
          break;
        }
        alpha *= 0.5;
      }
      const double rnew = optimality(u, v, dt, scale);
      if (!accepted) {
        std::ostringstream os;
        os << "proximal line search stalled (residual " << rnorm << ")";
        throw IterationLimitError(os.str(), rnorm);
      }
      rnorm = rnew;
    }
    res.iterations = it;
    res.residual = rnorm;
    res.objective_end = J;
    return res;
  }

private:
  double objective(std::span<const double> u, std::span<const double> v, double dt) {
    const double e = fe_.energy(v);
    const double m = deterministic_sum(n_, [&](std::size_t k) {
      const double dv = v[k] - u[k];
      return fe_.weight(k) * dv * dv;
    });
    return e + 0.5 * m / dt;
  }

  // ‖(v - u) - dt A(v)‖_∞ / scale; leaves ∇J in g_
  double optimality(std::span<const double> u, std::span<const double> v, double dt, double scale) {
    fe_.gradient(v, grad_);
    double r = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      if (fe_.fixed(k)) {
        g_[k] = 0.0;
        continue;
      }
      const double w = fe_.weight(k);
      g_[k] = w * (v[k] - u[k]) / dt + grad_[k];
      r = std::max(r, std::abs(g_[k] * dt / w));
    }
    return r / scale;
  }

  void newton_direction(std::span<const double> v, double dt, double rnorm) {
    fe_.hessian_setup(v);
    fe_.hessian_diagonal(diag_);
    for (std::size_t k = 0; k < n_; ++k) diag_[k] += fe_.weight(k) / dt;
    if (fe_.grid().dim() == 1) {
      fe_.hessian_offdiag_1d(off_);
      solve_tridiagonal();
    } else {
      solve_cg(dt, std::clamp(rnorm, 1e-12, 1e-3));
    }
  }

  // H d = -g on the free nodes; fixed nodes keep d = 0.
  void solve_tridiagonal() {
    const Axis& ax = fe_.grid().axis(0);
    const int n = ax.nodes();
    if (ax.bc == Boundary::dirichlet_zero) {
      std::fill(d_.begin(), d_.end(), 0.0);
      if (n <= 2) return;
      const int m = n - 2;
      // unknowns 1..n-2; sub/super diagonal off_[i-1], off_[i]
      std::vector<double>& c = r_;
      std::vector<double>& y = z_;
      for (int i = 0; i < m; ++i) {
        const int k = i + 1;
        const double a = i > 0 ? off_[static_cast<std::size_t>(k - 1)] : 0.0;
        const double b = diag_[static_cast<std::size_t>(k)];
        const double cu = i + 1 < m ? off_[static_cast<std::size_t>(k)] : 0.0;
        const double rhs = -g_[static_cast<std::size_t>(k)];
        const double denom = b - (i > 0 ? a * c[static_cast<std::size_t>(i - 1)] : 0.0);
        c[static_cast<std::size_t>(i)] = cu / denom;
        y[static_cast<std::size_t>(i)] = (rhs - (i > 0 ? a * y[static_cast<std::size_t>(i - 1)] : 0.0)) / denom;
      }
      for (int i = m - 1; i >= 0; --i) {
        double x = y[static_cast<std::size_t>(i)];
        if (i + 1 < m) x -= c[static_cast<std::size_t>(i)] * d_[static_cast<std::size_t>(i + 2)];
        d_[static_cast<std::size_t>(i + 1)] = x;
      }
      return;
    }
    if (n < 3) {
      for (int i = 0; i < n; ++i) d_[static_cast<std::size_t>(i)] = -g_[static_cast<std::size_t>(i)] / diag_[static_cast<std::size_t>(i)];
      return;
    }
    // cyclic: coupling off_[n-1] between node n-1 and node 0, Sherman-Morrison
    const std::size_t N = static_cast<std::size_t>(n);
    const double corner = off_[N - 1];
    const double gamma = -diag_[0];
    std::vector<double> b(diag_.begin(), diag_.begin() + n);
    b[0] -= gamma;
    b[N - 1] -= corner * corner / gamma;
    std::vector<double> rhs(N), uvec(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) rhs[i] = -g_[i];
    uvec[0] = gamma;
    uvec[N - 1] = corner;
    const auto x = thomas(b, rhs);
    const auto q = thomas(b, uvec);
    const double fac = (x[0] + corner * x[N - 1] / gamma) / (1.0 + q[0] + corner * q[N - 1] / gamma);
    for (std::size_t i = 0; i < N; ++i) d_[i] = x[i] - fac * q[i];
  }

  std::vector<double> thomas(const std::vector<double>& b, const std::vector<double>& rhs) const {
    const std::size_t N = b.size();
    std::vector<double> c(N), y(N), x(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double a = i > 0 ? off_[i - 1] : 0.0;
      const double cu = i + 1 < N ? off_[i] : 0.0;
      const double denom = b[i] - (i > 0 ? a * c[i - 1] : 0.0);
      c[i] = cu / denom;
      y[i] = (rhs[i] - (i > 0 ? a * y[i - 1] : 0.0)) / denom;
    }
    for (std::size_t i = N; i-- > 0;) x[i] = y[i] - (i + 1 < N ? c[i] * x[i + 1] : 0.0);
    return x;
  }

  void hmul(std::span<const double> w, std::span<double> out, double dt) {
    fe_.hessian_apply(w, out);
    for (std::size_t k = 0; k < n_; ++k) out[k] = fe_.fixed(k) ? 0.0 : out[k] + fe_.weight(k) * w[k] / dt;
  }

  void solve_cg(double dt, double rtol) {
    std::fill(d_.begin(), d_.end(), 0.0);
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
      return deterministic_sum(n_, [&](std::size_t k) { return a[k] * b[k]; });
    };
    for (std::size_t k = 0; k < n_; ++k) r_[k] = fe_.fixed(k) ? 0.0 : -g_[k];
    const double r0 = std::sqrt(dot(r_, r_));
    if (r0 == 0.0) return;
    for (std::size_t k = 0; k < n_; ++k) z_[k] = r_[k] / diag_[k];
    pv_ = z_;
    double rz = dot(r_, z_);
    for (int it = 0; it < 5000; ++it) {
      hmul(pv_, ap_, dt);
      const double alpha = rz / dot(pv_, ap_);
      for (std::size_t k = 0; k < n_; ++k) {
        d_[k] += alpha * pv_[k];
        r_[k] -= alpha * ap_[k];
      }
      if (std::sqrt(dot(r_, r_)) <= rtol * r0) return;
      for (std::size_t k = 0; k < n_; ++k) z_[k] = r_[k] / diag_[k];
      const double rz_new = dot(r_, z_);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n_; ++k) pv_[k] = z_[k] + beta * pv_[k];
    }
  }

  SolverConfig cfg_;
  FaceEnergy fe_;
  std::size_t n_;
  std::vector<double> g_, d_, diag_, off_, r_, z_, pv_, ap_, trial_, grad_;
};

} // namespace

ScalarField step_explicit(const ScalarField& u, const SolverConfig& cfg, double dt) {
  check_grid(u.grid(), cfg);
  FaceEnergy fe(u.grid(), cfg);
  ScalarField out(u.grid());
  explicit_update(fe, u.values(), out.values(), dt);
  out.require_finite("explicit step");
  return out;
}

ProximalResult step_implicit_proximal(const ScalarField& u, const SolverConfig& cfg, double dt) {
  cfg.validate();
  check_grid(u.grid(), cfg);
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  ProximalSolver solver(u.grid(), cfg);
  ScalarField v(u.grid());
  ProximalResult res = solver.solve(u.values(), v.values(), dt);
  v.require_finite("proximal step");
  res.field = std::move(v);
  return res;
}

double cfl_dt(const ScalarField& u, const SolverConfig& cfg) {
  check_grid(u.grid(), cfg);
  u.require_finite("cfl_dt");
  FaceEnergy fe(u.grid(), cfg);
  return cfl_from(fe.max_diffusivity(u.values()), u.grid(), cfg);
}

ScalarTrajectory simulate(const ScalarField& u0, const SolverConfig& cfg, double T, std::span<const double> schedule,
                          const StepObserver& observer) {
  cfg.validate();
  check_grid(u0.grid(), cfg);
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("final time T must be > 0");
  u0.require_finite("initial data");
  std::vector<double> targets;
  for (double t : schedule) {
    if (!(t > 0.0) || t > T) throw InvalidArgument("schedule times must lie in (0, T]");
    if (!targets.empty() && !(t > targets.back())) throw InvalidArgument("schedule times must be strictly increasing");
    targets.push_back(t);
  }
  if (targets.empty() || targets.back() < T) targets.push_back(T);

  check_sentinel(u0, cfg.sentinel);
  ScalarTrajectory traj;
  traj.push(0.0, u0);

  const GridSpec& grid = u0.grid();
  ProximalSolver solver(grid, cfg);
  FaceEnergy& fe = solver.energy();
  ScalarField cur = u0, next(grid);
  std::vector<double> work(grid.node_count());
  double t = 0.0;
  std::size_t step = 0;
  for (double target : targets) {
    while (t < target) {
      double dt;
      double dmax;
      if (cfg.stepper == Stepper::explicit_euler) {
        // A(u) does not depend on dt, so it also supplies the CFL diffusivity
        fe.apply(cur.values(), work);
        dmax = fe.last_max_diffusivity();
      } else {
        dmax = cfg.dt_policy == DtPolicy::adaptive ? fe.max_diffusivity(cur.values()) : 0.0;
      }
      if (cfg.dt_policy == DtPolicy::fixed) {
        dt = cfg.dt;
      } else {
        dt = cfl_from(dmax, grid, cfg);
        if (cfg.stepper == Stepper::implicit_proximal)
          dt = std::min(cfg.dt_max, dt * cfg.implicit_dt_multiplier);
      }
      const double rem = target - t;
      bool land = false;
      if (dt >= rem * (1.0 - 1e-12)) {
        dt = rem;
        land = true;
      }
      StepInfo info;
      if (cfg.stepper == Stepper::explicit_euler) {
        bool finite = true;
        const auto u = cur.values();
        auto out = next.values();
#pragma omp parallel for schedule(static) reduction(&& : finite)
        for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
          const std::size_t k = static_cast<std::size_t>(n);
          out[k] = u[k] + dt * work[k];
          finite = finite && std::isfinite(out[k]);
        }
        if (!finite) next.require_finite("explicit step");
      } else {
        const ProximalResult r = solver.solve(cur.values(), next.values(), dt);
        next.require_finite("proximal step");
        info.inner_iterations = r.iterations;
        info.inner_residual = r.residual;
      }
      t = land ? target : t + dt;
      ++step;
      check_sentinel(next, cfg.sentinel);
      if (observer) {
        info.step = step;
        info.t = t;
        info.dt = dt;
        info.before = &cur;
        info.after = &next;
        observer(info);
      }
      std::swap(cur, next);
    }
    traj.push(target, cur);
  }
  return traj;
}

} // namespace fsp
