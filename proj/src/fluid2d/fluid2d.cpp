#include "fsplab/fluid2d.hpp"

#include "fsplab/error.hpp"
#include "fsplab/reduce.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

namespace fsp {

namespace {

void require_periodic_2d(const GridSpec& g, const char* what) {
  if (g.dim() != 2 || g.axis(0).bc != Boundary::periodic || g.axis(1).bc != Boundary::periodic)
    throw InvalidArgument(std::string(what) + " needs a periodic 2D grid");
}

// the FFTW planner is not thread-safe
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

VectorField advection_term(const VectorField& v, Advection scheme) {
  const GridSpec& g = v.grid();
  require_periodic_2d(g, "advection");
  const int nx = g.nodes(0), ny = g.nodes(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const auto ux = v.component(0), uy = v.component(1);
  VectorField out(g);
  auto ox = out.component(0), oy = out.component(1);
  const bool up = scheme == Advection::upwind;
  // flux through the face between n0 and n1 carried by face velocity a
  auto flux = [up](double a, double q0, double q1) { return a * (up ? (a >= 0.0 ? q0 : q1) : 0.5 * (q0 + q1)); };
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const int jn = (j + 1) % ny, js = (j + ny - 1) % ny;
    for (int i = 0; i < nx; ++i) {
      const int ie = (i + 1) % nx, iw = (i + nx - 1) % nx;
      const std::size_t c = g.index(i, j), e = g.index(ie, j), w = g.index(iw, j), n = g.index(i, jn), s = g.index(i, js);
      const double ae = 0.5 * (ux[c] + ux[e]), aw = 0.5 * (ux[w] + ux[c]);
      const double an = 0.5 * (uy[c] + uy[n]), as = 0.5 * (uy[s] + uy[c]);
      ox[c] = -(flux(ae, ux[c], ux[e]) - flux(aw, ux[w], ux[c])) / hx - (flux(an, ux[c], ux[n]) - flux(as, ux[s], ux[c])) / hy;
      oy[c] = -(flux(ae, uy[c], uy[e]) - flux(aw, uy[w], uy[c])) / hx - (flux(an, uy[c], uy[n]) - flux(as, uy[s], uy[c])) / hy;
    }
  }
  return out;
}

VectorField advect(const VectorField& v, double dt, const FluidConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  const double umax = v.max_abs();
  if (umax * dt > cfg.safety * v.grid().min_spacing() * (1.0 + 1e-12))
    throw InvalidArgument("advective CFL violated: max|u| dt > safety h");
  VectorField out = advection_term(v, cfg.advection);
  for (int k = 0; k < 2; ++k) {
    const auto u = v.component(k);
    auto o = out.component(k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(o.size()); ++n)
      o[static_cast<std::size_t>(n)] = u[static_cast<std::size_t>(n)] + dt * o[static_cast<std::size_t>(n)];
  }
  return out;
}

struct Projector::Impl {
  GridSpec grid;
  int nx, ny, nxc;
  double* real = nullptr;
  fftw_complex* spec[3] = {nullptr, nullptr, nullptr};
  fftw_plan forward = nullptr, backward = nullptr;
  std::vector<double> kx, ky;

  explicit Impl(const GridSpec& g) : grid(g), nx(g.nodes(0)), ny(g.nodes(1)), nxc(g.nodes(0) / 2 + 1) {
    const std::size_t nr = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    const std::size_t nc = static_cast<std::size_t>(nxc) * static_cast<std::size_t>(ny);
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(nr);
    for (auto*& s : spec) s = fftw_alloc_complex(nc);
    forward = fftw_plan_dft_r2c_2d(ny, nx, real, spec[0], FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_2d(ny, nx, spec[0], real, FFTW_ESTIMATE);
    if (!real || !forward || !backward) throw NumericalFailure("FFTW plan creation failed");
    // symbol of the centered difference; the Nyquist mode is exactly zero
    auto symbol = [](int m, int n, double h, double len) {
      if (2 * m == n) return 0.0;
      const int s = m <= n / 2 ? m : m - n;
      return std::sin(2.0 * std::numbers::pi * s / len * h) / h;
    };
    for (int i = 0; i < nxc; ++i) kx.push_back(symbol(i, nx, g.spacing(0), g.axis(0).upper - g.axis(0).lower));
    for (int j = 0; j < ny; ++j) ky.push_back(symbol(j, ny, g.spacing(1), g.axis(1).upper - g.axis(1).lower));
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    for (auto* s : spec) fftw_free(s);
  }

  void to_spectrum(std::span<const double> in, fftw_complex* out) {
    std::copy(in.begin(), in.end(), real);
    fftw_execute_dft_r2c(forward, real, out);
  }
  void from_spectrum(fftw_complex* in, std::span<double> out) {
    fftw_execute_dft_c2r(backward, in, real);
    const double scale = 1.0 / (static_cast<double>(nx) * static_cast<double>(ny));
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = real[n] * scale;
  }
};

Projector::Projector(const GridSpec& grid) {
  require_periodic_2d(grid, "projection");
  impl_ = std::make_unique<Impl>(grid);
}

Projector::~Projector() = default;

std::pair<VectorField, ScalarField> Projector::project(const VectorField& v) {
  Impl& m = *impl_;
  if (!(v.grid() == m.grid)) throw InvalidArgument("projector grid mismatch");
  v.require_finite("projection input");
  using cd = std::complex<double>;
  m.to_spectrum(v.component(0), m.spec[0]);
  m.to_spectrum(v.component(1), m.spec[1]);
  auto* X = reinterpret_cast<cd*>(m.spec[0]);
  auto* Y = reinterpret_cast<cd*>(m.spec[1]);
  auto* P = reinterpret_cast<cd*>(m.spec[2]);
  const cd I(0.0, 1.0);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nxc; ++i) {
      const std::size_t n = static_cast<std::size_t>(i) + static_cast<std::size_t>(m.nxc) * static_cast<std::size_t>(j);
      const double ax = m.kx[static_cast<std::size_t>(i)], ay = m.ky[static_cast<std::size_t>(j)];
      const double k2 = ax * ax + ay * ay;
      if (k2 == 0.0) {
        P[n] = 0.0;
        continue;
      }
      const cd div = I * ax * X[n] + I * ay * Y[n];
      P[n] = -div / k2;
      X[n] -= I * ax * P[n];
      Y[n] -= I * ay * P[n];
    }
  VectorField w(m.grid);
  ScalarField phi(m.grid);
  m.from_spectrum(m.spec[0], w.component(0));
  m.from_spectrum(m.spec[1], w.component(1));
  m.from_spectrum(m.spec[2], phi.values());
  const double scale = std::max(v.max_abs(), 1.0) / m.grid.min_spacing();
  const double residual = divergence(w).max_abs();
  if (residual > 1e-10 * scale)
    throw NumericalFailure("projection left a divergence residual of " + std::to_string(residual));
  return {std::move(w), std::move(phi)};
}

std::pair<VectorField, ScalarField> project(const VectorField& v) {
  Projector p(v.grid());
  return p.project(v);
}

double fluid_dt(const VectorField& v, const FluidConfig& cfg) {
  const double h = v.grid().min_spacing();
  double dt = cfg.dt_max;
  const double umax = v.max_abs();
  if (umax > 0.0) dt = std::min(dt, cfg.safety * h / umax);
  const double dmax = fluid_max_diffusivity(v, cfg);
  if (dmax > 0.0) dt = std::min(dt, cfg.safety * h * h / (4.0 * dmax * std::max(cfg.params.p - 1.0, 1.0)));
  return dt;
}

namespace {

FluidState step_with(Projector& proj, const FluidState& s, const FluidConfig& cfg, double dt) {
  VectorField u1 = advect(s.velocity, dt, cfg);
  const VectorField visc = viscous_term(u1, cfg);
  for (int k = 0; k < 2; ++k) {
    auto o = u1.component(k);
    const auto d = visc.component(k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(o.size()); ++n)
      o[static_cast<std::size_t>(n)] += dt * d[static_cast<std::size_t>(n)];
  }
  u1.require_finite("fluid step");
  auto [w, phi] = proj.project(u1);
  for (double& x : phi.values()) x /= dt;
  return {std::move(w), std::move(phi), s.t + dt};
}

} // namespace

FluidState fluid_step(const FluidState& state, const FluidConfig& cfg, double dt) {
  cfg.validate();
  Projector proj(state.velocity.grid());
  return step_with(proj, state, cfg, dt);
}

VectorTrajectory simulate_fluid(const VectorField& u0, const FluidConfig& cfg, double T, std::span<const double> schedule,
                                double dt, const FluidObserver& observer) {
  cfg.validate();
  require_periodic_2d(u0.grid(), "the fluid solver");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("final time T must be > 0");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  u0.require_finite("initial velocity");
  std::vector<double> targets;
  for (double t : schedule) {
    if (!(t > 0.0) || t > T) throw InvalidArgument("schedule times must lie in (0, T]");
    if (!targets.empty() && !(t > targets.back())) throw InvalidArgument("schedule times must be strictly increasing");
    targets.push_back(t);
  }
  if (targets.empty() || targets.back() < T) targets.push_back(T);
  if (cfg.sentinel.enabled) check_sentinel(u0, cfg.sentinel);

  VectorTrajectory traj;
  traj.push(0.0, u0);
  Projector proj(u0.grid());
  FluidState cur{u0, ScalarField(u0.grid()), 0.0};
  std::size_t step = 0;
  for (double target : targets) {
    while (cur.t < target) {
      double h = std::min(dt, fluid_dt(cur.velocity, cfg));
      const double rem = target - cur.t;
      bool land = false;
      if (h >= rem * (1.0 - 1e-12)) {
        h = rem;
        land = true;
      }
      FluidState next = step_with(proj, cur, cfg, h);
      if (land) next.t = target;
      if (cfg.sentinel.enabled) check_sentinel(next.velocity, cfg.sentinel);
      if (observer) {
        FluidStepInfo info;
        info.step = ++step;
        info.t = next.t;
        info.dt = h;
        info.max_divergence = divergence(next.velocity).max_abs();
        info.before = &cur;
        info.after = &next;
        observer(info);
      } else {
        ++step;
      }
      cur = std::move(next);
    }
    traj.push(cur.t, cur.velocity);
  }
  return traj;
}

VectorField curl_of_stream(const ScalarField& psi) {
  const GridSpec& g = psi.grid();
  if (g.dim() != 2) throw InvalidArgument("curl_of_stream needs a 2D grid");
  VectorField v(g);
  derivative(g, 1, psi.values(), v.component(0));
  derivative(g, 0, psi.values(), v.component(1));
  for (double& x : v.component(1)) x = -x;
  return v;
}

ScalarField random_stream_function(const GridSpec& grid, unsigned seed) {
  if (grid.dim() != 2) throw InvalidArgument("stream functions need a 2D grid");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(2, 4);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Bump {
    double cx, cy, r, a;
  };
  std::vector<Bump> bumps;
  const int nb = count(rng);
  const double Lx = grid.axis(0).upper - grid.axis(0).lower, Ly = grid.axis(1).upper - grid.axis(1).lower;
  const double L = std::min(Lx, Ly);
  for (int b = 0; b < nb; ++b) {
    const double r = L * (0.1 + 0.1 * unit(rng));
    const double cx = grid.axis(0).lower + r + 0.05 * Lx + unit(rng) * (Lx - 2 * r - 0.1 * Lx);
    const double cy = grid.axis(1).lower + r + 0.05 * Ly + unit(rng) * (Ly - 2 * r - 0.1 * Ly);
    bumps.push_back({cx, cy, r, amp(rng)});
  }
  return ScalarField::sample(grid, [&](const Point& x) {
    double s = 0.0;
    for (const Bump& b : bumps) {
      const double rho2 = ((x[0] - b.cx) * (x[0] - b.cx) + (x[1] - b.cy) * (x[1] - b.cy)) / (b.r * b.r);
      if (rho2 < 1.0) s += b.a * std::pow(1.0 - rho2, 4);
    }
    return s;
  });
}

double weak_residual_signed(const VectorTrajectory& traj, const VectorField& phi, const FluidConfig& cfg) {
  cfg.validate();
  if (traj.size() < 3) throw InvalidArgument("weak residual needs at least 3 snapshots");
  const GridSpec& g = phi.grid();
  if (g.dim() != 2) throw InvalidArgument("weak residual needs a 2D grid");
  for (const auto& s : traj)
    if (!(s.field.grid() == g)) throw InvalidArgument("test field and trajectory grids differ");
  if (divergence(phi).max_abs() > 1e-10) throw InvalidArgument("test field is not divergence-free");

  const TensorField Dphi = deformation_tensor(phi);
  const double mu = cfg.params.mu1, p = cfg.params.p;
  const double e2 = std::pow(cfg.eps_for(g), 2);
  const std::size_t count = g.node_count();
  double total = 0.0;
  for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
    const VectorField& u = traj[n].field;
    const VectorField& up = traj[n - 1].field;
    const VectorField& un = traj[n + 1].field;
    const double span = traj[n + 1].t - traj[n - 1].t;
    const auto grad = velocity_gradient(u);
    const TensorField Du = deformation_tensor(u);
    const double integral = deterministic_sum(count, [&](std::size_t m) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double ut = (un.component(k)[m] - up.component(k)[m]) / span;
        double conv = 0.0;
        for (int a = 0; a < 2; ++a) conv += u.component(a)[m] * grad[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)][m];
        s += (ut + conv) * phi.component(k)[m];
      }
      double d2 = 0.0, contraction = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double d = Du.entry(i, j)[m];
          d2 += d * d;
          contraction += d * Dphi.entry(i, j)[m];
        }
      s += mu * std::pow(d2 + e2, 0.5 * (p - 2.0)) * contraction;
      return s * g.weight(m);
    });
    total += 0.5 * span * integral;
  }
  return total;
}

double weak_residual(const VectorTrajectory& traj, const VectorField& phi, const FluidConfig& cfg) {
  return std::abs(weak_residual_signed(traj, phi, cfg));
}

double kinetic_energy(const VectorField& v) {
  const GridSpec& g = v.grid();
  return 0.5 * deterministic_sum(g.node_count(), [&](std::size_t n) {
    double s = 0.0;
    for (int k = 0; k < v.components(); ++k) s += v.component(k)[n] * v.component(k)[n];
    return s * g.weight(n);
  });
}

} // namespace fsp
