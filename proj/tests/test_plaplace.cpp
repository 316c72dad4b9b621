#include <doctest.h>

#include "fsplab/error.hpp"
#include "fsplab/exact.hpp"
#include "fsplab/plaplace.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fsp;

namespace {

SolverConfig config(double p, int dim, double eps = 0.0) {
  SolverConfig c;
  c.params = ModelParams{p, 1.0, dim};
  c.eps_reg = eps;
  return c;
}

ScalarField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto f = ScalarField::sample(g, [&](const Point&) { return U(rng); });
  // dirichlet end nodes stay at zero
  for (std::size_t n = 0; n < f.size(); ++n) {
    const auto ij = g.unflatten(n);
    for (int a = 0; a < g.dim(); ++a) {
      const Axis& ax = g.axis(a);
      if (ax.bc == Boundary::dirichlet_zero && (ij[static_cast<std::size_t>(a)] == 0 || ij[static_cast<std::size_t>(a)] == ax.cells)) f[n] = 0.0;
    }
  }
  return f;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += std::abs(a[n] - b[n]) * a.grid().weight(n);
  return s;
}

double mass(const ScalarField& a) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * a.grid().weight(n);
  return s;
}

int support_cells(const ScalarField& u) {
  int c = 0;
  for (double v : u.values()) c += v != 0.0;
  return c;
}

std::vector<GridSpec> test_grids() {
  return {GridSpec::line(0.0, 1.0, 17, Boundary::periodic), GridSpec::line(-1.0, 1.0, 20, Boundary::dirichlet_zero),
          GridSpec::square(0.0, 1.0, 9, Boundary::periodic), GridSpec::square(-1.0, 2.0, 8, Boundary::dirichlet_zero),
          GridSpec({Axis{0.0, 1.0, 7, Boundary::periodic}, Axis{0.0, 2.0, 6, Boundary::dirichlet_zero}})};
}

} // namespace

TEST_CASE("flux diffusivity") {
  auto c = config(3.0, 1);
  CHECK(flux_diffusivity(0.0, c) == 0.0);
  CHECK(flux_diffusivity(2.0, c) == doctest::Approx(2.0));
  c.params.p = 3.5;
  double prev = -1.0;
  for (int i = 0; i < 200; ++i) {
    const double d = flux_diffusivity(0.05 * i, c);
    CHECK(d >= prev);
    prev = d;
  }
  auto r = config(3.0, 1, 0.5);
  CHECK(flux_diffusivity(0.0, r) == doctest::Approx(0.5));
  CHECK(flux_diffusivity(1.0, config(2.0, 1)) == 1.0);
}

TEST_CASE("parallel operator matches the serial reference") {
  for (const auto& g : test_grids())
    for (double p : {2.0, 3.0, 3.5})
      for (double eps : {0.0, 0.3}) {
        CAPTURE(g.describe());
        CAPTURE(p);
        const auto cfg = config(p, g.dim(), eps);
        const auto u = random_field(g, 21);
        const auto a = apply_operator(u, cfg);
        const auto b = reference::apply_operator(u, cfg);
        const double scale = std::max(1.0, b.max_abs());
        for (std::size_t n = 0; n < u.size(); ++n) CHECK(std::abs(a[n] - b[n]) <= 1e-12 * scale);
        CHECK(dirichlet_energy(u, cfg) == doctest::Approx(reference::dirichlet_energy(u, cfg)).epsilon(1e-12));
      }
}

TEST_CASE("energy gradient and Hessian agree with finite differences") {
  for (const auto& g : test_grids())
    for (double p : {2.0, 3.0, 4.5}) {
      CAPTURE(g.describe());
      CAPTURE(p);
      const auto cfg = config(p, g.dim(), 0.1);
      FaceEnergy fe(g, cfg);
      const auto u = random_field(g, 4);
      const auto w = random_field(g, 5);
      std::vector<double> grad(u.size()), hw(u.size()), gp(u.size()), gm(u.size());
      fe.gradient(u.values(), grad);
      const double e = 1e-6;
      std::vector<double> up(u.data()), um(u.data());
      for (std::size_t n = 0; n < u.size(); ++n) {
        up[n] += e * w[n];
        um[n] -= e * w[n];
      }
      const double dir = (fe.energy(up) - fe.energy(um)) / (2 * e);
      double exact = 0.0;
      for (std::size_t n = 0; n < u.size(); ++n) exact += grad[n] * w[n];
      CHECK(dir == doctest::Approx(exact).epsilon(1e-6));

      fe.hessian_setup(u.values());
      fe.hessian_apply(w.values(), hw);
      fe.gradient(up, gp);
      fe.gradient(um, gm);
      double scale = 0.0;
      for (double v : hw) scale = std::max(scale, std::abs(v));
      for (std::size_t n = 0; n < u.size(); ++n) CHECK(std::abs((gp[n] - gm[n]) / (2 * e) - hw[n]) <= 1e-5 * scale);
    }
}

TEST_CASE("p = 2 reduces to the standard Laplacian") {
  const auto g = GridSpec::line(0.0, 1.0, 32, Boundary::periodic);
  const auto u = random_field(g, 8);
  const auto a = apply_operator(u, config(2.0, 1));
  const double h = g.spacing(0);
  for (int i = 0; i < 32; ++i) {
    const double lap = (u[static_cast<std::size_t>((i + 1) % 32)] - 2 * u[static_cast<std::size_t>(i)] +
                        u[static_cast<std::size_t>((i + 31) % 32)]) / (h * h);
    CHECK(a[static_cast<std::size_t>(i)] == doctest::Approx(lap).epsilon(1e-12));
  }
  // 2D: second-order convergence to Δu for a smooth periodic function
  double prev = 0.0;
  for (int cells : {32, 64, 128}) {
    const auto g2 = GridSpec::square(0.0, 2.0 * std::numbers::pi, cells, Boundary::periodic);
    const auto f = ScalarField::sample(g2, [](const Point& x) { return std::sin(x[0]) * std::cos(2 * x[1]); });
    const auto af = apply_operator(f, config(2.0, 2));
    double err = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) err = std::max(err, std::abs(af[n] + 5.0 * f[n]));
    if (prev > 0.0) CHECK(prev / err >= 3.5);
    prev = err;
  }
}

TEST_CASE("explicit step: constants, mass and failures") {
  const auto g = GridSpec::square(0.0, 1.0, 12, Boundary::periodic);
  const auto c = ScalarField::sample(g, [](const Point&) { return 0.75; });
  const auto cfg = config(3.0, 2);
  const auto c1 = step_explicit(c, cfg, 0.1);
  for (std::size_t n = 0; n < c.size(); ++n) CHECK(c1[n] == 0.75);

  const auto g1 = GridSpec::line(0.0, 1.0, 64, Boundary::periodic);
  auto u = ScalarField::sample(g1, [](const Point& x) { return 1.0 + std::sin(2 * std::numbers::pi * x[0]) + 0.3 * std::cos(6 * std::numbers::pi * x[0]); });
  const auto cfg1 = config(3.0, 1);
  const double m0 = mass(u);
  const double dt = cfl_dt(u, cfg1);
  for (int k = 0; k < 1000; ++k) u = step_explicit(u, cfg1, dt);
  CHECK(std::abs(mass(u) - m0) <= 1e-10 * m0);

  ScalarField spike = u;
  spike[5] = 1e200;
  CHECK_THROWS_AS(step_explicit(spike, cfg1, 1.0), NumericalFailure);
  try {
    step_explicit(spike, cfg1, 1.0);
  } catch (const NumericalFailure& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
  CHECK_THROWS_AS(step_explicit(u, config(3.0, 2), 0.1), InvalidArgument);
}

TEST_CASE("explicit step local error against the exact solution") {
  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  std::vector<double> errs;
  for (int cells : {512, 1024, 2048}) {
    const auto g = GridSpec::line(-8.0, 8.0, cells, Boundary::dirichlet_zero);
    const auto cfg = config(3.0, 1);
    const auto u0 = sample_barenblatt(g, bp, 1.0);
    const double dt = cfl_dt(u0, cfg);
    const auto u1 = step_explicit(u0, cfg, dt);
    errs.push_back(l1_distance(u1, sample_barenblatt(g, bp, 1.0 + dt)));
  }
  // dt ∝ h², so O(dt² + dt h) shrinks at least 8x per halving
  CHECK(errs[0] / errs[1] >= 6.0);
  CHECK(errs[1] / errs[2] >= 6.0);
}

TEST_CASE("proximal step basics") {
  const auto g = GridSpec::line(0.0, 1.0, 40, Boundary::periodic);
  const auto c = ScalarField::sample(g, [](const Point&) { return -2.0; });
  const auto cfg = config(3.0, 1);
  const auto r = step_implicit_proximal(c, cfg, 0.5);
  for (std::size_t n = 0; n < c.size(); ++n) CHECK(std::abs(r.field[n] + 2.0) <= cfg.tol * 2.0);

  for (const auto& grid : test_grids()) {
    CAPTURE(grid.describe());
    auto cg = config(3.0, grid.dim());
    const auto u = random_field(grid, 3);
    const double dt = 50.0 * cfl_dt(u, cg);
    const auto res = step_implicit_proximal(u, cg, dt);
    CHECK(res.residual <= cg.tol);
    const auto Av = apply_operator(res.field, cg);
    double worst = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) worst = std::max(worst, std::abs(res.field[n] - u[n] - dt * Av[n]));
    CHECK(worst <= cg.tol * u.max_abs() * 1.0000001);
    // energy inequality E(v) + |v-u|²/(2dt) <= E(u) + tol
    CHECK(res.objective_end <= dirichlet_energy(u, cg) + cg.tol);
    CHECK(res.objective_start == doctest::Approx(dirichlet_energy(u, cg)));
  }

  auto strict = config(3.0, 1);
  strict.max_inner = 1;
  strict.tol = 1e-14;
  const auto u = random_field(GridSpec::line(-1.0, 1.0, 30, Boundary::dirichlet_zero), 2);
  try {
    step_implicit_proximal(u, strict, 1.0);
    FAIL("expected IterationLimitError");
  } catch (const IterationLimitError& e) {
    CHECK(e.last_residual() > strict.tol);
  }
}

TEST_CASE("cfl_dt") {
  auto cfg = config(3.0, 1);
  cfg.dt_max = 0.25;
  const auto g = GridSpec::line(-1.0, 1.0, 50, Boundary::dirichlet_zero);
  CHECK(cfl_dt(ScalarField(g), cfg) == 0.25);
  // constant gradient: the same field on a halved grid quarters dt
  auto lin = [](const Point& x) { return 0.8 * x[0]; };
  cfg.dt_min = 1e-300;
  const auto d1 = ScalarField::sample(GridSpec::line(-1.0, 1.0, 50, Boundary::dirichlet_zero), lin);
  const auto d2 = ScalarField::sample(GridSpec::line(-1.0, 1.0, 100, Boundary::dirichlet_zero), lin);
  CHECK(cfl_dt(d1, cfg) / cfl_dt(d2, cfg) == doctest::Approx(4.0).epsilon(1e-12));
  cfg.dt_min = 1e-3;
  CHECK(cfl_dt(d2, cfg) >= 1e-3);
}

TEST_CASE("explicit runs at the CFL step obey the maximum principle") {
  const auto g = GridSpec::line(-4.0, 4.0, 200, Boundary::dirichlet_zero);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto u = ScalarField::sample(g, [&](const Point& x) { return std::abs(x[0]) < 2.0 ? U(rng) : 0.0; });
  const double m0 = u.max_abs();
  const auto cfg = config(3.0, 1);
  for (int k = 0; k < 10000; ++k) {
    u = step_explicit(u, cfg, cfl_dt(u, cfg));
    if (k % 100 == 0) {
      double lo = 0.0;
      for (double v : u.values()) lo = std::min(lo, v);
      REQUIRE(u.max_abs() <= m0 * (1 + 1e-12));
      REQUIRE(lo >= -1e-12 * m0);
    }
  }
}

TEST_CASE("Barenblatt consistency of the discrete operator") {
  // max |A(B) - ∂_t B| away from the front converges at order >= 1; the
  // origin is excluded too, where u' ~ |x|^{1/2} has a cusp
  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  const double R = barenblatt_front_radius(bp, 1.0);
  std::vector<double> errs;
  for (int cells : {256, 512, 1024}) {
    const auto g = GridSpec::line(-6.0, 6.0, cells, Boundary::dirichlet_zero);
    const auto u = sample_barenblatt(g, bp, 1.0);
    const auto a = apply_operator(u, config(3.0, 1));
    const double e = 1e-5;
    const auto up = sample_barenblatt(g, bp, 1.0 + e), um = sample_barenblatt(g, bp, 1.0 - e);
    double err = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
      const double r = std::abs(g.point(n)[0]);
      if (r > 0.85 * R || r < 0.1 * R) continue;
      err = std::max(err, std::abs(a[n] - (up[n] - um[n]) / (2 * e)));
    }
    errs.push_back(err);
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 1.0);
  CHECK(std::log2(errs[1] / errs[2]) >= 1.0);

  // same in 2D along the interior disc
  std::vector<double> errs2;
  const auto b2 = make_barenblatt(3.0, 2, 1.0, 1.0);
  const double R2 = barenblatt_front_radius(b2, 1.0);
  for (int cells : {64, 128, 256}) {
    const auto g = GridSpec::square(-4.0, 4.0, cells, Boundary::dirichlet_zero);
    const auto u = sample_barenblatt(g, b2, 1.0);
    const auto a = apply_operator(u, config(3.0, 2));
    const double e = 1e-5;
    const auto up = sample_barenblatt(g, b2, 1.0 + e), um = sample_barenblatt(g, b2, 1.0 - e);
    double err = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
      const auto x = g.point(n);
      const double r = std::hypot(x[0], x[1]);
      if (r > 0.8 * R2 || r < 0.1 * R2) continue;
      err = std::max(err, std::abs(a[n] - (up[n] - um[n]) / (2 * e)));
    }
    errs2.push_back(err);
  }
  CHECK(std::log2(errs2[0] / errs2[1]) >= 1.0);
  CHECK(std::log2(errs2[1] / errs2[2]) >= 1.0);
}

TEST_CASE("simulate: zero data, schedule and trajectory layout") {
  const auto g = GridSpec::line(-1.0, 1.0, 40, Boundary::dirichlet_zero);
  const auto cfg = config(3.0, 1);
  const std::vector<double> sched{0.1, 0.2};
  const auto tr = simulate(ScalarField(g), cfg, 0.3, sched);
  REQUIRE(tr.size() == 4);
  CHECK(tr[0].t == 0.0);
  CHECK(tr.back().t == 0.3);
  for (const auto& s : tr) CHECK(s.field.max_abs() == 0.0);
  const std::vector<double> bad{0.2, 0.1};
  CHECK_THROWS_AS(simulate(ScalarField(g), cfg, 0.3, bad), InvalidArgument);
  const std::vector<double> late{0.5};
  CHECK_THROWS_AS(simulate(ScalarField(g), cfg, 0.3, late), InvalidArgument);
  CHECK_THROWS_AS(simulate(ScalarField(g), cfg, 0.0, sched), InvalidArgument);
}

TEST_CASE("simulate: Barenblatt to t = 16 at 8192 cells") {
  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  const auto g = GridSpec::line(-10.0, 10.0, 8192, Boundary::dirichlet_zero);
  auto cfg = config(3.0, 1);
  cfg.stepper = Stepper::implicit_proximal;
  cfg.implicit_dt_multiplier = 1000.0;
  const auto u0 = sample_barenblatt(g, bp, 1.0);
  const std::vector<double> sched{5.0, 10.0};
  const auto tr = simulate(u0, cfg, 15.0, sched);
  const auto ex = sample_barenblatt(g, bp, 16.0);
  CHECK(l1_distance(tr.back().field, ex) / lp_norm(ex, 1.0) <= 0.02);
  // mass invariance and L2 dissipation per snapshot
  const double m0 = mass(u0);
  double l2 = lp_norm(u0, 2.0);
  for (const auto& s : tr) {
    CHECK(std::abs(mass(s.field) - m0) <= 1e-10 * m0);
    const double v = lp_norm(s.field, 2.0);
    CHECK(v <= l2 * (1 + 1e-14));
    l2 = v;
  }
}

TEST_CASE("simulate: positivity, locality and proximal energy descent") {
  const auto g = GridSpec::line(-3.0, 3.0, 600, Boundary::dirichlet_zero);
  const auto u0 = ScalarField::sample(g, [](const Point& x) { return std::abs(x[0]) < 0.5 ? std::pow(1 - 4 * x[0] * x[0], 2) : 0.0; });
  const double m0 = u0.max_abs();
  auto cfg = config(3.0, 1);
  bool ok = true;
  int worst_growth = 0;
  simulate(u0, cfg, 0.05, {}, [&](const StepInfo& s) {
    worst_growth = std::max(worst_growth, support_cells(*s.after) - support_cells(*s.before));
    for (double v : s.after->values()) ok = ok && v >= -1e-12 * m0;
  });
  CHECK(ok);
  // a three-point stencil can grow the support by one node on each side
  CHECK(worst_growth <= 2);

  cfg.stepper = Stepper::implicit_proximal;
  cfg.implicit_dt_multiplier = 200.0;
  bool descent = true;
  FaceEnergy fe(g, cfg);
  simulate(u0, cfg, 0.05, {}, [&](const StepInfo& s) {
    const double eb = fe.energy(s.before->values());
    const double ea = fe.energy(s.after->values());
    double d2 = 0.0;
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const double d = (*s.after)[n] - (*s.before)[n];
      d2 += fe.weight(n) * d * d;
    }
    descent = descent && ea <= eb + cfg.tol;
    descent = descent && ea + 0.5 * d2 / s.dt <= eb + cfg.tol;
    CHECK(s.inner_residual <= cfg.tol);
  });
  CHECK(descent);
}

TEST_CASE("simulate: 2D locality") {
  const auto g = GridSpec::square(-2.0, 2.0, 64, Boundary::dirichlet_zero);
  const auto u0 = ScalarField::sample(g, [](const Point& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return r2 < 0.25 ? std::pow(1 - 4 * r2, 2) : 0.0;
  });
  auto cfg = config(3.0, 2);
  auto radius = [&](const ScalarField& u) {
    double r = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n)
      if (u[n] != 0.0) r = std::max(r, std::hypot(g.point(n)[0], g.point(n)[1]));
    return r;
  };
  double worst = 0.0;
  simulate(u0, cfg, 0.02, {}, [&](const StepInfo& s) { worst = std::max(worst, radius(*s.after) - radius(*s.before)); });
  // the face stencil reaches two nodes along each axis
  CHECK(worst <= 2.0 * std::sqrt(2.0) * g.spacing(0) + 1e-12);
}

TEST_CASE("boundary sentinel") {
  const auto g = GridSpec::line(-1.0, 1.0, 100, Boundary::dirichlet_zero);
  const auto near = ScalarField::sample(g, [](const Point& x) { return std::abs(x[0] - 0.75) < 0.1 ? 1.0 : 0.0; });
  auto cfg = config(3.0, 1);
  CHECK_THROWS_AS(simulate(near, cfg, 0.01, {}), BoundarySentinelError);
  cfg.sentinel.axis_mask = 0;
  CHECK_NOTHROW(simulate(near, cfg, 1e-4, {}));
  cfg.sentinel.axis_mask = 1;
  cfg.sentinel.enabled = false;
  CHECK_NOTHROW(simulate(near, cfg, 1e-4, {}));

  const auto mid = ScalarField::sample(g, [](const Point& x) { return std::abs(x[0]) < 0.2 ? 1.0 - 25 * x[0] * x[0] : 0.0; });
  cfg.sentinel.enabled = true;
  CHECK_NOTHROW(check_sentinel(mid, cfg.sentinel));
  // diffusing long enough reaches the guard band
  CHECK_THROWS_AS(simulate(mid, config(3.0, 1), 50.0, {}), BoundarySentinelError);
}
