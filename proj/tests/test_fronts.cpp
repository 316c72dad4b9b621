#include <doctest.h>

#include "fsplab/error.hpp"
#include "fsplab/exact.hpp"
#include "fsplab/fronts.hpp"
#include "fsplab/plaplace.hpp"

#include <cmath>
#include <sstream>

using namespace fsp;

namespace {

SupportTrace power_trace(double a, double e, double t0, double t1, int n) {
  SupportTrace tr;
  tr.tau = 1e-6;
  for (int k = 0; k < n; ++k) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(k) / (n - 1));
    tr.push(t, a * std::pow(t, e));
  }
  return tr;
}

} // namespace

TEST_CASE("support_front basics") {
  const GridSpec g = GridSpec::line(-2.0, 2.0, 400, Boundary::dirichlet_zero);
  CHECK_FALSE(support_front(ScalarField(g), 1e-6).has_value());
  CHECK_THROWS_AS(support_front(ScalarField(g), 0.0), InvalidArgument);

  const auto ind = ScalarField::sample(g, [](const Point& x) { return x[0] < 0 ? 1.0 : 0.0; });
  REQUIRE(support_front(ind, 0.5).has_value());
  CHECK(std::abs(*support_front(ind, 0.5)) <= g.spacing(0));

  const GridSpec g2 = GridSpec::square(-1.0, 1.0, 64, Boundary::dirichlet_zero);
  const auto ind2 = ScalarField::sample(g2, [](const Point& x) { return x[1] < 0 ? 1.0 : 0.0; });
  CHECK(std::abs(*support_front(ind2, 0.5)) <= g2.spacing(1));
  VectorField v2(g2);
  for (std::size_t n = 0; n < v2.size(); ++n) v2.component(1)[n] = -ind2[n];
  CHECK(std::abs(*support_front(v2, 0.5)) <= g2.spacing(1));
}

TEST_CASE("support_front on Barenblatt snapshots") {
  for (int N : {1, 2}) {
    const auto bp = make_barenblatt(3.0, N, 1.0, 1.0);
    const double t = 2.0;
    const double R = barenblatt_front_radius(bp, t);
    const GridSpec g = N == 1 ? GridSpec::line(-2 * R, 2 * R, 4000, Boundary::dirichlet_zero)
                              : GridSpec::square(-2 * R, 2 * R, 400, Boundary::dirichlet_zero);
    const ScalarField u = sample_barenblatt(g, bp, t);
    double prev = 0.0;
    double prev_offset = 1e300;
    for (double tau : {1e-2, 1e-3, 1e-4, 1e-6, 1e-8}) {
      const double f = *support_front(u, tau, FrontGeometry::radial);
      CHECK(f <= R + g.spacing(0));
      CHECK(f >= prev);
      prev = f;
      const double offset = R - f;
      CHECK(offset <= prev_offset + 1e-12);
      prev_offset = offset;
    }
    CHECK(prev_offset <= 2 * g.spacing(0));
    // halfspace reading of the same snapshot sees the x_N-extent
    CHECK(std::abs(*support_front(u, 1e-8) - prev) <= g.spacing(0));
  }
}

TEST_CASE("trace_support") {
  const GridSpec g = GridSpec::line(-10.0, 10.0, 2000, Boundary::dirichlet_zero);
  ScalarTrajectory zero;
  for (double t : {0.0, 1.0, 2.0}) zero.push(t, ScalarField(g));
  const auto tz = trace_support(zero, 1e-6);
  for (const auto& f : tz.front) CHECK_FALSE(f.has_value());
  CHECK_THROWS_AS(trace_support(ScalarTrajectory{}, 1e-6), InvalidArgument);

  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  ScalarTrajectory b;
  for (int k = 0; k <= 20; ++k) {
    const double t = std::pow(10.0, k / 20.0);
    b.push(t, sample_barenblatt(g, bp, t));
  }
  const auto tb = trace_support(b, 1e-8);
  for (std::size_t k = 1; k < tb.size(); ++k) CHECK(*tb.front[k] > *tb.front[k - 1]);

  // explicit eps = 0 run: the front only moves when a new cell switches on
  SolverConfig cfg;
  cfg.params = ModelParams{3.0, 1.0, 1};
  const GridSpec gc = GridSpec::line(-6.0, 6.0, 240, Boundary::dirichlet_zero);
  const ScalarField u0 = sample_barenblatt(gc, bp, 1.0);
  std::vector<double> steps;
  std::vector<std::size_t> support;
  simulate(u0, cfg, 0.2, {}, [&](const StepInfo& s) {
    std::size_t count = 0;
    for (double x : s.after->values()) count += x > 0.0;
    support.push_back(count);
    steps.push_back(*support_front(*s.after, 1e-300));
  });
  for (std::size_t k = 1; k < steps.size(); ++k) {
    if (support[k] == support[k - 1]) {
      CHECK(std::abs(steps[k] - steps[k - 1]) <= gc.spacing(0));
    }
  }
}

TEST_CASE("gamma formulas") {
  CHECK(gamma_thm1(3, 2, 16.0, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(gamma_thm1(3, 2, 1.0 / 16, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gamma_thm1(3, 2, 1.0, 2.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(gamma_thm2(3, 2, 32.0, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(gamma_thm2(3, 2, 1.0, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK_THROWS_AS(gamma_thm1(1.5, 2, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(gamma_thm2(1.5, 2, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(gamma_thm1(3, 2, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(gamma_thm2(3, 2, 1.0, 0.0), InvalidArgument);
  try {
    gamma_thm1(1.5, 2, 1.0, 1.0);
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("thm1_applicable") != std::string::npos);
  }

  for (double p : {2.0, 2.1, 2.5, 3.0, 3.5, 4.0, 6.0})
    for (int N : {1, 2}) {
      CHECK(thm2_small_exponent(p, N) == doctest::Approx(BarenblattParams{p, N}.beta()).epsilon(1e-15));
      const double d = thm1_small_exponent(p, N) - thm2_small_exponent(p, N);
      CHECK(d >= -1e-15);
      CHECK((std::abs(d) < 1e-15) == (p == 2.0));
      for (GammaKind k : {GammaKind::thm1, GammaKind::thm2}) {
        const ModelParams mp{p, 1.0, N};
        if (!(k == GammaKind::thm1 ? mp.thm1_applicable() : mp.thm2_applicable())) continue;
        CHECK(gamma(k, p, N, 1.0 - 1e-9, 1.0) == doctest::Approx(gamma(k, p, N, 1.0 + 1e-9, 1.0)).epsilon(1e-8));
        double prev = 0.0;
        for (double t = 1e-3; t < 1e3; t *= 1.3) {
          const double G = gamma(k, p, N, t, 1.0);
          CHECK(G > prev);
          prev = G;
        }
      }
    }
}

TEST_CASE("fit_exponent") {
  const auto tr = power_trace(3.0, 0.25, 1.0, 100.0, 50);
  const auto fit = fit_exponent(tr);
  CHECK(std::abs(fit.slope - 0.25) <= 1e-10);
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fit.residual_rms <= 1e-12);
  CHECK(fit.samples == 40);
  CHECK(fit.t_a > 1.0);
  CHECK(fit.t_b < 100.0);

  CHECK(std::abs(fit_exponent(power_trace(2.0, 0.0, 1.0, 10.0, 20)).slope) <= 1e-10);

  SupportTrace scaled = tr;
  for (auto& f : scaled.front) *f *= 17.0;
  const auto fs = fit_exponent(scaled);
  CHECK(std::abs(fs.slope - fit.slope) <= 1e-12);
  CHECK(fs.intercept == doctest::Approx(fit.intercept + std::log(17.0)));

  CHECK_THROWS_AS(fit_exponent(power_trace(1.0, 0.3, 1.0, 2.0, 7)), InvalidArgument);
  CHECK_NOTHROW(fit_exponent(power_trace(1.0, 0.3, 1.0, 2.0, 8)));
  FitWindow w;
  w.t_min = 70.0;
  CHECK_THROWS_AS(fit_exponent(tr, w), InvalidArgument);
}

TEST_CASE("check_envelope") {
  for (GammaKind k : {GammaKind::thm1, GammaKind::thm2}) {
    SupportTrace tr;
    for (int i = 0; i < 40; ++i) {
      const double t = 0.1 * std::pow(100.0, i / 39.0);
      tr.push(t, gamma(k, 3.0, 1, t, 0.37));
    }
    const auto r = check_envelope(tr, k, 3.0, 1, 0.1);
    CHECK(r.violations.empty());
    CHECK(r.c == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(r.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  SupportTrace b;
  for (int i = 0; i <= 60; ++i) {
    const double t = std::pow(100.0, i / 60.0);
    b.push(t, barenblatt_front_radius(bp, t));
  }
  CHECK(check_envelope(b, GammaKind::thm2, 3.0, 1, 1.0, 0.0).violations.empty());
  CHECK(check_envelope(b, GammaKind::thm1, 3.0, 1, 1.0, 0.0).violations.empty());

  // a front growing faster than the envelope
  const auto fast = power_trace(1.0, 0.99, 0.1, 10.0, 30);
  const auto r = check_envelope(fast, GammaKind::thm2, 3.0, 1, 0.1);
  CHECK_FALSE(r.violations.empty());
  CHECK_THROWS_AS(check_envelope(fast, GammaKind::thm2, 3.0, 1, 50.0), InvalidArgument);
}

TEST_CASE("trace CSV and reports") {
  SupportTrace tr;
  tr.tau = 1e-6;
  tr.push(0.0, std::nullopt);
  tr.push(0.5, 1.0 / 3.0);
  tr.push(1.5, 2.0);
  std::stringstream ss;
  write_trace_csv(ss, tr);
  const auto back = read_trace_csv(ss);
  REQUIRE(back.size() == 3);
  CHECK_FALSE(back.front[0].has_value());
  CHECK(*back.front[1] == 1.0 / 3.0);
  CHECK(back.t[2] == 1.5);
  std::stringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), InvalidArgument);

  const auto rep = fit_report(fit_exponent(power_trace(1.0, 0.5, 1.0, 4.0, 12)));
  CHECK(rep.find("slope=") != std::string::npos);
  CHECK(rep.find("residual_rms=") != std::string::npos);
}
