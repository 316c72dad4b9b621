#include <doctest.h>

#include "fsplab/energetics.hpp"
#include "fsplab/error.hpp"
#include "fsplab/exact.hpp"
#include "fsplab/fronts.hpp"
#include "fsplab/lemmas.hpp"
#include "fsplab/ops.hpp"

#include <cmath>
#include <sstream>

using namespace fsp;

namespace {

ScalarTrajectory barenblatt_run(const GridSpec& g, const BarenblattParams& bp, double t0, double t1, int snaps,
                                Point center = {0.0, 0.0}) {
  ScalarTrajectory traj;
  for (int k = 0; k < snaps; ++k) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(k) / (snaps - 1));
    traj.push(t, sample_barenblatt(g, bp, t, center));
  }
  return traj;
}

std::vector<double> grid_of(double lo, double hi, int n) {
  std::vector<double> s;
  for (int i = 0; i <= n; ++i) s.push_back(lo + (hi - lo) * i / n);
  return s;
}

} // namespace

TEST_CASE("exponent identities") {
  for (double p : {2.1, 2.5, 3.0, 3.5, 4.0})
    for (int N : {1, 2}) {
      const auto e = TheoryExponents::make(p, N);
      const ModelParams mp{p, 1.0, N};
      if (mp.thm1_applicable()) {
        CHECK(std::abs(e.alpha1 / p - thm1_small_exponent(p, N)) <= 1e-12);
        CHECK(std::abs(e.alpha2 - thm1_large_exponent(p, N)) <= 1e-12);
      }
      if (mp.thm2_applicable())
        CHECK(std::abs((e.beta1 + e.alpha1) / (p * (1 + e.beta1) + N * e.beta1 * (p - 1)) - 1.0 / (p + N * (p - 2))) <= 1e-12);
      if (p > 3.0 * N / (N + 1)) {
        CHECK(std::abs(e.theta1 - gn_theta(p, 1, p, N)) <= 1e-12);
        CHECK(std::abs(e.theta2 - gn_theta(3, 1, p, N)) <= 1e-12);
      }
      CHECK(e.F(1.0 - 1e-10) == doctest::Approx(e.F(1.0 + 1e-10)).epsilon(1e-8));
      CHECK(e.F(1.0) == 1.0);
    }
  CHECK_THROWS_AS(TheoryExponents::make(1.5, 1), InvalidArgument);
}

TEST_CASE("tail integrals") {
  const GridSpec g = GridSpec::line(-5.0, 5.0, 1000, Boundary::dirichlet_zero);
  ScalarTrajectory zero;
  for (double t : {0.0, 0.5, 1.0}) zero.push(t, ScalarField(g));
  CHECK(energy_A(zero, -1.0, 1.0, 3.0) == 0.0);
  CHECK(energy_B(zero, -1.0, 1.0, 3.0) == 0.0);
  CHECK_THROWS_AS(energy_A(zero, 0.0, 2.0, 3.0), InvalidArgument);

  const auto u = ScalarField::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  ScalarTrajectory constant;
  for (double t : {0.0, 0.3, 0.6, 1.0, 1.5}) constant.push(t, u);
  const double T = 1.2;
  const TailIntegrals tails(constant, 3.0, T);
  for (double s : {-2.0, 0.0, 0.7}) {
    ScalarField up = u;
    for (double& x : up.values()) x = std::pow(std::abs(x), 3.0);
    CHECK(tails.A(s) == doctest::Approx(T * restrict_integral(u, 3.0, s)).epsilon(1e-12));
    CHECK(tails.B(s) == doctest::Approx(T * restrict_integral(u, 3.0, s)).epsilon(1e-12));
    CHECK(tails.sup_L2(s) == doctest::Approx(restrict_integral(u, 2.0, s)).epsilon(1e-12));
  }

  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  const auto traj = barenblatt_run(g, bp, 0.5, 4.0, 40, {-1.0, 0.0});
  const TailIntegrals bt(traj, 3.0, 4.0);
  const double front = *support_front(traj.back().field, 1e-300);
  CHECK(bt.A(front + 2 * g.spacing(0)) == 0.0);
  CHECK(bt.B(front + 2 * g.spacing(0)) == 0.0);
  CHECK(bt.A(front - 0.3) > 0.0);
  double prevA = 1e300, prevB = 1e300;
  for (double s = -4.0; s < 3.0; s += 0.05) {
    CHECK(bt.A(s) <= prevA);
    CHECK(bt.B(s) <= prevB);
    prevA = bt.A(s);
    prevB = bt.B(s);
  }
  const TailIntegrals shorter(traj, 3.0, 2.0);
  for (double s : {-2.0, 0.0, 0.5}) CHECK(shorter.A(s) <= bt.A(s));

  // the floor removes sub-threshold values
  const TailIntegrals floored(traj, 3.0, 4.0, 1e300);
  CHECK(floored.A(-5.0) == 0.0);
}

TEST_CASE("ledger and iteration") {
  const GridSpec g = GridSpec::line(-6.0, 6.0, 1200, Boundary::dirichlet_zero);
  const auto e = TheoryExponents::make(3.0, 1);
  ScalarTrajectory zero;
  for (double t : {0.0, 1.0}) zero.push(t, ScalarField(g));
  const auto z = build_ledger(TailIntegrals(zero, 3.0, 1.0), grid_of(0.0, 3.0, 30), e);
  for (std::size_t i = 0; i < z.s.size(); ++i) CHECK((z.A[i] == 0.0 && z.B[i] == 0.0 && z.C[i] == 0.0 && z.J[i] == 0.0));
  const auto zi = check_iteration(z, 0.5);
  CHECK(zi.satisfied);
  CHECK(zi.from == 0);
  CHECK(zi.point == 0.0);
  CHECK(zi.vanishes);

  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  const auto traj = barenblatt_run(g, bp, 0.5, 4.0, 60, {-1.0, 0.0});
  const auto L = build_ledger(TailIntegrals(traj, 3.0, 4.0), grid_of(-3.0, 4.0, 140), e);
  for (std::size_t i = 0; i < L.s.size(); ++i) {
    const double c = std::pow(L.A[i], 1 + e.beta2) + std::pow(L.B[i], 1 + e.beta1);
    CHECK(std::abs(L.C[i] - c) <= 1e-14 * std::max(c, 1e-300));
    if (i > 0) {
      CHECK(L.J[i] <= L.J[i - 1]);
      CHECK(L.L[i] <= L.L[i - 1]);
    }
  }
  CHECK(L.F == doctest::Approx(e.F(4.0)));
  const auto it = check_iteration(L, 0.5);
  if (it.satisfied) CHECK(it.point >= *support_front(traj.back().field, 1e-300));

  EnergyLedger syn;
  syn.s = grid_of(0.0, 4.0, 400);
  for (double s : syn.s) syn.J.push_back(std::max(1.0 - s, 0.0));
  const auto si = check_iteration(syn, 0.5);
  CHECK(si.satisfied);
  CHECK(si.from == 0);
  CHECK(si.point == doctest::Approx(2.0));
  CHECK(si.vanishes);
  CHECK_THROWS_AS(check_iteration(syn, 1.0), InvalidArgument);

  std::stringstream ss;
  write_ledger_csv(ss, L);
  std::string header, cols;
  std::getline(ss, header);
  std::getline(ss, cols);
  CHECK(header.find("beta1=") != std::string::npos);
  CHECK(cols == "s,A,B,C,J,L");
}

TEST_CASE("local energy check") {
  const GridSpec g = GridSpec::line(-8.0, 8.0, 1600, Boundary::dirichlet_zero);
  ScalarTrajectory zero;
  for (double t : {0.0, 1.0}) zero.push(t, ScalarField(g));
  const auto rz = check_lemma21(zero, 0.0, 1.0, 1.0, 1.0, 3.0);
  CHECK(rz.lhs == 0.0);
  CHECK(rz.rhs == 0.0);
  CHECK(rz.ratio == 0.0);
  CHECK_THROWS_AS(check_lemma21(zero, 0.0, 0.0, 1.0, 1.0, 3.0), InvalidArgument);

  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  const auto a = barenblatt_run(g, bp, 0.5, 3.0, 40, {-2.0, 0.0});
  const double shift = 50 * g.spacing(0);
  const auto b = barenblatt_run(g, bp, 0.5, 3.0, 40, {-2.0 + shift, 0.0});
  const TailIntegrals ta(a, 3.0, 3.0), tb(b, 3.0, 3.0);
  for (double s : {-1.0, 0.0, 0.5})
    for (double d : {0.25, 0.5, 1.0}) {
      const auto ra = check_lemma21(ta, s, d, 1.0);
      const auto rb = check_lemma21(tb, s + shift, d, 1.0);
      CHECK(std::isfinite(ra.ratio));
      CHECK(ra.ratio == doctest::Approx(rb.ratio).epsilon(1e-3));
    }
  // beyond the support both sides vanish
  const double front = *support_front(a.back().field, 1e-300);
  const auto far = check_lemma21(ta, front + 0.1, 0.5, 1.0);
  CHECK(far.lhs == 0.0);
  CHECK(far.rhs == 0.0);
}

TEST_CASE("decay bound and check") {
  CHECK(decay_bound(2.0, 1.0, 1.0, 3.0, 1, 1.0) == doctest::Approx(0.25 + std::pow(2.0, -2.0 / 3.0)).epsilon(1e-14));
  CHECK(decay_bound(2.0, 1.0, 1.0, 3.0, 1, 1.0) == doctest::Approx(0.879961).epsilon(1e-6));
  CHECK(decay_bound(2.0, 3.0, 1.0, 3.0, 1, 1.0) == doctest::Approx(3 * decay_bound(2.0, 1.0, 1.0, 3.0, 1, 1.0)));
  CHECK(decay_bound(1e6, 1.0, 1.0, 3.0, 1, 1.0) < 1e-3);
  CHECK_THROWS_AS(decay_bound(2.0, 1.0, 1.0, 1.9, 1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(decay_bound(0.0, 1.0, 1.0, 3.0, 1, 1.0), InvalidArgument);

  const GridSpec g = GridSpec::line(-8.0, 8.0, 1600, Boundary::dirichlet_zero);
  ScalarTrajectory zero;
  for (double t : {0.0, 1.0}) zero.push(t, ScalarField(g));
  CHECK(check_decay(zero, TailIntegrals(zero, 3.0, 1.0), grid_of(0.1, 3.0, 10), 1).c_tilde == 0.0);

  const auto bp = make_barenblatt(3.0, 1, 1.0, 1.0);
  const auto traj = barenblatt_run(g, bp, 0.5, 4.0, 60);
  const auto r = check_decay(traj, TailIntegrals(traj, 3.0, 4.0), grid_of(0.1, 6.0, 60), 1);
  CHECK(std::isfinite(r.c_tilde));
  CHECK(r.c_tilde > 0.0);
  CHECK(r.l1_ratio <= 1.0 + 1e-6);

  ScalarTrajectory growing;
  for (double t : {0.0, 1.0}) {
    ScalarField f = sample_barenblatt(g, bp, 1.0);
    for (double& x : f.values()) x *= 1.0 + t;
    growing.push(t, f);
  }
  CHECK_THROWS_AS(check_decay(growing, TailIntegrals(growing, 3.0, 1.0), grid_of(0.1, 3.0, 10), 1), VerificationFailure);
}
