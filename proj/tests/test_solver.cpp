#include <doctest.h>

#include <cmath>
#include <vector>

#include "madelung/dopri5.hpp"
#include "madelung/error.hpp"
#include "madelung/hermite.hpp"
#include "madelung/solver.hpp"
#include "test_support.hpp"

using namespace madelung;
using madelung::testing::thrown_code;

TEST_CASE("params validation names the offending field") {
  Params p;
  p.T = -1;
  try {
    p.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("parameter T") != std::string::npos);
  }
  CHECK(thrown_code([] { Params{1, 0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([] { Params{1, 1, 0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([] { Params{1, 1, 1, -2}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([] { Params{NAN, 1}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(thrown_code([] { (void)integrate_radial({0, 1}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("dopri5 step integrates exponential growth") {
  auto rhs = [](double, const ode::State<1>& y) { return ode::State<1>{y[0]}; };
  ode::State<1> y{1.0};
  auto f = rhs(0.0, y);
  double x = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto step = ode::dopri5_step<1>(rhs, x, y, f, 0.1, 1e-10, 1e-12);
    y = step.y;
    f = step.dydx;
    x += 0.1;
  }
  CHECK(y[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
}

TEST_CASE("quintic hermite reproduces quintic polynomials") {
  auto p = [](double x) { return Jet{1 + x - 2 * x * x + x * x * x * x * x, 1 - 4 * x + 5 * x * x * x * x, -4 + 20 * x * x * x}; };
  const double a = 0.3, h = 0.7;
  for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const Jet j = quintic_hermite(p(a), p(a + h), h, t);
    const Jet e = p(a + t * h);
    CHECK(j.f == doctest::Approx(e.f).epsilon(1e-13));
    CHECK(j.df == doctest::Approx(e.df).epsilon(1e-12));
    CHECK(j.d2f == doctest::Approx(e.d2f).epsilon(1e-11));
  }
}

TEST_CASE("origin series coefficients") {
  const OriginExpansion o = series_origin({1, 1}, 1e-12);
  CHECK(o.u2 == 1.0);
  CHECK(o.y2 == 1.0);
  CHECK(o.r_eps > 0.0);
  CHECK(series_origin({0.5, 2}, 1e-12).u2 == 1.0);
  // u2 = m T X / hbar^2
  CHECK(series_origin({2, 3, 0.5, 1.5}, 1e-12).u2 == doctest::Approx(1.5 * 2 * 3 / 0.25));
  const SolutionPoint at0 = o.at(0.0);
  CHECK(at0.U == 1.0);
  CHECK(at0.dU == 0.0);
  CHECK(at0.Y == 1.0);
  CHECK(at0.dY == 0.0);
}

TEST_CASE("radial solve starts on the series and grows monotonically") {
  const RadialSolution s = integrate_radial({1, 1});
  CHECK(s.r.front() == s.origin.r_eps);
  CHECK(s.U.front() == doctest::Approx(1 + s.r.front() * s.r.front()).epsilon(1e-10));
  CHECK(s.monotone);
  CHECK(s.positive_sensitivity);
  for (std::size_t i = 1; i < s.size(); ++i) {
    REQUIRE(s.r[i] > s.r[i - 1]);
    REQUIRE(s.U[i] >= s.U[i - 1]);
    REQUIRE(s.Y[i] > 0.0);
  }
  CHECK(s.r.back() < s.r_m);
  CHECK(s.tail_gap > 0.0);
  // storage stops once r_m - r falls near rounding level; the cut-off is reached past the last node
  CHECK(s.tail_gap < 1e-9 * s.r_m);
  CHECK(s.U.back() < s.u_cut);
  CHECK(s.u_cut == 1e4);
  CHECK(s.blowup_consistent);
}

TEST_CASE("blow-up radius fixture from tolerance halving") {
  SolverOptions loose, tight;
  tight.rtol = 1e-13;
  tight.atol = 1e-15;
  const double a = integrate_radial({1, 1}, loose).r_m;
  const double b = integrate_radial({1, 1}, tight).r_m;
  CHECK(std::abs(a - b) / b < 1e-6);
  CHECK(a == doctest::Approx(1.34753156696).epsilon(5e-11));
  CHECK(b == doctest::Approx(1.34753156696).epsilon(5e-11));
}

TEST_CASE("blow-up radius decreases with X and with T") {
  CHECK(integrate_radial({1, 2}).r_m < integrate_radial({1, 1}).r_m);
  double prev = INFINITY;
  for (double X : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double rm = integrate_radial({1, X}).r_m;
    CHECK(rm < prev);
    prev = rm;
  }
  prev = INFINITY;
  for (double T : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double rm = integrate_radial({T, 1}).r_m;
    CHECK(rm < prev);
    prev = rm;
  }
}

TEST_CASE("blow-up estimator on synthetic logarithmic trajectories") {
  // U = -2T ln(1 - r) + c has U' = 2T/(1 - r) whatever c is; the estimator only sees U'.
  const double T = 1.0;
  std::vector<double> r, slope;
  for (int i = 0; i <= 9; ++i) {
    const double x = 0.9 + 0.01 * i;
    r.push_back(x);
    slope.push_back(2 * T / (1 - x));
  }
  const BlowupEstimate e = detect_blowup(r, slope, T);
  CHECK(e.r_m == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.consistent);
  CHECK(e.r_m_err < 1e-13);
}

TEST_CASE("blow-up estimator flags non-contracting samples") {
  const std::vector<double> r{0.9, 0.95, 0.99};
  const std::vector<double> gaps{0.1, 0.2, 0.5};
  const BlowupEstimate e = estimate_blowup(r, gaps);
  CHECK_FALSE(e.consistent);
  CHECK(e.r_m == doctest::Approx(1.49));
  CHECK(e.r_m_err >= 0.5);
  CHECK(thrown_code([] { (void)estimate_blowup({}, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("blow-up error shrinks as the cut-off rises") {
  auto err = [](double u_cut) {
    SolverOptions o;
    o.u_cut = u_cut;
    return integrate_radial({1, 1}, o).r_m_err;
  };
  CHECK(err(20) < err(10));
  CHECK(err(40) < err(20));
  CHECK(err(1e4) <= err(1e3));
  CHECK(err(1e5) <= err(1e4));
  CHECK(err(1e5) < 1e-12);
}

TEST_CASE("dense output") {
  const RadialSolution s = integrate_radial({1, 1});
  const SolutionPoint p0 = evaluate(s, 0.0);
  CHECK(p0.U == 1.0);
  CHECK(p0.dU == 0.0);
  CHECK(p0.Y == 1.0);
  CHECK(p0.dY == 0.0);
  for (std::size_t i = 0; i < s.size(); i += 37) {
    const SolutionPoint p = evaluate(s, s.r[i]);
    CHECK(p.U == s.U[i]);
    CHECK(p.dU == s.dU[i]);
    CHECK(p.Y == s.Y[i]);
    CHECK(p.dY == s.dY[i]);
  }
  SolverOptions fine;
  fine.rtol = 1e-13;
  fine.atol = 1e-15;
  const RadialSolution f = integrate_radial({1, 1}, fine);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.interior_nodes; ++i) {
    const double r = 0.5 * (s.r[i] + s.r[i + 1]);
    worst = std::max(worst, std::abs(evaluate(s, r).U - evaluate(f, r).U) / evaluate(f, r).U);
  }
  CHECK(worst < 1e-8);
  CHECK(thrown_code([&] { (void)evaluate(s, s.r_m); }) == ErrorCode::OutOfSupport);
  CHECK(thrown_code([&] { (void)evaluate(s, 2 * s.r_m); }) == ErrorCode::OutOfSupport);
  CHECK(thrown_code([&] { (void)evaluate(s, -0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tail model continues the last node") {
  const RadialSolution s = integrate_radial({1, 1});
  const SolutionPoint p = evaluate_tail(s, s.r.back());
  CHECK(p.U == doctest::Approx(s.U.back()));
  CHECK(p.dU == doctest::Approx(s.dU.back()).epsilon(1e-3));
}

TEST_CASE("ODE residual and Madelung closure") {
  for (double T : {0.02, 1.0, 100.0}) {
    for (double X : {0.01, 1.0, 100.0}) {
      CAPTURE(T);
      CAPTURE(X);
      const RadialSolution s = integrate_radial({T, X});
      const ResidualReport r = check_residual(s, 1e-6);
      CHECK(r.passed());
      CHECK(r.residual_points > 10);
      CHECK(r.closure_points > 10);
      CHECK(s.monotone);
      CHECK(s.positive_sensitivity);
    }
  }
}

TEST_CASE("sensitivity agrees with a central difference in X") {
  const double X = 1.0;
  auto worst = [&](double d) {
    const RadialSolution c = integrate_radial({1, X});
    const RadialSolution p = integrate_radial({1, X + d});
    const RadialSolution m = integrate_radial({1, X - d});
    double w = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double r = 0.8 * p.r_m * i / 40.0;
      const double fd = (evaluate(p, r).U - evaluate(m, r).U) / (2 * d);
      w = std::max(w, std::abs(fd - evaluate(c, r).Y));
    }
    return w;
  };
  const double coarse = worst(1e-2);
  const double fine = worst(5e-3);
  CHECK(coarse < 1e-3);
  // second-order: halving the step divides the error by about four
  CHECK(coarse / fine > 3.0);
}

TEST_CASE("sensitivity derivative of the blow-up radius") {
  const double d = 1e-4;
  const RadialSolution c = integrate_radial({1, 1});
  const double fd = (integrate_radial({1, 1 + d}).r_m - integrate_radial({1, 1 - d}).r_m) / (2 * d);
  CHECK(c.drm_dX == doctest::Approx(fd).epsilon(1e-6));
  CHECK(c.drm_dX < 0.0);
}

TEST_CASE("step budget and options validation") {
  SolverOptions o;
  o.max_steps = 5;
  CHECK(thrown_code([&] { (void)integrate_radial({1, 1}, o); }) == ErrorCode::MaxStepsExceeded);
  SolverOptions bad;
  bad.rtol = -1;
  CHECK(thrown_code([&] { (void)integrate_radial({1, 1}, bad); }) == ErrorCode::InvalidArgument);
  SolverOptions low;
  low.u_cut = 0.5;
  CHECK(thrown_code([&] { (void)integrate_radial({1, 1}, low); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scale invariance: r_m(T, X) sqrt(T) depends on X/T only") {
  const double a = integrate_radial({1, 1}).r_m;
  const double b = integrate_radial({4, 4}).r_m * 2;
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}
