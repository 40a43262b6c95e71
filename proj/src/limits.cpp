#include "madelung/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "madelung/error.hpp"
#include "madelung/quadrature.hpp"

namespace madelung {

namespace {

double j0_series(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Backward recurrence from well above x, normalized by J0 + 2 sum J2k = 1.
double j0_miller(double x) {
  const int start = 2 * ((static_cast<int>(x) + 40 + static_cast<int>(std::sqrt(60.0 * x))) / 2);
  double next = 0.0, cur = 1e-300, norm = 0.0, j0 = 0.0;
  for (int n = start; n >= 1; --n) {
    const double prev = 2.0 * n / x * cur - next;
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) {
      next *= 1e-250;
      cur *= 1e-250;
      norm *= 1e-250;
    }
    if ((n - 1) % 2 == 0 && n - 1 > 0) norm += 2.0 * cur;
  }
  j0 = cur;
  norm += j0;
  return j0 / norm;
}

}  // namespace

double bessel_j0(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidArgument, "bessel_j0 needs a finite x >= 0");
  }
  return x <= 5.0 ? j0_series(x) : j0_miller(x);
}

double bessel_first_zero(double lo, double hi) {
  double flo = bessel_j0(lo);
  if (flo * bessel_j0(hi) > 0.0) throw Error(ErrorCode::InvalidArgument, "bracket does not contain a sign change of J0");
  while (hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j0(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double GroundState::amplitude(double r) const {
  if (r < 0.0 || r >= r_0) return 0.0;
  return A * bessel_j0(k * r);
}

double GroundState::density(double r) const {
  const double a = amplitude(r);
  return a * a;
}

double ground_state_norm(const GroundState& g) {
  const GaussRule rule = gauss_legendre(20);
  const double u = integrate_panels(rule, 0.0, g.r_0, 64, [&](double r) {
    const double j = bessel_j0(g.k * r);
    return r * j * j;
  });
  return 2 * std::numbers::pi * g.A * g.A * u;
}

GroundState ground_state(double X, const Params& units) {
  if (!(X > 0.0) || !std::isfinite(X)) {
    throw Error(ErrorCode::InvalidArgument, "ground state energy X must be positive and finite, got " + std::to_string(X));
  }
  Params p = units;
  p.X = X;
  p.validate();
  GroundState g;
  g.X = X;
  g.k = std::sqrt(2 * p.m * X) / p.hbar;
  g.r_0 = bessel_first_zero() / g.k;
  g.A = 1.0;
  g.A = 1.0 / std::sqrt(ground_state_norm(g));
  return g;
}

double profile_sup_norm(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "profiles must have the same length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SmallTDeviation small_T_deviation(const RadialSolution& s, const PartitionFunction& Z, std::size_t samples) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 samples");
  const GroundState g = ground_state(s.params.X, s.params);
  SmallTDeviation out;
  out.r_0 = g.r_0;
  out.r_m_gap = std::abs(s.r_m - g.r_0);
  out.r_max = std::min(s.r_m, g.r_0);

  const double R0 = std::sqrt(density(s, Z, 0.0));
  std::vector<double> radii;
  radii.reserve(samples + s.size());
  for (std::size_t i = 0; i < samples; ++i) {
    radii.push_back(out.r_max * static_cast<double>(i) / static_cast<double>(samples));
  }
  for (double r : s.r) {
    if (r < out.r_max) radii.push_back(r);
  }
  std::vector<double> a, b;
  a.reserve(radii.size());
  b.reserve(radii.size());
  for (double r : radii) {
    a.push_back(std::sqrt(density(s, Z, r)) / R0);
    b.push_back(bessel_j0(g.k * r));
  }
  out.sup_norm = profile_sup_norm(a, b);
  return out;
}

LargeTReport large_T_diagnostics(std::span<const ThermoState> states) {
  std::vector<const ThermoState*> sorted;
  for (const auto& st : states) sorted.push_back(&st);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->params.T < b->params.T; });
  LargeTReport rep;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const ThermoState& st = *sorted[i];
    rep.T.push_back(st.params.T);
    rep.r_m.push_back(st.r_m);
    rep.Ubar.push_back(st.Ubar);
    rep.Ebar.push_back(st.Ebar);
    rep.max_kinetic_error = std::max(rep.max_kinetic_error, std::abs(st.Kbar - st.params.T) / st.params.T);
    if (i > 0) {
      rep.r_m_decreasing = rep.r_m_decreasing && rep.r_m[i] < rep.r_m[i - 1];
      rep.Ubar_increasing = rep.Ubar_increasing && rep.Ubar[i] > rep.Ubar[i - 1];
      rep.Ebar_increasing = rep.Ebar_increasing && rep.Ebar[i] > rep.Ebar[i - 1];
    }
  }
  return rep;
}

}  // namespace madelung
