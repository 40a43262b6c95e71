#include "madelung/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "madelung/dopri5.hpp"
#include "madelung/error.hpp"

namespace madelung {

namespace {

void require_positive(const char* name, double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("solver option ") + name + " must be positive and finite, got " + std::to_string(value));
  }
}

double curvature_U(const Params& p, double r, double U, double dU) {
  return dU * dU / (2.0 * p.T) + p.coupling() * U - dU / r;
}

double curvature_Y(const Params& p, double r, double dU, double Y, double dY) {
  return dU * dY / p.T + p.coupling() * Y - dY / r;
}

struct TailSample {
  double r;
  double gap;
};

}  // namespace

void SolverOptions::validate() const {
  require_positive("rtol", rtol);
  require_positive("atol", atol);
  require_positive("residual_tol", residual_tol);
  require_positive("switch_gap", switch_gap);
  require_positive("store_gap", store_gap);
  if (!std::isfinite(u_cut)) {
    throw Error(ErrorCode::InvalidArgument, "solver option u_cut must be finite");
  }
  if (max_steps == 0) throw Error(ErrorCode::InvalidArgument, "solver option max_steps must be positive");
  if (tail_points < 2) throw Error(ErrorCode::InvalidArgument, "solver option tail_points must be at least 2");
  if (store_gap >= switch_gap) {
    throw Error(ErrorCode::InvalidArgument, "solver option store_gap must be smaller than switch_gap");
  }
}

double SolverOptions::resolved_u_cut(const Params& params) const {
  return u_cut > 0.0 ? u_cut : 1e4 * std::max(params.X, params.T);
}

SolutionPoint OriginExpansion::at(double r) const noexcept {
  const double r2 = r * r;
  return {X + r2 * (u2 + u4 * r2), r * (2 * u2 + 4 * u4 * r2), 1 + r2 * (y2 + y4 * r2), r * (2 * y2 + 4 * y4 * r2)};
}

OriginExpansion series_origin(const Params& params, double tol) {
  params.validate();
  require_positive("series tolerance", tol);
  const double T = params.T;
  const double c = params.coupling();

  OriginExpansion s;
  s.X = params.X;
  s.u2 = params.m * T * params.X / (params.hbar * params.hbar);
  s.u4 = (2 * s.u2 * s.u2 / T + c * s.u2) / 16;
  s.y2 = params.m * T / (params.hbar * params.hbar);
  s.y4 = (4 * s.u2 * s.y2 / T + c * s.y2) / 16;

  // First neglected coefficients bound the truncation error.
  const double u6 = (8 * s.u2 * s.u4 / T + c * s.u4) / 36;
  const double y6 = ((8 * s.u2 * s.y4 + 8 * s.u4 * s.y2) / T + c * s.y4) / 36;

  const double r_value = std::min(std::pow(tol * s.X / u6, 1.0 / 6), std::pow(tol / y6, 1.0 / 6));
  const double r_slope = std::min(std::pow(tol * s.u2 / (3 * u6), 0.25), std::pow(tol * s.y2 / (3 * y6), 0.25));
  s.r_eps = std::min(r_value, r_slope);
  return s;
}

Jet RadialSolution::potential_jet(std::size_t i) const noexcept {
  return {U[i], dU[i], d2U[i]};
}

Jet RadialSolution::sensitivity_jet(std::size_t i) const noexcept {
  return {Y[i], dY[i], d2Y[i]};
}

BlowupEstimate estimate_blowup(std::span<const double> radii, std::span<const double> gaps, double noise) {
  if (radii.empty() || radii.size() != gaps.size()) {
    throw Error(ErrorCode::InvalidArgument, "blow-up estimator needs matching, non-empty radius and gap samples");
  }
  const std::size_t n = radii.size();
  const double last = radii[n - 1] + gaps[n - 1];
  const double floor = 4 * std::numeric_limits<double>::epsilon() * std::abs(last);
  const double tolerance = std::max(noise * std::abs(last), floor);

  BlowupEstimate est;
  est.r_m = last;
  double spread = 0.0;
  double prev_change = HUGE_VAL;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = radii[i] + gaps[i];
    spread = std::max(spread, std::abs(m - last));
    if (i > 0) {
      const double change = std::abs(m - (radii[i - 1] + gaps[i - 1]));
      if (change > prev_change + tolerance) est.consistent = false;
      prev_change = change;
    }
  }
  est.r_m_err = spread + floor;
  if (!est.consistent) est.r_m_err = std::max(10 * spread, gaps[n - 1]) + floor;
  return est;
}

BlowupEstimate detect_blowup(std::span<const double> radii, std::span<const double> slopes, double T) {
  require_positive("T", T);
  std::vector<double> gaps(slopes.size());
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (!(slopes[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "blow-up estimator requires U' > 0 on the tail");
    }
    gaps[i] = 2 * T / slopes[i];
  }
  return estimate_blowup(radii, gaps);
}

RadialSolution integrate_radial(const Params& params, const SolverOptions& opts) {
  params.validate();
  opts.validate();
  const double T = params.T;
  const double c = params.coupling();
  const double u_cut = opts.resolved_u_cut(params);
  if (u_cut <= params.X) {
    throw Error(ErrorCode::InvalidArgument, "u_cut must exceed the central potential X");
  }

  RadialSolution sol;
  sol.params = params;
  sol.u_cut = u_cut;
  sol.origin = series_origin(params, opts.rtol * 1e-2);

  auto push = [&sol](double r, double U, double dU, double Y, double dY) {
    sol.r.push_back(r);
    sol.U.push_back(U);
    sol.dU.push_back(dU);
    sol.Y.push_back(Y);
    sol.dY.push_back(dY);
    sol.d2U.push_back(curvature_U(sol.params, r, U, dU));
    sol.d2Y.push_back(curvature_Y(sol.params, r, dU, Y, dY));
  };

  std::deque<TailSample> tail;
  auto remember = [&](double r, double gap) {
    tail.push_back({r, gap});
    if (tail.size() > opts.tail_points) tail.pop_front();
  };

  const ode::StepSizeController controller;
  std::size_t steps = 0;
  auto count_step = [&] {
    if (++steps > opts.max_steps) {
      throw Error(ErrorCode::MaxStepsExceeded,
                  "blow-up not reached within " + std::to_string(opts.max_steps) + " steps");
    }
  };

  // Radius as the independent variable.
  const auto radial_rhs = [T, c](double r, const ode::State<4>& y) -> ode::State<4> {
    return {y[1], y[1] * y[1] / (2 * T) + c * y[0] - y[1] / r, y[3], y[1] * y[3] / T + c * y[2] - y[3] / r};
  };

  double x = sol.origin.r_eps;
  const SolutionPoint start = sol.origin.at(x);
  ode::State<4> y{start.U, start.dU, start.Y, start.dY};
  ode::State<4> f = radial_rhs(x, y);
  push(x, y[0], y[1], y[2], y[3]);
  double h = x;

  while (true) {
    count_step();
    const auto step = ode::dopri5_step<4>(radial_rhs, x, y, f, h, opts.rtol, opts.atol);
    if (step.error <= 1.0) {
      if (step.y[0] >= u_cut) break;
      x += h;
      y = step.y;
      f = step.dydx;
      push(x, y[0], y[1], y[2], y[3]);
      if (y[1] > 0.0) remember(x, 2 * T / y[1]);
      if (y[1] > 0.0 && 2 * T / y[1] < opts.switch_gap * x) break;
    }
    h = controller.propose(h, step.error);
    if (h < 1e-14 * x) {
      throw Error(ErrorCode::ToleranceFailure, "step size underflow at r = " + std::to_string(x));
    }
  }
  sol.interior_nodes = sol.r.size();

  if (!(y[1] > 0.0)) {
    throw Error(ErrorCode::ToleranceFailure, "potential is not increasing at the hand-over radius");
  }

  // Potential as the independent variable: z = (r, ln U', Y/U', Y'/U'^2).
  const auto potential_rhs = [T, c](double u, const ode::State<4>& z) -> ode::State<4> {
    const double inv = std::exp(-z[1]);
    const double inv2 = inv * inv;
    const double excess = c * u * inv2 - inv / z[0];
    const double dp = 1 / (2 * T) + excess;
    return {inv, dp, z[3] - z[2] * dp, c * z[2] * inv2 - z[3] * inv / z[0] - 2 * z[3] * excess};
  };

  double u = y[0];
  ode::State<4> z{x, std::log(y[1]), y[2] / y[1], y[3] / (y[1] * y[1])};
  ode::State<4> g = potential_rhs(u, z);
  double hu = 0.1 * T;
  bool storing = true;

  while (u < u_cut) {
    count_step();
    double trial = std::min(hu, u_cut - u);
    if (storing) trial = std::min(trial, 0.5 * T);
    const auto step = ode::dopri5_step<4>(potential_rhs, u, z, g, trial, opts.rtol, opts.atol);
    if (step.error <= 1.0) {
      const bool last = trial >= u_cut - u;
      u = last ? u_cut : u + trial;
      z = step.y;
      g = step.dydx;
      const double gap = 2 * T * std::exp(-z[1]);
      remember(z[0], gap);
      if (storing) {
        if (gap < opts.store_gap * z[0] || !(z[0] > sol.r.back())) {
          storing = false;
        } else {
          const double slope = std::exp(z[1]);
          push(z[0], u, slope, z[2] * slope, z[3] * slope * slope);
        }
      }
      // Once the non-asymptotic terms are below rounding, the rest of the
      // trajectory is the pure logarithmic blow-up and is advanced in closed form.
      const double inv = std::exp(-z[1]);
      const double excess = c * u * inv * inv + inv / z[0];
      if (!storing && u < u_cut && 2 * T * excess < 1e-17) {
        // Remaining system: r' = e^{-p}, p' = 1/(2T), s' = t - s/(2T), t' = 0.
        const double span = u_cut - u;
        const double p_end = z[1] + span / (2 * T);
        z[0] += 2 * T * (inv - std::exp(-p_end));
        z[1] = p_end;
        z[2] = 2 * T * z[3] + (z[2] - 2 * T * z[3]) * std::exp(-span / (2 * T));
        u = u_cut;
        remember(z[0], 2 * T * std::exp(-z[1]));
        break;
      }
    }
    hu = controller.propose(trial, step.error);
    if (hu < 1e-14 * std::max(1.0, std::abs(u))) {
      throw Error(ErrorCode::ToleranceFailure, "step size underflow at U = " + std::to_string(u));
    }
  }

  std::vector<double> tail_r, tail_gap;
  for (const auto& s : tail) {
    tail_r.push_back(s.r);
    tail_gap.push_back(s.gap);
  }
  const BlowupEstimate blowup = estimate_blowup(tail_r, tail_gap, 10 * opts.rtol);
  sol.r_m = blowup.r_m;
  sol.r_m_err = blowup.r_m_err;
  sol.blowup_consistent = blowup.consistent;
  sol.tail_gap = (z[0] - sol.r.back()) + 2 * T * std::exp(-z[1]);
  sol.drm_dX = -z[2];
  sol.steps = steps;

  for (std::size_t i = 0; i < sol.size(); ++i) {
    if (i > 0 && sol.U[i] < sol.U[i - 1]) sol.monotone = false;
    if (!(sol.Y[i] > 0.0)) sol.positive_sensitivity = false;
  }
  return sol;
}

SolutionPoint evaluate_on_interval(const RadialSolution& s, std::size_t i, double r) {
  const double h = s.r[i + 1] - s.r[i];
  const double t = (r - s.r[i]) / h;
  const Jet u = quintic_hermite(s.potential_jet(i), s.potential_jet(i + 1), h, t);
  const Jet y = quintic_hermite(s.sensitivity_jet(i), s.sensitivity_jet(i + 1), h, t);
  return {u.f, u.df, y.f, y.df};
}

SolutionPoint evaluate_tail(const RadialSolution& s, double r) {
  const std::size_t n = s.size() - 1;
  const double gap = s.tail_gap;
  const double dist = gap - (r - s.r[n]);
  if (gap <= 0.0 || dist <= 0.0) {
    throw Error(ErrorCode::OutOfSupport, "radius " + std::to_string(r) + " is outside the support");
  }
  const double T = s.params.T;
  return {s.U[n] - 2 * T * std::log(dist / gap), 2 * T / dist, s.Y[n] * gap / dist, s.Y[n] * gap / (dist * dist)};
}

namespace {

std::size_t locate(const RadialSolution& s, double r) {
  const auto it = std::upper_bound(s.r.begin(), s.r.end(), r);
  const auto idx = static_cast<std::size_t>(it - s.r.begin());
  return std::min(idx == 0 ? 0 : idx - 1, s.size() - 2);
}

void check_support(const RadialSolution& s, double r) {
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be non-negative");
  if (r >= s.r_m) {
    throw Error(ErrorCode::OutOfSupport,
                "radius " + std::to_string(r) + " is outside the support r_m = " + std::to_string(s.r_m));
  }
}

}  // namespace

SolutionPoint evaluate(const RadialSolution& s, double r) {
  check_support(s, r);
  if (r < s.r.front()) return s.origin.at(r);
  if (r > s.r.back()) return evaluate_tail(s, r);
  const std::size_t i = locate(s, r);
  if (r == s.r[i]) return {s.U[i], s.dU[i], s.Y[i], s.dY[i]};
  if (r == s.r[i + 1]) return {s.U[i + 1], s.dU[i + 1], s.Y[i + 1], s.dY[i + 1]};
  return evaluate_on_interval(s, i, r);
}

SolutionJets evaluate_jets(const RadialSolution& s, double r) {
  check_support(s, r);
  const auto& o = s.origin;
  if (r < s.r.front()) {
    const SolutionPoint p = o.at(r);
    return {{p.U, p.dU, 2 * o.u2 + 12 * o.u4 * r * r}, {p.Y, p.dY, 2 * o.y2 + 12 * o.y4 * r * r}};
  }
  if (r > s.r.back()) {
    const SolutionPoint p = evaluate_tail(s, r);
    const double dist = s.tail_gap - (r - s.r.back());
    return {{p.U, p.dU, p.dU / dist}, {p.Y, p.dY, 2 * p.dY / dist}};
  }
  const std::size_t i = locate(s, r);
  const double h = s.r[i + 1] - s.r[i];
  const double t = (r - s.r[i]) / h;
  return {quintic_hermite(s.potential_jet(i), s.potential_jet(i + 1), h, t),
          quintic_hermite(s.sensitivity_jet(i), s.sensitivity_jet(i + 1), h, t)};
}

ResidualReport check_residual(const RadialSolution& s, double residual_tol) {
  const Params& p = s.params;
  const double T = p.T;
  const double c = p.coupling();
  const double kinetic = p.hbar * p.hbar / (2 * p.m);

  ResidualReport rep;
  rep.residual_tol = residual_tol;
  rep.closure_tol = 10 * residual_tol;

  auto amplitude = [&](double r) { return std::exp(-(evaluate(s, r).U - p.X) / (2 * T)); };

  for (std::size_t i = 0; i + 1 < s.interior_nodes; ++i) {
    const double r = 0.5 * (s.r[i] + s.r[i + 1]);
    const SolutionJets j = evaluate_jets(s, r);

    const double res = j.U.d2f + j.U.df / r - j.U.df * j.U.df / (2 * T) - c * j.U.f;
    const double scale = 1 + c * std::abs(j.U.f) + j.U.df * j.U.df / (2 * T) + std::abs(j.U.df) / r;
    rep.max_scaled_residual = std::max(rep.max_scaled_residual, std::abs(res) / scale);

    const double yres = j.Y.d2f + j.Y.df / r - j.U.df * j.Y.df / T - c * j.Y.f;
    const double yscale =
        1 + c * std::abs(j.Y.f) + std::abs(j.U.df * j.Y.df) / T + std::abs(j.Y.df) / r + std::abs(j.Y.d2f);
    rep.max_sensitivity_residual = std::max(rep.max_sensitivity_residual, std::abs(yres) / yscale);
    ++rep.residual_points;

    const double R = std::exp(-(j.U.f - p.X) / (2 * T));
    const double h = 1e-2 * std::min(s.r_m - r, s.r_m);
    if (R < 1e-2 || r - 2 * h <= 0.0) continue;
    const double rm2 = amplitude(r - 2 * h), rm1 = amplitude(r - h), rp1 = amplitude(r + h),
                 rp2 = amplitude(r + 2 * h);
    const double d1 = (rm2 - 8 * rm1 + 8 * rp1 - rp2) / (12 * h);
    const double d2 = (-rm2 + 16 * rm1 - 30 * R + 16 * rp1 - rp2) / (12 * h * h);
    const double reconstructed = -kinetic * (d2 + d1 / r) / R;
    // Same normalization as the residual: c (reconstructed - U) equals the residual exactly.
    rep.max_closure_error = std::max(rep.max_closure_error, c * std::abs(reconstructed - j.U.f) / scale);
    ++rep.closure_points;
  }
  return rep;
}

}  // namespace madelung
