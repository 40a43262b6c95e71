#include "madelung/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "madelung/error.hpp"
#include "madelung/quadrature.hpp"

namespace madelung {

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

// Refine until two successive levels agree.
template <class Eval>
Moment refine(const QuadratureOptions& q, const char* what, Eval&& eval) {
  double prev = eval(0);
  for (int level = 1; level <= q.max_level; ++level) {
    const double cur = eval(level);
    if (!std::isfinite(cur)) break;
    if (std::abs(cur - prev) <= q.rel_tol * std::abs(cur) + 1e-300) return {cur, level};
    prev = cur;
  }
  throw Error(ErrorCode::QuadratureFailure, std::string("quadrature for ") + what + " did not converge");
}

/// Shape of the closed-form tail: rho ~ C (r_m - r)^2 on [r_N, r_m].
struct Tail {
  double r_m = 0;
  double gap = 0;
  double log_C = 0;  // of the shifted weight exp(-(U - X)/T)
  bool empty = true;

  // Integrals over s = r_m - r in [0, gap].
  [[nodiscard]] double m0() const { return r_m * gap * gap * gap / 3 - gap * gap * gap * gap / 4; }
  [[nodiscard]] double m_log() const {
    const double g3 = gap * gap * gap, g4 = g3 * gap, lg = std::log(gap);
    return r_m * (g3 * lg / 3 - g3 / 9) - (g4 * lg / 4 - g4 / 16);
  }
};

Tail tail_of(const RadialSolution& s) {
  Tail t;
  t.r_m = s.r_m;
  t.gap = s.tail_gap;
  if (t.gap <= 0.0) return t;
  const double log_w = -(s.U.back() - s.params.X) / s.params.T;
  t.log_C = log_w - 2 * std::log(t.gap);
  t.empty = false;
  return t;
}

double shifted_weight(const Params& p, double U) { return std::exp(-(U - p.X) / p.T); }

}  // namespace

void QuadratureOptions::validate() const {
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature rel_tol must be positive and finite");
  }
  if (max_level < 1 || max_level > 20) throw Error(ErrorCode::InvalidArgument, "quadrature max_level must be in [1, 20]");
  if (gauss_points < 2) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least 2 Gauss points");
}

PartitionFunction partition_function(const RadialSolution& s, const QuadratureOptions& q) {
  q.validate();
  const GaussRule rule = gauss_legendre(q.gauss_points);
  const Tail tail = tail_of(s);
  const double tail_part = tail.empty ? 0.0 : two_pi * std::exp(tail.log_C) * tail.m0();

  const Moment m = refine(q, "Z", [&](int level) {
    return integrate_grid(s, rule, level, [&](double, const SolutionPoint& p) { return shifted_weight(s.params, p.U); }) +
           tail_part;
  });
  PartitionFunction Z;
  Z.shifted = m.value;
  Z.level = m.level;
  Z.log_Z = std::log(m.value) - s.params.X / s.params.T;
  Z.Z = std::exp(Z.log_Z);
  return Z;
}

double density(const RadialSolution& s, const PartitionFunction& Z, double r) {
  if (r >= s.r_m) return 0.0;
  const SolutionPoint p = evaluate(s, r);
  return std::exp(-(p.U - s.params.X) / s.params.T - std::log(Z.shifted));
}

double normalization(const RadialSolution& s, const PartitionFunction& Z, const QuadratureOptions& q) {
  q.validate();
  const GaussRule rule = gauss_legendre(q.gauss_points);
  const Tail tail = tail_of(s);
  const double log_shift = std::log(Z.shifted);
  double total =
      integrate_grid(s, rule, Z.level + 1,
                     [&](double, const SolutionPoint& p) { return std::exp(-(p.U - s.params.X) / s.params.T - log_shift); });
  if (!tail.empty) total += two_pi * std::exp(tail.log_C - log_shift) * tail.m0();
  return total;
}

Moment internal_energy(const RadialSolution& s, const PartitionFunction& Z, const QuadratureOptions& q) {
  q.validate();
  const GaussRule rule = gauss_legendre(q.gauss_points);
  const Tail tail = tail_of(s);
  double tail_part = 0.0;
  if (!tail.empty) {
    // U ~ U_N - 2T ln(s/gap) on the tail.
    const double U_N = s.U.back(), T = s.params.T;
    const double g3 = tail.gap * tail.gap * tail.gap, g4 = g3 * tail.gap;
    tail_part = two_pi * std::exp(tail.log_C) * (U_N * tail.m0() + 2 * T * (tail.r_m * g3 / 9 - g4 / 16));
  }
  return refine(q, "internal energy", [&](int level) {
    return (integrate_grid(s, rule, level,
                           [&](double, const SolutionPoint& p) { return shifted_weight(s.params, p.U) * p.U; }) +
            tail_part) /
           Z.shifted;
  });
}

KineticEnergy kinetic_energy(const RadialSolution& s, const PartitionFunction& Z, const QuadratureOptions& q) {
  q.validate();
  const GaussRule rule = gauss_legendre(q.gauss_points);
  const Tail tail = tail_of(s);
  const double T = s.params.T;
  double tail_part = 0.0;
  if (!tail.empty) {
    // r * (r U'/2) * C s^2 with U' = 2T/s gives T C (r_m - s)^2 s.
    const double g = tail.gap, rm = tail.r_m;
    tail_part = two_pi * std::exp(tail.log_C) * T * (rm * rm * g * g / 2 - 2 * rm * g * g * g / 3 + g * g * g * g / 4);
  }
  const Moment m = refine(q, "kinetic energy", [&](int level) {
    return (integrate_grid(s, rule, level,
                           [&](double r, const SolutionPoint& p) {
                             return shifted_weight(s.params, p.U) * 0.5 * r * p.dU;
                           }) +
            tail_part) /
           Z.shifted;
  });
  return {m.value, T, m.level};
}

Moment shannon_entropy(const RadialSolution& s, const PartitionFunction& Z, const QuadratureOptions& q) {
  q.validate();
  const GaussRule rule = gauss_legendre(q.gauss_points);
  const Tail tail = tail_of(s);
  const double log_shift = std::log(Z.shifted);
  double tail_part = 0.0;
  if (!tail.empty) {
    const double log_c = tail.log_C - log_shift;
    tail_part = -two_pi * std::exp(log_c) * (log_c * tail.m0() + 2 * tail.m_log());
  }
  return refine(q, "entropy", [&](int level) {
    return integrate_grid(s, rule, level,
                          [&](double, const SolutionPoint& p) {
                            const double rho = std::exp(-(p.U - s.params.X) / s.params.T - log_shift);
                            return rho > 0.0 ? -rho * std::log(rho) : 0.0;
                          }) +
           tail_part;
  });
}

FreeEnergy free_energy(double T, double log_Z, double Ubar, double H) noexcept {
  return {-T * log_Z, Ubar - T * H};
}

Moment y_average(const RadialSolution& s, const PartitionFunction& Z, const QuadratureOptions& q) {
  q.validate();
  const GaussRule rule = gauss_legendre(q.gauss_points);
  const Tail tail = tail_of(s);
  double tail_part = 0.0;
  if (!tail.empty) {
    // Y ~ Y_N gap / s on the tail.
    const double g = tail.gap;
    tail_part = two_pi * std::exp(tail.log_C) * s.Y.back() * g * (tail.r_m * g * g / 2 - g * g * g / 3);
  }
  return refine(q, "sensitivity average", [&](int level) {
    return (integrate_grid(s, rule, level,
                           [&](double, const SolutionPoint& p) { return shifted_weight(s.params, p.U) * p.Y; }) +
            tail_part) /
           Z.shifted;
  });
}

double angular_velocity(const RadialSolution& s, double r) {
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be non-negative");
  if (r >= s.r_m) {
    throw Error(ErrorCode::OutOfSupport, "angular velocity is unbounded at and beyond r_m = " + std::to_string(s.r_m));
  }
  const double m = s.params.m;
  if (r < s.origin.r_eps) {
    // U'/r from the series, finite at r = 0.
    return std::sqrt((2 * s.origin.u2 + 4 * s.origin.u4 * r * r) / m);
  }
  return std::sqrt(evaluate(s, r).dU / (r * m));
}

ThermoState compute_state(const RadialSolution& s, const QuadratureOptions& q) {
  const PartitionFunction Z = partition_function(s, q);
  const Moment U = internal_energy(s, Z, q);
  const KineticEnergy K = kinetic_energy(s, Z, q);
  const Moment H = shannon_entropy(s, Z, q);
  const Moment Y = y_average(s, Z, q);
  const FreeEnergy F = free_energy(s.params.T, Z.log_Z, U.value, H.value);

  ThermoState st;
  st.params = s.params;
  st.Z = Z.Z;
  st.log_Z = Z.log_Z;
  st.Ubar = U.value;
  st.Kbar = K.quadrature;
  st.Ebar = total_energy(U.value, K.quadrature);
  st.H = H.value;
  st.F = F.from_partition;
  st.F_entropy = F.from_entropy;
  st.Ybar = Y.value;
  st.r_m = s.r_m;
  st.r_m_err = s.r_m_err;
  st.L_s = two_pi * s.r_m;
  st.normalization = normalization(s, Z, q);
  st.level = std::max({Z.level, U.level, K.level, H.level, Y.level});
  return st;
}

}  // namespace madelung
