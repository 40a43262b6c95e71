#pragma once

#include <cmath>
#include <cstddef>

#include <optional>

#include "madelung/error.hpp"
#include "madelung/observables.hpp"
#include "madelung/solver.hpp"

namespace madelung::testing {

/// Error code thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<ErrorCode> thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// U = X, Y = 1 on a disk of radius a; not a solution of the radial equation,
/// but every observable has a closed form.
inline RadialSolution flat_solution(double T, double X, double a, std::size_t nodes = 64) {
  RadialSolution s;
  s.params.T = T;
  s.params.X = X;
  s.origin.X = X;
  s.origin.r_eps = a / static_cast<double>(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    s.r.push_back(s.origin.r_eps + (a - s.origin.r_eps) * static_cast<double>(i) / static_cast<double>(nodes - 1));
    s.U.push_back(X);
    s.dU.push_back(0.0);
    s.Y.push_back(1.0);
    s.dY.push_back(0.0);
    s.d2U.push_back(0.0);
    s.d2Y.push_back(0.0);
  }
  s.interior_nodes = nodes;
  s.r_m = a;
  s.tail_gap = 0.0;
  s.u_cut = X;
  return s;
}

/// ThermoState of the flat family, in closed form.
inline ThermoState flat_state(double T, double X, double a) {
  const double area = std::acos(-1.0) * a * a;
  ThermoState st;
  st.params.T = T;
  st.params.X = X;
  st.log_Z = std::log(area) - X / T;
  st.Z = std::exp(st.log_Z);
  st.Ubar = X;
  st.Kbar = 0.0;
  st.Ebar = X;
  st.H = std::log(area);
  st.F = -T * st.log_Z;
  st.F_entropy = st.Ubar - T * st.H;
  st.Ybar = 1.0;
  st.r_m = a;
  st.L_s = 2 * std::acos(-1.0) * a;
  st.normalization = 1.0;
  return st;
}

}  // namespace madelung::testing
