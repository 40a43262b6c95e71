/**
 * @file limits.hpp
 * @brief The T -> 0 Bessel ground state and T -> infinity diagnostics.
 */
#pragma once

#include <span>
#include <vector>

#include "madelung/observables.hpp"
#include "madelung/params.hpp"
#include "madelung/solver.hpp"

namespace madelung {

/// J0(x) for x >= 0: power series below 5, normalized Miller recurrence above.
[[nodiscard]] double bessel_j0(double x);

/// First zero of J0 by bisection on [lo, hi]; the default bracket is [2, 3].
[[nodiscard]] double bessel_first_zero(double lo = 2.0, double hi = 3.0);

struct GroundState {
  double X = 0;
  double k = 0;
  double r_0 = 0;
  double A = 0;

  /// A J0(k r) inside the well, 0 outside.
  [[nodiscard]] double amplitude(double r) const;
  [[nodiscard]] double density(double r) const;
};

/// Particle in a cylindrical well of energy X; A from normalization quadrature.
[[nodiscard]] GroundState ground_state(double X, const Params& units = {});

/// 2*pi * integral of r (A J0(k r))^2 over the well, by quadrature.
[[nodiscard]] double ground_state_norm(const GroundState& g);

/// Max |a_i - b_i| over shared samples.
[[nodiscard]] double profile_sup_norm(std::span<const double> a, std::span<const double> b);

struct SmallTDeviation {
  double sup_norm = 0;
  double r_m_gap = 0;
  double r_0 = 0;
  /// Upper end of the compared range, min(r_m, r_0).
  double r_max = 0;
};

/// Compares sqrt(rho(r)/rho(0)) with J0(k r) on [0, min(r_m, r_0)].
[[nodiscard]] SmallTDeviation small_T_deviation(const RadialSolution& solution, const PartitionFunction& Z,
                                                std::size_t samples = 2000);

struct LargeTReport {
  std::vector<double> T;
  std::vector<double> r_m;
  std::vector<double> Ubar;
  std::vector<double> Ebar;
  bool r_m_decreasing = true;
  bool Ubar_increasing = true;
  bool Ebar_increasing = true;
  /// max |Kbar - T| / T over the states.
  double max_kinetic_error = 0;

  [[nodiscard]] bool passed(double kinetic_tol = 1e-4) const noexcept {
    return r_m_decreasing && Ubar_increasing && Ebar_increasing && max_kinetic_error <= kinetic_tol;
  }
};

/// States are ordered by T before the checks; X should be common to all.
[[nodiscard]] LargeTReport large_T_diagnostics(std::span<const ThermoState> states);

}  // namespace madelung
