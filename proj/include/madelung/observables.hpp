/**
 * @file observables.hpp
 * @brief Canonical density rho = exp(-U/T)/Z and the thermodynamic-analog
 *        observables of a solved state.
 *
 * Integrals run over the solver grid with a Gauss-Legendre rule refined by
 * panel halving until two levels agree; the segment between the last node
 * and r_m is closed analytically with the blow-up model rho ~ C (r_m - r)^2.
 * Weights are shifted by exp(X/T) internally so that states with X >> T do
 * not underflow; Z itself may underflow to 0 while log_Z stays exact.
 */
#pragma once

#include "madelung/params.hpp"
#include "madelung/solver.hpp"

namespace madelung {

struct QuadratureOptions {
  double rel_tol = 1e-12;
  int max_level = 8;
  std::size_t gauss_points = 8;

  void validate() const;
};

struct PartitionFunction {
  double Z = 0;
  double log_Z = 0;
  /// Z * exp(X/T): the integral of r exp(-(U - X)/T).
  double shifted = 0;
  int level = 0;
};

/// A quadrature result together with the refinement level it converged at.
struct Moment {
  double value = 0;
  int level = 0;
};

struct KineticEnergy {
  double quadrature = 0;
  /// Closed-form value T.
  double analytic = 0;
  int level = 0;
};

struct FreeEnergy {
  /// -T ln Z
  double from_partition = 0;
  /// U - T H
  double from_entropy = 0;
};

[[nodiscard]] PartitionFunction partition_function(const RadialSolution& solution, const QuadratureOptions& q = {});

/// exp(-U(r)/T)/Z for r < r_m, 0 beyond.
[[nodiscard]] double density(const RadialSolution& solution, const PartitionFunction& Z, double r);

/// 2*pi * integral of r rho dr, computed one refinement level above Z.
[[nodiscard]] double normalization(const RadialSolution& solution, const PartitionFunction& Z,
                                   const QuadratureOptions& q = {});

[[nodiscard]] Moment internal_energy(const RadialSolution& solution, const PartitionFunction& Z,
                                     const QuadratureOptions& q = {});

/// Average of K(r) = m r^2 omega^2 / 2 = r U'(r) / 2.
[[nodiscard]] KineticEnergy kinetic_energy(const RadialSolution& solution, const PartitionFunction& Z,
                                           const QuadratureOptions& q = {});

/// -integral of rho ln rho, evaluated pointwise from the density.
[[nodiscard]] Moment shannon_entropy(const RadialSolution& solution, const PartitionFunction& Z,
                                     const QuadratureOptions& q = {});

[[nodiscard]] FreeEnergy free_energy(double T, double log_Z, double Ubar, double H) noexcept;

/// Average of the sensitivity Y = dU/dX.
[[nodiscard]] Moment y_average(const RadialSolution& solution, const PartitionFunction& Z,
                               const QuadratureOptions& q = {});

/// sqrt(U'(r)/(r m)); the r -> 0 limit is sqrt(U''(0)/m).
[[nodiscard]] double angular_velocity(const RadialSolution& solution, double r);

[[nodiscard]] constexpr double total_energy(double Ubar, double Kbar) noexcept { return Ubar + Kbar; }

struct ThermoState {
  Params params;
  double Z = 0;
  double log_Z = 0;
  double Ubar = 0;
  double Kbar = 0;
  double Ebar = 0;
  double H = 0;
  double F = 0;
  /// U - T H, the second route to F.
  double F_entropy = 0;
  double Ybar = 0;
  double r_m = 0;
  double r_m_err = 0;
  double L_s = 0;
  double normalization = 0;
  /// Highest refinement level any of the integrals needed.
  int level = 0;

  /// H - U/T - ln Z; zero for the canonical density.
  [[nodiscard]] double entropy_identity() const noexcept { return H - Ubar / params.T - log_Z; }
};

[[nodiscard]] ThermoState compute_state(const RadialSolution& solution, const QuadratureOptions& q = {});

}  // namespace madelung
