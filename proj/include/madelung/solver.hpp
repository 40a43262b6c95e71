/**
 * @file solver.hpp
 * @brief Radial self-consistency equation for the Madelung potential.
 *
 * Solves U'' + U'/r - (U')^2/(2T) - (4mT/hbar^2) U = 0 with U(0) = X, U'(0) = 0
 * jointly with the sensitivity Y = dU/dX, which obeys
 * Y'' + Y'/r - U'Y'/T - (4mT/hbar^2) Y = 0, Y(0) = 1, Y'(0) = 0.
 *
 * The potential diverges logarithmically at a finite radius r_m. Integration
 * runs in r until the blow-up is close, then continues with U as the
 * independent variable (state r, ln U', Y/U', Y'/U'^2), which stays bounded
 * all the way to very large cut-off potentials.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "madelung/hermite.hpp"
#include "madelung/params.hpp"

namespace madelung {

struct SolverOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double residual_tol = 1e-6;
  /// Potential at which integration stops; <= 0 selects 1e4 * max(X, T).
  double u_cut = 0.0;
  std::size_t max_steps = 500000;
  /// Number of trailing samples used by the blow-up estimator.
  std::size_t tail_points = 8;
  /// Switch to U as the independent variable once 2T/U' < switch_gap * r.
  double switch_gap = 1e-3;
  /// Stop storing grid nodes once 2T/U' < store_gap * r; the tail model covers the rest.
  double store_gap = 1e-10;

  void validate() const;
  [[nodiscard]] double resolved_u_cut(const Params& params) const;
};

/// Potential, slope, sensitivity and sensitivity slope at one radius.
struct SolutionPoint {
  double U = 0;
  double dU = 0;
  double Y = 0;
  double dY = 0;
};

/// Even power series of U and Y about the origin, used below r_eps.
struct OriginExpansion {
  double X = 0;
  double u2 = 0;
  double u4 = 0;
  double y2 = 0;
  double y4 = 0;
  double r_eps = 0;

  [[nodiscard]] SolutionPoint at(double r) const noexcept;
};

struct BlowupEstimate {
  double r_m = 0;
  double r_m_err = 0;
  /// False when successive estimates did not contract; r_m_err is inflated then.
  bool consistent = true;
};

struct RadialSolution {
  Params params;
  OriginExpansion origin;

  std::vector<double> r;
  std::vector<double> U;
  std::vector<double> dU;
  std::vector<double> Y;
  std::vector<double> dY;
  /// Curvatures at the nodes, from the ODE; used by the dense output.
  std::vector<double> d2U;
  std::vector<double> d2Y;

  /// Nodes [0, interior_nodes) were produced with r as the independent variable.
  std::size_t interior_nodes = 0;

  double r_m = 0;
  double r_m_err = 0;
  bool blowup_consistent = true;
  /// Potential at which integration stopped.
  double u_cut = 0;
  /// r_m - r.back(), kept separately because the difference is far below ulp(r_m) scale errors.
  double tail_gap = 0;
  /// dr_m/dX from the limit of -Y/U' at the cut-off.
  double drm_dX = 0;

  std::size_t steps = 0;
  bool monotone = true;
  bool positive_sensitivity = true;

  [[nodiscard]] std::size_t size() const noexcept { return r.size(); }
  [[nodiscard]] Jet potential_jet(std::size_t i) const noexcept;
  [[nodiscard]] Jet sensitivity_jet(std::size_t i) const noexcept;
};

[[nodiscard]] OriginExpansion series_origin(const Params& params, double tol);

[[nodiscard]] RadialSolution integrate_radial(const Params& params, const SolverOptions& opts = {});

/// Blow-up radius from trailing samples, each with its gap estimate 2T/U'.
/// `noise` is the relative level below which changes between successive
/// estimates count as converged.
[[nodiscard]] BlowupEstimate estimate_blowup(std::span<const double> radii, std::span<const double> gaps,
                                             double noise = 0.0);

/// Blow-up radius from trailing samples of U'(r), using r_m ~ r + 2T/U'(r).
[[nodiscard]] BlowupEstimate detect_blowup(std::span<const double> radii, std::span<const double> slopes, double T);

/// Dense output; throws OutOfSupport for r >= r_m.
[[nodiscard]] SolutionPoint evaluate(const RadialSolution& solution, double r);

/// Potential and sensitivity jets (value, slope, curvature) at r.
struct SolutionJets {
  Jet U;
  Jet Y;
};
[[nodiscard]] SolutionJets evaluate_jets(const RadialSolution& solution, double r);

/// Dense output restricted to grid interval [r[i], r[i+1]].
[[nodiscard]] SolutionPoint evaluate_on_interval(const RadialSolution& solution, std::size_t i, double r);

/// Asymptotic model U ~ U_N - 2T ln((r_m - r)/(r_m - r_N)) beyond the last node.
[[nodiscard]] SolutionPoint evaluate_tail(const RadialSolution& solution, double r);

struct ResidualReport {
  double max_scaled_residual = 0;
  double max_sensitivity_residual = 0;
  double max_closure_error = 0;
  std::size_t residual_points = 0;
  std::size_t closure_points = 0;
  double residual_tol = 0;
  double closure_tol = 0;

  [[nodiscard]] bool passed() const noexcept {
    return max_scaled_residual <= residual_tol && max_sensitivity_residual <= residual_tol &&
           max_closure_error <= closure_tol;
  }
};

/// Radial-equation residual at interval midpoints of the interior grid and the
/// Madelung closure -(hbar^2/2m)(R'' + R'/r)/R = U with R = exp(-(U - X)/(2T))
/// differentiated by finite differences.
[[nodiscard]] ResidualReport check_residual(const RadialSolution& solution, double residual_tol);

}  // namespace madelung
