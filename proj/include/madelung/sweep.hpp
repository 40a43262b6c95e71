/**
 * @file sweep.hpp
 * @brief (T, X) grids of solved states, log-log scaling fits and the
 *        finite-difference checks of the differential identities.
 */
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "madelung/observables.hpp"
#include "madelung/solver.hpp"

namespace madelung {

struct StateRow {
  ThermoState state;
  /// "ok", a flagged invariant ("non_monotone", "nonpositive_sensitivity") or an error tag.
  std::string status = "ok";
  double solver_rtol = 0;
  double quadrature_tol = 0;

  [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
};

struct StateTable {
  std::vector<StateRow> rows;

  /// Sorted distinct values per axis.
  [[nodiscard]] std::vector<double> T_values() const;
  [[nodiscard]] std::vector<double> X_values() const;
  /// Successful rows at fixed X (or T), sorted along the other axis.
  [[nodiscard]] std::vector<const StateRow*> at_X(double X) const;
  [[nodiscard]] std::vector<const StateRow*> at_T(double T) const;
  [[nodiscard]] const StateRow* find(double T, double X) const;
};

struct SweepOptions {
  SolverOptions solver;
  QuadratureOptions quadrature;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

[[nodiscard]] ThermoState solve_state(const Params& params, const SweepOptions& opts = {});

/// Rows ordered T-major; per-row failures end up in the status column.
[[nodiscard]] StateTable sweep(std::span<const double> T_values, std::span<const double> X_values,
                               const SweepOptions& opts = {}, const Params& units = {});

/// log10-spaced grid of n values from lo to hi inclusive.
[[nodiscard]] std::vector<double> log_grid(double lo, double hi, std::size_t n);

enum class FitModel { PowerLawT, PowerLawX, PowerLaw };

[[nodiscard]] std::string_view to_string(FitModel model) noexcept;

struct FitWindow {
  double lo = 0;
  double hi = 0;
};

/// y = coefficient * x^exponent by least squares in log-log.
struct FitResult {
  FitModel model = FitModel::PowerLaw;
  double coefficient = 0;
  double exponent = 0;
  FitWindow window;
  /// RMS of the log residuals.
  double residual_norm = 0;
  std::size_t points = 0;
};

/// Throws InsufficientData with fewer than `min_points` samples inside the window.
[[nodiscard]] FitResult fit_power_law(std::span<const double> x, std::span<const double> y, FitWindow window,
                                      std::size_t min_points = 4);

[[nodiscard]] FitResult fit_scaling_T(const StateTable& table, double X, FitWindow window);

struct ScalingXFit {
  FitResult small;
  FitResult large;
};
[[nodiscard]] ScalingXFit fit_scaling_X(const StateTable& table, double T, FitWindow small, FitWindow large);

struct MonotonicityReport {
  std::size_t checked = 0;
  std::vector<std::string> violations;

  [[nodiscard]] bool passed() const noexcept { return violations.empty(); }
};

/// Ubar and Kbar increasing and r_m decreasing in T at fixed X; Ubar increasing
/// and r_m decreasing in X at fixed T.
[[nodiscard]] MonotonicityReport check_monotonicity(const StateTable& table);

using StateProvider = std::function<ThermoState(const Params&)>;

/// Provider that solves each state with `opts`.
[[nodiscard]] StateProvider solving_provider(const SweepOptions& opts = {});

/// Provider that looks states up in a table; InsufficientData when missing.
[[nodiscard]] StateProvider table_provider(const StateTable& table);

struct Deltas {
  double dT = 0;
  double dX = 0;
};

/// Relative steps times the center values.
[[nodiscard]] Deltas relative_deltas(const Params& center, double rel);

struct FirstLawReport {
  Deltas deltas;
  /// |dU - T dH - Ybar dX| / max term at fixed T.
  double residual_X = 0;
  /// |dU - T dH| / max term at fixed X.
  double residual_T = 0;
  /// As residual_T with the <dU/dT> dT term restored.
  double residual_T_corrected = 0;
  double dU_X = 0, TdH_X = 0, YdX = 0;
  double dU_T = 0, TdH_T = 0;
  /// <dU/dT> = (Ubar + Kbar - X Ybar) / T at the center.
  double mean_dU_dT = 0;
  double Ybar = 0;
  /// Central difference of Ubar in X; compared with Ybar.
  double dUbar_dX = 0;
};

[[nodiscard]] FirstLawReport first_law_residual(const Params& center, Deltas deltas, const StateProvider& provider);

/// log2 of the residual ratio between steps d and d/2; 2 for clean central differences.
[[nodiscard]] double observed_order(double coarse, double fine) noexcept;

struct FirstLawStudy {
  FirstLawReport coarse;
  FirstLawReport fine;
  double order_X = 0;
  double order_T = 0;
  double order_T_corrected = 0;
};

[[nodiscard]] FirstLawStudy first_law_study(const Params& center, double rel_step, const StateProvider& provider);

struct TensionReport {
  Deltas deltas;
  double drm_dX = 0;
  double drm_dT = 0;
  double dLs_dT = 0;
  double sigma_X = 0;
  double sigma_T = 0;
  double sigma = 0;
  /// |dr_m/dX| or |dr_m/dT| below the threshold; the tensions are NaN then.
  bool degenerate_X = false;
  bool degenerate_T = false;
  double Ybar = 0;
  double H = 0;
};

[[nodiscard]] TensionReport boundary_tensions(const Params& center, Deltas deltas, const StateProvider& provider,
                                              double threshold = 1e-12);

struct FreeEnergyReport {
  Deltas deltas;
  /// dF vs sigma_X dL_s at fixed T.
  double residual_X = 0;
  /// dF vs -H dT + sigma_X dL_s at fixed X.
  double residual_T = 0;
  /// dF vs (sigma_X - sigma_T) dL_s at fixed X.
  double residual_sigma = 0;
  double dF_X = 0, sigmaX_dLs_X = 0;
  double dF_T = 0, HdT = 0, sigmaX_dLs_T = 0;
};

[[nodiscard]] FreeEnergyReport free_energy_differential_check(const Params& center, Deltas deltas,
                                                              const StateProvider& provider);

}  // namespace madelung
