/**
 * @file dopri5.hpp
 * @brief Embedded Dormand-Prince 5(4) step with FSAL and a step-size controller.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace madelung::ode {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct StepResult {
  State<N> y;       ///< 5th-order solution at x + h
  State<N> dydx;    ///< derivative at x + h (first stage of the next step)
  double error = 0; ///< max-norm of the scaled local error estimate
};

/// One Dormand-Prince step. `f0` is the derivative at (x, y).
template <std::size_t N, class Rhs>
[[nodiscard]] StepResult<N> dopri5_step(const Rhs& rhs, double x, const State<N>& y, const State<N>& f0,
                                        double h, double rtol, double atol) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  State<N> tmp{};
  auto stage = [&](auto&& combine) {
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
  };

  stage([&](std::size_t i) { return a21 * f0[i]; });
  const State<N> k2 = rhs(x + c2 * h, tmp);
  stage([&](std::size_t i) { return a31 * f0[i] + a32 * k2[i]; });
  const State<N> k3 = rhs(x + c3 * h, tmp);
  stage([&](std::size_t i) { return a41 * f0[i] + a42 * k2[i] + a43 * k3[i]; });
  const State<N> k4 = rhs(x + c4 * h, tmp);
  stage([&](std::size_t i) { return a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
  const State<N> k5 = rhs(x + c5 * h, tmp);
  stage([&](std::size_t i) { return a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });
  const State<N> k6 = rhs(x + h, tmp);

  StepResult<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out.y[i] = y[i] + h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  }
  out.dydx = rhs(x + h, out.y);

  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double local =
        h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * out.dydx[i]);
    const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(out.y[i]));
    err = std::max(err, std::abs(local) / scale);
  }
  out.error = std::isfinite(err) ? err : HUGE_VAL;
  for (std::size_t i = 0; i < N; ++i) {
    if (!std::isfinite(out.y[i])) out.error = HUGE_VAL;
  }
  return out;
}

/** @brief Safety-clamped power-law step-size update. */
struct StepSizeController {
  double safety = 0.9;
  double fac_min = 0.2;
  double fac_max = 5.0;

  [[nodiscard]] double propose(double h, double err_norm) const {
    if (err_norm <= 0.0) return h * fac_max;
    double fac = safety * std::pow(err_norm, -0.2);
    if (!std::isfinite(fac)) fac = fac_min;
    return h * std::clamp(fac, fac_min, fac_max);
  }
};

}  // namespace madelung::ode
