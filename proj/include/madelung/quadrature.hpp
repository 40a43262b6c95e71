#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "madelung/solver.hpp"

namespace madelung {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

[[nodiscard]] GaussRule gauss_legendre(std::size_t n);

/// Composite rule: sum over [a, b] split into `pieces` equal panels.
template <class F>
[[nodiscard]] double integrate_panels(const GaussRule& rule, double a, double b, std::size_t pieces, F&& f) {
  const double width = (b - a) / static_cast<double>(pieces);
  double sum = 0.0;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double lo = a + width * static_cast<double>(k);
    const double mid = lo + 0.5 * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      panel += rule.weights[i] * f(mid + 0.5 * width * rule.nodes[i]);
    }
    sum += 0.5 * width * panel;
  }
  return sum;
}

/// 2*pi * integral of r * f(r, point) over [0, r_N]: the origin-series core
/// plus every grid interval, each split into 2^level panels. The tail
/// [r_N, r_m] is left to the caller's closed-form closure.
template <class F>
[[nodiscard]] double integrate_grid(const RadialSolution& s, const GaussRule& rule, int level, F&& f) {
  const std::size_t pieces = std::size_t{1} << level;
  double sum = integrate_panels(rule, 0.0, s.r.front(), pieces, [&](double r) { return r * f(r, s.origin.at(r)); });
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    sum += integrate_panels(rule, s.r[i], s.r[i + 1], pieces,
                            [&](double r) { return r * f(r, evaluate_on_interval(s, i, r)); });
  }
  return 2 * std::numbers::pi * sum;
}

}  // namespace madelung
