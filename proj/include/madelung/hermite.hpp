#pragma once

namespace madelung {

/// Value and first two derivatives of a function at a node.
struct Jet {
  double f = 0;
  double df = 0;
  double d2f = 0;
};

/// Quintic Hermite interpolation on [a, a + h] matching value, slope and
/// curvature at both ends. `t` is the local coordinate in [0, 1].
[[nodiscard]] inline Jet quintic_hermite(const Jet& left, const Jet& right, double h, double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;

  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h3 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 0.5 * t3 - t4 + 0.5 * t5;

  const double d0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double d2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
  const double d3 = -d0;
  const double d4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double d5 = 1.5 * t2 - 4 * t3 + 2.5 * t4;

  const double s0 = -60 * t + 180 * t2 - 120 * t3;
  const double s1 = -36 * t + 96 * t2 - 60 * t3;
  const double s2 = 1 - 9 * t + 18 * t2 - 10 * t3;
  const double s3 = -s0;
  const double s4 = -24 * t + 84 * t2 - 60 * t3;
  const double s5 = 3 * t - 12 * t2 + 10 * t3;

  const double a0 = left.f, a1 = h * left.df, a2 = h * h * left.d2f;
  const double b0 = right.f, b1 = h * right.df, b2 = h * h * right.d2f;

  Jet out;
  out.f = h0 * a0 + h1 * a1 + h2 * a2 + h3 * b0 + h4 * b1 + h5 * b2;
  out.df = (d0 * a0 + d1 * a1 + d2 * a2 + d3 * b0 + d4 * b1 + d5 * b2) / h;
  out.d2f = (s0 * a0 + s1 * a1 + s2 * a2 + s3 * b0 + s4 * b1 + s5 * b2) / (h * h);
  return out;
}

}  // namespace madelung
