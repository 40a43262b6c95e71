#pragma once

namespace madelung {

/// Parameters of one self-trapped state. X is the central potential U(0).
struct Params {
  double T = 1.0;
  double X = 1.0;
  double hbar = 1.0;
  double m = 1.0;

  /// Throws Error(InvalidArgument) naming the offending field.
  void validate() const;

  /// Coefficient 4 m T / hbar^2 of the linear term of the radial equation.
  [[nodiscard]] double coupling() const noexcept { return 4.0 * m * T / (hbar * hbar); }
};

}  // namespace madelung
