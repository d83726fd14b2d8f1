#pragma once

#include <cmath>

#include "core.hpp"

namespace qpgreen {

enum class WindowShape {
  figure_bump,       ///< exp(2 e^{1/(1-x)} / (x-2)) on the rescaled transition x in (1, 2)
  polynomial_blend,  ///< C^2 quintic smoothstep
};

/// Smooth truncation of the lattice sum. Equal to one for normalized radius <= inner and zero
/// for radius >= outer.
struct WindowProfile {
  double inner = 1.0;
  double outer = 2.0;
  WindowShape shape = WindowShape::figure_bump;
  bool separable = true;     ///< chi(s) chi(t) instead of chi(sqrt(s^2+t^2))
  bool x_dependent = false;  ///< argument (x + m d1)/a instead of m d1/a

  void validate() const {
    if (!(inner > 0.0) || !(outer > inner))
      throw configuration_error("window radii must satisfy 0 < inner < outer");
  }

  /// One-dimensional profile psi(|u|).
  double profile(double u) const {
    const double au = std::abs(u);
    if (au <= inner) return 1.0;
    if (au >= outer) return 0.0;
    const double t = (au - inner) / (outer - inner);
    if (shape == WindowShape::polynomial_blend) {
      const double s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
      return 1.0 - s;
    }
    const double x = 1.0 + t;
    return std::exp(2.0 * std::exp(1.0 / (1.0 - x)) / (x - 2.0));
  }

  double value(double s, double t) const {
    if (separable) return profile(s) * profile(t);
    return profile(std::hypot(s, t));
  }
};

/// Default window for figure reproduction: separable, x-dependent figure bump.
inline WindowProfile figure_window() {
  WindowProfile w;
  w.separable = true;
  w.x_dependent = true;
  return w;
}

/// Default window for boundary-integral assembly.
inline WindowProfile bie_window() { return WindowProfile{}; }

inline double window_value(const WindowProfile& w, double s, double t) { return w.value(s, t); }

}  // namespace qpgreen
