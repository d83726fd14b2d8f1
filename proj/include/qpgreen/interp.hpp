#pragma once

#include <cmath>
#include <vector>

#include "core.hpp"
#include "surface.hpp"

namespace qpgreen {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

/// Cardinal function of even-N trigonometric interpolation with period d, the Nyquist mode
/// split evenly between +N/2 and -N/2 so that real samples interpolate to real values.
inline double periodic_sinc(double t, int N, double d) {
  const double u = pi * t / d;
  const double s = std::sin(u);
  if (std::abs(s) < 1e-14) return 1.0;  // t a multiple of d; N even
  return std::sin(N * u) / (N * std::tan(u));
}

/// Fills w[r] = periodic_sinc(t - r d / N), r = 0..N-1.
inline void sinc_weights(double t, int N, double d, std::vector<double>& w) {
  w.resize(N);
  for (int r = 0; r < N; ++r) w[r] = periodic_sinc(t - r * d / N, N, d);
}

/// Evaluates the trigonometric interpolant of grid samples (index p * N + q) at arbitrary points.
template <class T>
std::vector<T> fourier_interpolate(const std::vector<T>& values, int N, double d1, double d2,
                                   const std::vector<PlanePoint>& pts) {
  if (static_cast<int>(values.size()) != N * N)
    throw configuration_error("fourier_interpolate: expected N*N samples");
  std::vector<T> out(pts.size());
  std::vector<double> wx, wy;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sinc_weights(pts[i].x, N, d1, wx);
    sinc_weights(pts[i].y, N, d2, wy);
    T acc{};
    for (int p = 0; p < N; ++p) {
      if (wx[p] == 0.0) continue;
      T row{};
      for (int q = 0; q < N; ++q) row += wy[q] * values[p * N + q];
      acc += wx[p] * row;
    }
    out[i] = acc;
  }
  return out;
}

template <class T>
std::vector<T> fourier_interpolate(const SurfaceGrid& grid, const std::vector<T>& values,
                                   const std::vector<PlanePoint>& pts) {
  return fourier_interpolate(values, grid.N, grid.d1, grid.d2, pts);
}

}  // namespace qpgreen
