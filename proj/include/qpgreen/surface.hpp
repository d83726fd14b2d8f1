#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "core.hpp"

namespace qpgreen {

/// Height and derivatives of z = f(x, y) at one point.
struct SurfacePoint {
  double f = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double fxx = 0.0;
  double fxy = 0.0;
  double fyy = 0.0;

  double g() const { return std::sqrt(1.0 + fx * fx + fy * fy); }
  Vec3 normal() const { return {-fx, -fy, 1.0}; }  ///< unnormalized, length g
};

/// Doubly periodic grating z = f(x, y) with analytic first and second derivatives.
struct GratingSurface {
  std::function<SurfacePoint(double, double)> eval;
  double d1 = 1.0;
  double d2 = 1.0;
  double z_minus = 0.0;  ///< strict lower bound of f
  double z_plus = 0.0;   ///< strict upper bound of f
  std::string name;

  SurfacePoint operator()(double x, double y) const { return eval(x, y); }

  /// Checks bounds and periodicity at an n x n set of sample points.
  void validate(int n = 16) const {
    if (!eval) throw configuration_error("surface has no height function");
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw configuration_error("surface periods must be positive");
    if (!(z_minus < z_plus)) throw configuration_error("surface bounds must satisfy z_minus < z_plus");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double x = (i + 0.37) * d1 / n, y = (j + 0.61) * d2 / n;
        const SurfacePoint a = eval(x, y);
        const SurfacePoint b = eval(x + d1, y + d2);
        if (!(a.f > z_minus && a.f < z_plus))
          throw configuration_error("surface height leaves (z_minus, z_plus)");
        if (std::abs(a.f - b.f) > 1e-12 * (1.0 + std::abs(a.f)))
          throw configuration_error("surface is not periodic with the given periods");
      }
    }
  }
};

inline GratingSurface flat_surface(double d1 = 1.0, double d2 = 1.0) {
  GratingSurface s;
  s.eval = [](double, double) { return SurfacePoint{}; };
  s.d1 = d1;
  s.d2 = d2;
  s.z_minus = -0.5;
  s.z_plus = 0.5;
  s.name = "flat";
  return s;
}

/// f = amp cos(2 pi x / d1) cos(2 pi y / d2).
inline GratingSurface cos_cos_surface(double amp, double d1 = 1.0, double d2 = 1.0) {
  GratingSurface s;
  const double k1 = two_pi / d1, k2 = two_pi / d2;
  s.eval = [amp, k1, k2](double x, double y) {
    const double cx = std::cos(k1 * x), sx = std::sin(k1 * x);
    const double cy = std::cos(k2 * y), sy = std::sin(k2 * y);
    SurfacePoint p;
    p.f = amp * cx * cy;
    p.fx = -amp * k1 * sx * cy;
    p.fy = -amp * k2 * cx * sy;
    p.fxx = -amp * k1 * k1 * cx * cy;
    p.fxy = amp * k1 * k2 * sx * sy;
    p.fyy = -amp * k2 * k2 * cx * cy;
    return p;
  };
  s.d1 = d1;
  s.d2 = d2;
  const double margin = 0.5 + std::abs(amp) * 1e-3;
  s.z_minus = -std::abs(amp) - margin;
  s.z_plus = std::abs(amp) + margin;
  s.name = "cos-cos:" + std::to_string(amp);
  return s;
}

/// Equispaced N x N sampling of one period, node (p, q) at (p d1/N, q d2/N), stored row-major
/// with index p * N + q.
struct SurfaceGrid {
  int N = 0;
  double d1 = 1.0;
  double d2 = 1.0;
  double h1 = 0.0;
  double h2 = 0.0;
  std::vector<SurfacePoint> pts;

  int size() const { return N * N; }
  int index(int p, int q) const { return p * N + q; }
  double x(int p) const { return p * h1; }
  double y(int q) const { return q * h2; }
  const SurfacePoint& at(int p, int q) const { return pts[index(p, q)]; }
  double f_min() const {
    double m = pts.front().f;
    for (const auto& s : pts) m = std::min(m, s.f);
    return m;
  }
  double f_max() const {
    double m = pts.front().f;
    for (const auto& s : pts) m = std::max(m, s.f);
    return m;
  }
};

inline SurfaceGrid sample_surface(const GratingSurface& s, int N) {
  if (N < 8 || N % 2 != 0) throw configuration_error("grid size N must be even and at least 8");
  SurfaceGrid g;
  g.N = N;
  g.d1 = s.d1;
  g.d2 = s.d2;
  g.h1 = s.d1 / N;
  g.h2 = s.d2 / N;
  g.pts.resize(static_cast<std::size_t>(N) * N);
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q) g.pts[g.index(p, q)] = s(g.x(p), g.y(q));
  return g;
}

/// (p - r) reduced into [0, N).
inline int wrap_index(int p, int r, int N) {
  const int v = (p - r) % N;
  return v < 0 ? v + N : v;
}

/// Nearest-image offset of (p - r) in (-N/2, N/2].
inline int centered_offset(int p, int r, int N) {
  const int v = wrap_index(p, r, N);
  return v > N / 2 ? v - N : v;
}

}  // namespace qpgreen
