#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "lattice.hpp"
#include "window.hpp"

namespace qpgreen {

/// Coordinates of the difference x - x' between target and source.
struct EvalPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct SumOptions {
  bool compensated = false;  ///< Neumaier-compensated accumulation of the lattice terms
};

struct LatticeSumResult {
  cplx value;
  CVec3 gradient{};
  std::size_t terms = 0;  ///< lattice indices with nonzero window weight
};

namespace detail {

inline cplx expi(double t) { return {std::cos(t), std::sin(t)}; }

/// Complex accumulator with optional Neumaier compensation.
class Accumulator {
 public:
  explicit Accumulator(bool compensated = false) : compensated_(compensated) {}

  void add(cplx v) {
    if (!compensated_) {
      sum_ += v;
      return;
    }
    sum_re_ = step(sum_re_, comp_re_, v.real());
    sum_im_ = step(sum_im_, comp_im_, v.imag());
  }

  cplx value() const {
    if (!compensated_) return sum_;
    return {sum_re_ + comp_re_, sum_im_ + comp_im_};
  }

 private:
  static double step(double s, double& c, double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    return t;
  }

  bool compensated_;
  cplx sum_{};
  double sum_re_ = 0.0, sum_im_ = 0.0, comp_re_ = 0.0, comp_im_ = 0.0;
};

/// Visits every (m,n) with |m| <= mx, |n| <= my in concentric rectangular shells
/// max(|m|,|n|) = 0, 1, 2, ...; the order inside a shell is fixed.
template <class F>
void for_each_shell(int mx, int my, F&& f) {
  const int smax = std::max(mx, my);
  for (int s = 0; s <= smax; ++s) {
    if (s == 0) {
      f(0, 0);
      continue;
    }
    if (s <= my) {
      for (int m = -std::min(s, mx); m <= std::min(s, mx); ++m) f(m, s);
      for (int m = -std::min(s, mx); m <= std::min(s, mx); ++m) f(m, -s);
    }
    if (s <= mx) {
      for (int n = -std::min(s - 1, my); n <= std::min(s - 1, my); ++n) f(s, n);
      for (int n = -std::min(s - 1, my); n <= std::min(s - 1, my); ++n) f(-s, n);
    }
  }
}

/// d/du of the one-dimensional window profile.
inline double profile_derivative(const WindowProfile& w, double u) {
  const double au = std::abs(u);
  if (au <= w.inner || au >= w.outer) return 0.0;
  const double width = w.outer - w.inner;
  const double t = (au - w.inner) / width;
  const double sgn = u < 0.0 ? -1.0 : 1.0;
  if (w.shape == WindowShape::polynomial_blend) {
    return -30.0 * t * t * (t - 1.0) * (t - 1.0) / width * sgn;
  }
  const double x = 1.0 + t;
  const double e = std::exp(1.0 / (1.0 - x));
  const double expo = 2.0 * e / (x - 2.0);
  const double dexpo = 2.0 * e / ((1.0 - x) * (1.0 - x) * (x - 2.0)) - 2.0 * e / ((x - 2.0) * (x - 2.0));
  return std::exp(expo) * dexpo / width * sgn;
}

inline int lattice_extent(double reach, double period) {
  return static_cast<int>(std::ceil(reach / period));
}

/// Windowed lattice sum of monopoles with optional z-shifted copies weighted by `weights`.
/// Source images sit at (-m d1, -n d2, -shift_q) relative to the target.
template <bool WithGradient>
LatticeSumResult lattice_sum(const QuasiPeriodicity& qp, const WindowProfile& w, double a,
                             const EvalPoint& pt, std::span<const double> shifts,
                             std::span<const double> weights, const SumOptions& opt) {
  w.validate();
  if (!(a > 0.0)) throw configuration_error("truncation radius a must be positive");
  const double reach = w.outer * a;
  const double ox = w.x_dependent ? pt.x : 0.0;
  const double oy = w.x_dependent ? pt.y : 0.0;
  const int mx = lattice_extent(reach + std::abs(ox), qp.d1) + 1;
  const int my = lattice_extent(reach + std::abs(oy), qp.d2) + 1;

  std::vector<double> wx(2 * mx + 1), wy(2 * my + 1), dwx, dwy;
  std::vector<cplx> px(2 * mx + 1), py(2 * my + 1);
  for (int m = -mx; m <= mx; ++m) {
    wx[m + mx] = w.profile((ox + m * qp.d1) / a);
    px[m + mx] = expi(-qp.alpha * m * qp.d1);
  }
  for (int n = -my; n <= my; ++n) {
    wy[n + my] = w.profile((oy + n * qp.d2) / a);
    py[n + my] = expi(-qp.beta * n * qp.d2);
  }
  const bool window_gradient = WithGradient && w.x_dependent;
  if (window_gradient) {
    dwx.resize(wx.size());
    dwy.resize(wy.size());
    for (int m = -mx; m <= mx; ++m) dwx[m + mx] = profile_derivative(w, (ox + m * qp.d1) / a) / a;
    for (int n = -my; n <= my; ++n) dwy[n + my] = profile_derivative(w, (oy + n * qp.d2) / a) / a;
  }

  const double k = qp.k;
  const double tiny = 1e-14 * std::max(qp.d1, qp.d2);
  Accumulator acc(opt.compensated), gx(opt.compensated), gy(opt.compensated), gz(opt.compensated);
  std::size_t terms = 0;

  for_each_shell(mx, my, [&](int m, int n) {
    double chi;
    double dchi_x = 0.0, dchi_y = 0.0;
    const double sx = (ox + m * qp.d1) / a;
    const double sy = (oy + n * qp.d2) / a;
    if (w.separable) {
      chi = wx[m + mx] * wy[n + my];
      if (window_gradient) {
        dchi_x = dwx[m + mx] * wy[n + my];
        dchi_y = wx[m + mx] * dwy[n + my];
      }
    } else {
      const double rho = std::hypot(sx, sy);
      chi = w.profile(rho);
      if (window_gradient && rho > 0.0) {
        const double dp = profile_derivative(w, rho) / a;
        dchi_x = dp * sx / rho;
        dchi_y = dp * sy / rho;
      }
    }
    if (chi == 0.0 && dchi_x == 0.0 && dchi_y == 0.0) return;
    if (chi != 0.0) ++terms;
    const cplx phase = px[m + mx] * py[n + my];
    const double X = pt.x + m * qp.d1;
    const double Y = pt.y + n * qp.d2;
    for (std::size_t q = 0; q < shifts.size(); ++q) {
      const double Z = pt.z + shifts[q];
      const double r2 = X * X + Y * Y + Z * Z;
      const double r = std::sqrt(r2);
      if (r < tiny) {
        throw singular_evaluation_error("lattice sum evaluated on source (m,n,q) = (" +
                                        std::to_string(m) + "," + std::to_string(n) + "," +
                                        std::to_string(q) + ")");
      }
      const cplx e = expi(k * r) * (weights[q] / (four_pi * r));
      const cplx t = e * phase;
      acc.add(chi * t);
      if constexpr (WithGradient) {
        const cplx radial = t * cplx(-1.0, k * r) / r2;  // (ikr - 1)/r^2 times term
        gx.add(chi * radial * X + dchi_x * t);
        gy.add(chi * radial * Y + dchi_y * t);
        gz.add(chi * radial * Z);
      }
    }
  });

  LatticeSumResult res;
  res.value = acc.value();
  res.gradient = {gx.value(), gy.value(), gz.value()};
  res.terms = terms;
  return res;
}

inline constexpr double unit_weight[1] = {1.0};
inline constexpr double zero_shift[1] = {0.0};

}  // namespace detail

/// Smoothly truncated lattice sum of phase-weighted outgoing monopoles.
inline cplx windowed_green(const QuasiPeriodicity& qp, const WindowProfile& w, double a,
                           const EvalPoint& pt, const SumOptions& opt = {}) {
  return detail::lattice_sum<false>(qp, w, a, pt, detail::zero_shift, detail::unit_weight, opt).value;
}

/// Analytic gradient of windowed_green with respect to the evaluation point.
inline CVec3 windowed_green_gradient(const QuasiPeriodicity& qp, const WindowProfile& w, double a,
                                     const EvalPoint& pt, const SumOptions& opt = {}) {
  return detail::lattice_sum<true>(qp, w, a, pt, detail::zero_shift, detail::unit_weight, opt)
      .gradient;
}

/// Value, gradient and the number of retained lattice terms.
inline LatticeSumResult windowed_green_detail(const QuasiPeriodicity& qp, const WindowProfile& w,
                                              double a, const EvalPoint& pt,
                                              const SumOptions& opt = {}) {
  return detail::lattice_sum<true>(qp, w, a, pt, detail::zero_shift, detail::unit_weight, opt);
}

/// Smallest index bound such that every omitted evanescent mode decays below 1e-16 at height
/// |z|; never less than 10.
inline int default_fourier_jmax(const QuasiPeriodicity& qp, double abs_z) {
  if (!(abs_z > 0.0)) throw std::domain_error("Fourier series needs |z| > 0");
  const double need = 37.0 / abs_z;
  const double jx = (need + qp.k + std::abs(qp.alpha)) * qp.d1 / two_pi;
  const double jy = (need + qp.k + std::abs(qp.beta)) * qp.d2 / two_pi;
  return std::max(10, static_cast<int>(std::ceil(std::max(jx, jy))));
}

/// Rayleigh-wave (dual lattice) expansion of the quasi-periodic Green function, truncated to
/// |j|,|l| <= j_max. Used as an independent oracle for the lattice sums.
inline cplx fourier_green(const QuasiPeriodicity& qp, const EvalPoint& pt, int j_max) {
  if (pt.z == 0.0) throw std::domain_error("fourier_green: z must be nonzero");
  if (j_max < 0) throw configuration_error("j_max must be nonnegative");
  std::vector<cplx> ex(2 * j_max + 1), ey(2 * j_max + 1);
  for (int j = -j_max; j <= j_max; ++j) {
    ex[j + j_max] = detail::expi(qp.alpha_j(j) * pt.x);
    ey[j + j_max] = detail::expi(qp.beta_l(j) * pt.y);
  }
  const double az = std::abs(pt.z);
  cplx sum = 0.0;
  for (int j = -j_max; j <= j_max; ++j) {
    for (int l = -j_max; l <= j_max; ++l) {
      const cplx g = gamma(qp, j, l);
      if (g == cplx(0.0, 0.0)) {
        throw wood_error("fourier_green: mode (" + std::to_string(j) + "," + std::to_string(l) +
                         ") is exactly grazing; use the shifted (Wood-modified) Green function");
      }
      sum += ex[j + j_max] * ey[l + j_max] * std::exp(I * g * az) / g;
    }
  }
  return I / (2.0 * qp.d1 * qp.d2) * sum;
}

inline cplx fourier_green(const QuasiPeriodicity& qp, const EvalPoint& pt) {
  return fourier_green(qp, pt, default_fourier_jmax(qp, std::abs(pt.z)));
}

}  // namespace qpgreen
