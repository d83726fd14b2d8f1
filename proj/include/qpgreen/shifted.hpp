#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "lattice.hpp"
#include "lattice_sum.hpp"
#include "window.hpp"

namespace qpgreen {

/// Source shifts below the grating and the coefficients of the reinstated grazing modes.
struct ShiftConfig {
  int p = 3;
  double d = 1.4;
  double grazing_threshold = 1e-2;  ///< |gamma|/k below which a mode gets b_value
  cplx b_value{1.0, 0.0};

  void validate() const {
    if (p < 0 || p > 5) throw configuration_error("shift order p must lie in [0, 5]");
    if (!(d > 0.0) || !std::isfinite(d)) throw configuration_error("shift distance d must be positive");
    if (!(grazing_threshold > 0.0)) throw configuration_error("grazing threshold must be positive");
  }
};

/// a_pq = (-1)^q C(p, q), q = 0..p.
inline std::vector<double> binomial_weights(int p) {
  if (p < 0) throw configuration_error("binomial_weights: p must be nonnegative");
  std::vector<double> a(p + 1);
  double c = 1.0;
  for (int q = 0; q <= p; ++q) {
    a[q] = (q % 2 == 0) ? c : -c;
    c = c * (p - q) / (q + 1);
  }
  return a;
}

inline std::vector<double> shift_offsets(const ShiftConfig& sc) {
  std::vector<double> s(sc.p + 1);
  for (int q = 0; q <= sc.p; ++q) s[q] = q * sc.d;
  return s;
}

/// Windowed lattice sum of the binomially weighted shifted monopoles.
inline cplx shifted_windowed_green(const QuasiPeriodicity& qp, const WindowProfile& w,
                                   const ShiftConfig& sc, double a, const EvalPoint& pt,
                                   const SumOptions& opt = {}) {
  sc.validate();
  const auto wts = binomial_weights(sc.p);
  const auto sh = shift_offsets(sc);
  return detail::lattice_sum<false>(qp, w, a, pt, sh, wts, opt).value;
}

inline CVec3 shifted_windowed_green_gradient(const QuasiPeriodicity& qp, const WindowProfile& w,
                                             const ShiftConfig& sc, double a, const EvalPoint& pt,
                                             const SumOptions& opt = {}) {
  sc.validate();
  const auto wts = binomial_weights(sc.p);
  const auto sh = shift_offsets(sc);
  return detail::lattice_sum<true>(qp, w, a, pt, sh, wts, opt).gradient;
}

/// Sum_q a_pq e^{i g |z + q d|} / g, evaluated without cancellation for small |g|.
inline cplx shifted_mode_factor(cplx g, double z, int p, double d) {
  const auto a = binomial_weights(p);
  const double span = std::abs(z) + p * d;
  if (p >= 1 && std::abs(g) * span < 1e-3) {
    // (cos(gu) - 1)/g + i sin(gu)/g by Taylor series; the 1/g terms cancel since sum a_pq = 0.
    cplx total = 0.0;
    for (int q = 0; q <= p; ++q) {
      const double u = std::abs(z + q * d);
      const cplx gu = g * u;
      const cplx gu2 = gu * gu;
      cplx cos_part = 0.0;  // (cos(gu) - 1)/g = u * sum_{n>=1} (-1)^n (gu)^{2n-1} / (2n)!
      cplx sin_part = 0.0;  // sin(gu)/g = u * sum_{n>=0} (-1)^n (gu)^{2n} / (2n+1)!
      cplx pc = gu / 2.0;
      cplx ps = 1.0;
      for (int n = 1; n <= 12; ++n) {
        sin_part += ps;
        cos_part -= pc;
        ps *= -gu2 / double((2 * n) * (2 * n + 1));
        pc *= -gu2 / double((2 * n + 1) * (2 * n + 2));
      }
      total += a[q] * u * (cos_part + I * sin_part);
    }
    return total;
  }
  if (g == cplx(0.0, 0.0)) {
    throw wood_error("shifted_mode_factor: grazing mode with p = 0 has no finite factor");
  }
  cplx total = 0.0;
  for (int q = 0; q <= p; ++q) total += a[q] * std::exp(I * g * std::abs(z + q * d));
  return total / g;
}

/// Dual-lattice expansion of the shifted Green function; finite at exact Wood configurations.
inline cplx shifted_fourier_green(const QuasiPeriodicity& qp, const ShiftConfig& sc,
                                  const EvalPoint& pt, int j_max) {
  sc.validate();
  if (j_max < 0) throw configuration_error("j_max must be nonnegative");
  for (int q = 0; q <= sc.p; ++q) {
    if (pt.z + q * sc.d == 0.0)
      throw std::domain_error("shifted_fourier_green: point lies on shifted source plane q = " +
                              std::to_string(q));
  }
  std::vector<cplx> ex(2 * j_max + 1), ey(2 * j_max + 1);
  for (int j = -j_max; j <= j_max; ++j) {
    ex[j + j_max] = detail::expi(qp.alpha_j(j) * pt.x);
    ey[j + j_max] = detail::expi(qp.beta_l(j) * pt.y);
  }
  cplx sum = 0.0;
  for (int j = -j_max; j <= j_max; ++j) {
    for (int l = -j_max; l <= j_max; ++l) {
      sum += ex[j + j_max] * ey[l + j_max] * shifted_mode_factor(gamma(qp, j, l), pt.z, sc.p, sc.d);
    }
  }
  return I / (2.0 * qp.d1 * qp.d2) * sum;
}

inline cplx shifted_fourier_green(const QuasiPeriodicity& qp, const ShiftConfig& sc,
                                  const EvalPoint& pt) {
  double zmin = std::abs(pt.z);
  for (int q = 1; q <= sc.p; ++q) zmin = std::min(zmin, std::abs(pt.z + q * sc.d));
  return shifted_fourier_green(qp, sc, pt, default_fourier_jmax(qp, zmin));
}

/// Modes that receive a regularizing plane wave.
struct GrazingSet {
  std::vector<WoodMode> modes;
  bool empty() const { return modes.empty(); }
};

inline GrazingSet grazing_set(const QuasiPeriodicity& qp, const ShiftConfig& sc) {
  return {wood_modes(qp, sc.grazing_threshold)};
}

/// v(x) = i/(2 d1 d2) sum_U b e^{i(alpha_j x + beta_l y)} e^{i gamma_jl z}.
inline cplx regularizer_v(const QuasiPeriodicity& qp, const ShiftConfig& sc, const GrazingSet& gs,
                          const EvalPoint& pt) {
  cplx sum = 0.0;
  for (const auto& m : gs.modes) {
    sum += detail::expi(qp.alpha_j(m.j) * pt.x + qp.beta_l(m.l) * pt.y) *
           std::exp(I * m.gamma_jl * pt.z);
  }
  return I * sc.b_value / (2.0 * qp.d1 * qp.d2) * sum;
}

inline CVec3 regularizer_v_gradient(const QuasiPeriodicity& qp, const ShiftConfig& sc,
                                    const GrazingSet& gs, const EvalPoint& pt) {
  CVec3 g{};
  const cplx c = I * sc.b_value / (2.0 * qp.d1 * qp.d2);
  for (const auto& m : gs.modes) {
    const cplx t = c * detail::expi(qp.alpha_j(m.j) * pt.x + qp.beta_l(m.l) * pt.y) *
                   std::exp(I * m.gamma_jl * pt.z);
    g[0] += I * qp.alpha_j(m.j) * t;
    g[1] += I * qp.beta_l(m.l) * t;
    g[2] += I * m.gamma_jl * t;
  }
  return g;
}

inline cplx modified_green(const QuasiPeriodicity& qp, const WindowProfile& w, const ShiftConfig& sc,
                           const GrazingSet& gs, double a, const EvalPoint& pt,
                           const SumOptions& opt = {}) {
  return shifted_windowed_green(qp, w, sc, a, pt, opt) + regularizer_v(qp, sc, gs, pt);
}

inline CVec3 modified_green_gradient(const QuasiPeriodicity& qp, const WindowProfile& w,
                                     const ShiftConfig& sc, const GrazingSet& gs, double a,
                                     const EvalPoint& pt, const SumOptions& opt = {}) {
  CVec3 g = shifted_windowed_green_gradient(qp, w, sc, a, pt, opt);
  const CVec3 v = regularizer_v_gradient(qp, sc, gs, pt);
  for (int i = 0; i < 3; ++i) g[i] += v[i];
  return g;
}

/// (1 - e^{i g d})^p / g + b, with the g -> 0 limit -i d [p == 1] + b.
inline cplx wood_factor(cplx g, int p, double d, cplx b) {
  if (g == cplx(0.0, 0.0)) return (p == 1 ? cplx(0.0, -d) : cplx(0.0, 0.0)) + b;
  if (p == 0) return 1.0 / g + b;
  // 1 - e^{i g d} = -2i sin(g d / 2) e^{i g d / 2}; one factor absorbs the 1/g.
  const cplx half = g * d / 2.0;
  const cplx sinc = std::abs(half) < 1e-4 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  const cplx one_minus = -2.0 * I * std::sin(half) * std::exp(I * half);
  cplx f = -I * d * sinc * std::exp(I * half);
  for (int q = 1; q < p; ++q) f *= one_minus;
  return f + b;
}

/// Far-field factor of mode (j,l) for the shifted kernel, with b applied to grazing modes only.
inline cplx wood_factor(const QuasiPeriodicity& qp, const ShiftConfig& sc, int j, int l) {
  sc.validate();
  const cplx g = gamma(qp, j, l);
  const cplx b = (std::abs(g) / qp.k < sc.grazing_threshold) ? sc.b_value : cplx(0.0, 0.0);
  return wood_factor(g, sc.p, sc.d, b);
}

/// Rejects shift distances for which some propagating mode is annihilated by the shifts.
inline void validate_shift(const QuasiPeriodicity& qp, const ShiftConfig& sc) {
  sc.validate();
  const int jm = grazing_index_bound(qp);
  for (int j = -jm; j <= jm; ++j) {
    for (int l = -jm; l <= jm; ++l) {
      const cplx g = gamma(qp, j, l);
      if (!is_propagating(g)) continue;
      if (std::abs(1.0 - std::exp(I * g * sc.d)) <= 1e-6) {
        throw configuration_error("shift distance d annihilates propagating mode (" +
                                  std::to_string(j) + "," + std::to_string(l) + ")");
      }
    }
  }
}

}  // namespace qpgreen
