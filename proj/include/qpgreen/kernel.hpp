#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core.hpp"
#include "lattice.hpp"
#include "lattice_sum.hpp"
#include "shifted.hpp"
#include "surface.hpp"
#include "window.hpp"

namespace qpgreen {

enum class KernelChoice { plain, shifted, modified };

inline const char* to_string(KernelChoice c) {
  switch (c) {
    case KernelChoice::plain: return "plain";
    case KernelChoice::shifted: return "shifted";
    case KernelChoice::modified: return "modified";
  }
  return "?";
}

struct KernelConfig {
  QuasiPeriodicity qp;
  WindowProfile window = bie_window();
  double a = 40.0;
  KernelChoice choice = KernelChoice::plain;
  ShiftConfig shift;
};

/// Periodic kernel value and gradient of its free-space part with respect to the target.
struct KernelValue {
  cplx value;
  CVec3 grad{};

  KernelValue& operator+=(const KernelValue& o) {
    value += o.value;
    for (int i = 0; i < 3; ++i) grad[i] += o.grad[i];
    return *this;
  }
};

/// Phase-extracted Green function G(X) e^{-i(alpha X + beta Y)} for the configured kernel
/// choice, split into central image, near images and far images.
class PeriodicKernel {
 public:
  static constexpr int near_radius = 2;

  explicit PeriodicKernel(const KernelConfig& cfg) : cfg_(cfg) {
    cfg_.window.validate();
    if (cfg_.window.x_dependent)
      throw configuration_error("boundary-integral kernels need an x-independent window");
    if (!(cfg_.a > 0.0)) throw configuration_error("truncation radius a must be positive");
    const auto& qp = cfg_.qp;
    if (cfg_.choice == KernelChoice::plain) {
      const auto w = wood_modes(qp, 1e-8);
      if (!w.empty()) {
        throw wood_error("plain kernel refused at a Wood configuration; grazing modes " +
                         describe_modes(w) + "; use --kernel shifted or modified");
      }
      weights_ = {1.0};
      shifts_ = {0.0};
    } else {
      cfg_.shift.validate();
      if (cfg_.shift.p < 1) throw configuration_error("shifted kernels need p >= 1");
      validate_shift(qp, cfg_.shift);
      weights_ = binomial_weights(cfg_.shift.p);
      shifts_ = shift_offsets(cfg_.shift);
      if (cfg_.choice == KernelChoice::modified) grazing_ = grazing_set(qp, cfg_.shift);
    }
    const double reach = cfg_.window.outer * cfg_.a;
    mx_ = detail::lattice_extent(reach, qp.d1);
    my_ = detail::lattice_extent(reach, qp.d2);
    wx_.resize(2 * mx_ + 1);
    px_.resize(2 * mx_ + 1);
    wy_.resize(2 * my_ + 1);
    py_.resize(2 * my_ + 1);
    for (int m = -mx_; m <= mx_; ++m) {
      wx_[m + mx_] = cfg_.window.profile(m * qp.d1 / cfg_.a);
      px_[m + mx_] = detail::expi(-qp.alpha * m * qp.d1);
    }
    for (int n = -my_; n <= my_; ++n) {
      wy_[n + my_] = cfg_.window.profile(n * qp.d2 / cfg_.a);
      py_[n + my_] = detail::expi(-qp.beta * n * qp.d2);
    }
  }

  const KernelConfig& config() const { return cfg_; }
  const QuasiPeriodicity& qp() const { return cfg_.qp; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& shifts() const { return shifts_; }
  const GrazingSet& grazing() const { return grazing_; }
  double shift_span() const { return shifts_.back(); }

  enum class Range { near, far, all };

  /// Image sum over the given range without the e^{-i(alpha X + beta Y)} factor; the central
  /// unshifted image is skipped when skip_central is set.
  KernelValue images(double X, double Y, double Z, Range range, bool skip_central,
                     const std::vector<double>* single_shift = nullptr) const {
    const auto& qp = cfg_.qp;
    const double k = qp.k;
    const std::vector<double>& sh = single_shift ? *single_shift : shifts_;
    const std::vector<double> one{1.0};
    const std::vector<double>& wt = single_shift ? one : weights_;
    double vr = 0.0, vi = 0.0, gr[3] = {0.0, 0.0, 0.0}, gi[3] = {0.0, 0.0, 0.0};
    for (int m = -mx_; m <= mx_; ++m) {
      const double cx = wx_[m + mx_];
      if (cx == 0.0) continue;
      const double Xm = X + m * qp.d1;
      for (int n = -my_; n <= my_; ++n) {
        const double chi = cx * wy_[n + my_];
        if (chi == 0.0) continue;
        const bool near = std::abs(m) <= near_radius && std::abs(n) <= near_radius;
        if ((range == Range::near && !near) || (range == Range::far && near)) continue;
        const double Yn = Y + n * qp.d2;
        const cplx ph = chi * px_[m + mx_] * py_[n + my_];
        for (std::size_t q = 0; q < sh.size(); ++q) {
          if (skip_central && m == 0 && n == 0 && sh[q] == 0.0) continue;
          const double Zq = Z + sh[q];
          const double r2 = Xm * Xm + Yn * Yn + Zq * Zq;
          const double r = std::sqrt(r2);
          if (r == 0.0) throw singular_evaluation_error("kernel image coincides with target");
          // Real arithmetic here: complex products would go through the checked library path.
          const double amp = wt[q] / (four_pi * r), kr = k * r;
          const double ec = std::cos(kr) * amp, es = std::sin(kr) * amp;
          const double tr = ec * ph.real() - es * ph.imag(), ti = ec * ph.imag() + es * ph.real();
          const double rr = (-tr - kr * ti) / r2, ri = (tr * kr - ti) / r2;
          vr += tr;
          vi += ti;
          gr[0] += rr * Xm;
          gi[0] += ri * Xm;
          gr[1] += rr * Yn;
          gi[1] += ri * Yn;
          gr[2] += rr * Zq;
          gi[2] += ri * Zq;
        }
      }
    }
    KernelValue acc;
    acc.value = {vr, vi};
    for (int i = 0; i < 3; ++i) acc.grad[i] = {gr[i], gi[i]};
    return acc;
  }

  /// Regularizing plane waves in periodic form (modified kernel only).
  KernelValue regularizer(double X, double Y, double Z) const {
    KernelValue v;
    if (grazing_.empty()) return v;
    const auto& qp = cfg_.qp;
    const cplx c = I * cfg_.shift.b_value / (2.0 * qp.d1 * qp.d2);
    for (const auto& m : grazing_.modes) {
      const double kx = qp.alpha_j(m.j), ky = qp.beta_l(m.l);
      const cplx t = c * detail::expi((kx - qp.alpha) * X + (ky - qp.beta) * Y) *
                     std::exp(I * m.gamma_jl * Z);
      v.value += t;
      v.grad[0] += I * kx * t;
      v.grad[1] += I * ky * t;
      v.grad[2] += I * m.gamma_jl * t;
    }
    return v;
  }

  cplx periodic_phase(double X, double Y) const {
    return detail::expi(-(cfg_.qp.alpha * X + cfg_.qp.beta * Y));
  }

  /// Everything except the central unshifted image, evaluated by direct summation.
  KernelValue remainder_direct(double X, double Y, double Z) const {
    KernelValue v = images(X, Y, Z, Range::all, true);
    const cplx ph = periodic_phase(X, Y);
    v.value *= ph;
    for (auto& g : v.grad) g *= ph;
    v += regularizer(X, Y, Z);
    return v;
  }

  /// Full periodic kernel by direct summation (target off every image).
  KernelValue full_direct(double X, double Y, double Z) const {
    KernelValue v = images(X, Y, Z, Range::all, false);
    const cplx ph = periodic_phase(X, Y);
    v.value *= ph;
    for (auto& g : v.grad) g *= ph;
    v += regularizer(X, Y, Z);
    return v;
  }

 private:
  KernelConfig cfg_;
  std::vector<double> weights_, shifts_;
  GrazingSet grazing_;
  int mx_ = 0, my_ = 0;
  std::vector<double> wx_, wy_;
  std::vector<cplx> px_, py_;
};

/// Central-image parts of the kernel at separation R (vector x - x'), phase included.
struct CentralParts {
  cplx sl_sing, sl_smooth;
  CVec3 grad_sing{}, grad_smooth{};
};

inline CentralParts central_parts(double k, double X, double Y, double Z, cplx phase) {
  CentralParts c;
  const double R2 = X * X + Y * Y + Z * Z;
  const double R = std::sqrt(R2);
  const double kr = k * R;
  const double cs = std::cos(kr), sn = std::sin(kr);
  c.sl_sing = cs / (four_pi * R) * phase;
  c.sl_smooth = I * sn / (four_pi * R) * phase;
  const cplx gs = -(cs + kr * sn) / (four_pi * R * R2) * phase;
  const cplx gm = I * (kr * cs - sn) / (four_pi * R * R2) * phase;
  const double v[3] = {X, Y, Z};
  for (int i = 0; i < 3; ++i) {
    c.grad_sing[i] = gs * v[i];
    c.grad_smooth[i] = gm * v[i];
  }
  return c;
}

/// Singular and smooth parts of the single layer G, the double layer -grad G . N(x') and the
/// adjoint double layer grad G . N(x) / g(x) between grid nodes t and s, using the nearest
/// image of s. Surface elements g(x') are not included. At coincidence the singular parts are
/// infinite and the smooth parts hold their limits.
struct SplitKernel {
  cplx sl_sing, sl_smooth;
  cplx dl_sing, dl_smooth;
  cplx adl_sing, adl_smooth;
};

inline SplitKernel split_kernel(const PeriodicKernel& ker, const SurfaceGrid& grid, int t, int s) {
  const int N = grid.N;
  const int tp = t / N, tq = t % N, sp = s / N, sq = s % N;
  const double X = centered_offset(tp, sp, N) * grid.h1;
  const double Y = centered_offset(tq, sq, N) * grid.h2;
  const SurfacePoint& st = grid.pts[t];
  const SurfacePoint& ss = grid.pts[s];
  const double Z = st.f - ss.f;
  const Vec3 Ns = ss.normal(), Nt = st.normal();
  const double gt = st.g();
  const KernelValue rest = ker.remainder_direct(X, Y, Z);
  SplitKernel out;
  const double inf = std::numeric_limits<double>::infinity();
  if (t == s) {
    out.sl_sing = out.dl_sing = out.adl_sing = inf;
    out.sl_smooth = I * ker.qp().k / four_pi + rest.value;
    out.dl_smooth = -dot(rest.grad, Ns);
    out.adl_smooth = dot(rest.grad, Nt) / gt;
    return out;
  }
  const CentralParts c = central_parts(ker.qp().k, X, Y, Z, ker.periodic_phase(X, Y));
  out.sl_sing = c.sl_sing;
  out.sl_smooth = c.sl_smooth + rest.value;
  out.dl_sing = -dot(c.grad_sing, Ns);
  out.dl_smooth = -dot(c.grad_smooth, Ns) - dot(rest.grad, Ns);
  out.adl_sing = dot(c.grad_sing, Nt) / gt;
  out.adl_smooth = (dot(c.grad_smooth, Nt) + dot(rest.grad, Nt)) / gt;
  return out;
}

}  // namespace qpgreen
