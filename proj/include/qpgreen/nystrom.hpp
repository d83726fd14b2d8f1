#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "interp.hpp"
#include "kernel.hpp"
#include "parallel.hpp"
#include "surface.hpp"
#include "window.hpp"

namespace qpgreen {

/// Floating partition of unity and polar grid of the local singular integrator.
struct QuadratureConfig {
  double r0 = 0.125;
  double r1 = 0.25;
  int n_theta = 16;
  int n_rho = 32;

  void validate(double d1, double d2) const {
    if (!(r0 > 0.0) || !(r1 > r0)) throw configuration_error("quadrature radii must satisfy 0 < r0 < r1");
    if (4.0 * r1 > std::hypot(d1, d2) * (1.0 + 1e-12))
      throw configuration_error("quadrature radius r1 violates 4 r1 <= (d1^2 + d2^2)^{1/2}");
    if (n_theta < 1) throw configuration_error("n_theta must be positive");
    if (n_rho < 2 || n_rho % 2 != 0) throw configuration_error("n_rho must be even and >= 2");
  }

  double pou(double rho) const { return WindowProfile{r0, r1}.profile(rho); }
};

inline QuadratureConfig default_quadrature(const SurfaceGrid& grid) {
  QuadratureConfig qc;
  qc.r1 = std::min(grid.d1, grid.d2) / 4.0;
  qc.r0 = qc.r1 / 2.0;
  qc.n_theta = grid.N;
  qc.n_rho = 4 * grid.N;
  return qc;
}

/// Coefficients of i eta (single layer) + xi (double layer).
struct CombinedFieldParams {
  double eta = -1.0;
  double xi = 1.0;

  void validate() const {
    if (!(xi != 0.0) || !(eta / xi < 0.0))
      throw configuration_error("combined-field parameters need eta / xi < 0");
  }
};

inline CombinedFieldParams default_combined_field(double k) { return {-k, 1.0}; }

enum class BoundaryCondition { dirichlet, neumann };

inline const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

enum class LayerType { single, double_layer, adjoint_double };

/// Far images (outside the near block) tabulated per grid offset as Chebyshev series in Z.
class FarFieldTable {
 public:
  FarFieldTable(const PeriodicKernel& ker, const SurfaceGrid& grid, int n_z = 0)
      : ker_(&ker), N_(grid.N) {
    const double lo = grid.f_min() - grid.f_max();
    const double hi = grid.f_max() - grid.f_min() + ker.shift_span();
    zc_ = 0.5 * (lo + hi);
    zh_ = std::max(0.5 * (hi - lo), 1e-3) * (1.0 + 1e-9);
    n_ = n_z > 0 ? n_z : default_degree(ker.qp().k, zh_);
    coef_.assign(static_cast<std::size_t>(N_) * N_ * n_, {});
    const std::vector<double> unshifted{0.0};
    std::vector<double> nodes(n_);
    for (int i = 0; i < n_; ++i) nodes[i] = std::cos(pi * (i + 0.5) / n_);
    parallel_for(static_cast<std::size_t>(N_) * N_, [&](std::size_t idx) {
      const int o1 = static_cast<int>(idx) / N_ - N_ / 2 + 1;
      const int o2 = static_cast<int>(idx) % N_ - N_ / 2 + 1;
      const double X = o1 * grid.h1, Y = o2 * grid.h2;
      const cplx ph = ker.periodic_phase(X, Y);
      std::vector<std::array<cplx, 4>> vals(n_);
      for (int i = 0; i < n_; ++i) {
        const KernelValue v =
            ker.images(X, Y, zc_ + zh_ * nodes[i], PeriodicKernel::Range::far, false, &unshifted);
        vals[i] = {v.value * ph, v.grad[0] * ph, v.grad[1] * ph, v.grad[2] * ph};
      }
      std::array<cplx, 4>* c = &coef_[idx * n_];
      for (int j = 0; j < n_; ++j) {
        std::array<cplx, 4> s{};
        for (int i = 0; i < n_; ++i) {
          const double w = std::cos(pi * j * (i + 0.5) / n_);
          for (int f = 0; f < 4; ++f) s[f] += w * vals[i][f];
        }
        const double scale = (j == 0 ? 1.0 : 2.0) / n_;
        for (int f = 0; f < 4; ++f) c[j][f] = s[f] * scale;
      }
    });
  }

  static int default_degree(double k, double half_width) {
    return 20 + static_cast<int>(std::ceil(1.5 * k * half_width));
  }

  int degree() const { return n_; }

  /// Far-image contribution with the kernel's shift weights, phase included.
  KernelValue eval(int o1, int o2, double Z) const {
    const std::size_t idx = static_cast<std::size_t>(o1 + N_ / 2 - 1) * N_ + (o2 + N_ / 2 - 1);
    const std::array<cplx, 4>* c = &coef_[idx * n_];
    const auto& wts = ker_->weights();
    const auto& sh = ker_->shifts();
    std::array<cplx, 4> total{};
    for (std::size_t q = 0; q < sh.size(); ++q) {
      const double t = (Z + sh[q] - zc_) / zh_;
      if (std::abs(t) > 1.0 + 1e-9) throw configuration_error("far-field table queried outside its range");
      std::array<cplx, 4> b1{}, b2{};
      for (int j = n_ - 1; j >= 1; --j) {
        for (int f = 0; f < 4; ++f) {
          const cplx b0 = 2.0 * t * b1[f] - b2[f] + c[j][f];
          b2[f] = b1[f];
          b1[f] = b0;
        }
      }
      for (int f = 0; f < 4; ++f) total[f] += wts[q] * (t * b1[f] - b2[f] + c[0][f]);
    }
    KernelValue v;
    v.value = total[0];
    v.grad = {total[1], total[2], total[3]};
    return v;
  }

 private:
  const PeriodicKernel* ker_;
  int N_;
  int n_ = 0;
  double zc_ = 0.0, zh_ = 1.0;
  std::vector<std::array<cplx, 4>> coef_;
};

/// Kernel parts between grid nodes, accelerated by a far-field table. Same contract as
/// split_kernel, plus the partition-of-unity weight at the node separation.
class PairKernelEvaluator {
 public:
  PairKernelEvaluator(const PeriodicKernel& ker, const SurfaceGrid& grid, const QuadratureConfig& qc)
      : ker_(ker), grid_(grid), qc_(qc), table_(ker, grid) {}

  const FarFieldTable& table() const { return table_; }

  struct Parts {
    SplitKernel k;
    double pou = 1.0;  ///< eta at the planar node separation (1 on the diagonal)
  };

  Parts parts(int t, int s) const {
    const int N = grid_.N;
    const int o1 = centered_offset(t / N, s / N, N), o2 = centered_offset(t % N, s % N, N);
    const double X = o1 * grid_.h1, Y = o2 * grid_.h2;
    const SurfacePoint& st = grid_.pts[t];
    const SurfacePoint& ss = grid_.pts[s];
    const double Z = st.f - ss.f;
    const cplx ph = ker_.periodic_phase(X, Y);
    KernelValue rest = ker_.images(X, Y, Z, PeriodicKernel::Range::near, true);
    rest.value *= ph;
    for (auto& g : rest.grad) g *= ph;
    rest += table_.eval(o1, o2, Z);
    rest += ker_.regularizer(X, Y, Z);
    const Vec3 Ns = ss.normal(), Nt = st.normal();
    const double gt = st.g();
    Parts out;
    SplitKernel& sk = out.k;
    if (t == s) {
      const double inf = std::numeric_limits<double>::infinity();
      sk.sl_sing = sk.dl_sing = sk.adl_sing = inf;
      sk.sl_smooth = I * ker_.qp().k / four_pi + rest.value;
      sk.dl_smooth = -dot(rest.grad, Ns);
      sk.adl_smooth = dot(rest.grad, Nt) / gt;
      return out;
    }
    out.pou = qc_.pou(std::hypot(X, Y));
    const CentralParts c = central_parts(ker_.qp().k, X, Y, Z, ph);
    sk.sl_sing = c.sl_sing;
    sk.sl_smooth = c.sl_smooth + rest.value;
    sk.dl_sing = -dot(c.grad_sing, Ns);
    sk.dl_smooth = -dot(c.grad_smooth, Ns) - dot(rest.grad, Ns);
    sk.adl_sing = dot(c.grad_sing, Nt) / gt;
    sk.adl_smooth = (dot(c.grad_smooth, Nt) + dot(rest.grad, Nt)) / gt;
    return out;
  }

 private:
  const PeriodicKernel& ker_;
  const SurfaceGrid& grid_;
  QuadratureConfig qc_;
  FarFieldTable table_;
};

/// Singular-kernel integrand of the polar integrator at x' = x_t + rho (cos th, sin th), times the
/// Jacobian |rho|, the partition of unity and the Bloch phase; g(x') included for the single
/// and adjoint double layers. Limits are substituted at rho = 0.
inline cplx polar_integrand(const GratingSurface& surf, const SurfacePoint& st, double xt, double yt,
                            const QuasiPeriodicity& qp, const QuadratureConfig& qc, double rho,
                            double theta, LayerType layer) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double eta = qc.pou(std::abs(rho));
  if (eta == 0.0) return 0.0;
  const cplx phase = detail::expi(rho * (qp.alpha * c + qp.beta * s));
  const double k = qp.k;
  double ratio, geo, kr, gp;
  if (rho == 0.0) {
    const double slope = st.fx * c + st.fy * s;
    ratio = 1.0 / std::sqrt(1.0 + slope * slope);
    const double Q = st.fxx * c * c + 2.0 * st.fxy * c * s + st.fyy * s * s;
    geo = layer == LayerType::adjoint_double ? -0.5 * Q : 0.5 * Q;
    kr = 0.0;
    gp = st.g();
  } else {
    const SurfacePoint sp = surf(xt + rho * c, yt + rho * s);
    const double X = -rho * c, Y = -rho * s, Z = st.f - sp.f;
    const double R = std::sqrt(X * X + Y * Y + Z * Z);
    ratio = std::abs(rho) / R;
    const Vec3 n = layer == LayerType::adjoint_double ? st.normal() : sp.normal();
    geo = (X * n.x + Y * n.y + Z * n.z) / (rho * rho);
    kr = k * R;
    gp = sp.g();
  }
  double val;
  switch (layer) {
    case LayerType::single:
      val = std::cos(kr) * ratio * gp / four_pi;
      break;
    case LayerType::double_layer:
      val = (std::cos(kr) + kr * std::sin(kr)) * ratio * ratio * ratio * geo / four_pi;
      break;
    default:
      val = -(std::cos(kr) + kr * std::sin(kr)) * ratio * ratio * ratio * geo * gp / (four_pi * st.g());
      break;
  }
  return eta * val * phase;
}

namespace detail {

inline double polar_rho(const QuadratureConfig& qc, int j) {
  const int half = qc.n_rho / 2;
  if (j == half) return 0.0;
  return -qc.r1 + j * (2.0 * qc.r1 / qc.n_rho);
}

inline double polar_theta(const QuadratureConfig& qc, int l) { return l * pi / qc.n_theta; }

}  // namespace detail

/// Local singular integrals at every node for a given density, with the density evaluated at
/// the polar points by trigonometric interpolation.
inline std::vector<cplx> singular_layer_apply(const GratingSurface& surf, const SurfaceGrid& grid,
                                              const std::vector<cplx>& density,
                                              const QuadratureConfig& qc, const QuasiPeriodicity& qp,
                                              LayerType layer) {
  qc.validate(grid.d1, grid.d2);
  const int N = grid.N;
  std::vector<cplx> out(grid.size());
  const double w = (2.0 * qc.r1 / qc.n_rho) * (pi / qc.n_theta);
  parallel_for(grid.size(), [&](std::size_t t) {
    const int tp = static_cast<int>(t) / N, tq = static_cast<int>(t) % N;
    const double xt = grid.x(tp), yt = grid.y(tq);
    std::vector<PlanePoint> pts;
    std::vector<cplx> kv;
    for (int l = 0; l < qc.n_theta; ++l) {
      const double th = detail::polar_theta(qc, l);
      for (int j = 1; j < qc.n_rho; ++j) {
        const double rho = detail::polar_rho(qc, j);
        pts.push_back({xt + rho * std::cos(th), yt + rho * std::sin(th)});
        kv.push_back(polar_integrand(surf, grid.pts[t], xt, yt, qp, qc, rho, th, layer));
      }
    }
    const auto dens = fourier_interpolate(grid, density, pts);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) acc += kv[i] * dens[i];
    out[t] = w * acc;
  });
  return out;
}

/// Trapezoid sum of the smooth kernel parts over the target-centered period window.
inline std::vector<cplx> smooth_layer_apply(const PairKernelEvaluator& ev, const SurfaceGrid& grid,
                                            const std::vector<cplx>& density, LayerType layer) {
  const int n = grid.size();
  const double h2 = grid.h1 * grid.h2;
  std::vector<cplx> out(n);
  parallel_for(n, [&](std::size_t t) {
    cplx acc = 0.0;
    for (int s = 0; s < n; ++s) {
      const auto p = ev.parts(static_cast<int>(t), s);
      const double gs = grid.pts[s].g();
      switch (layer) {
        case LayerType::single: acc += p.k.sl_smooth * gs * density[s]; break;
        case LayerType::double_layer: acc += p.k.dl_smooth * density[s]; break;
        default: acc += p.k.adl_smooth * gs * density[s]; break;
      }
    }
    out[t] = h2 * acc;
  });
  return out;
}

/// Trapezoid sum of (1 - eta) times the singular kernel parts (zero on the diagonal).
inline std::vector<cplx> complement_layer_apply(const PairKernelEvaluator& ev, const SurfaceGrid& grid,
                                                const std::vector<cplx>& density, LayerType layer) {
  const int n = grid.size();
  const double h2 = grid.h1 * grid.h2;
  std::vector<cplx> out(n);
  parallel_for(n, [&](std::size_t t) {
    cplx acc = 0.0;
    for (int s = 0; s < n; ++s) {
      if (static_cast<int>(t) == s) continue;
      const auto p = ev.parts(static_cast<int>(t), s);
      const double c = 1.0 - p.pou;
      if (c == 0.0) continue;
      const double gs = grid.pts[s].g();
      switch (layer) {
        case LayerType::single: acc += c * p.k.sl_sing * gs * density[s]; break;
        case LayerType::double_layer: acc += c * p.k.dl_sing * density[s]; break;
        default: acc += c * p.k.adl_sing * gs * density[s]; break;
      }
    }
    out[t] = h2 * acc;
  });
  return out;
}

struct NystromSystem {
  Eigen::MatrixXcd A;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  CombinedFieldParams cf;
  QuadratureConfig qc;
  KernelConfig kernel;
  int N = 0;
  int chebyshev_degree = 0;
};

/// Dense Nystrom operator. Dirichlet: xi/2 + i eta S + xi D. Neumann: -1/2 + D^T (normal
/// derivative at the target of the single layer).
inline NystromSystem assemble(const GratingSurface& surf, const SurfaceGrid& grid,
                              const QuadratureConfig& qc, const CombinedFieldParams& cf,
                              const PeriodicKernel& ker, BoundaryCondition bc) {
  qc.validate(grid.d1, grid.d2);
  if (bc == BoundaryCondition::dirichlet) cf.validate();
  const int N = grid.N, n = grid.size();
  const double h2 = grid.h1 * grid.h2;
  const auto& qp = ker.qp();
  PairKernelEvaluator ev(ker, grid, qc);

  NystromSystem sys;
  sys.bc = bc;
  sys.cf = cf;
  sys.qc = qc;
  sys.kernel = ker.config();
  sys.N = N;
  sys.chebyshev_degree = ev.table().degree();
  sys.A = Eigen::MatrixXcd::Zero(n, n);

  const cplx c_sl = I * cf.eta, c_dl = cf.xi;
  const double diag = bc == BoundaryCondition::dirichlet ? 0.5 * cf.xi : -0.5;

  // Polar-grid interpolation weights: L[(l * (n_rho - 1) + j - 1) * N + delta].
  const int nr = qc.n_rho - 1;
  std::vector<double> LX(static_cast<std::size_t>(qc.n_theta) * nr * N),
      LY(static_cast<std::size_t>(qc.n_theta) * nr * N);
  for (int l = 0; l < qc.n_theta; ++l) {
    const double th = detail::polar_theta(qc, l);
    for (int j = 1; j < qc.n_rho; ++j) {
      const double rho = detail::polar_rho(qc, j);
      for (int dlt = 0; dlt < N; ++dlt) {
        const std::size_t at = (static_cast<std::size_t>(l) * nr + j - 1) * N + dlt;
        LX[at] = periodic_sinc(dlt * grid.h1 + rho * std::cos(th), N, grid.d1);
        LY[at] = periodic_sinc(dlt * grid.h2 + rho * std::sin(th), N, grid.d2);
      }
    }
  }
  const double wpolar = (2.0 * qc.r1 / qc.n_rho) * (pi / qc.n_theta);

  parallel_for(n, [&](std::size_t tu) {
    const int t = static_cast<int>(tu);
    const int tp = t / N, tq = t % N;
    // Trapezoid part.
    for (int s = 0; s < n; ++s) {
      const auto p = ev.parts(t, s);
      const double gs = grid.pts[s].g();
      const double comp = t == s ? 0.0 : 1.0 - p.pou;
      cplx v;
      if (bc == BoundaryCondition::dirichlet) {
        cplx sl = p.k.sl_smooth, dl = p.k.dl_smooth;
        if (comp != 0.0) {
          sl += comp * p.k.sl_sing;
          dl += comp * p.k.dl_sing;
        }
        v = h2 * (c_sl * sl * gs + c_dl * dl);
      } else {
        cplx adl = p.k.adl_smooth;
        if (comp != 0.0) adl += comp * p.k.adl_sing;
        v = h2 * adl * gs;
      }
      sys.A(t, s) = v;
    }
    sys.A(t, t) += diag;
    // Polar part.
    const double xt = grid.x(tp), yt = grid.y(tq);
    std::vector<cplx> row(n, 0.0);
    std::vector<cplx> tmp(N);
    for (int l = 0; l < qc.n_theta; ++l) {
      const double th = detail::polar_theta(qc, l);
      for (int j = 1; j < qc.n_rho; ++j) {
        const double rho = detail::polar_rho(qc, j);
        cplx c;
        if (bc == BoundaryCondition::dirichlet) {
          c = c_sl * polar_integrand(surf, grid.pts[t], xt, yt, qp, qc, rho, th, LayerType::single) +
              c_dl * polar_integrand(surf, grid.pts[t], xt, yt, qp, qc, rho, th, LayerType::double_layer);
        } else {
          c = polar_integrand(surf, grid.pts[t], xt, yt, qp, qc, rho, th, LayerType::adjoint_double);
        }
        if (c == cplx(0.0, 0.0)) continue;
        c *= wpolar;
        const double* lx = &LX[(static_cast<std::size_t>(l) * nr + j - 1) * N];
        const double* ly = &LY[(static_cast<std::size_t>(l) * nr + j - 1) * N];
        for (int s2 = 0; s2 < N; ++s2) tmp[s2] = c * ly[wrap_index(tq, s2, N)];
        for (int s1 = 0; s1 < N; ++s1) {
          const double wx = lx[wrap_index(tp, s1, N)];
          if (wx == 0.0) continue;
          cplx* r = &row[static_cast<std::size_t>(s1) * N];
          for (int s2 = 0; s2 < N; ++s2) r[s2] += wx * tmp[s2];
        }
      }
    }
    for (int s = 0; s < n; ++s) sys.A(t, s) += row[s];
  });
  return sys;
}

}  // namespace qpgreen
