#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "kernel.hpp"
#include "lattice.hpp"
#include "lattice_sum.hpp"
#include "linsolve.hpp"
#include "nystrom.hpp"
#include "shifted.hpp"
#include "surface.hpp"

namespace qpgreen {

/// Plane wave e^{i(alpha x + beta y - gamma z)} incident from above.
struct IncidentWave {
  double k = 1.0;
  double psi = 0.0;  ///< polar angle from the downward vertical
  double phi = 0.0;  ///< azimuth

  void validate() const {
    if (!(k > 0.0)) throw configuration_error("wavenumber must be positive");
    if (!(psi >= 0.0 && psi < pi / 2)) throw configuration_error("incidence angle psi must lie in [0, pi/2)");
  }
  double alpha() const { return k * std::sin(psi) * std::cos(phi); }
  double beta() const { return k * std::sin(psi) * std::sin(phi); }
  double gamma() const { return k * std::cos(psi); }

  QuasiPeriodicity quasi_periodicity(double d1, double d2) const {
    return QuasiPeriodicity(k, d1, d2, alpha(), beta());
  }
};

/// Entries -e^{-i gamma f} at the nodes.
inline std::vector<cplx> dirichlet_rhs(const IncidentWave& w, const SurfaceGrid& grid) {
  std::vector<cplx> b(grid.size());
  for (int i = 0; i < grid.size(); ++i) b[i] = -std::exp(-I * w.gamma() * grid.pts[i].f);
  return b;
}

/// Minus the unit-normal derivative of the incident wave, periodic phase removed.
inline std::vector<cplx> neumann_rhs(const IncidentWave& w, const SurfaceGrid& grid) {
  std::vector<cplx> b(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const auto& s = grid.pts[i];
    b[i] = I * (w.alpha() * s.fx + w.beta() * s.fy + w.gamma()) / s.g() * std::exp(-I * w.gamma() * s.f);
  }
  return b;
}

struct RayleighMode {
  int j = 0;
  int l = 0;
  cplx gamma_jl;
  cplx B;
  bool propagating = false;
  bool grazing_exact = false;
};

/// Amplitudes of u = sum B_jl e^{i(alpha_j x + beta_l y + gamma_jl z)} above the grating.
struct RayleighSpectrum {
  int j_max = 0;
  std::vector<RayleighMode> modes;

  const RayleighMode& mode(int j, int l) const {
    for (const auto& m : modes)
      if (m.j == j && m.l == l) return m;
    throw std::out_of_range("Rayleigh mode (" + std::to_string(j) + "," + std::to_string(l) +
                            ") not in spectrum");
  }
  cplx B(int j, int l) const { return mode(j, l).B; }
  std::vector<RayleighMode> propagating() const {
    std::vector<RayleighMode> out;
    for (const auto& m : modes)
      if (m.propagating) out.push_back(m);
    return out;
  }
  std::vector<RayleighMode> grazing() const {
    std::vector<RayleighMode> out;
    for (const auto& m : modes)
      if (m.grazing_exact) out.push_back(m);
    return out;
  }
};

inline int default_rayleigh_jmax(const QuasiPeriodicity& qp) { return grazing_index_bound(qp) + 2; }

/// Density moments times the far-field factor of the kernel (1/gamma for the plain kernel,
/// the shifted factor plus b for the Wood-safe kernels).
inline RayleighSpectrum rayleigh_coefficients(const std::vector<cplx>& density, const QuasiPeriodicity& qp,
                                              const SurfaceGrid& grid, BoundaryCondition bc,
                                              const CombinedFieldParams& cf, KernelChoice choice,
                                              const ShiftConfig& sc, int j_max = -1) {
  if (static_cast<int>(density.size()) != grid.size())
    throw configuration_error("density size does not match the grid");
  if (j_max < 0) j_max = default_rayleigh_jmax(qp);
  if (choice == KernelChoice::plain && has_exact_wood(qp))
    throw wood_error("plain-kernel Rayleigh extraction is undefined at a Wood configuration");
  const int N = grid.N;
  const double h2 = grid.h1 * grid.h2;
  const double norm = 1.0 / (2.0 * qp.d1 * qp.d2);
  RayleighSpectrum sp;
  sp.j_max = j_max;
  std::vector<cplx> ex(N), ey(N);
  for (int j = -j_max; j <= j_max; ++j) {
    for (int l = -j_max; l <= j_max; ++l) {
      const cplx g = gamma(qp, j, l);
      const double aj = qp.alpha_j(j), bl = qp.beta_l(l);
      for (int p = 0; p < N; ++p) ex[p] = detail::expi(-two_pi * j * grid.x(p) / qp.d1);
      for (int q = 0; q < N; ++q) ey[q] = detail::expi(-two_pi * l * grid.y(q) / qp.d2);
      cplx c = 0.0;
      for (int p = 0; p < N; ++p) {
        for (int q = 0; q < N; ++q) {
          const auto& s = grid.at(p, q);
          const cplx e = ex[p] * ey[q] * std::exp(-I * g * s.f);
          cplx w;
          if (bc == BoundaryCondition::dirichlet)
            w = -cf.eta * s.g() + cf.xi * (-aj * s.fx - bl * s.fy + g);
          else
            w = I * s.g();
          c += w * e * density[grid.index(p, q)];
        }
      }
      c *= norm * h2;
      cplx factor;
      if (choice == KernelChoice::plain) {
        factor = 1.0 / g;
      } else {
        const bool in_u = choice == KernelChoice::modified && std::abs(g) / qp.k < sc.grazing_threshold;
        factor = wood_factor(g, sc.p, sc.d, in_u ? sc.b_value : cplx(0.0, 0.0));
      }
      RayleighMode m;
      m.j = j;
      m.l = l;
      m.gamma_jl = g;
      m.B = c * factor;
      m.propagating = is_propagating(g);
      m.grazing_exact = g == cplx(0.0, 0.0);
      sp.modes.push_back(m);
    }
  }
  return sp;
}

/// |sum_P gamma_jl |B_jl|^2 - gamma_00| / gamma_00.
inline double energy_error(const RayleighSpectrum& sp, const QuasiPeriodicity& qp) {
  const cplx g00 = gamma(qp, 0, 0);
  if (!is_propagating(g00)) throw undefined_metric_error("energy error undefined: gamma_00 is not positive");
  double flux = 0.0;
  for (const auto& m : sp.modes)
    if (m.propagating) flux += m.gamma_jl.real() * std::norm(m.B);
  return std::abs(flux - g00.real()) / g00.real();
}

/// |B_00 - B_00^ref| / |B_00^ref|.
inline double coefficient_error(const RayleighSpectrum& sp, const RayleighSpectrum& ref) {
  const cplx r = ref.B(0, 0);
  if (std::abs(r) == 0.0) throw undefined_metric_error("coefficient error undefined: reference B_00 = 0");
  return std::abs(sp.B(0, 0) - r) / std::abs(r);
}

struct SolverConfig {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  KernelChoice kernel = KernelChoice::plain;
  ShiftConfig shift;
  WindowProfile window = bie_window();
  double a = 60.0;
  int N = 8;
  std::optional<CombinedFieldParams> cf;  ///< default (eta, xi) = (-k, 1)
  std::optional<QuadratureConfig> qc;     ///< default from the grid
  SolveMethod method = SolveMethod::gmres;
  double gmres_tol = 1e-6;
  int restart = 50;
  int max_iter = 500;
  int j_max = -1;  ///< Rayleigh index range, default propagating range + 2
};

struct ScatterResult {
  QuasiPeriodicity qp;
  SurfaceGrid grid;
  CombinedFieldParams cf;
  QuadratureConfig qc;
  std::vector<cplx> density;
  RayleighSpectrum spectrum;
  double energy_error = 0.0;
  std::optional<double> coefficient_error;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<WoodMode> wood;  ///< modes with |gamma|/k below the shift's grazing threshold
  int chebyshev_degree = 0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

inline ScatterResult solve_scattering(const GratingSurface& surf, const IncidentWave& wave,
                                      const SolverConfig& cfg) {
  wave.validate();
  surf.validate();
  ScatterResult res;
  res.qp = wave.quasi_periodicity(surf.d1, surf.d2);
  res.wood = wood_modes(res.qp, cfg.shift.grazing_threshold);
  res.grid = sample_surface(surf, cfg.N);
  res.qc = cfg.qc ? *cfg.qc : default_quadrature(res.grid);
  res.cf = cfg.cf ? *cfg.cf : default_combined_field(wave.k);

  const auto t0 = std::chrono::steady_clock::now();
  const PeriodicKernel ker(KernelConfig{res.qp, cfg.window, cfg.a, cfg.kernel, cfg.shift});
  const NystromSystem sys = assemble(surf, res.grid, res.qc, res.cf, ker, cfg.bc);
  res.chebyshev_degree = sys.chebyshev_degree;
  const auto t1 = std::chrono::steady_clock::now();

  const auto rhs_v = cfg.bc == BoundaryCondition::dirichlet ? dirichlet_rhs(wave, res.grid)
                                                            : neumann_rhs(wave, res.grid);
  const VectorC rhs = Eigen::Map<const VectorC>(rhs_v.data(), static_cast<Eigen::Index>(rhs_v.size()));
  SolveReport rep = cfg.method == SolveMethod::direct
                        ? direct_solve(sys.A, rhs)
                        : gmres_solve(sys.A, rhs, cfg.gmres_tol, cfg.restart, cfg.max_iter);
  const auto t2 = std::chrono::steady_clock::now();
  res.assembly_seconds = std::chrono::duration<double>(t1 - t0).count();
  res.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  res.iterations = rep.iterations;
  res.residual = rep.residual;
  res.converged = rep.converged;
  res.density.assign(rep.x.data(), rep.x.data() + rep.x.size());
  res.spectrum = rayleigh_coefficients(res.density, res.qp, res.grid, cfg.bc, res.cf, cfg.kernel,
                                       cfg.shift, cfg.j_max);
  res.energy_error = energy_error(res.spectrum, res.qp);
  return res;
}

/// Scattered field at points above the grating from the discrete layer potential (trapezoid
/// rule, full lattice sums). Quasi-periodic convention.
inline std::vector<cplx> evaluate_scattered_field(const ScatterResult& res, const SolverConfig& cfg,
                                                  const std::vector<Vec3>& pts) {
  const PeriodicKernel ker(KernelConfig{res.qp, cfg.window, cfg.a, cfg.kernel, cfg.shift});
  const auto& grid = res.grid;
  const double h2 = grid.h1 * grid.h2;
  std::vector<cplx> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cplx acc = 0.0;
    for (int p = 0; p < grid.N; ++p) {
      for (int q = 0; q < grid.N; ++q) {
        const auto& s = grid.at(p, q);
        const KernelValue kv = ker.full_direct(pts[i].x - grid.x(p), pts[i].y - grid.y(q), pts[i].z - s.f);
        const cplx dens = res.density[grid.index(p, q)];
        if (cfg.bc == BoundaryCondition::dirichlet)
          acc += (I * res.cf.eta * kv.value * s.g() - res.cf.xi * dot(kv.grad, s.normal())) * dens;
        else
          acc += kv.value * s.g() * dens;
      }
    }
    out[i] = h2 * acc * detail::expi(res.qp.alpha * pts[i].x + res.qp.beta * pts[i].y);
  }
  return out;
}

/// Rayleigh series evaluated at the given points (all tabulated modes, evanescent included).
inline std::vector<cplx> evaluate_rayleigh_series(const RayleighSpectrum& sp, const QuasiPeriodicity& qp,
                                                  const std::vector<Vec3>& pts) {
  std::vector<cplx> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cplx acc = 0.0;
    for (const auto& m : sp.modes)
      acc += m.B * detail::expi(qp.alpha_j(m.j) * pts[i].x + qp.beta_l(m.l) * pts[i].y) *
             std::exp(I * m.gamma_jl * pts[i].z);
    out[i] = acc;
  }
  return out;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw configuration_error("loglog_slope needs two or more points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct ConvergenceStudy {
  std::vector<double> a;     ///< a_i for each consecutive pair (a_i, a_{i+1})
  std::vector<double> diff;  ///< max over K of |G_{i+1} - G_i|
  double slope = 0.0;        ///< log-log slope over the last five points

  /// Slope over the points with a_i in [a_max / 10, a_max].
  double final_decade_slope() const {
    std::vector<double> x, y;
    const double amax = a.back();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= amax / 10.0 * (1.0 - 1e-12)) {
        x.push_back(a[i]);
        y.push_back(diff[i]);
      }
    }
    return loglog_slope(x, y);
  }

  /// Slope over the points with a_i in [lo, hi].
  double slope_between(double lo, double hi) const {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= lo && a[i] <= hi) {
        x.push_back(a[i]);
        y.push_back(diff[i]);
      }
    }
    return loglog_slope(x, y);
  }
};

/// Grid of evaluation differences x - x_hat for target points evenly spaced in
/// [x0,x1] x [y0,y1] x [z0,z1] (nx, ny, nz points), omitting the source itself.
inline std::vector<EvalPoint> evaluation_grid(Vec3 source, double x0, double x1, double y0, double y1,
                                              double z0, double z1, int nx, int ny, int nz) {
  auto lin = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
  std::vector<EvalPoint> out;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int l = 0; l < nz; ++l) {
        const EvalPoint p{lin(x0, x1, nx, i) - source.x, lin(y0, y1, ny, j) - source.y,
                          lin(z0, z1, nz, l) - source.z};
        if (std::abs(p.x) + std::abs(p.y) + std::abs(p.z) < 1e-12) continue;
        out.push_back(p);
      }
  return out;
}

/// a_i = base^i for i = i0..i1.
inline std::vector<double> geometric_schedule(double base, int i0, int i1) {
  if (!(base > 1.0) || i1 <= i0) throw configuration_error("schedule needs base > 1 and i1 > i0");
  std::vector<double> a;
  for (int i = i0; i <= i1; ++i) a.push_back(std::pow(base, i));
  return a;
}

inline ConvergenceStudy green_convergence_study(const QuasiPeriodicity& qp, const WindowProfile& w,
                                                const std::optional<ShiftConfig>& sc,
                                                const std::vector<double>& schedule,
                                                const std::vector<EvalPoint>& K) {
  if (schedule.size() < 3) throw configuration_error("convergence study needs at least three radii");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] > schedule[i - 1])) throw configuration_error("a schedule must be increasing");
  std::vector<std::vector<cplx>> G(schedule.size(), std::vector<cplx>(K.size()));
  parallel_for(schedule.size() * K.size(), [&](std::size_t idx) {
    const std::size_t i = idx / K.size(), q = idx % K.size();
    G[i][q] = sc ? shifted_windowed_green(qp, w, *sc, schedule[i], K[q]) : windowed_green(qp, w, schedule[i], K[q]);
  });
  ConvergenceStudy st;
  for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
    double mx = 0.0;
    for (std::size_t q = 0; q < K.size(); ++q) mx = std::max(mx, std::abs(G[i + 1][q] - G[i][q]));
    st.a.push_back(schedule[i]);
    st.diff.push_back(mx);
  }
  const std::size_t n = st.a.size(), from = n >= 5 ? n - 5 : 0;
  st.slope = loglog_slope({st.a.begin() + from, st.a.end()}, {st.diff.begin() + from, st.diff.end()});
  return st;
}

struct SweepRow {
  double psi = 0.0;
  bool ok = false;
  bool converged = false;
  bool wood = false;  ///< some mode exactly grazing
  cplx B00, Bm1m1, Bm11;
  double energy_error = 0.0;
  int iterations = 0;
  std::string error;
};

inline std::optional<cplx> try_mode(const RayleighSpectrum& sp, int j, int l) {
  for (const auto& m : sp.modes)
    if (m.j == j && m.l == l) return m.B;
  return std::nullopt;
}

inline std::vector<SweepRow> angle_sweep(const GratingSurface& surf, double k, double phi,
                                         const std::vector<double>& psi_list, const SolverConfig& cfg) {
  std::vector<SweepRow> rows;
  for (double psi : psi_list) {
    SweepRow r;
    r.psi = psi;
    try {
      const IncidentWave w{k, psi, phi};
      const auto qp = w.quasi_periodicity(surf.d1, surf.d2);
      r.wood = has_exact_wood(qp);
      const ScatterResult res = solve_scattering(surf, w, cfg);
      r.B00 = try_mode(res.spectrum, 0, 0).value_or(0.0);
      r.Bm1m1 = try_mode(res.spectrum, -1, -1).value_or(0.0);
      r.Bm11 = try_mode(res.spectrum, -1, 1).value_or(0.0);
      r.energy_error = res.energy_error;
      r.iterations = res.iterations;
      r.converged = res.converged;
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace qpgreen
