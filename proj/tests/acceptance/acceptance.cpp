// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <qpgreen/qpgreen.hpp>

using namespace qpgreen;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void run(int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = t <= limit_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s  [%2d] %s: %s; %.1f s (limit %.0f s)%s\n", ok ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), t, limit_s, in_time ? "" : " TIME EXCEEDED");
  std::fflush(stdout);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// (0,0,1) source, targets in [0,.6]^2 x [.6,1.4]
std::vector<EvalPoint> study_grid() { return evaluation_grid({0.0, 0.0, 1.0}, 0.0, 0.6, 0.0, 0.6, 0.6, 1.4, 4, 4, 5); }

std::vector<double> schedule_in(double lo, double hi) {
  std::vector<double> s;
  for (int i = 0; i < 60; ++i) {
    const double a = std::pow(1.2, i);
    if (a >= lo && a <= hi) s.push_back(a);
  }
  return s;
}

Outcome oracle_equivalence() {
  const QuasiPeriodicity qp(2.5, 1.0, 1.0);
  const WindowProfile w = bie_window();
  double e60 = 0.0, e240 = 0.0;
  for (double x : linspace(-0.4, 0.4, 5))
    for (double y : linspace(-0.4, 0.4, 5))
      for (double z : linspace(0.2, 1.4, 5)) {
        const EvalPoint p{x, y, z};
        const cplx ref = fourier_green(qp, p);
        e60 = std::max(e60, std::abs(windowed_green(qp, w, 60.0, p) - ref) / std::abs(ref));
        e240 = std::max(e240, std::abs(windowed_green(qp, w, 240.0, p) - ref) / std::abs(ref));
      }
  return {e60 <= 1e-3 && e240 <= 1e-5, fmt("max rel err a=60 %.2e", e60) + fmt(", a=240 %.2e", e240)};
}

Outcome superalgebraic() {
  const auto K = study_grid();
  const auto sched = geometric_schedule(1.2, 10, 30);
  auto slope = [&](double ks) {
    return green_convergence_study(QuasiPeriodicity(two_pi * ks, 1, 1), figure_window(), std::nullopt, sched, K)
        .final_decade_slope();
  };
  const double s04 = slope(0.4), s099 = slope(0.99), s1 = slope(1.0);
  const bool ok = s04 <= -3.0 && s099 >= s04 + 2.0 && s1 >= -0.3;
  return {ok, fmt("final-decade slopes k=0.4: %.2f", s04) + fmt(", k=0.99: %.2f", s099) +
                  fmt(", k=1.0 (Wood): %.2f", s1)};
}

Outcome algebraic_at_wood() {
  const auto K = study_grid();
  const auto sched = schedule_in(20.0, 120.0);
  const QuasiPeriodicity qp(two_pi, 1, 1);
  auto slope = [&](int p) {
    ShiftConfig sc;
    sc.p = p;
    sc.d = 1.4;
    const auto st = green_convergence_study(qp, bie_window(), sc, sched, K);
    return loglog_slope(st.a, st.diff);
  };
  const double s1 = slope(1), s3 = slope(3);
  return {s1 <= -0.2 && s3 <= -1.2, fmt("slope p=1: %.2f", s1) + fmt(", p=3: %.2f", s3)};
}

Outcome weight_identities() {
  double worst = 0.0;
  bool moments = true;
  for (int p = 1; p <= 5; ++p) {
    const auto a = binomial_weights(p);
    double s0 = 0.0, s1 = 0.0;
    for (int q = 0; q <= p; ++q) {
      s0 += a[q];
      s1 += q * a[q];
    }
    if (s0 != 0.0 || (p >= 2 && s1 != 0.0)) moments = false;
  }
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> G(-10.0, 10.0), D(0.1, 3.0);
  for (int t = 0; t < 100; ++t) {
    const double g = G(rng), d = D(rng);
    const double th = std::remainder(g * d, two_pi);  // same e^{i q g d}, smaller phase rounding
    for (int p = 1; p <= 5; ++p) {
      const auto a = binomial_weights(p);
      cplx s = 0.0;
      for (int q = 0; q <= p; ++q) s += a[q] * std::polar(1.0, q * th);
      worst = std::max(worst, std::abs(s - std::pow(1.0 - std::polar(1.0, th), p)));
    }
  }
  return {moments && worst <= 1e-13,
          std::string(moments ? "moments exact" : "moments nonzero") + fmt(", generating fn err %.2e", worst)};
}

template <class F, class DF>
double gradient_error(const F& G, const DF& dG, const EvalPoint& p) {
  const double h = 1e-5;
  const CVec3 g = dG(p);
  const cplx fd[3] = {(G({p.x + h, p.y, p.z}) - G({p.x - h, p.y, p.z})) / (2 * h),
                      (G({p.x, p.y + h, p.z}) - G({p.x, p.y - h, p.z})) / (2 * h),
                      (G({p.x, p.y, p.z + h}) - G({p.x, p.y, p.z - h})) / (2 * h)};
  const double scale = std::sqrt(std::norm(g[0]) + std::norm(g[1]) + std::norm(g[2]));
  const double err = std::sqrt(std::norm(g[0] - fd[0]) + std::norm(g[1] - fd[1]) + std::norm(g[2] - fd[2]));
  return err / scale;
}

Outcome gradient_checks() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.5, 0.5), Z(0.15, 1.2);
  const WindowProfile w = bie_window();
  const QuasiPeriodicity qw(2.3, 1, 1, 0.2, 0.4);
  const QuasiPeriodicity qm(two_pi, 1, 1);
  const ShiftConfig sc;
  const auto gs = grazing_set(qm, sc);
  double ew = 0.0, em = 0.0;
  for (int t = 0; t < 50; ++t) {
    const EvalPoint p{U(rng), U(rng), Z(rng)};
    ew = std::max(ew, gradient_error([&](const EvalPoint& q) { return windowed_green(qw, w, 10.0, q); },
                                     [&](const EvalPoint& q) { return windowed_green_gradient(qw, w, 10.0, q); }, p));
    em = std::max(em, gradient_error([&](const EvalPoint& q) { return modified_green(qm, w, sc, gs, 6.0, q); },
                                     [&](const EvalPoint& q) { return modified_green_gradient(qm, w, sc, gs, 6.0, q); },
                                     p));
  }
  return {ew <= 1e-6 && em <= 1e-6, fmt("max rel err windowed %.2e", ew) + fmt(", modified %.2e", em)};
}

template <class F>
double residual_order(const F& G, double k, const EvalPoint& p) {
  std::vector<double> hs{1e-2, 5e-3, 2.5e-3}, rs;
  for (double h : hs) {
    const cplx c = G(p);
    const cplx lap = (G({p.x + h, p.y, p.z}) + G({p.x - h, p.y, p.z}) + G({p.x, p.y + h, p.z}) +
                      G({p.x, p.y - h, p.z}) + G({p.x, p.y, p.z + h}) + G({p.x, p.y, p.z - h}) - 6.0 * c) /
                     (h * h);
    rs.push_back(std::abs(lap + k * k * c));
  }
  return loglog_slope(hs, rs);
}

Outcome helmholtz_residual() {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> U(-0.5, 0.5), Z(0.2, 0.9);
  const QuasiPeriodicity qw(2.0, 1, 1, 0.3, 0.0);
  const QuasiPeriodicity qv(two_pi, 1, 1);
  ShiftConfig sc;
  sc.b_value = {0.7, -0.2};
  const auto gs = grazing_set(qv, sc);
  double lo = 1e9, hi = -1e9;
  for (int t = 0; t < 20; ++t) {
    const EvalPoint p{U(rng), U(rng), Z(rng)};
    for (double o : {residual_order([&](const EvalPoint& q) { return windowed_green(qw, bie_window(), 8.0, q); }, qw.k, p),
                     residual_order([&](const EvalPoint& q) { return regularizer_v(qv, sc, gs, q); }, qv.k, p)}) {
      lo = std::min(lo, o);
      hi = std::max(hi, o);
    }
  }
  return {lo >= 1.8 && hi <= 2.2, fmt("observed order in [%.3f", lo) + fmt(", %.3f]", hi)};
}

Outcome brute_force_matvec() {
  double worst = 0.0;
  for (BoundaryCondition bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    const auto surf = cos_cos_surface(0.4);
    const auto grid = sample_surface(surf, 8);
    const QuasiPeriodicity qp(two_pi, 1, 1, 0.3, -0.2);
    const PeriodicKernel ker(KernelConfig{qp, bie_window(), 6.0, KernelChoice::modified});
    const QuadratureConfig qc = default_quadrature(grid);
    const CombinedFieldParams cf = default_combined_field(qp.k);
    const NystromSystem sys = assemble(surf, grid, qc, cf, ker, bc);
    const int n = grid.size();
    std::mt19937 rng(17);
    std::normal_distribution<double> D;
    std::vector<cplx> phi(n);
    for (auto& v : phi) v = {D(rng), D(rng)};
    const VectorC Ax = sys.A * Eigen::Map<const VectorC>(phi.data(), n);

    const bool dir = bc == BoundaryCondition::dirichlet;
    const auto s1 = singular_layer_apply(surf, grid, phi, qc, qp, dir ? LayerType::single : LayerType::adjoint_double);
    const auto s2 = dir ? singular_layer_apply(surf, grid, phi, qc, qp, LayerType::double_layer) : std::vector<cplx>(n);
    const double h2 = grid.h1 * grid.h2;
    double num = 0.0, den = 0.0;
    for (int t = 0; t < n; ++t) {
      cplx acc = 0.0;
      for (int s = 0; s < n; ++s) {
        const SplitKernel k = split_kernel(ker, grid, t, s);
        const double X = centered_offset(t / 8, s / 8, 8) * grid.h1, Y = centered_offset(t % 8, s % 8, 8) * grid.h2;
        const double c = t == s ? 0.0 : 1.0 - qc.pou(std::hypot(X, Y));
        const double gs = grid.pts[s].g();
        if (dir) {
          const cplx sl = k.sl_smooth + (c != 0.0 ? c * k.sl_sing : 0.0);
          const cplx dl = k.dl_smooth + (c != 0.0 ? c * k.dl_sing : 0.0);
          acc += h2 * (I * cf.eta * sl * gs + cf.xi * dl) * phi[s];
        } else {
          acc += h2 * (k.adl_smooth + (c != 0.0 ? c * k.adl_sing : 0.0)) * gs * phi[s];
        }
      }
      const cplx brute = dir ? 0.5 * cf.xi * phi[t] + acc + I * cf.eta * s1[t] + cf.xi * s2[t]
                             : -0.5 * phi[t] + acc + s1[t];
      num = std::max(num, std::abs(Ax(t) - brute));
      den = std::max(den, std::abs(brute));
    }
    worst = std::max(worst, num / den);
  }
  return {worst <= 1e-10, fmt("max rel diff (Dirichlet and Neumann) %.2e", worst)};
}

Outcome flat_mirror() {
  SolverConfig cfg;
  cfg.N = 16;
  cfg.a = 60.0;
  const ScatterResult r = solve_scattering(flat_surface(), {1.0, 0.0, 0.0}, cfg);
  double others = 0.0;
  for (const auto& m : r.spectrum.propagating())
    if (m.j != 0 || m.l != 0) others = std::max(others, std::abs(m.B));
  const double e00 = std::abs(r.spectrum.B(0, 0) + 1.0);
  return {r.converged && e00 <= 1e-3 && others <= 1e-3 && r.energy_error <= 1e-3,
          fmt("|B00+1| %.2e", e00) + fmt(", other propagating %.2e", others) + fmt(", eps %.2e", r.energy_error)};
}

Outcome table_reproduction() {
  const auto surf = cos_cos_surface(0.5);
  SolverConfig c1;
  c1.N = 8;
  c1.a = 60.0;
  // k = 1 in absolute units; k = 1 in units of 2 pi is the normal-incidence Wood point
  const ScatterResult r1 = solve_scattering(surf, {1.0, 0.0, 0.0}, c1);
  const bool ok1 = r1.converged && r1.energy_error >= 4e-4 && r1.energy_error <= 1e-2;

  SolverConfig cw;
  cw.N = 24;
  cw.a = 40.0;
  cw.kernel = KernelChoice::modified;
  cw.shift.p = 3;
  cw.shift.d = 1.4;
  cw.gmres_tol = 1e-6;
  const ScatterResult rw = solve_scattering(surf, {two_pi, 0.0, 0.0}, cw);
  const bool ok2 = rw.converged && rw.energy_error >= 8e-5 && rw.energy_error <= 2e-3 && rw.iterations <= 40;

  double worst_ratio = 1.0;
  std::string near;
  for (double dk : {-1e-6, 1e-6}) {
    const ScatterResult rn = solve_scattering(surf, {two_pi + dk, 0.0, 0.0}, cw);
    const double ratio = std::max(rn.energy_error / rw.energy_error, rw.energy_error / rn.energy_error);
    worst_ratio = std::max(worst_ratio, rn.converged ? ratio : 1e300);
    near += fmt(", eps(2pi%+.0e)", dk) + fmt(" %.2e", rn.energy_error);
  }
  const bool ok3 = worst_ratio <= 2.0;
  return {ok1 && ok2 && ok3, std::string("(i) ") + (ok1 ? "ok" : "out") + fmt(" eps %.2e", r1.energy_error) +
                                 "; (ii) " + (ok2 ? "ok" : "out") + fmt(" eps %.2e", rw.energy_error) +
                                 fmt(" iters %.0f", rw.iterations) + "; (iii) " + (ok3 ? "ok" : "out") + near};
}

Outcome angle_sweep_check() {
  SolverConfig cfg;
  cfg.N = 16;
  cfg.a = 40.0;
  cfg.kernel = KernelChoice::modified;
  const double psi0 = pi / 4;
  std::vector<double> psis;
  for (int i = -3; i <= 3; ++i) psis.push_back(psi0 + 0.05 * i / 3.0);
  const auto rows = angle_sweep(cos_cos_surface(0.5), 2.0 * std::sqrt(2.0) * pi, 0.0, psis, cfg);
  bool ok = rows.size() == 7 && rows[3].psi == psi0 && rows[3].wood;
  double eps = 0.0, asym = 0.0;
  for (const auto& r : rows) {
    if (!r.ok || !r.converged) {
      ok = false;
      continue;
    }
    eps = std::max(eps, r.energy_error);
    asym = std::max(asym, std::abs(std::abs(r.Bm1m1) - std::abs(r.Bm11)));
  }
  ok = ok && eps <= 2e-2 && asym <= 1e-3;
  return {ok, fmt("max eps %.2e", eps) + fmt(", max ||B-1-1|-|B-11|| %.2e", asym)};
}

}  // namespace

int main() {
  run(1, "oracle equivalence", 30, oracle_equivalence);
  run(2, "super-algebraic convergence", 120, superalgebraic);
  run(3, "algebraic rate at Wood", 120, algebraic_at_wood);
  run(4, "weight identities", 1, weight_identities);
  run(5, "gradient checks", 10, gradient_checks);
  run(6, "Helmholtz residual", 10, helmholtz_residual);
  run(7, "BIE brute-force equivalence", 30, brute_force_matvec);
  run(8, "flat-mirror exactness", 60, flat_mirror);
  run(9, "table reproduction", 600, table_reproduction);
  run(10, "angle sweep", 600, angle_sweep_check);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
