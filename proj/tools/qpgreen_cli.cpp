// qpgreen command-line driver: Green-function convergence studies, grating solves, angle sweeps.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qpgreen/qpgreen.hpp>

using namespace qpgreen;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* schema = "qpgreen-result/1";

enum ExitCode { ok = 0, failed = 1, usage = 2, wood_refused = 3, not_converged = 4 };

struct Options {
  std::string k = "";
  bool scaled = false;
  bool absolute = false;
  std::string bloch = "0,0";
  double psi = 0.0;
  double phi = 0.0;
  std::string psi_list;
  double psi_center = pi / 4;
  double psi_halfwidth = 0.05;
  int psi_count = 7;
  std::string surface = "cos-cos:0.5";
  std::string bc = "dirichlet";
  std::string kernel = "";
  int p = 3;
  double d = 1.4;
  double b_value = 1.0;
  double a = -1.0;
  std::string a_schedule = "1.2^10:30";
  int n = -1;
  std::optional<double> eta, xi;
  double gmres_tol = 1e-6;
  std::string method = "gmres";
  double ref_a = 0.0;
  int ref_n = 0;
  std::string ref_json;
  int grid_x = 4, grid_y = 4, grid_z = 5;
  std::string format = "csv";
  std::string out;
};

/// "2pi", "2sqrt2pi", "4pi" or a number, optionally followed by +offset or -offset.
double parse_k(const std::string& s) {
  static const std::regex re(R"(^\s*(2pi|2sqrt2pi|4pi|[0-9.eE+-]+?)\s*(([+-])\s*([0-9.]+(e[+-]?[0-9]+)?))?\s*$)",
                             std::regex::icase);
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw configuration_error("cannot parse wavenumber '" + s + "'");
  const std::string base = m[1];
  double k;
  if (base == "2pi") k = two_pi;
  else if (base == "2sqrt2pi") k = 2.0 * std::sqrt(2.0) * pi;
  else if (base == "4pi") k = 2.0 * two_pi;
  else {
    std::size_t used = 0;
    k = std::stod(base, &used);
    if (used != base.size()) throw configuration_error("cannot parse wavenumber '" + s + "'");
  }
  if (m[2].matched) {
    const double off = std::stod(m[4]);
    k += (m[3] == "-") ? -off : off;
  }
  return k;
}

std::pair<double, double> parse_pair(const std::string& s) {
  const auto c = s.find(',');
  if (c == std::string::npos) throw configuration_error("expected A,B but got '" + s + "'");
  return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
}

/// "base^i0:i1" or a comma-separated list.
std::vector<double> parse_schedule(const std::string& s) {
  static const std::regex re(R"(^\s*([0-9.]+)\^(-?[0-9]+):(-?[0-9]+)\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, re)) return geometric_schedule(std::stod(m[1]), std::stoi(m[2]), std::stoi(m[3]));
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

GratingSurface parse_surface(const std::string& s) {
  if (s == "flat") return flat_surface();
  if (s.rfind("cos-cos:", 0) == 0) return cos_cos_surface(std::stod(s.substr(8)));
  throw configuration_error("unknown surface '" + s + "' (flat or cos-cos:AMPLITUDE)");
}

KernelChoice parse_kernel(const std::string& s) {
  if (s == "plain") return KernelChoice::plain;
  if (s == "shifted") return KernelChoice::shifted;
  if (s == "modified") return KernelChoice::modified;
  throw configuration_error("unknown kernel '" + s + "'");
}

BoundaryCondition parse_bc(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::dirichlet;
  if (s == "neumann") return BoundaryCondition::neumann;
  throw configuration_error("unknown boundary condition '" + s + "'");
}

ShiftConfig shift_of(const Options& o) {
  ShiftConfig sc;
  sc.p = o.p;
  sc.d = o.d;
  sc.b_value = o.b_value;
  sc.validate();
  return sc;
}

double resolved_k(const Options& o, const std::string& fallback, bool scaled_default) {
  const bool scaled = o.scaled || (scaled_default && !o.absolute);
  const double k = parse_k(o.k.empty() ? fallback : o.k);
  return scaled ? two_pi * k : k;
}

SolverConfig solver_of(const Options& o, KernelChoice kc, double a_default, int n_default) {
  SolverConfig cfg;
  cfg.bc = parse_bc(o.bc);
  cfg.kernel = kc;
  cfg.shift = shift_of(o);
  cfg.a = o.a > 0 ? o.a : a_default;
  cfg.N = o.n > 0 ? o.n : n_default;
  cfg.gmres_tol = o.gmres_tol;
  if (o.method == "direct") cfg.method = SolveMethod::direct;
  else if (o.method != "gmres") throw configuration_error("unknown method '" + o.method + "'");
  if (o.eta || o.xi) {
    CombinedFieldParams cf;
    cf.eta = o.eta.value_or(-1.0);
    cf.xi = o.xi.value_or(1.0);
    cfg.cf = cf;
  }
  return cfg;
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw configuration_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json header(const std::string& command) {
  json j;
  j["schema"] = schema;
  j["version"] = version;
  j["command"] = command;
  return j;
}

// ---------------------------------------------------------------------------------------------

int cmd_green_convergence(const Options& o) {
  const bool scaled = o.scaled || !o.absolute;  // figure units by default
  const double k = resolved_k(o, "0.4", true);
  auto [ba, bb] = parse_pair(o.bloch);
  if (scaled) {
    ba *= two_pi;
    bb *= two_pi;
  }
  const QuasiPeriodicity qp(k, 1.0, 1.0, ba, bb);
  const KernelChoice kc = parse_kernel(o.kernel.empty() ? "plain" : o.kernel);
  std::optional<ShiftConfig> sc;
  if (kc != KernelChoice::plain) sc = shift_of(o);
  const auto modes = wood_modes(qp, 1e-8);
  if (kc == KernelChoice::plain && !modes.empty()) {
    std::cerr << "warning: Wood configuration, grazing modes " << describe_modes(modes)
              << "; the plain lattice sum does not converge here\n";
  }
  const auto schedule = parse_schedule(o.a_schedule);
  const auto K = evaluation_grid({0.0, 0.0, 1.0}, 0.0, 0.6, 0.0, 0.6, 0.6, 1.4, o.grid_x, o.grid_y, o.grid_z);
  const ConvergenceStudy st = green_convergence_study(qp, figure_window(), sc, schedule, K);
  double decade = std::nan("");
  try {
    decade = st.final_decade_slope();
  } catch (const configuration_error&) {
  }

  Sink sink(o.out);
  if (o.format == "json") {
    json j = header("green-convergence");
    j["config"] = {{"k", k},       {"k_scaled", k / two_pi}, {"bloch", {ba, bb}},  {"kernel", to_string(kc)},
                   {"p", o.p},     {"d", o.d},               {"window", "figure-bump separable x-dependent"},
                   {"source", {0.0, 0.0, 1.0}}, {"grid", {o.grid_x, o.grid_y, o.grid_z}}};
    j["wood_modes"] = describe_modes(modes);
    json rows = json::array();
    for (std::size_t i = 0; i < st.a.size(); ++i) rows.push_back({{"a", st.a[i]}, {"diff", st.diff[i]}});
    j["rows"] = rows;
    j["slope"] = st.slope;
    j["final_decade_slope"] = std::isnan(decade) ? json(nullptr) : json(decade);
    sink.out() << j.dump(2) << "\n";
  } else {
    sink.out() << "i,a,diff,local_slope,k,kernel\n";
    for (std::size_t i = 0; i < st.a.size(); ++i) {
      const std::string ls = i == 0 ? "" : fmt(std::log(st.diff[i] / st.diff[i - 1]) / std::log(st.a[i] / st.a[i - 1]));
      sink.out() << i << "," << fmt(st.a[i]) << "," << fmt(st.diff[i]) << "," << ls << "," << fmt(k) << ","
                 << to_string(kc) << "\n";
    }
    sink.out() << "# slope_last5," << fmt(st.slope) << "\n# final_decade_slope," << fmt(decade) << "\n";
  }
  return ok;
}

std::optional<cplx> reference_b00(const Options& o, const GratingSurface& surf, const IncidentWave& w,
                                   const SolverConfig& cfg) {
  if (!o.ref_json.empty()) {
    std::ifstream in(o.ref_json);
    if (!in) throw configuration_error("cannot read reference file '" + o.ref_json + "'");
    const json j = json::parse(in);
    const auto& b = j.at("rows").at(0).at("B00");
    return cplx(b.at(0).get<double>(), b.at(1).get<double>());
  }
  if (o.ref_a > 0.0) {
    SolverConfig rc = cfg;
    rc.a = o.ref_a;
    rc.N = o.ref_n > 0 ? o.ref_n : 2 * cfg.N;
    rc.gmres_tol = std::min(cfg.gmres_tol, 1e-8);
    return solve_scattering(surf, w, rc).spectrum.B(0, 0);
  }
  return std::nullopt;
}

int cmd_grating_solve(const Options& o) {
  const double k = resolved_k(o, "1", false);
  const GratingSurface surf = parse_surface(o.surface);
  const IncidentWave w{k, o.psi, o.phi};
  w.validate();
  const auto qp = w.quasi_periodicity(surf.d1, surf.d2);
  const KernelChoice kc = parse_kernel(o.kernel.empty() ? (has_exact_wood(qp) ? "modified" : "plain") : o.kernel);
  const SolverConfig cfg = solver_of(o, kc, 60.0, 8);
  if (cfg.bc == BoundaryCondition::neumann)
    std::cerr << "note: Neumann grating problems carry no uniqueness guarantee\n";

  const ScatterResult r = solve_scattering(surf, w, cfg);
  std::optional<double> eps1;
  if (auto ref = reference_b00(o, surf, w, cfg)) eps1 = std::abs(r.spectrum.B(0, 0) - *ref) / std::abs(*ref);

  Sink sink(o.out);
  const cplx b00 = r.spectrum.B(0, 0);
  if (o.format == "json") {
    json j = header("grating-solve");
    j["config"] = {{"k", k},
                   {"psi", o.psi},
                   {"phi", o.phi},
                   {"surface", surf.name},
                   {"bc", to_string(cfg.bc)},
                   {"kernel", to_string(kc)},
                   {"p", cfg.shift.p},
                   {"d", cfg.shift.d},
                   {"b_value", complex_json(cfg.shift.b_value)},
                   {"grazing_threshold", cfg.shift.grazing_threshold},
                   {"a", cfg.a},
                   {"n", cfg.N},
                   {"eta", r.cf.eta},
                   {"xi", r.cf.xi},
                   {"r0", r.qc.r0},
                   {"r1", r.qc.r1},
                   {"n_theta", r.qc.n_theta},
                   {"n_rho", r.qc.n_rho},
                   {"gmres_tol", cfg.gmres_tol},
                   {"chebyshev_degree", r.chebyshev_degree}};
    json modes = json::array();
    for (const auto& m : r.spectrum.modes) {
      if (!m.propagating && !m.grazing_exact) continue;
      modes.push_back({{"j", m.j}, {"l", m.l}, {"gamma", m.gamma_jl.real()}, {"B", complex_json(m.B)},
                       {"grazing", m.grazing_exact}});
    }
    j["rows"] = json::array({{{"k", k},
                              {"n", cfg.N},
                              {"a", cfg.a},
                              {"p", cfg.shift.p},
                              {"d", cfg.shift.d},
                              {"iterations", r.iterations},
                              {"residual", r.residual},
                              {"converged", r.converged},
                              {"eps", r.energy_error},
                              {"eps1", eps1 ? json(*eps1) : json(nullptr)},
                              {"B00", complex_json(b00)},
                              {"wood_modes", describe_modes(r.wood)},
                              {"modes", modes},
                              {"assembly_seconds", r.assembly_seconds},
                              {"solve_seconds", r.solve_seconds}}});
    sink.out() << j.dump(2) << "\n";
  } else {
    sink.out() << "k,n,a,p,d,kernel,bc,iterations,residual,converged,eps,eps1,B00_re,B00_im,wood_modes\n";
    sink.out() << fmt(k) << "," << cfg.N << "," << fmt(cfg.a) << "," << cfg.shift.p << "," << fmt(cfg.shift.d) << ","
               << to_string(kc) << "," << to_string(cfg.bc) << "," << r.iterations << "," << fmt(r.residual) << ","
               << (r.converged ? "true" : "false") << "," << fmt(r.energy_error) << "," << (eps1 ? fmt(*eps1) : "")
               << "," << fmt(b00.real()) << "," << fmt(b00.imag()) << ",\"" << describe_modes(r.wood) << "\"\n";
  }
  return r.converged ? ok : not_converged;
}

std::vector<double> psi_values(const Options& o) {
  if (!o.psi_list.empty()) return parse_schedule(o.psi_list);
  if (o.psi_count < 1) throw configuration_error("psi-count must be positive");
  std::vector<double> v;
  if (o.psi_count == 1) return {o.psi_center};
  const int half = o.psi_count / 2;
  for (int i = 0; i < o.psi_count; ++i) {
    // odd counts place the center exactly
    v.push_back(o.psi_count % 2 == 1 ? o.psi_center + o.psi_halfwidth * (i - half) / half
                                     : o.psi_center - o.psi_halfwidth + 2.0 * o.psi_halfwidth * i / (o.psi_count - 1));
  }
  return v;
}

int cmd_angle_sweep(const Options& o) {
  const double k = resolved_k(o, "2sqrt2pi", false);
  const GratingSurface surf = parse_surface(o.surface);
  const KernelChoice kc = parse_kernel(o.kernel.empty() ? "modified" : o.kernel);
  const SolverConfig cfg = solver_of(o, kc, 30.0, 16);
  const auto psis = psi_values(o);
  const auto rows = angle_sweep(surf, k, o.phi, psis, cfg);
  bool all = true;
  for (const auto& r : rows) all = all && r.ok && r.converged;

  Sink sink(o.out);
  if (o.format == "json") {
    json j = header("angle-sweep");
    j["config"] = {{"k", k},      {"phi", o.phi},     {"surface", surf.name}, {"bc", to_string(cfg.bc)},
                   {"kernel", to_string(kc)}, {"p", cfg.shift.p}, {"d", cfg.shift.d}, {"a", cfg.a},
                   {"n", cfg.N},  {"gmres_tol", cfg.gmres_tol}};
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"psi", r.psi},
                     {"ok", r.ok},
                     {"converged", r.converged},
                     {"wood", r.wood},
                     {"iterations", r.iterations},
                     {"eps", r.ok ? json(r.energy_error) : json(nullptr)},
                     {"abs_B00", std::abs(r.B00)},
                     {"abs_Bm1m1", std::abs(r.Bm1m1)},
                     {"abs_Bm11", std::abs(r.Bm11)},
                     {"error", r.error}});
    }
    j["rows"] = arr;
    sink.out() << j.dump(2) << "\n";
  } else {
    sink.out() << "psi,ok,converged,wood,iterations,eps,abs_B00,abs_Bm1m1,abs_Bm11,error\n";
    for (const auto& r : rows) {
      sink.out() << fmt(r.psi) << "," << r.ok << "," << r.converged << "," << (r.wood ? "true" : "false") << ","
                 << r.iterations << "," << (r.ok ? fmt(r.energy_error) : "") << "," << fmt(std::abs(r.B00)) << ","
                 << fmt(std::abs(r.Bm1m1)) << "," << fmt(std::abs(r.Bm11)) << ",\"" << r.error << "\"\n";
    }
  }
  return all ? ok : not_converged;
}

void add_common(CLI::App* c, Options& o) {
  c->add_option("--k", o.k, "wavenumber: number or 2pi, 2sqrt2pi, 4pi, optionally +/-offset");
  c->add_flag("--scaled", o.scaled, "k (and Bloch vector) in units of 2 pi / period");
  c->add_option("--kernel", o.kernel, "plain, shifted or modified");
  c->add_option("--p", o.p, "number of shifts")->check(CLI::Range(0, 5));
  c->add_option("--d", o.d, "shift distance")->check(CLI::PositiveNumber);
  c->add_option("--b-value", o.b_value, "coefficient of the reinstated grazing modes");
  c->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  c->add_option("--out", o.out, "output file (default stdout)");
}

void add_solver(CLI::App* c, Options& o) {
  c->add_option("--surface", o.surface, "flat or cos-cos:AMPLITUDE");
  c->add_option("--bc", o.bc, "dirichlet or neumann")->check(CLI::IsMember({"dirichlet", "neumann"}));
  c->add_option("--a", o.a, "truncation radius")->check(CLI::PositiveNumber);
  c->add_option("--n", o.n, "grid points per period direction")->check(CLI::Range(8, 1024));
  c->add_option("--eta", o.eta, "single-layer coupling (default -k)");
  c->add_option("--xi", o.xi, "double-layer coupling (default 1)");
  c->add_option("--gmres-tol", o.gmres_tol, "relative GMRES tolerance")->check(CLI::PositiveNumber);
  c->add_option("--method", o.method, "gmres or direct")->check(CLI::IsMember({"gmres", "direct"}));
  c->add_option("--phi", o.phi, "incidence azimuth");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-periodic Green functions and doubly periodic grating scattering"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);
  Options o;

  auto* gc = app.add_subcommand("green-convergence", "successive differences of windowed lattice sums");
  add_common(gc, o);
  gc->add_flag("--absolute", o.absolute, "k and Bloch vector in absolute units");
  gc->add_option("--bloch", o.bloch, "Bloch vector A,B");
  gc->add_option("--a-schedule", o.a_schedule, "radii as base^i0:i1 or a comma list");
  gc->add_option("--grid", [&o](const CLI::results_t& r) {
    if (r.size() != 3) return false;
    o.grid_x = std::stoi(r[0]);
    o.grid_y = std::stoi(r[1]);
    o.grid_z = std::stoi(r[2]);
    return true;
  }, "points of K along x, y, z")->expected(3);

  auto* gs = app.add_subcommand("grating-solve", "scattering by a doubly periodic grating");
  add_common(gs, o);
  add_solver(gs, o);
  gs->add_option("--psi", o.psi, "incidence polar angle");
  gs->add_option("--bloch", o.bloch, "unused for gratings; the Bloch vector follows from psi, phi");
  gs->add_option("--reference-a", o.ref_a, "compute eps1 against a run with this a");
  gs->add_option("--reference-n", o.ref_n, "grid size of the reference run (default 2 n)");
  gs->add_option("--reference-json", o.ref_json, "read the reference B00 from a JSON result");

  auto* as = app.add_subcommand("angle-sweep", "Rayleigh amplitudes against incidence angle");
  add_common(as, o);
  add_solver(as, o);
  as->add_option("--psi-list", o.psi_list, "explicit angles, comma separated");
  as->add_option("--psi-center", o.psi_center, "center angle (default pi/4)");
  as->add_option("--psi-halfwidth", o.psi_halfwidth, "half-width of the angle range");
  as->add_option("--psi-count", o.psi_count, "number of angles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  try {
    if (*gc) return cmd_green_convergence(o);
    if (*gs) return cmd_grating_solve(o);
    if (*as) return cmd_angle_sweep(o);
  } catch (const wood_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return wood_refused;
  } catch (const configuration_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failed;
  }
  return usage;
}
