#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core.hpp"

namespace qpgreen {

/// Wavenumber, lattice periods and Bloch vector of a doubly periodic problem.
struct QuasiPeriodicity {
  double k = 1.0;
  double d1 = 1.0;
  double d2 = 1.0;
  double alpha = 0.0;
  double beta = 0.0;

  QuasiPeriodicity() = default;
  QuasiPeriodicity(double k_, double d1_, double d2_, double alpha_ = 0.0, double beta_ = 0.0)
      : k(k_), d1(d1_), d2(d2_), alpha(alpha_), beta(beta_) {
    if (!(k > 0.0) || !std::isfinite(k))
      throw configuration_error("wavenumber must be positive and finite");
    if (!(d1 > 0.0) || !(d2 > 0.0) || !std::isfinite(d1) || !std::isfinite(d2))
      throw configuration_error("periods must be positive and finite");
    if (!std::isfinite(alpha) || !std::isfinite(beta))
      throw configuration_error("Bloch components must be finite");
  }

  double alpha_j(int j) const { return alpha + two_pi * j / d1; }
  double beta_l(int l) const { return beta + two_pi * l / d2; }
};

/// Relative size of k^2 - alpha_j^2 - beta_l^2 below which a mode is snapped to exact grazing.
/// Rounding in the squares is ~1e-16 k^2, so this keeps Wood points such as k = 2 sqrt(2) pi
/// exact while k perturbed by 1e-6 remains distinguishable.
inline constexpr double wood_snap_threshold = 1e-12;

/// |gamma|/k below which a mode is reported as exactly grazing.
inline constexpr double wood_exact_threshold = 1e-12;

/// Vertical wavenumber (k^2 - alpha_j^2 - beta_l^2)^{1/2}, branch cut on the negative imaginary
/// semiaxis: nonnegative real for propagating modes, positive imaginary for evanescent ones.
inline cplx gamma(const QuasiPeriodicity& qp, int j, int l) {
  const double aj = qp.alpha_j(j);
  const double bl = qp.beta_l(l);
  const double k2 = qp.k * qp.k;
  const double kz2 = k2 - aj * aj - bl * bl;
  if (std::abs(kz2) <= wood_snap_threshold * k2) return {0.0, 0.0};
  if (kz2 > 0.0) return {std::sqrt(kz2), 0.0};
  return {0.0, std::sqrt(-kz2)};
}

struct DualMode {
  int j = 0;
  int l = 0;
  double alpha_j = 0.0;
  double beta_l = 0.0;
  cplx gamma_jl;
};

inline DualMode dual_mode(const QuasiPeriodicity& qp, int j, int l) {
  return {j, l, qp.alpha_j(j), qp.beta_l(l), gamma(qp, j, l)};
}

inline bool is_propagating(cplx g) { return g.imag() == 0.0 && g.real() > 0.0; }

enum class WoodFlag { exact, near };

struct WoodMode {
  int j = 0;
  int l = 0;
  cplx gamma_jl;
  WoodFlag flag = WoodFlag::near;
};

inline bool is_exact(const WoodMode& m) { return m.flag == WoodFlag::exact; }

/// Index bound beyond which no mode can have |gamma|/k below `tol` (tol < 1).
inline int grazing_index_bound(const QuasiPeriodicity& qp) {
  const double jx = (qp.k * std::sqrt(2.0) + std::abs(qp.alpha)) * qp.d1 / two_pi;
  const double jy = (qp.k * std::sqrt(2.0) + std::abs(qp.beta)) * qp.d2 / two_pi;
  return static_cast<int>(std::ceil(std::max(jx, jy))) + 1;
}

/// All modes with |j|,|l| <= j_max whose |gamma|/k is below grazing_tol.
inline std::vector<WoodMode> wood_modes(const QuasiPeriodicity& qp, int j_max, double grazing_tol) {
  if (j_max < 0) throw configuration_error("j_max must be nonnegative");
  if (!(grazing_tol > 0.0)) throw configuration_error("grazing tolerance must be positive");
  std::vector<WoodMode> out;
  for (int j = -j_max; j <= j_max; ++j) {
    for (int l = -j_max; l <= j_max; ++l) {
      const cplx g = gamma(qp, j, l);
      const double rel = std::abs(g) / qp.k;
      if (rel < grazing_tol) {
        out.push_back({j, l, g, rel < wood_exact_threshold ? WoodFlag::exact : WoodFlag::near});
      }
    }
  }
  return out;
}

/// Same as above with the index range chosen to cover every possible grazing mode.
inline std::vector<WoodMode> wood_modes(const QuasiPeriodicity& qp, double grazing_tol) {
  return wood_modes(qp, grazing_index_bound(qp), grazing_tol);
}

inline bool has_exact_wood(const QuasiPeriodicity& qp) {
  const auto modes = wood_modes(qp, 1e-8);
  return std::any_of(modes.begin(), modes.end(), is_exact);
}

inline std::string describe_modes(const std::vector<WoodMode>& modes) {
  std::string s;
  for (const auto& m : modes) {
    if (!s.empty()) s += ", ";
    s += "(" + std::to_string(m.j) + "," + std::to_string(m.l) + ")";
  }
  return s;
}

/// Outgoing free-space Green function e^{ikr}/(4 pi r).
inline cplx free_green(double k, double r) {
  if (!(r > 0.0)) throw std::domain_error("free_green: distance must be positive");
  return std::polar(1.0 / (four_pi * r), k * r);
}

}  // namespace qpgreen
