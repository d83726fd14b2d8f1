#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qpgreen {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double four_pi = 4.0 * pi;
inline constexpr cplx I{0.0, 1.0};

inline constexpr const char* version = "1.0.0";

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

using CVec3 = std::array<cplx, 3>;

inline cplx dot(const CVec3& a, const Vec3& b) { return a[0] * b.x + a[1] * b.y + a[2] * b.z; }

/// Invalid parameters or discretization settings.
class configuration_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An evaluation point coincides with a retained source.
class singular_evaluation_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The request is undefined because some Rayleigh mode is exactly grazing.
class wood_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class factorization_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagnostic (energy or coefficient error) has a vanishing normalization.
class undefined_metric_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qpgreen
