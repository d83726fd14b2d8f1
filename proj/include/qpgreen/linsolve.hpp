#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace qpgreen {

using VectorC = Eigen::VectorXcd;
using MatrixC = Eigen::MatrixXcd;

enum class SolveMethod { direct, gmres };

struct SolveReport {
  VectorC x;
  int iterations = 0;
  double residual = 0.0;  ///< ||A x - b|| / ||b||, recomputed after the solve
  SolveMethod method = SolveMethod::direct;
  bool converged = false;
  std::vector<double> history;  ///< internal residual estimates, one per iteration
};

inline double relative_residual(const MatrixC& A, const VectorC& x, const VectorC& b) {
  const double nb = b.norm();
  const double nr = (A * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

/// LU with partial pivoting.
inline SolveReport direct_solve(const MatrixC& A, const VectorC& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw configuration_error("direct_solve: dimension mismatch");
  Eigen::PartialPivLU<MatrixC> lu(A);
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  const double rc = piv.maxCoeff() > 0.0 ? std::min(lu.rcond(), piv.minCoeff() / piv.maxCoeff()) : 0.0;
  if (!(rc > 1e-14)) {
    throw factorization_error("matrix is singular to working precision (rcond = " +
                              std::to_string(rc) + ")");
  }
  SolveReport r;
  r.x = lu.solve(b);
  r.method = SolveMethod::direct;
  r.iterations = 1;
  r.residual = relative_residual(A, r.x, b);
  r.converged = true;
  return r;
}

using LinearOperator = std::function<VectorC(const VectorC&)>;

/// Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens rotations, zero initial guess.
/// Stops when the relative residual estimate reaches tol or after max_iter inner iterations;
/// the reported residual is recomputed from the operator.
inline SolveReport gmres_solve(const LinearOperator& apply, const VectorC& b, double tol,
                               int restart = 50, int max_iter = 500) {
  if (!(tol > 0.0)) throw configuration_error("gmres: tol must be positive");
  if (restart < 1 || max_iter < 1) throw configuration_error("gmres: restart and max_iter must be positive");
  const Eigen::Index n = b.size();
  SolveReport rep;
  rep.method = SolveMethod::gmres;
  rep.x = VectorC::Zero(n);
  const double nb = b.norm();
  if (nb == 0.0) {
    rep.converged = true;
    return rep;
  }
  int total = 0;
  VectorC r = b;
  double beta = r.norm();
  while (total < max_iter) {
    const int m = std::min(restart, max_iter - total);
    std::vector<VectorC> V;
    V.reserve(m + 1);
    V.push_back(r / beta);
    MatrixC H = MatrixC::Zero(m + 1, m);
    std::vector<double> cs(m);
    std::vector<cplx> sn(m);
    VectorC g = VectorC::Zero(m + 1);
    g(0) = beta;
    int j = 0;
    bool done = false;  // estimate reached tol or the Krylov space became invariant
    for (; j < m; ++j) {
      VectorC w = apply(V[j]);
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V[i].dot(w);
        w -= H(i, j) * V[i];
      }
      const double hnext = w.norm();
      H(j + 1, j) = hnext;
      for (int i = 0; i < j; ++i) {
        const cplx t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn[i]) * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      // Rotation [c s; -conj(s) c] with real c annihilating H(j+1, j).
      const cplx hj = H(j, j), hj1 = H(j + 1, j);
      const double a = std::abs(hj), den = std::hypot(a, std::abs(hj1));
      if (a == 0.0) {
        cs[j] = 0.0;
        sn[j] = 1.0;
      } else {
        cs[j] = a / den;
        sn[j] = (hj / a) * std::conj(hj1) / den;
      }
      H(j, j) = cs[j] * hj + sn[j] * hj1;
      H(j + 1, j) = 0.0;
      g(j + 1) = -std::conj(sn[j]) * g(j);
      g(j) = cs[j] * g(j);
      ++total;
      const double est = std::abs(g(j + 1)) / nb;
      rep.history.push_back(est);
      V.push_back(hnext > 0.0 ? VectorC(w / hnext) : VectorC(VectorC::Zero(n)));
      if (est <= tol || hnext == 0.0) {
        ++j;
        done = true;
        break;
      }
    }
    // Back substitution on the leading j x j triangle.
    VectorC y = VectorC::Zero(j);
    for (int i = j - 1; i >= 0; --i) {
      cplx s = g(i);
      for (int l = i + 1; l < j; ++l) s -= H(i, l) * y(l);
      y(i) = s / H(i, i);
    }
    for (int i = 0; i < j; ++i) rep.x += y(i) * V[i];
    r = b - apply(rep.x);
    beta = r.norm();
    if (beta / nb <= tol || (done && beta == 0.0)) break;
  }
  rep.iterations = total;
  rep.residual = (b - apply(rep.x)).norm() / nb;
  rep.converged = rep.residual <= tol * 1.01;
  return rep;
}

inline SolveReport gmres_solve(const MatrixC& A, const VectorC& b, double tol, int restart = 50,
                               int max_iter = 500) {
  return gmres_solve([&A](const VectorC& v) { VectorC w = A * v; return w; }, b, tol, restart, max_iter);
}

}  // namespace qpgreen
