#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qsid/error.hpp"

namespace qsid {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

[[nodiscard]] inline double frobenius(const Mat& m) { return m.norm(); }

[[nodiscard]] inline bool all_finite(const Mat& m) { return m.allFinite(); }

[[nodiscard]] inline bool is_symmetric(const Mat& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

[[nodiscard]] inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi sweeps.
[[nodiscard]] inline std::vector<double> jacobi_eigenvalues(const Mat& sym, int max_sweeps = 100) {
  require(sym.rows() == sym.cols(), Errc::DimensionMismatch, "eigenvalues need a square matrix");
  require(is_symmetric(sym), Errc::NotSymmetric, "matrix is not symmetric within 1e-10");
  const Eigen::Index n = sym.rows();
  Mat a = symmetrize(sym);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(values.begin(), values.end());
  return values;
}

struct EigExtremes {
  double min;
  double max;
};

[[nodiscard]] inline EigExtremes sym_eig_extremes(const Mat& sym) {
  const auto values = jacobi_eigenvalues(sym);
  return {values.front(), values.back()};
}

struct LstsqResult {
  Mat G;
  double rcond;  // of Psi * Psi^T
};

/// Right least squares: argmin_G ||Y - G Psi||_F, evaluated as Y Psi^T (Psi Psi^T)^{-1}
/// through a linear solve against the Gram matrix.
[[nodiscard]] inline LstsqResult lstsq_right_solve(const Mat& Y, const Mat& Psi, double min_rcond = 1e-12) {
  require(Y.cols() == Psi.cols(), Errc::DimensionMismatch, "Y and Psi need the same column count");
  require(Psi.cols() >= Psi.rows(), Errc::RankDeficient,
          "need at least as many samples as regressors (" + std::to_string(Psi.cols()) + " < " +
              std::to_string(Psi.rows()) + ")");
  const Mat gram = symmetrize(Psi * Psi.transpose());
  const auto [lo, hi] = sym_eig_extremes(gram);
  const double rcond = hi > 0.0 ? lo / hi : 0.0;
  require(rcond >= min_rcond, Errc::RankDeficient,
          "Psi Psi^T reciprocal condition " + std::to_string(rcond) + " below threshold; data not exciting enough");
  const Mat rhs = Psi * Y.transpose();
  Mat G = Eigen::PartialPivLU<Mat>(gram).solve(rhs).transpose();
  return {std::move(G), rcond};
}

[[nodiscard]] inline Mat lstsq_right(const Mat& Y, const Mat& Psi) { return lstsq_right_solve(Y, Psi).G; }

/// (R + B^T P B)^{-1} B^T P A
[[nodiscard]] inline Mat lqr_gain(const Mat& A, const Mat& B, const Mat& R, const Mat& P) {
  const Mat BtP = B.transpose() * P;
  return Eigen::PartialPivLU<Mat>(R + BtP * B).solve(BtP * A);
}

/// One backward step of the finite-horizon Riccati recursion.
[[nodiscard]] inline Mat riccati_step(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P) {
  const Mat K = lqr_gain(A, B, R, P);
  const Mat AtP = A.transpose() * P;
  return symmetrize(AtP * A - AtP * B * K + Q);
}

/// Returns {P_Th, P_Th-1, ..., P_0} with P_Th = Qf.
[[nodiscard]] inline std::vector<Mat> riccati_recursion(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                                                        const Mat& Qf, int horizon) {
  require(horizon >= 1, Errc::InvalidConfig, "horizon must be at least 1");
  require(A.rows() == A.cols() && B.rows() == A.rows() && Q.rows() == A.rows() && Qf.rows() == A.rows() &&
              R.rows() == B.cols(),
          Errc::DimensionMismatch, "riccati_recursion dimensions");
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  out.push_back(symmetrize(Qf));
  for (int k = 0; k < horizon; ++k) out.push_back(riccati_step(A, B, Q, R, out.back()));
  return out;
}

struct DareOptions {
  double tol = 1e-11;
  int max_iterations = 10000;
};

/// Stabilizing DARE solution, as the fixed point of the Riccati recursion started at Q.
[[nodiscard]] inline Mat dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, DareOptions opt = {}) {
  require(A.rows() == A.cols() && B.rows() == A.rows() && Q.rows() == A.rows() && Q.cols() == A.rows() &&
              R.rows() == B.cols() && R.cols() == B.cols(),
          Errc::DimensionMismatch, "dare dimensions");
  require(is_symmetric(Q) && is_symmetric(R), Errc::NotSymmetric, "Q and R must be symmetric");
  Mat P = symmetrize(Q);
  for (int it = 0; it < opt.max_iterations; ++it) {
    Mat next = riccati_step(A, B, Q, R, P);
    require(next.allFinite(), Errc::NoConvergence, "Riccati iterates diverged");
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (change <= opt.tol * std::max(1.0, P.cwiseAbs().maxCoeff())) return P;
  }
  throw Error(Errc::NoConvergence, "Riccati iteration did not converge in " + std::to_string(opt.max_iterations) +
                                       " iterations; (A, B) may not be stabilizable");
}

/// Matrix exponential by scaling and squaring with a diagonal Pade(6) approximant.
[[nodiscard]] inline Mat expm(const Mat& M) {
  require(M.rows() == M.cols(), Errc::DimensionMismatch, "expm needs a square matrix");
  require(M.allFinite(), Errc::InvalidConfig, "expm input has non-finite entries");
  const Eigen::Index n = M.rows();
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Mat X = M / std::ldexp(1.0, squarings);

  constexpr int q = 6;
  double c = 1.0;
  Mat term = Mat::Identity(n, n);
  Mat num = Mat::Identity(n, n);
  Mat den = Mat::Identity(n, n);
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
    term = term * X;
    num += c * term;
    den += ((k % 2) ? -c : c) * term;
  }
  Mat E = Eigen::PartialPivLU<Mat>(den).solve(num);
  for (int s = 0; s < squarings; ++s) E = E * E;
  return E;
}

}  // namespace qsid
