#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "qsid/datagen.hpp"
#include "qsid/error.hpp"
#include "qsid/numerics.hpp"
#include "qsid/systems.hpp"

namespace qsid {

struct IdentifiedModel {
  Mat Ahat;
  Mat Bhat;
  Mat Ghat;  // [Ahat, Bhat]
  double cond_psi = 1.0;

  [[nodiscard]] LtiSystem system() const { return {Ahat, Bhat}; }
};

[[nodiscard]] inline Mat hstack(const Mat& left, const Mat& right) {
  Mat out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

[[nodiscard]] inline IdentifiedModel model_from_g(Mat G, Eigen::Index n, double cond_psi = 1.0) {
  IdentifiedModel model;
  model.Ahat = G.leftCols(n);
  model.Bhat = G.rightCols(G.cols() - n);
  model.Ghat = std::move(G);
  model.cond_psi = cond_psi;
  return model;
}

/// Least-squares fit of X+ ~ [A, B] Psi.
[[nodiscard]] inline IdentifiedModel identify(const SnapshotData& snap) {
  require(snap.Psi.rows() == snap.n() + snap.m() && snap.Psi.cols() == snap.samples(), Errc::DimensionMismatch,
          "Psi must stack X over U");
  auto fit = lstsq_right_solve(snap.Xplus, snap.Psi);
  return model_from_g(std::move(fit.G), snap.n(), 1.0 / fit.rcond);
}

struct RelativeErrors {
  double relA;
  double relB;
};

[[nodiscard]] inline RelativeErrors relative_errors(const IdentifiedModel& model, const LtiSystem& truth) {
  require(model.Ahat.rows() == truth.A.rows() && model.Ahat.cols() == truth.A.cols() &&
              model.Bhat.rows() == truth.B.rows() && model.Bhat.cols() == truth.B.cols(),
          Errc::DimensionMismatch, "model and truth dimensions differ");
  return {(truth.A - model.Ahat).norm() / truth.A.norm(), (truth.B - model.Bhat).norm() / truth.B.norm()};
}

/// Large-data predicted bias of the least-squares estimate.
struct BiasPrediction {
  Mat DeltaA;
  Mat DeltaB;
  double cA = 0.0;  // ||DeltaA||_F
  double cB = 0.0;  // ||DeltaB||_F
  Mat predicted_Ghat;
  double epsilon = 0.0;
};

/// Bias prediction with per-coordinate resolutions eps_i = scale_i * eps over the stacked regressor:
///   [DeltaA, DeltaB] = [A, B] D^2 (12 S + eps^2 D^2)^{-1},  D = diag(scale),  S = Psi Psi^T / T.
/// With every scale equal to one this is [A, B] (12 S + eps^2 I)^{-1}.
[[nodiscard]] inline BiasPrediction predict_bias(const LtiSystem& truth, const SnapshotData& raw, double epsilon,
                                                 std::span<const double> scale) {
  truth.validate();
  const Eigen::Index p = truth.n() + truth.m();
  require(raw.Psi.rows() == p, Errc::DimensionMismatch, "raw data does not match the system");
  require(static_cast<Eigen::Index>(scale.size()) == p, Errc::DimensionMismatch, "one scale per regressor row");
  require(epsilon >= 0.0, Errc::InvalidConfig, "epsilon must be nonnegative");
  const Mat S = symmetrize(raw.Psi * raw.Psi.transpose() / static_cast<double>(raw.samples()));
  require(sym_eig_extremes(S).min > 0.0, Errc::NotPositiveDefinite, "Psi Psi^T / T is not positive definite");

  Vec d2(p);
  for (Eigen::Index i = 0; i < p; ++i) d2[i] = scale[static_cast<std::size_t>(i)] * scale[static_cast<std::size_t>(i)];
  Mat inner = 12.0 * S;
  inner.diagonal() += epsilon * epsilon * d2;
  const Mat G = hstack(truth.A, truth.B);
  // Delta = G D^2 inner^{-1}  <=>  inner^T Delta^T = D^2 G^T  (inner symmetric)
  const Mat DeltaT = Eigen::PartialPivLU<Mat>(inner).solve(d2.asDiagonal() * G.transpose());
  const Mat Delta = DeltaT.transpose();

  BiasPrediction out;
  out.DeltaA = Delta.leftCols(truth.n());
  out.DeltaB = Delta.rightCols(truth.m());
  out.cA = out.DeltaA.norm();
  out.cB = out.DeltaB.norm();
  out.predicted_Ghat = G - epsilon * epsilon * Delta;
  out.epsilon = epsilon;
  return out;
}

/// Single resolution across every regressor row.
[[nodiscard]] inline BiasPrediction predict_bias(const LtiSystem& truth, const SnapshotData& raw, double epsilon) {
  const std::vector<double> ones(static_cast<std::size_t>(truth.n() + truth.m()), 1.0);
  return predict_bias(truth, raw, epsilon, ones);
}

/// Finite-data decomposition Ghat = G_uqz - G_uqz K + L.
struct ErrorDecomposition {
  Mat G_uqz;
  Mat K;
  Mat L;
  Mat M_eps;
  Mat N_eps;
  Mat G_eps;  // -G_uqz K + L
  double residual = 0.0;
};

/// Perturbations are taken as quantized minus raw, i.e. the negated ErrorMatrices, so that
/// Psi = Psi_uqz + E and X+ = X+_uqz + E+. M_eps and N_eps are assembled against the unquantized data.
[[nodiscard]] inline ErrorDecomposition decompose_error(const SnapshotData& raw, const SnapshotData& quantized,
                                                      const ErrorMatrices& errs, const IdentifiedModel& model) {
  require(raw.Psi.rows() == quantized.Psi.rows() && raw.samples() == quantized.samples() &&
              errs.EPsi.rows() == raw.Psi.rows() && errs.EPsi.cols() == raw.samples(),
          Errc::DimensionMismatch, "raw, quantized and error matrices must agree");
  const Eigen::Index p = raw.Psi.rows();
  const Mat E = -errs.EPsi;
  const Mat Eplus = -errs.Explus;
  const Mat& Psi_u = raw.Psi;
  const Mat& Xplus_u = raw.Xplus;

  ErrorDecomposition out;
  const auto uqz = lstsq_right_solve(Xplus_u, Psi_u);
  out.G_uqz = uqz.G;
  const Mat S_u = Psi_u * Psi_u.transpose();
  out.M_eps = symmetrize(E * Psi_u.transpose() + Psi_u * E.transpose() + E * E.transpose());
  out.N_eps = Eplus * Psi_u.transpose() + Xplus_u * E.transpose() + Eplus * E.transpose();

  if (out.M_eps.cwiseAbs().maxCoeff() == 0.0) {
    out.K = Mat::Zero(p, p);
  } else {
    const auto vals = jacobi_eigenvalues(out.M_eps);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : vals) {
      lo = std::min(lo, std::abs(v));
      hi = std::max(hi, std::abs(v));
    }
    require(lo > 1e-13 * hi, Errc::SingularMeps, "M_eps is numerically singular; resample the dither");
    // S_u M^{-1} via M^T X^T = S_u^T, M symmetric.
    const Mat SuMinv = Eigen::PartialPivLU<Mat>(out.M_eps).solve(S_u.transpose()).transpose();
    out.K = Eigen::PartialPivLU<Mat>(SuMinv + Mat::Identity(p, p)).inverse();
  }
  const Mat S_q = symmetrize(quantized.Psi * quantized.Psi.transpose());
  out.L = Eigen::PartialPivLU<Mat>(S_q).solve(out.N_eps.transpose()).transpose();
  out.G_eps = -out.G_uqz * out.K + out.L;
  out.residual = (model.Ghat - (out.G_uqz + out.G_eps)).norm();
  return out;
}

}  // namespace qsid
