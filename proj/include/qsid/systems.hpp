#pragma once

#include <Eigen/LU>

#include <string>
#include <string_view>

#include "qsid/error.hpp"
#include "qsid/numerics.hpp"

namespace qsid {

/// Discrete-time pair x+ = A x + B u.
struct LtiSystem {
  Mat A;
  Mat B;

  [[nodiscard]] Eigen::Index n() const noexcept { return A.rows(); }
  [[nodiscard]] Eigen::Index m() const noexcept { return B.cols(); }

  void validate() const {
    require(A.rows() == A.cols(), Errc::DimensionMismatch, "A must be square");
    require(B.rows() == A.rows(), Errc::DimensionMismatch, "B must have as many rows as A");
    require(A.allFinite() && B.allFinite(), Errc::InvalidConfig, "system matrices must be finite");
  }
};

/// Continuous-time pair xdot = Ac x + Bc u.
struct ContinuousLti {
  Mat Ac;
  Mat Bc;
};

[[nodiscard]] inline Vec step(const LtiSystem& sys, const Vec& x, const Vec& u) {
  require(x.size() == sys.n() && u.size() == sys.m(), Errc::DimensionMismatch,
          "step: state/input dimension does not match the system");
  return sys.A * x + sys.B * u;
}

/// Zero-order hold, read off expm([[Ac, Bc], [0, 0]] dt).
[[nodiscard]] inline LtiSystem discretize_zoh(const ContinuousLti& cont, double dt) {
  require(dt > 0.0, Errc::InvalidConfig, "discretization interval must be positive");
  const Eigen::Index n = cont.Ac.rows();
  const Eigen::Index m = cont.Bc.cols();
  require(cont.Ac.cols() == n && cont.Bc.rows() == n, Errc::DimensionMismatch, "continuous system dimensions");
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = cont.Ac * dt;
  aug.topRightCorner(n, m) = cont.Bc * dt;
  const Mat E = expm(aug);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

/// Controllability matrix [B, AB, ..., A^{n-1} B].
[[nodiscard]] inline Mat controllability_matrix(const LtiSystem& sys) {
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  Mat C(n, n * m);
  Mat block = sys.B;
  for (Eigen::Index k = 0; k < n; ++k) {
    C.middleCols(k * m, m) = block;
    block = sys.A * block;
  }
  return C;
}

/// Rank of the controllability matrix with pivots below 1e-9 * largest pivot treated as zero.
[[nodiscard]] inline int controllability_rank(const LtiSystem& sys) {
  const Mat C = controllability_matrix(sys);
  if (C.cwiseAbs().maxCoeff() == 0.0) return 0;
  Eigen::FullPivLU<Mat> lu(C);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

[[nodiscard]] inline bool is_controllable(const LtiSystem& sys) { return controllability_rank(sys) == sys.n(); }

// DC motor with load: x = (position, velocity, current), u = (voltage, load torque).
[[nodiscard]] inline ContinuousLti motor_continuous() {
  constexpr double J = 0.01, c = 0.1, K = 0.01, Ke = 0.01, r = 1.0, L = 0.5;
  ContinuousLti sys{Mat(3, 3), Mat(3, 2)};
  sys.Ac << 0, 1, 0,
            0, -c / J, K / J,
            0, -Ke / L, -r / L;
  sys.Bc << 0, 0,
            0, 1 / J,
            1 / L, 0;
  return sys;
}

/// Printed 1 s discretization of the motor, rounded to three decimals.
[[nodiscard]] inline LtiSystem motor_discrete() {
  LtiSystem sys{Mat(3, 3), Mat(3, 2)};
  sys.A << 1.000, 0.099, 0.041,
           0, 0, 0.016,
           0, 0, 0.135;
  sys.B << 0.048, 8.996,
           0.083, 9.991,
           0.864, -0.083;
  return sys;
}

/// Boeing 747 longitudinal dynamics, steady level flight, 1 s sampling.
[[nodiscard]] inline LtiSystem boeing_discrete() {
  LtiSystem sys{Mat(4, 4), Mat(4, 2)};
  sys.A << 0.99, 0.03, -0.02, -0.32,
           0.01, 0.47, 4.70, 0.00,
           0.02, -0.06, 0.40, 0.00,
           0.01, -0.04, 0.72, 0.99;
  sys.B << 0.01, 0.99,
           -3.44, 1.66,
           -0.83, 0.44,
           -0.47, 0.25;
  return sys;
}

[[nodiscard]] inline bool is_benchmark_name(std::string_view name) { return name == "motor" || name == "boeing747"; }

[[nodiscard]] inline LtiSystem benchmark(std::string_view name) {
  if (name == "motor") return motor_discrete();
  if (name == "boeing747") return boeing_discrete();
  throw Error(Errc::InvalidConfig, "unknown benchmark '" + std::string(name) + "' (expected motor or boeing747)");
}

}  // namespace qsid
