#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "qsid/error.hpp"
#include "qsid/mpc.hpp"
#include "qsid/numerics.hpp"
#include "qsid/sysid.hpp"

namespace qsid {

struct BoundConfig {
  double theta = 0.5;
  double rho = 0.0;  // radius of the ball B_rho(0); <= 0 means 2 ||x0||
  double tail_fraction = kDefaultTailFraction;

  void validate() const {
    require(theta > 0.0 && theta < 1.0, Errc::InvalidConfig, "theta must lie in (0, 1)");
    require(tail_fraction > 0.0 && tail_fraction <= 1.0, Errc::InvalidConfig, "tail_fraction must lie in (0, 1]");
  }
};

/// Ultimate-bound certificate of the quantized closed loop.
struct UubReport {
  Mat P;  // finite-horizon value matrix, V(x) = x^T P x
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double alpha1 = 0.0;  // lambda_min(Q)
  double alpha2 = 0.0;  // lambda_min(R)
  double cA = 0.0;
  double cB = 0.0;
  double omega_v = 0.0;  // Lipschitz constant of V on B_rho(0)
  double rho = 0.0;
  double theta = 0.5;
  double epsilon = 0.0;
  double C_eps = 0.0;
  double delta_eps = 0.0;
};

[[nodiscard]] inline double bound_constant(double omega_v, double epsilon, double cA, double cB, double alpha1,
                                           double alpha2) {
  const double e2 = epsilon * epsilon;
  return omega_v * omega_v * e2 * e2 * (cA * cA / (2.0 * alpha1) + cB * cB / (2.0 * alpha2));
}

[[nodiscard]] inline double ultimate_bound(double lambda_min, double lambda_max, double C_eps, double theta,
                                           double alpha1) {
  return std::sqrt((lambda_max / lambda_min) * (2.0 * C_eps / (theta * alpha1)));
}

/// Evaluates C(eps) and delta(eps) from already-known ingredients.
[[nodiscard]] inline UubReport evaluate_bound(Mat P, double alpha1, double alpha2, double omega_v, double cA,
                                              double cB, double epsilon, double theta) {
  UubReport r;
  const auto [lo, hi] = sym_eig_extremes(P);
  r.P = std::move(P);
  r.lambda_min = lo;
  r.lambda_max = hi;
  r.alpha1 = alpha1;
  r.alpha2 = alpha2;
  r.omega_v = omega_v;
  r.cA = cA;
  r.cB = cB;
  r.epsilon = epsilon;
  r.theta = theta;
  r.C_eps = bound_constant(omega_v, epsilon, cA, cB, alpha1, alpha2);
  r.delta_eps = ultimate_bound(lo, hi, r.C_eps, theta, alpha1);
  return r;
}

/// P = P_0 of the Riccati recursion on the model, omega_v = 2 lambda_max(P) rho.
[[nodiscard]] inline UubReport compute_uub(const IdentifiedModel& model, const Mat& Q, const Mat& R, const Mat& Qf,
                                           int horizon, const BiasPrediction& pred, double epsilon,
                                           const BoundConfig& cfg) {
  cfg.validate();
  const double alpha1 = sym_eig_extremes(Q).min;
  const double alpha2 = sym_eig_extremes(R).min;
  require(alpha1 > 0.0 && alpha2 > 0.0, Errc::InvalidAssumption3, "Q and R must be positive definite");
  require(cfg.rho > 0.0, Errc::InvalidConfig, "rho must be resolved to a positive radius");
  Mat P = riccati_recursion(model.Ahat, model.Bhat, Q, R, Qf, horizon).back();
  const double lambda_max = sym_eig_extremes(P).max;
  UubReport r = evaluate_bound(std::move(P), alpha1, alpha2, 2.0 * lambda_max * cfg.rho, pred.cA, pred.cB, epsilon,
                               cfg.theta);
  r.rho = cfg.rho;
  return r;
}

/// True when some state left B_rho(0), which voids the Lipschitz constant.
[[nodiscard]] inline bool left_rho_ball(const ClosedLoopResult& res, double rho) {
  for (const auto& x : res.states)
    if (x.norm() > rho) return true;
  return false;
}

[[nodiscard]] inline double empirical_ultimate_bound(const ClosedLoopResult& res, double tail_fraction) {
  return tail_sup_norm(res.states, tail_fraction);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

[[nodiscard]] inline LineFit fit_slope(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), Errc::DimensionMismatch, "fit_slope needs paired samples");
  const auto N = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= N;
  my /= N;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  require(xs.size() >= 2 && sxx > 0.0, Errc::DegenerateAbscissa, "need at least two distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

/// Slope of log(value) against log(epsilon).
[[nodiscard]] inline double scaling_exponent(std::span<const std::pair<double, double>> pairs) {
  std::vector<double> lx, ly;
  for (const auto& [eps, value] : pairs) {
    require(eps > 0.0 && value > 0.0, Errc::NonPositiveValue, "scaling_exponent needs positive epsilon and value");
    lx.push_back(std::log(eps));
    ly.push_back(std::log(value));
  }
  return fit_slope(lx, ly).slope;
}

}  // namespace qsid
