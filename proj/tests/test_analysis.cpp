#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qsid/analysis.hpp"
#include "qsid/datagen.hpp"
#include "qsid/systems.hpp"

using namespace qsid;

TEST(Bound, NoQuantization) {
  const auto r = evaluate_bound(Mat::Identity(2, 2), 1.0, 1.0, 3.0, 0.2, 0.1, 0.0, 0.5);
  EXPECT_EQ(r.C_eps, 0.0);
  EXPECT_EQ(r.delta_eps, 0.0);
}

TEST(Bound, HandEvaluation) {
  const auto r = evaluate_bound(Mat::Identity(3, 3), 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(r.C_eps, 1.0);
  EXPECT_DOUBLE_EQ(r.delta_eps, 2.0);
}

TEST(Bound, MonotoneInResolution) {
  Mat P(2, 2);
  P << 3, 1, 1, 2;
  double prev = -1.0;
  for (double eps = 0.0; eps <= 2.0; eps += 0.05) {
    const double d = evaluate_bound(P, 0.3, 0.7, 4.0, 0.2, 0.5, eps, 0.4).delta_eps;
    EXPECT_GE(d, prev);
    prev = d;
  }
}

TEST(Bound, QuarticAndQuadraticScaling) {
  const auto a = evaluate_bound(Mat::Identity(2, 2), 0.5, 2.0, 1.5, 0.3, 0.4, 0.1, 0.5);
  const auto b = evaluate_bound(Mat::Identity(2, 2), 0.5, 2.0, 1.5, 0.3, 0.4, 0.2, 0.5);
  EXPECT_NEAR(b.C_eps / a.C_eps, 16.0, 1e-12);
  EXPECT_NEAR(b.delta_eps / a.delta_eps, 4.0, 1e-12);
}

TEST(ComputeUub, FieldsSatisfyFormulas) {
  ExcitationConfig ex;
  ex.n_traj = 50;
  const auto sys = motor_discrete();
  const auto raw = generate_raw(sys, ex);
  const auto r = measure_ranges(raw);
  const int bits = 6;
  const auto xs = symmetric_specs(r.state_half_width, bits);
  const auto us = symmetric_specs(r.input_half_width, bits);
  const auto model = identify(quantize_snapshots(raw, xs, us, 3).data);
  Mat Q = Mat::Zero(3, 3);
  Q.diagonal() << 1, 0.1, 0.1;
  const Mat R = Mat::Identity(2, 2) * 2.0;
  const Mat Qf = dare(model.Ahat, model.Bhat, Q, R);
  const double eps = xs[0].resolution;
  const auto pred = predict_bias(sys, raw, eps);
  BoundConfig bc;
  bc.rho = 2.0;
  const auto u = compute_uub(model, Q, R, Qf, 20, pred, eps, bc);

  const auto P = riccati_recursion(model.Ahat, model.Bhat, Q, R, Qf, 20).back();
  EXPECT_LE((u.P - P).norm(), 1e-12 * P.norm());
  EXPECT_NEAR(u.alpha1, 0.1, 1e-12);
  EXPECT_NEAR(u.alpha2, 2.0, 1e-12);
  EXPECT_NEAR(u.omega_v, 2.0 * u.lambda_max * 2.0, 1e-12 * u.omega_v);
  const double C = u.omega_v * u.omega_v * std::pow(eps, 4) *
                   (u.cA * u.cA / (2 * u.alpha1) + u.cB * u.cB / (2 * u.alpha2));
  EXPECT_NEAR(u.C_eps, C, 1e-12 * C);
  const double delta = std::sqrt(u.lambda_max / u.lambda_min * 2.0 * C / (0.5 * u.alpha1));
  EXPECT_NEAR(u.delta_eps, delta, 1e-12 * delta);
  EXPECT_DOUBLE_EQ(u.cA, pred.cA);
  EXPECT_DOUBLE_EQ(u.cB, pred.cB);
}

TEST(ComputeUub, RequiresResolvedRadius) {
  const auto model = model_from_g(Mat::Ones(1, 2), 1);
  BiasPrediction pred;
  BoundConfig bc;
  EXPECT_THROW((void)compute_uub(model, Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), 5, pred, 0.1, bc), Error);
  bc.rho = 1.0;
  bc.theta = 1.5;
  EXPECT_THROW((void)compute_uub(model, Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), 5, pred, 0.1, bc), Error);
}

TEST(Empirical, ZeroTrajectory) {
  ClosedLoopResult res;
  res.states.assign(11, Vec::Zero(3));
  EXPECT_EQ(empirical_ultimate_bound(res, 0.2), 0.0);
  EXPECT_FALSE(left_rho_ball(res, 0.1));
}

TEST(Empirical, ConstantTrajectory) {
  ClosedLoopResult res;
  const Vec c = (Vec(2) << 3, 4).finished();
  res.states.assign(21, c);
  EXPECT_DOUBLE_EQ(empirical_ultimate_bound(res, 0.2), 5.0);
  EXPECT_TRUE(left_rho_ball(res, 4.0));
}

TEST(FitSlope, ExactLine) {
  const std::vector<double> xs{1, 2, 3}, ys{2, 4, 6};
  const auto f = fit_slope(xs, ys);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 0.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(FitSlope, ConstantOrdinate) {
  const std::vector<double> xs{1, 2, 3, 4}, ys{5, 5, 5, 5};
  EXPECT_EQ(fit_slope(xs, ys).slope, 0.0);
}

TEST(FitSlope, DegenerateAbscissa) {
  const std::vector<double> xs{2, 2, 2}, ys{1, 2, 3};
  try {
    (void)fit_slope(xs, ys);
    FAIL() << "expected DegenerateAbscissa";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateAbscissa);
  }
  const std::vector<double> one{1};
  EXPECT_THROW((void)fit_slope(one, one), Error);
}

TEST(ScalingExponent, PowerLaws) {
  std::vector<std::pair<double, double>> quad, lin;
  for (double e : {0.01, 0.1, 0.5, 2.0}) {
    quad.emplace_back(e, 3.0 * e * e);
    lin.emplace_back(e, 0.2 * e);
  }
  EXPECT_NEAR(scaling_exponent(quad), 2.0, 1e-12);
  EXPECT_NEAR(scaling_exponent(lin), 1.0, 1e-12);
}

TEST(ScalingExponent, RejectsNonPositive) {
  const std::vector<std::pair<double, double>> bad{{0.1, 1.0}, {0.2, 0.0}};
  try {
    (void)scaling_exponent(bad);
    FAIL() << "expected NonPositiveValue";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonPositiveValue);
  }
}

TEST(ScalingExponent, FiniteDataTermAveragedOverDithers) {
  const auto sys = motor_discrete();
  const auto raw = generate_raw(sys, ExcitationConfig{});
  const auto ranges = measure_ranges(raw);
  std::vector<std::pair<double, double>> pts;
  for (int b = 3; b <= 9; ++b) {
    const auto xs = symmetric_specs(ranges.state_half_width, b);
    const auto us = symmetric_specs(ranges.input_half_width, b);
    double eps = 0.0, mean = 0.0;
    for (const auto& s : xs) eps = std::max(eps, s.resolution);
    const int R = 20;
    for (int r = 0; r < R; ++r) {
      const auto q = quantize_snapshots(raw, xs, us, derive_seed(5, b, r));
      mean += decompose_error(raw, q.data, q.errors, identify(q.data)).G_eps.norm() / R;
    }
    pts.emplace_back(eps, mean);
  }
  EXPECT_GE(scaling_exponent(pts), 0.8);
}
