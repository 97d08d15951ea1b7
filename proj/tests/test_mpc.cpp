#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qsid/analysis.hpp"
#include "qsid/datagen.hpp"
#include "qsid/mpc.hpp"
#include "qsid/sysid.hpp"
#include "qsid/systems.hpp"

using namespace qsid;

namespace {

MpcConfig motor_weights(int horizon = 20) {
  MpcConfig cfg;
  cfg.Q = Mat::Zero(3, 3);
  cfg.Q.diagonal() << 1, 0.1, 0.1;
  cfg.R = Mat::Identity(2, 2);
  cfg.horizon = horizon;
  return cfg;
}

IdentifiedModel truth_model(const LtiSystem& sys) { return model_from_g(hstack(sys.A, sys.B), sys.n()); }

IdentifiedModel motor_model_at(int bits, std::uint64_t seed = 5) {
  ExcitationConfig ex;
  const auto raw = generate_raw(motor_discrete(), ex);
  const auto r = measure_ranges(raw);
  const auto q = quantize_snapshots(raw, symmetric_specs(r.state_half_width, bits),
                                    symmetric_specs(r.input_half_width, bits), seed);
  return identify(q.data);
}

Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace

TEST(Terminal, DeadbeatModel) {
  const auto model = model_from_g(hstack(Mat::Zero(2, 2), Mat::Identity(2, 2)), 2);
  const auto t = synthesize_terminal(model, Mat::Identity(2, 2), Mat::Identity(2, 2));
  EXPECT_LE((t.Qf - Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LE(t.K.norm(), 1e-12);
}

TEST(Terminal, ScalarGoldenRatio) {
  const auto model = model_from_g(Mat::Ones(1, 2), 1);
  const auto t = synthesize_terminal(model, Mat::Ones(1, 1), Mat::Ones(1, 1));
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_NEAR(t.Qf(0, 0), phi, 1e-10);
  EXPECT_NEAR(t.K(0, 0), phi / (1.0 + phi), 1e-10);
  EXPECT_NEAR(t.K(0, 0), 0.6180, 1e-4);
}

TEST(Terminal, DecrementIdentityOnIdentifiedMotor) {
  const auto model = motor_model_at(8);
  const auto cfg = motor_weights();
  const auto t = synthesize_terminal(model, cfg.Q, cfg.R);
  const Mat Acl = model.Ahat - model.Bhat * t.K;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_vec(rng, 3).normalized();
    const Vec u = -t.K * x;
    const Vec xn = Acl * x;
    const double lhs = xn.dot(t.Qf * xn) - x.dot(t.Qf * x);
    const double rhs = -(x.dot(cfg.Q * x) + u.dot(cfg.R * u));
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, t.Qf.norm()));
  }
}

TEST(Terminal, RejectsUncontrollableModel) {
  Mat A = Mat::Zero(2, 2);
  A.diagonal() << 1.2, 0.5;
  Mat B(2, 1);
  B << 0, 1;
  const auto model = model_from_g(hstack(A, B), 2);
  try {
    (void)synthesize_terminal(model, Mat::Identity(2, 2), Mat::Identity(1, 1));
    FAIL() << "expected Uncontrollable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Uncontrollable);
  }
}

TEST(Config, RejectsIndefiniteWeights) {
  auto cfg = motor_weights();
  cfg.Q(1, 1) = -0.1;
  try {
    cfg.validate(3, 2);
    FAIL() << "expected InvalidAssumption3";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidAssumption3);
  }
  cfg = motor_weights();
  cfg.R = Mat::Zero(2, 2);
  EXPECT_THROW(cfg.validate(3, 2), Error);
}

TEST(Condense, SingleStep) {
  const auto sys = motor_discrete();
  auto cfg = motor_weights(1);
  Mat Qf = Mat::Identity(3, 3) * 2.0;
  Qf(0, 1) = Qf(1, 0) = 0.3;
  cfg.Qf = Qf;
  Vec x(3);
  x << 0.4, -1, 2;
  const auto qp = condense(truth_model(sys), cfg, x, Vec::Zero(3));
  EXPECT_LE((qp.H - (cfg.R + sys.B.transpose() * Qf * sys.B)).norm(), 1e-12);
  EXPECT_LE((qp.f - sys.B.transpose() * Qf * sys.A * x).norm(), 1e-12);
}

TEST(Condense, ZeroStateZeroLinearTerm) {
  const auto qp = condense(truth_model(boeing_discrete()), [] {
    MpcConfig c;
    c.Q = Mat::Identity(4, 4);
    c.R = Mat::Identity(2, 2);
    return c;
  }(), Vec::Zero(4), Vec::Zero(4));
  EXPECT_EQ(qp.f.norm(), 0.0);
}

TEST(Condense, ObjectiveEquivalence) {
  const auto model = motor_model_at(6);
  auto cfg = motor_weights(7);
  const MpcController ctl(model, cfg);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Vec x = random_vec(rng, 3);
    const Vec ref = random_vec(rng, 3) * 0.3;
    const Vec u = random_vec(rng, 14);
    std::vector<Vec> seq;
    for (int k = 0; k < 7; ++k) seq.push_back(u.segment(2 * k, 2));
    const auto qp = ctl.condense(x, ref);
    const double condensed = u.dot(qp.H * u) + 2.0 * qp.f.dot(u) + qp.constant;
    const double direct = ctl.objective(x, ref, seq);
    EXPECT_NEAR(condensed, direct, 1e-9 * std::abs(direct));
  }
}

TEST(SolveQp, ClippedOptimum) {
  CondensedQp qp;
  qp.H = Mat::Identity(2, 2);
  qp.f = -Vec::Ones(2);
  qp.box = Box{{-0.5, 0.5}, {-0.5, 0.5}};
  const auto r = solve_qp(qp);
  EXPECT_NEAR(r.u[0], 0.5, 1e-8);
  EXPECT_NEAR(r.u[1], 0.5, 1e-8);
  EXPECT_LE(r.kkt_residual, 1e-8);
}

TEST(SolveQp, ZeroLinearTermGivesZero) {
  CondensedQp qp;
  qp.H = Mat::Identity(3, 3) * 4.0;
  qp.H(0, 2) = qp.H(2, 0) = 1.0;
  qp.f = Vec::Zero(3);
  qp.box = Box{{-1, 2}, {-0.1, 0.1}, {-3, 0}};
  EXPECT_LE(solve_qp(qp).u.norm(), 1e-12);
}

TEST(SolveQp, WideBoxMatchesDenseSolve) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat M = Mat::Random(6, 6);
    CondensedQp qp;
    qp.H = M * M.transpose() + Mat::Identity(6, 6);
    qp.f = random_vec(rng, 6);
    const Vec exact = -qp.H.ldlt().solve(qp.f);
    EXPECT_LE((solve_qp(qp).u - exact).norm(), 1e-10 * exact.norm());
    qp.box = Box(6, Interval{-1e6, 1e6});
    EXPECT_LE((solve_qp(qp, {1e-12, 200000}).u - exact).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, exact.norm()));
  }
}

TEST(SolveQp, ActiveBoxSatisfiesKkt) {
  std::mt19937_64 rng(23);
  const Mat M = Mat::Random(5, 5);
  CondensedQp qp;
  qp.H = M * M.transpose() + 0.5 * Mat::Identity(5, 5);
  qp.f = random_vec(rng, 5) * 3.0;
  qp.box = Box(5, Interval{-0.2, 0.3});
  const Vec u = solve_qp(qp).u;
  const Vec g = qp.H * u + qp.f;
  for (int i = 0; i < 5; ++i) {
    EXPECT_GE(u[i], -0.2 - 1e-12);
    EXPECT_LE(u[i], 0.3 + 1e-12);
    if (u[i] > -0.2 + 1e-6 && u[i] < 0.3 - 1e-6) {
      EXPECT_NEAR(g[i], 0.0, 1e-6);
    } else if (u[i] <= -0.2 + 1e-6) {
      EXPECT_GE(g[i], -1e-6);
    } else {
      EXPECT_LE(g[i], 1e-6);
    }
  }
}

TEST(SolveQp, IterationCapReported) {
  CondensedQp qp;
  qp.H = Mat::Identity(2, 2);
  qp.H(1, 1) = 1e-6;
  qp.f = Vec::Ones(2);
  qp.box = Box(2, Interval{-1e9, 1e9});
  try {
    (void)solve_qp(qp, {1e-14, 3});
    FAIL() << "expected MaxIterations";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MaxIterations);
  }
}

TEST(MpcStep, OriginIsOptimal) {
  const auto sol = mpc_step(motor_model_at(6), motor_weights(), Vec::Zero(3), Vec::Zero(3));
  EXPECT_EQ(sol.u_seq.front().norm(), 0.0);
  EXPECT_EQ(sol.Jstar, 0.0);
}

TEST(MpcStep, EqualsLqrWithDareTerminal) {
  for (const auto& sys : {motor_discrete(), boeing_discrete()}) {
    MpcConfig cfg;
    cfg.Q = Mat::Identity(sys.n(), sys.n());
    cfg.R = Mat::Identity(sys.m(), sys.m());
    const MpcController ctl(truth_model(sys), cfg);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      const Vec x = random_vec(rng, sys.n());
      const auto sol = ctl.solve(x, Vec::Zero(sys.n()));
      EXPECT_LE((sol.u_seq.front() + ctl.terminal_gain() * x).norm(), 1e-8 * std::max(1.0, x.norm()));
    }
  }
}

TEST(MpcStep, ValueIsTerminalQuadratic) {
  const auto model = motor_model_at(8);
  const MpcController ctl(model, motor_weights(10));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Vec x = random_vec(rng, 3);
    const double expected = x.dot(ctl.terminal_cost() * x);
    EXPECT_NEAR(ctl.solve(x, Vec::Zero(3)).Jstar, expected, 1e-8 * expected);
  }
}

TEST(MpcStep, PredictionFollowsModel) {
  const auto model = motor_model_at(6);
  auto cfg = motor_weights(8);
  cfg.input_box = Box(2, Interval{-0.5, 0.5});
  const auto sol = MpcController(model, cfg).solve(Vec::Ones(3), Vec::Zero(3));
  ASSERT_EQ(sol.x_pred.size(), 9u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(sol.x_pred[k + 1], model.Ahat * sol.x_pred[k] + model.Bhat * sol.u_seq[k]);
    EXPECT_LE(sol.u_seq[k].cwiseAbs().maxCoeff(), 0.5 + 1e-12);
  }
}

TEST(MpcStep, SoftStateBoxReducesViolation) {
  const auto sys = boeing_discrete();
  MpcConfig cfg;
  cfg.Q = Mat::Identity(4, 4);
  cfg.R = Mat::Identity(2, 2);
  cfg.horizon = 10;
  const Vec x0 = (Vec(4) << 1, 1, 0, 0).finished();
  const auto free = MpcController(truth_model(sys), cfg).solve(x0, Vec::Zero(4));
  double free_viol = 0.0;
  for (const auto& x : free.x_pred) free_viol = std::max(free_viol, x[1] - 0.6);
  ASSERT_GT(free_viol, 0.0);
  cfg.state_box = Box{{-10, 10}, {-10, 0.6}, {-10, 10}, {-10, 10}};
  const auto boxed = MpcController(truth_model(sys), cfg).solve(x0, Vec::Zero(4));
  double viol = 0.0;
  for (std::size_t k = 1; k < boxed.x_pred.size(); ++k) viol = std::max(viol, boxed.x_pred[k][1] - 0.6);
  EXPECT_LT(viol, 1e-3);
}

TEST(MpcStep, TerminalLevelSetPenalty) {
  const auto sys = motor_discrete();
  auto cfg = motor_weights(3);
  const Vec x0 = (Vec(3) << 5, 1, -1).finished();
  const MpcController base(truth_model(sys), cfg);
  const double radius = 0.5;
  cfg.terminal = {TerminalMode::LevelSet, radius};
  const auto sol = MpcController(truth_model(sys), cfg).solve(x0, Vec::Zero(3));
  const Vec& xT = sol.x_pred.back();
  EXPECT_LE(std::sqrt(xT.dot(base.terminal_cost() * xT)), radius * 1.01);
}

TEST(ClosedLoop, NominalMatchesLqrCost) {
  const auto model = motor_model_at(8);
  const auto cfg = motor_weights();
  const MpcController ctl(model, cfg);
  const Vec x0 = Vec::Unit(3, 0);
  const auto res = run_closed_loop(model.system(), ctl, x0, Vec::Zero(3), 400);
  const double expected = x0.dot(ctl.terminal_cost() * x0);
  EXPECT_NEAR(res.total_cost, expected, 1e-6 * expected);
  EXPECT_LE(res.states.back().norm(), 1e-8);
  EXPECT_EQ(res.states.size(), 401u);
  EXPECT_EQ(res.inputs.size(), 400u);
}

TEST(ClosedLoop, OriginStaysAtOrigin) {
  const auto res =
      run_closed_loop(motor_discrete(), motor_model_at(4), motor_weights(), Vec::Zero(3), Vec::Zero(3), 50);
  for (const auto& x : res.states) EXPECT_EQ(x.norm(), 0.0);
  for (const auto& u : res.inputs) EXPECT_EQ(u.norm(), 0.0);
  EXPECT_EQ(res.total_cost, 0.0);
  EXPECT_EQ(res.tail_norm, 0.0);
}

TEST(ClosedLoop, QuantizedModelStaysWithinBound) {
  const int bits = 6;
  ExcitationConfig ex;
  const auto sys = motor_discrete();
  const auto raw = generate_raw(sys, ex);
  const auto r = measure_ranges(raw);
  const auto xs = symmetric_specs(r.state_half_width, bits);
  const auto us = symmetric_specs(r.input_half_width, bits);
  double eps = 0.0;
  std::vector<double> scale;
  for (const auto& s : xs) eps = std::max(eps, s.resolution);
  for (const auto& s : xs) scale.push_back(s.resolution / eps);
  for (const auto& s : us) scale.push_back(s.resolution / eps);
  const auto model = identify(quantize_snapshots(raw, xs, us, 9).data);
  const auto cfg = motor_weights();
  const MpcController ctl(model, cfg);
  const Vec x0 = Vec::Unit(3, 0);
  const auto res = run_closed_loop(sys, ctl, x0, Vec::Zero(3), 100);
  BoundConfig bc;
  bc.rho = 2.0;
  const auto uub = compute_uub(model, cfg.Q, cfg.R, ctl.terminal_cost(), cfg.horizon,
                               predict_bias(sys, raw, eps, scale), eps, bc);
  EXPECT_LE(res.tail_norm, uub.delta_eps);
  EXPECT_LT(res.tail_norm, 1e-3);
}

TEST(ClosedLoop, InputBoxRespected) {
  auto cfg = motor_weights();
  cfg.input_box = Box(2, Interval{-0.05, 0.05});
  const auto res = run_closed_loop(motor_discrete(), motor_model_at(8), cfg, Vec::Unit(3, 0), Vec::Zero(3), 60);
  for (const auto& u : res.inputs) EXPECT_LE(u.cwiseAbs().maxCoeff(), 0.05 + 1e-12);
  EXPECT_LT(res.states.back().norm(), 1.0);
}

TEST(TailNorm, Window) {
  std::vector<Vec> states;
  for (int t = 0; t <= 10; ++t) states.push_back(Vec::Constant(1, 10.0 - t));
  EXPECT_DOUBLE_EQ(tail_sup_norm(states, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(tail_sup_norm(states, 1.0), 9.0);
  EXPECT_DOUBLE_EQ(tail_sup_norm(states, 0.01), 0.0);
}
