#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qsid/datagen.hpp"
#include "qsid/error.hpp"
#include "qsid/numerics.hpp"
#include "qsid/sysid.hpp"
#include "qsid/systems.hpp"

namespace qsid {

enum class TerminalMode { None, LevelSet };

struct TerminalSet {
  TerminalMode mode = TerminalMode::None;
  double radius = 0.0;  // level set {x : x^T Qf x <= radius^2}
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 20000;
};

struct MpcConfig {
  Mat Q;
  Mat R;
  std::optional<Mat> Qf;  // DARE of the identified model when absent
  int horizon = 20;
  std::optional<Box> input_box;
  std::optional<Box> state_box;  // soft, quadratic penalty
  TerminalSet terminal;          // soft, quadratic penalty on the level-set distance
  double soft_weight = 1e6;
  SolverOptions solver;

  void validate(Eigen::Index n, Eigen::Index m) const {
    require(Q.rows() == n && Q.cols() == n && R.rows() == m && R.cols() == m, Errc::DimensionMismatch,
            "Q must be n x n and R must be m x m");
    require(horizon >= 1, Errc::InvalidConfig, "horizon must be at least 1");
    require(sym_eig_extremes(Q).min > 0.0 && sym_eig_extremes(R).min > 0.0, Errc::InvalidAssumption3,
            "Q and R must be positive definite");
    if (Qf) {
      require(Qf->rows() == n && Qf->cols() == n, Errc::DimensionMismatch, "Qf must be n x n");
      require(is_symmetric(*Qf), Errc::NotSymmetric, "Qf must be symmetric");
    }
    if (input_box) {
      require(static_cast<Eigen::Index>(input_box->size()) == m, Errc::DimensionMismatch, "input box size");
      for (const auto& iv : *input_box) require(iv.lo <= iv.hi, Errc::InvalidConfig, "empty input interval");
    }
    if (state_box) {
      require(static_cast<Eigen::Index>(state_box->size()) == n, Errc::DimensionMismatch, "state box size");
      for (const auto& iv : *state_box) require(iv.lo <= iv.hi, Errc::InvalidConfig, "empty state interval");
    }
    if (terminal.mode == TerminalMode::LevelSet)
      require(terminal.radius > 0.0, Errc::InvalidConfig, "terminal level-set radius must be positive");
  }
};

struct TerminalCost {
  Mat Qf;
  Mat K;  // u = -K x
};

/// Qf = DARE(Ahat, Bhat, Q, R) and the matching LQR gain.
[[nodiscard]] inline TerminalCost synthesize_terminal(const IdentifiedModel& model, const Mat& Q, const Mat& R) {
  require(is_controllable(model.system()), Errc::Uncontrollable, "identified pair (Ahat, Bhat) is not controllable");
  TerminalCost out;
  out.Qf = dare(model.Ahat, model.Bhat, Q, R);
  out.K = lqr_gain(model.Ahat, model.Bhat, R, out.Qf);
  return out;
}

/// Soft constraint data carried alongside the condensed QP.
struct SoftPenalty {
  Mat Gamma;   // stacked x_1..x_Th = offset + Gamma u
  Vec offset;
  Eigen::Index n = 0;
  std::optional<Box> state_box;
  std::optional<double> terminal_radius;
  Mat Qf;
  double weight = 0.0;

  [[nodiscard]] bool active() const noexcept { return state_box.has_value() || terminal_radius.has_value(); }
};

/// min_u u^T H u + 2 f^T u + constant, optionally over a box and with soft penalties.
struct CondensedQp {
  Mat H;
  Vec f;
  double constant = 0.0;
  std::optional<Box> box;
  SoftPenalty penalty;
};

[[nodiscard]] inline double largest_eigenvalue_power(const Mat& S, int iterations = 500) {
  if (S.size() == 0) return 0.0;
  Vec v = Vec::Ones(S.rows()) / std::sqrt(static_cast<double>(S.rows()));
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Vec w = S * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-12 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

[[nodiscard]] inline Vec project(const Vec& u, const std::optional<Box>& box) {
  if (!box) return u;
  Vec out = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = (*box)[static_cast<std::size_t>(i)].clamp(u[i]);
  return out;
}

struct QpResult {
  Vec u;
  int iterations = 0;
  double kkt_residual = 0.0;
};

namespace detail {

// Half the gradient of the penalised objective.
inline Vec half_gradient(const CondensedQp& qp, const Vec& u) {
  Vec g = qp.H * u + qp.f;
  const auto& pen = qp.penalty;
  if (!pen.active()) return g;
  const Vec x = pen.offset + pen.Gamma * u;
  Vec dx = Vec::Zero(x.size());
  if (pen.state_box) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const auto& iv = (*pen.state_box)[static_cast<std::size_t>(i % pen.n)];
      if (x[i] > iv.hi) dx[i] += x[i] - iv.hi;
      if (x[i] < iv.lo) dx[i] += x[i] - iv.lo;
    }
  }
  if (pen.terminal_radius) {
    const Eigen::Index off = x.size() - pen.n;
    const Vec xt = x.segment(off, pen.n);
    const Vec qx = pen.Qf * xt;
    const double s = std::sqrt(std::max(0.0, xt.dot(qx)));
    if (s > *pen.terminal_radius) dx.segment(off, pen.n) += (s - *pen.terminal_radius) / s * qx;
  }
  g += pen.weight * (pen.Gamma.transpose() * dx);
  return g;
}

inline double gradient_lipschitz(const CondensedQp& qp) {
  double L = largest_eigenvalue_power(qp.H);
  const auto& pen = qp.penalty;
  if (pen.state_box) L += pen.weight * largest_eigenvalue_power(pen.Gamma.transpose() * pen.Gamma);
  if (pen.terminal_radius) {
    const Mat last = pen.Gamma.bottomRows(pen.n);
    L += pen.weight * largest_eigenvalue_power(pen.Qf) * largest_eigenvalue_power(last.transpose() * last);
  }
  return L;
}

}  // namespace detail

/// Unconstrained: u = -H^{-1} f. Otherwise accelerated projected gradient with step 1/L.
[[nodiscard]] inline QpResult solve_qp(const CondensedQp& qp, SolverOptions opt = {},
                                       const std::optional<Vec>& warm_start = std::nullopt) {
  const Eigen::Index N = qp.H.rows();
  require(qp.H.cols() == N && qp.f.size() == N, Errc::DimensionMismatch, "QP dimensions");
  if (!qp.box && !qp.penalty.active()) {
    Eigen::LLT<Mat> llt(qp.H);
    require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite, "QP Hessian is not positive definite");
    QpResult out{-llt.solve(qp.f), 0, 0.0};
    out.kkt_residual = (qp.H * out.u + qp.f).cwiseAbs().maxCoeff();
    return out;
  }
  require(!qp.box || static_cast<Eigen::Index>(qp.box->size()) == N, Errc::DimensionMismatch, "QP box size");

  const double L = detail::gradient_lipschitz(qp);
  require(L > 0.0, Errc::NotPositiveDefinite, "QP Hessian has no positive curvature");
  auto residual_at = [&](const Vec& u) {
    return (u - project(u - detail::half_gradient(qp, u) / L, qp.box)).cwiseAbs().maxCoeff();
  };

  Vec u = project(warm_start && warm_start->size() == N ? *warm_start : Vec::Zero(N), qp.box);
  double residual = residual_at(u);
  if (residual <= opt.tol) return {u, 0, residual};
  Vec y = u;
  double t = 1.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Vec next = project(y - detail::half_gradient(qp, y) / L, qp.box);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - u);
    u = std::move(next);
    t = t_next;
    residual = residual_at(u);
    if (residual <= opt.tol) return {u, it, residual};
  }
  throw Error(Errc::MaxIterations, "projected gradient stopped at residual " + std::to_string(residual));
}

struct MpcSolution {
  std::vector<Vec> u_seq;   // Th inputs
  std::vector<Vec> x_pred;  // Th + 1 predicted states, x_pred[0] = x_t
  double Jstar = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Receding-horizon controller on an identified model. Prediction matrices are built once.
class MpcController {
 public:
  MpcController(IdentifiedModel model, MpcConfig cfg) : model_(std::move(model)), cfg_(std::move(cfg)) {
    n_ = model_.Ahat.rows();
    m_ = model_.Bhat.cols();
    cfg_.validate(n_, m_);
    if (cfg_.Qf) {
      Qf_ = symmetrize(*cfg_.Qf);
    } else {
      Qf_ = synthesize_terminal(model_, cfg_.Q, cfg_.R).Qf;
    }
    K_ = lqr_gain(model_.Ahat, model_.Bhat, cfg_.R, Qf_);
    build();
  }

  [[nodiscard]] const Mat& terminal_cost() const noexcept { return Qf_; }
  /// LQR gain associated with the terminal cost.
  [[nodiscard]] const Mat& terminal_gain() const noexcept { return K_; }
  [[nodiscard]] const MpcConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const IdentifiedModel& model() const noexcept { return model_; }
  [[nodiscard]] const Mat& hessian() const noexcept { return H_; }

  [[nodiscard]] CondensedQp condense(const Vec& x, const Vec& ref) const {
    require(x.size() == n_ && ref.size() == n_, Errc::DimensionMismatch, "state/reference dimension");
    const Eigen::Index Th = cfg_.horizon;
    const Vec free = Phi_ * x;
    const Vec refs = ref.replicate(Th, 1);
    const Vec dev = free - refs;
    CondensedQp qp;
    qp.H = H_;
    qp.f = Gamma_.transpose() * (Qbar_ * dev);
    qp.constant = (x - ref).dot(cfg_.Q * (x - ref)) + dev.dot(Qbar_ * dev);
    if (cfg_.input_box) {
      Box box;
      box.reserve(static_cast<std::size_t>(Th * m_));
      for (Eigen::Index k = 0; k < Th; ++k) box.insert(box.end(), cfg_.input_box->begin(), cfg_.input_box->end());
      qp.box = std::move(box);
    }
    if (cfg_.state_box || cfg_.terminal.mode == TerminalMode::LevelSet) {
      qp.penalty.Gamma = Gamma_;
      qp.penalty.offset = free;
      qp.penalty.n = n_;
      qp.penalty.state_box = cfg_.state_box;
      if (cfg_.terminal.mode == TerminalMode::LevelSet) qp.penalty.terminal_radius = cfg_.terminal.radius;
      qp.penalty.Qf = Qf_;
      qp.penalty.weight = cfg_.soft_weight;
    }
    return qp;
  }

  /// Objective of the finite-horizon problem for a given input sequence (penalties excluded).
  [[nodiscard]] double objective(const Vec& x, const Vec& ref, const std::vector<Vec>& u_seq) const {
    double J = 0.0;
    Vec xk = x;
    for (const auto& u : u_seq) {
      J += (xk - ref).dot(cfg_.Q * (xk - ref)) + u.dot(cfg_.R * u);
      xk = model_.Ahat * xk + model_.Bhat * u;
    }
    return J + (xk - ref).dot(Qf_ * (xk - ref));
  }

  [[nodiscard]] MpcSolution solve(const Vec& x, const Vec& ref, const std::optional<Vec>& warm = std::nullopt) const {
    const CondensedQp qp = condense(x, ref);
    const QpResult res = [&] {
      if (!qp.box && !qp.penalty.active()) {
        QpResult r{-llt_.solve(qp.f), 0, 0.0};
        r.kkt_residual = (qp.H * r.u + qp.f).cwiseAbs().maxCoeff();
        return r;
      }
      return solve_qp(qp, cfg_.solver, warm);
    }();
    MpcSolution sol;
    sol.iterations = res.iterations;
    sol.kkt_residual = res.kkt_residual;
    sol.x_pred.push_back(x);
    for (Eigen::Index k = 0; k < cfg_.horizon; ++k) {
      sol.u_seq.push_back(res.u.segment(k * m_, m_));
      sol.x_pred.push_back(model_.Ahat * sol.x_pred.back() + model_.Bhat * sol.u_seq.back());
    }
    sol.Jstar = objective(x, ref, sol.u_seq);
    return sol;
  }

 private:
  void build() {
    const Eigen::Index Th = cfg_.horizon;
    Phi_ = Mat::Zero(n_ * Th, n_);
    Gamma_ = Mat::Zero(n_ * Th, m_ * Th);
    Mat Apow = Mat::Identity(n_, n_);
    std::vector<Mat> powers;  // A^0 B, A^1 B, ...
    for (Eigen::Index k = 0; k < Th; ++k) {
      powers.push_back(Apow * model_.Bhat);
      Apow = model_.Ahat * Apow;
      Phi_.middleRows(k * n_, n_) = Apow;
    }
    for (Eigen::Index k = 0; k < Th; ++k)
      for (Eigen::Index j = 0; j <= k; ++j) Gamma_.block(k * n_, j * m_, n_, m_) = powers[static_cast<std::size_t>(k - j)];
    Qbar_ = Mat::Zero(n_ * Th, n_ * Th);
    Mat Rbar = Mat::Zero(m_ * Th, m_ * Th);
    for (Eigen::Index k = 0; k < Th; ++k) {
      Qbar_.block(k * n_, k * n_, n_, n_) = (k + 1 == Th) ? Qf_ : cfg_.Q;
      Rbar.block(k * m_, k * m_, m_, m_) = cfg_.R;
    }
    H_ = symmetrize(Gamma_.transpose() * Qbar_ * Gamma_ + Rbar);
    llt_.compute(H_);
    require(llt_.info() == Eigen::Success, Errc::NotPositiveDefinite, "condensed Hessian is not positive definite");
  }

  IdentifiedModel model_;
  MpcConfig cfg_;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Mat Qf_;
  Mat K_;
  Mat Phi_;
  Mat Gamma_;
  Mat Qbar_;
  Mat H_;
  Eigen::LLT<Mat> llt_;
};

[[nodiscard]] inline CondensedQp condense(const IdentifiedModel& model, const MpcConfig& cfg, const Vec& x,
                                          const Vec& ref) {
  return MpcController(model, cfg).condense(x, ref);
}

[[nodiscard]] inline MpcSolution mpc_step(const IdentifiedModel& model, const MpcConfig& cfg, const Vec& x,
                                          const Vec& ref) {
  return MpcController(model, cfg).solve(x, ref);
}

struct ClosedLoopResult {
  std::vector<Vec> states;  // x_0..x_Tsim
  std::vector<Vec> inputs;  // u_0..u_{Tsim-1}
  std::vector<double> stage_costs;
  std::vector<double> values;  // J*(x_t) on the model
  double total_cost = 0.0;
  double tail_norm = 0.0;
};

/// sup ||x_t|| over the last max(1, floor(fraction * Tsim)) states.
[[nodiscard]] inline double tail_sup_norm(const std::vector<Vec>& states, double fraction) {
  if (states.empty()) return 0.0;
  const auto steps = static_cast<double>(states.size() > 1 ? states.size() - 1 : 1);
  const auto count = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(fraction * steps + 1e-9)), 1,
                                             states.size());
  double sup = 0.0;
  for (std::size_t i = states.size() - count; i < states.size(); ++i) sup = std::max(sup, states[i].norm());
  return sup;
}

inline constexpr double kDefaultTailFraction = 0.2;

/// Solve on the model, apply the first input to the plant, repeat.
[[nodiscard]] inline ClosedLoopResult run_closed_loop(const LtiSystem& plant, const MpcController& controller,
                                                      const Vec& x0, const Vec& ref, int T_sim,
                                                      double tail_fraction = kDefaultTailFraction) {
  require(T_sim >= 1, Errc::InvalidConfig, "T_sim must be at least 1");
  plant.validate();
  const auto& cfg = controller.config();
  ClosedLoopResult out;
  out.states.push_back(x0);
  std::optional<Vec> warm;
  for (int t = 0; t < T_sim; ++t) {
    const Vec& x = out.states.back();
    const MpcSolution sol = controller.solve(x, ref, warm);
    const Vec& u = sol.u_seq.front();
    const double l = (x - ref).dot(cfg.Q * (x - ref)) + u.dot(cfg.R * u);
    out.values.push_back(sol.Jstar);
    out.inputs.push_back(u);
    out.stage_costs.push_back(l);
    out.total_cost += l;
    Vec next = step(plant, x, u);
    require(next.allFinite(), Errc::NoConvergence, "closed-loop trajectory diverged");
    out.states.push_back(std::move(next));

    const Eigen::Index m = u.size();
    Vec shifted(static_cast<Eigen::Index>(sol.u_seq.size()) * m);
    for (std::size_t k = 0; k < sol.u_seq.size(); ++k)
      shifted.segment(static_cast<Eigen::Index>(k) * m, m) = sol.u_seq[std::min(k + 1, sol.u_seq.size() - 1)];
    warm = std::move(shifted);
  }
  out.tail_norm = tail_sup_norm(out.states, tail_fraction);
  return out;
}

[[nodiscard]] inline ClosedLoopResult run_closed_loop(const LtiSystem& plant, const IdentifiedModel& model,
                                                      const MpcConfig& cfg, const Vec& x0, const Vec& ref, int T_sim,
                                                      double tail_fraction = kDefaultTailFraction) {
  return run_closed_loop(plant, MpcController(model, cfg), x0, ref, T_sim, tail_fraction);
}

}  // namespace qsid
