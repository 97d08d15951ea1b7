#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "qsid/analysis.hpp"
#include "qsid/datagen.hpp"
#include "qsid/io.hpp"
#include "qsid/mpc.hpp"
#include "qsid/quantizer.hpp"
#include "qsid/sysid.hpp"
#include "qsid/systems.hpp"

namespace qsid {

struct RunConfig {
  std::string system = "motor";  // benchmark name or path to a system JSON file
  LtiSystem plant;
  std::vector<int> bits{2, 3, 4, 5, 6, 7, 8, 9, 10};
  int trials = 50;
  std::uint64_t seed = 7;
  ExcitationConfig excitation;
  MpcConfig mpc;
  BoundConfig bound;
  Vec x0;
  int T_sim = 100;
  std::string output_dir = "out";
  double range_margin = 0.1;
  int workers = 0;  // 0: one per hardware thread

  void validate() const {
    plant.validate();
    require(!bits.empty(), Errc::InvalidConfig, "bits must not be empty");
    for (int b : bits) require(b >= 1 && b <= 40, Errc::InvalidConfig, "each word length must lie in [1, 40]");
    require(trials >= 1, Errc::InvalidConfig, "trials must be >= 1");
    require(x0.size() == plant.n(), Errc::DimensionMismatch, "x0 must have n entries");
    require(T_sim >= 1, Errc::InvalidConfig, "T_sim must be >= 1");
    mpc.validate(plant.n(), plant.m());
    bound.validate();
  }

  [[nodiscard]] double resolved_rho() const {
    if (bound.rho > 0.0) return bound.rho;
    const double r = 2.0 * x0.norm();
    return r > 0.0 ? r : 1.0;
  }
};

[[nodiscard]] inline std::string system_label(const std::string& system) {
  if (is_benchmark_name(system)) return system;
  return std::filesystem::path(system).stem().string();
}

/// Weights and initial state used for each benchmark; identity weights for custom systems.
[[nodiscard]] inline RunConfig default_config(const std::string& system) {
  RunConfig cfg;
  cfg.system = system;
  cfg.plant = load_system(system);
  const Eigen::Index n = cfg.plant.n();
  const Eigen::Index m = cfg.plant.m();
  cfg.mpc.Q = Mat::Identity(n, n);
  cfg.mpc.R = Mat::Identity(m, m);
  cfg.x0 = Vec::Zero(n);
  cfg.x0[0] = 1.0;
  if (system == "motor") {
    cfg.mpc.Q.diagonal() << 1.0, 0.1, 0.1;
  } else if (system == "boeing747") {
    cfg.mpc.Q.diagonal() << 1.0, 0.1, 0.1, 0.1;
    cfg.x0 << 1.0, 1.0, 0.0, 0.0;
  }
  cfg.excitation.seed = cfg.seed;
  return cfg;
}

struct Dataset {
  SnapshotData raw;
  SignalRanges ranges;
};

[[nodiscard]] inline Dataset prepare_dataset(const RunConfig& cfg) {
  Dataset d;
  d.raw = generate_raw(cfg.plant, cfg.excitation);
  d.ranges = measure_ranges(d.raw, cfg.range_margin);
  return d;
}

/// Quantizers for one word length. epsilon is the coarsest state resolution; scale_i = eps_i / epsilon.
struct WordLength {
  int bits = 0;
  std::vector<QuantizerSpec> state_specs;
  std::vector<QuantizerSpec> input_specs;
  double epsilon = 0.0;
  std::vector<double> scale;
};

[[nodiscard]] inline WordLength make_word_length(const SignalRanges& ranges, int bits) {
  WordLength w;
  w.bits = bits;
  w.state_specs = symmetric_specs(ranges.state_half_width, bits);
  w.input_specs = symmetric_specs(ranges.input_half_width, bits);
  for (const auto& s : w.state_specs) w.epsilon = std::max(w.epsilon, s.resolution);
  for (const auto& s : w.state_specs) w.scale.push_back(s.resolution / w.epsilon);
  for (const auto& s : w.input_specs) w.scale.push_back(s.resolution / w.epsilon);
  return w;
}

[[nodiscard]] inline std::uint64_t cell_seed(std::uint64_t master, int bits, int trial) {
  return derive_seed(master, 0xD17E5ULL, bits, trial);
}

struct CellResult {
  int bits = 0;
  double epsilon = 0.0;
  int trial = 0;
  std::string status = "ok";
  double rel_err_A = std::numeric_limits<double>::quiet_NaN();
  double rel_err_B = std::numeric_limits<double>::quiet_NaN();
  double mpc_cost = std::numeric_limits<double>::quiet_NaN();
  double jstar0 = std::numeric_limits<double>::quiet_NaN();
  double delta_theory = std::numeric_limits<double>::quiet_NaN();
  double tail_norm = std::numeric_limits<double>::quiet_NaN();
  double cA = std::numeric_limits<double>::quiet_NaN();
  double cB = std::numeric_limits<double>::quiet_NaN();
  double cA_measured = std::numeric_limits<double>::quiet_NaN();
  double cB_measured = std::numeric_limits<double>::quiet_NaN();
  double C_eps = std::numeric_limits<double>::quiet_NaN();
  double saturation = 0.0;
  bool left_rho = false;
  std::optional<ClosedLoopResult> trajectory;

  [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
};

struct BitPlan {
  WordLength word;
  std::optional<BiasPrediction> prediction;
  std::string prediction_error;
};

[[nodiscard]] inline BitPlan plan_bits(const RunConfig& cfg, const Dataset& data, int bits) {
  BitPlan plan{make_word_length(data.ranges, bits), std::nullopt, {}};
  try {
    plan.prediction = predict_bias(cfg.plant, data.raw, plan.word.epsilon, plan.word.scale);
  } catch (const Error& e) {
    plan.prediction_error = std::string(to_string(e.code()));
  }
  return plan;
}

/// Quantize, identify, control the true plant, certify. Errors are recorded in the status.
[[nodiscard]] inline CellResult run_cell(const RunConfig& cfg, const Dataset& data, const BitPlan& plan, int trial,
                                         bool keep_trajectory = false) {
  CellResult cell;
  cell.bits = plan.word.bits;
  cell.epsilon = plan.word.epsilon;
  cell.trial = trial;
  try {
    const auto q = quantize_snapshots(data.raw, plan.word.state_specs, plan.word.input_specs,
                                      cell_seed(cfg.seed, plan.word.bits, trial));
    cell.saturation = q.saturation_fraction;
    const IdentifiedModel model = identify(q.data);
    const auto err = relative_errors(model, cfg.plant);
    cell.rel_err_A = err.relA;
    cell.rel_err_B = err.relB;
    const double e2 = cell.epsilon * cell.epsilon;
    cell.cA_measured = (cfg.plant.A - model.Ahat).norm() / e2;
    cell.cB_measured = (cfg.plant.B - model.Bhat).norm() / e2;

    const MpcController controller(model, cfg.mpc);
    const Vec ref = Vec::Zero(cfg.plant.n());
    ClosedLoopResult cl = run_closed_loop(cfg.plant, controller, cfg.x0, ref, cfg.T_sim, cfg.bound.tail_fraction);
    cell.mpc_cost = cl.total_cost;
    cell.jstar0 = cl.values.front();
    cell.tail_norm = cl.tail_norm;
    const double rho = cfg.resolved_rho();
    cell.left_rho = left_rho_ball(cl, rho);
    if (keep_trajectory) cell.trajectory = std::move(cl);

    require(plan.prediction.has_value(), Errc::NotPositiveDefinite, "large-data prediction unavailable");
    BoundConfig bound = cfg.bound;
    bound.rho = rho;
    const UubReport uub = compute_uub(model, cfg.mpc.Q, cfg.mpc.R, controller.terminal_cost(), cfg.mpc.horizon,
                                      *plan.prediction, cell.epsilon, bound);
    cell.cA = uub.cA;
    cell.cB = uub.cB;
    cell.C_eps = uub.C_eps;
    cell.delta_theory = uub.delta_eps;
  } catch (const Error& e) {
    cell.status = std::string(to_string(e.code()));
  } catch (const std::exception&) {
    cell.status = "Error";
  }
  return cell;
}

struct SweepResult {
  Dataset data;
  std::vector<BitPlan> plans;
  std::vector<CellResult> cells;  // ordered by (bits position, trial)
};

/// Runs every (b, trial) cell on a bounded pool; results land in deterministic order.
[[nodiscard]] inline SweepResult run_sweep(const RunConfig& cfg, const std::set<int>& keep_trajectories = {}) {
  cfg.validate();
  SweepResult out;
  out.data = prepare_dataset(cfg);
  for (int b : cfg.bits) out.plans.push_back(plan_bits(cfg, out.data, b));

  const std::size_t total = cfg.bits.size() * static_cast<std::size_t>(cfg.trials);
  out.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const auto& plan = out.plans[i / static_cast<std::size_t>(cfg.trials)];
      const int trial = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
      out.cells[i] = run_cell(cfg, out.data, plan, trial, keep_trajectories.contains(plan.word.bits));
    }
  };
  unsigned n_workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
  n_workers = std::clamp<unsigned>(n_workers, 1, static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

/// Linear-interpolated sample quantile, q in [0, 1].
[[nodiscard]] inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

[[nodiscard]] inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct Spread {
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
};

[[nodiscard]] inline Spread spread(const std::vector<double>& v) { return {quantile(v, 0.5), quantile(v, 0.25), quantile(v, 0.75)}; }

struct BitSummary {
  int bits = 0;
  double epsilon = 0.0;
  int ok = 0;
  int failed = 0;
  Spread rel_err_A, rel_err_B, mpc_cost, jstar0, delta_theory, tail_norm, cA_measured, cB_measured, C_eps;
  double cA = std::numeric_limits<double>::quiet_NaN();
  double cB = std::numeric_limits<double>::quiet_NaN();
  bool violation = false;
  int left_rho = 0;
};

[[nodiscard]] inline std::vector<BitSummary> summarize(const SweepResult& sweep) {
  std::vector<BitSummary> out;
  std::map<int, std::vector<const CellResult*>> by_bits;
  for (const auto& c : sweep.cells) by_bits[c.bits].push_back(&c);
  for (const auto& plan : sweep.plans) {
    BitSummary s;
    s.bits = plan.word.bits;
    s.epsilon = plan.word.epsilon;
    if (plan.prediction) {
      s.cA = plan.prediction->cA;
      s.cB = plan.prediction->cB;
    }
    std::vector<double> a, b, cost, j0, delta, tail, cam, cbm, ceps;
    for (const CellResult* c : by_bits[plan.word.bits]) {
      if (!c->ok()) {
        ++s.failed;
        continue;
      }
      ++s.ok;
      a.push_back(c->rel_err_A);
      b.push_back(c->rel_err_B);
      cost.push_back(c->mpc_cost);
      j0.push_back(c->jstar0);
      delta.push_back(c->delta_theory);
      tail.push_back(c->tail_norm);
      cam.push_back(c->cA_measured);
      cbm.push_back(c->cB_measured);
      ceps.push_back(c->C_eps);
      if (c->left_rho) ++s.left_rho;
    }
    s.rel_err_A = spread(a);
    s.rel_err_B = spread(b);
    s.mpc_cost = spread(cost);
    s.jstar0 = spread(j0);
    s.delta_theory = spread(delta);
    s.tail_norm = spread(tail);
    s.cA_measured = spread(cam);
    s.cB_measured = spread(cbm);
    s.C_eps = spread(ceps);
    s.violation = s.ok > 0 && s.tail_norm.median > s.delta_theory.median;
    out.push_back(s);
  }
  return out;
}

struct Trends {
  std::optional<LineFit> relA;   // log10(median rel_err_A) vs b
  std::optional<LineFit> relB;
  std::optional<double> delta_exponent;  // log delta vs log epsilon
};

[[nodiscard]] inline Trends fit_trends(const std::vector<BitSummary>& rows) {
  Trends t;
  std::vector<double> bs_a, la, bs_b, lb;
  std::vector<std::pair<double, double>> delta;
  for (const auto& r : rows) {
    if (r.ok == 0) continue;
    if (r.rel_err_A.median > 0.0) {
      bs_a.push_back(r.bits);
      la.push_back(std::log10(r.rel_err_A.median));
    }
    if (r.rel_err_B.median > 0.0) {
      bs_b.push_back(r.bits);
      lb.push_back(std::log10(r.rel_err_B.median));
    }
    if (r.delta_theory.median > 0.0 && std::isfinite(r.delta_theory.median)) delta.emplace_back(r.epsilon, r.delta_theory.median);
  }
  try {
    t.relA = fit_slope(bs_a, la);
  } catch (const Error&) {
  }
  try {
    t.relB = fit_slope(bs_b, lb);
  } catch (const Error&) {
  }
  try {
    t.delta_exponent = scaling_exponent(delta);
  } catch (const Error&) {
  }
  return t;
}

// ---------------------------------------------------------------------------
// Output

inline const char* const kSweepHeader = "system,b,epsilon,trial,status,rel_err_A,rel_err_B,mpc_cost,delta_theory,tail_norm";
inline const char* const kBoundHeader = "system,b,epsilon,cA,cB,C_eps,delta_theory,tail_norm_median,violation";

[[nodiscard]] inline std::string traj_header(Eigen::Index n, Eigen::Index m) {
  std::string h = "system,b,trial,t";
  for (Eigen::Index i = 1; i <= n; ++i) h += ",x_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= m; ++i) h += ",u_" + std::to_string(i);
  return h + ",stage_cost";
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::Io, "cannot write " + path.string());
  return out;
}

inline void write_sweep_csv(std::ostream& out, const std::string& label, const std::vector<CellResult>& cells) {
  out << kSweepHeader << '\n';
  for (const auto& c : cells) {
    out << label << ',' << c.bits << ',' << format_double(c.epsilon) << ',' << c.trial << ',' << c.status << ','
        << format_double(c.rel_err_A) << ',' << format_double(c.rel_err_B) << ',' << format_double(c.mpc_cost) << ','
        << format_double(c.delta_theory) << ',' << format_double(c.tail_norm) << '\n';
  }
}

inline void write_bound_csv(std::ostream& out, const std::string& label, const std::vector<BitSummary>& rows) {
  out << kBoundHeader << '\n';
  for (const auto& r : rows) {
    out << label << ',' << r.bits << ',' << format_double(r.epsilon) << ',' << format_double(r.cA) << ','
        << format_double(r.cB) << ',' << format_double(r.C_eps.median) << ',' << format_double(r.delta_theory.median)
        << ',' << format_double(r.tail_norm.median) << ',' << (r.violation ? 1 : 0) << '\n';
  }
}

/// One block of rows per kept trajectory; the final state row carries no input.
inline void write_traj_rows(std::ostream& out, const std::string& label, const CellResult& cell) {
  if (!cell.trajectory) return;
  const auto& tr = *cell.trajectory;
  for (std::size_t t = 0; t < tr.inputs.size(); ++t) {
    out << label << ',' << cell.bits << ',' << cell.trial << ',' << t;
    for (Eigen::Index i = 0; i < tr.states[t].size(); ++i) out << ',' << format_double(tr.states[t][i]);
    for (Eigen::Index i = 0; i < tr.inputs[t].size(); ++i) out << ',' << format_double(tr.inputs[t][i]);
    out << ',' << format_double(tr.stage_costs[t]) << '\n';
  }
}

[[nodiscard]] inline json config_to_json(const RunConfig& cfg) {
  json j;
  j["system"] = cfg.system;
  j["A"] = matrix_to_json(cfg.plant.A);
  j["B"] = matrix_to_json(cfg.plant.B);
  j["bits"] = cfg.bits;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["excitation"] = {{"n_traj", cfg.excitation.n_traj},
                     {"steps_per_traj", cfg.excitation.steps_per_traj},
                     {"seed", cfg.excitation.seed},
                     {"init_box", box_to_json(cfg.excitation.init_box.empty() ? uniform_box(cfg.plant.n(), -1, 1)
                                                                              : cfg.excitation.init_box)},
                     {"input_box", box_to_json(cfg.excitation.input_box.empty() ? uniform_box(cfg.plant.m(), -1, 1)
                                                                                : cfg.excitation.input_box)}};
  json mpc;
  mpc["Q"] = matrix_to_json(cfg.mpc.Q);
  mpc["R"] = matrix_to_json(cfg.mpc.R);
  mpc["Qf"] = cfg.mpc.Qf ? matrix_to_json(*cfg.mpc.Qf) : json("dare");
  mpc["horizon"] = cfg.mpc.horizon;
  mpc["input_box"] = cfg.mpc.input_box ? box_to_json(*cfg.mpc.input_box) : json(nullptr);
  mpc["state_box"] = cfg.mpc.state_box ? box_to_json(*cfg.mpc.state_box) : json(nullptr);
  mpc["terminal"] = cfg.mpc.terminal.mode == TerminalMode::LevelSet
                        ? json{{"mode", "level_set"}, {"radius", cfg.mpc.terminal.radius}}
                        : json{{"mode", "none"}};
  mpc["soft_weight"] = cfg.mpc.soft_weight;
  j["mpc"] = mpc;
  j["bound"] = {{"theta", cfg.bound.theta}, {"rho", cfg.resolved_rho()}, {"tail_fraction", cfg.bound.tail_fraction}};
  j["x0"] = vector_to_json(cfg.x0);
  j["T_sim"] = cfg.T_sim;
  j["output_dir"] = cfg.output_dir;
  j["range_margin"] = cfg.range_margin;
  return j;
}

/// Applies the fields present in a config document on top of the defaults for its system.
[[nodiscard]] inline RunConfig config_from_json(const json& j) {
  RunConfig cfg = default_config(j.value("system", std::string("motor")));
  if (j.contains("bits")) cfg.bits = j.at("bits").get<std::vector<int>>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.excitation.seed = cfg.seed;
  }
  if (j.contains("excitation")) {
    const auto& e = j.at("excitation");
    cfg.excitation.n_traj = e.value("n_traj", cfg.excitation.n_traj);
    cfg.excitation.steps_per_traj = e.value("steps_per_traj", cfg.excitation.steps_per_traj);
    cfg.excitation.seed = e.value("seed", cfg.excitation.seed);
    if (e.contains("init_box")) cfg.excitation.init_box = box_from_json(e.at("init_box"), "init_box");
    if (e.contains("input_box")) cfg.excitation.input_box = box_from_json(e.at("input_box"), "input_box");
  }
  if (j.contains("mpc")) {
    const auto& m = j.at("mpc");
    if (m.contains("Q")) cfg.mpc.Q = matrix_from_json(m.at("Q"), "Q");
    if (m.contains("R")) cfg.mpc.R = matrix_from_json(m.at("R"), "R");
    if (m.contains("Qf") && m.at("Qf").is_array()) cfg.mpc.Qf = matrix_from_json(m.at("Qf"), "Qf");
    cfg.mpc.horizon = m.value("horizon", cfg.mpc.horizon);
    if (m.contains("input_box") && !m.at("input_box").is_null())
      cfg.mpc.input_box = box_from_json(m.at("input_box"), "input_box");
    if (m.contains("state_box") && !m.at("state_box").is_null())
      cfg.mpc.state_box = box_from_json(m.at("state_box"), "state_box");
    if (m.contains("terminal")) {
      const auto& t = m.at("terminal");
      const std::string mode = t.value("mode", std::string("none"));
      require(mode == "none" || mode == "level_set", Errc::InvalidConfig, "terminal.mode must be none or level_set");
      if (mode == "level_set") cfg.mpc.terminal = {TerminalMode::LevelSet, t.at("radius").get<double>()};
    }
    cfg.mpc.soft_weight = m.value("soft_weight", cfg.mpc.soft_weight);
  }
  if (j.contains("bound")) {
    const auto& b = j.at("bound");
    cfg.bound.theta = b.value("theta", cfg.bound.theta);
    if (b.contains("rho") && !b.at("rho").is_null()) cfg.bound.rho = b.at("rho").get<double>();
    cfg.bound.tail_fraction = b.value("tail_fraction", cfg.bound.tail_fraction);
  }
  if (j.contains("x0")) cfg.x0 = vector_from_json(j.at("x0"), "x0");
  cfg.T_sim = j.value("T_sim", cfg.T_sim);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.range_margin = j.value("range_margin", cfg.range_margin);
  cfg.workers = j.value("workers", cfg.workers);
  return cfg;
}

[[nodiscard]] inline json spread_to_json(const Spread& s) {
  return {{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"iqr", s.q3 - s.q1}};
}

[[nodiscard]] inline json summary_to_json(const RunConfig& cfg, const SweepResult& sweep) {
  const auto rows = summarize(sweep);
  const auto trends = fit_trends(rows);
  json j;
  j["slope_relA"] = trends.relA ? json(trends.relA->slope) : json(nullptr);
  j["slope_relB"] = trends.relB ? json(trends.relB->slope) : json(nullptr);
  j["slope_delta_exponent"] = trends.delta_exponent ? json(*trends.delta_exponent) : json(nullptr);
  j["fit_r2"] = {{"relA", trends.relA ? json(trends.relA->r2) : json(nullptr)},
                 {"relB", trends.relB ? json(trends.relB->r2) : json(nullptr)}};
  json per_b = json::array();
  for (const auto& r : rows) {
    per_b.push_back({{"b", r.bits},
                     {"epsilon", r.epsilon},
                     {"ok", r.ok},
                     {"failed", r.failed},
                     {"rel_err_A", spread_to_json(r.rel_err_A)},
                     {"rel_err_B", spread_to_json(r.rel_err_B)},
                     {"mpc_cost", spread_to_json(r.mpc_cost)},
                     {"jstar_x0", spread_to_json(r.jstar0)},
                     {"delta_theory", spread_to_json(r.delta_theory)},
                     {"tail_norm", spread_to_json(r.tail_norm)},
                     {"cA", r.cA},
                     {"cB", r.cB},
                     {"cA_measured", spread_to_json(r.cA_measured)},
                     {"cB_measured", spread_to_json(r.cB_measured)},
                     {"violation", r.violation},
                     {"left_rho_ball", r.left_rho}});
  }
  j["per_b"] = per_b;
  json echo = config_to_json(cfg);
  echo["quantizer"] = {{"state_half_width", vector_to_json(sweep.data.ranges.state_half_width)},
                       {"input_half_width", vector_to_json(sweep.data.ranges.input_half_width)},
                       {"range_rule", "symmetric, (1 + margin) * max |signal| over the unquantized pass"},
                       {"dither_amplitude", "equal to the resolution"},
                       {"epsilon_rule", "coarsest state resolution"}};
  j["config_echo"] = echo;
  return j;
}

}  // namespace qsid
