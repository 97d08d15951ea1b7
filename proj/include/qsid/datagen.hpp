#pragma once

#include <cstdint>
#include <vector>

#include "qsid/error.hpp"
#include "qsid/numerics.hpp"
#include "qsid/quantizer.hpp"
#include "qsid/systems.hpp"

namespace qsid {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  [[nodiscard]] double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box = std::vector<Interval>;

[[nodiscard]] inline Box uniform_box(Eigen::Index dim, double lo, double hi) {
  return Box(static_cast<std::size_t>(dim), Interval{lo, hi});
}

struct ExcitationConfig {
  int n_traj = 200;
  int steps_per_traj = 100;
  Box init_box;   // empty means [-1, 1]^n
  Box input_box;  // empty means [-1, 1]^m
  std::uint64_t seed = 7;
};

/// Column-wise snapshots; columns are grouped by trajectory, steps_per_traj columns each.
struct SnapshotData {
  Mat X;
  Mat Xplus;
  Mat U;
  Mat Psi;
  int steps_per_traj = 1;

  [[nodiscard]] Eigen::Index n() const noexcept { return X.rows(); }
  [[nodiscard]] Eigen::Index m() const noexcept { return U.rows(); }
  [[nodiscard]] Eigen::Index samples() const noexcept { return X.cols(); }
  [[nodiscard]] int trajectories() const noexcept {
    return steps_per_traj > 0 ? static_cast<int>(X.cols() / steps_per_traj) : 0;
  }
};

/// e = raw - quantized, entrywise.
struct ErrorMatrices {
  Mat Ex;
  Mat Explus;
  Mat Eu;
  Mat EPsi;
};

[[nodiscard]] inline Mat stack_rows(const Mat& top, const Mat& bottom) {
  Mat out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

[[nodiscard]] inline SnapshotData generate_raw(const LtiSystem& sys, const ExcitationConfig& cfg) {
  sys.validate();
  require(cfg.n_traj >= 1 && cfg.steps_per_traj >= 1, Errc::InvalidConfig, "excitation counts must be >= 1");
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const Box init = cfg.init_box.empty() ? uniform_box(n, -1, 1) : cfg.init_box;
  const Box input = cfg.input_box.empty() ? uniform_box(m, -1, 1) : cfg.input_box;
  require(static_cast<Eigen::Index>(init.size()) == n && static_cast<Eigen::Index>(input.size()) == m,
          Errc::DimensionMismatch, "excitation boxes must match the system dimensions");
  for (const auto& iv : init) require(iv.lo <= iv.hi, Errc::InvalidConfig, "empty initial-state interval");
  for (const auto& iv : input) require(iv.lo <= iv.hi, Errc::InvalidConfig, "empty input interval");

  const Eigen::Index steps = cfg.steps_per_traj;
  const Eigen::Index T = steps * cfg.n_traj;
  SnapshotData out{Mat(n, T), Mat(n, T), Mat(m, T), Mat(), cfg.steps_per_traj};
  for (int traj = 0; traj < cfg.n_traj; ++traj) {
    const std::uint64_t seed = derive_seed(cfg.seed, traj);
    std::uint64_t counter = 0;
    auto draw = [&](const Interval& iv) { return iv.lo + (iv.hi - iv.lo) * random_unit(seed, counter++); };
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = draw(init[static_cast<std::size_t>(i)]);
    Vec u(m);
    for (Eigen::Index t = 0; t < steps; ++t) {
      for (Eigen::Index j = 0; j < m; ++j) u[j] = draw(input[static_cast<std::size_t>(j)]);
      const Eigen::Index col = traj * steps + t;
      out.X.col(col) = x;
      out.U.col(col) = u;
      x = sys.A * x + sys.B * u;
      out.Xplus.col(col) = x;
    }
  }
  out.Psi = stack_rows(out.X, out.U);
  return out;
}

/// Symmetric per-coordinate quantizer half-widths frozen from an unquantized pass.
struct SignalRanges {
  Vec state_half_width;
  Vec input_half_width;
};

/// Half-width = (1 + margin) * max |signal| over every physical sample.
[[nodiscard]] inline SignalRanges measure_ranges(const SnapshotData& raw, double margin = 0.1) {
  auto half = [margin](const Mat& a, const Mat* b) {
    Vec h = a.cwiseAbs().rowwise().maxCoeff();
    if (b != nullptr) h = h.cwiseMax(b->cwiseAbs().rowwise().maxCoeff());
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = h[i] > 0.0 ? (1.0 + margin) * h[i] : 1.0;
    return h;
  };
  return {half(raw.X, &raw.Xplus), half(raw.U, nullptr)};
}

struct QuantizedSnapshots {
  SnapshotData data;
  ErrorMatrices errors;
  double saturation_fraction = 0.0;  // samples outside the quantizer range
  double clipped_fraction = 0.0;     // samples whose dithered value left the range
};

inline constexpr double kMaxSaturationFraction = 1e-3;

/// Dither-quantizes every physical sample once; X~+ column t is X~ column t+1 inside a trajectory.
[[nodiscard]] inline QuantizedSnapshots quantize_snapshots(const SnapshotData& raw,
                                                           std::span<const QuantizerSpec> state_specs,
                                                           std::span<const QuantizerSpec> input_specs,
                                                           std::uint64_t seed,
                                                           double max_saturation = kMaxSaturationFraction) {
  const Eigen::Index n = raw.n();
  const Eigen::Index m = raw.m();
  const Eigen::Index steps = raw.steps_per_traj;
  require(static_cast<Eigen::Index>(state_specs.size()) == n && static_cast<Eigen::Index>(input_specs.size()) == m,
          Errc::DimensionMismatch, "one quantizer spec per state and input coordinate required");
  require(steps >= 1 && raw.samples() % steps == 0, Errc::InvalidConfig, "columns do not split into trajectories");

  const Eigen::Index T = raw.samples();
  QuantizedSnapshots out;
  out.data = SnapshotData{Mat(n, T), Mat(n, T), Mat(m, T), Mat(), raw.steps_per_traj};
  out.errors = ErrorMatrices{Mat(n, T), Mat(n, T), Mat(m, T), Mat()};
  long saturated = 0;
  long clipped = 0;
  long total = 0;

  for (int traj = 0; traj < raw.trajectories(); ++traj) {
    DitherStream xs{derive_seed(seed, 1, traj), 0};
    DitherStream us{derive_seed(seed, 2, traj), 0};
    const Eigen::Index first = traj * steps;
    auto qx = dither_quantize_vector(state_specs, raw.X.col(first), xs);
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Eigen::Index col = first + t;
      out.data.X.col(col) = qx.value;
      out.errors.Ex.col(col) = qx.error;
      saturated += qx.out_of_range;
      clipped += qx.clipped;
      xs = qx.next;

      auto qu = dither_quantize_vector(input_specs, raw.U.col(col), us);
      out.data.U.col(col) = qu.value;
      out.errors.Eu.col(col) = qu.error;
      saturated += qu.out_of_range;
      clipped += qu.clipped;
      us = qu.next;

      qx = dither_quantize_vector(state_specs, raw.Xplus.col(col), xs);
      out.data.Xplus.col(col) = qx.value;
      out.errors.Explus.col(col) = qx.error;
    }
    saturated += qx.out_of_range;
    clipped += qx.clipped;
    total += (steps + 1) * n + steps * m;
  }
  out.data.Psi = stack_rows(out.data.X, out.data.U);
  out.errors.EPsi = stack_rows(out.errors.Ex, out.errors.Eu);
  const double denom = total > 0 ? static_cast<double>(total) : 1.0;
  out.saturation_fraction = static_cast<double>(saturated) / denom;
  out.clipped_fraction = static_cast<double>(clipped) / denom;
  require(out.saturation_fraction <= max_saturation, Errc::SaturationExceeded,
          "fraction of saturated samples " + std::to_string(out.saturation_fraction) + " exceeds limit");
  return out;
}

}  // namespace qsid
