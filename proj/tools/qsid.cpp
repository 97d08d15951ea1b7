// qsid: word-length sweeps, closed-loop runs and bound tables for quantized identification + MPC.

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "qsid/experiment.hpp"

namespace fs = std::filesystem;
using namespace qsid;

namespace {

struct Flags {
  std::string config;
  std::string system;
  std::string bits;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 0;
};

std::vector<int> parse_bits(const std::string& text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc{} && p == s.data() + s.size(), Errc::InvalidConfig, "bad --bits value: " + text);
    return v;
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {to_int(text)};
  const int lo = to_int(std::string_view(text).substr(0, colon));
  const int hi = to_int(std::string_view(text).substr(colon + 1));
  require(lo <= hi, Errc::InvalidConfig, "--bits a:b needs a <= b");
  std::vector<int> out;
  for (int b = lo; b <= hi; ++b) out.push_back(b);
  return out;
}

RunConfig resolve(const Flags& f) {
  json doc = f.config.empty() ? json::object() : read_json_file(f.config);
  if (!f.system.empty()) doc["system"] = f.system;
  RunConfig cfg = config_from_json(doc);
  if (!f.bits.empty()) cfg.bits = parse_bits(f.bits);
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.excitation.seed = *f.seed;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.workers > 0) cfg.workers = f.workers;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

void emit_sweep(const RunConfig& cfg, const SweepResult& res, const fs::path& dir) {
  auto out = open_output(dir / "sweep.csv");
  write_sweep_csv(out, system_label(cfg.system), res.cells);
  write_text(dir / "summary.json", summary_to_json(cfg, res).dump(2) + "\n");
}

void emit_bound(const RunConfig& cfg, const SweepResult& res, const fs::path& dir) {
  auto out = open_output(dir / "bound.csv");
  write_bound_csv(out, system_label(cfg.system), summarize(res));
}

void emit_traj(const RunConfig& cfg, const SweepResult& res, const fs::path& dir) {
  auto out = open_output(dir / "traj.csv");
  out << traj_header(cfg.plant.n(), cfg.plant.m()) << '\n';
  const auto label = system_label(cfg.system);
  for (const auto& c : res.cells) write_traj_rows(out, label, c);
}

int report(const SweepResult& res) {
  int failed = 0;
  for (const auto& c : res.cells) failed += c.ok() ? 0 : 1;
  std::cerr << res.cells.size() << " cells, " << failed << " failed\n";
  return 0;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--system", f.system, "motor, boeing747 or a JSON file with A and B");
  cmd->add_option("--bits", f.bits, "word lengths, a:b or a single value");
  cmd->add_option("--trials", f.trials, "dither realizations per word length");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--workers", f.workers, "worker threads (0 = hardware concurrency)");
}

int identify_cmd(const Flags& f, const std::string& load, const std::string& save) {
  RunConfig cfg = resolve(f);
  SnapshotData snap;
  json header;
  if (!load.empty()) {
    auto loaded = read_snapshots(load);
    snap = std::move(loaded.data);
    header = std::move(loaded.header);
  } else {
    const Dataset data = prepare_dataset(cfg);
    snap = data.raw;
    header["seed"] = cfg.excitation.seed;
    header["quantized"] = false;
    if (!f.bits.empty()) {
      require(cfg.bits.size() == 1, Errc::InvalidConfig, "identify takes a single word length");
      const WordLength w = make_word_length(data.ranges, cfg.bits.front());
      snap = quantize_snapshots(data.raw, w.state_specs, w.input_specs, cell_seed(cfg.seed, w.bits, 0)).data;
      header["quantized"] = true;
      header["bits"] = w.bits;
      header["epsilon"] = w.epsilon;
    }
  }
  if (!save.empty()) write_snapshots(save, snap, header);
  const IdentifiedModel model = identify(snap);
  json out;
  out["Ahat"] = matrix_to_json(model.Ahat);
  out["Bhat"] = matrix_to_json(model.Bhat);
  out["cond_psi"] = model.cond_psi;
  out["samples"] = snap.samples();
  if (model.Ahat.rows() == cfg.plant.n() && model.Bhat.cols() == cfg.plant.m()) {
    const auto err = relative_errors(model, cfg.plant);
    out["rel_err_A"] = err.relA;
    out["rel_err_B"] = err.relB;
  }
  out["snapshot_header"] = header;
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized system identification and MPC experiments"};
  app.require_subcommand(1);
  Flags f;
  std::string load, save, repro_system = "motor";

  auto* sweep = app.add_subcommand("sweep", "identification error, cost and bound per (b, trial)");
  auto* closed = app.add_subcommand("closedloop", "closed-loop trajectories for a single word length");
  auto* bound = app.add_subcommand("bound", "ultimate-bound table per word length");
  auto* repro = app.add_subcommand("reproduce", "default benchmark run with every artifact");
  auto* ident = app.add_subcommand("identify", "least-squares fit on one dataset, printed as JSON");
  for (auto* cmd : {sweep, closed, bound, ident}) add_common(cmd, f);
  repro->add_option("system", repro_system, "motor or boeing747")->check(CLI::IsMember({"motor", "boeing747"}));
  repro->add_option("--seed", f.seed, "master seed");
  repro->add_option("--trials", f.trials, "dither realizations per word length");
  repro->add_option("--out", f.out, "output root; files go to <out>/<system>");
  repro->add_option("--workers", f.workers, "worker threads (0 = hardware concurrency)");
  ident->add_option("--load-snapshots", load, "read snapshots instead of generating them");
  ident->add_option("--save-snapshots", save, "write the snapshots used for the fit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ident) return identify_cmd(f, load, save);
    if (*repro) {
      f.system = repro_system;
      RunConfig cfg = resolve(f);
      const fs::path dir = fs::path(cfg.output_dir) / repro_system;
      const auto res = run_sweep(cfg, {2, 4, 6});
      emit_sweep(cfg, res, dir);
      emit_bound(cfg, res, dir);
      emit_traj(cfg, res, dir);
      return report(res);
    }
    RunConfig cfg = resolve(f);
    const fs::path dir = cfg.output_dir;
    if (*closed) {
      require(cfg.bits.size() == 1, Errc::InvalidConfig, "closedloop takes a single word length, e.g. --bits 6");
      const auto res = run_sweep(cfg, {cfg.bits.front()});
      emit_traj(cfg, res, dir);
      return report(res);
    }
    const auto res = run_sweep(cfg);
    if (*sweep) emit_sweep(cfg, res, dir);
    if (*bound) emit_bound(cfg, res, dir);
    return report(res);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
