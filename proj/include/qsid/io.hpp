#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsid/datagen.hpp"
#include "qsid/error.hpp"
#include "qsid/numerics.hpp"
#include "qsid/systems.hpp"

namespace qsid {

using json = nlohmann::json;

/// Shortest round-trip decimal form, "nan"/"inf" for non-finite values.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[nodiscard]] inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[nodiscard]] inline Mat matrix_from_json(const json& j, const std::string& what) {
  require(j.is_array() && !j.empty(), Errc::InvalidConfig, what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols, Errc::InvalidConfig,
            what + " rows must all have the same length");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

[[nodiscard]] inline json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

[[nodiscard]] inline Vec vector_from_json(const json& j, const std::string& what) {
  require(j.is_array(), Errc::InvalidConfig, what + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

[[nodiscard]] inline json box_to_json(const Box& box) {
  json out = json::array();
  for (const auto& iv : box) out.push_back({iv.lo, iv.hi});
  return out;
}

[[nodiscard]] inline Box box_from_json(const json& j, const std::string& what) {
  require(j.is_array(), Errc::InvalidConfig, what + " must be an array of [lo, hi] pairs");
  Box box;
  for (const auto& item : j) {
    require(item.is_array() && item.size() == 2, Errc::InvalidConfig, what + " entries must be [lo, hi]");
    box.push_back({item[0].get<double>(), item[1].get<double>()});
  }
  return box;
}

[[nodiscard]] inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, path + ": " + e.what());
  }
}

/// {"A": [[...]], "B": [[...]]}
[[nodiscard]] inline LtiSystem system_from_json(const json& j) {
  require(j.contains("A") && j.contains("B"), Errc::InvalidConfig, "system file needs fields A and B");
  LtiSystem sys{matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("B"), "B")};
  sys.validate();
  return sys;
}

[[nodiscard]] inline LtiSystem load_system(const std::string& name_or_path) {
  if (is_benchmark_name(name_or_path)) return benchmark(name_or_path);
  return system_from_json(read_json_file(name_or_path));
}

// Snapshot cache: a one-line JSON header, then a CSV table with one row per sample.

inline void write_snapshots(const std::string& path, const SnapshotData& snap, json header = json::object()) {
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::Io, "cannot write " + path);
  header["format"] = "qsid-snapshots-v1";
  header["n"] = snap.n();
  header["m"] = snap.m();
  header["T"] = snap.samples();
  header["steps_per_traj"] = snap.steps_per_traj;
  out << header.dump() << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < snap.n(); ++i) line += (line.empty() ? "" : ",") + std::string("x_") + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < snap.n(); ++i) line += ",xplus_" + std::to_string(i + 1);
  for (Eigen::Index i = 0; i < snap.m(); ++i) line += ",u_" + std::to_string(i + 1);
  out << line << '\n';
  for (Eigen::Index t = 0; t < snap.samples(); ++t) {
    line.clear();
    auto emit = [&](double v) {
      if (!line.empty()) line += ',';
      line += format_double(v);
    };
    for (Eigen::Index i = 0; i < snap.n(); ++i) emit(snap.X(i, t));
    for (Eigen::Index i = 0; i < snap.n(); ++i) emit(snap.Xplus(i, t));
    for (Eigen::Index i = 0; i < snap.m(); ++i) emit(snap.U(i, t));
    out << line << '\n';
  }
  require(static_cast<bool>(out), Errc::Io, "write failed for " + path);
}

struct LoadedSnapshots {
  SnapshotData data;
  json header;
};

[[nodiscard]] inline LoadedSnapshots read_snapshots(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::Io, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::Io, path + ": missing header");
  LoadedSnapshots out;
  try {
    out.header = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Errc::Io, path + ": bad JSON header: " + e.what());
  }
  require(out.header.value("format", "") == "qsid-snapshots-v1", Errc::Io, path + ": unknown snapshot format");
  const auto n = out.header.at("n").get<Eigen::Index>();
  const auto m = out.header.at("m").get<Eigen::Index>();
  const auto T = out.header.at("T").get<Eigen::Index>();
  auto& d = out.data;
  d.steps_per_traj = out.header.at("steps_per_traj").get<int>();
  d.X.resize(n, T);
  d.Xplus.resize(n, T);
  d.U.resize(m, T);
  std::getline(in, line);  // column names
  for (Eigen::Index t = 0; t < T; ++t) {
    require(static_cast<bool>(std::getline(in, line)), Errc::Io, path + ": truncated at sample " + std::to_string(t));
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    require(static_cast<Eigen::Index>(vals.size()) == 2 * n + m, Errc::Io, path + ": wrong column count");
    for (Eigen::Index i = 0; i < n; ++i) {
      d.X(i, t) = vals[static_cast<std::size_t>(i)];
      d.Xplus(i, t) = vals[static_cast<std::size_t>(n + i)];
    }
    for (Eigen::Index i = 0; i < m; ++i) d.U(i, t) = vals[static_cast<std::size_t>(2 * n + i)];
  }
  d.Psi = stack_rows(d.X, d.U);
  return out;
}

}  // namespace qsid
