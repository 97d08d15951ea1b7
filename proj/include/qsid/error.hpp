#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsid {

enum class Errc {
  RankDeficient,
  NoConvergence,
  NotSymmetric,
  NotPositiveDefinite,
  DimensionMismatch,
  SingularMeps,
  SaturationExceeded,
  Uncontrollable,
  MaxIterations,
  InvalidAssumption3,
  DegenerateAbscissa,
  NonPositiveValue,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingularMeps: return "SingularMeps";
    case Errc::SaturationExceeded: return "SaturationExceeded";
    case Errc::Uncontrollable: return "Uncontrollable";
    case Errc::MaxIterations: return "MaxIterations";
    case Errc::InvalidAssumption3: return "InvalidAssumption3";
    case Errc::DegenerateAbscissa: return "DegenerateAbscissa";
    case Errc::NonPositiveValue: return "NonPositiveValue";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace qsid
