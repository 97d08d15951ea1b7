#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "qsid/error.hpp"
#include "qsid/numerics.hpp"

namespace qsid {

// Counter-based random numbers: the value at (seed, counter) is a pure function of both.

[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

[[nodiscard]] constexpr std::uint64_t random_bits(std::uint64_t seed, std::uint64_t counter) noexcept {
  return mix64(mix64(seed) + (counter + 1) * kGolden);
}

/// Uniform in [0, 1).
[[nodiscard]] constexpr double random_unit(std::uint64_t seed, std::uint64_t counter) noexcept {
  return static_cast<double>(random_bits(seed, counter) >> 11) * 0x1.0p-53;
}

/// Stable seed for a sub-stream, e.g. derive_seed(master, b, trial).
template <typename... Keys>
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, Keys... keys) noexcept {
  std::uint64_t h = mix64(seed ^ 0x5DEECE66DULL);
  ((h = mix64(h ^ (static_cast<std::uint64_t>(keys) + kGolden + (h << 6) + (h >> 2)))), ...);
  return h;
}

struct QuantizerSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  int bits = 1;
  double resolution = 1.0;        // epsilon
  double dither_amplitude = 1.0;  // Delta; w ~ U[-Delta/2, Delta/2]

  /// epsilon = (x_max - x_min) / 2^bits, Delta = epsilon.
  [[nodiscard]] static QuantizerSpec from_bits(double x_min, double x_max, int bits) {
    require(x_min < x_max, Errc::InvalidConfig, "quantizer range must satisfy x_min < x_max");
    require(bits >= 0 && bits <= 52, Errc::InvalidConfig, "word length out of range");
    const double eps = (x_max - x_min) / std::ldexp(1.0, bits);
    return {x_min, x_max, bits, eps, eps};
  }

  [[nodiscard]] static QuantizerSpec symmetric(double half_width, int bits) {
    return from_bits(-half_width, half_width, bits);
  }

  [[nodiscard]] double range() const noexcept { return x_max - x_min; }
};

[[nodiscard]] inline int required_bits(const QuantizerSpec& spec) {
  require(spec.resolution > 0.0, Errc::InvalidConfig, "resolution must be positive");
  const double cells = spec.range() / spec.resolution;
  // Tolerate the rounding of range / (range / 2^b).
  return static_cast<int>(std::ceil(std::log2(cells) - 1e-12));
}

/// Mid-rise uniform quantizer, three-branch form.
[[nodiscard]] inline double quantize(const QuantizerSpec& spec, double x) {
  const double eps = spec.resolution;
  if (x < spec.x_min) return spec.x_min + 0.5 * eps;
  if (x > spec.x_max) return spec.x_min + 0.5 * eps + eps * std::floor(spec.range() / eps);
  return spec.x_min + 0.5 * eps + eps * std::floor((x - spec.x_min) / eps);
}

struct Dithered {
  double value;  // x~ = Q(x + w) - w
  double error;  // e = x - x~
};

[[nodiscard]] inline Dithered dither_quantize(const QuantizerSpec& spec, double x, double w) {
  const double value = quantize(spec, x + w) - w;
  return {value, x - value};
}

[[nodiscard]] inline bool in_range(const QuantizerSpec& spec, double v) noexcept {
  return v >= spec.x_min && v <= spec.x_max;
}

/// Position in a counter-based dither sequence. Advancing returns a new value.
struct DitherStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  /// Dither sample at the current position, uniform on [-amplitude/2, amplitude/2).
  [[nodiscard]] double sample(double amplitude) const noexcept {
    return (random_unit(seed, counter) - 0.5) * amplitude;
  }

  [[nodiscard]] DitherStream advanced(std::uint64_t steps = 1) const noexcept { return {seed, counter + steps}; }

  friend bool operator==(const DitherStream&, const DitherStream&) = default;
};

struct DitheredVector {
  Vec value;
  Vec error;
  DitherStream next;
  int out_of_range = 0;  // coordinates where x itself lies outside the range
  int clipped = 0;       // coordinates where x + w lies outside the range
};

[[nodiscard]] inline DitheredVector dither_quantize_vector(std::span<const QuantizerSpec> specs, const Vec& x,
                                                           DitherStream stream) {
  require(static_cast<std::size_t>(x.size()) == specs.size(), Errc::DimensionMismatch,
          "one quantizer spec per coordinate required");
  DitheredVector out{Vec(x.size()), Vec(x.size()), stream, 0, 0};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto& spec = specs[static_cast<std::size_t>(i)];
    const double w = out.next.sample(spec.dither_amplitude);
    out.next = out.next.advanced();
    if (!in_range(spec, x[i])) ++out.out_of_range;
    if (!in_range(spec, x[i] + w)) ++out.clipped;
    const auto d = dither_quantize(spec, x[i], w);
    out.value[i] = d.value;
    out.error[i] = d.error;
  }
  return out;
}

/// Same word length for every coordinate, symmetric range [-h_i, h_i] per coordinate.
[[nodiscard]] inline std::vector<QuantizerSpec> symmetric_specs(const Vec& half_widths, int bits) {
  std::vector<QuantizerSpec> specs;
  specs.reserve(static_cast<std::size_t>(half_widths.size()));
  for (Eigen::Index i = 0; i < half_widths.size(); ++i) specs.push_back(QuantizerSpec::symmetric(half_widths[i], bits));
  return specs;
}

}  // namespace qsid
