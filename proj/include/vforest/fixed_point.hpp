#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "vforest/bitvec.hpp"

namespace vforest {

inline constexpr unsigned kMaxPrecision = 32;

// Unsigned fixed point: `precision` total bits, `frac_bits` of them fractional.
struct FixedPoint {
  unsigned precision = 8;
  unsigned frac_bits = 0;

  std::uint64_t max_value() const { return (std::uint64_t{1} << precision) - 1; }

  void validate() const {
    if (precision < 1 || precision > kMaxPrecision)
      throw std::invalid_argument("precision must be in [1, 32]");
    if (frac_bits > kMaxPrecision) throw std::invalid_argument("frac_bits must be <= 32");
  }
};

class QuantizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// round(value * 2^frac_bits), ties rounded up. Values that fall outside
/// [0, 2^p - 1] are rejected rather than clamped.
inline std::uint64_t quantize(double value, FixedPoint fp) {
  fp.validate();
  if (!std::isfinite(value)) throw QuantizationError("non-finite value");
  const double scaled = std::floor(std::ldexp(value, static_cast<int>(fp.frac_bits)) + 0.5);
  if (scaled < 0.0 || scaled > static_cast<double>(fp.max_value())) {
    std::ostringstream os;
    os << "value " << value << " does not fit " << fp.precision << "-bit unsigned fixed point with "
       << fp.frac_bits << " fractional bits";
    throw QuantizationError(os.str());
  }
  return static_cast<std::uint64_t>(scaled);
}

/// Bit-transposed vector: plane i holds bit i (most significant first) of
/// every slot.
struct BitPlanes {
  unsigned precision = 0;
  std::vector<BitVec> planes;

  std::size_t length() const { return planes.empty() ? 0 : planes.front().size(); }

  friend bool operator==(const BitPlanes&, const BitPlanes&) = default;
};

inline BitPlanes to_planes(std::span<const std::uint64_t> values, unsigned precision) {
  if (precision < 1 || precision > kMaxPrecision)
    throw std::invalid_argument("precision must be in [1, 32]");
  BitPlanes out;
  out.precision = precision;
  out.planes.assign(precision, BitVec(values.size(), 0));
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] >> precision) throw QuantizationError("value exceeds plane precision");
    for (unsigned i = 0; i < precision; ++i)
      out.planes[i][j] = static_cast<std::uint8_t>((values[j] >> (precision - 1 - i)) & 1u);
  }
  return out;
}

inline std::vector<std::uint64_t> from_planes(const BitPlanes& planes) {
  std::vector<std::uint64_t> out(planes.length(), 0);
  for (const auto& plane : planes.planes) {
    if (plane.size() != out.size()) throw std::invalid_argument("ragged bit planes");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] << 1) | plane[j];
  }
  return out;
}

}  // namespace vforest
