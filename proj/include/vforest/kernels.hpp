#pragma once

// The three packed subroutines of vectorized inference: bit-transposed
// comparison, diagonal matrix-vector product and balanced AND accumulation.

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vforest/diag_matrix.hpp"
#include "vforest/fixed_point.hpp"
#include "vforest/vm.hpp"

namespace vforest {

// One packed value per bit plane, most significant plane first.
struct PackedPlanes {
  unsigned precision = 0;
  std::vector<PackedVec> planes;

  std::size_t length() const { return planes.empty() ? 0 : planes.front().size(); }
};

inline PackedPlanes encode_planes(Machine& vm, const BitPlanes& planes, Kind kind) {
  PackedPlanes out;
  out.precision = planes.precision;
  out.planes.reserve(planes.planes.size());
  for (const auto& p : planes.planes) out.planes.push_back(vm.encode(p, kind));
  return out;
}

struct PackedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<PackedVec> diagonals;
};

inline PackedMatrix encode_matrix(Machine& vm, const DiagMatrix& m, Kind kind) {
  m.validate();
  PackedMatrix out{m.rows, m.cols, {}};
  out.diagonals.reserve(m.cols);
  for (const auto& d : m.diagonals) out.diagonals.push_back(vm.encode(d, kind));
  return out;
}

/// In-place prefix AND: xs[k] becomes xs[0] & ... & xs[k]. Sklansky network,
/// depth ceil(lg n).
inline void prefix_and(Machine& vm, std::vector<PackedVec>& xs) {
  const std::size_t n = xs.size();
  for (std::size_t s = 1; s < n; s <<= 1) {
    for (std::size_t k = 0; k < n; ++k) {
      if ((k & s) == 0) continue;
      const std::size_t src = (k & ~(s - 1)) - 1;
      xs[k] = vm.mult(xs[src], xs[k]);
    }
  }
}

/// Slot j of the result is 1 iff a(j) > b(j) as unsigned integers.
///
///   gt = XOR_i  a_i & ~b_i & AND_{j<i} ~(a_j ^ b_j)
///
/// At most one term is set (the first differing bit), so XOR acts as OR.
/// `a` must be encrypted; `b` may be either kind.
inline PackedVec sec_comp(Machine& vm, const PackedPlanes& a, const PackedPlanes& b) {
  if (a.precision != b.precision || a.planes.size() != b.planes.size())
    throw std::invalid_argument("sec_comp: precision mismatch");
  if (a.planes.empty()) throw std::invalid_argument("sec_comp: empty operands");
  if (a.length() != b.length()) throw LengthMismatch("sec_comp: slot length mismatch");
  const std::size_t p = a.planes.size();

  std::vector<PackedVec> terms;
  std::vector<PackedVec> eq;
  terms.reserve(p);
  eq.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    PackedVec not_b = vm.negate(b.planes[i]);
    terms.push_back(vm.mult(a.planes[i], not_b));
    if (i + 1 < p) eq.push_back(vm.add(a.planes[i], not_b));
  }
  prefix_and(vm, eq);

  PackedVec acc = terms[0];
  for (std::size_t i = 1; i < p; ++i) acc = vm.add(acc, vm.mult(terms[i], eq[i - 1]));
  return acc;
}

/// Diagonal matrix-vector product: sum_i diag_i * align(v, i). n rotations,
/// n multiplies, n-1 additions; one multiplicative level when the matrix is
/// encrypted, none when it is plaintext.
inline PackedVec mat_mul(Machine& vm, const PackedMatrix& m, const PackedVec& v) {
  if (v.size() != m.cols || m.diagonals.size() != m.cols)
    throw LengthMismatch("mat_mul: vector length " + std::to_string(v.size()) +
                         " does not match matrix columns " + std::to_string(m.cols));
  if (m.cols == 0 || m.rows == 0) throw LengthMismatch("mat_mul: empty matrix");
  PackedVec acc = vm.mult(m.diagonals[0], vm.align(v, 0, m.rows));
  for (std::size_t i = 1; i < m.cols; ++i)
    acc = vm.add(acc, vm.mult(m.diagonals[i], vm.align(v, i, m.rows)));
  return acc;
}

inline PackedVec mat_mul(Machine& vm, const DiagMatrix& m, const PackedVec& v) {
  return mat_mul(vm, encode_matrix(vm, m, Kind::plaintext), v);
}

/// Slotwise AND of all inputs through a balanced tree, pairing left to right
/// at each level (an odd tail is carried up). d-1 multiplies, depth ceil(lg d).
inline PackedVec mult_all(Machine& vm, std::vector<PackedVec> vs) {
  if (vs.empty()) throw std::invalid_argument("mult_all: no inputs");
  while (vs.size() > 1) {
    std::vector<PackedVec> next;
    next.reserve((vs.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < vs.size(); i += 2) next.push_back(vm.mult(vs[i], vs[i + 1]));
    if (vs.size() % 2) next.push_back(std::move(vs.back()));
    vs = std::move(next);
  }
  return std::move(vs.front());
}

}  // namespace vforest
