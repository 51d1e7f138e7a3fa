#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vforest/bitvec.hpp"

namespace vforest {

// Dense boolean matrix, row-major.
using DenseMatrix = std::vector<BitVec>;

/// Boolean m x n matrix stored as its n generalized diagonals:
/// diagonal i, slot r holds A[r][(r + i) mod n].
struct DiagMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<BitVec> diagonals;  // cols entries, each of length rows

  static DiagMatrix from_dense(const DenseMatrix& a, std::size_t cols) {
    DiagMatrix m;
    m.rows = a.size();
    m.cols = cols;
    m.diagonals.assign(cols, BitVec(m.rows, 0));
    for (std::size_t r = 0; r < m.rows; ++r) {
      if (a[r].size() != cols) throw std::invalid_argument("ragged dense matrix");
      for (std::size_t i = 0; i < cols; ++i) m.diagonals[i][r] = a[r][(r + i) % cols];
    }
    return m;
  }

  static DiagMatrix from_dense(const DenseMatrix& a) {
    return from_dense(a, a.empty() ? 0 : a.front().size());
  }

  DenseMatrix to_dense() const {
    DenseMatrix a(rows, BitVec(cols, 0));
    for (std::size_t i = 0; i < cols; ++i)
      for (std::size_t r = 0; r < rows; ++r) a[r][(r + i) % cols] = diagonals[i][r];
    return a;
  }

  std::uint8_t at(std::size_t r, std::size_t c) const {
    return diagonals[(c + cols - r % cols) % cols][r];
  }

  void validate() const {
    if (diagonals.size() != cols) throw std::invalid_argument("diagonal count != cols");
    for (const auto& d : diagonals)
      if (d.size() != rows) throw std::invalid_argument("diagonal length != rows");
  }

  friend bool operator==(const DiagMatrix&, const DiagMatrix&) = default;
};

}  // namespace vforest
