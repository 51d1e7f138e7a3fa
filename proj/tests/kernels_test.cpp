#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "vforest/kernels.hpp"

using namespace vforest;

namespace {

// Packs value pairs slotwise and returns gt(a, b) per slot plus the depth.
std::pair<BitVec, unsigned> compare(const std::vector<std::uint64_t>& a,
                                    const std::vector<std::uint64_t>& b, unsigned p,
                                    Kind b_kind = Kind::plaintext) {
  Machine vm;
  const auto pa = encode_planes(vm, to_planes(a, p), Kind::ciphertext);
  const auto pb = encode_planes(vm, to_planes(b, p), b_kind);
  const auto out = sec_comp(vm, pa, pb);
  return {vm.decrypt(out), out.depth};
}

}  // namespace

TEST(SecComp, Examples) {
  EXPECT_EQ(compare({5}, {3}, 3).first, (BitVec{1}));
  EXPECT_EQ(compare({3}, {5}, 3).first, (BitVec{0}));
  EXPECT_EQ(compare({4}, {4}, 3).first, (BitVec{0}));
  EXPECT_EQ(compare({1}, {0}, 1).first, (BitVec{1}));
}

TEST(SecComp, ExhaustiveFourBit) {
  std::vector<std::uint64_t> a, b;
  for (std::uint64_t x = 0; x < 16; ++x)
    for (std::uint64_t y = 0; y < 16; ++y) {
      a.push_back(x);
      b.push_back(y);
    }
  for (Kind k : {Kind::plaintext, Kind::ciphertext}) {
    const auto gt = compare(a, b, 4, k).first;
    const auto lt = compare(b, a, 4, k).first;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(gt[i], a[i] > b[i] ? 1 : 0) << a[i] << " " << b[i];
      // Exactly one of a>b, b>a, a==b.
      EXPECT_EQ(gt[i] + lt[i] + (a[i] == b[i] ? 1 : 0), 1);
    }
  }
}

TEST(SecComp, RandomWideAndDepthBound) {
  std::mt19937_64 rng(41);
  for (unsigned p : {2u, 3u, 4u, 5u, 8u, 12u, 16u, 32u}) {
    std::uniform_int_distribution<std::uint64_t> val(0, (std::uint64_t{1} << p) - 1);
    std::vector<std::uint64_t> a(500), b(500);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = val(rng);
      b[i] = i % 5 == 0 ? a[i] : val(rng);
    }
    const auto [gt, depth] = compare(a, b, p, Kind::ciphertext);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(gt[i], a[i] > b[i] ? 1 : 0);
    EXPECT_LE(depth, 2 * ceil_log2(p) + 1) << "p=" << p;
  }
}

TEST(SecComp, RejectsMismatchedOperands) {
  Machine vm;
  const auto a = encode_planes(vm, to_planes(std::vector<std::uint64_t>{1, 2}, 4), Kind::ciphertext);
  const auto b = encode_planes(vm, to_planes(std::vector<std::uint64_t>{1, 2}, 3), Kind::plaintext);
  const auto c = encode_planes(vm, to_planes(std::vector<std::uint64_t>{1}, 4), Kind::plaintext);
  EXPECT_ANY_THROW(sec_comp(vm, a, b));
  EXPECT_THROW(sec_comp(vm, a, c), LengthMismatch);
}

TEST(PrefixAnd, MatchesRunningProduct) {
  std::mt19937_64 rng(42);
  for (std::size_t n = 1; n <= 17; ++n) {
    Machine vm;
    std::vector<PackedVec> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(vm.encrypt(oracle::random_bits(rng, 8)));
    auto expect = xs;
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t s = 0; s < 8; ++s) expect[i].slots[s] &= expect[i - 1].slots[s];
    prefix_and(vm, xs);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(xs[i].slots, expect[i].slots);
      EXPECT_LE(xs[i].depth, ceil_log2(n));
    }
  }
}

TEST(MatMul, IdentityAndCounts) {
  Machine vm;
  DenseMatrix id(4, BitVec(4, 0));
  for (std::size_t i = 0; i < 4; ++i) id[i][i] = 1;
  const auto v = vm.encrypt({1, 0, 1, 1});
  const auto before = vm.counts();
  const auto out = mat_mul(vm, DiagMatrix::from_dense(id), v);
  const auto delta = vm.counts() - before;
  EXPECT_EQ(out.slots, v.slots);
  EXPECT_EQ(delta.rotate, 4u);
  EXPECT_EQ(delta.mult_ct_pt, 4u);
  EXPECT_EQ(delta.add, 3u);
  EXPECT_EQ(out.depth, 0u);
}

TEST(MatMul, EncryptedMatrixAddsOneLevel) {
  Machine vm;
  const DenseMatrix a = {{0, 1, 0}, {0, 0, 1}};
  const auto m = encode_matrix(vm, DiagMatrix::from_dense(a), Kind::ciphertext);
  const auto out = mat_mul(vm, m, vm.encrypt({1, 0, 1}));
  EXPECT_EQ(out.slots, (BitVec{0, 1}));
  EXPECT_EQ(out.depth, 1u);
}

TEST(MatMul, RandomAgainstDenseOracle) {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<std::size_t> dim(1, 12);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t m = dim(rng), n = dim(rng);
    const auto a = oracle::random_matrix(rng, m, n, true);
    const BitVec v = oracle::random_bits(rng, n);
    Machine vm;
    const auto out = mat_mul(vm, DiagMatrix::from_dense(a), vm.encrypt(v));
    const auto expect = oracle::dense_matvec(a, v);
    for (std::size_t r = 0; r < m; ++r) EXPECT_EQ(out.slots[r], expect[r]);
  }
}

TEST(MatMul, LengthMismatch) {
  Machine vm;
  EXPECT_THROW(mat_mul(vm, DiagMatrix::from_dense({{1, 0}}), vm.encrypt({1, 0, 1})), LengthMismatch);
}

TEST(MultAll, CountsAndDepth) {
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 8u, 9u}) {
    Machine vm;
    std::vector<PackedVec> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(vm.encrypt({1, 1}));
    const auto out = mult_all(vm, xs);
    EXPECT_EQ(vm.counts().mult_ct_ct, n - 1);
    EXPECT_EQ(out.depth, ceil_log2(n));
  }
  Machine vm;
  EXPECT_THROW(mult_all(vm, {}), std::invalid_argument);
}

TEST(MultAll, OrderInsensitive) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    Machine vm;
    std::vector<PackedVec> xs;
    for (int i = 0; i < 6; ++i) xs.push_back(vm.encrypt(oracle::random_bits(rng, 10)));
    const auto ref = mult_all(vm, xs).slots;
    std::shuffle(xs.begin(), xs.end(), rng);
    EXPECT_EQ(mult_all(vm, xs).slots, ref);
  }
}
