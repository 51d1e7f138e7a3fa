#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "oracles.hpp"
#include "vforest/vm.hpp"

using namespace vforest;

TEST(Machine, EncryptCountsAndDecrypts) {
  Machine vm;
  const auto z = vm.encrypt(BitVec(4, 0));
  EXPECT_EQ(z.depth, 0u);
  EXPECT_TRUE(z.is_cipher());
  EXPECT_EQ(vm.decrypt(z), BitVec(4, 0));
  EXPECT_EQ(vm.counts().encrypt, 1u);
  vm.plaintext({1, 0});
  EXPECT_EQ(vm.counts().encrypt, 1u);
}

TEST(Machine, RotateLeft) {
  Machine vm;
  const auto v = vm.encrypt(bits_from_string("10110"));
  EXPECT_EQ(to_string(vm.rotate(v, 1).slots), "01101");
  EXPECT_EQ(to_string(vm.rotate(v, 7).slots), "11010");
  EXPECT_EQ(vm.counts().rotate, 2u);
  EXPECT_EQ(vm.rotate(v, 0).slots, v.slots);
  EXPECT_EQ(vm.rotate(v, 5).slots, v.slots);
  EXPECT_EQ(vm.counts().rotate, 2u);
  // Plaintext rotations are free.
  vm.rotate(vm.plaintext(bits_from_string("10")), 1);
  EXPECT_EQ(vm.counts().rotate, 2u);
}

TEST(Machine, AlignIsChargedOnce) {
  Machine vm;
  const auto v = vm.encrypt(bits_from_string("101"));
  EXPECT_EQ(to_string(vm.align(v, 0, 5).slots), "10110");
  EXPECT_EQ(to_string(vm.align(v, 1, 2).slots), "01");
  EXPECT_EQ(vm.counts().rotate, 2u);
}

TEST(Machine, ExtendAndTruncate) {
  Machine vm;
  const auto v = vm.encrypt({1, 0});
  EXPECT_EQ(vm.replicate_extend(v, 5).slots, (BitVec{1, 0, 1, 0, 1}));
  EXPECT_EQ(vm.truncate(vm.encrypt({1, 1, 0}), 2).slots, (BitVec{1, 1}));
  EXPECT_THROW(vm.truncate(v, 3), LengthMismatch);
  EXPECT_THROW(vm.replicate_extend(v, 0), std::invalid_argument);
  EXPECT_EQ(vm.counts().rotate, 0u);
}

TEST(Machine, AddIsXor) {
  Machine vm;
  std::mt19937_64 rng(31);
  const auto a = vm.encrypt(oracle::random_bits(rng, 16));
  const auto b = vm.encrypt(oracle::random_bits(rng, 16));
  EXPECT_EQ(vm.add(a, a).slots, BitVec(16, 0));
  EXPECT_EQ(vm.add(a, vm.encrypt(BitVec(16, 0))).slots, a.slots);
  const auto c = vm.add(a, b);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(c.slots[i], a.slots[i] ^ b.slots[i]);
  const auto before = vm.counts();
  vm.add(a, vm.plaintext(BitVec(16, 1)));
  const auto delta = vm.counts() - before;
  EXPECT_EQ(delta.const_add, 1u);
  EXPECT_EQ(delta.add, 0u);
  EXPECT_THROW(vm.add(a, vm.encrypt(BitVec(3, 0))), LengthMismatch);
}

TEST(Machine, MultDepth) {
  Machine vm;
  const auto a = vm.encrypt({1, 0, 1});
  const auto b = vm.encrypt({1, 1, 0});
  const auto ones = vm.plaintext({1, 1, 1});
  const auto ap = vm.mult(a, ones);
  EXPECT_EQ(ap.slots, a.slots);
  EXPECT_EQ(ap.depth, 0u);
  const auto ab = vm.mult(a, b);
  EXPECT_EQ(ab.slots, (BitVec{1, 0, 0}));
  EXPECT_EQ(ab.depth, 1u);
  const auto c = vm.counts();
  EXPECT_EQ(c.mult_ct_pt, 1u);
  EXPECT_EQ(c.mult_ct_ct, 1u);
  EXPECT_EQ(c.max_depth, 1u);
  EXPECT_THROW(vm.mult(a, vm.encrypt({1})), LengthMismatch);
}

TEST(Machine, ChainVersusBalancedTree) {
  Machine vm;
  std::vector<PackedVec> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(vm.encrypt({1}));
  auto chain = xs[0];
  for (int i = 1; i < 5; ++i) chain = vm.mult(chain, xs[i]);
  EXPECT_EQ(chain.depth, 4u);
  const auto balanced = vm.mult(vm.mult(xs[0], xs[1]), vm.mult(xs[2], xs[3]));
  EXPECT_EQ(balanced.depth, 2u);
}

TEST(Machine, DepthBudget) {
  Machine vm(1);
  const auto a = vm.encrypt({1});
  const auto ab = vm.mult(a, a);
  try {
    vm.mult(ab, a);
    FAIL() << "expected DepthBudgetError";
  } catch (const DepthBudgetError& e) {
    EXPECT_EQ(e.depth(), 2u);
    EXPECT_EQ(e.budget(), 1u);
  }
}

TEST(Machine, IndependentLedgersConcurrently) {
  std::vector<OpCounts> results(8);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < results.size(); ++t)
    pool.emplace_back([&, t] {
      Machine vm;
      auto v = vm.encrypt(BitVec(8, 1));
      for (std::size_t i = 0; i <= t; ++i) v = vm.mult(v, vm.rotate(v, 1));
      results[t] = vm.counts();
    });
  for (auto& th : pool) th.join();
  for (std::size_t t = 0; t < results.size(); ++t) {
    EXPECT_EQ(results[t].mult_ct_ct, t + 1);
    EXPECT_EQ(results[t].rotate, t + 1);
    EXPECT_EQ(results[t].max_depth, t + 1);
  }
}

TEST(OpCounts, Arithmetic) {
  OpCounts a{1, 2, 3, 4, 5, 6, 7}, b{1, 1, 1, 1, 1, 1, 9};
  const auto s = a + b;
  EXPECT_EQ(s.rotate, 3u);
  EXPECT_EQ(s.max_depth, 9u);
  const auto d = s - b;
  EXPECT_EQ(d.mult_ct_pt, 6u);
  EXPECT_EQ(d.multiplies(), 11u);
}
