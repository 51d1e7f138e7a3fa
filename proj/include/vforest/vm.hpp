#pragma once

// Simulated packed-ciphertext machine. Values carry their slots in the clear
// plus a kind tag and a multiplicative depth; every homomorphic operation is
// tallied in an OpLedger. There is no key material and no noise model: depth
// is the only resource tracked.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "vforest/bitvec.hpp"

namespace vforest {

enum class Kind : std::uint8_t { ciphertext, plaintext };

struct PackedVec {
  BitVec slots;
  Kind kind = Kind::plaintext;
  unsigned depth = 0;
  std::uint64_t origin = 0;  // ledger-assigned id of the producing op

  std::size_t size() const { return slots.size(); }
  bool is_cipher() const { return kind == Kind::ciphertext; }
};

// Plain snapshot of ledger counters; supports arithmetic so per-phase costs
// can be taken as differences.
struct OpCounts {
  std::uint64_t encrypt = 0;
  std::uint64_t rotate = 0;
  std::uint64_t add = 0;
  std::uint64_t const_add = 0;
  std::uint64_t mult_ct_ct = 0;
  std::uint64_t mult_ct_pt = 0;
  unsigned max_depth = 0;

  std::uint64_t multiplies() const { return mult_ct_ct + mult_ct_pt; }

  OpCounts& operator+=(const OpCounts& o) {
    encrypt += o.encrypt;
    rotate += o.rotate;
    add += o.add;
    const_add += o.const_add;
    mult_ct_ct += o.mult_ct_ct;
    mult_ct_pt += o.mult_ct_pt;
    max_depth = std::max(max_depth, o.max_depth);
    return *this;
  }
  friend OpCounts operator+(OpCounts a, const OpCounts& b) { return a += b; }

  // Counter difference; max_depth is taken from `a`.
  friend OpCounts operator-(const OpCounts& a, const OpCounts& b) {
    OpCounts r;
    r.encrypt = a.encrypt - b.encrypt;
    r.rotate = a.rotate - b.rotate;
    r.add = a.add - b.add;
    r.const_add = a.const_add - b.const_add;
    r.mult_ct_ct = a.mult_ct_ct - b.mult_ct_ct;
    r.mult_ct_pt = a.mult_ct_pt - b.mult_ct_pt;
    r.max_depth = a.max_depth;
    return r;
  }

  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

class DepthBudgetError : public std::runtime_error {
 public:
  DepthBudgetError(unsigned depth, unsigned budget)
      : std::runtime_error("multiplicative depth " + std::to_string(depth) +
                           " exceeds budget " + std::to_string(budget)),
        depth_(depth),
        budget_(budget) {}
  unsigned depth() const { return depth_; }
  unsigned budget() const { return budget_; }

 private:
  unsigned depth_;
  unsigned budget_;
};

class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shared accumulator; increments are atomic so concurrent circuits may
/// report into one ledger, though a ledger per query merged afterwards is
/// the usual arrangement.
class OpLedger {
 public:
  explicit OpLedger(std::optional<unsigned> depth_budget = std::nullopt)
      : depth_budget_(depth_budget) {}
  OpLedger(const OpLedger&) = delete;
  OpLedger& operator=(const OpLedger&) = delete;

  enum class Op { encrypt, rotate, add, const_add, mult_ct_ct, mult_ct_pt };

  std::uint64_t record(Op op) {
    counter(op).fetch_add(1, std::memory_order_relaxed);
    return next_id();
  }

  std::uint64_t next_id() { return ids_.fetch_add(1, std::memory_order_relaxed) + 1; }

  void observe_depth(unsigned depth) {
    unsigned cur = max_depth_.load(std::memory_order_relaxed);
    while (depth > cur && !max_depth_.compare_exchange_weak(cur, depth)) {
    }
    if (depth_budget_ && depth > *depth_budget_) throw DepthBudgetError(depth, *depth_budget_);
  }

  std::optional<unsigned> depth_budget() const { return depth_budget_; }

  OpCounts snapshot() const {
    OpCounts c;
    c.encrypt = encrypt_.load();
    c.rotate = rotate_.load();
    c.add = add_.load();
    c.const_add = const_add_.load();
    c.mult_ct_ct = mult_ct_ct_.load();
    c.mult_ct_pt = mult_ct_pt_.load();
    c.max_depth = max_depth_.load();
    return c;
  }

 private:
  std::atomic<std::uint64_t>& counter(Op op) {
    switch (op) {
      case Op::encrypt: return encrypt_;
      case Op::rotate: return rotate_;
      case Op::add: return add_;
      case Op::const_add: return const_add_;
      case Op::mult_ct_ct: return mult_ct_ct_;
      case Op::mult_ct_pt: return mult_ct_pt_;
    }
    throw std::logic_error("unknown op");
  }

  std::atomic<std::uint64_t> encrypt_{0}, rotate_{0}, add_{0}, const_add_{0}, mult_ct_ct_{0},
      mult_ct_pt_{0};
  std::atomic<unsigned> max_depth_{0};
  std::atomic<std::uint64_t> ids_{0};
  std::optional<unsigned> depth_budget_;
};

/// The backend boundary. All operations are slotwise over equal-length
/// vectors; rotation is to the left: rotate([a,b,c], 1) == [b,c,a].
class Machine {
 public:
  explicit Machine(std::optional<unsigned> depth_budget = std::nullopt) : ledger_(depth_budget) {}

  const OpLedger& ledger() const { return ledger_; }
  OpCounts counts() const { return ledger_.snapshot(); }

  PackedVec encrypt(BitVec bits) {
    PackedVec v{std::move(bits), Kind::ciphertext, 0, 0};
    v.origin = ledger_.record(OpLedger::Op::encrypt);
    return v;
  }

  // Plaintext operands are free to create.
  PackedVec plaintext(BitVec bits) {
    return PackedVec{std::move(bits), Kind::plaintext, 0, ledger_.next_id()};
  }

  PackedVec encode(BitVec bits, Kind kind) {
    return kind == Kind::ciphertext ? encrypt(std::move(bits)) : plaintext(std::move(bits));
  }

  BitVec decrypt(const PackedVec& v) const { return v.slots; }

  PackedVec rotate(const PackedVec& v, std::size_t k) {
    if (v.size() == 0 || k % v.size() == 0) return v;
    k %= v.size();
    PackedVec r = v;
    std::rotate(r.slots.begin(), r.slots.begin() + static_cast<std::ptrdiff_t>(k), r.slots.end());
    r.origin = v.is_cipher() ? ledger_.record(OpLedger::Op::rotate) : ledger_.next_id();
    return r;
  }

  /// Rotates left by `k` and re-lays the result onto `target_len` slots,
  /// cyclically extending or truncating. Charged as a single rotation for
  /// ciphertexts, including k == 0, since the re-layout is a slot
  /// permutation in a real backend.
  PackedVec align(const PackedVec& v, std::size_t k, std::size_t target_len) {
    const std::size_t n = v.size();
    if (n == 0) throw LengthMismatch("cannot align an empty vector");
    PackedVec r;
    r.kind = v.kind;
    r.depth = v.depth;
    r.slots.resize(target_len);
    for (std::size_t i = 0; i < target_len; ++i) r.slots[i] = v.slots[(i + k) % n];
    r.origin = v.is_cipher() ? ledger_.record(OpLedger::Op::rotate) : ledger_.next_id();
    return r;
  }

  // [x,y,z] -> [x,y,z,x,y,...]; slot bookkeeping only.
  PackedVec replicate_extend(const PackedVec& v, std::size_t target_len) {
    if (target_len < 1) throw std::invalid_argument("target length must be >= 1");
    if (v.size() == 0) throw LengthMismatch("cannot extend an empty vector");
    PackedVec r = v;
    r.slots.resize(target_len);
    for (std::size_t i = v.size(); i < target_len; ++i) r.slots[i] = v.slots[i % v.size()];
    return r;
  }

  PackedVec truncate(const PackedVec& v, std::size_t target_len) {
    if (target_len < 1) throw std::invalid_argument("target length must be >= 1");
    if (target_len > v.size()) throw LengthMismatch("truncate cannot grow a vector");
    PackedVec r = v;
    r.slots.resize(target_len);
    return r;
  }

  // XOR.
  PackedVec add(const PackedVec& a, const PackedVec& b) {
    check_lengths(a, b, "add");
    PackedVec r;
    r.slots.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.slots[i] = a.slots[i] ^ b.slots[i];
    r.depth = std::max(a.depth, b.depth);
    if (a.is_cipher() && b.is_cipher()) {
      r.kind = Kind::ciphertext;
      r.origin = ledger_.record(OpLedger::Op::add);
    } else if (a.is_cipher() || b.is_cipher()) {
      r.kind = Kind::ciphertext;
      r.origin = ledger_.record(OpLedger::Op::const_add);
    } else {
      r.kind = Kind::plaintext;
      r.origin = ledger_.next_id();
    }
    return r;
  }

  // XOR with the all-ones vector.
  PackedVec negate(const PackedVec& a) { return add(a, plaintext(BitVec(a.size(), 1))); }

  // AND. Only ciphertext x ciphertext products add depth.
  PackedVec mult(const PackedVec& a, const PackedVec& b) {
    check_lengths(a, b, "mult");
    PackedVec r;
    r.slots.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.slots[i] = a.slots[i] & b.slots[i];
    if (a.is_cipher() && b.is_cipher()) {
      r.kind = Kind::ciphertext;
      r.depth = std::max(a.depth, b.depth) + 1;
      r.origin = ledger_.record(OpLedger::Op::mult_ct_ct);
    } else if (a.is_cipher() || b.is_cipher()) {
      r.kind = Kind::ciphertext;
      r.depth = std::max(a.depth, b.depth);
      r.origin = ledger_.record(OpLedger::Op::mult_ct_pt);
    } else {
      r.kind = Kind::plaintext;
      r.depth = 0;
      r.origin = ledger_.next_id();
    }
    if (r.is_cipher()) ledger_.observe_depth(r.depth);
    return r;
  }

 private:
  static void check_lengths(const PackedVec& a, const PackedVec& b, const char* op) {
    if (a.size() != b.size())
      throw LengthMismatch(std::string(op) + ": slot length mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  }

  OpLedger ledger_;
};

}  // namespace vforest
