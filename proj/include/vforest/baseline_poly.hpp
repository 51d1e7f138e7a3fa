#pragma once

// Per-tree polynomial evaluation used as a comparison baseline: every leaf is
// one term, the product of the decision literals on its root path times the
// leaf's label bits. Label bits share one packed vector per tree; the trees'
// decision nodes are otherwise evaluated one by one.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "vforest/bitvec.hpp"
#include "vforest/forest.hpp"
#include "vforest/kernels.hpp"
#include "vforest/props.hpp"
#include "vforest/runtime.hpp"
#include "vforest/staging.hpp"
#include "vforest/vm.hpp"

namespace vforest {

struct PolyLiteral {
  std::size_t branch = 0;  // preorder branch index
  bool positive = true;    // d (right/true path) or 1 - d (left/false path)
  friend bool operator==(const PolyLiteral&, const PolyLiteral&) = default;
};

struct PolyTerm {
  std::vector<PolyLiteral> literals;  // root to leaf
  std::uint32_t label = 0;
};

struct PolyTree {
  std::vector<PolyTerm> terms;  // one per leaf, leaf-index order
};

struct PolyForest {
  std::vector<PolyTree> trees;
  std::size_t label_bits = 1;  // slots per tree result
  std::size_t num_branches = 0;
};

inline BitVec label_bit_vector(std::uint32_t label, std::size_t width) {
  BitVec bits(width, 0);
  for (std::size_t k = 0; k < width; ++k) bits[k] = static_cast<std::uint8_t>((label >> k) & 1u);
  return bits;
}

inline std::uint32_t label_from_bits(const BitVec& bits) {
  std::uint32_t v = 0;
  for (std::size_t k = bits.size(); k-- > 0;) v = (v << 1) | bits[k];
  return v;
}

inline PolyForest poly_compile(const Forest& forest) {
  PolyForest pf;
  pf.label_bits = std::max<std::size_t>(1, ceil_log2(forest.labels.size()));
  pf.num_branches = forest.num_branches();
  for (NodeId root : forest.roots) {
    PolyTree tree;
    // Depth-first with an explicit path; leaves come out in preorder.
    struct Frame {
      NodeId node;
      std::vector<PolyLiteral> path;
    };
    std::vector<Frame> stack{{root, {}}};
    while (!stack.empty()) {
      Frame f = std::move(stack.back());
      stack.pop_back();
      const Node& n = forest.node(f.node);
      if (n.is_leaf()) {
        tree.terms.push_back({std::move(f.path), n.label});
        continue;
      }
      auto right = f.path;
      right.push_back({n.index, true});
      f.path.push_back({n.index, false});
      stack.push_back({n.right, std::move(right)});
      stack.push_back({n.left, std::move(f.path)});
    }
    pf.trees.push_back(std::move(tree));
  }
  return pf;
}

struct PolyOutput {
  std::vector<PackedVec> tree_bits;  // label_bits slots each

  std::vector<std::uint32_t> labels(const Machine& vm) const {
    std::vector<std::uint32_t> out;
    for (const auto& t : tree_bits) out.push_back(label_from_bits(vm.decrypt(t)));
    return out;
  }
};

/// `decisions` holds branch results at the slots given by `slot_of_branch`
/// (identity for a preorder vector, the padded layout for raw comparison
/// output). Each decision is isolated with a rotation and a masking
/// multiply, then spread over the label-bit slots.
inline PolyOutput poly_eval(Machine& vm, const PolyForest& pf, const PackedVec& decisions,
                            std::span<const std::size_t> slot_of_branch,
                            Kind label_kind = Kind::ciphertext) {
  if (slot_of_branch.size() != pf.num_branches)
    throw LengthMismatch("poly_eval: branch slot map has wrong size");
  const std::size_t width = pf.label_bits;

  std::vector<PackedVec> lit_pos(pf.num_branches);
  std::vector<PackedVec> lit_neg(pf.num_branches);
  if (pf.num_branches > 0) {
    BitVec unit(decisions.size(), 0);
    unit.at(0) = 1;
    const PackedVec unit_mask = vm.plaintext(unit);
    for (std::size_t j = 0; j < pf.num_branches; ++j) {
      PackedVec x = vm.mult(vm.rotate(decisions, slot_of_branch[j]), unit_mask);
      x = vm.replicate_extend(vm.truncate(x, 1), width);
      lit_neg[j] = vm.negate(x);
      lit_pos[j] = std::move(x);
    }
  }

  PolyOutput out;
  for (const auto& tree : pf.trees) {
    PackedVec acc;
    bool have = false;
    for (const auto& term : tree.terms) {
      const PackedVec label = vm.encode(label_bit_vector(term.label, width), label_kind);
      PackedVec value;
      if (term.literals.empty()) {
        value = label;
      } else {
        std::vector<PackedVec> factors;
        factors.reserve(term.literals.size());
        for (const auto& lit : term.literals)
          factors.push_back(lit.positive ? lit_pos[lit.branch] : lit_neg[lit.branch]);
        value = vm.mult(mult_all(vm, std::move(factors)), label);
      }
      acc = have ? vm.add(acc, value) : std::move(value);
      have = true;
    }
    out.tree_bits.push_back(std::move(acc));
  }
  return out;
}

inline PolyOutput poly_eval(Machine& vm, const PolyForest& pf, const PackedVec& preorder_decisions,
                            Kind label_kind = Kind::ciphertext) {
  std::vector<std::size_t> identity(pf.num_branches);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  return poly_eval(vm, pf, preorder_decisions, identity, label_kind);
}

struct BaselineResult {
  std::vector<std::uint32_t> labels;  // per tree
  OpCounts comparison;                // shared comparison step
  OpCounts query_ledger;              // data encryption + whole evaluation
  OpCounts model_ledger;
  unsigned depth = 0;
};

/// End-to-end baseline query: the same packed comparison as the vectorized
/// path, then per-tree polynomials reading decisions straight from the
/// padded comparison slots.
inline BaselineResult run_baseline(const Forest& forest, const CompiledModel& compiled,
                                   const std::vector<double>& values, ModelMode mode) {
  const ForestProps props = compute_props(forest);
  const auto owners = threshold_slot_owners(props, compiled.meta.k_declared);
  std::vector<std::size_t> slot_of_branch(props.b);
  for (std::size_t s = 0; s < owners.size(); ++s)
    if (owners[s]) slot_of_branch[*owners[s]] = s;

  const Kind kind = mode == ModelMode::encrypted ? Kind::ciphertext : Kind::plaintext;
  const PolyForest pf = poly_compile(forest);
  BaselineResult r;
  Machine owner;
  Machine vm;
  const FeatureQuery query = encode_features(vm, values, QueryLayout::of(compiled.meta));

  PackedVec decisions;
  if (props.b > 0) {
    const PackedPlanes thresholds = encode_planes(owner, compiled.thresholds, kind);
    const OpCounts before = vm.counts();
    decisions = sec_comp(vm, query.encoded, thresholds);
    r.comparison = vm.counts() - before;
  }
  const PolyOutput out = poly_eval(vm, pf, decisions, slot_of_branch, kind);
  r.labels = out.labels(vm);
  for (const auto& t : out.tree_bits) r.depth = std::max(r.depth, t.depth);
  r.query_ledger = vm.counts();  // includes the per-term label encodings
  r.model_ledger = owner.counts();
  return r;
}

}  // namespace vforest
