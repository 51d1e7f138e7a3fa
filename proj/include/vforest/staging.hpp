#pragma once

// Stages a forest into the packed artifacts the vectorized evaluator consumes:
// padded threshold planes, the reshuffling matrix, and per-level selection
// matrices with their masks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vforest/bitvec.hpp"
#include "vforest/diag_matrix.hpp"
#include "vforest/fixed_point.hpp"
#include "vforest/forest.hpp"
#include "vforest/props.hpp"

namespace vforest {

// Comparison convention shared by the compiler, the runtime and the oracle:
// a branch decides `true` iff feature > threshold, and `true` goes right.
inline constexpr const char* kComparison = "gt_right";
inline constexpr std::uint64_t kSentinel = 0;

struct ModelMeta {
  unsigned precision = 8;
  unsigned frac_bits = 0;
  std::size_t b = 0;
  std::size_t d = 0;
  std::size_t K = 0;           // true max multiplicity
  std::size_t k_declared = 0;  // padding bound actually used for the layout
  std::size_t q = 0;           // k_declared * n_features
  std::size_t n_features = 0;
  std::size_t num_leaves = 0;
  std::size_t num_trees = 0;

  FixedPoint fixed_point() const { return {precision, frac_bits}; }
  friend bool operator==(const ModelMeta&, const ModelMeta&) = default;
};

struct CompiledModel {
  ModelMeta meta;
  BitPlanes thresholds;                // length q
  DiagMatrix reshuf;                   // b x q
  std::vector<DiagMatrix> level_mats;  // d entries, each num_leaves x b; index 0 is level 1
  std::vector<BitVec> level_masks;     // d entries, each num_leaves
  std::vector<std::string> labels;
  std::vector<std::uint32_t> codebook;  // leaf slot -> label index
  std::vector<IndexRange> tree_leaves;  // leaf slots owned by each tree

  std::string label_name(std::size_t leaf_slot) const { return labels.at(codebook.at(leaf_slot)); }

  friend bool operator==(const CompiledModel&, const CompiledModel&) = default;
};

class StagingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Branch index held by each padded threshold slot, or nullopt for sentinels.
/// Feature groups are k_declared wide and appear in feature order; inside a
/// group, branches keep ascending preorder index.
inline std::vector<std::optional<std::size_t>> threshold_slot_owners(const ForestProps& props,
                                                                     std::size_t k_declared) {
  if (k_declared < props.K)
    throw StagingError("declared multiplicity bound " + std::to_string(k_declared) +
                       " is below the model's max multiplicity " + std::to_string(props.K));
  std::vector<std::optional<std::size_t>> slots(props.n_features * k_declared);
  std::vector<std::size_t> fill(props.n_features, 0);
  for (std::size_t j = 0; j < props.b; ++j) {
    const auto f = props.f_vec[j];
    slots[f * k_declared + fill[f]++] = j;
  }
  return slots;
}

inline BitPlanes build_threshold_vector(const ForestProps& props, FixedPoint fp,
                                        std::size_t k_declared) {
  fp.validate();
  const auto owners = threshold_slot_owners(props, k_declared);
  std::vector<std::uint64_t> values(owners.size(), kSentinel);
  for (std::size_t s = 0; s < owners.size(); ++s) {
    if (!owners[s]) continue;
    const auto j = *owners[s];
    try {
      values[s] = quantize(props.t_vec[j], fp);
    } catch (const QuantizationError& e) {
      throw QuantizationError("threshold of branch " + std::to_string(j) + ": " + e.what());
    }
  }
  return to_planes(values, fp.precision);
}

inline BitPlanes build_threshold_vector(const ForestProps& props, FixedPoint fp) {
  return build_threshold_vector(props, fp, props.K);
}

/// b x q matrix moving each branch's comparison result from its padded slot
/// to its preorder position. Sentinel slots are empty columns.
inline DiagMatrix build_reshuffle(const ForestProps& props, std::size_t k_declared) {
  const auto owners = threshold_slot_owners(props, k_declared);
  DenseMatrix dense(props.b, BitVec(owners.size(), 0));
  for (std::size_t s = 0; s < owners.size(); ++s)
    if (owners[s]) dense[*owners[s]][s] = 1;
  return DiagMatrix::from_dense(dense, owners.size());
}

inline DiagMatrix build_reshuffle(const ForestProps& props) {
  return build_reshuffle(props, props.K);
}

struct LevelArtifacts {
  std::vector<DiagMatrix> matrices;
  std::vector<BitVec> masks;
};

/// Branch chosen for each leaf at level `level`: the ancestor with the
/// highest level not exceeding `level`. Leaves with no such ancestor get
/// nullopt; their row stays empty and their mask bit is 1, which leaves the
/// product untouched (the skipped ancestors are covered at their own levels).
inline std::vector<std::optional<std::size_t>> level_selection(
    const ForestProps& props, const std::vector<std::vector<std::size_t>>& ancestors,
    std::size_t level) {
  std::vector<std::optional<std::size_t>> sel(props.num_leaves);
  for (std::size_t i = 0; i < props.num_leaves; ++i) {
    std::size_t best_level = 0;
    for (auto j : ancestors[i]) {
      const auto l = props.level_of[j];
      if (l <= level && l > best_level) {
        best_level = l;
        sel[i] = j;
      }
    }
  }
  return sel;
}

inline std::vector<std::vector<std::size_t>> leaf_ancestors(const ForestProps& props) {
  std::vector<std::vector<std::size_t>> anc(props.num_leaves);
  for (std::size_t j = 0; j < props.b; ++j)
    for (auto i = props.downstream[j].begin; i < props.downstream[j].end; ++i) anc[i].push_back(j);
  return anc;
}

inline LevelArtifacts build_levels(const ForestProps& props) {
  LevelArtifacts out;
  const auto anc = leaf_ancestors(props);
  for (std::size_t level = 1; level <= props.d; ++level) {
    const auto sel = level_selection(props, anc, level);
    DenseMatrix dense(props.num_leaves, BitVec(props.b, 0));
    BitVec mask(props.num_leaves, 1);
    for (std::size_t i = 0; i < props.num_leaves; ++i) {
      if (!sel[i]) continue;
      dense[i][*sel[i]] = 1;
      mask[i] = props.true_side[*sel[i]].contains(i) ? 0 : 1;
    }
    out.matrices.push_back(DiagMatrix::from_dense(dense, props.b));
    out.masks.push_back(std::move(mask));
  }
  return out;
}

inline CompiledModel compile(const Forest& forest, FixedPoint fp,
                             std::optional<std::size_t> k_declared = std::nullopt) {
  fp.validate();
  const ForestProps props = compute_props(forest);
  const std::size_t k = k_declared.value_or(props.K);

  CompiledModel m;
  m.meta.precision = fp.precision;
  m.meta.frac_bits = fp.frac_bits;
  m.meta.b = props.b;
  m.meta.d = props.d;
  m.meta.K = props.K;
  m.meta.k_declared = k;
  m.meta.q = props.n_features * k;
  m.meta.n_features = props.n_features;
  m.meta.num_leaves = props.num_leaves;
  m.meta.num_trees = forest.num_trees();

  m.thresholds = build_threshold_vector(props, fp, k);
  m.reshuf = build_reshuffle(props, k);
  auto levels = build_levels(props);
  m.level_mats = std::move(levels.matrices);
  m.level_masks = std::move(levels.masks);

  m.labels = forest.labels;
  m.codebook.reserve(props.num_leaves);
  for (NodeId id : forest.leaves) m.codebook.push_back(forest.node(id).label);
  m.tree_leaves = forest.tree_leaves;
  return m;
}

/// Widens an existing model's layout to a looser multiplicity bound by
/// appending sentinel slots to every feature group.
inline CompiledModel repad(const CompiledModel& model, std::size_t k_declared) {
  const auto k_old = model.meta.k_declared;
  if (k_declared < k_old)
    throw StagingError("cannot shrink padding bound from " + std::to_string(k_old) + " to " +
                       std::to_string(k_declared));
  if (k_declared == k_old) return model;

  const auto nf = model.meta.n_features;
  auto new_slot = [&](std::size_t s) { return (s / k_old) * k_declared + s % k_old; };

  CompiledModel m = model;
  m.meta.k_declared = k_declared;
  m.meta.q = nf * k_declared;

  for (std::size_t i = 0; i < m.thresholds.planes.size(); ++i) {
    BitVec plane(m.meta.q, static_cast<std::uint8_t>(0));  // sentinel bits are all 0
    for (std::size_t s = 0; s < model.meta.q; ++s) plane[new_slot(s)] = model.thresholds.planes[i][s];
    m.thresholds.planes[i] = std::move(plane);
  }

  const auto old_dense = model.reshuf.to_dense();
  DenseMatrix dense(model.meta.b, BitVec(m.meta.q, 0));
  for (std::size_t r = 0; r < model.meta.b; ++r)
    for (std::size_t s = 0; s < model.meta.q; ++s) dense[r][new_slot(s)] = old_dense[r][s];
  m.reshuf = DiagMatrix::from_dense(dense, m.meta.q);
  return m;
}

}  // namespace vforest
