#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "vforest/forest.hpp"

namespace vforest {

// Structural quantities the staging compiler needs. Vectors indexed by branch
// index are in forest-wide preorder.
struct ForestProps {
  std::size_t b = 0;           // branching: number of branch nodes
  std::size_t d = 0;           // max level over all nodes
  std::size_t n_features = 0;  // 1 + max feature index used
  std::size_t K = 0;           // max multiplicity
  std::size_t q = 0;           // quantized branching, K * n_features
  std::size_t num_leaves = 0;
  std::vector<std::size_t> kappa;  // per-feature multiplicity

  std::vector<std::size_t> level_of;     // per branch
  std::vector<IndexRange> downstream;    // per branch, contiguous leaf indices
  std::vector<IndexRange> true_side;     // per branch, leaves under the right (true) child
  std::vector<std::size_t> width;        // per branch
  std::vector<std::uint32_t> f_vec;      // per branch: feature
  std::vector<double> t_vec;             // per branch: threshold
};

/// Level of an arbitrary node; leaves are level 0.
inline std::vector<std::size_t> node_levels(const Forest& forest) {
  std::vector<std::size_t> level(forest.nodes.size(), 0);
  // Preorder places children after parents, so a reverse sweep is post-order.
  for (std::size_t i = forest.nodes.size(); i-- > 0;) {
    const Node& n = forest.nodes[i];
    if (n.is_branch()) level[i] = 1 + std::max(level[n.left], level[n.right]);
  }
  return level;
}

inline ForestProps compute_props(const Forest& forest) {
  ForestProps p;
  p.b = forest.num_branches();
  p.num_leaves = forest.num_leaves();

  const auto level = node_levels(forest);
  std::vector<IndexRange> span(forest.nodes.size());
  for (std::size_t i = forest.nodes.size(); i-- > 0;) {
    const Node& n = forest.nodes[i];
    if (n.is_leaf())
      span[i] = {n.index, n.index + 1};
    else
      span[i] = {span[n.left].begin, span[n.right].end};
  }

  p.level_of.resize(p.b);
  p.downstream.resize(p.b);
  p.true_side.resize(p.b);
  p.width.resize(p.b);
  p.f_vec.resize(p.b);
  p.t_vec.resize(p.b);
  for (std::size_t j = 0; j < p.b; ++j) {
    const NodeId id = forest.branches[j];
    const Node& n = forest.nodes[id];
    p.level_of[j] = level[id];
    p.downstream[j] = span[id];
    p.true_side[j] = span[n.right];
    p.width[j] = span[id].size();
    p.f_vec[j] = n.feature;
    p.t_vec[j] = n.threshold;
    p.d = std::max(p.d, level[id]);
    p.n_features = std::max<std::size_t>(p.n_features, n.feature + 1);
  }

  p.kappa.assign(p.n_features, 0);
  for (auto f : p.f_vec) ++p.kappa[f];
  p.K = p.kappa.empty() ? 0 : *std::max_element(p.kappa.begin(), p.kappa.end());
  p.q = p.K * p.n_features;
  return p;
}

}  // namespace vforest
