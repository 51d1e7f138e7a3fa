#pragma once

// Deterministic forest and query generators for tests, benchmarks and the
// `check` harness, plus the small hand-built example forest.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vforest/fixed_point.hpp"
#include "vforest/forest.hpp"
#include "vforest/props.hpp"

namespace vforest {

/// Two features (x = 0, y = 1), five branches and six leaves:
///
///   d0: y > 2
///   ├─ false: d1: x > 3
///   │         ├─ false: d2: y > 4 -> L0 | L1
///   │         └─ true:  d3: x > 1 -> L2 | L3
///   └─ true:  d4: y > 7 -> L4 | L5
///
/// (x, y) = (0, 5) lands on L4.
inline constexpr const char* kExampleForest =
    "labels L0 L1 L2 L3 L4 L5\n"
    "branch 1 2 branch 0 3 branch 1 4 leaf 0 leaf 1 branch 0 1 leaf 2 leaf 3 branch 1 7 leaf 4 leaf 5\n";

inline Forest example_forest() { return parse_forest(kExampleForest); }

struct RandomForestSpec {
  std::size_t max_trees = 5;
  std::size_t max_depth = 8;
  std::size_t max_branches = 64;
  std::size_t max_features = 6;
  std::size_t max_labels = 6;
  FixedPoint fp{8, 0};
};

namespace detail {

inline std::size_t capacity(std::size_t depth) {
  return depth >= 63 ? ~std::size_t{0} : (std::size_t{1} << depth) - 1;
}

template <class Rng>
std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

template <class Rng>
double random_threshold(Rng& rng, FixedPoint fp) {
  const auto raw = uniform(rng, 0, static_cast<std::size_t>(fp.max_value()));
  return std::ldexp(static_cast<double>(raw), -static_cast<int>(fp.frac_bits));
}

/// Emits a subtree with exactly `k` branches whose level is at most
/// `depth`, or exactly `depth` when `exact` is set.
template <class Rng>
void emit_tree(ForestBuilder& fb, Rng& rng, std::size_t k, std::size_t depth, bool exact,
               std::size_t n_features, std::size_t n_labels, FixedPoint fp) {
  if (k == 0) {
    fb.leaf(static_cast<std::uint32_t>(uniform(rng, 0, n_labels - 1)));
    return;
  }
  fb.branch(static_cast<std::uint32_t>(uniform(rng, 0, n_features - 1)), random_threshold(rng, fp));
  const std::size_t rest = k - 1;
  const std::size_t cap = capacity(depth - 1);
  std::size_t lo = rest > cap ? rest - cap : 0;
  std::size_t hi = std::min(cap, rest);
  bool deep_left = false;
  if (exact && depth > 1) {
    lo = std::max(lo, depth - 1);
    deep_left = uniform(rng, 0, 1) == 0;
  }
  if (lo > hi) throw std::logic_error("infeasible tree shape");
  const std::size_t k_deep = uniform(rng, lo, hi);
  const std::size_t k_other = rest - k_deep;
  const bool exact_child = exact && depth > 1;
  if (deep_left) {
    emit_tree(fb, rng, k_deep, depth - 1, exact_child, n_features, n_labels, fp);
    emit_tree(fb, rng, k_other, depth - 1, false, n_features, n_labels, fp);
  } else {
    emit_tree(fb, rng, k_other, depth - 1, false, n_features, n_labels, fp);
    emit_tree(fb, rng, k_deep, depth - 1, exact_child, n_features, n_labels, fp);
  }
}

inline std::vector<std::string> numbered_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("L" + std::to_string(i));
  return out;
}

}  // namespace detail

/// Random forest within the bounds of `spec`. At least one branch overall.
template <class Rng>
Forest random_forest(Rng& rng, const RandomForestSpec& spec) {
  using detail::uniform;
  const std::size_t n_trees = uniform(rng, 1, spec.max_trees);
  const std::size_t n_features = uniform(rng, 1, spec.max_features);
  const std::size_t n_labels = uniform(rng, 2, spec.max_labels);
  const std::size_t depth = uniform(rng, 1, spec.max_depth);

  std::vector<std::size_t> sizes(n_trees, 0);
  std::size_t budget = uniform(rng, 1, spec.max_branches);
  for (std::size_t t = 0; t < n_trees && budget > 0; ++t) {
    const std::size_t most = std::min(budget, detail::capacity(depth));
    sizes[t] = t + 1 == n_trees ? most : uniform(rng, 0, most);
    budget -= sizes[t];
  }
  if (std::all_of(sizes.begin(), sizes.end(), [](auto s) { return s == 0; })) sizes[0] = 1;

  ForestBuilder fb(detail::numbered_labels(n_labels));
  for (auto k : sizes) {
    fb.begin_tree();
    detail::emit_tree(fb, rng, k, depth, false, n_features, n_labels, spec.fp);
    fb.end_tree();
  }
  return std::move(fb).finish();
}

/// Random query; about a third of the values copy a threshold of the same
/// feature so equality cases are exercised.
template <class Rng>
std::vector<double> random_query(Rng& rng, const ForestProps& props, FixedPoint fp) {
  std::vector<double> values(props.n_features);
  for (std::size_t f = 0; f < props.n_features; ++f) {
    std::vector<double> ts;
    for (std::size_t j = 0; j < props.b; ++j)
      if (props.f_vec[j] == f) ts.push_back(props.t_vec[j]);
    if (!ts.empty() && detail::uniform(rng, 0, 2) == 0)
      values[f] = ts[detail::uniform(rng, 0, ts.size() - 1)];
    else
      values[f] = detail::random_threshold(rng, fp);
  }
  return values;
}

struct MicroModelSpec {
  std::string name;
  std::size_t depth;
  unsigned precision;
  std::vector<std::size_t> tree_branches;
};

/// Shapes of the eight synthetic micro benchmarks: 2 features, 3 labels.
inline std::vector<MicroModelSpec> micro_model_specs() {
  return {
      {"depth4", 4, 8, {7, 8}},   {"depth5", 5, 8, {7, 8}},    {"depth6", 6, 8, {7, 8}},
      {"width55", 5, 8, {5, 5}},  {"width78", 5, 8, {7, 8}},   {"width677", 5, 8, {6, 7, 7}},
      {"prec8", 5, 8, {7, 8}},    {"prec16", 5, 16, {7, 8}},
  };
}

/// Every tree reaches exactly `spec.depth` levels.
inline Forest micro_model(const MicroModelSpec& spec, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  const FixedPoint fp{spec.precision, 0};
  ForestBuilder fb(detail::numbered_labels(3));
  for (auto k : spec.tree_branches) {
    fb.begin_tree();
    detail::emit_tree(fb, rng, k, spec.depth, true, 2, 3, fp);
    fb.end_tree();
  }
  return std::move(fb).finish();
}

/// Wide synthetic model in the shape of a census-income classifier: six
/// features, two labels, five depth-6 trees, 65 branches.
inline Forest wide_model(std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  const FixedPoint fp{8, 0};
  ForestBuilder fb({"le50k", "gt50k"});
  for (std::size_t k : {13u, 13u, 13u, 13u, 13u}) {
    fb.begin_tree();
    detail::emit_tree(fb, rng, k, 6, true, 6, 2, fp);
    fb.end_tree();
  }
  return std::move(fb).finish();
}

}  // namespace vforest
