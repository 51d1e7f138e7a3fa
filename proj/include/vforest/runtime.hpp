#pragma once

// Inference protocol over the simulated machine: the data owner encodes and
// encrypts a replicated feature vector, the evaluator runs
// compare -> reshuffle -> per-level select/mask -> accumulate, and the data
// owner decodes the N-hot result.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vforest/bitvec.hpp"
#include "vforest/fixed_point.hpp"
#include "vforest/forest.hpp"
#include "vforest/kernels.hpp"
#include "vforest/staging.hpp"
#include "vforest/vm.hpp"

namespace vforest {

enum class ModelMode {
  encrypted,  // model owner == data owner, offloading to the evaluator
  plaintext,  // model owner == evaluator; model operands stay in the clear
};

inline const char* to_string(ModelMode m) {
  return m == ModelMode::encrypted ? "encrypted" : "plaintext";
}

struct PartyConfig {
  ModelMode mode = ModelMode::encrypted;
  std::optional<std::size_t> k_declared;  // padding bound; defaults to the model's
};

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// What the data owner must know to build a query.
struct QueryLayout {
  std::size_t n_features = 0;
  FixedPoint fp;
  std::size_t k_declared = 0;

  std::size_t length() const { return n_features * k_declared; }

  static QueryLayout of(const ModelMeta& meta) {
    return {meta.n_features, meta.fixed_point(), meta.k_declared};
  }
};

struct FeatureQuery {
  std::vector<double> raw;
  std::vector<std::uint64_t> replicated;  // quantized, k_declared copies per feature
  PackedPlanes encoded;
  QueryLayout layout;
};

/// Replicates each feature k_declared times in feature order, quantizes and
/// encrypts one ciphertext per bit plane.
inline FeatureQuery encode_features(Machine& vm, const std::vector<double>& values,
                                    const QueryLayout& layout) {
  if (values.size() < layout.n_features)
    throw LayoutError("missing feature " + std::to_string(values.size()));
  if (values.size() > layout.n_features)
    throw LayoutError("model has " + std::to_string(layout.n_features) + " features, query has " +
                      std::to_string(values.size()));
  FeatureQuery q;
  q.raw = values;
  q.layout = layout;
  q.replicated.reserve(layout.length());
  for (std::size_t f = 0; f < layout.n_features; ++f) {
    std::uint64_t v = 0;
    try {
      v = quantize(values[f], layout.fp);
    } catch (const QuantizationError& e) {
      throw QuantizationError("feature " + std::to_string(f) + ": " + e.what());
    }
    q.replicated.insert(q.replicated.end(), layout.k_declared, v);
  }
  if (layout.length() > 0)
    q.encoded = encode_planes(vm, to_planes(q.replicated, layout.fp.precision), Kind::ciphertext);
  else
    q.encoded.precision = layout.fp.precision;
  return q;
}

/// Parses `feature <index> <decimal>` lines into a dense vector. Every index
/// in [0, n_features) must appear exactly once.
inline std::vector<double> parse_query(std::string_view text, std::size_t n_features) {
  std::map<std::uint32_t, double> seen;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    const auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    if (toks[0].text != "feature")
      throw ParseError(lineno, toks[0].column, "expected 'feature'");
    if (toks.size() != 3) throw ParseError(lineno, toks[0].column, "expected 'feature <index> <value>'");
    std::uint32_t idx = 0;
    double value = 0;
    if (!detail::parse_uint(toks[1].text, idx))
      throw ParseError(lineno, toks[1].column, "invalid feature index");
    if (!detail::parse_decimal(toks[2].text, value))
      throw ParseError(lineno, toks[2].column, "invalid feature value");
    if (!seen.emplace(idx, value).second)
      throw ParseError(lineno, toks[1].column, "duplicate feature " + std::to_string(idx));
    if (idx >= n_features)
      throw LayoutError("feature " + std::to_string(idx) + " is not used by the model (" +
                        std::to_string(n_features) + " features)");
  }
  std::vector<double> out(n_features);
  for (std::size_t f = 0; f < n_features; ++f) {
    auto it = seen.find(static_cast<std::uint32_t>(f));
    if (it == seen.end()) throw LayoutError("missing feature " + std::to_string(f));
    out[f] = it->second;
  }
  return out;
}

// Model operands as handed to the evaluator.
struct EncodedModel {
  ModelMeta meta;
  ModelMode mode = ModelMode::encrypted;
  PackedPlanes thresholds;
  PackedMatrix reshuf;
  std::vector<PackedMatrix> levels;
  std::vector<PackedVec> masks;
};

/// In encrypted mode this costs p + q + d(b+1) encryptions on `vm`.
inline EncodedModel encode_model(Machine& vm, const CompiledModel& model, ModelMode mode) {
  const Kind kind = mode == ModelMode::encrypted ? Kind::ciphertext : Kind::plaintext;
  EncodedModel m;
  m.meta = model.meta;
  m.mode = mode;
  if (model.meta.b == 0) return m;
  m.thresholds = encode_planes(vm, model.thresholds, kind);
  m.reshuf = encode_matrix(vm, model.reshuf, kind);
  for (std::size_t l = 0; l < model.level_mats.size(); ++l) {
    m.levels.push_back(encode_matrix(vm, model.level_mats[l], kind));
    m.masks.push_back(vm.encode(model.level_masks[l], kind));
  }
  return m;
}

// Ledger deltas for each step of one query.
struct InferenceTrace {
  OpCounts comparison;
  OpCounts reshuffle;
  std::vector<OpCounts> levels;
  OpCounts aggregation;
  unsigned comparison_depth = 0;
  unsigned reshuffle_depth = 0;
  std::vector<unsigned> level_depths;
  unsigned result_depth = 0;

  OpCounts level_total() const {
    OpCounts t;
    for (const auto& l : levels) t += l;
    return t;
  }
};

struct InferenceOutput {
  PackedVec labels;
  InferenceTrace trace;
};

inline InferenceOutput infer(Machine& vm, const EncodedModel& model, const FeatureQuery& query) {
  const auto& meta = model.meta;
  if (query.layout.n_features != meta.n_features || query.layout.k_declared != meta.k_declared ||
      query.layout.fp.precision != meta.precision || query.layout.fp.frac_bits != meta.frac_bits)
    throw LayoutError("query layout does not match model (n_features, k_declared, precision, frac_bits)");
  if (query.encoded.length() != meta.q)
    throw LayoutError("query length " + std::to_string(query.encoded.length()) +
                      " != model quantized branching " + std::to_string(meta.q));

  InferenceOutput out;
  auto& tr = out.trace;
  if (meta.b == 0) {
    // Every tree is a single leaf: the answer is constant.
    out.labels = vm.encrypt(BitVec(meta.num_leaves, 1));
    return out;
  }

  OpCounts mark = vm.counts();
  auto phase = [&](OpCounts& slot) {
    const OpCounts now = vm.counts();
    slot = now - mark;
    mark = now;
  };

  const PackedVec decisions = sec_comp(vm, query.encoded, model.thresholds);
  phase(tr.comparison);
  tr.comparison_depth = decisions.depth;

  const PackedVec branches = mat_mul(vm, model.reshuf, decisions);
  phase(tr.reshuffle);
  tr.reshuffle_depth = branches.depth;

  std::vector<PackedVec> level_results;
  level_results.reserve(meta.d);
  for (std::size_t l = 0; l < meta.d; ++l) {
    const PackedVec selected = mat_mul(vm, model.levels[l], branches);
    level_results.push_back(vm.add(selected, model.masks[l]));
    tr.levels.emplace_back();
    phase(tr.levels.back());
    tr.level_depths.push_back(level_results.back().depth);
  }

  out.labels = mult_all(vm, std::move(level_results));
  phase(tr.aggregation);
  tr.result_depth = out.labels.depth;
  return out;
}

/// Reference semantics: sequential descent on quantized values, right iff
/// feature > threshold. Returns the chosen leaf index for every tree.
inline std::vector<std::size_t> traverse_oracle(const Forest& forest,
                                                const std::vector<double>& values, FixedPoint fp) {
  std::vector<std::size_t> out;
  out.reserve(forest.num_trees());
  for (NodeId root : forest.roots) {
    NodeId cur = root;
    while (forest.node(cur).is_branch()) {
      const Node& n = forest.node(cur);
      if (n.feature >= values.size()) throw LayoutError("missing feature " + std::to_string(n.feature));
      const bool decision = quantize(values[n.feature], fp) > quantize(n.threshold, fp);
      cur = decision ? n.right : n.left;
    }
    out.push_back(forest.node(cur).index);
  }
  return out;
}

inline BitVec one_hot(const std::vector<std::size_t>& leaf_indices, std::size_t num_leaves) {
  BitVec bits(num_leaves, 0);
  for (auto i : leaf_indices) bits.at(i) = 1;
  return bits;
}

struct Decoded {
  std::vector<std::size_t> leaf_slots;     // per tree
  std::vector<std::uint32_t> tree_labels;  // per tree, label index
  std::uint32_t plurality = 0;             // most frequent; ties -> lowest label index
};

inline Decoded decode(const BitVec& bits, const std::vector<std::uint32_t>& codebook,
                      const std::vector<IndexRange>& tree_leaves, std::size_t num_labels) {
  if (bits.size() != codebook.size())
    throw MalformedResult("result has " + std::to_string(bits.size()) + " slots, codebook has " +
                          std::to_string(codebook.size()));
  Decoded d;
  std::vector<std::size_t> votes(num_labels, 0);
  for (std::size_t t = 0; t < tree_leaves.size(); ++t) {
    std::optional<std::size_t> hit;
    for (auto i = tree_leaves[t].begin; i < tree_leaves[t].end; ++i) {
      if (!bits[i]) continue;
      if (hit) throw MalformedResult("tree " + std::to_string(t) + " selected more than one leaf");
      hit = i;
    }
    if (!hit) throw MalformedResult("tree " + std::to_string(t) + " selected no leaf");
    d.leaf_slots.push_back(*hit);
    d.tree_labels.push_back(codebook[*hit]);
    ++votes.at(codebook[*hit]);
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < votes.size(); ++l)
    if (votes[l] > votes[best]) best = l;
  d.plurality = static_cast<std::uint32_t>(best);
  return d;
}

inline Decoded decode(const BitVec& bits, const CompiledModel& model) {
  return decode(bits, model.codebook, model.tree_leaves, model.labels.size());
}

// Everything one end-to-end query produces.
struct ClassificationResult {
  BitVec bits;
  Decoded decoded;
  InferenceTrace trace;
  OpCounts model_ledger;  // model encoding (zero encrypts in plaintext mode)
  OpCounts query_ledger;  // data encryption + evaluation
};

/// Convenience driver: applies the padding bound, encodes the model and the
/// query on separate machines, runs inference and decodes.
inline ClassificationResult classify(const CompiledModel& compiled, const std::vector<double>& values,
                                     const PartyConfig& cfg,
                                     std::optional<unsigned> depth_budget = std::nullopt) {
  const CompiledModel staged =
      cfg.k_declared ? repad(compiled, *cfg.k_declared) : compiled;
  Machine owner;
  const EncodedModel model = encode_model(owner, staged, cfg.mode);
  Machine evaluator(depth_budget);
  const FeatureQuery query = encode_features(evaluator, values, QueryLayout::of(staged.meta));
  auto out = infer(evaluator, model, query);

  ClassificationResult r;
  r.bits = evaluator.decrypt(out.labels);
  r.decoded = decode(r.bits, staged);
  r.trace = std::move(out.trace);
  r.model_ledger = owner.counts();
  r.query_ledger = evaluator.counts();
  return r;
}

}  // namespace vforest
