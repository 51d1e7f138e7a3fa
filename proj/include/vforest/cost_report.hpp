#pragma once

// Measured ledgers against the closed-form operation counts and depth bound.
// Every "log" in the closed forms is ceil(log2(.)).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "vforest/bitvec.hpp"
#include "vforest/runtime.hpp"
#include "vforest/staging.hpp"
#include "vforest/vm.hpp"

namespace vforest {

struct ClosedForms {
  std::int64_t p = 0, q = 0, b = 0, d = 0;
  std::int64_t lg_p = 0, lg_d = 0;

  // Secure comparison
  std::int64_t cmp_add = 0, cmp_const_add = 0, cmp_multiply = 0, cmp_depth = 0;
  // One level
  std::int64_t level_rotate = 0, level_add = 0, level_multiply = 0, level_depth = 0;
  // Accumulation
  std::int64_t agg_multiply = 0, agg_depth = 0;
  // Encryption
  std::int64_t model_encrypt = 0, data_encrypt = 0;
  // Whole query
  std::int64_t total_encrypt = 0, total_rotate = 0, total_add = 0, total_const_add = 0,
               total_multiply = 0, total_depth = 0;
};

inline ClosedForms closed_forms(const ModelMeta& meta) {
  ClosedForms c;
  c.p = static_cast<std::int64_t>(meta.precision);
  c.q = static_cast<std::int64_t>(meta.q);
  c.b = static_cast<std::int64_t>(meta.b);
  c.d = static_cast<std::int64_t>(meta.d);
  c.lg_p = ceil_log2(meta.precision);
  c.lg_d = ceil_log2(meta.d);
  const auto p = c.p, q = c.q, b = c.b, d = c.d, lp = c.lg_p, ld = c.lg_d;

  c.cmp_add = 4 * p - 2;
  c.cmp_const_add = p;
  c.cmp_multiply = p * lp + 3 * p - 2;
  c.cmp_depth = 2 * lp + 1;

  c.level_rotate = b;
  c.level_add = b + 1;
  c.level_multiply = b;
  c.level_depth = 1;

  c.agg_multiply = 2 * d - 2;
  c.agg_depth = ld;

  c.model_encrypt = p + q + d * (b + 1);
  c.data_encrypt = 1;

  c.total_encrypt = 1 + p + q + d * (b + 1);
  c.total_rotate = q + d * b;
  c.total_add = 4 * p - 2 + q + d * (b + 1);
  c.total_const_add = p;
  c.total_multiply = p * lp + 3 * p + q + d * b + 2 * d - 4;
  c.total_depth = 2 * lp + ld + 2;
  return c;
}

struct CostRow {
  std::string name;
  std::int64_t measured = 0;
  std::int64_t predicted = 0;
  std::string note;  // non-empty for a known, documented discrepancy

  std::int64_t delta() const { return measured - predicted; }
};

struct CostCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CostReport {
  ModelMeta meta;
  ModelMode mode = ModelMode::encrypted;
  std::vector<CostRow> rows;
  std::vector<CostCheck> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  const CostRow* row(const std::string& name) const {
    for (const auto& r : rows)
      if (r.name == name) return &r;
    return nullptr;
  }
};

namespace detail {
inline std::int64_t i64(std::uint64_t v) { return static_cast<std::int64_t>(v); }
inline std::int64_t xors(const OpCounts& c) { return i64(c.add + c.const_add); }
}  // namespace detail

/// Compares one query's ledgers with the closed forms. Relations that must
/// hold exactly become checks; the reconstructed comparison circuit and the
/// documented count differences are reported as rows with a note.
inline CostReport report(const ModelMeta& meta, ModelMode mode, const OpCounts& model_ledger,
                         const OpCounts& query_ledger, const InferenceTrace& trace) {
  using detail::i64;
  using detail::xors;
  const ClosedForms cf = closed_forms(meta);
  CostReport r;
  r.meta = meta;
  r.mode = mode;
  auto row = [&](std::string name, std::int64_t measured, std::int64_t predicted, std::string note = {}) {
    r.rows.push_back({std::move(name), measured, predicted, std::move(note)});
  };
  auto check = [&](std::string name, bool pass, std::string detail) {
    r.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  const bool encrypted = mode == ModelMode::encrypted;
  const OpCounts total = model_ledger + query_ledger;

  row("comparison.add", xors(trace.comparison) - i64(trace.comparison.const_add), cf.cmp_add,
      "reconstructed comparison circuit");
  row("comparison.const_add", i64(trace.comparison.const_add), cf.cmp_const_add,
      "reconstructed comparison circuit");
  row("comparison.multiply", i64(trace.comparison.multiplies()), cf.cmp_multiply,
      "reconstructed comparison circuit");
  row("comparison.depth", trace.comparison_depth, cf.cmp_depth);

  for (std::size_t l = 0; l < trace.levels.size(); ++l) {
    const auto& lv = trace.levels[l];
    const std::string pre = "level" + std::to_string(l + 1);
    row(pre + ".rotate", i64(lv.rotate), cf.level_rotate);
    row(pre + ".add", xors(lv), cf.level_add, "b additions (b-1 sums + 1 mask) vs b+1");
    row(pre + ".multiply", i64(lv.multiplies()), cf.level_multiply);
    row(pre + ".depth", static_cast<std::int64_t>(trace.level_depths[l]) - trace.reshuffle_depth,
        encrypted ? cf.level_depth : 0);
  }
  row("aggregation.multiply", i64(trace.aggregation.multiplies()), cf.agg_multiply,
      "balanced AND tree uses d-1 multiplies vs 2d-2");
  row("aggregation.depth",
      static_cast<std::int64_t>(trace.result_depth) -
          (trace.level_depths.empty() ? 0 : static_cast<std::int64_t>(trace.level_depths.front())),
      cf.agg_depth);

  row("encrypt.model", i64(model_ledger.encrypt), encrypted ? cf.model_encrypt : 0);
  row("encrypt.data", i64(query_ledger.encrypt), cf.data_encrypt,
      "one ciphertext per bit plane (p) vs 1");

  row("total.encrypt", i64(total.encrypt), encrypted ? cf.total_encrypt : cf.data_encrypt,
      "data encrypted per bit plane");
  row("total.rotate", i64(total.rotate), cf.total_rotate);
  row("total.add", i64(total.add), cf.total_add, "comparison circuit, level adds, reshuffle sum");
  row("total.const_add", i64(total.const_add), cf.total_const_add);
  row("total.multiply", i64(total.multiplies()), cf.total_multiply,
      "comparison circuit and d-1 accumulation");
  row("total.depth", total.max_depth, cf.total_depth);

  if (meta.b == 0) {
    check("degenerate model", total.multiplies() == 0, "no branches: constant result, no multiplies");
    return r;
  }

  // Exact relations.
  bool rot_ok = true, mul_ok = true, add_ok = true, depth1_ok = true;
  for (std::size_t l = 0; l < trace.levels.size(); ++l) {
    rot_ok &= trace.levels[l].rotate == meta.b;
    mul_ok &= trace.levels[l].multiplies() == meta.b;
    add_ok &= xors(trace.levels[l]) == cf.level_add - 1;
    depth1_ok &= trace.level_depths[l] - trace.reshuffle_depth == (encrypted ? 1u : 0u);
  }
  check("level.rotate == b", rot_ok, "every level rotates once per branch column");
  check("level.multiply == b", mul_ok, "every level multiplies once per branch column");
  check("level.add delta == -1", add_ok, "documented: b additions per level");
  check("level.depth contribution", depth1_ok,
        encrypted ? "each level product adds exactly one level" : "plaintext matrices add no depth");
  check("total.rotate == q + d*b", i64(total.rotate) == cf.total_rotate, "reshuffle q + levels d*b");
  check("aggregation.multiply == d-1", i64(trace.aggregation.multiplies()) == cf.d - 1,
        "documented delta vs 2d-2 is -(d-1)");
  check("aggregation.depth == ceil(lg d)",
        trace.result_depth - trace.level_depths.front() == static_cast<unsigned>(cf.lg_d),
        "balanced accumulation");
  check("encrypt.data == p", query_ledger.encrypt == meta.precision,
        "documented delta vs 1 is p-1");
  if (encrypted)
    check("encrypt.model == p+q+d(b+1)", i64(model_ledger.encrypt) == cf.model_encrypt,
          "thresholds, reshuffle diagonals, level diagonals and masks");
  check("comparison.depth <= 2 lg p + 1", trace.comparison_depth <= cf.cmp_depth,
        "measured " + std::to_string(trace.comparison_depth));
  check("total.depth <= 2 lg p + lg d + 2", total.max_depth <= cf.total_depth,
        "measured " + std::to_string(total.max_depth) + ", bound " + std::to_string(cf.total_depth));
  return r;
}

inline nlohmann::json to_json(const OpCounts& c) {
  return {{"encrypt", c.encrypt},       {"rotate", c.rotate},         {"add", c.add},
          {"const_add", c.const_add},   {"mult_ct_ct", c.mult_ct_ct}, {"mult_ct_pt", c.mult_ct_pt},
          {"max_depth", c.max_depth}};
}

inline nlohmann::json to_json(const InferenceTrace& t) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < t.levels.size(); ++l) {
    auto j = to_json(t.levels[l]);
    j["depth"] = t.level_depths[l];
    levels.push_back(j);
  }
  auto cmp = to_json(t.comparison);
  cmp["depth"] = t.comparison_depth;
  auto resh = to_json(t.reshuffle);
  resh["depth"] = t.reshuffle_depth;
  auto agg = to_json(t.aggregation);
  agg["depth"] = t.result_depth;
  return {{"comparison", cmp}, {"reshuffle", resh}, {"levels", levels}, {"aggregation", agg}};
}

inline nlohmann::json to_json(const CostReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j{{"name", row.name},
                     {"measured", row.measured},
                     {"predicted", row.predicted},
                     {"delta", row.delta()}};
    if (!row.note.empty()) j["note"] = row.note;
    rows.push_back(j);
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"mode", to_string(r.mode)},
          {"meta", {{"p", r.meta.precision}, {"q", r.meta.q}, {"b", r.meta.b}, {"d", r.meta.d},
                    {"K", r.meta.K}, {"k_declared", r.meta.k_declared}}},
          {"rows", rows},
          {"checks", checks},
          {"ok", r.ok()}};
}

}  // namespace vforest
