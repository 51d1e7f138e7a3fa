#pragma once

// `.copse` model manifest: a JSON document holding the staged artifacts.
//
//   {
//     "format": "copse-manifest", "version": 1,
//     "meta": {"precision", "frac_bits", "b", "d", "K", "k_declared", "q",
//              "n_features", "num_leaves", "num_trees", "comparison", "sentinel"},
//     "labels": [name, ...],
//     "codebook": [label index per leaf slot],
//     "tree_leaves": [[begin, end), ...],
//     "thresholds": [plane bit string, MSB plane first],
//     "reshuffle": {"rows", "cols", "diagonals": [bit string, ...]},
//     "levels": [{"level", "rows", "cols", "diagonals": [...], "mask": bit string}, ...]
//   }
//
// Bit strings are '0'/'1' characters, slot 0 first. Object keys are written
// sorted, so identical models serialize to identical bytes.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "vforest/staging.hpp"

namespace vforest {

inline constexpr const char* kManifestFormat = "copse-manifest";
inline constexpr int kManifestVersion = 1;

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json diag_to_json(const DiagMatrix& m) {
  nlohmann::json diags = nlohmann::json::array();
  for (const auto& d : m.diagonals) diags.push_back(to_string(d));
  return {{"rows", m.rows}, {"cols", m.cols}, {"diagonals", diags}};
}

inline DiagMatrix diag_from_json(const nlohmann::json& j) {
  DiagMatrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  for (const auto& d : j.at("diagonals")) m.diagonals.push_back(bits_from_string(d.get<std::string>()));
  m.validate();
  return m;
}

}  // namespace detail

inline std::string write_manifest(const CompiledModel& m) {
  nlohmann::json planes = nlohmann::json::array();
  for (const auto& p : m.thresholds.planes) planes.push_back(to_string(p));
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < m.level_mats.size(); ++l) {
    auto j = detail::diag_to_json(m.level_mats[l]);
    j["level"] = l + 1;
    j["mask"] = to_string(m.level_masks[l]);
    levels.push_back(j);
  }
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& r : m.tree_leaves) ranges.push_back({r.begin, r.end});

  const auto& mt = m.meta;
  nlohmann::json doc{
      {"format", kManifestFormat},
      {"version", kManifestVersion},
      {"meta",
       {{"precision", mt.precision},
        {"frac_bits", mt.frac_bits},
        {"b", mt.b},
        {"d", mt.d},
        {"K", mt.K},
        {"k_declared", mt.k_declared},
        {"q", mt.q},
        {"n_features", mt.n_features},
        {"num_leaves", mt.num_leaves},
        {"num_trees", mt.num_trees},
        {"comparison", kComparison},
        {"sentinel", kSentinel}}},
      {"labels", m.labels},
      {"codebook", m.codebook},
      {"tree_leaves", ranges},
      {"thresholds", planes},
      {"reshuffle", detail::diag_to_json(m.reshuf)},
      {"levels", levels},
  };
  return doc.dump(1) + "\n";
}

/// Parses and dimension-checks a manifest.
inline CompiledModel read_manifest(std::string_view text) {
  CompiledModel m;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format") != kManifestFormat) throw ManifestError("not a copse manifest");
    if (doc.at("version") != kManifestVersion) throw ManifestError("unsupported manifest version");
    const auto& mj = doc.at("meta");
    if (mj.at("comparison") != kComparison)
      throw ManifestError("unsupported comparison convention");
    auto& mt = m.meta;
    mt.precision = mj.at("precision").get<unsigned>();
    mt.frac_bits = mj.at("frac_bits").get<unsigned>();
    mt.b = mj.at("b").get<std::size_t>();
    mt.d = mj.at("d").get<std::size_t>();
    mt.K = mj.at("K").get<std::size_t>();
    mt.k_declared = mj.at("k_declared").get<std::size_t>();
    mt.q = mj.at("q").get<std::size_t>();
    mt.n_features = mj.at("n_features").get<std::size_t>();
    mt.num_leaves = mj.at("num_leaves").get<std::size_t>();
    mt.num_trees = mj.at("num_trees").get<std::size_t>();
    mt.fixed_point().validate();

    m.labels = doc.at("labels").get<std::vector<std::string>>();
    m.codebook = doc.at("codebook").get<std::vector<std::uint32_t>>();
    for (const auto& r : doc.at("tree_leaves"))
      m.tree_leaves.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
    m.thresholds.precision = mt.precision;
    for (const auto& p : doc.at("thresholds"))
      m.thresholds.planes.push_back(bits_from_string(p.get<std::string>()));
    m.reshuf = detail::diag_from_json(doc.at("reshuffle"));
    for (const auto& lj : doc.at("levels")) {
      m.level_mats.push_back(detail::diag_from_json(lj));
      m.level_masks.push_back(bits_from_string(lj.at("mask").get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }

  const auto& mt = m.meta;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ManifestError(std::string("inconsistent manifest: ") + what);
  };
  require(mt.q == mt.n_features * mt.k_declared, "q != n_features * k_declared");
  require(mt.k_declared >= mt.K, "k_declared < K");
  require(m.codebook.size() == mt.num_leaves, "codebook size");
  require(m.tree_leaves.size() == mt.num_trees, "tree count");
  for (auto l : m.codebook) require(l < m.labels.size(), "codebook label out of range");
  std::size_t next = 0;
  for (const auto& r : m.tree_leaves) {
    require(r.begin == next && r.end > r.begin, "tree leaf ranges must tile the leaf slots");
    next = r.end;
  }
  require(next == mt.num_leaves, "tree leaf ranges must tile the leaf slots");
  if (mt.b > 0) {
    require(m.thresholds.planes.size() == mt.precision, "threshold plane count");
    for (const auto& p : m.thresholds.planes) require(p.size() == mt.q, "threshold plane length");
    require(m.reshuf.rows == mt.b && m.reshuf.cols == mt.q, "reshuffle dimensions");
  }
  require(m.level_mats.size() == mt.d, "level count");
  for (std::size_t l = 0; l < mt.d; ++l) {
    require(m.level_mats[l].rows == mt.num_leaves && m.level_mats[l].cols == mt.b,
            "level matrix dimensions");
    require(m.level_masks[l].size() == mt.num_leaves, "level mask length");
  }
  return m;
}

}  // namespace vforest
