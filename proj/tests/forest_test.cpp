#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "vforest/generators.hpp"
#include "vforest/manifest.hpp"
#include "vforest/staging.hpp"
#include "vforest/props.hpp"

using namespace vforest;

namespace {

ParseError parse_error_of(const std::string& text) {
  try {
    parse_forest(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a parse error for: " << text;
  return ParseError(0, 0, "none");
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Parse, ExampleForestShape) {
  const Forest f = example_forest();
  EXPECT_EQ(f.num_trees(), 1u);
  EXPECT_EQ(f.num_branches(), 5u);
  EXPECT_EQ(f.num_leaves(), 6u);
  EXPECT_EQ(f.labels.size(), 6u);
  // Preorder: d0 y>2, d1 x>3, d2 y>4, d3 x>1, d4 y>7.
  const std::uint32_t feats[] = {1, 0, 1, 0, 1};
  const double thr[] = {2, 3, 4, 1, 7};
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(f.branch(j).feature, feats[j]);
    EXPECT_EQ(f.branch(j).threshold, thr[j]);
  }
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(f.leaf(i).label, i);
}

TEST(Parse, SingleLeafTree) {
  const Forest f = parse_forest("labels A B\nleaf 1\n");
  EXPECT_EQ(f.num_branches(), 0u);
  EXPECT_EQ(f.num_leaves(), 1u);
  const auto p = compute_props(f);
  EXPECT_EQ(p.b, 0u);
  EXPECT_EQ(p.d, 0u);
  EXPECT_EQ(p.K, 0u);
  EXPECT_EQ(p.q, 0u);
}

TEST(Parse, BlankLinesAndDecimals) {
  const Forest f = parse_forest("\nlabels A B\n\nbranch 0 +2.50 leaf 0 leaf 1\n\nleaf 0\n");
  EXPECT_EQ(f.num_trees(), 2u);
  EXPECT_DOUBLE_EQ(f.branch(0).threshold, 2.5);
}

TEST(Parse, ErrorsCarryPosition) {
  auto e = parse_error_of("labels A\nbranch 0 1 leaf 0 leef 0\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.column(), 19u);

  e = parse_error_of("labels A\nleaf 3\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.column(), 6u);

  e = parse_error_of("labels A\nbranch 0 1 leaf 0\n");
  EXPECT_EQ(e.line(), 2u);

  e = parse_error_of("labels A\nleaf 0 leaf 0\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.column(), 8u);
}

TEST(Parse, RejectsMalformedInput) {
  for (const char* bad : {"", "\n\n", "labels A\n", "trees\nleaf 0\n", "labels A\nbranch x 1 leaf 0 leaf 0\n",
                          "labels A\nbranch 0 nan leaf 0 leaf 0\n", "labels A\nbranch 0 1e3 leaf 0 leaf 0\n",
                          "labels A\nbranch -1 2 leaf 0 leaf 0\n", "labels A\nleaf\n"}) {
    EXPECT_THROW(parse_forest(bad), ParseError) << bad;
  }
}

TEST(Parse, EmptyForestMessage) {
  const auto e = parse_error_of("");
  EXPECT_NE(std::string(e.what()).find("empty forest"), std::string::npos);
}

TEST(Parse, RoundTripIsStable) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const Forest f = random_forest(rng, {});
    const std::string text = print_forest(f);
    const Forest g = parse_forest(text);
    EXPECT_EQ(print_forest(g), text);
    ASSERT_EQ(g.nodes.size(), f.nodes.size());
    for (std::size_t n = 0; n < f.nodes.size(); ++n) {
      EXPECT_EQ(g.nodes[n].kind, f.nodes[n].kind);
      EXPECT_EQ(g.nodes[n].feature, f.nodes[n].feature);
      EXPECT_EQ(g.nodes[n].threshold, f.nodes[n].threshold);
      EXPECT_EQ(g.nodes[n].label, f.nodes[n].label);
    }
  }
}

TEST(Indexing, PreorderBijection) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Forest f = random_forest(rng, {});
    std::set<std::size_t> seen_b, seen_l;
    std::size_t next_b = 0, next_l = 0;
    for (NodeId r : f.roots) {
      // Explicit preorder walk per tree, trees in declaration order.
      std::vector<NodeId> stack{r};
      while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        const Node& n = f.node(id);
        if (n.is_branch()) {
          EXPECT_EQ(n.index, next_b++);
          seen_b.insert(n.index);
          stack.push_back(n.right);
          stack.push_back(n.left);
        } else {
          EXPECT_EQ(n.index, next_l++);
          seen_l.insert(n.index);
        }
      }
    }
    EXPECT_EQ(seen_b.size(), f.num_branches());
    EXPECT_EQ(seen_l.size(), f.num_leaves());
  }
}

TEST(Props, ExampleForest) {
  const auto p = compute_props(example_forest());
  EXPECT_EQ(p.b, 5u);
  EXPECT_EQ(p.d, 3u);
  EXPECT_EQ(p.n_features, 2u);
  EXPECT_EQ(p.kappa, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(p.K, 3u);
  EXPECT_EQ(p.q, 6u);
  EXPECT_EQ(p.level_of, (std::vector<std::size_t>{3, 2, 1, 1, 1}));
  EXPECT_EQ(p.width, (std::vector<std::size_t>{6, 4, 2, 2, 2}));
  EXPECT_EQ(p.downstream[1].begin, 0u);
  EXPECT_EQ(p.downstream[1].end, 4u);
  EXPECT_EQ(p.true_side[0].begin, 4u);
  EXPECT_EQ(p.true_side[0].end, 6u);
}

TEST(Props, AgreeWithRecursiveDefinitions) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Forest f = random_forest(rng, {});
    const auto p = compute_props(f);
    std::size_t d = 0;
    for (std::size_t j = 0; j < p.b; ++j) {
      const NodeId id = f.branches[j];
      EXPECT_EQ(p.level_of[j], oracle::level(f, id));
      d = std::max(d, p.level_of[j]);
      // Width equals the size of the downstream range, and the range holds
      // exactly the leaves having this branch as an ancestor.
      EXPECT_EQ(p.width[j], p.downstream[j].size());
      for (std::size_t l = 0; l < f.num_leaves(); ++l) {
        const auto anc = oracle::ancestors(f, f.leaves[l]);
        const bool below = std::find(anc.begin(), anc.end(), id) != anc.end();
        EXPECT_EQ(p.downstream[j].contains(l), below);
      }
    }
    EXPECT_EQ(p.d, d);
    std::vector<std::size_t> kappa(p.n_features, 0);
    for (std::size_t j = 0; j < p.b; ++j) ++kappa[f.branch(j).feature];
    EXPECT_EQ(p.kappa, kappa);
    EXPECT_EQ(p.q, p.K * p.n_features);
  }
}

// The files under models/ are the generator's output, checked in for the CLI.
TEST(Models, ShippedFilesMatchGenerators) {
  const std::filesystem::path dir = VFOREST_MODELS_DIR;
  EXPECT_EQ(read_file(dir / "example.forest"), print_forest(example_forest()));
  EXPECT_EQ(read_file(dir / "example.copse"), write_manifest(compile(example_forest(), {8, 0})));
  EXPECT_EQ(read_file(dir / "wide64.forest"), print_forest(wide_model()));
  EXPECT_EQ(read_file(dir / "wide64.copse"), write_manifest(compile(wide_model(), {8, 0})));
  for (const auto& spec : micro_model_specs()) {
    const Forest f = micro_model(spec);
    EXPECT_EQ(read_file(dir / (spec.name + ".forest")), print_forest(f)) << spec.name;
    EXPECT_EQ(read_file(dir / (spec.name + ".copse")), write_manifest(compile(f, {spec.precision, 0})))
        << spec.name;
  }
}

TEST(Models, WideModelShape) {
  const auto p = compute_props(wide_model());
  EXPECT_GE(p.b, 64u);
  EXPECT_EQ(p.d, 6u);
}

TEST(Models, MicroModelShapes) {
  for (const auto& spec : micro_model_specs()) {
    const Forest f = micro_model(spec);
    const auto p = compute_props(f);
    EXPECT_EQ(p.d, spec.depth) << spec.name;
    EXPECT_EQ(f.num_trees(), spec.tree_branches.size());
    for (std::size_t t = 0; t < f.num_trees(); ++t)
      EXPECT_EQ(f.tree_branches[t].size(), spec.tree_branches[t]) << spec.name;
  }
}
