// vforest: compile decision forests to packed artifacts, run simulated
// encrypted inference, check against plaintext traversal, and report costs.
//
// Exit codes: 0 ok, 1 check failure, 2 input error, 3 depth budget exceeded.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vforest/vforest.hpp"

namespace fs = std::filesystem;
using namespace vforest;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;
constexpr int kBudgetError = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

ModelMode parse_mode(const std::string& s) {
  if (s == "encrypted") return ModelMode::encrypted;
  if (s == "plaintext") return ModelMode::plaintext;
  throw InputError("unknown mode '" + s + "'");
}

nlohmann::json result_json(const CompiledModel& model, const ClassificationResult& r) {
  nlohmann::json trees = nlohmann::json::array();
  for (std::size_t t = 0; t < r.decoded.tree_labels.size(); ++t)
    trees.push_back({{"tree", t},
                     {"leaf", r.decoded.leaf_slots[t]},
                     {"label", model.labels.at(r.decoded.tree_labels[t])}});
  return {{"bitvector", to_string(r.bits)},
          {"trees", trees},
          {"plurality", model.labels.at(r.decoded.plurality)},
          {"ledger",
           {{"model", to_json(r.model_ledger)},
            {"query", to_json(r.query_ledger)},
            {"phases", to_json(r.trace)}}}};
}

// Runs `queries` seeded queries against `model` and compares with the oracle.
std::size_t check_model(const Forest& forest, const CompiledModel& model, std::size_t queries,
                        std::mt19937_64& rng, std::size_t& total) {
  const ForestProps props = compute_props(forest);
  const FixedPoint fp = model.meta.fixed_point();
  std::size_t matches = 0;
  Machine owner;
  const EncodedModel enc = encode_model(owner, model, ModelMode::encrypted);
  for (std::size_t i = 0; i < queries; ++i) {
    const auto values = random_query(rng, props, fp);
    Machine vm;
    bool ok = false;
    try {
      const auto query = encode_features(vm, values, QueryLayout::of(model.meta));
      const auto out = infer(vm, enc, query);
      ok = vm.decrypt(out.labels) == one_hot(traverse_oracle(forest, values, fp), props.num_leaves);
    } catch (const std::exception&) {
      ok = false;
    }
    matches += ok;
    ++total;
  }
  return matches;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vectorized decision-forest inference on a simulated packed-ciphertext machine"};
  app.require_subcommand(1);

  unsigned precision = 8;
  unsigned frac_bits = 0;
  std::optional<std::size_t> kdeclared;
  std::string mode_name = "encrypted";
  std::optional<unsigned> max_depth;
  std::uint64_t seed = 1;

  auto add_fp = [&](CLI::App* c) {
    c->add_option("--precision,-p", precision, "fixed-point bits")->check(CLI::Range(1u, 32u));
    c->add_option("--frac-bits", frac_bits, "fractional bits")->check(CLI::Range(0u, 32u));
  };

  // compile
  auto* compile_cmd = app.add_subcommand("compile", "stage a .forest into a .copse manifest");
  std::string forest_path, out_path;
  compile_cmd->add_option("forest", forest_path, ".forest input")->required();
  compile_cmd->add_option("-o,--out", out_path, ".copse output")->required();
  compile_cmd->add_option("--kdeclared", kdeclared, "padding bound >= max multiplicity");
  add_fp(compile_cmd);

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "classify one query against a manifest");
  std::string model_path, query_path;
  infer_cmd->add_option("model", model_path, ".copse manifest")->required();
  infer_cmd->add_option("query", query_path, "query file: 'feature <index> <value>' lines")->required();
  infer_cmd->add_option("--mode", mode_name, "encrypted | plaintext");
  infer_cmd->add_option("--kdeclared", kdeclared, "padding bound");
  infer_cmd->add_option("--max-depth", max_depth, "multiplicative depth budget");

  // check
  auto* check_cmd = app.add_subcommand("check", "compare vectorized inference with plain traversal");
  std::string check_path;
  std::optional<std::size_t> random_trials;
  std::size_t queries = 0;
  check_cmd->add_option("path", check_path, "directory, .forest or .copse file");
  check_cmd->add_option("--random", random_trials, "number of random forests");
  check_cmd->add_option("--seed", seed, "generator seed");
  check_cmd->add_option("--queries", queries, "queries per model (default 1 random, 50 files)");
  add_fp(check_cmd);
  auto* check_prec = check_cmd->get_option("--precision");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "cost report, optionally against the polynomial baseline");
  std::string bench_path;
  bool with_baseline = false;
  std::size_t reps = 27;
  bench_cmd->add_option("model", bench_path, ".forest input")->required();
  bench_cmd->add_flag("--baseline", with_baseline, "also run the per-tree polynomial baseline");
  bench_cmd->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--mode", mode_name, "encrypted | plaintext");
  bench_cmd->add_option("--kdeclared", kdeclared, "padding bound");
  bench_cmd->add_option("--seed", seed, "query seed");
  add_fp(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    const FixedPoint fp{precision, frac_bits};

    if (*compile_cmd) {
      const Forest forest = parse_forest(read_file(forest_path));
      write_file(out_path, write_manifest(compile(forest, fp, kdeclared)));
      return kOk;
    }

    if (*infer_cmd) {
      const CompiledModel model = read_manifest(read_file(model_path));
      const auto values = parse_query(read_file(query_path), model.meta.n_features);
      PartyConfig cfg{parse_mode(mode_name), kdeclared};
      const auto r = classify(model, values, cfg, max_depth);
      std::cout << result_json(cfg.k_declared ? repad(model, *cfg.k_declared) : model, r).dump(2)
                << "\n";
      return kOk;
    }

    if (*check_cmd) {
      std::mt19937_64 rng(seed);
      std::size_t matches = 0, total = 0;
      if (random_trials) {
        const std::vector<unsigned> cycle = check_prec->count() ? std::vector<unsigned>{precision}
                                                                : std::vector<unsigned>{4, 8, 16};
        for (std::size_t t = 0; t < *random_trials; ++t) {
          RandomForestSpec spec;
          spec.fp = {cycle[t % cycle.size()], 0};
          const Forest forest = random_forest(rng, spec);
          matches += check_model(forest, compile(forest, spec.fp), queries ? queries : 1, rng, total);
        }
      } else {
        if (check_path.empty()) throw InputError("check needs a path or --random N");
        std::vector<fs::path> forests;
        const fs::path p(check_path);
        if (fs::is_directory(p)) {
          for (const auto& e : fs::directory_iterator(p))
            if (e.path().extension() == ".forest") forests.push_back(e.path());
          std::sort(forests.begin(), forests.end());
        } else if (p.extension() == ".copse") {
          forests.push_back(fs::path(p).replace_extension(".forest"));
        } else {
          forests.push_back(p);
        }
        if (forests.empty()) throw InputError("no .forest files under " + check_path);
        for (const auto& fpath : forests) {
          const Forest forest = parse_forest(read_file(fpath));
          const fs::path manifest = fs::path(fpath).replace_extension(".copse");
          const CompiledModel model = fs::exists(manifest) ? read_manifest(read_file(manifest))
                                                           : compile(forest, fp, kdeclared);
          const std::size_t before = matches;
          matches += check_model(forest, model, queries ? queries : 50, rng, total);
          std::cerr << fpath.filename().string() << ": " << (matches - before) << " ok\n";
        }
      }
      std::cout << matches << "/" << total << " match\n";
      return matches == total ? kOk : kCheckFailed;
    }

    if (*bench_cmd) {
      const Forest forest = parse_forest(read_file(bench_path));
      const ModelMode mode = parse_mode(mode_name);
      const CompiledModel model = compile(forest, fp, kdeclared);
      const ForestProps props = compute_props(forest);
      std::mt19937_64 rng(seed);

      std::optional<ClassificationResult> first;
      std::optional<BaselineResult> first_base;
      bool deterministic = true, correct = true, baseline_correct = true;
      for (std::size_t i = 0; i < reps; ++i) {
        const auto values = random_query(rng, props, fp);
        const auto expect = traverse_oracle(forest, values, fp);
        auto r = classify(model, values, {mode, std::nullopt});
        correct &= r.bits == one_hot(expect, props.num_leaves);
        if (!first) first = r;
        deterministic &= r.query_ledger == first->query_ledger && r.model_ledger == first->model_ledger;
        if (with_baseline) {
          auto br = run_baseline(forest, model, values, mode);
          for (std::size_t t = 0; t < expect.size(); ++t)
            baseline_correct &= br.labels[t] == forest.leaf(expect[t]).label;
          if (!first_base) first_base = br;
          deterministic &= br.query_ledger == first_base->query_ledger;
        }
      }
      const CostReport rep = report(model.meta, mode, first->model_ledger, first->query_ledger, first->trace);
      nlohmann::json out{{"model", bench_path},
                         {"repetitions", reps},
                         {"deterministic", deterministic},
                         {"oracle_match", correct},
                         {"copse", {{"report", to_json(rep)},
                                    {"ledger", {{"model", to_json(first->model_ledger)},
                                                {"query", to_json(first->query_ledger)},
                                                {"phases", to_json(first->trace)}}}}}};
      if (with_baseline)
        out["baseline"] = {{"oracle_match", baseline_correct},
                           {"ledger", {{"model", to_json(first_base->model_ledger)},
                                       {"query", to_json(first_base->query_ledger)},
                                       {"comparison", to_json(first_base->comparison)}}},
                           {"depth", first_base->depth}};
      std::cout << out.dump(2) << "\n";
      return rep.ok() && deterministic && correct && baseline_correct ? kOk : kCheckFailed;
    }
  } catch (const DepthBudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudgetError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
