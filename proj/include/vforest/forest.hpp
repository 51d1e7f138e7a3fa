#pragma once

// Decision-forest IR: a node pool laid out in preorder, with branches and
// leaves separately indexed across the whole forest.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vforest {

using NodeId = std::uint32_t;

struct Node {
  enum class Kind : std::uint8_t { branch, leaf };

  Kind kind = Kind::leaf;
  std::uint32_t feature = 0;  // branch only
  double threshold = 0.0;     // branch only
  NodeId left = 0;            // branch only
  NodeId right = 0;           // branch only
  NodeId parent = 0;          // meaningless for roots
  bool has_parent = false;
  std::uint32_t label = 0;    // leaf only
  std::uint32_t index = 0;    // preorder branch index or leaf index

  bool is_branch() const { return kind == Kind::branch; }
  bool is_leaf() const { return kind == Kind::leaf; }
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(format(line, column, what)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(std::size_t line, std::size_t column, const std::string& what) {
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << what;
    return os.str();
  }
  std::size_t line_;
  std::size_t column_;
};

// Immutable once built; copies are cheap enough for the model sizes we stage.
struct Forest {
  std::vector<std::string> labels;
  std::vector<Node> nodes;           // preorder, tree after tree
  std::vector<NodeId> roots;         // one per tree
  std::vector<NodeId> branches;      // branch index -> node id
  std::vector<NodeId> leaves;        // leaf index -> node id
  std::vector<IndexRange> tree_branches;  // per-tree span of branch indices
  std::vector<IndexRange> tree_leaves;    // per-tree span of leaf indices

  std::size_t num_trees() const { return roots.size(); }
  std::size_t num_branches() const { return branches.size(); }
  std::size_t num_leaves() const { return leaves.size(); }

  const Node& node(NodeId id) const { return nodes.at(id); }
  const Node& branch(std::size_t branch_index) const { return nodes.at(branches.at(branch_index)); }
  const Node& leaf(std::size_t leaf_index) const { return nodes.at(leaves.at(leaf_index)); }
};

/// Incrementally assembles a Forest from a prefix-order stream of nodes,
/// the same order the text format uses. Every tree opened with begin_tree()
/// must be completed (each branch receives exactly two subtrees) before
/// end_tree().
class ForestBuilder {
 public:
  explicit ForestBuilder(std::vector<std::string> labels) {
    forest_.labels = std::move(labels);
  }

  void begin_tree() {
    if (in_tree_) throw std::logic_error("begin_tree called inside an open tree");
    in_tree_ = true;
    root_pending_ = true;
    tree_branch_begin_ = forest_.branches.size();
    tree_leaf_begin_ = forest_.leaves.size();
  }

  void branch(std::uint32_t feature, double threshold) {
    Node n;
    n.kind = Node::Kind::branch;
    n.feature = feature;
    n.threshold = threshold;
    n.index = static_cast<std::uint32_t>(forest_.branches.size());
    const NodeId id = attach(n);
    forest_.branches.push_back(id);
    // Right slot is pushed first so the left subtree is filled next.
    open_.push_back({id, false});
    open_.push_back({id, true});
  }

  void leaf(std::uint32_t label) {
    if (label >= forest_.labels.size()) throw std::out_of_range("label index out of range");
    Node n;
    n.kind = Node::Kind::leaf;
    n.label = label;
    n.index = static_cast<std::uint32_t>(forest_.leaves.size());
    const NodeId id = attach(n);
    forest_.leaves.push_back(id);
  }

  // Number of subtrees still owed to the open tree.
  std::size_t pending() const { return open_.size() + (root_pending_ ? 1 : 0); }

  void end_tree() {
    if (!in_tree_) throw std::logic_error("end_tree without begin_tree");
    if (pending() != 0) throw std::logic_error("tree is incomplete");
    forest_.tree_branches.push_back({tree_branch_begin_, forest_.branches.size()});
    forest_.tree_leaves.push_back({tree_leaf_begin_, forest_.leaves.size()});
    in_tree_ = false;
  }

  Forest finish() && {
    if (in_tree_) throw std::logic_error("finish called with an open tree");
    if (forest_.roots.empty()) throw std::invalid_argument("empty forest");
    return std::move(forest_);
  }

 private:
  struct Slot {
    NodeId parent;
    bool is_left;
  };

  NodeId attach(Node n) {
    if (!in_tree_) throw std::logic_error("node emitted outside of a tree");
    const auto id = static_cast<NodeId>(forest_.nodes.size());
    if (root_pending_) {
      root_pending_ = false;
      forest_.roots.push_back(id);
    } else {
      if (open_.empty()) throw std::logic_error("tree already complete");
      const Slot s = open_.back();
      open_.pop_back();
      n.parent = s.parent;
      n.has_parent = true;
      Node& p = forest_.nodes[s.parent];
      (s.is_left ? p.left : p.right) = id;
    }
    forest_.nodes.push_back(n);
    return id;
  }

  Forest forest_;
  std::vector<Slot> open_;
  bool in_tree_ = false;
  bool root_pending_ = false;
  std::size_t tree_branch_begin_ = 0;
  std::size_t tree_leaf_begin_ = 0;
};

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

inline bool parse_uint(std::string_view s, std::uint32_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_decimal(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  if (*b == '+') ++b;  // from_chars rejects a leading '+'
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), out, std::chars_format::fixed);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

inline std::string format_decimal(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc()) throw std::runtime_error("cannot format threshold");
  return std::string(buf, p);
}

}  // namespace detail

/// Parses the `.forest` text format:
///
///     labels <name>+
///     <tree>            one line per tree, prefix form:
///                       branch <feature> <threshold> <left> <right> | leaf <label>
///
/// Blank lines are ignored. Throws ParseError with a 1-based line/column.
inline Forest parse_forest(std::string_view text) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) {
        lines.push_back(text.substr(start));
        break;
      }
      lines.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }

  std::size_t lineno = 0;
  std::vector<detail::Token> header;
  for (; lineno < lines.size(); ++lineno) {
    header = detail::tokenize(lines[lineno]);
    if (!header.empty()) break;
  }
  if (header.empty()) throw ParseError(lineno + 1, 1, "empty forest: missing labels line");
  if (header[0].text != "labels")
    throw ParseError(lineno + 1, header[0].column, "expected 'labels'");
  if (header.size() < 2)
    throw ParseError(lineno + 1, header[0].column + 6, "labels line declares no labels");

  std::vector<std::string> labels;
  for (std::size_t i = 1; i < header.size(); ++i) labels.emplace_back(header[i].text);
  ForestBuilder builder(std::move(labels));
  const std::size_t num_labels = header.size() - 1;
  std::size_t trees = 0;

  for (++lineno; lineno < lines.size(); ++lineno) {
    const auto toks = detail::tokenize(lines[lineno]);
    if (toks.empty()) continue;
    const std::size_t ln = lineno + 1;
    builder.begin_tree();
    std::size_t i = 0;
    auto need = [&](const char* what) -> const detail::Token& {
      if (i >= toks.size()) {
        const auto& last = toks.back();
        throw ParseError(ln, last.column + last.text.size(), std::string("expected ") + what);
      }
      return toks[i++];
    };
    while (builder.pending() > 0) {
      const auto& kw = need("'branch' or 'leaf'");
      if (kw.text == "branch") {
        const auto& ft = need("feature index");
        std::uint32_t feature = 0;
        if (!detail::parse_uint(ft.text, feature))
          throw ParseError(ln, ft.column, "invalid feature index '" + std::string(ft.text) + "'");
        const auto& tt = need("threshold");
        double threshold = 0;
        if (!detail::parse_decimal(tt.text, threshold))
          throw ParseError(ln, tt.column, "invalid threshold '" + std::string(tt.text) + "'");
        builder.branch(feature, threshold);
      } else if (kw.text == "leaf") {
        const auto& lt = need("label index");
        std::uint32_t label = 0;
        if (!detail::parse_uint(lt.text, label))
          throw ParseError(ln, lt.column, "invalid label index '" + std::string(lt.text) + "'");
        if (label >= num_labels)
          throw ParseError(ln, lt.column, "label index " + std::to_string(label) + " out of range");
        builder.leaf(label);
      } else {
        throw ParseError(ln, kw.column, "unexpected token '" + std::string(kw.text) + "'");
      }
    }
    if (i != toks.size())
      throw ParseError(ln, toks[i].column, "trailing tokens after complete tree");
    builder.end_tree();
    ++trees;
  }
  if (trees == 0) throw ParseError(lineno, 1, "empty forest: no trees");
  return std::move(builder).finish();
}

inline std::string print_tree(const Forest& f, NodeId root) {
  std::string out;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const Node& n = f.node(stack.back());
    stack.pop_back();
    if (!out.empty()) out.push_back(' ');
    if (n.is_branch()) {
      out += "branch " + std::to_string(n.feature) + ' ' + detail::format_decimal(n.threshold);
      stack.push_back(n.right);
      stack.push_back(n.left);
    } else {
      out += "leaf " + std::to_string(n.label);
    }
  }
  return out;
}

/// Canonical text form: single spaces, one tree per line, trailing newline.
inline std::string print_forest(const Forest& f) {
  std::string out = "labels";
  for (const auto& l : f.labels) out += ' ' + l;
  out.push_back('\n');
  for (NodeId r : f.roots) {
    out += print_tree(f, r);
    out.push_back('\n');
  }
  return out;
}

}  // namespace vforest
