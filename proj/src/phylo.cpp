#include "phyloabc/phylo.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace phyloabc {

namespace {

struct NewickCursor {
  const std::string& text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("newick parse error at position " +
                                std::to_string(pos) + ": " + msg);
  }
  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  char peek() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    return text[pos];
  }
  bool done() {
    skip_ws();
    return pos >= text.size();
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }
};

bool is_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-' || c == '|' || c == '/';
}

std::string parse_label(NewickCursor& cur) {
  cur.skip_ws();
  std::size_t start = cur.pos;
  while (cur.pos < cur.text.size() && is_label_char(cur.text[cur.pos])) ++cur.pos;
  return cur.text.substr(start, cur.pos - start);
}

double parse_length(NewickCursor& cur) {
  cur.expect(':');
  cur.skip_ws();
  const char* begin = cur.text.data() + cur.pos;
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) cur.fail("expected a branch length after ':'");
  cur.pos += static_cast<std::size_t>(end - begin);
  if (!std::isfinite(v)) cur.fail("branch length must be finite");
  if (v < 0.0) cur.fail("branch length must be non-negative");
  return v;
}

// returns the id of the subtree root it parsed
int parse_subtree(NewickCursor& cur, std::vector<PhyloNode>& nodes, int parent) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  nodes.back().parent = parent;
  if (cur.peek() == '(') {
    ++cur.pos;
    while (true) {
      const int child = parse_subtree(cur, nodes, id);
      nodes[static_cast<std::size_t>(id)].children.push_back(child);
      const char c = cur.peek();
      if (c == ',') {
        ++cur.pos;
        continue;
      }
      if (c == ')') {
        ++cur.pos;
        break;
      }
      cur.fail("expected ',' or ')'");
    }
    nodes[static_cast<std::size_t>(id)].label = parse_label(cur);  // optional
  } else {
    const std::string label = parse_label(cur);
    if (label.empty()) cur.fail("expected a tip label");
    nodes[static_cast<std::size_t>(id)].label = label;
  }
  cur.skip_ws();
  const bool has_length = cur.pos < cur.text.size() && cur.text[cur.pos] == ':';
  if (parent < 0) {
    // root length is optional and unused
    if (has_length) parse_length(cur);
  } else {
    if (!has_length) cur.fail("missing branch length for node '" +
                              nodes[static_cast<std::size_t>(id)].label + "'");
    nodes[static_cast<std::size_t>(id)].branch_length = parse_length(cur);
  }
  return id;
}

void write_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void write_newick(const PhyloTree& tree, int id, std::string& out) {
  const PhyloNode& nd = tree.node(id);
  if (!nd.children.empty()) {
    out.push_back('(');
    for (std::size_t i = 0; i < nd.children.size(); ++i) {
      if (i) out.push_back(',');
      write_newick(tree, nd.children[i], out);
    }
    out.push_back(')');
  }
  out += nd.label;
  if (nd.parent >= 0) {
    out.push_back(':');
    write_double(out, nd.branch_length);
  }
}

}  // namespace

PhyloTree PhyloTree::from_newick(const std::string& text) {
  NewickCursor cur{text};
  if (cur.done()) throw std::invalid_argument("newick parse error: empty input");
  PhyloTree tree;
  tree.root_ = parse_subtree(cur, tree.nodes_, -1);
  cur.skip_ws();
  if (cur.pos >= text.size() || text[cur.pos] != ';') cur.fail("expected ';'");
  ++cur.pos;
  if (!cur.done()) cur.fail("trailing characters after ';'");
  tree.finalize();
  return tree;
}

PhyloTree PhyloTree::build(std::vector<std::string> labels, std::vector<int> parents,
                           std::vector<double> lengths) {
  if (labels.size() != parents.size() || labels.size() != lengths.size())
    throw std::invalid_argument("tree build: array sizes differ");
  if (labels.empty()) throw std::invalid_argument("tree build: no nodes");
  PhyloTree tree;
  tree.nodes_.resize(labels.size());
  tree.root_ = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    PhyloNode& nd = tree.nodes_[i];
    nd.label = std::move(labels[i]);
    nd.parent = parents[i];
    nd.branch_length = lengths[i];
    if (!(lengths[i] >= 0.0) || !std::isfinite(lengths[i]))
      throw std::invalid_argument("tree build: branch lengths must be non-negative and finite");
    if (nd.parent < 0) {
      if (tree.root_ >= 0) throw std::invalid_argument("tree build: multiple roots");
      tree.root_ = static_cast<int>(i);
    } else if (static_cast<std::size_t>(nd.parent) >= labels.size()) {
      throw std::invalid_argument("tree build: parent id out of range");
    }
  }
  if (tree.root_ < 0) throw std::invalid_argument("tree build: no root");
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    if (static_cast<int>(i) != tree.root_)
      tree.nodes_[static_cast<std::size_t>(tree.nodes_[i].parent)].children.push_back(
          static_cast<int>(i));
  }
  tree.finalize();
  return tree;
}

void PhyloTree::finalize() {
  preorder_.clear();
  tips_.clear();
  preorder_.reserve(nodes_.size());
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    preorder_.push_back(id);
    const auto& ch = nodes_[static_cast<std::size_t>(id)].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  if (preorder_.size() != nodes_.size())
    throw std::invalid_argument("tree is not connected (unreachable nodes)");
  std::set<std::string> seen;
  for (int id : preorder_) {
    if (!is_tip(id)) continue;
    tips_.push_back(id);
    const std::string& label = nodes_[static_cast<std::size_t>(id)].label;
    if (label.empty()) throw std::invalid_argument("tip with empty label");
    if (!seen.insert(label).second)
      throw std::invalid_argument("duplicate tip label '" + label + "'");
  }
}

std::string PhyloTree::to_newick() const {
  std::string out;
  write_newick(*this, root_, out);
  out.push_back(';');
  return out;
}

std::vector<std::string> PhyloTree::tip_labels() const {
  std::vector<std::string> out;
  out.reserve(tips_.size());
  for (int id : tips_) out.push_back(node(id).label);
  return out;
}

std::vector<double> PhyloTree::depths() const {
  std::vector<double> d(nodes_.size(), 0.0);
  for (int id : preorder_) {
    const PhyloNode& nd = node(id);
    if (nd.parent >= 0)
      d[static_cast<std::size_t>(id)] =
          d[static_cast<std::size_t>(nd.parent)] + nd.branch_length;
  }
  return d;
}

double PhyloTree::height() const {
  double h = 0.0;
  for (double d : depths()) h = std::max(h, d);
  return h;
}

}  // namespace phyloabc
