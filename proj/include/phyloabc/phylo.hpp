#pragma once

#include <string>
#include <vector>

namespace phyloabc {

struct PhyloNode {
  std::string label;
  int parent = -1;              // -1 for the root
  double branch_length = 0.0;   // length of the edge to the parent; 0 at the root
  std::vector<int> children;
};

// Rooted tree with branch lengths.  Need not be ultrametric or binary.
// Immutable after construction; node ids index into nodes().
class PhyloTree {
 public:
  // Parses a Newick string.  Every non-root node must carry a branch length
  // (no silent defaults); tip labels must be non-empty and unique.  The root
  // may carry an optional length, which is ignored for simulation.
  static PhyloTree from_newick(const std::string& text);

  // Builds from parallel arrays; parents[i] == -1 marks the root.  Validates
  // single root, acyclicity and tip label uniqueness.
  static PhyloTree build(std::vector<std::string> labels, std::vector<int> parents,
                         std::vector<double> lengths);

  std::string to_newick() const;

  int root() const { return root_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_tips() const { return tips_.size(); }
  const PhyloNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  bool is_tip(int id) const { return node(id).children.empty(); }

  // Node ids with every parent before its children; tips appear in Newick
  // left-to-right order within it.
  const std::vector<int>& preorder() const { return preorder_; }
  const std::vector<int>& tips() const { return tips_; }
  std::vector<std::string> tip_labels() const;

  // Distance from the root to each node.
  std::vector<double> depths() const;
  double height() const;

 private:
  PhyloTree() = default;
  void finalize();  // computes preorder/tips, validates

  std::vector<PhyloNode> nodes_;
  int root_ = -1;
  std::vector<int> preorder_;
  std::vector<int> tips_;
};

}  // namespace phyloabc
