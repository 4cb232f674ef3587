#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "phyloabc/phylo.hpp"

using phyloabc::PhyloTree;

TEST_CASE("parses the reference 3-tip tree") {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:1):0.5,C:1.5);");
  CHECK(tree.n_tips() == 3);
  CHECK(tree.n_nodes() == 5);
  CHECK(tree.tip_labels() == std::vector<std::string>{"A", "B", "C"});
  CHECK(tree.height() == doctest::Approx(1.5));
  const auto depths = tree.depths();
  for (int tip : tree.tips()) CHECK(depths[static_cast<std::size_t>(tip)] == 1.5);
  CHECK(tree.node(tree.root()).parent == -1);
}

TEST_CASE("preorder visits parents before children, tips left to right") {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:2):0.5,(C:0.25,D:0.25):1);");
  std::vector<bool> seen(tree.n_nodes(), false);
  for (int id : tree.preorder()) {
    const int parent = tree.node(id).parent;
    if (parent >= 0) CHECK(seen[static_cast<std::size_t>(parent)]);
    seen[static_cast<std::size_t>(id)] = true;
  }
  CHECK(tree.tip_labels() == std::vector<std::string>{"A", "B", "C", "D"});
}

TEST_CASE("newick round trip preserves topology and lengths") {
  const std::string text = "((A:1,B:2.25):0.5,(C:0.125,D:0.25):1,E:3);";
  const PhyloTree tree = PhyloTree::from_newick(text);
  const PhyloTree again = PhyloTree::from_newick(tree.to_newick());
  CHECK(again.n_nodes() == tree.n_nodes());
  CHECK(again.tip_labels() == tree.tip_labels());
  for (std::size_t i = 0; i < tree.n_nodes(); ++i) {
    CHECK(again.node(static_cast<int>(i)).branch_length ==
          tree.node(static_cast<int>(i)).branch_length);
  }
}

TEST_CASE("root branch length is accepted and ignored") {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:1):0.5,C:1.5):7;");
  CHECK(tree.node(tree.root()).branch_length == 0.0);
}

TEST_CASE("tip label character set") {
  const PhyloTree tree =
      PhyloTree::from_newick("(Homo_sapiens:1,G.gorilla-x|2/3:2);");
  CHECK(tree.tip_labels() ==
        std::vector<std::string>{"Homo_sapiens", "G.gorilla-x|2/3"});
}

TEST_CASE("zero-length and multifurcating branches are legal") {
  const PhyloTree tree = PhyloTree::from_newick("((A:0,B:1,C:2):1,D:2);");
  CHECK(tree.n_tips() == 4);
  CHECK(tree.node(tree.tips()[0]).branch_length == 0.0);
}

TEST_CASE("parse errors carry a position and a reason") {
  // missing branch length on a non-root node
  CHECK_THROWS_AS(PhyloTree::from_newick("((A:1,B):0.5,C:1.5);"),
                  std::invalid_argument);
  // negative length
  CHECK_THROWS(PhyloTree::from_newick("(A:-1,B:1);"));
  // duplicate tips
  CHECK_THROWS(PhyloTree::from_newick("(A:1,A:2);"));
  // trailing garbage
  CHECK_THROWS(PhyloTree::from_newick("(A:1,B:2); extra"));
  // missing terminator
  CHECK_THROWS(PhyloTree::from_newick("(A:1,B:2)"));
  // empty tip label
  CHECK_THROWS(PhyloTree::from_newick("(:1,B:2);"));
  try {
    PhyloTree::from_newick("((A:1,B):0.5,C:1.5);");
    CHECK(false);
  } catch (const std::exception& e) {
    // message pinpoints the offset of the offending token
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("build validates structure") {
  using V = std::vector<std::string>;
  // two roots
  CHECK_THROWS(PhyloTree::build(V{"", "A", "B"}, {-1, -1, 0}, {0, 1, 1}));
  // parent cycle / unreachable node
  CHECK_THROWS(PhyloTree::build(V{"", "A", "B"}, {-1, 2, 1}, {0, 1, 1}));
  // duplicate tip labels
  CHECK_THROWS(PhyloTree::build(V{"", "A", "A"}, {-1, 0, 0}, {0, 1, 1}));
  const PhyloTree ok = PhyloTree::build(V{"", "A", "B"}, {-1, 0, 0}, {0, 1, 2});
  CHECK(ok.n_tips() == 2);
  CHECK(ok.height() == doctest::Approx(2.0));
}
