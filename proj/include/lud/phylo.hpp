#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lud/distance.hpp"

namespace lud {

// Unrooted tree. Leaves carry names; internal nodes have empty names.
struct PhyloTree {
  struct Edge {
    int to;
    double length;
  };
  std::vector<std::string> names;
  std::vector<std::vector<Edge>> adj;
  std::vector<std::string> warnings;

  int add_node(std::string name = {});
  void connect(int a, int b, double length);
  void disconnect(int a, int b);
  std::size_t node_count() const { return names.size(); }
  bool is_leaf(int v) const { return adj[v].size() <= 1; }
  std::vector<int> leaves() const;
  std::optional<int> find_leaf(const std::string& name) const;
  double edge_length(int a, int b) const;
};

// Neighbor joining with the Q criterion. Ties go to the pair whose
// smallest leaf names sort first. Negative branch lengths are clamped to 0
// and reported in warnings. Throws TooFewTaxa below 3 taxa.
PhyloTree neighbor_joining(const DistanceMatrix& m);

// Each split is the side of an internal edge that excludes the
// lexicographically smallest leaf name. Trivial splits are omitted.
std::set<std::set<std::string>> splits(const PhyloTree& t);

// Distance between two nodes along the tree.
double path_length(const PhyloTree& t, int a, int b);

// Newick rendering rooted at `root` (default: the last internal node, which
// for neighbor_joining is the final three-way joint). Child order follows
// the smallest leaf name in each subtree.
std::string to_newick(const PhyloTree& t, std::optional<int> root = std::nullopt);
// Parses names, nested parentheses and optional `:length`; a root of
// degree 2 is suppressed so the result is unrooted.
PhyloTree tree_from_newick(const std::string& text);

// Root position on an edge (a, b): the root sits `offset` from a.
struct RootEdge {
  int a;
  int b;
  double offset = 0;
};

// Midpoint of the longest leaf-to-leaf path; ties take the pair of leaf
// names that sorts first.
RootEdge midpoint_root(const PhyloTree& t);

enum class TraitState { Absent = 0, Present = 1 };

struct FitchResult {
  int cost = 0;
  RootEdge root{};
  // Per tree node (same indices as the tree): states appearing in some
  // most parsimonious assignment. The root node itself is `root_states`.
  std::vector<std::set<TraitState>> states;
  std::set<TraitState> root_states;
};

// Fitch parsimony on the tree rooted at `root` (midpoint by default).
// Throws MissingLeafTrait when a leaf has no entry in `traits`.
FitchResult fitch_ancestral(const PhyloTree& t, const std::map<std::string, bool>& traits,
                            std::optional<RootEdge> root = std::nullopt);

struct InfluenceEdge {
  std::string from;
  std::string to;
  double weight;
};

struct InfluenceNetwork {
  std::vector<std::string> nodes;
  std::map<std::string, int> dates;
  std::vector<InfluenceEdge> edges;
};

// Edge a -> b when date(a) < date(b) and d(a, b) < threshold, weighted
// 1 - d/threshold. Throws MissingDate when a matrix label has no date.
InfluenceNetwork influence_network(const DistanceMatrix& m, const std::map<std::string, int>& dates,
                                   double threshold);

std::string to_dot(const InfluenceNetwork& net);

}  // namespace lud
