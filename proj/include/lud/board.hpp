#pragma once

#include <map>
#include <string>
#include <vector>

#include "lud/grammar.hpp"

namespace lud {

using Permutation = std::vector<int>;

struct Neighbor {
  int cell;
  int label;  // index into BoardGraph::labels()
};

struct Point {
  double x = 0;
  double y = 0;
};

// Cell graph of a board. Immutable after construction.
//
// Indexing: square and rectangle are row-major from the north-west corner;
// hex and diamond are row-major over axial rows (north to south, west to
// east); wheel is rim cells clockwise from 0, hub last; graph uses the
// declared vertex numbers.
class BoardGraph {
 public:
  static constexpr int kOff = -1;  // step leaves the board or is ambiguous

  const std::string& shape() const { return shape_; }
  int size() const { return static_cast<int>(adjacency_.size()); }
  const std::vector<Neighbor>& neighbors(int cell) const { return adjacency_[cell]; }
  // Unique neighbor in direction `label`, or kOff.
  int step(int cell, int label) const { return step_[cell * label_count() + label]; }

  const std::vector<std::string>& labels() const { return labels_; }
  int label_count() const { return static_cast<int>(labels_.size()); }
  int label_index(std::string_view name) const;  // -1 when absent
  // Reverse direction, or -1 when the label has no reverse.
  int opposite(int label) const { return opposite_[label]; }
  bool is_diagonal(int label) const { return diagonal_[label]; }
  bool has_directions() const { return !labels_.empty(); }

  const std::vector<Point>& layout() const { return layout_; }
  // Side regions N/E/S/W where the shape defines them.
  const std::map<std::string, std::vector<int>>& regions() const { return regions_; }

  // Automorphisms of the adjacency graph; element 0 is the identity.
  const std::vector<Permutation>& symmetries() const { return symmetries_; }
  // For symmetry k, the direction relabeling it induces, or empty when the
  // symmetry does not preserve direction labels.
  const std::vector<std::vector<int>>& label_maps() const { return label_maps_; }
  // Direction relabelings of the underlying tiling (rotations and mirror
  // images of a cell's neighbourhood), identity first. Boards without a
  // tiling use the relabelings of their automorphisms.
  const std::vector<std::vector<int>>& local_label_maps() const { return local_label_maps_; }

  std::size_t edge_count() const;

 private:
  friend BoardGraph build_board(const LudemeNode&, bool);
  friend class BoardBuilder;

  std::string shape_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> step_;
  std::vector<std::string> labels_;
  std::vector<int> opposite_;
  std::vector<bool> diagonal_;
  std::vector<Point> layout_;
  std::map<std::string, std::vector<int>> regions_;
  std::vector<Permutation> symmetries_;
  std::vector<std::vector<int>> label_maps_;
  std::vector<std::vector<int>> local_label_maps_;
};

inline constexpr int kMaxCells = 4096;
inline constexpr int kMaxExhaustiveCells = 64;

// Accepts either a shape node such as (square 3) or the equipment node
// (board (square 3) diagonals); in the latter case the flag argument is
// ignored and read from the node.
BoardGraph build_board(const LudemeNode& node, bool diagonals = false);

// All automorphisms of an undirected graph given as adjacency lists.
// Throws TooLargeForExhaustive above kMaxExhaustiveCells.
std::vector<Permutation> automorphisms(const std::vector<std::vector<int>>& adjacency);

}  // namespace lud
