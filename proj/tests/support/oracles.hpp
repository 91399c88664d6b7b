#pragma once
// Independent reference implementations used to check the library. None of
// them call into the code they check beyond reading plain data.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Tic-Tac-Toe on its own 9-cell array; X moves first.
struct TttCounts {
  std::size_t positions = 0;         // reachable positions, terminal included
  std::size_t games = 0;             // complete move sequences
  std::size_t x_wins = 0;
  std::size_t o_wins = 0;
  std::size_t draws = 0;
  double p_x = 0, p_o = 0, p_draw = 0;  // outcome probabilities under uniform random play
  double mean_plies = 0;                // expected plies under uniform random play
  int value = 0;                        // minimax value for X: 1, 0, -1
};
TttCounts tic_tac_toe();

// Minimax value for the side to move of a Tic-Tac-Toe board ('.', 'X', 'O'
// in row-major order), and the moves achieving it.
struct TttSolve {
  int value = 0;
  std::vector<int> best_moves;
};
TttSolve solve_ttt(const std::string& board);

// Generic EBNF checker over the grammar text format emitted by the library:
// `<name> ::= alt | alt`, with [x] optional, {x} repetition, `(` and `)`
// terminals, <int> and <ident> token classes. Lines starting `//` are
// comments.
class Ebnf {
 public:
  explicit Ebnf(const std::string& text);
  // True when the whole token sequence of `sexpr` derives from `start`.
  bool accepts(const std::string& start, const std::string& sexpr) const;
  std::size_t production_count() const { return rules_.size(); }
  bool has(const std::string& name) const { return rules_.count(name) > 0; }
  // Right-hand side as written.
  const std::string& rhs(const std::string& name) const { return raw_.at(name); }

 private:
  struct Item;
  using Seq = std::vector<Item>;
  struct Item {
    enum Kind { Terminal, NonTerminal, Optional, Repeat, Group } kind;
    std::string text;
    std::vector<Seq> alts;
  };
  std::vector<Seq> parse_alts(const std::vector<std::string>& toks, std::size_t& i) const;
  std::set<std::size_t> match_seq(const Seq& s, std::size_t k, const std::vector<std::string>& in,
                                  std::size_t pos, int depth) const;
  std::set<std::size_t> match_item(const Item& it, const std::vector<std::string>& in,
                                   std::size_t pos, int depth) const;
  std::set<std::size_t> match_alts(const std::vector<Seq>& alts, const std::vector<std::string>& in,
                                   std::size_t pos, int depth) const;
  std::map<std::string, std::vector<Seq>> rules_;
  std::map<std::string, std::string> raw_;
};

// Ordered labelled tree for the edit-distance oracle.
struct Tree {
  std::string label;
  std::string cls;  // cost class
  bool numeric = false;
  std::vector<Tree> kids;
};

struct Costs {
  std::map<std::string, double> indel;
  double default_indel = 1;
  double relabel = 1;
  double cross = 2;
  double numeric = 1;
  double indel_of(const std::string& cls) const {
    auto it = indel.find(cls);
    return it == indel.end() ? default_indel : it->second;
  }
};

// Minimum over all edit mappings (one-to-one, preserving ancestry and
// sibling order) of relabel costs of mapped pairs plus indel costs of the
// rest. Exponential; for trees of at most about 10 nodes.
double edit_distance_by_mappings(const Tree& a, const Tree& b, const Costs& c);

// Unrooted tree as an edge list over nodes 0..n-1; leaves are 0..leaves-1.
struct Topology {
  int leaves = 0;
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> lengths;
};
// Random unrooted binary tree with leaves 0..n-1 and lengths in [lo, hi].
Topology random_topology(int n, std::mt19937_64& rng, double lo = 0.1, double hi = 2.0);
// Leaf-to-leaf path lengths.
std::vector<std::vector<double>> path_matrix(const Topology& t);
// Non-trivial splits as the side not containing leaf 0.
std::set<std::set<int>> topology_splits(const Topology& t);

// Minimum number of state changes over all 0/1 labelings of the internal
// nodes; also the set of states each internal node takes in some optimum.
struct FitchOracle {
  int cost = 0;
  std::vector<std::set<int>> states;  // per node
};
FitchOracle fitch_exhaustive(const Topology& t, const std::vector<int>& leaf_states);

}  // namespace oracle
