#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lud/grammar.hpp"

namespace lud {

// Edit costs keyed by node class: a ludeme category name ("Board",
// "EndRule", ...), or "Numeric", "Identifier" and "Flag" for leaves.
struct WeightTable {
  std::map<std::string, double> indel;  // insert/delete cost by class
  double default_indel = 1.0;
  double relabel = 1.0;        // same class
  double cross_relabel = 2.0;  // different classes
  double numeric = 1.0;        // one integer changed to another

  static WeightTable defaults();  // Board and EndRule indel 2, all else 1
  static WeightTable unit();      // every cost 1

  double indel_cost(const std::string& node_class) const;
  WeightTable scaled(double k) const;
};

WeightTable weight_table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WeightTable& w);

// Class of a node for costing; ludemes unknown to the library count as
// "Modifier".
std::string node_class(const LudemeNode& n, const LudemeLibrary& library);

// Ordered tree edit distance (Zhang-Shasha) between two trees. Node labels
// are the keyword, identifier text, flag name or integer value.
double tree_edit_distance(const LudemeNode& a, const LudemeNode& b, const WeightTable& w,
                          const LudemeLibrary& library = LudemeLibrary::standard());

// Distance between the canonical forms of two descriptions.
double wed(const GameDescription& a, const GameDescription& b,
           const WeightTable& w = WeightTable::defaults(),
           const LudemeLibrary& library = LudemeLibrary::standard());

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> d;

  std::size_t size() const { return labels.size(); }
  double at(std::size_t i, std::size_t j) const { return d[i][j]; }
};

// Pairwise wed; throws DuplicateName when two games share a name.
DistanceMatrix distance_matrix(const std::vector<GameDescription>& corpus,
                               const WeightTable& w = WeightTable::defaults(), int threads = 1);

// Header row and column of names; numbers in shortest round-trip form.
std::string to_csv(const DistanceMatrix& m);
// Throws ParseError on malformed input or a matrix that is not square,
// symmetric, zero on the diagonal and finite.
DistanceMatrix matrix_from_csv(const std::string& text);

// Shortest decimal rendering that reads back to the same double.
std::string format_number(double x);

}  // namespace lud
