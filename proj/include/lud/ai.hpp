#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lud/engine.hpp"

namespace lud {

enum class Required : std::uint8_t { Own, Enemy, Empty, OffBoard };
enum class AnchorRole : std::uint8_t { MoveTo, MoveFrom };

std::string_view to_string(Required r);
std::string_view to_string(AnchorRole r);

struct PatternElement {
  std::vector<std::string> walk;  // direction labels from the anchor; empty = anchor
  Required required = Required::Empty;

  friend bool operator==(const PatternElement&, const PatternElement&) = default;
};

struct FeaturePattern {
  std::vector<PatternElement> elements;
  AnchorRole anchor = AnchorRole::MoveTo;
  double weight = 0.0;
  // Matches only when some element lands on the previous move's destination.
  bool reactive = false;
};

struct FeatureTable {
  std::vector<FeaturePattern> patterns;
  double temperature = 1.0;
};

nlohmann::json to_json(const FeatureTable& table);
FeatureTable feature_table_from_json(const nlohmann::json& j);

// A feature table bound to one board: every pattern is expanded into its
// images under the tiling's local symmetries and each walk is resolved to
// a per-cell target table. A pattern counts once when any image matches.
class FeatureMatcher {
 public:
  FeatureMatcher(const Game& g, const FeatureTable& table);

  double score(const GameState& s, const Move& m) const;
  // Indices of patterns matching m in s.
  void matching(const GameState& s, const Move& m, std::vector<int>& out) const;
  double temperature() const { return temperature_; }
  std::size_t size() const { return patterns_.size(); }

 private:
  struct Element {
    std::vector<int> target;  // per anchor cell; BoardGraph::kOff when off board
    Required required;
  };
  struct Image {
    std::vector<Element> elements;
  };
  struct Compiled {
    AnchorRole anchor;
    bool reactive;
    double weight;
    std::vector<Image> images;
  };
  bool matches(const Compiled& p, const GameState& s, const Move& m) const;

  std::vector<Compiled> patterns_;
  double temperature_ = 1.0;
};

// Softmax over exp(score / temperature); the empty table is uniform.
MovePolicy feature_policy(std::shared_ptr<const FeatureMatcher> matcher);

double match_features(const Game& g, const GameState& s, const Move& m,
                      const FeatureTable& table);
Move playout_policy_sample(const Game& g, const GameState& s, const FeatureTable& table,
                           Rng& rng);

struct SearchConfig {
  int iterations = 1000;
  double exploration_c = 0.7;
  std::uint64_t rng_seed = 0;
  // Null selects uniform playouts.
  std::shared_ptr<const FeatureTable> features;
};

struct SearchResult {
  Move move;
  std::vector<Move> root_moves;
  std::vector<int> root_visits;
  std::vector<double> root_values;  // mean reward for the mover
};

SearchResult search(const Game& g, const GameState& s, const SearchConfig& cfg);
Move choose_move(const Game& g, const GameState& s, const SearchConfig& cfg);

// A player for trials and matches: uniform random or UCT search.
struct Agent {
  enum class Kind { Uniform, Mcts };
  Kind kind = Kind::Uniform;
  SearchConfig cfg;

  static Agent uniform() { return {}; }
  static Agent mcts(SearchConfig cfg) { return {Kind::Mcts, std::move(cfg)}; }

  // `seed` drives this decision only; searches reseed per move.
  Move act(const Game& g, const GameState& s, std::uint64_t seed) const;
  std::string describe() const;
};

// Candidate patterns over the board's labels: single elements and pairs
// (walks of length 1 and 2, no immediate backtracking) and triples of
// adjacent cells; patterns with an Enemy element also come in reactive form.
// One per class under the tiling's local symmetries, shortest first,
// capped at `cap`.
std::vector<FeaturePattern> candidate_patterns(const Game& g, std::size_t cap = 512);

struct TrainOptions {
  std::size_t candidate_cap = 512;
  std::size_t keep = 64;
  double temperature = 1.0;
  int threads = 1;
};

// Self-play with base_cfg; after each decisive game the patterns matching
// the winner's moves gain learn_rate per match and those matching the
// loser's moves lose it. Keeps the `keep` largest |weight| patterns.
FeatureTable train_features(const Game& g, int games, const SearchConfig& base_cfg,
                            double learn_rate, const TrainOptions& options = {});

std::string explain_feature(const FeaturePattern& p,
                            const LudemeLibrary& library = LudemeLibrary::standard());

}  // namespace lud
