#include "lud/ai.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "lud/parallel.hpp"

namespace lud {

std::string_view to_string(Required r) {
  switch (r) {
    case Required::Own: return "Own";
    case Required::Enemy: return "Enemy";
    case Required::Empty: return "Empty";
    case Required::OffBoard: return "OffBoard";
  }
  return "Unknown";
}

std::string_view to_string(AnchorRole r) { return r == AnchorRole::MoveTo ? "MoveTo" : "MoveFrom"; }

namespace {

Required required_from(const std::string& s) {
  if (s == "Own") return Required::Own;
  if (s == "Enemy") return Required::Enemy;
  if (s == "Empty") return Required::Empty;
  if (s == "OffBoard") return Required::OffBoard;
  throw Error(ErrorCode::ParseError, "unknown pattern content '" + s + "'");
}

bool uses_keyword(const LudemeNode& n, std::string_view kw) {
  if (n.is_ludeme() && n.text == kw) return true;
  return std::any_of(n.args.begin(), n.args.end(),
                     [&](const LudemeNode& a) { return uses_keyword(a, kw); });
}

// Walk images of a pattern under every label-preserving symmetry, as label
// index sequences (-1 for labels unknown to the board).
using IndexedElement = std::pair<std::vector<int>, Required>;
using IndexedPattern = std::vector<IndexedElement>;

IndexedPattern index_pattern(const BoardGraph& b, const FeaturePattern& p) {
  IndexedPattern out;
  for (const auto& e : p.elements) {
    std::vector<int> walk;
    for (const auto& l : e.walk) walk.push_back(b.label_index(l));
    out.emplace_back(std::move(walk), e.required);
  }
  return out;
}

std::vector<IndexedPattern> pattern_images(const BoardGraph& b, const IndexedPattern& p) {
  std::set<IndexedPattern> seen;
  std::vector<IndexedPattern> images;
  for (const auto& map : b.local_label_maps()) {
    IndexedPattern img = p;
    for (auto& [walk, req] : img) {
      for (int& l : walk) {
        if (l >= 0 && !map.empty()) l = map[l];
      }
    }
    IndexedPattern key = img;
    std::sort(key.begin(), key.end());
    if (seen.insert(key).second) images.push_back(std::move(img));
  }
  if (images.empty()) images.push_back(p);
  return images;
}

int walk_target(const BoardGraph& b, int cell, const std::vector<int>& walk) {
  int cur = cell;
  for (int l : walk) {
    if (l < 0) return BoardGraph::kOff;
    cur = b.step(cur, l);
    if (cur == BoardGraph::kOff) return cur;
  }
  return cur;
}

}  // namespace

nlohmann::json to_json(const FeatureTable& table) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : table.patterns) {
    nlohmann::json walks = nlohmann::json::array();
    nlohmann::json required = nlohmann::json::array();
    for (const auto& e : p.elements) {
      walks.push_back(e.walk);
      required.push_back(std::string(to_string(e.required)));
    }
    patterns.push_back({{"walks", walks},
                        {"required", required},
                        {"weight", p.weight},
                        {"anchor", std::string(to_string(p.anchor))},
                        {"reactive", p.reactive}});
  }
  return {{"patterns", patterns}, {"temperature", table.temperature}};
}

FeatureTable feature_table_from_json(const nlohmann::json& j) {
  FeatureTable t;
  try {
    t.temperature = j.value("temperature", 1.0);
    for (const auto& p : j.at("patterns")) {
      FeaturePattern fp;
      const auto& walks = p.at("walks");
      const auto& required = p.at("required");
      if (walks.size() != required.size()) {
        throw Error(ErrorCode::ParseError, "walks and required differ in length");
      }
      for (std::size_t i = 0; i < walks.size(); ++i) {
        fp.elements.push_back({walks[i].get<std::vector<std::string>>(),
                               required_from(required[i].get<std::string>())});
      }
      fp.weight = p.value("weight", 0.0);
      fp.reactive = p.value("reactive", false);
      fp.anchor = p.value("anchor", std::string("MoveTo")) == "MoveFrom" ? AnchorRole::MoveFrom
                                                                         : AnchorRole::MoveTo;
      t.patterns.push_back(std::move(fp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("feature table: ") + e.what());
  }
  if (!(t.temperature > 0) || !std::isfinite(t.temperature)) {
    throw Error(ErrorCode::ParseError, "feature table temperature must be > 0");
  }
  for (const auto& p : t.patterns) {
    if (!std::isfinite(p.weight)) throw Error(ErrorCode::ParseError, "non-finite weight");
  }
  return t;
}

FeatureMatcher::FeatureMatcher(const Game& g, const FeatureTable& table)
    : temperature_(table.temperature) {
  const BoardGraph& b = g.board();
  for (const auto& p : table.patterns) {
    Compiled c;
    c.anchor = p.anchor;
    c.reactive = p.reactive;
    c.weight = p.weight;
    for (const auto& img : pattern_images(b, index_pattern(b, p))) {
      Image image;
      for (const auto& [walk, req] : img) {
        Element e;
        e.required = req;
        e.target.resize(b.size());
        for (int cell = 0; cell < b.size(); ++cell) e.target[cell] = walk_target(b, cell, walk);
        image.elements.push_back(std::move(e));
      }
      c.images.push_back(std::move(image));
    }
    patterns_.push_back(std::move(c));
  }
}

bool FeatureMatcher::matches(const Compiled& p, const GameState& s, const Move& m) const {
  const int anchor = p.anchor == AnchorRole::MoveTo ? m.to : m.from;
  if (anchor < 0) return false;
  const int mover = s.mover();
  for (const auto& img : p.images) {
    bool all = true;
    bool touches_last = !p.reactive;
    for (const auto& e : img.elements) {
      const int t = e.target[anchor];
      if (t != BoardGraph::kOff && t == s.last_to()) touches_last = true;
      bool ok;
      if (t == BoardGraph::kOff) {
        ok = e.required == Required::OffBoard;
      } else {
        const Occupant& o = s.at(t);
        switch (e.required) {
          case Required::Empty: ok = o.empty(); break;
          case Required::Own: ok = o.player == mover; break;
          case Required::Enemy: ok = !o.empty() && o.player != mover; break;
          default: ok = false; break;
        }
      }
      if (!ok) {
        all = false;
        break;
      }
    }
    if (all && touches_last) return true;
  }
  return false;
}

double FeatureMatcher::score(const GameState& s, const Move& m) const {
  double total = 0;
  for (const auto& p : patterns_) {
    if (p.weight != 0 && matches(p, s, m)) total += p.weight;
  }
  return total;
}

void FeatureMatcher::matching(const GameState& s, const Move& m, std::vector<int>& out) const {
  out.clear();
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (matches(patterns_[i], s, m)) out.push_back(static_cast<int>(i));
  }
}

namespace {

std::size_t softmax_sample(const FeatureMatcher& matcher, const GameState& s,
                           const std::vector<Move>& moves, Rng& rng,
                           std::vector<double>& weights) {
  weights.resize(moves.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < moves.size(); ++i) {
    weights[i] = matcher.score(s, moves[i]) / matcher.temperature();
    best = std::max(best, weights[i]);
  }
  double total = 0;
  for (auto& w : weights) {
    w = std::exp(w - best);
    total += w;
  }
  double x = rng.uniform() * total;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    x -= weights[i];
    if (x < 0) return i;
  }
  return moves.size() - 1;
}

}  // namespace

MovePolicy feature_policy(std::shared_ptr<const FeatureMatcher> matcher) {
  if (!matcher || matcher->size() == 0) return uniform_policy();
  return [matcher, weights = std::vector<double>()](const Game&, const GameState& s,
                                                     const std::vector<Move>& moves,
                                                     Rng& rng) mutable {
    return softmax_sample(*matcher, s, moves, rng, weights);
  };
}

double match_features(const Game& g, const GameState& s, const Move& m,
                      const FeatureTable& table) {
  return FeatureMatcher(g, table).score(s, m);
}

Move playout_policy_sample(const Game& g, const GameState& s, const FeatureTable& table,
                           Rng& rng) {
  std::vector<Move> moves;
  g.generate_moves(s, s.mover(), moves);
  if (g.status(s, moves).terminal()) {
    throw Error(ErrorCode::CalledOnTerminal, "sampling a move in a finished game");
  }
  if (table.patterns.empty()) return moves[rng.below(moves.size())];
  FeatureMatcher matcher(g, table);
  std::vector<double> weights;
  return moves[softmax_sample(matcher, s, moves, rng, weights)];
}

// ---------------------------------------------------------------------------
// UCT

namespace {

struct Node {
  Move move;
  int player = 0;  // who made `move`
  int parent = -1;
  std::vector<int> children;
  std::vector<Move> moves;  // legal moves, filled on first visit
  bool visited = false;
  Outcome outcome;
  int visits = 0;
  double value = 0;  // summed reward for `player`
};

double reward(const Outcome& o, int player) {
  if (o.status == Outcome::Status::Draw) return 0.5;
  return o.winner == player ? 1.0 : 0.0;
}

}  // namespace

SearchResult search(const Game& g, const GameState& root_state, const SearchConfig& cfg) {
  std::vector<Node> tree(1);
  tree[0].player = opponent(root_state.mover());
  {
    g.generate_moves(root_state, root_state.mover(), tree[0].moves);
    tree[0].outcome = g.status(root_state, tree[0].moves);
    tree[0].visited = true;
    if (tree[0].outcome.terminal()) {
      throw Error(ErrorCode::CalledOnTerminal, "search on a finished game");
    }
  }
  Rng rng(cfg.rng_seed);
  std::shared_ptr<const FeatureMatcher> matcher;
  if (cfg.features && !cfg.features->patterns.empty()) {
    matcher = std::make_shared<FeatureMatcher>(g, *cfg.features);
  }
  const MovePolicy policy = feature_policy(matcher);
  const int iterations = std::max(1, cfg.iterations);
  std::vector<int> path;
  std::vector<Move> moves;

  for (int it = 0; it < iterations; ++it) {
    GameState s = root_state;
    int node = 0;
    path.assign(1, 0);
    Outcome outcome;
    while (true) {
      Node& n = tree[node];
      if (!n.visited) {
        g.generate_moves(s, s.mover(), n.moves);
        n.outcome = g.status(s, n.moves);
        n.visited = true;
      }
      if (n.outcome.terminal()) {
        outcome = n.outcome;
        break;
      }
      if (n.children.size() < n.moves.size()) {
        const Move m = n.moves[n.children.size()];
        Node child;
        child.move = m;
        child.player = s.mover();
        child.parent = node;
        const int id = static_cast<int>(tree.size());
        tree[node].children.push_back(id);
        tree.push_back(std::move(child));
        g.apply_in_place(s, m);
        node = id;
        path.push_back(node);
        Node& c = tree[node];
        g.generate_moves(s, s.mover(), c.moves);
        c.outcome = g.status(s, c.moves);
        c.visited = true;
        if (c.outcome.terminal()) {
          outcome = c.outcome;
        } else {
          // Playout from the new leaf.
          while (true) {
            moves.clear();
            g.generate_moves(s, s.mover(), moves);
            const Outcome o = g.status(s, moves);
            if (o.terminal()) {
              outcome = o;
              break;
            }
            g.apply_in_place(s, moves[policy(g, s, moves, rng)]);
          }
        }
        break;
      }
      // Selection.
      const double log_n = std::log(static_cast<double>(n.visits));
      int best = -1;
      double best_value = -1;
      for (int c : n.children) {
        const Node& ch = tree[c];
        const double v = ch.value / ch.visits + cfg.exploration_c * std::sqrt(log_n / ch.visits);
        if (v > best_value) {
          best_value = v;
          best = c;
        }
      }
      g.apply_in_place(s, tree[best].move);
      node = best;
      path.push_back(node);
    }
    for (int id : path) {
      Node& n = tree[id];
      ++n.visits;
      n.value += reward(outcome, n.player);
    }
  }

  SearchResult result;
  const Node& root = tree[0];
  int best = -1;
  for (int c : root.children) {
    const Node& ch = tree[c];
    result.root_moves.push_back(ch.move);
    result.root_visits.push_back(ch.visits);
    result.root_values.push_back(ch.visits ? ch.value / ch.visits : 0.0);
    if (best < 0 || ch.visits > tree[best].visits) best = c;
  }
  result.move = tree[best].move;
  return result;
}

Move choose_move(const Game& g, const GameState& s, const SearchConfig& cfg) {
  return search(g, s, cfg).move;
}

Move Agent::act(const Game& g, const GameState& s, std::uint64_t seed) const {
  if (kind == Kind::Mcts) {
    SearchConfig c = cfg;
    c.rng_seed = derive_seed(cfg.rng_seed, seed);
    return choose_move(g, s, c);
  }
  std::vector<Move> moves;
  g.generate_moves(s, s.mover(), moves);
  if (moves.empty()) throw Error(ErrorCode::CalledOnTerminal, "no legal moves");
  Rng rng(seed);
  return moves[rng.below(moves.size())];
}

std::string Agent::describe() const {
  if (kind == Kind::Uniform) return "uniform";
  std::string out = "mcts(" + std::to_string(cfg.iterations);
  if (cfg.features) out += ",features";
  return out + ")";
}

// ---------------------------------------------------------------------------
// Training

std::vector<FeaturePattern> candidate_patterns(const Game& g, std::size_t cap) {
  const BoardGraph& b = g.board();
  const int L = b.label_count();
  std::vector<std::vector<int>> walks;
  for (int l = 0; l < L; ++l) walks.push_back({l});
  // Two-step walks that always land where a single step would (E then SW
  // on a hex grid is SE) add nothing.
  auto shortcut = [&](int l1, int l2) {
    for (int l = 0; l < L; ++l) {
      bool same = true;
      bool any = false;
      for (int c = 0; c < b.size() && same; ++c) {
        const int t = walk_target(b, c, {l1, l2});
        if (t == BoardGraph::kOff) continue;
        any = true;
        same = t == b.step(c, l);
      }
      if (same && any) return true;
    }
    return false;
  };
  for (int l1 = 0; l1 < L; ++l1) {
    for (int l2 = 0; l2 < L; ++l2) {
      if (b.opposite(l1) == l2 || shortcut(l1, l2)) continue;
      walks.push_back({l1, l2});
    }
  }
  const Required contents[] = {Required::Own, Required::Enemy, Required::Empty,
                               Required::OffBoard};
  std::vector<IndexedElement> singles;
  for (const auto& w : walks) {
    for (Required r : contents) singles.emplace_back(w, r);
  }
  // Composite patterns: pairs of any singles, and triples of singles at
  // adjacent cells, ordered by total walk length then element count.
  struct Combo {
    std::size_t length;
    std::vector<std::size_t> parts;
  };
  std::vector<Combo> combos;
  for (std::size_t i = 0; i < singles.size(); ++i) {
    for (std::size_t j = i + 1; j < singles.size(); ++j) {
      if (singles[i].first == singles[j].first) continue;
      combos.push_back({singles[i].first.size() + singles[j].first.size(), {i, j}});
      if (singles[i].first.size() != 1 || singles[j].first.size() != 1) continue;
      for (std::size_t k = j + 1; k < singles.size(); ++k) {
        if (singles[k].first.size() != 1 || singles[k].first == singles[j].first) continue;
        combos.push_back({3, {i, j, k}});
      }
    }
  }
  std::stable_sort(combos.begin(), combos.end(), [](const Combo& a, const Combo& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.parts.size() > b.parts.size();
  });

  std::vector<AnchorRole> anchors{AnchorRole::MoveTo};
  if (uses_keyword(g.description().root(), "step")) anchors.push_back(AnchorRole::MoveFrom);
  const std::size_t per_anchor = cap / anchors.size();

  std::vector<FeaturePattern> out;
  for (AnchorRole anchor : anchors) {
    std::set<IndexedPattern> classes;
    std::size_t taken = 0;
    auto consider = [&](IndexedPattern p) {
      if (taken >= per_anchor) return;
      IndexedPattern key;
      bool first = true;
      for (auto img : pattern_images(b, p)) {
        std::sort(img.begin(), img.end());
        if (first || img < key) key = img;
        first = false;
      }
      if (!classes.insert(key).second) return;
      FeaturePattern fp;
      fp.anchor = anchor;
      for (const auto& [walk, req] : p) {
        PatternElement e;
        for (int l : walk) e.walk.push_back(b.labels()[l]);
        e.required = req;
        fp.elements.push_back(std::move(e));
      }
      const bool has_enemy = std::any_of(fp.elements.begin(), fp.elements.end(),
                                         [](const PatternElement& e) {
                                           return e.required == Required::Enemy;
                                         });
      out.push_back(fp);
      ++taken;
      if (has_enemy && taken < per_anchor) {
        fp.reactive = true;
        out.push_back(std::move(fp));
        ++taken;
      }
    };
    for (const auto& s : singles) consider({s});
    for (const auto& c : combos) {
      if (taken >= per_anchor) break;
      IndexedPattern p;
      for (std::size_t part : c.parts) p.push_back(singles[part]);
      consider(std::move(p));
    }
  }
  return out;
}

FeatureTable train_features(const Game& g, int games, const SearchConfig& base_cfg,
                            double learn_rate, const TrainOptions& options) {
  if (games < 1) throw Error(ErrorCode::InvalidArgument, "games must be >= 1");
  FeatureTable candidates;
  candidates.patterns = candidate_patterns(g, options.candidate_cap);
  candidates.temperature = options.temperature;
  const FeatureMatcher matcher(g, candidates);
  const std::size_t P = candidates.patterns.size();

  // Integer match counts per game keep the result independent of the thread
  // count and of summation order.
  std::vector<std::vector<int>> deltas(games);
  parallel_for(static_cast<std::size_t>(games), options.threads, [&](std::size_t i) {
    const std::uint64_t game_seed = derive_seed(base_cfg.rng_seed, i);
    const Agent agent = Agent::mcts(base_cfg);
    GameState s = g.initial_state();
    std::vector<std::pair<GameState, Move>> record;
    std::vector<Move> moves;
    Outcome o;
    for (int ply = 0;; ++ply) {
      moves.clear();
      g.generate_moves(s, s.mover(), moves);
      o = g.status(s, moves);
      if (o.terminal()) break;
      const Move m = agent.act(g, s, derive_seed(game_seed, static_cast<std::uint64_t>(ply)));
      record.emplace_back(s, m);
      g.apply_in_place(s, m);
    }
    std::vector<int>& d = deltas[i];
    d.assign(P, 0);
    if (o.status != Outcome::Status::Win) return;
    std::vector<int> hits;
    std::vector<char> by_winner(P, 0), by_loser(P, 0);
    for (const auto& [state, m] : record) {
      matcher.matching(state, m, hits);
      for (int h : hits) (m.player == o.winner ? by_winner : by_loser)[h] = 1;
    }
    for (std::size_t p = 0; p < P; ++p) d[p] = by_winner[p] - by_loser[p];
  });
  std::vector<long long> totals(P, 0);
  for (const auto& d : deltas) {
    for (std::size_t p = 0; p < P; ++p) totals[p] += d[p];
  }
  std::vector<std::size_t> order(P);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::llabs(totals[x]) > std::llabs(totals[y]);
  });
  FeatureTable table;
  table.temperature = options.temperature;
  for (std::size_t k = 0; k < std::min(options.keep, P); ++k) {
    FeaturePattern p = candidates.patterns[order[k]];
    p.weight = learn_rate * static_cast<double>(totals[order[k]]);
    table.patterns.push_back(std::move(p));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Explanations

namespace {

std::string content_phrase(Required r, const LudemeLibrary& library) {
  // Contents map onto the condition ludemes where the library has them.
  auto named = [&](const char* kw, const char* fallback) {
    return library.find(kw) ? std::string(kw) : std::string(fallback);
  };
  switch (r) {
    case Required::Own: return named("Own", "own") + " piece";
    case Required::Enemy: return named("Enemy", "enemy") + " piece";
    case Required::Empty: return named("Empty", "empty") + " cell";
    case Required::OffBoard: return "board edge";
  }
  return "?";
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string explain_feature(const FeaturePattern& p, const LudemeLibrary& library) {
  std::string out = p.anchor == AnchorRole::MoveTo ? "move onto a cell with: "
                                                   : "move away from a cell with: ";
  std::vector<std::string> parts;
  for (const auto& e : p.elements) {
    const std::string what = content_phrase(e.required, library);
    if (e.walk.empty()) {
      parts.push_back(what + " on the cell itself");
    } else if (e.walk.size() == 1) {
      parts.push_back(what + " adjacent " + e.walk[0]);
    } else {
      parts.push_back(what + " adjacent to the " + e.walk[0] + " neighbour, path " +
                      join(e.walk, "-"));
    }
  }
  out += join(parts, "; ");
  if (p.reactive) out += ", one of them the opponent's last move";
  if (p.weight != 0) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " [weight %+.3f]", p.weight);
    out += buf;
  }
  return out;
}

}  // namespace lud
