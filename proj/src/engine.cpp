#include "lud/engine.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace lud {

std::string to_string(const Outcome& outcome) {
  switch (outcome.status) {
    case Outcome::Status::Ongoing: return "Ongoing";
    case Outcome::Status::Win: return "Win(" + std::to_string(outcome.winner) + ")";
    case Outcome::Status::Draw: return outcome.capped ? "Draw(cap)" : "Draw";
  }
  return "Unknown";
}

enum class Content : std::uint8_t { Any, Empty, Own, Enemy };

struct RegionSpec {
  std::vector<char> mask;
  Content filter = Content::Any;
};

struct Condition {
  enum class Kind { True, AdjacentFrom, AdjacentTo, Line, Connect, NoMoves, FullBoard, MoveLimit };
  Kind kind = Kind::True;
  Content content = Content::Any;
  std::vector<std::vector<int>> segments;
  RegionSpec a;
  RegionSpec b;
  int limit = 0;
};

enum class Who { All, Mover, Prev, P1, P2 };

struct AddRule {
  int type = 0;
  RegionSpec where;
};

struct StepRule {
  int type = 0;
  RegionSpec to;
  Condition cond;
};

struct EndRule {
  enum class Kind { Win, Lose, Draw };
  Kind kind = Kind::Win;
  Who who = Who::All;
  Condition cond;
};

struct Placement {
  int type = 0;
  int player = 1;
  std::vector<int> cells;
};

struct CompiledRules {
  GameDescription description;
  BoardGraph board;
  std::vector<std::string> types;
  std::vector<int> hand;  // initial per-type count per player, -1 = unlimited
  std::vector<Placement> placements;
  std::vector<AddRule> adds;
  std::vector<StepRule> steps;
  std::vector<int> capture_labels;
  std::vector<EndRule> ends;
  int move_cap = 0;
  std::vector<Permutation> position_symmetries;
};

Game::~Game() = default;

namespace {

constexpr std::uint64_t kCellSalt = 0x5851F42D4C957F2DULL;
constexpr std::uint64_t kMoverKey = 0xD6E8FEB86659FD93ULL;
constexpr std::uint64_t kHandSalt = 0xA0761D6478BD642FULL;

std::uint64_t cell_key(int cell, const Occupant& o) {
  if (o.empty()) return 0;
  return mix64(kCellSalt ^ (static_cast<std::uint64_t>(cell) << 16) ^
               (static_cast<std::uint64_t>(o.player) << 8) ^ o.type);
}

std::uint64_t hand_key(std::size_t slot, int count) {
  return mix64(kHandSalt + slot * 0x10001ULL + static_cast<std::uint64_t>(count + 1));
}

bool content_ok(const Occupant& o, int player, Content c) {
  switch (c) {
    case Content::Any: return true;
    case Content::Empty: return o.empty();
    case Content::Own: return o.player == player;
    case Content::Enemy: return !o.empty() && o.player != player;
  }
  return false;
}

[[noreturn]] void unsupported(const std::string& what, const LudemeNode& node) {
  throw Error(ErrorCode::UnsupportedLudemeCombination, what, node.span);
}

Content content_of(const LudemeNode& node) {
  if (node.text == "Empty") return Content::Empty;
  if (node.text == "Own") return Content::Own;
  if (node.text == "Enemy") return Content::Enemy;
  unsupported("'" + node.text + "' is not a cell content", node);
}

class Compiler {
 public:
  Compiler(const GameDescription& gd, CompiledRules& out) : gd_(gd), out_(out) {}

  void run(const CompileOptions& options) {
    out_.description = gd_;
    const LudemeNode& equipment = gd_.equipment();
    out_.board = build_board(*equipment.child("board"));
    out_.move_cap = options.move_cap_factor * out_.board.size();

    std::map<std::string, int> counts;
    for (const LudemeNode* p : equipment.children("piece")) {
      const std::string& type = p->args.at(0).text;
      const int count = p->args.size() > 1 ? static_cast<int>(p->args[1].value) : 0;
      if (!counts.emplace(type, count).second) {
        throw Error(ErrorCode::DuplicateName, "piece type '" + type + "' declared twice", p->span);
      }
    }
    if (counts.empty()) counts.emplace("Piece", 0);
    for (const auto& [type, count] : counts) {
      out_.types.push_back(type);
      out_.hand.push_back(count > 0 ? count : -1);
    }

    const LudemeNode* rules = gd_.rules();
    if (!rules) {
      throw Error(ErrorCode::UnsupportedLudemeCombination,
                  "description '" + gd_.name() + "' has no rules");
    }
    if (const LudemeNode* start = rules->child("start")) {
      for (const auto& item : start->args) {
        if (item.text != "place") continue;
        Placement pl;
        pl.type = type_index(item.args.at(0), false);
        pl.player = item.args.at(1).text == "P1" ? 1 : 2;
        for (std::size_t i = 2; i < item.args.size(); ++i) {
          const auto v = item.args[i].value;
          if (v < 0 || v >= out_.board.size()) {
            throw Error(ErrorCode::InvalidArgument,
                        "placement cell " + std::to_string(v) + " is off the board", item.span);
          }
          pl.cells.push_back(static_cast<int>(v));
        }
        out_.placements.push_back(std::move(pl));
      }
    }
    for (const auto& item : rules->child("play")->args) {
      if (item.text == "add") {
        AddRule r;
        r.type = type_index(item.args.at(0), true);
        r.where = region(item.args.at(1));
        out_.adds.push_back(std::move(r));
      } else if (item.text == "step") {
        StepRule r;
        r.type = type_index(item.args.at(0), true);
        r.to = region(item.args.at(1));
        if (item.args.size() > 2) r.cond = condition(item.args[2], true);
        out_.steps.push_back(std::move(r));
      } else if (item.text == "custodialCapture") {
        if (!out_.board.has_directions()) {
          unsupported("custodial capture needs direction labels", item);
        }
        const std::string dirs = item.args.empty() ? "Any" : item.args[0].text;
        out_.capture_labels = labels_for(dirs);
      }
    }
    for (const auto& item : rules->child("end")->args) {
      EndRule r;
      if (item.text == "draw") {
        r.kind = EndRule::Kind::Draw;
        r.cond = condition(item.args.at(0), false);
      } else {
        r.kind = item.text == "win" ? EndRule::Kind::Win : EndRule::Kind::Lose;
        r.who = who(item.args.at(0).text);
        r.cond = condition(item.args.at(1), false);
      }
      out_.ends.push_back(std::move(r));
    }

    const auto& syms = out_.board.symmetries();
    for (std::size_t k = 0; k < syms.size(); ++k) {
      if (!out_.board.has_directions() || !out_.board.label_maps()[k].empty()) {
        out_.position_symmetries.push_back(syms[k]);
      }
    }
  }

 private:
  int type_index(const LudemeNode& node, bool allow_own) {
    const LudemeNode& name = node.is_ludeme() && node.text == "piece" ? node.args.at(0) : node;
    if (allow_own && name.text == "Own") return 0;
    for (std::size_t i = 0; i < out_.types.size(); ++i) {
      if (out_.types[i] == name.text) return static_cast<int>(i);
    }
    unsupported("undeclared piece type '" + name.text + "'", node);
  }

  std::vector<int> labels_for(const std::string& dirs) const {
    std::vector<int> out;
    for (int l = 0; l < out_.board.label_count(); ++l) {
      const bool diag = out_.board.is_diagonal(l);
      if (dirs == "Any" || (dirs == "Orthogonal" && !diag) || (dirs == "Diagonal" && diag)) {
        out.push_back(l);
      }
    }
    return out;
  }

  RegionSpec region(const LudemeNode& node) {
    RegionSpec r;
    const int n = out_.board.size();
    if (node.text == "board") {
      r.mask.assign(n, 1);
      r.filter = content_of(node.args.at(0));
    } else if (node.text == "side") {
      const auto& regions = out_.board.regions();
      auto it = regions.find(node.args.at(0).text);
      if (it == regions.end()) {
        unsupported(out_.board.shape() + " board has no side " + node.args.at(0).text, node);
      }
      r.mask.assign(n, 0);
      for (int c : it->second) r.mask[c] = 1;
    } else if (node.text == "cells") {
      r.mask.assign(n, 0);
      for (const auto& a : node.args) {
        if (a.value < 0 || a.value >= n) {
          throw Error(ErrorCode::InvalidArgument,
                      "cell " + std::to_string(a.value) + " is off the board", node.span);
        }
        r.mask[a.value] = 1;
      }
    } else {
      unsupported("'" + node.text + "' is not a region", node);
    }
    return r;
  }

  Condition condition(const LudemeNode& node, bool in_step) {
    Condition c;
    const std::string& kw = node.text;
    if (kw == "True") {
      if (!in_step) unsupported("True is only valid as a step condition", node);
      c.kind = Condition::Kind::True;
    } else if (kw == "adjacent") {
      if (!in_step) unsupported("adjacent is only valid as a step condition", node);
      c.kind = node.args.at(0).text == "From" ? Condition::Kind::AdjacentFrom
                                              : Condition::Kind::AdjacentTo;
      c.content = content_of(node.args.at(1));
    } else if (in_step) {
      unsupported("'" + kw + "' is not a step condition", node);
    } else if (kw == "line") {
      if (!out_.board.has_directions()) {
        unsupported("line needs a board with direction labels", node);
      }
      c.kind = Condition::Kind::Line;
      const int k = static_cast<int>(node.args.at(0).value);
      c.content = content_of(node.args.at(1));
      const std::string dirs = node.args.size() > 2 ? node.args[2].text : "Any";
      std::set<std::vector<int>> seen;
      const BoardGraph& b = out_.board;
      for (int cell = 0; cell < b.size(); ++cell) {
        for (int l : labels_for(dirs)) {
          std::vector<int> seg{cell};
          int cur = cell;
          for (int i = 1; i < k && cur != BoardGraph::kOff; ++i) {
            cur = b.step(cur, l);
            if (cur != BoardGraph::kOff) seg.push_back(cur);
          }
          if (static_cast<int>(seg.size()) != k) continue;
          std::vector<int> key = seg;
          std::sort(key.begin(), key.end());
          if (std::adjacent_find(key.begin(), key.end()) != key.end()) continue;
          if (seen.insert(key).second) c.segments.push_back(seg);
        }
      }
    } else if (kw == "connect") {
      c.kind = Condition::Kind::Connect;
      c.a = region(node.args.at(0));
      c.b = region(node.args.at(1));
    } else if (kw == "noMoves") {
      c.kind = Condition::Kind::NoMoves;
    } else if (kw == "fullBoard") {
      c.kind = Condition::Kind::FullBoard;
    } else if (kw == "moveLimit") {
      c.kind = Condition::Kind::MoveLimit;
      c.limit = static_cast<int>(node.args.at(0).value);
    } else {
      unsupported("'" + kw + "' is not an end condition", node);
    }
    return c;
  }

  static Who who(const std::string& text) {
    if (text == "Mover") return Who::Mover;
    if (text == "Prev") return Who::Prev;
    if (text == "P1") return Who::P1;
    if (text == "P2") return Who::P2;
    return Who::All;
  }

  const GameDescription& gd_;
  CompiledRules& out_;
};

std::uint64_t full_hash(const std::vector<Occupant>& cells, int mover,
                        const std::vector<int>& hand) {
  std::uint64_t h = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) h ^= cell_key(static_cast<int>(c), cells[c]);
  if (mover == 2) h ^= kMoverKey;
  for (std::size_t i = 0; i < hand.size(); ++i) h ^= hand_key(i, hand[i]);
  return h;
}

bool region_ok(const RegionSpec& r, const Occupant& o, int cell, int player) {
  return r.mask[cell] && content_ok(o, player, r.filter);
}

}  // namespace

Game compile(const GameDescription& gd, const CompileOptions& options) {
  auto rules = std::make_shared<CompiledRules>();
  Compiler(gd, *rules).run(options);
  Game g;
  g.rules_ = std::move(rules);
  return g;
}

const std::string& Game::name() const { return rules_->description.name(); }
const GameDescription& Game::description() const { return rules_->description; }
const BoardGraph& Game::board() const { return rules_->board; }
const std::vector<std::string>& Game::piece_types() const { return rules_->types; }
int Game::move_cap() const { return rules_->move_cap; }
const std::vector<Permutation>& Game::position_symmetries() const {
  return rules_->position_symmetries;
}

GameState Game::initial_state() const {
  const CompiledRules& r = *rules_;
  GameState s;
  s.cells_.assign(r.board.size(), Occupant{});
  s.types_ = static_cast<int>(r.types.size());
  s.hand_.clear();
  for (int p = 0; p < 2; ++p) s.hand_.insert(s.hand_.end(), r.hand.begin(), r.hand.end());
  for (const auto& pl : r.placements) {
    for (int c : pl.cells) {
      if (!s.cells_[c].empty()) {
        throw Error(ErrorCode::PlacementConflict, "cell " + std::to_string(c) + " placed twice");
      }
      s.cells_[c] = Occupant{static_cast<std::uint8_t>(pl.player),
                             static_cast<std::uint8_t>(pl.type)};
    }
  }
  s.mover_ = 1;
  s.move_count_ = 0;
  s.hash_ = full_hash(s.cells_, s.mover_, s.hand_);
  return s;
}

void Game::generate_moves(const GameState& s, int player, std::vector<Move>& out) const {
  const CompiledRules& r = *rules_;
  const std::size_t first = out.size();
  const int n = r.board.size();
  for (const auto& add : r.adds) {
    if (s.in_hand(player, add.type) == 0) continue;
    for (int c = 0; c < n; ++c) {
      const Occupant& o = s.cells_[c];
      if (o.empty() && region_ok(add.where, o, c, player)) {
        out.push_back({Move::Kind::Add, -1, c, player});
      }
    }
  }
  for (const auto& step : r.steps) {
    for (int from = 0; from < n; ++from) {
      const Occupant& o = s.cells_[from];
      if (o.player != player || o.type != step.type) continue;
      int prev = -1;
      for (const auto& nb : r.board.neighbors(from)) {
        const int to = nb.cell;
        if (to == prev) continue;
        prev = to;
        const Occupant& t = s.cells_[to];
        if (!t.empty() || !region_ok(step.to, t, to, player)) continue;
        bool ok = true;
        switch (step.cond.kind) {
          case Condition::Kind::True:
            break;
          case Condition::Kind::AdjacentFrom:
          case Condition::Kind::AdjacentTo: {
            const int anchor = step.cond.kind == Condition::Kind::AdjacentFrom ? from : to;
            ok = false;
            for (const auto& adj : r.board.neighbors(anchor)) {
              if (content_ok(s.cells_[adj.cell], player, step.cond.content)) {
                ok = true;
                break;
              }
            }
            break;
          }
          default:
            break;
        }
        if (ok) out.push_back({Move::Kind::Step, from, to, player});
      }
    }
  }
  if (out.size() - first > 1) {
    std::sort(out.begin() + first, out.end());
    out.erase(std::unique(out.begin() + first, out.end()), out.end());
  }
}

bool Game::has_legal_move(const GameState& s, int player) const {
  std::vector<Move> moves;
  generate_moves(s, player, moves);
  return !moves.empty();
}

std::vector<Move> Game::legal_moves(const GameState& s) const {
  std::vector<Move> moves;
  generate_moves(s, s.mover_, moves);
  if (status(s, moves).terminal()) {
    throw Error(ErrorCode::CalledOnTerminal, "legal_moves on a finished game");
  }
  return moves;
}

void Game::apply_in_place(GameState& s, const Move& m) const {
  const CompiledRules& r = *rules_;
  const int player = s.mover_;
  auto set_cell = [&](int c, Occupant o) {
    s.hash_ ^= cell_key(c, s.cells_[c]);
    s.cells_[c] = o;
    s.hash_ ^= cell_key(c, o);
  };
  if (m.kind == Move::Kind::Add) {
    int type = 0;
    for (const auto& add : r.adds) {
      if (s.in_hand(player, add.type) != 0 && region_ok(add.where, s.cells_[m.to], m.to, player)) {
        type = add.type;
        break;
      }
    }
    const std::size_t slot = static_cast<std::size_t>((player - 1) * s.types_ + type);
    if (s.hand_[slot] > 0) {
      s.hash_ ^= hand_key(slot, s.hand_[slot]);
      --s.hand_[slot];
      s.hash_ ^= hand_key(slot, s.hand_[slot]);
    }
    set_cell(m.to, Occupant{static_cast<std::uint8_t>(player), static_cast<std::uint8_t>(type)});
  } else {
    const Occupant moving = s.cells_[m.from];
    set_cell(m.from, Occupant{});
    set_cell(m.to, moving);
  }
  for (int l : r.capture_labels) {
    const int a = r.board.step(m.to, l);
    if (a == BoardGraph::kOff) continue;
    const Occupant& victim = s.cells_[a];
    if (victim.empty() || victim.player == player) continue;
    const int b = r.board.step(a, l);
    if (b == BoardGraph::kOff || s.cells_[b].player != player) continue;
    set_cell(a, Occupant{});
  }
  s.hash_ ^= s.mover_ == 2 ? kMoverKey : 0;
  s.mover_ = opponent(s.mover_);
  s.hash_ ^= s.mover_ == 2 ? kMoverKey : 0;
  ++s.move_count_;
  s.last_to_ = m.to;
}

GameState Game::apply(const GameState& s, const Move& m) const {
  std::vector<Move> moves;
  generate_moves(s, s.mover_, moves);
  if (status(s, moves).terminal()) {
    throw Error(ErrorCode::CalledOnTerminal, "apply on a finished game");
  }
  if (m.player != s.mover_ || !std::binary_search(moves.begin(), moves.end(), m)) {
    throw Error(ErrorCode::IllegalMove, format_move(m));
  }
  GameState next = s;
  apply_in_place(next, m);
  return next;
}

namespace {

struct Evaluator {
  const CompiledRules& r;
  const Game& g;
  const GameState& s;
  const std::vector<Move>* mover_moves;
  bool unlimited;

  bool holds(const Condition& c, int player) const {
    switch (c.kind) {
      case Condition::Kind::True:
        return true;
      case Condition::Kind::Line:
        for (const auto& seg : c.segments) {
          bool all = true;
          for (int cell : seg) {
            if (!content_ok(s.at(cell), player, c.content)) {
              all = false;
              break;
            }
          }
          if (all) return true;
        }
        return false;
      case Condition::Kind::Connect:
        return connected(c, player);
      case Condition::Kind::NoMoves:
        if (player == s.mover() && mover_moves) return mover_moves->empty();
        return !g.has_legal_move(s, player);
      case Condition::Kind::FullBoard:
        return std::none_of(s.cells().begin(), s.cells().end(),
                            [](const Occupant& o) { return o.empty(); });
      case Condition::Kind::MoveLimit:
        return !unlimited && s.move_count() >= c.limit;
      case Condition::Kind::AdjacentFrom:
      case Condition::Kind::AdjacentTo:
        return false;
    }
    return false;
  }

  bool connected(const Condition& c, int player) const {
    const int n = r.board.size();
    std::vector<char> seen(n, 0);
    std::vector<int> stack;
    for (int cell = 0; cell < n; ++cell) {
      if (c.a.mask[cell] && s.at(cell).player == player) {
        seen[cell] = 1;
        stack.push_back(cell);
      }
    }
    while (!stack.empty()) {
      const int cell = stack.back();
      stack.pop_back();
      if (c.b.mask[cell]) return true;
      for (const auto& nb : r.board.neighbors(cell)) {
        if (!seen[nb.cell] && s.at(nb.cell).player == player) {
          seen[nb.cell] = 1;
          stack.push_back(nb.cell);
        }
      }
    }
    return false;
  }

  Outcome run() const {
    const int mover = s.mover();
    for (const auto& rule : r.ends) {
      if (rule.kind == EndRule::Kind::Draw) {
        if (holds(rule.cond, mover)) return Outcome::draw();
        continue;
      }
      int players[2];
      int count = 0;
      switch (rule.who) {
        case Who::All:
          players[count++] = opponent(mover);
          players[count++] = mover;
          break;
        case Who::Mover: players[count++] = mover; break;
        case Who::Prev: players[count++] = opponent(mover); break;
        case Who::P1: players[count++] = 1; break;
        case Who::P2: players[count++] = 2; break;
      }
      for (int i = 0; i < count; ++i) {
        if (holds(rule.cond, players[i])) {
          return Outcome::win(rule.kind == EndRule::Kind::Win ? players[i]
                                                              : opponent(players[i]));
        }
      }
    }
    const bool stuck = mover_moves ? mover_moves->empty() : !g.has_legal_move(s, mover);
    if (stuck) return Outcome::draw();
    if (!unlimited && s.move_count() >= r.move_cap) return Outcome::draw(true);
    return Outcome::ongoing();
  }
};

}  // namespace

Outcome Game::status(const GameState& s) const {
  return Evaluator{*rules_, *this, s, nullptr, false}.run();
}

Outcome Game::status(const GameState& s, const std::vector<Move>& mover_moves) const {
  return Evaluator{*rules_, *this, s, &mover_moves, false}.run();
}

Outcome Game::status_unlimited(const GameState& s) const {
  return Evaluator{*rules_, *this, s, nullptr, true}.run();
}

GameState Game::transform(const GameState& s, const Permutation& p, bool swap_colors) const {
  GameState t = s;
  for (std::size_t c = 0; c < s.cells_.size(); ++c) {
    Occupant o = s.cells_[c];
    if (swap_colors && !o.empty()) o.player = static_cast<std::uint8_t>(opponent(o.player));
    t.cells_[p[c]] = o;
  }
  if (swap_colors) {
    t.mover_ = opponent(s.mover_);
    const std::size_t half = s.hand_.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      t.hand_[i] = s.hand_[half + i];
      t.hand_[half + i] = s.hand_[i];
    }
  }
  t.last_to_ = s.last_to_ >= 0 ? p[s.last_to_] : -1;
  t.hash_ = full_hash(t.cells_, t.mover_, t.hand_);
  return t;
}

GameState Game::with_mover(const GameState& s, int player) const {
  GameState t = s;
  if (t.mover_ != player) {
    t.mover_ = player;
    t.hash_ ^= kMoverKey;
  }
  return t;
}

std::uint64_t Game::canonical_hash(const GameState& s, bool swap_colors) const {
  std::uint64_t best = ~std::uint64_t{0};
  for (const auto& p : rules_->position_symmetries) {
    best = std::min(best, transform(s, p, false).hash());
    if (swap_colors) best = std::min(best, transform(s, p, true).hash());
  }
  return best;
}

std::string Game::format_move(const Move& m) const {
  std::string out = std::to_string(m.player);
  out += m.kind == Move::Kind::Add ? " Add " : " Step ";
  out += m.from < 0 ? "-" : std::to_string(m.from);
  out += ' ';
  out += std::to_string(m.to);
  return out;
}

Move Game::parse_move(const std::string& line) const {
  std::istringstream in(line);
  std::string player, kind, from, to, extra;
  if (!(in >> player >> kind >> from >> to) || (in >> extra)) {
    throw Error(ErrorCode::ParseError, "bad move line '" + line + "'");
  }
  Move m;
  try {
    m.player = std::stoi(player);
    m.from = from == "-" ? -1 : std::stoi(from);
    m.to = std::stoi(to);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad move line '" + line + "'");
  }
  if (kind == "Add") {
    m.kind = Move::Kind::Add;
  } else if (kind == "Step") {
    m.kind = Move::Kind::Step;
  } else {
    throw Error(ErrorCode::ParseError, "unknown move kind '" + kind + "'");
  }
  if (m.player < 1 || m.player > 2 || m.to < 0 || m.to >= board().size() ||
      m.from >= board().size() || (m.kind == Move::Kind::Step && m.from < 0) ||
      (m.kind == Move::Kind::Add && m.from != -1)) {
    throw Error(ErrorCode::ParseError, "move out of range '" + line + "'");
  }
  return m;
}

std::string format_trace(const Game& g, const std::vector<Move>& moves) {
  std::string out;
  for (const auto& m : moves) out += g.format_move(m) + "\n";
  return out;
}

std::vector<Move> parse_trace(const Game& g, const std::string& text) {
  std::vector<Move> moves;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind("#", 0) == 0) continue;
    moves.push_back(g.parse_move(line));
  }
  return moves;
}

MovePolicy uniform_policy() {
  return [](const Game&, const GameState&, const std::vector<Move>& moves, Rng& rng) {
    return static_cast<std::size_t>(rng.below(moves.size()));
  };
}

PlayoutResult playout(const Game& g, const GameState& start, const MovePolicy& policy,
                      std::uint64_t seed) {
  Rng rng(seed);
  GameState s = start;
  std::vector<Move> moves;
  PlayoutResult result;
  while (true) {
    moves.clear();
    g.generate_moves(s, s.mover(), moves);
    const Outcome o = g.status(s, moves);
    if (o.terminal()) {
      result.outcome = o;
      return result;
    }
    const std::size_t i = policy(g, s, moves, rng);
    g.apply_in_place(s, moves[i]);
    ++result.plies;
  }
}

namespace {

// Reachable positions with successor lists, keyed by hash with full
// comparison on lookup.
struct StateGraph {
  std::vector<GameState> states;
  std::vector<Outcome> outcomes;
  std::vector<std::vector<int>> successors;
  std::vector<std::vector<Move>> moves;
};

StateGraph explore(const Game& g, std::size_t budget, bool keep_edges) {
  StateGraph graph;
  std::unordered_map<std::uint64_t, int> index;
  auto intern = [&](const GameState& s) -> std::pair<int, bool> {
    auto [it, inserted] = index.emplace(s.hash(), static_cast<int>(graph.states.size()));
    if (!inserted) {
      if (!graph.states[it->second].same_position(s)) {
        throw Error(ErrorCode::StateBudgetExceeded, "64-bit position hash collision");
      }
      return {it->second, false};
    }
    if (graph.states.size() >= budget) {
      throw Error(ErrorCode::StateBudgetExceeded,
                  "more than " + std::to_string(budget) + " reachable positions");
    }
    graph.states.push_back(s);
    return {it->second, true};
  };
  intern(g.initial_state());
  std::vector<Move> moves;
  for (std::size_t head = 0; head < graph.states.size(); ++head) {
    const GameState s = graph.states[head];
    const Outcome o = g.status_unlimited(s);
    graph.outcomes.push_back(o);
    if (keep_edges) {
      graph.successors.emplace_back();
      graph.moves.emplace_back();
    }
    if (o.terminal()) continue;
    moves.clear();
    g.generate_moves(s, s.mover(), moves);
    for (const auto& m : moves) {
      GameState next = s;
      g.apply_in_place(next, m);
      const int id = intern(next).first;
      if (keep_edges) {
        graph.successors[head].push_back(id);
        graph.moves[head].push_back(m);
      }
    }
  }
  return graph;
}

}  // namespace

Enumeration enumerate_states(const Game& g, Reduction reduction, bool board_only,
                             std::size_t budget) {
  StateGraph graph = explore(g, budget, false);
  Enumeration e;
  e.reachable = graph.states.size();
  if (reduction == Reduction::None && !board_only) {
    e.states = std::move(graph.states);
    return e;
  }
  const bool swap = reduction == Reduction::SymmetryAndColor;
  Permutation identity(g.board().size());
  for (int c = 0; c < g.board().size(); ++c) identity[c] = c;
  const std::vector<Permutation> trivial{identity};
  const auto& syms = reduction == Reduction::None ? trivial : g.position_symmetries();
  std::unordered_map<std::uint64_t, GameState> classes;
  std::vector<std::uint64_t> order;
  for (const auto& raw : graph.states) {
    const GameState s = board_only ? g.with_mover(raw, 1) : raw;
    // Canonical representative: the image with the smallest hash.
    GameState best = s;
    for (const auto& p : syms) {
      for (int c = 0; c < (swap ? 2 : 1); ++c) {
        GameState t = g.transform(s, p, c == 1);
        if (board_only) t = g.with_mover(t, 1);
        if (t.hash() < best.hash()) best = std::move(t);
      }
    }
    auto [it, inserted] = classes.emplace(best.hash(), best);
    if (inserted) {
      order.push_back(best.hash());
    } else if (!it->second.same_position(best)) {
      throw Error(ErrorCode::StateBudgetExceeded, "64-bit canonical hash collision");
    }
  }
  for (auto h : order) e.states.push_back(classes.at(h));
  return e;
}

std::vector<Move> immediate_wins(const Game& g, const GameState& s) {
  std::vector<Move> moves;
  g.generate_moves(s, s.mover(), moves);
  std::vector<Move> wins;
  if (g.status(s, moves).terminal()) return wins;
  for (const auto& m : moves) {
    GameState next = s;
    g.apply_in_place(next, m);
    const Outcome o = g.status(next);
    if (o.status == Outcome::Status::Win && o.winner == s.mover()) wins.push_back(m);
  }
  return wins;
}

Solution solve(const Game& g, std::size_t budget) {
  StateGraph graph = explore(g, budget, true);
  const std::size_t n = graph.states.size();
  std::vector<Value> value(n, Value::Draw);
  std::vector<char> resolved(n, 0);
  std::vector<int> remaining(n, 0);
  std::vector<std::vector<int>> predecessors(n);
  std::deque<int> queue;
  for (std::size_t i = 0; i < n; ++i) {
    const Outcome& o = graph.outcomes[i];
    if (o.terminal()) {
      value[i] = o.status == Outcome::Status::Draw ? Value::Draw
                 : o.winner == graph.states[i].mover() ? Value::Win
                                                        : Value::Loss;
      resolved[i] = 1;
      queue.push_back(static_cast<int>(i));
      continue;
    }
    std::vector<int> uniq = graph.successors[i];
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    remaining[i] = static_cast<int>(uniq.size());
    for (int j : uniq) predecessors[j].push_back(static_cast<int>(i));
  }
  // Win/loss propagation. A child value is from the child's mover, which is
  // always the opponent of the parent's mover. Draws only settle a parent
  // once every child is settled.
  std::vector<char> has_draw_child(n, 0);
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    for (int i : predecessors[j]) {
      if (resolved[i]) continue;
      if (value[j] == Value::Loss) {
        value[i] = Value::Win;
        resolved[i] = 1;
        queue.push_back(i);
        continue;
      }
      if (value[j] == Value::Draw) has_draw_child[i] = 1;
      if (--remaining[i] == 0) {
        value[i] = has_draw_child[i] ? Value::Draw : Value::Loss;
        resolved[i] = 1;
        queue.push_back(i);
      }
    }
  }
  Solution sol;
  sol.positions = n;
  for (std::size_t i = 0; i < n; ++i) sol.table.emplace(graph.states[i].hash(), value[i]);
  const int first = graph.states[0].mover();
  switch (value[0]) {
    case Value::Win: sol.value = Outcome::win(first); break;
    case Value::Loss: sol.value = Outcome::win(opponent(first)); break;
    case Value::Draw: sol.value = Outcome::draw(); break;
  }
  sol.immediate_wins = immediate_wins(g, graph.states[0]);
  return sol;
}

}  // namespace lud
