#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lud/board.hpp"
#include "lud/grammar.hpp"
#include "lud/random.hpp"

namespace lud {

struct Occupant {
  std::uint8_t player = 0;  // 0 = empty
  std::uint8_t type = 0;    // index into Game::piece_types()

  bool empty() const { return player == 0; }
  friend bool operator==(const Occupant&, const Occupant&) = default;
};

struct Move {
  enum class Kind : std::uint8_t { Add, Step };

  Kind kind = Kind::Add;
  int from = -1;  // -1 for Add
  int to = -1;
  int player = 1;

  friend bool operator==(const Move&, const Move&) = default;
  // Order used for legal move lists: (kind, from, to).
  friend bool operator<(const Move& a, const Move& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.from != b.from) return a.from < b.from;
    return a.to < b.to;
  }
};

struct Outcome {
  enum class Status { Ongoing, Win, Draw };

  Status status = Status::Ongoing;
  int winner = 0;       // 1 or 2 for Win
  bool capped = false;  // Draw forced by the global move cap

  static Outcome ongoing() { return {}; }
  static Outcome win(int player) { return {Status::Win, player, false}; }
  static Outcome draw(bool capped = false) { return {Status::Draw, 0, capped}; }

  bool terminal() const { return status != Status::Ongoing; }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

std::string to_string(const Outcome& outcome);

inline int opponent(int player) { return 3 - player; }

// Position plus move counter. The hash covers occupants, mover and pieces in
// hand; the move counter is kept out so repeated positions share a key.
class GameState {
 public:
  const std::vector<Occupant>& cells() const { return cells_; }
  const Occupant& at(int cell) const { return cells_[cell]; }
  int mover() const { return mover_; }
  int move_count() const { return move_count_; }
  // Pieces of `type` still in hand for `player`; -1 = unlimited.
  int in_hand(int player, int type) const { return hand_[(player - 1) * types_ + type]; }
  int last_to() const { return last_to_; }
  std::uint64_t hash() const { return hash_; }

  // Same occupants, mover and hand; ignores the move counter.
  bool same_position(const GameState& other) const {
    return cells_ == other.cells_ && mover_ == other.mover_ && hand_ == other.hand_;
  }
  friend bool operator==(const GameState& a, const GameState& b) {
    return a.same_position(b) && a.move_count_ == b.move_count_;
  }

 private:
  friend class Game;
  std::vector<Occupant> cells_;
  std::vector<int> hand_;
  int types_ = 1;
  int mover_ = 1;
  int move_count_ = 0;
  int last_to_ = -1;
  std::uint64_t hash_ = 0;
};

struct CompileOptions {
  int move_cap_factor = 10;  // global cap = factor x cell count
};

struct CompiledRules;

// Executable game. Immutable and shareable across threads.
class Game {
 public:
  Game(const Game&) = default;
  Game& operator=(const Game&) = default;
  Game(Game&&) noexcept = default;
  Game& operator=(Game&&) noexcept = default;
  ~Game();

  const std::string& name() const;
  const GameDescription& description() const;
  const BoardGraph& board() const;
  const std::vector<std::string>& piece_types() const;
  int move_cap() const;

  GameState initial_state() const;

  // Sorted, duplicate-free. Throws CalledOnTerminal.
  std::vector<Move> legal_moves(const GameState& s) const;
  // No terminal check; appends nothing when `player` cannot move.
  void generate_moves(const GameState& s, int player, std::vector<Move>& out) const;
  bool has_legal_move(const GameState& s, int player) const;

  // Throws IllegalMove (or CalledOnTerminal) when m is not legal in s.
  GameState apply(const GameState& s, const Move& m) const;
  // Caller guarantees legality.
  void apply_in_place(GameState& s, const Move& m) const;

  Outcome status(const GameState& s) const;
  // Same as status() when `mover_moves` holds the mover's legal moves.
  Outcome status(const GameState& s, const std::vector<Move>& mover_moves) const;
  // Ignores moveLimit conditions and the global cap; used by the solvers.
  Outcome status_unlimited(const GameState& s) const;

  // Canonical key over the board symmetries (and optionally colour swap).
  std::uint64_t canonical_hash(const GameState& s, bool swap_colors) const;
  GameState transform(const GameState& s, const Permutation& p, bool swap_colors) const;
  GameState with_mover(const GameState& s, int player) const;
  // Symmetries used for position reduction: those preserving direction
  // labels when the board has any.
  const std::vector<Permutation>& position_symmetries() const;

  std::string format_move(const Move& m) const;
  // Parses one trace line `player kind from to` (from is `-` for Add).
  Move parse_move(const std::string& line) const;

 private:
  friend Game compile(const GameDescription&, const CompileOptions&);
  Game() = default;
  std::shared_ptr<const CompiledRules> rules_;
};

Game compile(const GameDescription& gd, const CompileOptions& options = {});

std::string format_trace(const Game& g, const std::vector<Move>& moves);
std::vector<Move> parse_trace(const Game& g, const std::string& text);

// Chooses an index into `moves` (never empty).
using MovePolicy =
    std::function<std::size_t(const Game&, const GameState&, const std::vector<Move>&, Rng&)>;

MovePolicy uniform_policy();

struct PlayoutResult {
  Outcome outcome;
  int plies = 0;
};

PlayoutResult playout(const Game& g, const GameState& s, const MovePolicy& policy,
                      std::uint64_t seed);

enum class Reduction { None, Symmetry, SymmetryAndColor };

struct Enumeration {
  std::size_t reachable = 0;  // distinct positions without reduction
  std::vector<GameState> states;  // one representative per class
};

// Breadth-first over legal moves, ignoring moveLimit and the global cap.
// With board_only, positions differing only in the side to move share a
// class (the Mu Torere count of 46 uses Symmetry with board_only).
Enumeration enumerate_states(const Game& g, Reduction reduction, bool board_only = false,
                             std::size_t budget = 10'000'000);

// Value of a position for the player to move.
enum class Value : std::int8_t { Loss = -1, Draw = 0, Win = 1 };

struct Solution {
  Outcome value;  // from the initial position under optimal play
  std::unordered_map<std::uint64_t, Value> table;  // position hash -> value for mover
  std::vector<Move> immediate_wins;                // from the initial position
  std::size_t positions = 0;
};

// Retrograde analysis over the reachable positions; positions never forced
// to a result are draws.
Solution solve(const Game& g, std::size_t budget = 1'000'000);

// Moves that end the game with a win for the mover.
std::vector<Move> immediate_wins(const Game& g, const GameState& s);

}  // namespace lud
