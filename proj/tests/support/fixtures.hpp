#pragma once

#include <string>

#include "lud/corpus.hpp"
#include "lud/engine.hpp"

namespace fixture {

inline const char* kTicTacToe =
    "(game Tic-Tac-Toe (players White Black) (equipment (board (square 3) diagonals)) "
    "(rules (play (add (piece Own) (board Empty))) (end (win All (line 3 Own Any)))))";

inline std::string games_dir() { return LUDII_GAMES_DIR; }
inline std::string golden_dir() { return LUDII_GOLDEN_DIR; }
inline std::string source_dir() { return LUDII_SOURCE_DIR; }

inline lud::GameDescription corpus_description(const std::string& stem) {
  return lud::load_game_file(games_dir() + "/" + stem + ".lud").description;
}

inline lud::Game corpus_game(const std::string& stem) { return lud::compile(corpus_description(stem)); }

inline lud::Game game(const std::string& text) { return lud::compile(lud::load_description(text)); }

}  // namespace fixture
