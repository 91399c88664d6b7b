#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lud/ai.hpp"

namespace lud {

struct TrialSpec {
  int num_games = 100;
  Agent agent_a = Agent::uniform();
  Agent agent_b = Agent::uniform();
  // Game 2k+1 swaps the seats of game 2k.
  bool swap_colors = true;
  std::uint64_t base_seed = 0;
  // Games per adjacent ladder pair in evaluate(); 0 uses num_games.
  int ladder_games = 0;
  int threads = 1;
};

struct TrialResult {
  Outcome outcome;
  int plies = 0;
  bool a_first = true;  // agent_a held seat 1
};

// Game i uses seed base_seed + i. Results are ordered by game index.
std::vector<TrialResult> run_trials(const Game& g, const TrialSpec& spec);

enum class Flag { TooShort, TooLong, Unfair, Drawish, NonTerminating };
std::string_view to_string(Flag f);

struct Thresholds {
  double too_short_fraction = 0.25;  // of the cell count
  double too_short_min_plies = 2;     // floor so tiny boards can still be flagged
  double cap_rate = 0.1;
  double fair_low = 0.35;
  double fair_high = 0.65;
  double draw_rate = 0.5;
};

Thresholds thresholds_from_json(const nlohmann::json& j);

struct QualityReport {
  double mean_length = 0;
  double length_cap_rate = 0;
  double advantage = 0.5;  // seat 1 share of decisive games
  double draw_rate = 0;
  double depth_proxy = 0;
  std::vector<double> ladder_winrates;  // stronger vs weaker, per adjacent pair
  std::set<Flag> flags;
  double score = 0;
  int num_games = 0;
  int decisive_games = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::string> ladder;
};

std::vector<SearchConfig> default_ladder();

// depth_proxy averages max(0, 2w - 1) over adjacent ladder pairs, where w is
// the stronger agent's score (draws count half) against the weaker one.
QualityReport evaluate(const Game& g, const TrialSpec& spec,
                       const std::vector<SearchConfig>& ladder = default_ladder(),
                       const Thresholds& thresholds = {});

nlohmann::json to_json(const QualityReport& r);

// {"kind": "uniform"} or {"kind": "mcts", "iterations": n, "exploration_c": c,
// "seed": s, "features": <feature table>}.
Agent agent_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Agent& a);

// Keys: num_games, base_seed, swap_colors, ladder_games, agent_a, agent_b.
TrialSpec trial_spec_from_json(const nlohmann::json& j, TrialSpec defaults = {});
// Iteration counts, e.g. [16, 64, 256, 1024].
std::vector<SearchConfig> ladder_from_json(const nlohmann::json& j);

}  // namespace lud
