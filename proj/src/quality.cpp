#include "lud/quality.hpp"

#include <algorithm>
#include <cmath>

#include "lud/parallel.hpp"

namespace lud {

std::string_view to_string(Flag f) {
  switch (f) {
    case Flag::TooShort: return "TooShort";
    case Flag::TooLong: return "TooLong";
    case Flag::Unfair: return "Unfair";
    case Flag::Drawish: return "Drawish";
    case Flag::NonTerminating: return "NonTerminating";
  }
  return "Unknown";
}

namespace {

TrialResult play_one(const Game& g, const Agent& first, const Agent& second,
                     std::uint64_t seed) {
  GameState s = g.initial_state();
  std::vector<Move> moves;
  for (int ply = 0;; ++ply) {
    moves.clear();
    g.generate_moves(s, s.mover(), moves);
    const Outcome o = g.status(s, moves);
    if (o.terminal()) return {o, ply, true};
    const Agent& agent = s.mover() == 1 ? first : second;
    g.apply_in_place(s, agent.act(g, s, derive_seed(seed, ply)));
  }
}

}  // namespace

std::vector<TrialResult> run_trials(const Game& g, const TrialSpec& spec) {
  if (spec.num_games < 1) throw Error(ErrorCode::InvalidArgument, "num_games must be >= 1");
  if (spec.swap_colors && spec.num_games % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "num_games must be even with swap_colors");
  }
  std::vector<TrialResult> results(spec.num_games);
  parallel_for(results.size(), spec.threads, [&](std::size_t i) {
    const bool a_first = !spec.swap_colors || i % 2 == 0;
    const Agent& first = a_first ? spec.agent_a : spec.agent_b;
    const Agent& second = a_first ? spec.agent_b : spec.agent_a;
    results[i] = play_one(g, first, second, spec.base_seed + i);
    results[i].a_first = a_first;
  });
  return results;
}

Thresholds thresholds_from_json(const nlohmann::json& j) {
  Thresholds t;
  try {
    t.too_short_fraction = j.value("too_short_fraction", t.too_short_fraction);
    t.too_short_min_plies = j.value("too_short_min_plies", t.too_short_min_plies);
    t.cap_rate = j.value("cap_rate", t.cap_rate);
    t.fair_low = j.value("fair_low", t.fair_low);
    t.fair_high = j.value("fair_high", t.fair_high);
    t.draw_rate = j.value("draw_rate", t.draw_rate);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("thresholds: ") + e.what());
  }
  return t;
}

std::vector<SearchConfig> default_ladder() {
  std::vector<SearchConfig> ladder;
  for (int it : {16, 64, 256, 1024}) {
    SearchConfig c;
    c.iterations = it;
    ladder.push_back(c);
  }
  return ladder;
}

QualityReport evaluate(const Game& g, const TrialSpec& spec,
                       const std::vector<SearchConfig>& ladder,
                       const Thresholds& thresholds) {
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (ladder[i].iterations < ladder[i - 1].iterations) {
      throw Error(ErrorCode::InvalidArgument, "ladder must be sorted by iterations");
    }
  }
  QualityReport r;
  r.num_games = spec.num_games;
  r.base_seed = spec.base_seed;
  const auto results = run_trials(g, spec);
  int first_wins = 0;
  int draws = 0;
  int capped = 0;
  double plies = 0;
  for (const auto& t : results) {
    plies += t.plies;
    if (t.outcome.capped) ++capped;
    if (t.outcome.status == Outcome::Status::Draw) {
      ++draws;
    } else if (t.outcome.status == Outcome::Status::Win) {
      ++r.decisive_games;
      if (t.outcome.winner == 1) ++first_wins;
    }
  }
  const double n = static_cast<double>(results.size());
  r.mean_length = plies / n;
  r.length_cap_rate = capped / n;
  r.draw_rate = draws / n;
  r.advantage = r.decisive_games ? static_cast<double>(first_wins) / r.decisive_games : 0.5;

  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    TrialSpec pair = spec;
    pair.agent_a = Agent::mcts(ladder[i + 1]);
    pair.agent_b = Agent::mcts(ladder[i]);
    pair.swap_colors = true;
    pair.num_games = spec.ladder_games > 0 ? spec.ladder_games : spec.num_games;
    pair.num_games += pair.num_games % 2;
    pair.base_seed = derive_seed(spec.base_seed, i + 1);
    double points = 0;
    for (const auto& t : run_trials(g, pair)) {
      if (t.outcome.status == Outcome::Status::Draw) {
        points += 0.5;
      } else if ((t.outcome.winner == 1) == t.a_first) {
        points += 1;
      }
    }
    r.ladder_winrates.push_back(points / pair.num_games);
  }
  for (const auto& c : ladder) r.ladder.push_back(Agent::mcts(c).describe());
  if (!r.ladder_winrates.empty()) {
    double sum = 0;
    for (double w : r.ladder_winrates) sum += std::max(0.0, 2 * w - 1);
    r.depth_proxy = sum / static_cast<double>(r.ladder_winrates.size());
  }

  if (r.mean_length < std::max(thresholds.too_short_fraction * g.board().size(), thresholds.too_short_min_plies)) {
    r.flags.insert(Flag::TooShort);
  }
  if (r.length_cap_rate > thresholds.cap_rate) r.flags.insert(Flag::TooLong);
  if (capped == static_cast<int>(results.size())) r.flags.insert(Flag::NonTerminating);
  if (r.advantage < thresholds.fair_low || r.advantage > thresholds.fair_high) {
    r.flags.insert(Flag::Unfair);
  }
  if (r.draw_rate > thresholds.draw_rate) r.flags.insert(Flag::Drawish);

  const double s = (1 - r.length_cap_rate) * (1 - std::abs(2 * r.advantage - 1)) *
                   (1 - r.draw_rate) * r.depth_proxy;
  r.score = std::clamp(s, 0.0, 1.0);
  return r;
}

nlohmann::json to_json(const QualityReport& r) {
  nlohmann::json flags = nlohmann::json::array();
  for (Flag f : r.flags) flags.push_back(std::string(to_string(f)));
  return {{"mean_length", r.mean_length},
          {"length_cap_rate", r.length_cap_rate},
          {"advantage", r.advantage},
          {"draw_rate", r.draw_rate},
          {"depth_proxy", r.depth_proxy},
          {"ladder_winrates", r.ladder_winrates},
          {"flags", flags},
          {"score", r.score},
          {"trials",
           {{"num_games", r.num_games},
            {"decisive_games", r.decisive_games},
            {"base_seed", r.base_seed},
            {"ladder", r.ladder},
            {"depth_proxy_note", "stronger-vs-weaker ladder win rate mapped from [0.5,1] to [0,1]"}}}};
}

Agent agent_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.value("kind", std::string("uniform"));
    if (kind == "uniform") return Agent::uniform();
    if (kind != "mcts") throw Error(ErrorCode::InvalidArgument, "unknown agent kind '" + kind + "'");
    SearchConfig c;
    c.iterations = j.value("iterations", c.iterations);
    c.exploration_c = j.value("exploration_c", c.exploration_c);
    c.rng_seed = j.value("seed", c.rng_seed);
    if (c.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
    if (!(c.exploration_c >= 0)) throw Error(ErrorCode::InvalidArgument, "exploration_c must be >= 0");
    if (j.contains("features")) {
      c.features = std::make_shared<const FeatureTable>(feature_table_from_json(j.at("features")));
    }
    return Agent::mcts(c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("agent: ") + e.what());
  }
}

nlohmann::json to_json(const Agent& a) {
  if (a.kind == Agent::Kind::Uniform) return {{"kind", "uniform"}};
  nlohmann::json j = {{"kind", "mcts"},
                      {"iterations", a.cfg.iterations},
                      {"exploration_c", a.cfg.exploration_c},
                      {"seed", a.cfg.rng_seed}};
  if (a.cfg.features) j["features"] = to_json(*a.cfg.features);
  return j;
}

TrialSpec trial_spec_from_json(const nlohmann::json& j, TrialSpec t) {
  try {
    t.num_games = j.value("num_games", t.num_games);
    t.base_seed = j.value("base_seed", t.base_seed);
    t.swap_colors = j.value("swap_colors", t.swap_colors);
    t.ladder_games = j.value("ladder_games", t.ladder_games);
    if (j.contains("agent_a")) t.agent_a = agent_from_json(j.at("agent_a"));
    if (j.contains("agent_b")) t.agent_b = agent_from_json(j.at("agent_b"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("trials: ") + e.what());
  }
  if (t.num_games < 1) throw Error(ErrorCode::InvalidArgument, "num_games must be >= 1");
  return t;
}

std::vector<SearchConfig> ladder_from_json(const nlohmann::json& j) {
  std::vector<SearchConfig> ladder;
  try {
    for (const auto& v : j) {
      SearchConfig c;
      c.iterations = v.get<int>();
      if (c.iterations < 1) throw Error(ErrorCode::InvalidArgument, "ladder iterations must be >= 1");
      ladder.push_back(c);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("ladder: ") + e.what());
  }
  return ladder;
}

}  // namespace lud
