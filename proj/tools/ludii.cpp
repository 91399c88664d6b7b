// ludii: command-line front end for the ludii-lite library.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lud/corpus.hpp"
#include "lud/distance.hpp"
#include "lud/parallel.hpp"
#include "lud/phylo.hpp"
#include "lud/quality.hpp"
#include "lud/recon.hpp"
#include "lud/service.hpp"

namespace {

using nlohmann::json;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct Globals {
  std::uint64_t seed = 0;
  int threads = lud::default_threads();
  bool json = false;
  bool seed_given = false;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lud::Error(lud::ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw lud::Error(lud::ErrorCode::IoError, "cannot write " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
  try {
    return json::parse(lud::read_file(path));
  } catch (const json::exception& e) {
    throw lud::Error(lud::ErrorCode::ParseError, path + ": " + e.what());
  }
}

// The sidecar decides partial descriptions; --allow-partial covers files without one.
lud::CorpusEntry load_entry(const std::string& path, bool allow_partial) {
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  if (!allow_partial || std::filesystem::exists(sidecar)) return lud::load_game_file(path);
  lud::CorpusEntry e;
  e.path = path;
  e.description = lud::load_description(lud::read_file(path), true);
  e.metadata.name = e.description.name();
  return e;
}

lud::Game load_game(const std::string& path) {
  const auto e = lud::load_game_file(path);
  if (e.description.partial()) {
    throw lud::Error(lud::ErrorCode::MissingSection, path + " has no rules section");
  }
  return lud::compile(e.description);
}

std::vector<lud::CorpusEntry> load_inputs(const std::vector<std::string>& inputs) {
  std::vector<lud::CorpusEntry> out;
  for (const auto& in : inputs) {
    if (std::filesystem::is_directory(in)) {
      for (auto& e : lud::load_corpus(in)) out.push_back(std::move(e));
    } else {
      out.push_back(lud::load_game_file(in));
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw lud::Error(lud::ErrorCode::InvalidArgument, "bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw lud::Error(lud::ErrorCode::InvalidArgument, "empty list");
  return out;
}

std::string state_text(const lud::Game& g, const lud::GameState& s) {
  const auto& b = g.board();
  std::map<long, std::vector<int>> rows;
  for (int c = 0; c < b.size(); ++c) rows[std::lround(b.layout()[c].y * 100)].push_back(c);
  std::ostringstream out;
  for (auto& [y, cells] : rows) {
    std::sort(cells.begin(), cells.end(),
              [&](int a, int c) { return b.layout()[a].x < b.layout()[c].x; });
    for (int c : cells) {
      const auto& o = s.at(c);
      char buf[16];
      std::snprintf(buf, sizeof buf, "%4d%c", c, o.empty() ? '.' : o.player == 1 ? 'X' : 'O');
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

// One line of human input: a trace line, "to" or "from to".
std::optional<lud::Move> read_human_move(const lud::Game& g, const lud::GameState& s,
                                         const std::string& line) {
  const auto legal = g.legal_moves(s);
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  std::optional<lud::Move> m;
  try {
    if (words.size() == 4) {
      m = g.parse_move(line);
      m->player = s.mover();
    } else if (words.size() == 1 || words.size() == 2) {
      const int to = std::stoi(words.back());
      const int from = words.size() == 2 ? std::stoi(words[0]) : -1;
      for (const auto& l : legal) {
        if (l.to == to && (words.size() == 1 ? l.kind == lud::Move::Kind::Add : l.from == from)) m = l;
      }
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (m && std::find(legal.begin(), legal.end(), *m) == legal.end()) return std::nullopt;
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ludii-lite: parse, play, evaluate and compare ludeme game descriptions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--threads", g.threads, "Worker threads for trials and candidates")
      ->check(CLI::Range(1, 1024));
  app.add_flag("--json", g.json, "Machine-readable output and errors");

  std::string out_path;
  std::function<int()> action;

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Validate a description and print its canonical form");
  std::string parse_file;
  bool allow_partial = false;
  parse_cmd->add_option("file", parse_file, ".lud file")->required();
  parse_cmd->add_flag("--allow-partial", allow_partial, "Accept a description without rules");
  parse_cmd->add_option("--out", out_path, "Output file");
  parse_cmd->callback([&] {
    action = [&] {
      const auto e = load_entry(parse_file, allow_partial);
      const std::string canon = lud::canonical_text(e.description);
      if (g.json) {
        write_output(out_path, dump({{"name", e.description.name()},
                                     {"canonical", canon},
                                     {"partial", e.description.partial()},
                                     {"metadata", lud::to_json(e.metadata)},
                                     {"math_profile", lud::math_profile(e.description)}}));
      } else {
        write_output(out_path, canon + "\n");
      }
      return 0;
    };
  });

  // grammar
  auto* grammar_cmd = app.add_subcommand("grammar", "Print the EBNF grammar of the ludeme library");
  grammar_cmd->add_option("--out", out_path, "Output file");
  grammar_cmd->callback([&] {
    action = [&] {
      write_output(out_path, lud::grammar_text());
      return 0;
    };
  });

  // play
  auto* play_cmd = app.add_subcommand("play", "Play a game on the terminal against the AI");
  std::string play_file;
  int human_seat = 1;
  int play_iterations = 1000;
  play_cmd->add_option("file", play_file, ".lud file")->required();
  play_cmd->add_option("--human", human_seat, "Seat of the human player (0 = AI plays both)")
      ->check(CLI::Range(0, 2));
  play_cmd->add_option("--iterations", play_iterations, "AI search iterations per move")
      ->check(CLI::Range(1, 10'000'000));
  play_cmd->callback([&] {
    action = [&] {
      const lud::Game game = load_game(play_file);
      lud::GameState s = game.initial_state();
      std::vector<lud::Move> history;
      while (!game.status(s).terminal()) {
        std::cout << state_text(game, s) << "to move: P" << s.mover() << "\n";
        lud::Move m;
        if (s.mover() == human_seat) {
          std::cout << "> " << std::flush;
          std::string line;
          if (!std::getline(std::cin, line) || line == "quit") return 0;
          const auto parsed = read_human_move(game, s, line);
          if (!parsed) {
            std::cout << "illegal; legal moves:\n";
            for (const auto& l : game.legal_moves(s)) std::cout << "  " << game.format_move(l) << "\n";
            continue;
          }
          m = *parsed;
        } else {
          lud::SearchConfig cfg;
          cfg.iterations = play_iterations;
          cfg.rng_seed = lud::derive_seed(g.seed, history.size());
          m = lud::choose_move(game, s, cfg);
          std::cout << "AI plays " << game.format_move(m) << "\n";
        }
        s = game.apply(s, m);
        history.push_back(m);
      }
      std::cout << state_text(game, s) << lud::to_string(game.status(s)) << "\n";
      return 0;
    };
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Self-play quality report (JSON)");
  std::string eval_file;
  lud::EvalRequest eval_req;
  std::string eval_ladder = "16,64,256,1024";
  eval_cmd->add_option("file", eval_file, ".lud file")->required();
  eval_cmd->add_option("--games", eval_req.games, "Uniform self-play games")->check(CLI::Range(1, 10'000'000));
  eval_cmd->add_option("--ladder-games", eval_req.ladder_games, "Games per ladder pair (0 = --games)")
      ->check(CLI::Range(0, 10'000'000));
  eval_cmd->add_option("--ladder", eval_ladder, "Comma-separated MCTS iteration counts");
  eval_cmd->add_option("--out", out_path, "Output file");
  eval_cmd->callback([&] {
    action = [&] {
      const lud::Game game = load_game(eval_file);
      eval_req.seed = g.seed;
      eval_req.threads = g.threads;
      eval_req.ladder = parse_int_list(eval_ladder);
      write_output(out_path, dump(lud::evaluate_json(game, eval_req)));
      return 0;
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Learn playout features by self-play (JSON table)");
  std::string train_file;
  int train_games = 500;
  lud::SearchConfig train_cfg;
  train_cfg.iterations = 32;
  double learn_rate = 0.005;
  lud::TrainOptions train_opts;
  train_cmd->add_option("file", train_file, ".lud file")->required();
  train_cmd->add_option("--games", train_games, "Self-play games")->check(CLI::Range(1, 10'000'000));
  train_cmd->add_option("--iterations", train_cfg.iterations, "Search iterations per self-play move")
      ->check(CLI::Range(1, 10'000'000));
  train_cmd->add_option("--learn-rate", learn_rate, "Weight step per game")->check(CLI::PositiveNumber);
  train_cmd->add_option("--keep", train_opts.keep, "Patterns kept");
  train_cmd->add_option("--candidates", train_opts.candidate_cap, "Candidate pattern cap");
  train_cmd->add_option("--temperature", train_opts.temperature, "Softmax temperature")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", out_path, "Output file");
  train_cmd->callback([&] {
    action = [&] {
      const lud::Game game = load_game(train_file);
      train_cfg.rng_seed = g.seed;
      train_opts.threads = g.threads;
      const auto table = lud::train_features(game, train_games, train_cfg, learn_rate, train_opts);
      json j = lud::to_json(table);
      if (!g.json) {
        for (std::size_t i = 0; i < table.patterns.size(); ++i) {
          j["patterns"][i]["explanation"] = lud::explain_feature(table.patterns[i]);
        }
      }
      write_output(out_path, dump(j));
      return 0;
    };
  });

  // dist
  auto* dist_cmd = app.add_subcommand("dist", "Ludemic distance matrix (CSV)");
  std::vector<std::string> dist_inputs;
  std::string weights_file;
  bool unit_weights = false;
  dist_cmd->add_option("inputs", dist_inputs, "Corpus directories or .lud files")->required();
  dist_cmd->add_option("--weights", weights_file, "Weight table JSON");
  dist_cmd->add_flag("--unit", unit_weights, "Use unit edit costs");
  dist_cmd->add_option("--out", out_path, "Output file");
  dist_cmd->callback([&] {
    action = [&] {
      const auto entries = load_inputs(dist_inputs);
      std::vector<lud::GameDescription> corpus;
      for (const auto& e : entries) corpus.push_back(e.description);
      lud::WeightTable w = unit_weights ? lud::WeightTable::unit() : lud::WeightTable::defaults();
      if (!weights_file.empty()) w = lud::weight_table_from_json(read_json_file(weights_file));
      write_output(out_path, lud::to_csv(lud::distance_matrix(corpus, w, g.threads)));
      return 0;
    };
  });

  // phylo
  auto* phylo_cmd = app.add_subcommand("phylo", "Phylogenetic analysis");
  phylo_cmd->require_subcommand(1);
  auto* nj_cmd = phylo_cmd->add_subcommand("nj", "Neighbor-joining tree (Newick)");
  std::string matrix_file;
  nj_cmd->add_option("matrix", matrix_file, "Distance matrix CSV")->required();
  nj_cmd->add_option("--out", out_path, "Output file");
  nj_cmd->callback([&] {
    action = [&] {
      const auto tree = lud::neighbor_joining(lud::matrix_from_csv(lud::read_file(matrix_file)));
      for (const auto& w : tree.warnings) std::cerr << "warning: " << w << "\n";
      write_output(out_path, lud::to_newick(tree) + "\n");
      return 0;
    };
  });

  auto* fitch_cmd = phylo_cmd->add_subcommand("fitch", "Parsimony reconstruction of a binary trait");
  std::string tree_file, traits_file, trait_keyword;
  std::vector<std::string> trait_games;
  fitch_cmd->add_option("tree", tree_file, "Newick tree")->required();
  auto* traits_opt = fitch_cmd->add_option("--traits", traits_file, "JSON object: leaf name -> bool");
  auto* keyword_opt =
      fitch_cmd->add_option("--keyword", trait_keyword, "Trait = the ludeme keyword occurs in the game");
  fitch_cmd->add_option("--games", trait_games, "Corpus for --keyword");
  traits_opt->excludes(keyword_opt);
  fitch_cmd->add_option("--out", out_path, "Output file");
  fitch_cmd->callback([&] {
    action = [&] {
      const auto tree = lud::tree_from_newick(lud::read_file(tree_file));
      std::map<std::string, bool> traits;
      if (!traits_file.empty()) {
        try {
          traits = read_json_file(traits_file).get<std::map<std::string, bool>>();
        } catch (const json::exception& e) {
          throw lud::Error(lud::ErrorCode::ParseError, traits_file + ": " + e.what());
        }
      } else if (!trait_keyword.empty()) {
        if (trait_games.empty()) throw CLI::ValidationError("--keyword needs --games");
        for (const auto& e : load_inputs(trait_games)) {
          bool present = false;
          std::function<void(const lud::LudemeNode&)> walk = [&](const lud::LudemeNode& n) {
            if (n.is_ludeme() && n.text == trait_keyword) present = true;
            for (const auto& a : n.args) walk(a);
          };
          walk(e.description.root());
          traits[e.description.name()] = present;
        }
      } else {
        throw CLI::ValidationError("fitch needs --traits or --keyword");
      }
      const auto r = lud::fitch_ancestral(tree, traits);
      auto states = [](const std::set<lud::TraitState>& set) {
        json a = json::array();
        for (auto t : set) a.push_back(t == lud::TraitState::Present ? "Present" : "Absent");
        return a;
      };
      json nodes = json::array();
      for (std::size_t v = 0; v < tree.node_count(); ++v) {
        nodes.push_back({{"node", v}, {"name", tree.names[v]}, {"states", states(r.states[v])}});
      }
      write_output(out_path, dump({{"cost", r.cost},
                                   {"root", {{"a", r.root.a}, {"b", r.root.b}, {"offset", r.root.offset}}},
                                   {"root_states", states(r.root_states)},
                                   {"nodes", nodes}}));
      return 0;
    };
  });

  auto* him_cmd = phylo_cmd->add_subcommand("him", "Horizontal influence network (DOT)");
  std::string him_matrix, dates_file;
  std::vector<std::string> him_games;
  double threshold = -1;
  him_cmd->add_option("matrix", him_matrix, "Distance matrix CSV")->required();
  auto* dates_opt = him_cmd->add_option("--dates", dates_file, "JSON object: game name -> year");
  auto* games_opt = him_cmd->add_option("--games", him_games, "Corpus whose metadata gives the dates");
  dates_opt->excludes(games_opt);
  him_cmd->add_option("--threshold", threshold, "Distance threshold (default: median distance)");
  him_cmd->add_option("--out", out_path, "Output file");
  him_cmd->callback([&] {
    action = [&] {
      const auto m = lud::matrix_from_csv(lud::read_file(him_matrix));
      std::map<std::string, int> dates;
      if (!dates_file.empty()) {
        try {
          dates = read_json_file(dates_file).get<std::map<std::string, int>>();
        } catch (const json::exception& e) {
          throw lud::Error(lud::ErrorCode::ParseError, dates_file + ": " + e.what());
        }
      } else if (!him_games.empty()) {
        for (const auto& e : load_inputs(him_games)) dates[e.metadata.name] = e.metadata.earliest_date;
      } else {
        throw CLI::ValidationError("him needs --dates or --games");
      }
      double t = threshold;
      if (t < 0) {
        std::vector<double> off;
        for (std::size_t i = 0; i < m.size(); ++i) {
          for (std::size_t j = i + 1; j < m.size(); ++j) off.push_back(m.at(i, j));
        }
        if (off.empty()) throw lud::Error(lud::ErrorCode::TooFewTaxa, "need at least two games");
        std::sort(off.begin(), off.end());
        const std::size_t n = off.size();
        t = n % 2 ? off[n / 2] : (off[n / 2 - 1] + off[n / 2]) / 2;
      }
      write_output(out_path, lud::to_dot(lud::influence_network(m, dates, t)));
      return 0;
    };
  });

  // recon
  auto* recon_cmd = app.add_subcommand("recon", "Rank rule-set reconstructions (JSON)");
  std::string recon_file;
  recon_cmd->add_option("spec", recon_file, "Reconstruction spec JSON")->required();
  recon_cmd->add_option("--out", out_path, "Output file");
  recon_cmd->callback([&] {
    action = [&] {
      auto spec = lud::recon_spec_from_json(read_json_file(recon_file));
      if (g.seed_given) spec.trials.base_seed = g.seed;
      write_output(out_path, dump(lud::reconstruct_json(spec, g.threads)));
      return 0;
    };
  });

  // enumerate
  auto* enum_cmd = app.add_subcommand("enumerate", "Count reachable positions");
  std::string enum_file, reduction_name = "none";
  bool board_only = false;
  std::size_t enum_budget = 10'000'000;
  enum_cmd->add_option("file", enum_file, ".lud file")->required();
  enum_cmd->add_option("--reduction", reduction_name, "none, symmetry or color")
      ->check(CLI::IsMember({"none", "symmetry", "color"}));
  enum_cmd->add_flag("--board-only", board_only, "Ignore the side to move when counting");
  enum_cmd->add_option("--budget", enum_budget, "Position budget");
  enum_cmd->add_option("--out", out_path, "Output file");
  enum_cmd->callback([&] {
    action = [&] {
      const lud::Game game = load_game(enum_file);
      const auto red = reduction_name == "none"       ? lud::Reduction::None
                       : reduction_name == "symmetry" ? lud::Reduction::Symmetry
                                                      : lud::Reduction::SymmetryAndColor;
      const auto e = lud::enumerate_states(game, red, board_only, enum_budget);
      if (g.json) {
        write_output(out_path, dump({{"game", game.name()},
                                     {"reduction", reduction_name},
                                     {"board_only", board_only},
                                     {"reachable", e.reachable},
                                     {"classes", e.states.size()}}));
      } else {
        write_output(out_path, "reachable " + std::to_string(e.reachable) + "\nclasses " +
                                   std::to_string(e.states.size()) + "\n");
      }
      return 0;
    };
  });

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Game value under perfect play");
  std::string solve_file;
  std::size_t solve_budget = 1'000'000;
  solve_cmd->add_option("file", solve_file, ".lud file")->required();
  solve_cmd->add_option("--budget", solve_budget, "Position budget");
  solve_cmd->add_option("--out", out_path, "Output file");
  solve_cmd->callback([&] {
    action = [&] {
      const lud::Game game = load_game(solve_file);
      const auto sol = lud::solve(game, solve_budget);
      if (g.json) {
        json wins = json::array();
        for (const auto& m : sol.immediate_wins) wins.push_back(lud::to_json(m, game));
        write_output(out_path, dump({{"game", game.name()},
                                     {"value", lud::to_json(sol.value)},
                                     {"positions", sol.positions},
                                     {"immediate_wins", wins}}));
      } else {
        std::string text = "value " + lud::to_string(sol.value) + "\npositions " +
                           std::to_string(sol.positions) + "\nimmediate wins " +
                           std::to_string(sol.immediate_wins.size()) + "\n";
        for (const auto& m : sol.immediate_wins) text += "  " + game.format_move(m) + "\n";
        write_output(out_path, text);
      }
      return 0;
    };
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP/JSON service");
  std::string serve_games = "games", serve_host = "127.0.0.1", static_dir;
  int port = 8080;
  lud::ServiceOptions serve_opts;
  int ttl_seconds = 3600;
  serve_cmd->add_option("--games", serve_games, "Corpus directory");
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--static", static_dir, "Directory of static UI assets served at /");
  serve_cmd->add_option("--ttl", ttl_seconds, "Idle session lifetime in seconds")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--recon-budget", serve_opts.recon_budget, "Most candidates per recon request");
  serve_cmd->add_option("--ai-iterations", serve_opts.ai.iterations, "Default AI search iterations")
      ->check(CLI::Range(1, 1'000'000));
  serve_cmd->add_option("--cors-origin", serve_opts.cors_origin, "Access-Control-Allow-Origin value");
  serve_cmd->callback([&] {
    action = [&] {
      serve_opts.ttl = std::chrono::seconds(ttl_seconds);
      serve_opts.threads = g.threads;
      serve_opts.ai.rng_seed = g.seed;
      lud::Service service(lud::load_corpus(serve_games), serve_opts);
      std::cerr << "listening on http://" << serve_host << ":" << port << "\n";
      return lud::serve(service, serve_host, port, static_dir);
    };
  });

  try {
    app.parse(argc, argv);
    g.seed_given = app.count("--seed") > 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  auto report = [&](std::string_view code, const std::string& message) {
    if (g.json) {
      std::cerr << json{{"error", std::string(code)}, {"message", message}}.dump() << "\n";
    } else {
      std::cerr << "error: " << message << "\n";
    }
  };
  try {
    return action ? action() : kUsageError;
  } catch (const CLI::ValidationError& e) {
    report("Usage", e.what());
    return kUsageError;
  } catch (const lud::Error& e) {
    report(lud::to_string(e.code()), e.what());
    return kDataError;
  } catch (const std::exception& e) {
    report("Internal", e.what());
    return kDataError;
  }
}
