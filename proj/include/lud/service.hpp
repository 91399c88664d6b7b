#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lud/corpus.hpp"
#include "lud/quality.hpp"
#include "lud/recon.hpp"

namespace httplib {
class Server;
}

namespace lud {

nlohmann::json to_json(const Move& m, const Game& g);
nlohmann::json to_json(const Outcome& o);
// Board layout, occupants, mover, outcome and the legal moves.
nlohmann::json state_json(const Game& g, const GameState& s);
// {"kind": "Add"|"Step", "from": i, "to": j} or a trace line "1 Add - 4".
// The player is always the mover of `s`. Throws ParseError.
Move move_from_json(const Game& g, const GameState& s, const nlohmann::json& j);

// Evaluation settings shared by `ludii eval` and GET /games/{id}/eval.
struct EvalRequest {
  int games = 100;
  int ladder_games = 0;  // 0 = games
  std::uint64_t seed = 0;
  std::vector<int> ladder = {16, 64, 256, 1024};
  int threads = 1;
};
nlohmann::json evaluate_json(const Game& g, const EvalRequest& req);

// Ranked list for a recon spec, as printed by `ludii recon`.
nlohmann::json reconstruct_json(const ReconstructionSpec& spec, int threads);

struct ServiceOptions {
  std::chrono::seconds ttl{3600};
  std::size_t recon_budget = 2000;  // most candidates one request may score
  int threads = 1;
  SearchConfig ai;  // defaults for POST /matches
  std::string cors_origin = "*";
  std::function<std::chrono::steady_clock::time_point()> clock = std::chrono::steady_clock::now;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Request handlers independent of the HTTP layer. Thread-safe: the session
// table has its own lock and each session serializes its mutations.
class Service {
 public:
  Service(std::vector<CorpusEntry> corpus, ServiceOptions options = {});

  Response list_games() const;
  // Body: {"game": id or name, "human_seat": 1|2, "ai": agent settings}.
  Response create_match(const nlohmann::json& body);
  Response get_match(const std::string& id);
  // Body: {"move": ...} in the move_from_json forms.
  Response post_move(const std::string& id, const nlohmann::json& body);
  // Paged ranking; `query` may carry seed, page (1-based) and per_page.
  Response reconstruct(const nlohmann::json& spec, const std::map<std::string, std::string>& query);
  // Query keys: seed, games, ladder_games, ladder (comma separated).
  Response evaluate(const std::string& game, const std::map<std::string, std::string>& query);

  // Drops sessions idle for longer than the TTL; returns how many.
  std::size_t expire();
  std::size_t session_count() const;
  const ServiceOptions& options() const { return options_; }

 private:
  struct Session;
  const CorpusEntry* find_game(const std::string& key) const;
  std::shared_ptr<Session> find_session(const std::string& id);
  nlohmann::json session_json(const Session& s) const;
  void ai_turn(Session& s, nlohmann::json& replies) const;
  std::string new_id();

  std::vector<CorpusEntry> corpus_;
  std::vector<std::string> ids_;  // file stems, parallel to corpus_
  std::map<std::string, std::shared_ptr<const Game>> games_;
  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t id_counter_ = 0;
  std::uint64_t id_salt_ = 0;
};

// Registers the routes (with CORS headers) on `server`.
void mount(Service& service, httplib::Server& server);

// Blocks serving HTTP on host:port. `static_dir`, when set, is served at /.
int serve(Service& service, const std::string& host, int port, const std::string& static_dir = {});

}  // namespace lud
