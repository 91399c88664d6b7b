#include "lud/service.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include <httplib.h>

#include "lud/random.hpp"

namespace lud {

nlohmann::json to_json(const Move& m, const Game& g) {
  return {{"player", m.player},
          {"kind", m.kind == Move::Kind::Add ? "Add" : "Step"},
          {"from", m.from},
          {"to", m.to},
          {"text", g.format_move(m)}};
}

nlohmann::json to_json(const Outcome& o) {
  nlohmann::json j = {{"status", o.status == Outcome::Status::Ongoing ? "Ongoing"
                                  : o.status == Outcome::Status::Win ? "Win"
                                                                      : "Draw"},
                      {"winner", o.winner},
                      {"capped", o.capped},
                      {"text", to_string(o)}};
  return j;
}

nlohmann::json state_json(const Game& g, const GameState& s) {
  const BoardGraph& b = g.board();
  nlohmann::json cells = nlohmann::json::array();
  for (int c = 0; c < b.size(); ++c) {
    const Occupant& o = s.at(c);
    nlohmann::json neighbors = nlohmann::json::array();
    for (const auto& n : b.neighbors(c)) neighbors.push_back(n.cell);
    cells.push_back({{"index", c},
                     {"x", b.layout()[c].x},
                     {"y", b.layout()[c].y},
                     {"neighbors", std::move(neighbors)},
                     {"player", o.player},
                     {"piece", o.empty() ? nlohmann::json(nullptr)
                                         : nlohmann::json(g.piece_types()[o.type])}});
  }
  const Outcome out = g.status(s);
  nlohmann::json legal = nlohmann::json::array();
  if (!out.terminal()) {
    for (const auto& m : g.legal_moves(s)) legal.push_back(to_json(m, g));
  }
  nlohmann::json hand = nlohmann::json::object();
  for (int p = 1; p <= 2; ++p) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t t = 0; t < g.piece_types().size(); ++t) {
      row[g.piece_types()[t]] = s.in_hand(p, static_cast<int>(t));
    }
    hand[std::to_string(p)] = std::move(row);
  }
  return {{"shape", b.shape()},
          {"cells", std::move(cells)},
          {"mover", s.mover()},
          {"move_count", s.move_count()},
          {"in_hand", std::move(hand)},
          {"outcome", to_json(out)},
          {"legal_moves", std::move(legal)}};
}

Move move_from_json(const Game& g, const GameState& s, const nlohmann::json& j) {
  Move m;
  if (j.is_string()) {
    m = g.parse_move(j.get<std::string>());
    m.player = s.mover();
    return m;
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "move must be an object or a string");
  try {
    const std::string kind = j.value("kind", std::string("Add"));
    if (kind == "Add") {
      m.kind = Move::Kind::Add;
    } else if (kind == "Step") {
      m.kind = Move::Kind::Step;
    } else {
      throw Error(ErrorCode::ParseError, "unknown move kind '" + kind + "'");
    }
    m.from = j.value("from", -1);
    m.to = j.at("to").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("move: ") + e.what());
  }
  m.player = s.mover();
  return m;
}

nlohmann::json evaluate_json(const Game& g, const EvalRequest& req) {
  TrialSpec spec;
  spec.num_games = req.games;
  spec.ladder_games = req.ladder_games;
  spec.base_seed = req.seed;
  spec.threads = req.threads;
  return to_json(evaluate(g, spec, ladder_from_json(req.ladder)));
}

nlohmann::json reconstruct_json(const ReconstructionSpec& spec, int threads) {
  return to_json(reconstruct(spec, threads));
}

namespace {

Response error_response(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", std::string(code)}, {"message", message}}};
}

Response error_response(int status, const Error& e) {
  return error_response(status, to_string(e.code()), e.what());
}

std::int64_t query_int(const std::map<std::string, std::string>& q, const std::string& key,
                       std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
  auto it = q.find(key);
  if (it == q.end()) return fallback;
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size() || v < lo || v > hi) {
    throw Error(ErrorCode::InvalidArgument, "bad value for '" + key + "': " + it->second);
  }
  return v;
}

std::uint64_t query_seed(const std::map<std::string, std::string>& q, std::uint64_t fallback) {
  auto it = q.find("seed");
  if (it == q.end()) return fallback;
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size() || it->second[0] == '-') {
    throw Error(ErrorCode::InvalidArgument, "bad seed: " + it->second);
  }
  return v;
}

std::vector<int> parse_ladder(const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw Error(ErrorCode::InvalidArgument, "bad ladder entry '" + item + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace

struct Service::Session {
  std::mutex mutex;
  std::string id;
  std::string game_id;
  std::shared_ptr<const Game> game;
  GameState state;
  std::vector<Move> history;
  SearchConfig ai;
  int human_seat = 1;
  std::chrono::steady_clock::time_point last_access;

  void check_replay() const {
    GameState s = game->initial_state();
    for (const auto& m : history) s = game->apply(s, m);
    if (!(s == state)) throw std::logic_error("session " + id + ": history does not replay");
  }
};

Service::Service(std::vector<CorpusEntry> corpus, ServiceOptions options)
    : corpus_(std::move(corpus)), options_(std::move(options)) {
  std::random_device rd;
  id_salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  for (const auto& e : corpus_) {
    const std::string id = e.path.empty() ? e.metadata.name : e.path.stem().string();
    ids_.push_back(id);
    if (!e.description.partial()) games_[id] = std::make_shared<const Game>(compile(e.description));
  }
}

const CorpusEntry* Service::find_game(const std::string& key) const {
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    if (ids_[i] == key || corpus_[i].metadata.name == key) return &corpus_[i];
  }
  return nullptr;
}

Response Service::list_games() const {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    const auto& e = corpus_[i];
    auto meta = to_json(e.metadata);
    meta["id"] = ids_[i];
    meta["playable"] = !e.description.partial();
    meta["description"] = canonical_text(e.description);
    out.push_back(std::move(meta));
  }
  return {200, out};
}

std::string Service::new_id() {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(mix64(id_salt_ ^ mix64(++id_counter_))));
  return buf;
}

nlohmann::json Service::session_json(const Session& s) const {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& m : s.history) history.push_back(to_json(m, *s.game));
  return {{"id", s.id},
          {"game", s.game_id},
          {"name", s.game->name()},
          {"human_seat", s.human_seat},
          {"ai", {{"iterations", s.ai.iterations},
                  {"exploration_c", s.ai.exploration_c},
                  {"seed", s.ai.rng_seed},
                  {"features", s.ai.features != nullptr}}},
          {"history", std::move(history)},
          {"state", state_json(*s.game, s.state)}};
}

void Service::ai_turn(Session& s, nlohmann::json& replies) const {
  while (!s.game->status(s.state).terminal() && s.state.mover() != s.human_seat) {
    SearchConfig cfg = s.ai;
    cfg.rng_seed = derive_seed(s.ai.rng_seed, s.history.size());
    const Move m = choose_move(*s.game, s.state, cfg);
    s.state = s.game->apply(s.state, m);
    s.history.push_back(m);
    replies.push_back(to_json(m, *s.game));
  }
  s.check_replay();
}

Response Service::create_match(const nlohmann::json& body) {
  expire();
  if (!body.is_object() || !body.contains("game") || !body["game"].is_string()) {
    return error_response(400, "InvalidArgument", "body needs a \"game\" string");
  }
  const std::string key = body["game"].get<std::string>();
  const CorpusEntry* entry = find_game(key);
  if (!entry) return error_response(404, "UnknownGame", "no game '" + key + "'");
  const std::string game_id = ids_[entry - corpus_.data()];
  auto it = games_.find(game_id);
  if (it == games_.end()) {
    return error_response(400, "InvalidArgument", "'" + key + "' has no rules and cannot be played");
  }
  auto s = std::make_shared<Session>();
  s->game_id = game_id;
  s->game = it->second;
  s->ai = options_.ai;
  try {
    s->human_seat = body.value("human_seat", 1);
    if (s->human_seat != 1 && s->human_seat != 2) {
      return error_response(400, "InvalidArgument", "human_seat must be 1 or 2");
    }
    if (body.contains("ai")) {
      const auto& a = body["ai"];
      if (!a.is_object()) return error_response(400, "InvalidArgument", "ai must be an object");
      s->ai.iterations = a.value("iterations", s->ai.iterations);
      s->ai.exploration_c = a.value("exploration_c", s->ai.exploration_c);
      s->ai.rng_seed = a.value("seed", s->ai.rng_seed);
      if (a.contains("features")) {
        s->ai.features = std::make_shared<const FeatureTable>(feature_table_from_json(a["features"]));
      }
      if (s->ai.iterations < 1 || s->ai.iterations > 1'000'000) {
        return error_response(400, "InvalidArgument", "iterations must be in [1, 1000000]");
      }
      if (!(s->ai.exploration_c >= 0)) {
        return error_response(400, "InvalidArgument", "exploration_c must be >= 0");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "InvalidArgument", e.what());
  } catch (const Error& e) {
    return error_response(400, e);
  }
  s->state = s->game->initial_state();
  nlohmann::json replies = nlohmann::json::array();
  ai_turn(*s, replies);
  s->last_access = options_.clock();
  {
    std::lock_guard lock(mutex_);
    s->id = new_id();
    sessions_[s->id] = s;
  }
  auto out = session_json(*s);
  out["ai_moves"] = std::move(replies);
  return {201, out};
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  it->second->last_access = options_.clock();
  return it->second;
}

Response Service::get_match(const std::string& id) {
  expire();
  auto s = find_session(id);
  if (!s) return error_response(404, "UnknownMatch", "no match '" + id + "'");
  std::lock_guard lock(s->mutex);
  return {200, session_json(*s)};
}

Response Service::post_move(const std::string& id, const nlohmann::json& body) {
  expire();
  auto s = find_session(id);
  if (!s) return error_response(404, "UnknownMatch", "no match '" + id + "'");
  std::lock_guard lock(s->mutex);
  const Outcome before = s->game->status(s->state);
  if (before.terminal()) {
    return error_response(409, "CalledOnTerminal", "match is over: " + to_string(before));
  }
  if (!body.is_object() || !body.contains("move")) {
    return error_response(400, "InvalidArgument", "body needs a \"move\"");
  }
  Move m;
  try {
    m = move_from_json(*s->game, s->state, body["move"]);
  } catch (const Error& e) {
    return error_response(400, e);
  }
  const auto legal = s->game->legal_moves(s->state);
  if (std::find(legal.begin(), legal.end(), m) == legal.end()) {
    auto r = error_response(409, "IllegalMove", s->game->format_move(m) + " is not legal");
    r.body["legal_moves"] = nlohmann::json::array();
    for (const auto& l : legal) r.body["legal_moves"].push_back(to_json(l, *s->game));
    return r;
  }
  s->state = s->game->apply(s->state, m);
  s->history.push_back(m);
  nlohmann::json replies = nlohmann::json::array();
  ai_turn(*s, replies);
  auto out = session_json(*s);
  out["ai_moves"] = std::move(replies);
  return {200, out};
}

Response Service::reconstruct(const nlohmann::json& body,
                              const std::map<std::string, std::string>& query) {
  try {
    ReconstructionSpec spec = recon_spec_from_json(body);
    spec.trials.base_seed = query_seed(query, spec.trials.base_seed);
    const std::size_t work = std::min(candidate_count(spec), spec.budget);
    if (work > options_.recon_budget) {
      return error_response(413, "BudgetExceeded",
                            std::to_string(work) + " candidates exceed the server budget of " +
                                std::to_string(options_.recon_budget));
    }
    const auto per_page = query_int(query, "per_page", 50, 1, 10000);
    const auto page = query_int(query, "page", 1, 1, 1'000'000);
    const nlohmann::json ranked = reconstruct_json(spec, options_.threads);
    nlohmann::json slice = nlohmann::json::array();
    const std::size_t first = static_cast<std::size_t>((page - 1) * per_page);
    for (std::size_t i = first; i < ranked.size() && i < first + per_page; ++i) slice.push_back(ranked[i]);
    return {200,
            {{"total", ranked.size()}, {"page", page}, {"per_page", per_page}, {"candidates", slice}}};
  } catch (const Error& e) {
    return error_response(400, e);
  }
}

Response Service::evaluate(const std::string& game, const std::map<std::string, std::string>& query) {
  const CorpusEntry* entry = find_game(game);
  if (!entry) return error_response(404, "UnknownGame", "no game '" + game + "'");
  auto it = games_.find(ids_[entry - corpus_.data()]);
  if (it == games_.end()) {
    return error_response(400, "InvalidArgument", "'" + game + "' has no rules to evaluate");
  }
  try {
    EvalRequest req;
    req.seed = query_seed(query, req.seed);
    req.games = static_cast<int>(query_int(query, "games", req.games, 1, 100000));
    req.ladder_games = static_cast<int>(query_int(query, "ladder_games", req.ladder_games, 0, 100000));
    if (auto l = query.find("ladder"); l != query.end()) req.ladder = parse_ladder(l->second);
    req.threads = options_.threads;
    return {200, evaluate_json(*it->second, req)};
  } catch (const Error& e) {
    return error_response(400, e);
  }
}

std::size_t Service::expire() {
  const auto now = options_.clock();
  std::lock_guard lock(mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_access > options_.ttl) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t Service::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(2) + "\n", "application/json");
}

std::map<std::string, std::string> query_map(const httplib::Request& req) {
  std::map<std::string, std::string> q;
  for (const auto& [k, v] : req.params) q[k] = v;
  return q;
}

bool parse_body(const httplib::Request& req, httplib::Response& res, nlohmann::json& out) {
  try {
    out = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
    return true;
  } catch (const nlohmann::json::exception& e) {
    reply(res, error_response(400, "InvalidArgument", std::string("bad JSON: ") + e.what()));
    return false;
  }
}

}  // namespace

void mount(Service& service, httplib::Server& server) {
  server.set_default_headers({{"Access-Control-Allow-Origin", service.options().cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/games", [&service](const httplib::Request&, httplib::Response& res) {
    reply(res, service.list_games());
  });
  server.Get(R"(/games/([^/]+)/eval)", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.evaluate(req.matches[1], query_map(req)));
  });
  server.Post("/matches", [&service](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (parse_body(req, res, body)) reply(res, service.create_match(body));
  });
  server.Get(R"(/matches/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_match(req.matches[1]));
  });
  server.Post(R"(/matches/([^/]+)/moves)", [&service](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (parse_body(req, res, body)) reply(res, service.post_move(req.matches[1], body));
  });
  server.Post("/recon", [&service](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (parse_body(req, res, body)) reply(res, service.reconstruct(body, query_map(req)));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    reply(res, error_response(500, "Internal", what));
  });
}

int serve(Service& service, const std::string& host, int port, const std::string& static_dir) {
  httplib::Server server;
  mount(service, server);
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
    throw Error(ErrorCode::IoError, "cannot serve " + static_dir);
  }
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return 0;
}

}  // namespace lud
