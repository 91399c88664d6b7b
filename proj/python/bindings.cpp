// pybind11 module ludii_lite._core. Structured values cross the boundary as
// JSON text; the package __init__ turns them into Python objects.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lud/corpus.hpp"
#include "lud/distance.hpp"
#include "lud/phylo.hpp"
#include "lud/quality.hpp"
#include "lud/recon.hpp"
#include "lud/service.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

lud::Reduction reduction_from(const std::string& name) {
  if (name == "none") return lud::Reduction::None;
  if (name == "symmetry") return lud::Reduction::Symmetry;
  if (name == "color") return lud::Reduction::SymmetryAndColor;
  throw lud::Error(lud::ErrorCode::InvalidArgument, "reduction must be none, symmetry or color");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ludii-lite core bindings";

  static py::exception<lud::Error> error(m, "LudError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const lud::Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(py::str(e.what()));
      exc.attr("code") = py::str(std::string(lud::to_string(e.code())));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("canonical_text", [](const std::string& text, bool allow_partial) {
    return lud::canonical_text(lud::load_description(text, allow_partial));
  }, py::arg("text"), py::arg("allow_partial") = false);
  m.def("grammar_text", [] { return lud::grammar_text(); });

  py::class_<lud::Game, std::shared_ptr<lud::Game>>(m, "Game")
      .def_property_readonly("name", &lud::Game::name)
      .def_property_readonly("cell_count", [](const lud::Game& g) { return g.board().size(); })
      .def_property_readonly("description", [](const lud::Game& g) { return lud::canonical_text(g.description()); });

  m.def("compile", [](const std::string& text) {
    return std::make_shared<lud::Game>(lud::compile(lud::load_description(text)));
  }, py::arg("text"));

  m.def("initial_state_json", [](const lud::Game& g) {
    return lud::state_json(g, g.initial_state()).dump();
  });
  // Replays a trace (one move per line) and returns the resulting state.
  m.def("replay_json", [](const lud::Game& g, const std::string& trace) {
    lud::GameState s = g.initial_state();
    for (const auto& mv : lud::parse_trace(g, trace)) s = g.apply(s, mv);
    return lud::state_json(g, s).dump();
  });

  m.def("solve_json", [](const lud::Game& g, std::size_t budget) {
    const auto sol = lud::solve(g, budget);
    json wins = json::array();
    for (const auto& mv : sol.immediate_wins) wins.push_back(lud::to_json(mv, g));
    return json{{"value", lud::to_json(sol.value)}, {"positions", sol.positions}, {"immediate_wins", wins}}.dump();
  }, py::arg("game"), py::arg("budget") = 1'000'000);

  m.def("enumerate_states", [](const lud::Game& g, const std::string& reduction, bool board_only) {
    py::gil_scoped_release release;
    const auto e = lud::enumerate_states(g, reduction_from(reduction), board_only);
    return std::make_pair(e.reachable, e.states.size());
  }, py::arg("game"), py::arg("reduction") = "none", py::arg("board_only") = false);

  m.def("evaluate_json", [](const lud::Game& g, int games, int ladder_games, std::uint64_t seed,
                            std::vector<int> ladder, int threads) {
    lud::EvalRequest req;
    req.games = games;
    req.ladder_games = ladder_games;
    req.seed = seed;
    req.ladder = std::move(ladder);
    req.threads = threads;
    py::gil_scoped_release release;
    return lud::evaluate_json(g, req).dump();
  }, py::arg("game"), py::arg("games") = 100, py::arg("ladder_games") = 0, py::arg("seed") = 0,
     py::arg("ladder") = std::vector<int>{16, 64, 256, 1024}, py::arg("threads") = 1);

  m.def("train_features_json", [](const lud::Game& g, int games, int iterations, double learn_rate,
                                  std::uint64_t seed, std::size_t keep, int threads) {
    lud::SearchConfig cfg;
    cfg.iterations = iterations;
    cfg.rng_seed = seed;
    lud::TrainOptions opts;
    opts.keep = keep;
    opts.threads = threads;
    py::gil_scoped_release release;
    return lud::to_json(lud::train_features(g, games, cfg, learn_rate, opts)).dump();
  }, py::arg("game"), py::arg("games") = 500, py::arg("iterations") = 32, py::arg("learn_rate") = 0.005,
     py::arg("seed") = 0, py::arg("keep") = 64, py::arg("threads") = 1);

  m.def("choose_move_json", [](const lud::Game& g, const std::string& trace, int iterations,
                               std::uint64_t seed) {
    lud::GameState s = g.initial_state();
    for (const auto& mv : lud::parse_trace(g, trace)) s = g.apply(s, mv);
    lud::SearchConfig cfg;
    cfg.iterations = iterations;
    cfg.rng_seed = seed;
    return lud::to_json(lud::choose_move(g, s, cfg), g).dump();
  }, py::arg("game"), py::arg("trace") = "", py::arg("iterations") = 1000, py::arg("seed") = 0);

  m.def("wed", [](const std::string& a, const std::string& b, bool unit) {
    const auto w = unit ? lud::WeightTable::unit() : lud::WeightTable::defaults();
    return lud::wed(lud::load_description(a, true), lud::load_description(b, true), w);
  }, py::arg("a"), py::arg("b"), py::arg("unit") = false);

  m.def("distance_csv", [](const std::vector<std::string>& texts, bool unit, int threads) {
    std::vector<lud::GameDescription> corpus;
    for (const auto& t : texts) corpus.push_back(lud::load_description(t, true));
    const auto w = unit ? lud::WeightTable::unit() : lud::WeightTable::defaults();
    return lud::to_csv(lud::distance_matrix(corpus, w, threads));
  }, py::arg("texts"), py::arg("unit") = false, py::arg("threads") = 1);

  m.def("corpus_distance_csv", [](const std::string& dir, int threads) {
    std::vector<lud::GameDescription> corpus;
    for (const auto& e : lud::load_corpus(dir)) corpus.push_back(e.description);
    return lud::to_csv(lud::distance_matrix(corpus, lud::WeightTable::defaults(), threads));
  }, py::arg("directory"), py::arg("threads") = 1);

  m.def("neighbor_joining", [](const std::string& csv) {
    return lud::to_newick(lud::neighbor_joining(lud::matrix_from_csv(csv)));
  }, py::arg("csv"));

  m.def("fitch_cost", [](const std::string& newick, const std::map<std::string, bool>& traits) {
    return lud::fitch_ancestral(lud::tree_from_newick(newick), traits).cost;
  }, py::arg("newick"), py::arg("traits"));

  m.def("influence_dot", [](const std::string& csv, const std::map<std::string, int>& dates,
                            double threshold) {
    return lud::to_dot(lud::influence_network(lud::matrix_from_csv(csv), dates, threshold));
  }, py::arg("csv"), py::arg("dates"), py::arg("threshold"));

  m.def("corpus_json", [](const std::string& dir) {
    json out = json::array();
    for (const auto& e : lud::load_corpus(dir)) {
      auto j = lud::to_json(e.metadata);
      j["file"] = e.path.filename().string();
      j["description"] = lud::canonical_text(e.description);
      j["math_profile"] = lud::math_profile(e.description);
      out.push_back(std::move(j));
    }
    return out.dump();
  }, py::arg("directory"));

  m.def("reconstruct_json", [](const std::string& spec_json, int threads) {
    json spec_j;
    try {
      spec_j = json::parse(spec_json);
    } catch (const json::exception& e) {
      throw lud::Error(lud::ErrorCode::InvalidArgument, e.what());
    }
    const auto spec = lud::recon_spec_from_json(spec_j);
    py::gil_scoped_release release;
    return lud::reconstruct_json(spec, threads).dump();
  }, py::arg("spec_json"), py::arg("threads") = 1);
}
