#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "lud/corpus.hpp"
#include "lud/distance.hpp"
#include "oracles.hpp"
#include "trees.hpp"

using namespace lud;
using fixture::random_tree;
using fixture::to_oracle;

namespace {

std::vector<GameDescription> corpus_descriptions() {
  std::vector<GameDescription> out;
  for (const auto& e : load_corpus(fixture::games_dir())) out.push_back(e.description);
  return out;
}

}  // namespace

TEST_CASE("wed: identity") {
  for (const auto& gd : corpus_descriptions()) {
    CHECK(wed(gd, gd) == 0.0);
    CHECK(wed(gd, gd, WeightTable::unit()) == 0.0);
  }
}

TEST_CASE("wed: Tic-Tac-Toe against line 4 on a 5x5 board is two numeric edits") {
  const auto a = load_description(fixture::kTicTacToe);
  const auto b = load_description(
      "(game Tic-Tac-Toe (players White Black) (equipment (board (square 5) diagonals)) "
      "(rules (play (add (piece Own) (board Empty))) (end (win All (line 4 Own Any)))))");
  CHECK(wed(a, b, WeightTable::unit()) == 2.0);
  CHECK(wed(a, b) == 2.0);
  // The two integers are the only differing leaves, so no script is cheaper.
  const auto w = WeightTable::unit();
  CHECK(tree_edit_distance(a.root(), b.root(), w) == 2 * w.numeric);
}

TEST_CASE("wed: a renamed copy costs one identifier relabel") {
  const auto a = fixture::corpus_description("mutorere");
  std::string text = canonical_text(a);
  text.replace(text.find("MuTorere"), 8, "MuTorereCopy");
  const auto b = load_description(text);
  const DistanceMatrix m = distance_matrix({a, b});
  CHECK(m.at(0, 1) == WeightTable::defaults().relabel);
  CHECK(m.at(1, 0) == m.at(0, 1));
}

TEST_CASE("tree edit distance equals the exhaustive mapping oracle on small trees") {
  std::mt19937_64 rng(8);
  for (const WeightTable& w : {WeightTable::unit(), WeightTable::defaults()}) {
    for (int i = 0; i < 150; ++i) {
      const LudemeNode a = random_tree(rng, 1 + static_cast<int>(rng() % 8));
      const LudemeNode b = random_tree(rng, 1 + static_cast<int>(rng() % 8));
      const double expected = oracle::edit_distance_by_mappings(to_oracle(a), to_oracle(b), to_oracle(w));
      CHECK_MESSAGE(tree_edit_distance(a, b, w) == doctest::Approx(expected), serialize(a) << " vs " << serialize(b));
    }
  }
}

TEST_CASE("tree edit distance: symmetry, identity and triangle inequality on trees up to 30 nodes") {
  std::mt19937_64 rng(21);
  const WeightTable w = WeightTable::defaults();
  for (int i = 0; i < 150; ++i) {
    const LudemeNode a = random_tree(rng, 1 + static_cast<int>(rng() % 30));
    const LudemeNode b = random_tree(rng, 1 + static_cast<int>(rng() % 30));
    const LudemeNode c = random_tree(rng, 1 + static_cast<int>(rng() % 30));
    const double ab = tree_edit_distance(a, b, w);
    CHECK(ab >= 0);
    CHECK(ab == tree_edit_distance(b, a, w));
    CHECK(tree_edit_distance(a, a, w) == 0);
    CHECK((ab > 0) == !(a == b));
    CHECK(tree_edit_distance(a, c, w) <= ab + tree_edit_distance(b, c, w) + 1e-9);
  }
}

TEST_CASE("scaling every cost by k scales every distance by k") {
  const auto corpus = corpus_descriptions();
  for (double k : {0.5, 3.0}) {
    const WeightTable w = WeightTable::defaults().scaled(k);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (std::size_t j = i + 1; j < corpus.size(); ++j) {
        CHECK(wed(corpus[i], corpus[j], w) == doctest::Approx(k * wed(corpus[i], corpus[j])));
      }
    }
  }
}

TEST_CASE("corpus matrix: metric under unit costs, thread-independent, golden") {
  const auto corpus = corpus_descriptions();
  REQUIRE(corpus.size() >= 10);
  const DistanceMatrix m = distance_matrix(corpus, WeightTable::unit());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.at(i, i) == 0.0);
    for (std::size_t j = 0; j < m.size(); ++j) {
      CHECK(m.at(i, j) == m.at(j, i));
      if (i != j) CHECK(m.at(i, j) > 0);
      for (std::size_t k = 0; k < m.size(); ++k) CHECK(m.at(i, k) <= m.at(i, j) + m.at(j, k) + 1e-9);
    }
  }
  const DistanceMatrix d1 = distance_matrix(corpus);
  const DistanceMatrix d4 = distance_matrix(corpus, WeightTable::defaults(), 4);
  CHECK(to_csv(d1) == to_csv(d4));
  CHECK(to_csv(d1) == read_file(fixture::golden_dir() + "/corpus_distance.csv"));
}

TEST_CASE("CSV round trip and malformed matrices") {
  const DistanceMatrix m = distance_matrix(corpus_descriptions());
  const DistanceMatrix back = matrix_from_csv(to_csv(m));
  CHECK(back.labels == m.labels);
  CHECK(back.d == m.d);
  for (const char* bad : {"", ",a,b\na,0,1\nb,2,0\n", ",a,b\na,0,1\n", ",a,b\na,1,1\nb,1,0\n",
                          ",a,b\na,0,x\nb,x,0\n", ",a,b\na,0,inf\nb,inf,0\n"}) {
    try {
      matrix_from_csv(bad);
      FAIL_CHECK("accepted: " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2) == "2");
  CHECK(std::stod(format_number(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("distance_matrix rejects duplicate names") {
  const auto a = fixture::corpus_description("tictactoe");
  try {
    distance_matrix({a, a});
    FAIL("expected DuplicateName");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateName);
  }
}

TEST_CASE("weight tables: defaults, JSON round trip, invalid costs") {
  const WeightTable d = WeightTable::defaults();
  CHECK(d.indel_cost("Board") == 2.0);
  CHECK(d.indel_cost("EndRule") == 2.0);
  CHECK(d.indel_cost("PlayRule") == 1.0);
  CHECK(d.cross_relabel == 2.0);
  const WeightTable back = weight_table_from_json(to_json(d));
  CHECK(to_json(back) == to_json(d));
  try {
    weight_table_from_json({{"relabel", -1}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}
