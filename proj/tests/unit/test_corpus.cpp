#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "lud/corpus.hpp"

using namespace lud;
namespace fs = std::filesystem;

namespace {

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ludii-test-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file, std::ios::binary) << text;
  }
  void copy_game(const std::string& stem, const std::string& as) const {
    fs::copy_file(fs::path(fixture::games_dir()) / (stem + ".lud"), path / (as + ".lud"));
    fs::copy_file(fs::path(fixture::games_dir()) / (stem + ".json"), path / (as + ".json"));
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("classify_period: boundaries and monotonicity") {
  CHECK(classify_period(-3500) == Period::Ancient);
  CHECK(classify_period(1750) == Period::Modern);
  CHECK(classify_period(500) == Period::Early);
  CHECK(classify_period(499) == Period::Ancient);
  CHECK(classify_period(1499) == Period::Early);
  CHECK(classify_period(1500) == Period::Modern);
  Period prev = Period::Ancient;
  for (int y = -5000; y <= 2500; y += 7) {
    const Period p = classify_period(y);
    CHECK(static_cast<int>(p) >= static_cast<int>(prev));
    prev = p;
  }
}

TEST_CASE("math_profile: tags propagate from ludemes") {
  const MathProfile ttt = math_profile(load_description(fixture::kTicTacToe));
  const auto& sq = LudemeLibrary::standard().find("square")->concept_tags;
  const auto& line = LudemeLibrary::standard().find("line")->concept_tags;
  REQUIRE_FALSE(sq.empty());
  REQUIRE_FALSE(line.empty());
  for (const auto& t : sq) CHECK(ttt.count(t) == 1);
  for (const auto& t : line) CHECK(ttt.count(t) == 1);
  CHECK(ttt.count("grid") == 1);
  CHECK(ttt.count("collinearity") == 1);

  CHECK(math_profile(fixture::corpus_description("hex5")).count("connectivity") == 1);

  const auto all = LudemeLibrary::standard().all_concept_tags();
  for (const auto& e : load_corpus(fixture::games_dir())) {
    for (const auto& [tag, n] : math_profile(e.description)) {
      CHECK(all.count(tag) == 1);
      CHECK(n > 0);
    }
  }
}

TEST_CASE("math_profile: a rules-less stub only has equipment tags") {
  const auto stub = fixture::corpus_description("senet-stub");
  REQUIRE(stub.partial());
  std::set<std::string> equipment_tags;
  for (const char* k : {"game", "players", "equipment", "board", "rectangle", "piece"}) {
    for (const auto& t : LudemeLibrary::standard().find(k)->concept_tags) equipment_tags.insert(t);
  }
  for (const auto& [tag, n] : math_profile(stub)) CHECK(equipment_tags.count(tag) == 1);
}

TEST_CASE("load_corpus: the shipped corpus loads with metadata") {
  const auto corpus = load_corpus(fixture::games_dir());
  CHECK(corpus.size() >= 10);
  std::set<std::string> names;
  for (const auto& e : corpus) {
    CHECK(e.metadata.name == e.description.name());
    CHECK(e.metadata.partial == e.description.partial());
    CHECK_FALSE(e.metadata.region.empty());
    CHECK_FALSE(e.metadata.sources.empty());
    names.insert(e.metadata.name);
  }
  CHECK(names.size() == corpus.size());
  CHECK(std::is_sorted(corpus.begin(), corpus.end(),
                       [](const CorpusEntry& a, const CorpusEntry& b) { return a.path.filename() < b.path.filename(); }));
  for (const auto& e : corpus) {
    if (e.metadata.name == "Senet") CHECK(e.metadata.period() == Period::Ancient);
    if (e.metadata.name == "MuTorere") CHECK(e.metadata.period() == Period::Modern);
  }
}

TEST_CASE("load_corpus: missing or disagreeing sidecars") {
  {
    TempDir d("nosidecar");
    d.copy_game("tictactoe", "a");
    fs::remove(d.path / "a.json");
    CHECK(code_of([&] { load_corpus(d.path); }) == ErrorCode::MetadataMismatch);
  }
  {
    TempDir d("wrongname");
    d.copy_game("tictactoe", "a");
    d.write("a.json", R"({"name": "Other", "region": "x", "earliest_date": 1, "sources": ["s"]})");
    CHECK(code_of([&] { load_corpus(d.path); }) == ErrorCode::MetadataMismatch);
  }
  {
    TempDir d("badjson");
    d.copy_game("tictactoe", "a");
    d.write("a.json", "{");
    CHECK(code_of([&] { load_corpus(d.path); }) == ErrorCode::MetadataMismatch);
  }
}

TEST_CASE("load_corpus: duplicate names and parse errors naming the file") {
  {
    TempDir d("dupes");
    d.copy_game("tictactoe", "a");
    d.copy_game("tictactoe", "b");
    CHECK(code_of([&] { load_corpus(d.path); }) == ErrorCode::DuplicateName);
  }
  {
    TempDir d("parse");
    d.copy_game("tictactoe", "a");
    d.write("broken.lud", "(game Broken (players A B)");
    d.write("broken.json", R"({"name": "Broken", "region": "x", "earliest_date": 1, "sources": ["s"]})");
    try {
      load_corpus(d.path);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("broken.lud") != std::string::npos);
    }
  }
  CHECK(code_of([] { load_corpus("/nonexistent/ludii-corpus"); }) == ErrorCode::IoError);
}

TEST_CASE("metadata JSON round trip") {
  const GameMetadata m = metadata_from_json(
      {{"name", "X"}, {"region", "Y"}, {"earliest_date", -300}, {"sources", {"a", "b"}}, {"partial", true}});
  CHECK(m.earliest_date == -300);
  CHECK(m.period() == Period::Ancient);
  const GameMetadata back = metadata_from_json(to_json(m));
  CHECK(back.name == "X");
  CHECK(back.sources == m.sources);
  CHECK(back.partial);
}
