#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "lud/corpus.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, bool keep_stderr = false) {
  const std::string cmd = std::string(LUDII_CLI) + " " + args + (keep_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string game(const std::string& stem) { return fixture::games_dir() + "/" + stem + ".lud"; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ludii-cli-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("cli: parse prints the canonical form") {
  const Run r = run("parse " + game("tictactoe"));
  CHECK(r.code == 0);
  CHECK(r.out == lud::canonical_text(fixture::corpus_description("tictactoe")) + "\n");
  const Run j = run("--json parse " + game("mutorere"));
  CHECK(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["name"] == "MuTorere");
  CHECK(doc["metadata"]["earliest_date"] == 1750);
}

TEST_CASE("cli: usage errors exit 1, data errors exit 2") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("parse " + game("tictactoe") + " --no-such-flag").code == 1);
  CHECK(run("eval " + game("tictactoe") + " --games many").code == 1);
  CHECK(run("parse /nonexistent/file.lud").code == 2);
  CHECK(run("parse " + game("senet-stub")).code == 0);

  TempDir d("errors");
  std::ofstream(d / "bad.lud") << "(game Bad (players A B)";
  const Run bad = run("--json parse " + (d / "bad.lud"), true);
  CHECK(bad.code == 2);
  const auto err = nlohmann::json::parse(bad.out);
  CHECK(err["error"] == "ParseError");
  CHECK(err["message"].get<std::string>().find("bad.lud: UnbalancedParenthesis") != std::string::npos);
}

TEST_CASE("cli: grammar matches the checked-in file") {
  const Run r = run("grammar");
  CHECK(r.code == 0);
  CHECK(r.out == lud::read_file(fixture::source_dir() + "/grammar.ebnf"));
}

TEST_CASE("cli: eval is byte-identical for the same seed and any thread count") {
  const std::string args = "eval " + game("tictactoe") + " --games 200 --ladder-games 10 --ladder 4,16";
  const Run a = run("--seed 7 --threads 1 " + args);
  const Run b = run("--seed 7 --threads 1 " + args);
  const Run c = run("--seed 7 --threads 4 " + args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const auto report = nlohmann::json::parse(a.out);
  CHECK(report["trials"]["num_games"] == 200);
  CHECK(report["trials"]["base_seed"] == 7);
  const Run other = run("--seed 8 --threads 1 " + args);
  CHECK(other.out != a.out);
}

TEST_CASE("cli: dist then phylo nj reproduces the golden tree") {
  TempDir d("pipeline");
  const Run dist = run("dist " + fixture::games_dir() + " --out " + (d / "m.csv"));
  CHECK(dist.code == 0);
  CHECK(lud::read_file(d / "m.csv") == lud::read_file(fixture::golden_dir() + "/corpus_distance.csv"));
  const Run nj = run("phylo nj " + (d / "m.csv") + " --out " + (d / "t.nwk"));
  CHECK(nj.code == 0);
  CHECK(lud::read_file(d / "t.nwk") == lud::read_file(fixture::golden_dir() + "/corpus_tree.nwk"));
  const Run him = run("phylo him " + (d / "m.csv") + " --games " + fixture::games_dir());
  CHECK(him.code == 0);
  CHECK(him.out == lud::read_file(fixture::golden_dir() + "/corpus_influence.dot"));
  const Run fitch = run("--json phylo fitch " + (d / "t.nwk") + " --keyword line --games " + fixture::games_dir());
  CHECK(fitch.code == 0);
  CHECK(nlohmann::json::parse(fitch.out)["cost"].get<int>() >= 1);
}

TEST_CASE("cli: enumerate and solve") {
  const Run e = run("--json enumerate " + game("mutorere") + " --reduction symmetry --board-only");
  CHECK(e.code == 0);
  const auto j = nlohmann::json::parse(e.out);
  CHECK(j["classes"] == 46);
  const Run s = run("--json solve " + game("tictactoe"));
  CHECK(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["value"]["status"] == "Draw");
  CHECK(run("solve " + game("hex7") + " --budget 1000").code == 2);
}

TEST_CASE("cli: recon and train outputs are deterministic") {
  TempDir d("recon");
  nlohmann::json spec = nlohmann::json::parse(lud::read_file(fixture::source_dir() + "/recon/tictactoe-linek.json"));
  spec["trials"] = {{"num_games", 20}, {"ladder_games", 10}};
  spec["ladder"] = {4, 16};
  std::ofstream(d / "spec.json") << spec.dump();
  const Run a = run("--seed 3 --threads 1 recon " + (d / "spec.json"));
  const Run b = run("--seed 3 --threads 4 recon " + (d / "spec.json"));
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(nlohmann::json::parse(a.out).size() == 4);

  const std::string train = "train " + game("tictactoe") + " --games 10 --iterations 8 --keep 8";
  const Run t1 = run("--seed 2 --threads 1 --json " + train);
  const Run t4 = run("--seed 2 --threads 4 --json " + train);
  CHECK(t1.code == 0);
  CHECK(t1.out == t4.out);
  CHECK(nlohmann::json::parse(t1.out)["patterns"].size() <= 8);
}
