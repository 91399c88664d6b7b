#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "lud/corpus.hpp"
#include "lud/phylo.hpp"
#include "oracles.hpp"

using namespace lud;

namespace {

std::string leaf_name(int i) { return "g" + std::to_string(i); }

DistanceMatrix matrix_of(const std::vector<std::vector<double>>& d) {
  DistanceMatrix m;
  for (std::size_t i = 0; i < d.size(); ++i) m.labels.push_back(leaf_name(static_cast<int>(i)));
  m.d = d;
  return m;
}

std::set<std::set<std::string>> named(const std::set<std::set<int>>& splits) {
  std::set<std::set<std::string>> out;
  for (const auto& s : splits) {
    std::set<std::string> n;
    for (int l : s) n.insert(leaf_name(l));
    out.insert(n);
  }
  return out;
}

PhyloTree tree_of(const oracle::Topology& t) {
  PhyloTree p;
  for (int v = 0; v < t.nodes; ++v) p.add_node(v < t.leaves ? leaf_name(v) : "");
  for (std::size_t e = 0; e < t.edges.size(); ++e) p.connect(t.edges[e].first, t.edges[e].second, t.lengths[e]);
  return p;
}

// Four leaves: ((a, b), (c, d)) with a parsimony-informative pattern.
const char* kBalanced = "((a:1,b:1):1,(c:1,d:1):1);";

}  // namespace

TEST_CASE("neighbor joining: three taxa give the closed-form star") {
  const DistanceMatrix m = matrix_of({{0, 5, 9}, {5, 0, 10}, {9, 10, 0}});
  const PhyloTree t = neighbor_joining(m);
  CHECK(t.leaves().size() == 3);
  CHECK(t.node_count() == 4);
  const int centre = 3;
  CHECK(t.edge_length(*t.find_leaf("g0"), centre) == doctest::Approx((5 + 9 - 10) / 2.0));
  CHECK(t.edge_length(*t.find_leaf("g1"), centre) == doctest::Approx((5 + 10 - 9) / 2.0));
  CHECK(t.edge_length(*t.find_leaf("g2"), centre) == doctest::Approx((9 + 10 - 5) / 2.0));
  CHECK(splits(t).empty());
}

TEST_CASE("neighbor joining: fewer than three taxa") {
  try {
    neighbor_joining(matrix_of({{0, 1}, {1, 0}}));
    FAIL("expected TooFewTaxa");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewTaxa);
  }
}

TEST_CASE("neighbor joining: four-taxon additive matrix recovers its tree") {
  // ((g0, g1), (g2, g3)) with the inner edge of length 3.
  const DistanceMatrix m = matrix_of({{0, 3, 7, 8}, {3, 0, 6, 7}, {7, 6, 0, 5}, {8, 7, 5, 0}});
  const PhyloTree t = neighbor_joining(m);
  const std::set<std::set<std::string>> expected{{"g2", "g3"}};
  CHECK(splits(t) == expected);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(path_length(t, *t.find_leaf(leaf_name(i)), *t.find_leaf(leaf_name(j))) == doctest::Approx(m.at(i, j)));
    }
  }
  CHECK(t.warnings.empty());
}

TEST_CASE("neighbor joining: random additive matrices reproduce topology and path lengths") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 9);
    const auto topo = oracle::random_topology(n, rng);
    const auto d = oracle::path_matrix(topo);
    const PhyloTree t = neighbor_joining(matrix_of(d));
    CHECK(splits(t) == named(oracle::topology_splits(topo)));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(path_length(t, *t.find_leaf(leaf_name(i)), *t.find_leaf(leaf_name(j))) ==
              doctest::Approx(d[i][j]).epsilon(1e-9));
      }
    }
    for (std::size_t v = 0; v < t.node_count(); ++v) {
      if (!t.is_leaf(static_cast<int>(v))) CHECK(t.adj[v].size() == 3);
    }
  }
}

TEST_CASE("neighbor joining: scaling the matrix scales the branches") {
  std::mt19937_64 rng(4);
  const auto topo = oracle::random_topology(7, rng);
  auto d = oracle::path_matrix(topo);
  const PhyloTree a = neighbor_joining(matrix_of(d));
  for (auto& row : d) {
    for (auto& x : row) x *= 2.5;
  }
  const PhyloTree b = neighbor_joining(matrix_of(d));
  CHECK(splits(a) == splits(b));
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const double pa = path_length(a, *a.find_leaf(leaf_name(i)), *a.find_leaf(leaf_name(j)));
      const double pb = path_length(b, *b.find_leaf(leaf_name(i)), *b.find_leaf(leaf_name(j)));
      CHECK(pb == doctest::Approx(2.5 * pa));
    }
  }
}

TEST_CASE("neighbor joining: negative branch lengths are clamped with a warning") {
  const DistanceMatrix m = matrix_of({{0, 1, 10, 10}, {1, 0, 10, 10}, {10, 10, 0, 30}, {10, 10, 30, 0}});
  const PhyloTree t = neighbor_joining(m);
  for (std::size_t v = 0; v < t.node_count(); ++v) {
    for (const auto& e : t.adj[v]) CHECK(e.length >= 0);
  }
  CHECK_FALSE(t.warnings.empty());
}

TEST_CASE("Fitch: uniform traits cost 0, one differing leaf costs 1") {
  const PhyloTree t = tree_from_newick(kBalanced);
  const auto all = fitch_ancestral(t, {{"a", true}, {"b", true}, {"c", true}, {"d", true}});
  CHECK(all.cost == 0);
  for (std::size_t v = 0; v < t.node_count(); ++v) {
    if (!t.is_leaf(static_cast<int>(v))) CHECK(all.states[v] == std::set<TraitState>{TraitState::Present});
  }
  CHECK(all.root_states == std::set<TraitState>{TraitState::Present});
  CHECK(fitch_ancestral(t, {{"a", true}, {"b", false}, {"c", true}, {"d", true}}).cost == 1);
  CHECK(fitch_ancestral(t, {{"a", true}, {"b", true}, {"c", false}, {"d", false}}).cost == 1);
  CHECK(fitch_ancestral(t, {{"a", true}, {"b", false}, {"c", true}, {"d", false}}).cost == 2);
  try {
    fitch_ancestral(t, {{"a", true}, {"b", true}, {"c", true}});
    FAIL("expected MissingLeafTrait");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingLeafTrait);
  }
}

TEST_CASE("Fitch: cost and state sets match the exhaustive oracle on random 8-leaf trees") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto topo = oracle::random_topology(8, rng);
    std::vector<int> leaf_states(8);
    std::map<std::string, bool> traits;
    for (int i = 0; i < 8; ++i) {
      leaf_states[i] = static_cast<int>(rng() % 2);
      traits[leaf_name(i)] = leaf_states[i] == 1;
    }
    const auto expected = oracle::fitch_exhaustive(topo, leaf_states);
    const PhyloTree t = tree_of(topo);
    const FitchResult r = fitch_ancestral(t, traits);
    CHECK(r.cost == expected.cost);
    for (int v = 8; v < topo.nodes; ++v) {
      std::set<int> got;
      for (TraitState s : r.states[v]) got.insert(static_cast<int>(s));
      CHECK(got == expected.states[v]);
    }
  }
}

TEST_CASE("Fitch: cost is the same for every root edge") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto topo = oracle::random_topology(8, rng);
    const PhyloTree t = tree_of(topo);
    std::map<std::string, bool> traits;
    for (int i = 0; i < 8; ++i) traits[leaf_name(i)] = rng() % 2 == 1;
    const int base = fitch_ancestral(t, traits).cost;
    for (const auto& [a, b] : topo.edges) {
      CHECK(fitch_ancestral(t, traits, RootEdge{a, b, t.edge_length(a, b) / 2}).cost == base);
    }
  }
}

TEST_CASE("midpoint root sits halfway along the longest leaf path") {
  const PhyloTree t = tree_from_newick("((a:1,b:2):1,(c:1,d:6):1);");
  const RootEdge r = midpoint_root(t);
  // Longest path b-d has length 2 + 1 + 1 + 6 = 10; its midpoint is 5 from b.
  const double from_a = path_length(t, *t.find_leaf("b"), r.a);
  const double from_b = path_length(t, *t.find_leaf("b"), r.b);
  const double along = from_a < from_b ? from_a + r.offset : from_a - r.offset;
  CHECK(along == doctest::Approx(5.0));
}

TEST_CASE("influence network: threshold 0, identical pair, dates and acyclicity") {
  const DistanceMatrix m = matrix_of({{0, 0, 4}, {0, 0, 4}, {4, 4, 0}});
  const std::map<std::string, int> dates{{"g0", 100}, {"g1", 200}, {"g2", -50}};
  CHECK(influence_network(m, dates, 0).edges.empty());
  const InfluenceNetwork two = influence_network(m, dates, 1);
  REQUIRE(two.edges.size() == 1);
  CHECK(two.edges[0].from == "g0");
  CHECK(two.edges[0].to == "g1");
  CHECK(two.edges[0].weight == 1.0);
  const InfluenceNetwork all = influence_network(m, dates, 8);
  CHECK(all.edges.size() == 3);
  for (const auto& e : all.edges) {
    CHECK(dates.at(e.from) < dates.at(e.to));
    CHECK(e.weight > 0);
    CHECK(e.weight <= 1);
  }
  // Same dates never produce an edge in either direction.
  const InfluenceNetwork tied = influence_network(m, {{"g0", 1}, {"g1", 1}, {"g2", 1}}, 8);
  CHECK(tied.edges.empty());
  try {
    influence_network(m, {{"g0", 1}}, 1);
    FAIL("expected MissingDate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDate);
  }
}

TEST_CASE("influence network: acyclic on random matrices with distinct dates") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8;
    const auto d = oracle::path_matrix(oracle::random_topology(n, rng));
    std::map<std::string, int> dates;
    std::vector<int> years(n);
    for (int i = 0; i < n; ++i) years[i] = i * 10;
    std::shuffle(years.begin(), years.end(), rng);
    for (int i = 0; i < n; ++i) dates[leaf_name(i)] = years[i];
    const auto net = influence_network(matrix_of(d), dates, 3.0);
    // Kahn's algorithm consumes every node exactly when there is no cycle.
    std::map<std::string, int> indegree;
    for (const auto& nm : net.nodes) indegree[nm] = 0;
    for (const auto& e : net.edges) ++indegree[e.to];
    std::vector<std::string> ready;
    for (const auto& [nm, k] : indegree) {
      if (k == 0) ready.push_back(nm);
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
      const std::string v = ready.back();
      ready.pop_back();
      ++seen;
      for (const auto& e : net.edges) {
        if (e.from == v && --indegree[e.to] == 0) ready.push_back(e.to);
      }
    }
    CHECK(seen == net.nodes.size());
  }
}

TEST_CASE("Newick: round trip and malformed input") {
  std::mt19937_64 rng(12);
  const auto topo = oracle::random_topology(9, rng);
  const PhyloTree t = neighbor_joining(matrix_of(oracle::path_matrix(topo)));
  const std::string text = to_newick(t);
  CHECK(text.back() == ';');
  const PhyloTree back = tree_from_newick(text);
  CHECK(splits(back) == splits(t));
  CHECK(to_newick(back) == text);
  for (const char* bad : {"", "((a,b);", "(a,b));", "(a:x,b);"}) {
    try {
      tree_from_newick(bad);
      FAIL_CHECK("accepted: " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
  try {
    tree_from_newick("(a,a,b);");
    FAIL("expected DuplicateName");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateName);
  }
}

TEST_CASE("corpus pipeline: tree and median-threshold network match golden files") {
  const auto corpus = load_corpus(fixture::games_dir());
  std::vector<GameDescription> descriptions;
  std::map<std::string, int> dates;
  for (const auto& e : corpus) {
    descriptions.push_back(e.description);
    dates[e.metadata.name] = e.metadata.earliest_date;
  }
  const DistanceMatrix m = distance_matrix(descriptions);
  const PhyloTree t = neighbor_joining(m);
  CHECK(to_newick(t) + "\n" == read_file(fixture::golden_dir() + "/corpus_tree.nwk"));

  std::vector<double> off;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) off.push_back(m.at(i, j));
  }
  std::sort(off.begin(), off.end());
  const double median =
      off.size() % 2 ? off[off.size() / 2] : (off[off.size() / 2 - 1] + off[off.size() / 2]) / 2;
  CHECK(to_dot(influence_network(m, dates, median)) == read_file(fixture::golden_dir() + "/corpus_influence.dot"));
}
