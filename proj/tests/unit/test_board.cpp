#include <doctest.h>

#include <algorithm>
#include <set>

#include "lud/board.hpp"

using namespace lud;

namespace {

BoardGraph board(const std::string& text) { return build_board(parse(text)); }

int degree(const BoardGraph& b, int c) { return static_cast<int>(b.neighbors(c).size()); }

void check_invariants(const BoardGraph& b) {
  std::size_t degree_sum = 0;
  for (int c = 0; c < b.size(); ++c) {
    degree_sum += b.neighbors(c).size();
    for (const auto& n : b.neighbors(c)) {
      REQUIRE(n.cell >= 0);
      REQUIRE(n.cell < b.size());
      const auto& back = b.neighbors(n.cell);
      CHECK(std::any_of(back.begin(), back.end(), [&](const Neighbor& m) { return m.cell == c; }));
    }
  }
  CHECK(degree_sum == 2 * b.edge_count());
  for (const auto& [name, cells] : b.regions()) {
    for (int c : cells) CHECK((c >= 0 && c < b.size()));
  }
  std::set<std::pair<int, int>> edges;
  for (int c = 0; c < b.size(); ++c) {
    for (const auto& n : b.neighbors(c)) edges.emplace(c, n.cell);
  }
  std::set<Permutation> group(b.symmetries().begin(), b.symmetries().end());
  CHECK(group.size() == b.symmetries().size());
  for (const auto& p : b.symmetries()) {
    for (const auto& [u, v] : edges) CHECK(edges.count({p[u], p[v]}) == 1);
  }
  // Closure under composition.
  for (const auto& p : b.symmetries()) {
    for (const auto& q : b.symmetries()) {
      Permutation r(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) r[i] = p[q[i]];
      CHECK(group.count(r) == 1);
    }
  }
}

// Brute-force automorphism count by trying every permutation.
std::size_t count_automorphisms(const BoardGraph& b) {
  std::vector<int> p(b.size());
  for (int i = 0; i < b.size(); ++i) p[i] = i;
  std::set<std::pair<int, int>> edges;
  for (int c = 0; c < b.size(); ++c) {
    for (const auto& n : b.neighbors(c)) edges.emplace(c, n.cell);
  }
  std::size_t count = 0;
  do {
    bool ok = true;
    for (const auto& [u, v] : edges) {
      if (!edges.count({p[u], p[v]})) {
        ok = false;
        break;
      }
    }
    count += ok;
  } while (std::next_permutation(p.begin(), p.end()));
  return count;
}

}  // namespace

TEST_CASE("square 3 with diagonals: nine cells, centre degree 8") {
  const BoardGraph b = board("(board (square 3) diagonals)");
  CHECK(b.size() == 9);
  CHECK(degree(b, 4) == 8);
  CHECK(degree(b, 0) == 3);
  CHECK(degree(b, 1) == 5);
  check_invariants(b);
}

TEST_CASE("square 3 without diagonals: orthogonal only, 8 symmetries") {
  const BoardGraph b = board("(square 3)");
  CHECK(b.size() == 9);
  CHECK(degree(b, 4) == 4);
  CHECK(b.symmetries().size() == 8);
  CHECK(count_automorphisms(b) == 8);
  check_invariants(b);
}

TEST_CASE("wheel 8: hub degree 8, rim degree 3, 16 symmetries") {
  const BoardGraph b = board("(wheel 8)");
  CHECK(b.size() == 9);
  CHECK(degree(b, 8) == 8);
  for (int c = 0; c < 8; ++c) CHECK(degree(b, c) == 3);
  CHECK(b.symmetries().size() == 16);
  CHECK(count_automorphisms(b) == 16);
  check_invariants(b);
}

TEST_CASE("hex n: cell count matches axial enumeration") {
  for (int n = 1; n <= 6; ++n) {
    int expected = 0;
    for (int q = -(n - 1); q <= n - 1; ++q) {
      for (int r = -(n - 1); r <= n - 1; ++r) {
        if (std::abs(q + r) <= n - 1) ++expected;
      }
    }
    const BoardGraph b = build_board(LudemeNode::ludeme("hex", {LudemeNode::integer(n)}));
    CHECK(b.size() == expected);
  }
  const BoardGraph h2 = board("(hex 2)");
  CHECK(h2.size() == 7);
  int centre = -1;
  for (int c = 0; c < 7; ++c) {
    if (degree(h2, c) == 6) centre = c;
  }
  CHECK(centre == 3);
  CHECK(h2.symmetries().size() == 12);
  check_invariants(h2);
  check_invariants(board("(hex 3)"));
}

TEST_CASE("diamond and rectangle boards") {
  const BoardGraph d = board("(diamond 5)");
  CHECK(d.size() == 25);
  check_invariants(d);
  CHECK(d.regions().at("N").size() == 5);
  CHECK(d.regions().at("W").size() == 5);
  const BoardGraph r = board("(rectangle 3 4)");
  CHECK(r.size() == 12);
  CHECK(r.symmetries().size() == 4);
  check_invariants(r);
}

TEST_CASE("graph boards: explicit edges, identity-only symmetry, malformed edges") {
  // A path 0-1-2 with a pendant 3 on 1 and 4 on 3: no nontrivial automorphism.
  const BoardGraph g = board("(graph (vertices 6) (edges 0 1 1 2 1 3 3 4 2 5 5 0))");
  CHECK(g.size() == 6);
  check_invariants(g);
  CHECK(g.symmetries().size() == count_automorphisms(g));

  const BoardGraph asym = board("(graph (vertices 5) (edges 0 1 1 2 2 3 1 4 4 0 2 4))");
  CHECK(count_automorphisms(asym) == asym.symmetries().size());

  const BoardGraph rigid = board("(graph (vertices 6) (edges 0 1 1 2 2 3 3 4 2 5 5 1))");
  CHECK(rigid.symmetries().size() == count_automorphisms(rigid));

  try {
    board("(graph (vertices 3) (edges 0 1 1 7))");
    FAIL("expected MalformedGraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedGraph);
  }
  try {
    board("(graph (vertices 3) (edges 0 1 2))");
    FAIL("expected MalformedGraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedGraph);
  }
}

TEST_CASE("a graph without nontrivial automorphisms has only the identity") {
  // Smallest asymmetric tree: a path of six with a pendant on its third vertex.
  const BoardGraph t = board("(graph (vertices 7) (edges 0 1 1 2 2 3 3 4 4 5 2 6))");
  CHECK(count_automorphisms(t) == 1);
  REQUIRE(t.symmetries().size() == 1);
  for (int c = 0; c < t.size(); ++c) CHECK(t.symmetries()[0][c] == c);
}

TEST_CASE("size limits") {
  try {
    board("(square 100)");
    FAIL("expected SizeOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SizeOutOfRange);
  }
  try {
    build_board(LudemeNode::ludeme("square", {LudemeNode::integer(0)}));
    FAIL("expected SizeOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SizeOutOfRange);
  }
}

TEST_CASE("direction labels and steps") {
  const BoardGraph b = board("(board (square 3) diagonals)");
  CHECK(b.label_count() == 8);
  const int n = b.label_index("N");
  const int se = b.label_index("SE");
  REQUIRE(n >= 0);
  REQUIRE(se >= 0);
  CHECK(b.step(4, n) == 1);
  CHECK(b.step(4, se) == 8);
  CHECK(b.step(0, n) == BoardGraph::kOff);
  CHECK(b.opposite(n) == b.label_index("S"));
  CHECK(b.is_diagonal(se));
  CHECK_FALSE(b.is_diagonal(n));

  const BoardGraph w = board("(wheel 8)");
  for (const char* l : {"CW", "CCW", "IN", "OUT"}) CHECK(w.label_index(l) >= 0);
  CHECK(w.step(0, w.label_index("IN")) == 8);
  CHECK(w.step(0, w.label_index("CW")) == 1);

  const BoardGraph h = board("(hex 2)");
  CHECK(h.label_count() == 6);
}

TEST_CASE("symmetric boards of up to 64 cells get their full automorphism group") {
  CHECK(board("(square 4)").symmetries().size() == 8);
  CHECK(board("(board (square 4) diagonals)").symmetries().size() == 8);
  CHECK(board("(wheel 5)").symmetries().size() == 10);
  // Larger constructor boards fall back to the dihedral group.
  CHECK(board("(square 9)").symmetries().size() == 8);
  CHECK(board("(hex 5)").symmetries().size() == 12);
}
