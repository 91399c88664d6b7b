#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace oracle {

namespace {

constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                              {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};

char winner(const std::string& b) {
  for (const auto& l : kLines) {
    if (b[l[0]] != '.' && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]]) return b[l[0]];
  }
  return 0;
}

bool full(const std::string& b) { return b.find('.') == std::string::npos; }

char to_move(const std::string& b) {
  const auto x = std::count(b.begin(), b.end(), 'X');
  const auto o = std::count(b.begin(), b.end(), 'O');
  return x == o ? 'X' : 'O';
}

}  // namespace

TttCounts tic_tac_toe() {
  TttCounts c;
  std::set<std::string> seen;
  std::function<void(std::string&, double, int)> walk = [&](std::string& b, double p, int ply) {
    seen.insert(b);
    const char w = winner(b);
    if (w || full(b)) {
      ++c.games;
      if (w == 'X') {
        ++c.x_wins;
        c.p_x += p;
      } else if (w == 'O') {
        ++c.o_wins;
        c.p_o += p;
      } else {
        ++c.draws;
        c.p_draw += p;
      }
      c.mean_plies += p * ply;
      return;
    }
    const char m = to_move(b);
    const double free_cells = static_cast<double>(std::count(b.begin(), b.end(), '.'));
    for (int i = 0; i < 9; ++i) {
      if (b[i] != '.') continue;
      b[i] = m;
      walk(b, p / free_cells, ply + 1);
      b[i] = '.';
    }
  };
  std::string b(9, '.');
  walk(b, 1.0, 0);
  c.positions = seen.size();
  c.value = solve_ttt(std::string(9, '.')).value;
  return c;
}

TttSolve solve_ttt(const std::string& board) {
  std::unordered_map<std::string, int> memo;
  // Value for the side to move.
  std::function<int(std::string&)> value = [&](std::string& b) -> int {
    if (auto it = memo.find(b); it != memo.end()) return it->second;
    int v;
    if (winner(b)) {
      v = -1;  // the previous mover completed a line
    } else if (full(b)) {
      v = 0;
    } else {
      v = -2;
      const char m = to_move(b);
      for (int i = 0; i < 9; ++i) {
        if (b[i] != '.') continue;
        b[i] = m;
        v = std::max(v, -value(b));
        b[i] = '.';
      }
    }
    memo[b] = v;
    return v;
  };
  TttSolve out;
  std::string b = board;
  out.value = value(b);
  if (!winner(b) && !full(b)) {
    const char m = to_move(b);
    for (int i = 0; i < 9; ++i) {
      if (b[i] != '.') continue;
      b[i] = m;
      if (-value(b) == out.value) out.best_moves.push_back(i);
      b[i] = '.';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// EBNF

namespace {

std::vector<std::string> grammar_tokens(const std::string& rhs) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < rhs.size()) {
    const char ch = rhs[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '<') {
      const auto end = rhs.find('>', i);
      if (end == std::string::npos) throw std::runtime_error("unclosed <");
      toks.push_back(rhs.substr(i, end - i + 1));
      i = end + 1;
    } else if (std::string("[]{}|()").find(ch) != std::string::npos) {
      toks.emplace_back(1, ch);
      ++i;
    } else {
      std::size_t j = i;
      while (j < rhs.size() && !std::isspace(static_cast<unsigned char>(rhs[j])) &&
             std::string("[]{}|()<").find(rhs[j]) == std::string::npos) {
        ++j;
      }
      toks.push_back(rhs.substr(i, j - i));
      i = j;
    }
  }
  return toks;
}

std::vector<std::string> input_tokens(const std::string& text) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '(' || ch == ')') {
      toks.emplace_back(1, ch);
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
             text[j] != ')') {
        ++j;
      }
      toks.push_back(text.substr(i, j - i));
      i = j;
    }
  }
  return toks;
}

bool is_int(const std::string& s) {
  std::size_t k = (s.size() > 1 && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (k == s.size()) return false;
  for (; k < s.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  }
  return true;
}

}  // namespace

Ebnf::Ebnf(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("//", 0) == 0) continue;
    const auto eq = line.find("::=");
    if (eq == std::string::npos) continue;
    std::string name = line.substr(0, eq);
    name.erase(name.find_last_not_of(' ') + 1);
    const std::string rhs = line.substr(eq + 3);
    const auto toks = grammar_tokens(rhs);
    std::size_t i = 0;
    rules_[name] = parse_alts(toks, i);
    if (i != toks.size()) throw std::runtime_error("trailing tokens in " + name);
    raw_[name] = rhs;
  }
}

std::vector<Ebnf::Seq> Ebnf::parse_alts(const std::vector<std::string>& toks, std::size_t& i) const {
  std::vector<Seq> alts(1);
  while (i < toks.size()) {
    const std::string& t = toks[i];
    if (t == "]" || t == "}") break;
    ++i;
    if (t == "|") {
      alts.emplace_back();
    } else if (t == "[" || t == "{") {
      Item it{t == "[" ? Item::Optional : Item::Repeat, {}, parse_alts(toks, i)};
      if (i >= toks.size() || toks[i] != (t == "[" ? "]" : "}")) {
        throw std::runtime_error("unbalanced bracket");
      }
      ++i;
      alts.back().push_back(std::move(it));
    } else if (t.front() == '<' && t != "<int>" && t != "<ident>") {
      alts.back().push_back(Item{Item::NonTerminal, t, {}});
    } else {
      alts.back().push_back(Item{Item::Terminal, t, {}});
    }
  }
  return alts;
}

std::set<std::size_t> Ebnf::match_alts(const std::vector<Seq>& alts, const std::vector<std::string>& in,
                                       std::size_t pos, int depth) const {
  std::set<std::size_t> out;
  for (const auto& s : alts) {
    auto r = match_seq(s, 0, in, pos, depth);
    out.insert(r.begin(), r.end());
  }
  return out;
}

std::set<std::size_t> Ebnf::match_seq(const Seq& s, std::size_t k, const std::vector<std::string>& in,
                                      std::size_t pos, int depth) const {
  if (k == s.size()) return {pos};
  std::set<std::size_t> out;
  for (std::size_t p : match_item(s[k], in, pos, depth)) {
    auto r = match_seq(s, k + 1, in, p, depth);
    out.insert(r.begin(), r.end());
  }
  return out;
}

std::set<std::size_t> Ebnf::match_item(const Item& it, const std::vector<std::string>& in,
                                       std::size_t pos, int depth) const {
  if (depth > 200) throw std::runtime_error("grammar recursion too deep");
  switch (it.kind) {
    case Item::Terminal: {
      if (pos >= in.size()) return {};
      const std::string& tok = in[pos];
      bool ok;
      if (it.text == "<int>") {
        ok = is_int(tok);
      } else if (it.text == "<ident>") {
        ok = tok != "(" && tok != ")" && !is_int(tok);
      } else {
        ok = tok == it.text;
      }
      return ok ? std::set<std::size_t>{pos + 1} : std::set<std::size_t>{};
    }
    case Item::NonTerminal: {
      auto r = rules_.find(it.text);
      if (r == rules_.end()) throw std::runtime_error("undefined " + it.text);
      return match_alts(r->second, in, pos, depth + 1);
    }
    case Item::Optional: {
      auto out = match_alts(it.alts, in, pos, depth);
      out.insert(pos);
      return out;
    }
    case Item::Repeat: {
      std::set<std::size_t> out{pos};
      std::set<std::size_t> frontier{pos};
      while (!frontier.empty()) {
        std::set<std::size_t> next;
        for (std::size_t p : frontier) {
          for (std::size_t q : match_alts(it.alts, in, p, depth)) {
            if (q > p && out.insert(q).second) next.insert(q);
          }
        }
        frontier = std::move(next);
      }
      return out;
    }
    case Item::Group: return match_alts(it.alts, in, pos, depth);
  }
  return {};
}

bool Ebnf::accepts(const std::string& start, const std::string& sexpr) const {
  const auto in = input_tokens(sexpr);
  auto r = rules_.find(start);
  if (r == rules_.end()) throw std::runtime_error("undefined " + start);
  return match_alts(r->second, in, 0, 0).count(in.size()) > 0;
}

// ---------------------------------------------------------------------------
// Edit mappings

namespace {

struct Flat {
  std::vector<const Tree*> node;  // preorder
  std::vector<int> parent;
  std::vector<int> end;  // preorder index one past the subtree
};

void flatten(const Tree& t, int parent, Flat& f) {
  const int me = static_cast<int>(f.node.size());
  f.node.push_back(&t);
  f.parent.push_back(parent);
  f.end.push_back(0);
  for (const auto& k : t.kids) flatten(k, me, f);
  f.end[me] = static_cast<int>(f.node.size());
}

bool ancestor(const Flat& f, int a, int d) { return a < d && d < f.end[a]; }

double relabel_cost(const Tree& x, const Tree& y, const Costs& c) {
  if (x.label == y.label && x.cls == y.cls) return 0;
  if (x.cls != y.cls) return c.cross;
  return x.numeric ? c.numeric : c.relabel;
}

}  // namespace

double edit_distance_by_mappings(const Tree& a, const Tree& b, const Costs& c) {
  Flat fa, fb;
  flatten(a, -1, fa);
  flatten(b, -1, fb);
  const int na = static_cast<int>(fa.node.size());
  const int nb = static_cast<int>(fb.node.size());
  double all_indel = 0;
  for (auto* n : fa.node) all_indel += c.indel_of(n->cls);
  for (auto* n : fb.node) all_indel += c.indel_of(n->cls);
  double best = all_indel;
  std::vector<std::pair<int, int>> pairs;
  // Preorder-increasing partial injections; for those, preserving ancestry
  // both ways also preserves left-to-right order.
  std::function<void(int, int, double)> go = [&](int i, int jmin, double gain) {
    best = std::min(best, all_indel - gain);
    for (int x = i; x < na; ++x) {
      for (int y = jmin; y < nb; ++y) {
        bool ok = true;
        for (const auto& [pa, pb] : pairs) {
          if (ancestor(fa, pa, x) != ancestor(fb, pb, y)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        const double saved = c.indel_of(fa.node[x]->cls) + c.indel_of(fb.node[y]->cls) -
                             relabel_cost(*fa.node[x], *fb.node[y], c);
        pairs.emplace_back(x, y);
        go(x + 1, y + 1, gain + saved);
        pairs.pop_back();
      }
    }
  };
  go(0, 0, 0);
  return best;
}

// ---------------------------------------------------------------------------
// Trees for phylogenetics

Topology random_topology(int n, std::mt19937_64& rng, double lo, double hi) {
  // Start from a 3-leaf star and repeatedly split a random edge with a new leaf.
  Topology t;
  t.leaves = n;
  std::uniform_real_distribution<double> len(lo, hi);
  std::vector<std::pair<int, int>> edges;
  int next_internal = n;
  const int center = next_internal++;
  edges = {{0, center}, {1, center}, {2, center}};
  for (int leaf = 3; leaf < n; ++leaf) {
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    const std::size_t e = pick(rng);
    const auto [u, v] = edges[e];
    const int mid = next_internal++;
    edges[e] = {u, mid};
    edges.emplace_back(mid, v);
    edges.emplace_back(leaf, mid);
  }
  t.nodes = next_internal;
  t.edges = edges;
  for (std::size_t i = 0; i < edges.size(); ++i) t.lengths.push_back(len(rng));
  return t;
}

namespace {

std::vector<std::vector<std::pair<int, double>>> adjacency(const Topology& t) {
  std::vector<std::vector<std::pair<int, double>>> adj(t.nodes);
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    adj[t.edges[i].first].emplace_back(t.edges[i].second, t.lengths[i]);
    adj[t.edges[i].second].emplace_back(t.edges[i].first, t.lengths[i]);
  }
  return adj;
}

}  // namespace

std::vector<std::vector<double>> path_matrix(const Topology& t) {
  const auto adj = adjacency(t);
  std::vector<std::vector<double>> d(t.leaves, std::vector<double>(t.leaves, 0));
  for (int s = 0; s < t.leaves; ++s) {
    std::vector<double> dist(t.nodes, -1);
    std::vector<int> stack{s};
    dist[s] = 0;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (auto [v, w] : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + w;
          stack.push_back(v);
        }
      }
    }
    for (int j = 0; j < t.leaves; ++j) d[s][j] = dist[j];
  }
  return d;
}

std::set<std::set<int>> topology_splits(const Topology& t) {
  const auto adj = adjacency(t);
  std::set<std::set<int>> out;
  for (const auto& [u, v] : t.edges) {
    // Leaves reachable from v without crossing (u, v).
    std::set<int> side;
    std::vector<int> stack{v};
    std::vector<char> seen(t.nodes, 0);
    seen[u] = seen[v] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      if (x < t.leaves) side.insert(x);
      for (auto [y, w] : adj[x]) {
        if (!seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    if (side.count(0)) {
      std::set<int> other;
      for (int l = 0; l < t.leaves; ++l) {
        if (!side.count(l)) other.insert(l);
      }
      side = other;
    }
    if (side.size() >= 2 && static_cast<int>(side.size()) <= t.leaves - 2) out.insert(side);
  }
  return out;
}

FitchOracle fitch_exhaustive(const Topology& t, const std::vector<int>& leaf_states) {
  const int internal = t.nodes - t.leaves;
  FitchOracle out;
  out.cost = std::numeric_limits<int>::max();
  out.states.assign(t.nodes, {});
  std::vector<int> label(t.nodes, 0);
  for (int l = 0; l < t.leaves; ++l) label[l] = leaf_states[l];
  for (std::uint32_t mask = 0; mask < (1u << internal); ++mask) {
    for (int k = 0; k < internal; ++k) label[t.leaves + k] = (mask >> k) & 1;
    int cost = 0;
    for (const auto& [u, v] : t.edges) cost += label[u] != label[v];
    if (cost < out.cost) {
      out.cost = cost;
      for (auto& s : out.states) s.clear();
    }
    if (cost == out.cost) {
      for (int v = 0; v < t.nodes; ++v) out.states[v].insert(label[v]);
    }
  }
  return out;
}

}  // namespace oracle
