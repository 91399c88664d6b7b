#include "lud/phylo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <tuple>

namespace lud {

int PhyloTree::add_node(std::string name) {
  names.push_back(std::move(name));
  adj.emplace_back();
  return static_cast<int>(names.size()) - 1;
}

void PhyloTree::connect(int a, int b, double length) {
  adj[a].push_back({b, length});
  adj[b].push_back({a, length});
}

void PhyloTree::disconnect(int a, int b) {
  auto drop = [](std::vector<Edge>& edges, int v) {
    edges.erase(std::remove_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.to == v; }),
                edges.end());
  };
  drop(adj[a], b);
  drop(adj[b], a);
}

std::vector<int> PhyloTree::leaves() const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(node_count()); ++v) {
    if (!names[v].empty()) out.push_back(v);
  }
  return out;
}

std::optional<int> PhyloTree::find_leaf(const std::string& name) const {
  for (int v = 0; v < static_cast<int>(node_count()); ++v) {
    if (names[v] == name) return v;
  }
  return std::nullopt;
}

double PhyloTree::edge_length(int a, int b) const {
  for (const auto& e : adj[a]) {
    if (e.to == b) return e.length;
  }
  throw Error(ErrorCode::InvalidArgument, "nodes are not adjacent");
}

PhyloTree neighbor_joining(const DistanceMatrix& m) {
  const std::size_t n = m.size();
  if (n < 3) {
    throw Error(ErrorCode::TooFewTaxa, "neighbor joining needs at least 3 taxa, got " +
                                           std::to_string(n));
  }
  PhyloTree t;
  for (const auto& l : m.labels) t.add_node(l);
  std::vector<int> node(n);  // cluster -> tree node
  std::vector<std::string> key(m.labels);  // cluster -> smallest leaf name
  for (std::size_t i = 0; i < n; ++i) node[i] = static_cast<int>(i);
  std::vector<std::vector<double>> d = m.d;
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;

  auto clamp = [&](double len, const std::string& what) {
    if (len < 0) {
      t.warnings.push_back("negative branch length " + format_number(len) + " on " + what +
                           " clamped to 0");
      return 0.0;
    }
    return len;
  };
  auto pair_key = [&](std::size_t i, std::size_t j) {
    return std::minmax(key[i], key[j]);
  };

  while (active.size() > 3) {
    const double r = static_cast<double>(active.size());
    std::vector<double> R(d.size(), 0.0);
    for (std::size_t i : active) {
      for (std::size_t j : active) R[i] += d[i][j];
    }
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const std::size_t i = active[x], j = active[y];
        const double q = (r - 2) * d[i][j] - R[i] - R[j];
        const double tol = 1e-9 * std::max(1.0, std::abs(best));
        if (!found || q < best - tol ||
            (std::abs(q - best) <= tol && pair_key(i, j) < pair_key(bi, bj))) {
          best = q;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    const double dij = d[bi][bj];
    const double li = dij / 2 + (R[bi] - R[bj]) / (2 * (r - 2));
    const double lj = dij - li;
    const int u = t.add_node();
    t.connect(node[bi], u, clamp(li, key[bi]));
    t.connect(node[bj], u, clamp(lj, key[bj]));
    const std::size_t c = d.size();
    for (auto& row : d) row.push_back(0.0);
    d.emplace_back(c + 1, 0.0);
    for (std::size_t k : active) {
      if (k == bi || k == bj) continue;
      d[c][k] = d[k][c] = (d[bi][k] + d[bj][k] - dij) / 2;
    }
    node.push_back(u);
    key.push_back(std::min(key[bi], key[bj]));
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](std::size_t k) { return k == bi || k == bj; }),
                 active.end());
    active.push_back(c);
  }
  const std::size_t a = active[0], b = active[1], c = active[2];
  const int center = t.add_node();
  t.connect(node[a], center, clamp((d[a][b] + d[a][c] - d[b][c]) / 2, key[a]));
  t.connect(node[b], center, clamp((d[a][b] + d[b][c] - d[a][c]) / 2, key[b]));
  t.connect(node[c], center, clamp((d[a][c] + d[b][c] - d[a][b]) / 2, key[c]));
  return t;
}

namespace {

// Leaf names below `v` when entered from `parent`.
void collect(const PhyloTree& t, int v, int parent, std::set<std::string>& out) {
  if (!t.names[v].empty()) out.insert(t.names[v]);
  for (const auto& e : t.adj[v]) {
    if (e.to != parent) collect(t, e.to, v, out);
  }
}

std::string smallest_leaf(const PhyloTree& t, int v, int parent) {
  std::set<std::string> s;
  collect(t, v, parent, s);
  return s.empty() ? std::string() : *s.begin();
}

}  // namespace

std::set<std::set<std::string>> splits(const PhyloTree& t) {
  std::set<std::string> all;
  for (int v : t.leaves()) all.insert(t.names[v]);
  std::set<std::set<std::string>> out;
  if (all.empty()) return out;
  const std::string& first = *all.begin();
  for (int v = 0; v < static_cast<int>(t.node_count()); ++v) {
    for (const auto& e : t.adj[v]) {
      if (e.to < v) continue;
      std::set<std::string> side;
      collect(t, e.to, v, side);
      if (side.count(first)) {
        std::set<std::string> other;
        std::set_difference(all.begin(), all.end(), side.begin(), side.end(),
                            std::inserter(other, other.begin()));
        side = std::move(other);
      }
      if (side.size() >= 2 && side.size() + 2 <= all.size()) out.insert(side);
    }
  }
  return out;
}

double path_length(const PhyloTree& t, int a, int b) {
  std::function<double(int, int)> go = [&](int v, int parent) -> double {
    if (v == b) return 0.0;
    for (const auto& e : t.adj[v]) {
      if (e.to == parent) continue;
      const double rest = go(e.to, v);
      if (rest >= 0) return e.length + rest;
    }
    return -1.0;
  };
  return go(a, -1);
}

namespace {

std::string newick_name(const std::string& s) {
  const bool plain = std::all_of(s.begin(), s.end(), [](char c) {
    return c != '(' && c != ')' && c != ',' && c != ':' && c != ';' && c != '\'' && c != ' ' &&
           c != '[' && c != ']';
  });
  if (plain) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

void write_newick(const PhyloTree& t, int v, int parent, std::string& out) {
  std::vector<std::pair<std::string, PhyloTree::Edge>> kids;
  for (const auto& e : t.adj[v]) {
    if (e.to != parent) kids.emplace_back(smallest_leaf(t, e.to, v), e);
  }
  std::sort(kids.begin(), kids.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  if (!kids.empty()) {
    out += "(";
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) out += ",";
      write_newick(t, kids[i].second.to, v, out);
      out += ":" + format_number(kids[i].second.length);
    }
    out += ")";
  }
  out += newick_name(t.names[v]);
}

}  // namespace

std::string to_newick(const PhyloTree& t, std::optional<int> root) {
  if (t.node_count() == 0) return ";";
  int r = 0;
  if (root) {
    r = *root;
  } else {
    for (int v = static_cast<int>(t.node_count()) - 1; v >= 0; --v) {
      if (!t.is_leaf(v) || t.node_count() == 1) {
        r = v;
        break;
      }
    }
  }
  std::string out;
  write_newick(t, r, -1, out);
  return out + ";";
}

namespace {

class NewickParser {
 public:
  explicit NewickParser(const std::string& s) : s_(s) {}

  PhyloTree run() {
    skip();
    const int root = subtree(-1, 0);
    skip();
    if (pos_ < s_.size() && s_[pos_] == ';') ++pos_;
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    // Suppress a degree-2 root so the tree is unrooted.
    if (t_.adj[root].size() == 2 && t_.names[root].empty()) {
      const auto a = t_.adj[root][0];
      const auto b = t_.adj[root][1];
      t_.disconnect(root, a.to);
      t_.disconnect(root, b.to);
      t_.connect(a.to, b.to, a.length + b.length);
      PhyloTree compact;
      std::vector<int> remap(t_.node_count(), -1);
      for (int v = 0; v < static_cast<int>(t_.node_count()); ++v) {
        if (v != root) remap[v] = compact.add_node(t_.names[v]);
      }
      for (int v = 0; v < static_cast<int>(t_.node_count()); ++v) {
        for (const auto& e : t_.adj[v]) {
          if (v < e.to) compact.connect(remap[v], remap[e.to], e.length);
        }
      }
      t_ = std::move(compact);
    } else {
      // Leaves first and the root last, matching the layout to_newick roots by default.
      const int n = static_cast<int>(t_.node_count());
      std::vector<int> order;
      for (int v = 0; v < n; ++v) {
        if (t_.is_leaf(v) && v != root) order.push_back(v);
      }
      for (int v = 0; v < n; ++v) {
        if (!t_.is_leaf(v) && v != root) order.push_back(v);
      }
      order.push_back(root);
      PhyloTree ordered;
      std::vector<int> remap(n, -1);
      for (int v : order) remap[v] = ordered.add_node(t_.names[v]);
      for (int v = 0; v < n; ++v) {
        for (const auto& e : t_.adj[v]) {
          if (v < e.to) ordered.connect(remap[v], remap[e.to], e.length);
        }
      }
      t_ = std::move(ordered);
    }
    std::set<std::string> seen;
    for (int v : t_.leaves()) {
      if (!seen.insert(t_.names[v]).second) {
        throw Error(ErrorCode::DuplicateName, "Newick leaf '" + t_.names[v] + "' repeated");
      }
    }
    return std::move(t_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, "Newick: " + what + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  int subtree(int parent, int depth) {
    if (depth > 10000) fail("nesting too deep");
    const int v = t_.add_node();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      while (true) {
        const int child = subtree(v, depth + 1);
        (void)child;
        skip();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < s_.size() && s_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    skip();
    t_.names[v] = name();
    skip();
    double length = 0;
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      skip();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                                  s_[pos_] == '.' || s_[pos_] == '-' || s_[pos_] == '+' ||
                                  s_[pos_] == 'e' || s_[pos_] == 'E')) {
        ++pos_;
      }
      try {
        std::size_t used = 0;
        length = std::stod(s_.substr(start, pos_ - start), &used);
        if (used != pos_ - start) fail("bad branch length");
      } catch (const std::logic_error&) {
        fail("bad branch length");
      }
    }
    if (t_.adj[v].empty() && t_.names[v].empty()) fail("unnamed leaf");
    if (parent >= 0) t_.connect(parent, v, length);
    return v;
  }

  std::string name() {
    std::string out;
    if (pos_ < s_.size() && s_[pos_] == '\'') {
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) fail("unterminated quoted name");
        if (s_[pos_] == '\'') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          return out;
        }
        out += s_[pos_++];
      }
    }
    while (pos_ < s_.size() && std::string_view("(),:;").find(s_[pos_]) == std::string_view::npos &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      out += s_[pos_++];
    }
    return out;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  PhyloTree t_;
};

}  // namespace

PhyloTree tree_from_newick(const std::string& text) { return NewickParser(text).run(); }

RootEdge midpoint_root(const PhyloTree& t) {
  const auto leaves = t.leaves();
  if (leaves.size() < 2) throw Error(ErrorCode::TooFewTaxa, "midpoint rooting needs 2 leaves");
  int ba = -1, bb = -1;
  double best = -1;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      const double len = path_length(t, leaves[i], leaves[j]);
      auto names = std::minmax(t.names[leaves[i]], t.names[leaves[j]]);
      const bool tie = std::abs(len - best) <= 1e-12 * std::max(1.0, best);
      if (len > best + 1e-12 * std::max(1.0, best) ||
          (tie && names < std::minmax(t.names[ba], t.names[bb]))) {
        best = len;
        ba = leaves[i];
        bb = leaves[j];
      }
    }
  }
  if (t.names[bb] < t.names[ba]) std::swap(ba, bb);
  // Walk from ba towards bb until half the length is covered.
  std::vector<int> path;
  std::function<bool(int, int)> find = [&](int v, int parent) {
    path.push_back(v);
    if (v == bb) return true;
    for (const auto& e : t.adj[v]) {
      if (e.to != parent && find(e.to, v)) return true;
    }
    path.pop_back();
    return false;
  };
  find(ba, -1);
  double remaining = best / 2;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double len = t.edge_length(path[k], path[k + 1]);
    if (remaining <= len || k + 2 == path.size()) {
      return {path[k], path[k + 1], std::clamp(remaining, 0.0, len)};
    }
    remaining -= len;
  }
  return {path[0], path[1], 0.0};
}

FitchResult fitch_ancestral(const PhyloTree& t, const std::map<std::string, bool>& traits,
                            std::optional<RootEdge> root) {
  for (int v : t.leaves()) {
    if (!traits.count(t.names[v])) {
      throw Error(ErrorCode::MissingLeafTrait, "no trait value for leaf '" + t.names[v] + "'");
    }
  }
  FitchResult result;
  result.root = root ? *root : midpoint_root(t);
  const int a = result.root.a;
  const int b = result.root.b;
  bool adjacent = false;
  for (const auto& e : t.adj[a]) adjacent |= e.to == b;
  if (!adjacent) throw Error(ErrorCode::InvalidArgument, "root edge endpoints are not adjacent");

  const std::size_t n = t.node_count();
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  // down[v][s]: fewest changes below v given v has state s.
  std::vector<std::array<int, 2>> down(n, {0, 0});
  std::vector<unsigned> prelim(n, 0);  // Fitch sets as bit masks
  int cost = 0;
  std::function<void(int, int)> up_pass = [&](int v, int parent) {
    std::vector<int> kids;
    for (const auto& e : t.adj[v]) {
      if (e.to != parent) kids.push_back(e.to);
    }
    if (kids.empty()) {
      const int s = traits.at(t.names[v]) ? 1 : 0;
      prelim[v] = 1u << s;
      down[v] = {s == 0 ? 0 : kInf, s == 1 ? 0 : kInf};
      return;
    }
    unsigned inter = 3u, uni = 0u;
    for (int c : kids) {
      up_pass(c, v);
      inter &= prelim[c];
      uni |= prelim[c];
    }
    if (kids.size() == 2) {
      if (inter) {
        prelim[v] = inter;
      } else {
        prelim[v] = uni;
        ++cost;
      }
    }
    for (int s = 0; s < 2; ++s) {
      int total = 0;
      for (int c : kids) total += std::min(down[c][s], down[c][1 - s] + 1);
      down[v][s] = total;
    }
    if (kids.size() != 2) {
      // Multifurcation: fall back to the state costs.
      const int lo = std::min(down[v][0], down[v][1]);
      prelim[v] = (down[v][0] == lo ? 1u : 0u) | (down[v][1] == lo ? 2u : 0u);
    }
  };
  up_pass(a, b);
  up_pass(b, a);
  std::array<int, 2> root_down{};
  for (int s = 0; s < 2; ++s) {
    root_down[s] = std::min(down[a][s], down[a][1 - s] + 1) + std::min(down[b][s], down[b][1 - s] + 1);
  }
  const int best = std::min(root_down[0], root_down[1]);
  // Fitch count at the root; equal to the minimum of the state costs.
  if ((prelim[a] & prelim[b]) == 0) ++cost;
  bool binary = true;
  for (int v = 0; v < static_cast<int>(n); ++v) binary &= t.adj[v].size() <= 3;
  result.cost = binary ? cost : best;

  // Second pass: out[v][s] = fewest changes outside v's subtree given v = s.
  result.states.assign(n, {});
  for (int s = 0; s < 2; ++s) {
    if (root_down[s] == best) result.root_states.insert(static_cast<TraitState>(s));
  }
  std::function<void(int, int, std::array<int, 2>)> down_pass =
      [&](int v, int parent, std::array<int, 2> out) {
        for (int s = 0; s < 2; ++s) {
          if (down[v][s] < kInf && down[v][s] + out[s] == best) {
            result.states[v].insert(static_cast<TraitState>(s));
          }
        }
        std::vector<int> kids;
        for (const auto& e : t.adj[v]) {
          if (e.to != parent) kids.push_back(e.to);
        }
        for (int c : kids) {
          // Cost at v with state u, excluding c's subtree.
          std::array<int, 2> at_v{};
          for (int u = 0; u < 2; ++u) {
            int total = out[u];
            for (int k : kids) {
              if (k != c) total += std::min(down[k][u], down[k][1 - u] + 1);
            }
            at_v[u] = total;
          }
          std::array<int, 2> child_out{};
          for (int s = 0; s < 2; ++s) child_out[s] = std::min(at_v[s], at_v[1 - s] + 1);
          down_pass(c, v, child_out);
        }
      };
  std::array<int, 2> out_a{}, out_b{};
  for (int s = 0; s < 2; ++s) {
    // The root sits between a and b; its state r costs [r != s] on each edge.
    int via_a = kInf, via_b = kInf;
    for (int r = 0; r < 2; ++r) {
      via_a = std::min(via_a, (r != s) + std::min(down[b][r], down[b][1 - r] + 1));
      via_b = std::min(via_b, (r != s) + std::min(down[a][r], down[a][1 - r] + 1));
    }
    out_a[s] = via_a;
    out_b[s] = via_b;
  }
  down_pass(a, b, out_a);
  down_pass(b, a, out_b);
  return result;
}

InfluenceNetwork influence_network(const DistanceMatrix& m, const std::map<std::string, int>& dates,
                                   double threshold) {
  InfluenceNetwork net;
  for (const auto& l : m.labels) {
    auto it = dates.find(l);
    if (it == dates.end()) throw Error(ErrorCode::MissingDate, "no date for '" + l + "'");
    net.dates[l] = it->second;
  }
  net.nodes = m.labels;
  std::sort(net.nodes.begin(), net.nodes.end());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      const std::string& a = m.labels[i];
      const std::string& b = m.labels[j];
      if (i == j || !(net.dates[a] < net.dates[b])) continue;
      if (m.d[i][j] < threshold) net.edges.push_back({a, b, 1.0 - m.d[i][j] / threshold});
    }
  }
  std::sort(net.edges.begin(), net.edges.end(), [](const auto& x, const auto& y) {
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });
  return net;
}

std::string to_dot(const InfluenceNetwork& net) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::string out = "digraph influence {\n";
  for (const auto& n : net.nodes) {
    out += "  " + quote(n) + " [date=" + std::to_string(net.dates.at(n)) + "];\n";
  }
  for (const auto& e : net.edges) {
    out += "  " + quote(e.from) + " -> " + quote(e.to) + " [weight=" + format_number(e.weight) +
           "];\n";
  }
  return out + "}\n";
}

}  // namespace lud
