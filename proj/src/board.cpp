#include "lud/board.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>

namespace lud {

int BoardGraph::label_index(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::size_t BoardGraph::edge_count() const {
  std::size_t degree_sum = 0;
  for (const auto& n : adjacency_) degree_sum += n.size();
  return degree_sum / 2;
}

namespace {

constexpr std::size_t kMaxAutomorphisms = 100000;

struct Axial {
  int q;
  int r;
};

const int kHexDq[6] = {1, 1, 0, -1, -1, 0};
const int kHexDr[6] = {0, -1, -1, 0, 1, 1};
const char* const kHexLabels[6] = {"E", "NE", "NW", "W", "SW", "SE"};

}  // namespace

class BoardBuilder {
 public:
  BoardGraph g;

  std::vector<Point>& layout() { return g.layout_; }
  std::map<std::string, std::vector<int>>& regions() { return g.regions_; }
  std::vector<bool>& diagonal() { return g.diagonal_; }
  std::vector<int>& opposite() { return g.opposite_; }

  void init(std::string shape, int cells, std::vector<std::string> labels) {
    if (cells < 1 || cells > kMaxCells) {
      throw Error(ErrorCode::SizeOutOfRange,
                  shape + " board with " + std::to_string(cells) + " cells");
    }
    g.shape_ = std::move(shape);
    g.adjacency_.assign(cells, {});
    g.labels_ = std::move(labels);
    g.step_.assign(static_cast<std::size_t>(cells) * g.labels_.size(), BoardGraph::kOff);
    g.opposite_.assign(g.labels_.size(), -1);
    g.diagonal_.assign(g.labels_.size(), false);
    g.layout_.assign(cells, {});
  }

  // Directed labeled link a -> b. The reverse link is added separately.
  void link(int a, int b, int label) {
    for (const auto& n : g.adjacency_[a]) {
      if (n.cell == b && n.label == label) return;
    }
    g.adjacency_[a].push_back({b, label});
  }

  void set_step(int a, int label, int b) { g.step_[a * g.label_count() + label] = b; }

  void pair_labels(std::string_view a, std::string_view b) {
    const int ia = g.label_index(a);
    const int ib = g.label_index(b);
    if (ia >= 0 && ib >= 0) {
      g.opposite_[ia] = ib;
      g.opposite_[ib] = ia;
    }
  }

  void finish(std::vector<Permutation> geometric) {
    for (auto& n : g.adjacency_) {
      std::sort(n.begin(), n.end(), [](const Neighbor& x, const Neighbor& y) {
        return x.cell != y.cell ? x.cell < y.cell : x.label < y.label;
      });
    }
    if (g.size() <= kMaxExhaustiveCells) {
      g.symmetries_ = automorphisms(plain_adjacency());
    } else {
      g.symmetries_.clear();
      for (auto& p : geometric) {
        if (is_automorphism(p)) g.symmetries_.push_back(std::move(p));
      }
      std::sort(g.symmetries_.begin(), g.symmetries_.end());
      g.symmetries_.erase(std::unique(g.symmetries_.begin(), g.symmetries_.end()),
                          g.symmetries_.end());
      Permutation identity(g.size());
      std::iota(identity.begin(), identity.end(), 0);
      auto it = std::find(g.symmetries_.begin(), g.symmetries_.end(), identity);
      if (it == g.symmetries_.end()) {
        g.symmetries_.insert(g.symmetries_.begin(), identity);
      } else {
        std::rotate(g.symmetries_.begin(), it, it + 1);
      }
    }
    g.label_maps_.clear();
    for (const auto& p : g.symmetries_) g.label_maps_.push_back(label_map(p));
    local_maps();
  }

 private:
  // Labels listed in cyclic order around a cell; `step` is the rotation
  // quantum (2 keeps orthogonal and diagonal labels apart).
  void dihedral(const std::vector<std::string>& cycle, int step) {
    const int n = static_cast<int>(cycle.size());
    std::vector<int> index(n);
    for (int i = 0; i < n; ++i) index[i] = g.label_index(cycle[i]);
    for (int mirror = 0; mirror < 2; ++mirror) {
      for (int k = 0; k < n; k += step) {
        std::vector<int> map(g.label_count());
        std::iota(map.begin(), map.end(), 0);
        for (int i = 0; i < n; ++i) {
          const int j = mirror ? ((k - i) % n + n) % n : (i + k) % n;
          map[index[i]] = index[j];
        }
        g.local_label_maps_.push_back(std::move(map));
      }
    }
  }

  void local_maps() {
    g.local_label_maps_.clear();
    const std::string& s = g.shape_;
    if (s == "hex" || s == "diamond") {
      dihedral({"E", "NE", "NW", "W", "SW", "SE"}, 1);
    } else if ((s == "square" || s == "rectangle") && g.label_count() == 8) {
      dihedral({"N", "NE", "E", "SE", "S", "SW", "W", "NW"}, 2);
    } else if (s == "square" || s == "rectangle") {
      dihedral({"N", "E", "S", "W"}, 1);
    } else {
      std::set<std::vector<int>> seen;
      for (const auto& m : g.label_maps_) {
        if (!m.empty() && seen.insert(m).second) g.local_label_maps_.push_back(m);
      }
      if (g.local_label_maps_.empty()) {
        std::vector<int> identity(g.label_count());
        std::iota(identity.begin(), identity.end(), 0);
        g.local_label_maps_.push_back(std::move(identity));
      }
    }
  }

  std::vector<std::vector<int>> plain_adjacency() const {
    std::vector<std::vector<int>> adj(g.size());
    for (int c = 0; c < g.size(); ++c) {
      for (const auto& n : g.adjacency_[c]) adj[c].push_back(n.cell);
      std::sort(adj[c].begin(), adj[c].end());
      adj[c].erase(std::unique(adj[c].begin(), adj[c].end()), adj[c].end());
    }
    return adj;
  }

  bool is_automorphism(const Permutation& p) const {
    if (static_cast<int>(p.size()) != g.size()) return false;
    const auto adj = plain_adjacency();
    for (int c = 0; c < g.size(); ++c) {
      std::vector<int> mapped;
      for (int n : adj[c]) mapped.push_back(p[n]);
      std::sort(mapped.begin(), mapped.end());
      if (mapped != adj[p[c]]) return false;
    }
    return true;
  }

  std::vector<int> label_map(const Permutation& p) const {
    const int L = g.label_count();
    std::vector<int> map(L, -1);
    for (int l = 0; l < L; ++l) {
      for (int c = 0; c < g.size() && map[l] < 0; ++c) {
        const int d = g.step(c, l);
        if (d == BoardGraph::kOff) continue;
        for (int l2 = 0; l2 < L; ++l2) {
          if (g.step(p[c], l2) == p[d]) {
            map[l] = l2;
            break;
          }
        }
        if (map[l] < 0) return {};
      }
      // A label with no step anywhere (wheel OUT) can only map to itself.
      if (map[l] < 0) {
        bool stepless = true;
        for (int c = 0; c < g.size() && stepless; ++c) stepless = g.step(c, l) == BoardGraph::kOff;
        if (stepless) map[l] = l;
      }
      if (map[l] < 0) return {};
    }
    std::vector<int> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    if (std::unique(sorted.begin(), sorted.end()) != sorted.end()) return {};
    for (int c = 0; c < g.size(); ++c) {
      for (int l = 0; l < L; ++l) {
        const int d = g.step(c, l);
        const int expect = d == BoardGraph::kOff ? BoardGraph::kOff : p[d];
        if (g.step(p[c], map[l]) != expect) return {};
      }
    }
    return map;
  }
};

namespace {

void build_grid(BoardBuilder& b, int rows, int cols, bool diagonals, const std::string& shape) {
  std::vector<std::string> labels = diagonals
      ? std::vector<std::string>{"N", "NE", "E", "SE", "S", "SW", "W", "NW"}
      : std::vector<std::string>{"N", "E", "S", "W"};
  if (static_cast<long long>(rows) * cols > kMaxCells) {
    throw Error(ErrorCode::SizeOutOfRange, shape + " board exceeds " + std::to_string(kMaxCells) +
                                               " cells");
  }
  b.init(shape, rows * cols, labels);
  const struct {
    const char* name;
    int dr, dc;
    bool diagonal;
  } dirs[] = {{"N", -1, 0, false}, {"NE", -1, 1, true}, {"E", 0, 1, false},  {"SE", 1, 1, true},
              {"S", 1, 0, false},  {"SW", 1, -1, true}, {"W", 0, -1, false}, {"NW", -1, -1, true}};
  for (const auto& d : dirs) {
    const int l = b.g.label_index(d.name);
    if (l < 0) continue;
    b.diagonal()[l] = d.diagonal;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int nr = r + d.dr;
        const int nc = c + d.dc;
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
        b.link(r * cols + c, nr * cols + nc, l);
        b.set_step(r * cols + c, l, nr * cols + nc);
      }
    }
  }
  b.pair_labels("N", "S");
  b.pair_labels("E", "W");
  b.pair_labels("NE", "SW");
  b.pair_labels("NW", "SE");
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) b.layout()[r * cols + c] = {double(c), double(r)};
  }
  auto& regions = b.regions();
  for (int c = 0; c < cols; ++c) {
    regions["N"].push_back(c);
    regions["S"].push_back((rows - 1) * cols + c);
  }
  for (int r = 0; r < rows; ++r) {
    regions["W"].push_back(r * cols);
    regions["E"].push_back(r * cols + cols - 1);
  }

  std::vector<Permutation> geo;
  auto transform = [&](auto fn) {
    Permutation p(rows * cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        auto [nr, nc] = fn(r, c);
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) return;
        p[r * cols + c] = nr * cols + nc;
      }
    }
    geo.push_back(p);
  };
  const int R = rows - 1;
  const int C = cols - 1;
  transform([](int r, int c) { return std::pair{r, c}; });
  transform([&](int r, int c) { return std::pair{r, C - c}; });
  transform([&](int r, int c) { return std::pair{R - r, c}; });
  transform([&](int r, int c) { return std::pair{R - r, C - c}; });
  if (rows == cols) {
    transform([](int r, int c) { return std::pair{c, r}; });
    transform([&](int r, int c) { return std::pair{c, R - r}; });
    transform([&](int r, int c) { return std::pair{C - c, r}; });
    transform([&](int r, int c) { return std::pair{C - c, R - r}; });
  }
  b.finish(std::move(geo));
}

void build_axial(BoardBuilder& b, const std::vector<Axial>& cells, const std::string& shape,
                 const std::vector<std::function<Axial(Axial)>>& transforms) {
  if (cells.size() > static_cast<std::size_t>(kMaxCells)) {
    throw Error(ErrorCode::SizeOutOfRange, shape + " board exceeds " + std::to_string(kMaxCells) +
                                               " cells");
  }
  b.init(shape, static_cast<int>(cells.size()),
         {kHexLabels[0], kHexLabels[1], kHexLabels[2], kHexLabels[3], kHexLabels[4],
          kHexLabels[5]});
  std::map<std::pair<int, int>, int> index;
  for (std::size_t i = 0; i < cells.size(); ++i) index[{cells[i].q, cells[i].r}] = int(i);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (int l = 0; l < 6; ++l) {
      auto it = index.find({cells[i].q + kHexDq[l], cells[i].r + kHexDr[l]});
      if (it == index.end()) continue;
      b.link(int(i), it->second, l);
      b.set_step(int(i), l, it->second);
    }
    b.layout()[i] = {cells[i].q + cells[i].r / 2.0, cells[i].r * std::sqrt(3.0) / 2.0};
  }
  for (int l = 0; l < 3; ++l) {
    b.opposite()[l] = l + 3;
    b.opposite()[l + 3] = l;
  }
  std::vector<Permutation> geo;
  for (const auto& t : transforms) {
    Permutation p(cells.size());
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && ok; ++i) {
      const Axial a = t(cells[i]);
      auto it = index.find({a.q, a.r});
      if (it == index.end()) {
        ok = false;
      } else {
        p[i] = it->second;
      }
    }
    if (ok) geo.push_back(std::move(p));
  }
  b.finish(std::move(geo));
}

void build_hexagon(BoardBuilder& b, int side) {
  if (side < 1 || side > 40) throw Error(ErrorCode::SizeOutOfRange, "hex side " + std::to_string(side));
  const int m = side - 1;
  std::vector<Axial> cells;
  for (int r = -m; r <= m; ++r) {
    for (int q = -m; q <= m; ++q) {
      if (std::abs(q + r) <= m) cells.push_back({q, r});
    }
  }
  // Rotation by 60 degrees: (q, r) -> (-r, q + r); reflection: (q, r) -> (r, q).
  std::vector<std::function<Axial(Axial)>> transforms;
  for (int flip = 0; flip < 2; ++flip) {
    for (int rot = 0; rot < 6; ++rot) {
      transforms.push_back([flip, rot](Axial a) {
        if (flip) a = {a.r, a.q};
        for (int k = 0; k < rot; ++k) a = {-a.r, a.q + a.r};
        return a;
      });
    }
  }
  build_axial(b, cells, "hex", transforms);
  auto& regions = b.regions();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].r == -m) regions["N"].push_back(int(i));
    if (cells[i].r == m) regions["S"].push_back(int(i));
    if (cells[i].q == -m) regions["W"].push_back(int(i));
    if (cells[i].q == m) regions["E"].push_back(int(i));
  }
}

void build_diamond(BoardBuilder& b, int n) {
  if (n < 1 || n > 64) throw Error(ErrorCode::SizeOutOfRange, "diamond size " + std::to_string(n));
  std::vector<Axial> cells;
  for (int r = 0; r < n; ++r) {
    for (int q = 0; q < n; ++q) cells.push_back({q, r});
  }
  const int m = n - 1;
  std::vector<std::function<Axial(Axial)>> transforms = {
      [](Axial a) { return a; },
      [m](Axial a) { return Axial{m - a.q, m - a.r}; },
      [](Axial a) { return Axial{a.r, a.q}; },
      [m](Axial a) { return Axial{m - a.r, m - a.q}; },
  };
  build_axial(b, cells, "diamond", transforms);
  auto& regions = b.regions();
  for (int i = 0; i < n; ++i) {
    regions["N"].push_back(i);
    regions["S"].push_back(m * n + i);
    regions["W"].push_back(i * n);
    regions["E"].push_back(i * n + m);
  }
}

void build_wheel(BoardBuilder& b, int spokes) {
  if (spokes < 3 || spokes + 1 > kMaxCells) {
    throw Error(ErrorCode::SizeOutOfRange, "wheel spokes " + std::to_string(spokes));
  }
  b.init("wheel", spokes + 1, {"CW", "CCW", "IN", "OUT"});
  const int hub = spokes;
  for (int i = 0; i < spokes; ++i) {
    const int cw = (i + 1) % spokes;
    const int ccw = (i + spokes - 1) % spokes;
    b.link(i, cw, 0);
    b.set_step(i, 0, cw);
    b.link(i, ccw, 1);
    b.set_step(i, 1, ccw);
    b.link(i, hub, 2);
    b.set_step(i, 2, hub);
    // OUT from the hub has no unique target, so it gets no step entry.
    b.link(hub, i, 3);
    const double angle = 2.0 * M_PI * i / spokes;
    b.layout()[i] = {std::sin(angle), -std::cos(angle)};
  }
  b.layout()[hub] = {0.0, 0.0};
  b.pair_labels("CW", "CCW");
  b.pair_labels("IN", "OUT");
  std::vector<Permutation> geo;
  for (int flip = 0; flip < 2; ++flip) {
    for (int rot = 0; rot < spokes; ++rot) {
      Permutation p(spokes + 1);
      for (int i = 0; i < spokes; ++i) {
        const int j = flip ? (spokes - i) % spokes : i;
        p[i] = (j + rot) % spokes;
      }
      p[hub] = hub;
      geo.push_back(std::move(p));
    }
  }
  b.finish(std::move(geo));
}

void build_graph(BoardBuilder& b, const LudemeNode& node) {
  const LudemeNode* vertices = node.child("vertices");
  const LudemeNode* edges = node.child("edges");
  if (!vertices || !edges || vertices->args.size() != 1 || !vertices->args[0].is_int()) {
    throw Error(ErrorCode::MalformedGraph, "graph needs (vertices n) and (edges ...)", node.span);
  }
  const std::int64_t n = vertices->args[0].value;
  if (n < 1 || n > kMaxCells) {
    throw Error(ErrorCode::SizeOutOfRange, "graph with " + std::to_string(n) + " vertices");
  }
  if (edges->args.size() % 2 != 0) {
    throw Error(ErrorCode::MalformedGraph, "edge list has an odd number of endpoints", edges->span);
  }
  b.init("graph", static_cast<int>(n), {});
  for (std::size_t i = 0; i < edges->args.size(); i += 2) {
    const auto& ea = edges->args[i];
    const auto& eb = edges->args[i + 1];
    if (!ea.is_int() || !eb.is_int()) {
      throw Error(ErrorCode::MalformedGraph, "edge endpoints must be integers", edges->span);
    }
    if (ea.value < 0 || ea.value >= n || eb.value < 0 || eb.value >= n) {
      throw Error(ErrorCode::MalformedGraph,
                  "dangling edge " + std::to_string(ea.value) + "-" + std::to_string(eb.value),
                  edges->span);
    }
    if (ea.value == eb.value) {
      throw Error(ErrorCode::MalformedGraph, "self-loop on " + std::to_string(ea.value),
                  edges->span);
    }
    b.link(int(ea.value), int(eb.value), -1);
    b.link(int(eb.value), int(ea.value), -1);
  }
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * M_PI * i / double(n);
    b.layout()[i] = {std::sin(angle), -std::cos(angle)};
  }
  if (n > kMaxExhaustiveCells) {
    throw Error(ErrorCode::TooLargeForExhaustive,
                "explicit graph with " + std::to_string(n) + " vertices");
  }
  b.finish({});
}

}  // namespace

BoardGraph build_board(const LudemeNode& node, bool diagonals) {
  if (node.is_ludeme() && node.text == "board") {
    if (node.args.empty()) throw Error(ErrorCode::ArityMismatch, "board without a shape", node.span);
    return build_board(node.args[0], node.has_flag("diagonals"));
  }
  auto int_arg = [&](std::size_t i) -> int {
    if (node.args.size() <= i || !node.args[i].is_int()) {
      throw Error(ErrorCode::KindMismatch, "'" + node.text + "' expects an integer", node.span);
    }
    const auto v = node.args[i].value;
    if (v < 1 || v > kMaxCells) {
      throw Error(ErrorCode::SizeOutOfRange, node.text + " size " + std::to_string(v), node.span);
    }
    return static_cast<int>(v);
  };
  BoardBuilder b;
  if (node.text == "square") {
    const int n = int_arg(0);
    build_grid(b, n, n, diagonals, "square");
  } else if (node.text == "rectangle") {
    build_grid(b, int_arg(0), int_arg(1), diagonals, "rectangle");
  } else if (node.text == "hex") {
    build_hexagon(b, int_arg(0));
  } else if (node.text == "diamond") {
    build_diamond(b, int_arg(0));
  } else if (node.text == "wheel") {
    build_wheel(b, int_arg(0));
  } else if (node.text == "graph") {
    build_graph(b, node);
  } else {
    throw Error(ErrorCode::KindMismatch, "'" + node.text + "' is not a board shape", node.span);
  }
  return std::move(b.g);
}

std::vector<Permutation> automorphisms(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  if (n > kMaxExhaustiveCells) {
    throw Error(ErrorCode::TooLargeForExhaustive, std::to_string(n) + " vertices");
  }
  std::vector<std::uint64_t> bits(n, 0);
  for (int v = 0; v < n; ++v) {
    for (int u : adjacency[v]) bits[v] |= std::uint64_t{1} << u;
  }
  std::vector<int> degree(n);
  for (int v = 0; v < n; ++v) degree[v] = __builtin_popcountll(bits[v]);

  // Visit order: breadth-first per component so that most vertices have an
  // already-mapped neighbor restricting their candidates.
  std::vector<int> order;
  std::vector<int> parent(n, -1);
  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    seen[s] = true;
    std::size_t head = order.size();
    order.push_back(s);
    while (head < order.size()) {
      const int v = order[head++];
      for (int u : adjacency[v]) {
        if (!seen[u]) {
          seen[u] = true;
          parent[u] = v;
          order.push_back(u);
        }
      }
    }
  }

  std::vector<Permutation> result;
  Permutation image(n, -1);
  std::uint64_t used = 0;
  std::function<void(int)> extend = [&](int depth) {
    if (depth == n) {
      if (result.size() >= kMaxAutomorphisms) {
        throw Error(ErrorCode::TooLargeForExhaustive, "automorphism group too large");
      }
      result.push_back(image);
      return;
    }
    const int v = order[depth];
    std::uint64_t candidates = parent[v] >= 0 ? bits[image[parent[v]]] : ~std::uint64_t{0};
    if (n < 64) candidates &= (std::uint64_t{1} << n) - 1;
    candidates &= ~used;
    while (candidates) {
      const int w = __builtin_ctzll(candidates);
      candidates &= candidates - 1;
      if (degree[w] != degree[v]) continue;
      bool ok = true;
      for (int k = 0; k < depth && ok; ++k) {
        const int x = order[k];
        const bool a = (bits[v] >> x) & 1;
        const bool b = (bits[w] >> image[x]) & 1;
        ok = a == b;
      }
      if (!ok) continue;
      image[v] = w;
      used |= std::uint64_t{1} << w;
      extend(depth + 1);
      used &= ~(std::uint64_t{1} << w);
      image[v] = -1;
    }
  };
  extend(0);
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace lud
