#include "lud/distance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "lud/parallel.hpp"

namespace lud {

WeightTable WeightTable::defaults() {
  WeightTable w;
  w.indel["Board"] = 2.0;
  w.indel["EndRule"] = 2.0;
  return w;
}

WeightTable WeightTable::unit() {
  WeightTable w;
  w.cross_relabel = 1.0;
  return w;
}

double WeightTable::indel_cost(const std::string& node_class) const {
  auto it = indel.find(node_class);
  return it == indel.end() ? default_indel : it->second;
}

WeightTable WeightTable::scaled(double k) const {
  WeightTable w = *this;
  for (auto& [_, c] : w.indel) c *= k;
  w.default_indel *= k;
  w.relabel *= k;
  w.cross_relabel *= k;
  w.numeric *= k;
  return w;
}

WeightTable weight_table_from_json(const nlohmann::json& j) {
  WeightTable w = WeightTable::defaults();
  try {
    if (j.contains("indel")) w.indel = j.at("indel").get<std::map<std::string, double>>();
    w.default_indel = j.value("default_indel", w.default_indel);
    w.relabel = j.value("relabel", w.relabel);
    w.cross_relabel = j.value("cross_relabel", w.cross_relabel);
    w.numeric = j.value("numeric", w.numeric);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("weight table: ") + e.what());
  }
  auto check = [](double c, const char* what, bool positive) {
    if (!std::isfinite(c) || c < 0 || (positive && c == 0)) {
      throw Error(ErrorCode::ParseError, std::string("weight table: bad ") + what + " cost");
    }
  };
  for (const auto& [_, c] : w.indel) check(c, "indel", true);
  check(w.default_indel, "indel", true);
  check(w.relabel, "relabel", false);
  check(w.cross_relabel, "cross_relabel", false);
  check(w.numeric, "numeric", false);
  return w;
}

nlohmann::json to_json(const WeightTable& w) {
  return {{"indel", w.indel},
          {"default_indel", w.default_indel},
          {"relabel", w.relabel},
          {"cross_relabel", w.cross_relabel},
          {"numeric", w.numeric}};
}

std::string node_class(const LudemeNode& n, const LudemeLibrary& library) {
  switch (n.kind) {
    case LudemeNode::Kind::Int: return "Numeric";
    case LudemeNode::Kind::Identifier: return "Identifier";
    case LudemeNode::Kind::Flag: return "Flag";
    case LudemeNode::Kind::Ludeme: break;
  }
  const LudemeSchema* s = library.find(n.text);
  return std::string(to_string(s ? s->category : Category::Modifier));
}

namespace {

struct FlatNode {
  LudemeNode::Kind kind;
  std::string text;
  std::int64_t value;
  std::string cls;
  int lmld;  // postorder index of the leftmost leaf descendant
};

int flatten(const LudemeNode& n, const LudemeLibrary& library, std::vector<FlatNode>& out) {
  int leftmost = -1;
  for (const auto& a : n.args) {
    const int l = flatten(a, library, out);
    if (leftmost < 0) leftmost = l;
  }
  const int self = static_cast<int>(out.size());
  out.push_back({n.kind, n.text, n.value, node_class(n, library), leftmost < 0 ? self : leftmost});
  return out.back().lmld;
}

double relabel_cost(const FlatNode& a, const FlatNode& b, const WeightTable& w) {
  if (a.kind == b.kind) {
    if (a.kind == LudemeNode::Kind::Int) return a.value == b.value ? 0.0 : w.numeric;
    if (a.text == b.text) return 0.0;
  }
  return a.cls == b.cls ? w.relabel : w.cross_relabel;
}

}  // namespace

double tree_edit_distance(const LudemeNode& a, const LudemeNode& b, const WeightTable& w,
                          const LudemeLibrary& library) {
  std::vector<FlatNode> A;
  std::vector<FlatNode> B;
  flatten(a, library, A);
  flatten(b, library, B);
  const int n = static_cast<int>(A.size());
  const int m = static_cast<int>(B.size());

  auto keyroots = [](const std::vector<FlatNode>& t) {
    std::vector<int> roots;
    std::set<int> seen;
    for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
      if (seen.insert(t[i].lmld).second) roots.push_back(i);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
  };
  std::vector<double> del(n), ins(m);
  for (int i = 0; i < n; ++i) del[i] = w.indel_cost(A[i].cls);
  for (int j = 0; j < m; ++j) ins[j] = w.indel_cost(B[j].cls);

  std::vector<std::vector<double>> tree(n, std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> forest(n + 1, std::vector<double>(m + 1, 0.0));
  for (int i : keyroots(A)) {
    for (int j : keyroots(B)) {
      const int li = A[i].lmld;
      const int lj = B[j].lmld;
      // forest[x][y]: distance between A[li..li+x-1] and B[lj..lj+y-1].
      forest[0][0] = 0;
      for (int x = 1; x <= i - li + 1; ++x) forest[x][0] = forest[x - 1][0] + del[li + x - 1];
      for (int y = 1; y <= j - lj + 1; ++y) forest[0][y] = forest[0][y - 1] + ins[lj + y - 1];
      for (int x = 1; x <= i - li + 1; ++x) {
        const int ai = li + x - 1;
        for (int y = 1; y <= j - lj + 1; ++y) {
          const int bj = lj + y - 1;
          const double drop = forest[x - 1][y] + del[ai];
          const double add = forest[x][y - 1] + ins[bj];
          if (A[ai].lmld == li && B[bj].lmld == lj) {
            const double sub = forest[x - 1][y - 1] + relabel_cost(A[ai], B[bj], w);
            forest[x][y] = std::min({drop, add, sub});
            tree[ai][bj] = forest[x][y];
          } else {
            const double sub = forest[A[ai].lmld - li][B[bj].lmld - lj] + tree[ai][bj];
            forest[x][y] = std::min({drop, add, sub});
          }
        }
      }
    }
  }
  return tree[n - 1][m - 1];
}

double wed(const GameDescription& a, const GameDescription& b, const WeightTable& w,
           const LudemeLibrary& library) {
  const GameDescription ca = canonicalize(a, library);
  const GameDescription cb = canonicalize(b, library);
  return tree_edit_distance(ca.root(), cb.root(), w, library);
}

DistanceMatrix distance_matrix(const std::vector<GameDescription>& corpus, const WeightTable& w,
                               int threads) {
  DistanceMatrix m;
  std::set<std::string> names;
  std::vector<GameDescription> canon;
  for (const auto& gd : corpus) {
    if (!names.insert(gd.name()).second) {
      throw Error(ErrorCode::DuplicateName, "game '" + gd.name() + "' appears twice");
    }
    m.labels.push_back(gd.name());
    canon.push_back(canonicalize(gd));
  }
  const std::size_t n = corpus.size();
  m.d.assign(n, std::vector<double>(n, 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    values[k] = tree_edit_distance(canon[i].root(), canon[j].root(), w);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    m.d[i][j] = m.d[j][i] = values[k];
  }
  return m;
}

std::string format_number(double x) {
  if (x == 0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string to_csv(const DistanceMatrix& m) {
  std::string out;
  for (const auto& l : m.labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.labels[i];
    for (std::size_t j = 0; j < m.size(); ++j) out += "," + format_number(m.d[i][j]);
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

DistanceMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "distance matrix: empty input");
  DistanceMatrix m;
  m.labels.assign(rows[0].begin() + (rows[0].empty() ? 0 : 1), rows[0].end());
  const std::size_t n = m.labels.size();
  if (rows.size() != n + 1) {
    throw Error(ErrorCode::ParseError, "distance matrix: expected " + std::to_string(n) +
                                           " rows, found " + std::to_string(rows.size() - 1));
  }
  m.d.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    if (r.size() != n + 1 || r[0] != m.labels[i]) {
      throw Error(ErrorCode::ParseError,
                  "distance matrix: row " + std::to_string(i + 1) + " does not match the header");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& cell = r[j + 1];
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "distance matrix: bad number '" + cell + "'");
      }
      m.d[i][j] = v;
    }
  }
  std::set<std::string> names(m.labels.begin(), m.labels.end());
  if (names.size() != n) throw Error(ErrorCode::DuplicateName, "distance matrix: repeated label");
  for (std::size_t i = 0; i < n; ++i) {
    if (m.d[i][i] != 0) throw Error(ErrorCode::ParseError, "distance matrix: nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (m.d[i][j] != m.d[j][i] || m.d[i][j] < 0) {
        throw Error(ErrorCode::ParseError, "distance matrix: not symmetric and nonnegative");
      }
    }
  }
  return m;
}

}  // namespace lud
