#include "lud/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace lud {

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Game: return "Game";
    case Category::Players: return "Players";
    case Category::Equipment: return "Equipment";
    case Category::Board: return "Board";
    case Category::Piece: return "Piece";
    case Category::StartRule: return "StartRule";
    case Category::PlayRule: return "PlayRule";
    case Category::EndRule: return "EndRule";
    case Category::Condition: return "Condition";
    case Category::Region: return "Region";
    case Category::Modifier: return "Modifier";
  }
  return "Unknown";
}

const std::vector<Category>& all_categories() {
  static const std::vector<Category> kAll = {
      Category::Game,      Category::Players,   Category::Equipment, Category::Board,
      Category::Piece,     Category::StartRule, Category::PlayRule,  Category::EndRule,
      Category::Condition, Category::Region,    Category::Modifier};
  return kAll;
}

// ---------------------------------------------------------------------------
// LudemeNode

LudemeNode LudemeNode::ludeme(std::string keyword, std::vector<LudemeNode> args,
                              SourceSpan span) {
  LudemeNode n;
  n.kind = Kind::Ludeme;
  n.text = std::move(keyword);
  n.args = std::move(args);
  n.span = span;
  return n;
}

LudemeNode LudemeNode::integer(std::int64_t value, SourceSpan span) {
  LudemeNode n;
  n.kind = Kind::Int;
  n.value = value;
  n.span = span;
  return n;
}

LudemeNode LudemeNode::identifier(std::string text, SourceSpan span) {
  LudemeNode n;
  n.kind = Kind::Identifier;
  n.text = std::move(text);
  n.span = span;
  return n;
}

LudemeNode LudemeNode::flag(std::string name, SourceSpan span) {
  LudemeNode n;
  n.kind = Kind::Flag;
  n.text = std::move(name);
  n.span = span;
  return n;
}

const LudemeNode* LudemeNode::child(std::string_view keyword) const {
  for (const auto& a : args) {
    if (a.is_ludeme() && a.text == keyword) return &a;
  }
  return nullptr;
}

LudemeNode* LudemeNode::child(std::string_view keyword) {
  for (auto& a : args) {
    if (a.is_ludeme() && a.text == keyword) return &a;
  }
  return nullptr;
}

std::vector<const LudemeNode*> LudemeNode::children(std::string_view keyword) const {
  std::vector<const LudemeNode*> out;
  for (const auto& a : args) {
    if (a.is_ludeme() && a.text == keyword) out.push_back(&a);
  }
  return out;
}

bool LudemeNode::has_flag(std::string_view name) const {
  return std::any_of(args.begin(), args.end(), [&](const LudemeNode& a) {
    return (a.is_flag() || a.is_identifier()) && a.text == name;
  });
}

std::size_t LudemeNode::size() const {
  std::size_t n = 1;
  for (const auto& a : args) n += a.size();
  return n;
}

bool operator==(const LudemeNode& a, const LudemeNode& b) {
  return a.kind == b.kind && a.text == b.text && a.value == b.value && a.args == b.args;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum class Type { Open, Close, Word };
  Type type;
  std::string text;
  SourceSpan span;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (is_space(c)) {
      advance(1);
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (c == '(' || c == ')') {
      tokens.push_back({c == '(' ? Token::Type::Open : Token::Type::Close, std::string(1, c),
                        {line, col}});
      advance(1);
    } else {
      const SourceSpan span{line, col};
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j]) && text[j] != '(' && text[j] != ')' &&
             !(text[j] == '/' && j + 1 < text.size() && text[j + 1] == '/')) {
        ++j;
      }
      tokens.push_back({Token::Type::Word, std::string(text.substr(i, j - i)), span});
      advance(j - i);
    }
  }
  return tokens;
}

std::optional<std::int64_t> as_integer(std::string_view word) {
  std::string_view digits = word;
  if (!digits.empty() && (digits.front() == '+' || digits.front() == '-')) digits.remove_prefix(1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  std::int64_t value = 0;
  const char* first = word.data() + (word.front() == '+' ? 1 : 0);
  auto [ptr, ec] = std::from_chars(first, word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size()) {
    throw Error(ErrorCode::UnexpectedToken, "integer out of range: " + std::string(word));
  }
  return value;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  LudemeNode parse_root() {
    if (tokens_.empty()) throw Error(ErrorCode::EmptyInput, "no tokens");
    const Token& first = tokens_.front();
    if (first.type == Token::Type::Close) {
      throw Error(ErrorCode::UnbalancedParenthesis, "unexpected ')'", first.span);
    }
    if (first.type != Token::Type::Open) {
      throw Error(ErrorCode::UnexpectedToken, "expected '(' but found '" + first.text + "'",
                  first.span);
    }
    LudemeNode root = parse_list();
    if (pos_ < tokens_.size()) {
      const Token& t = tokens_[pos_];
      if (t.type == Token::Type::Close) {
        throw Error(ErrorCode::UnbalancedParenthesis, "unexpected ')'", t.span);
      }
      throw Error(ErrorCode::UnexpectedToken, "trailing input '" + t.text + "'", t.span);
    }
    return root;
  }

 private:
  LudemeNode parse_list() {
    const Token& open = tokens_[pos_++];
    if (pos_ >= tokens_.size()) {
      throw Error(ErrorCode::UnbalancedParenthesis, "unclosed '('", open.span);
    }
    const Token& head = tokens_[pos_];
    if (head.type != Token::Type::Word || as_integer(head.text)) {
      if (head.type == Token::Type::Close) {
        throw Error(ErrorCode::UnexpectedToken, "empty list", head.span);
      }
      throw Error(ErrorCode::UnexpectedToken, "expected keyword after '('", head.span);
    }
    ++pos_;
    LudemeNode node = LudemeNode::ludeme(head.text, {}, open.span);
    while (true) {
      if (pos_ >= tokens_.size()) {
        throw Error(ErrorCode::UnbalancedParenthesis, "unclosed '(" + node.text + "'", open.span);
      }
      const Token& t = tokens_[pos_];
      if (t.type == Token::Type::Close) {
        ++pos_;
        return node;
      }
      if (t.type == Token::Type::Open) {
        node.args.push_back(parse_list());
      } else {
        if (auto v = as_integer(t.text)) {
          node.args.push_back(LudemeNode::integer(*v, t.span));
        } else {
          node.args.push_back(LudemeNode::identifier(t.text, t.span));
        }
        ++pos_;
      }
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void serialize_into(const LudemeNode& node, std::string& out) {
  switch (node.kind) {
    case LudemeNode::Kind::Int:
      out += std::to_string(node.value);
      return;
    case LudemeNode::Kind::Identifier:
    case LudemeNode::Kind::Flag:
      out += node.text;
      return;
    case LudemeNode::Kind::Ludeme:
      if (node.bare && node.args.empty()) {
        out += node.text;
        return;
      }
      out += '(';
      out += node.text;
      for (const auto& a : node.args) {
        out += ' ';
        serialize_into(a, out);
      }
      out += ')';
      return;
  }
}

}  // namespace

LudemeNode parse(std::string_view text) { return Parser(tokenize(text)).parse_root(); }

std::string serialize(const LudemeNode& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

// ---------------------------------------------------------------------------
// Schemas

ParamKind ParamKind::integer(std::int64_t min_value) {
  ParamKind k;
  k.tag = Tag::Int;
  k.min_value = min_value;
  return k;
}

ParamKind ParamKind::identifier(std::vector<std::string> choices) {
  ParamKind k;
  k.tag = Tag::Identifier;
  k.choices = std::move(choices);
  return k;
}

ParamKind ParamKind::ludeme(std::vector<Category> categories) {
  ParamKind k;
  k.tag = Tag::Ludeme;
  k.categories = std::move(categories);
  return k;
}

ParamKind ParamKind::list_of(ParamKind element) {
  ParamKind k;
  k.tag = Tag::ListOf;
  k.element = std::make_shared<const ParamKind>(std::move(element));
  return k;
}

ParamKind ParamKind::flag() {
  ParamKind k;
  k.tag = Tag::Flag;
  return k;
}

bool LudemeSchema::nullary() const { return parameters.empty(); }

LudemeLibrary::LudemeLibrary(std::vector<LudemeSchema> schemas) {
  for (auto& s : schemas) add(std::move(s));
}

void LudemeLibrary::add(LudemeSchema schema) {
  if (find(schema.keyword)) {
    throw Error(ErrorCode::InvalidArgument, "duplicate keyword '" + schema.keyword + "'");
  }
  schemas_.push_back(std::move(schema));
}

const LudemeSchema* LudemeLibrary::find(std::string_view keyword) const {
  for (const auto& s : schemas_) {
    if (s.keyword == keyword) return &s;
  }
  return nullptr;
}

std::set<std::string> LudemeLibrary::all_concept_tags() const {
  std::set<std::string> tags;
  for (const auto& s : schemas_) tags.insert(s.concept_tags.begin(), s.concept_tags.end());
  return tags;
}

namespace {

Parameter param(std::string name, ParamKind kind) { return {std::move(name), std::move(kind), {}, false}; }

Parameter optional_param(std::string name, ParamKind kind, LudemeNode default_value) {
  return {std::move(name), std::move(kind), std::move(default_value), false};
}

Parameter section(std::string name, ParamKind kind) {
  return {std::move(name), std::move(kind), {}, true};
}

LudemeNode bare(std::string keyword) {
  LudemeNode n = LudemeNode::ludeme(std::move(keyword));
  n.bare = true;
  return n;
}

using C = Category;

LudemeLibrary build_standard_library() {
  const auto who = ParamKind::identifier({"All", "Mover", "Prev", "P1", "P2"});
  const auto dirs = ParamKind::identifier({"Any", "Orthogonal", "Diagonal"});
  const auto content = ParamKind::ludeme({C::Condition});

  std::vector<LudemeSchema> s;
  // Structure.
  s.push_back({"game", C::Game,
               {param("name", ParamKind::identifier()),
                section("players", ParamKind::ludeme({C::Players})),
                section("equipment", ParamKind::ludeme({C::Equipment})),
                section("rules", ParamKind::ludeme({C::Game}))},
               {}});
  s.push_back({"rules", C::Game,
               {param("items", ParamKind::list_of(ParamKind::ludeme(
                                   {C::StartRule, C::PlayRule, C::EndRule})))},
               {}});
  s.push_back({"players", C::Players,
               {param("first", ParamKind::identifier()), param("second", ParamKind::identifier())},
               {}});
  s.push_back({"equipment", C::Equipment,
               {param("items", ParamKind::list_of(ParamKind::ludeme({C::Region, C::Piece})))},
               {}});

  // Board shapes.
  s.push_back({"square", C::Board, {param("size", ParamKind::integer(1))},
               {"grid", "square-tiling"}});
  s.push_back({"rectangle", C::Board,
               {param("rows", ParamKind::integer(1)), param("columns", ParamKind::integer(1))},
               {"grid", "square-tiling"}});
  s.push_back({"hex", C::Board, {param("side", ParamKind::integer(1))}, {"hexagonal-tiling"}});
  s.push_back({"diamond", C::Board, {param("size", ParamKind::integer(1))},
               {"hexagonal-tiling", "rhombus"}});
  s.push_back({"wheel", C::Board, {param("spokes", ParamKind::integer(3))},
               {"cycle", "radial-symmetry"}});
  s.push_back({"graph", C::Board,
               {param("vertices", ParamKind::ludeme({C::Modifier})),
                param("edges", ParamKind::ludeme({C::Modifier}))},
               {"graph"}});

  // Pieces and start.
  s.push_back({"piece", C::Piece,
               {param("type", ParamKind::identifier()),
                optional_param("count", ParamKind::integer(0), LudemeNode::integer(0))},
               {}});
  s.push_back({"start", C::StartRule,
               {param("items", ParamKind::list_of(ParamKind::ludeme({C::StartRule})))},
               {}});
  s.push_back({"place", C::StartRule,
               {param("type", ParamKind::identifier()),
                param("owner", ParamKind::identifier({"P1", "P2"})),
                param("cells", ParamKind::list_of(ParamKind::integer(0)))},
               {}});
  s.push_back({"empty", C::StartRule, {}, {}});

  // Play.
  s.push_back({"play", C::PlayRule,
               {param("items", ParamKind::list_of(ParamKind::ludeme({C::PlayRule, C::Modifier})))},
               {}});
  s.push_back({"add", C::PlayRule,
               {param("what", ParamKind::ludeme({C::Piece})),
                param("where", ParamKind::ludeme({C::Region}))},
               {"placement"}});
  s.push_back({"step", C::PlayRule,
               {param("what", ParamKind::ludeme({C::Piece})),
                param("to", ParamKind::ludeme({C::Region})),
                optional_param("if", ParamKind::ludeme({C::Condition}), bare("True"))},
               {"adjacency"}});
  s.push_back({"custodialCapture", C::Modifier,
               {optional_param("dirs", dirs, LudemeNode::identifier("Any"))},
               {"betweenness", "capture"}});

  // Conditions.
  s.push_back({"Empty", C::Condition, {}, {}});
  s.push_back({"Own", C::Condition, {}, {}});
  s.push_back({"Enemy", C::Condition, {}, {}});
  s.push_back({"True", C::Condition, {}, {}});
  s.push_back({"adjacent", C::Condition,
               {param("anchor", ParamKind::identifier({"From", "To"})), param("content", content)},
               {"adjacency"}});
  s.push_back({"line", C::Condition,
               {param("length", ParamKind::integer(1)), param("content", content),
                optional_param("dirs", dirs, LudemeNode::identifier("Any"))},
               {"collinearity"}});
  s.push_back({"connect", C::Condition,
               {param("from", ParamKind::ludeme({C::Region})),
                param("to", ParamKind::ludeme({C::Region}))},
               {"connectivity", "path"}});
  s.push_back({"noMoves", C::Condition, {}, {"blocking"}});
  s.push_back({"fullBoard", C::Condition, {}, {"counting"}});
  s.push_back({"moveLimit", C::Condition, {param("plies", ParamKind::integer(1))}, {"counting"}});

  // End.
  s.push_back({"end", C::EndRule,
               {param("items", ParamKind::list_of(ParamKind::ludeme({C::EndRule})))},
               {}});
  s.push_back({"win", C::EndRule, {param("who", who), param("if", content)}, {}});
  s.push_back({"lose", C::EndRule, {param("who", who), param("if", content)}, {}});
  s.push_back({"draw", C::EndRule, {param("if", content)}, {}});

  // Regions.
  s.push_back({"board", C::Region,
               {param("what", ParamKind::ludeme({C::Board, C::Condition})),
                param("diagonals", ParamKind::flag())},
               {}});
  s.push_back({"side", C::Region, {param("dir", ParamKind::identifier({"N", "E", "S", "W"}))},
               {"boundary"}});
  s.push_back({"cells", C::Region, {param("cells", ParamKind::list_of(ParamKind::integer(0)))},
               {}});

  // Graph parts.
  s.push_back({"vertices", C::Modifier, {param("count", ParamKind::integer(1))}, {}});
  s.push_back({"edges", C::Modifier,
               {param("endpoints", ParamKind::list_of(ParamKind::integer(0)))}, {}});

  return LudemeLibrary(std::move(s));
}

}  // namespace

const LudemeLibrary& LudemeLibrary::standard() {
  static const LudemeLibrary kStandard = build_standard_library();
  return kStandard;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool contains(const std::vector<Category>& cats, Category c) {
  return std::find(cats.begin(), cats.end(), c) != cats.end();
}

std::string categories_text(const std::vector<Category>& cats) {
  std::string out;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    if (i) out += "|";
    out += to_string(cats[i]);
  }
  return out;
}

class Validator {
 public:
  explicit Validator(const LudemeLibrary& library) : library_(library) {}

  // Validates `node` in place (flag and nullary promotion) and returns its
  // schema.
  const LudemeSchema& check_node(LudemeNode& node) {
    const LudemeSchema* schema = library_.find(node.text);
    if (!schema) throw Error(ErrorCode::UnknownKeyword, node.text, node.span);

    std::vector<const Parameter*> positional;
    std::vector<const Parameter*> flags;
    for (const auto& p : schema->parameters) {
      (p.kind.tag == ParamKind::Tag::Flag ? flags : positional).push_back(&p);
    }

    // Pull out flags first; they may appear anywhere in the argument list.
    std::vector<LudemeNode> rest;
    std::set<std::string> seen_flags;
    for (auto& a : node.args) {
      const bool is_flag_word = (a.is_identifier() || a.is_flag()) &&
                                std::any_of(flags.begin(), flags.end(),
                                            [&](const Parameter* p) { return p->name == a.text; });
      if (is_flag_word) {
        if (!seen_flags.insert(a.text).second) {
          throw Error(ErrorCode::ArityMismatch,
                      "flag '" + a.text + "' repeated in '" + node.text + "'", a.span);
        }
        a.kind = LudemeNode::Kind::Flag;
      }
      rest.push_back(std::move(a));
    }
    node.args = std::move(rest);

    std::size_t arg = 0;
    auto next_positional = [&]() -> LudemeNode* {
      while (arg < node.args.size() && node.args[arg].is_flag()) ++arg;
      return arg < node.args.size() ? &node.args[arg] : nullptr;
    };

    for (const Parameter* p : positional) {
      if (p->kind.tag == ParamKind::Tag::ListOf) {
        while (LudemeNode* a = next_positional()) {
          check_value(*a, *p->kind.element, *schema, *p);
          ++arg;
        }
        continue;
      }
      LudemeNode* a = next_positional();
      if (!a) {
        if (p->default_value) continue;
        if (p->section) {
          if (allow_partial_ && schema->keyword == "game" && p->name == "rules") continue;
          throw Error(ErrorCode::MissingSection, p->name, node.span);
        }
        throw Error(ErrorCode::ArityMismatch,
                    "'" + node.text + "' is missing parameter '" + p->name + "'", node.span);
      }
      check_value(*a, p->kind, *schema, *p);
      ++arg;
    }
    if (LudemeNode* extra = next_positional()) {
      throw Error(ErrorCode::ArityMismatch,
                  "unexpected argument '" + serialize(*extra) + "' in '" + node.text + "'",
                  extra->span);
    }
    return *schema;
  }

  bool allow_partial_ = false;

 private:
  void check_value(LudemeNode& a, const ParamKind& kind, const LudemeSchema& owner,
                   const Parameter& p) {
    const std::string where = "'" + owner.keyword + "' parameter '" + p.name + "'";
    switch (kind.tag) {
      case ParamKind::Tag::Int:
        if (!a.is_int()) {
          throw Error(ErrorCode::KindMismatch, where + " expects an integer", a.span);
        }
        if (a.value < kind.min_value) {
          throw Error(ErrorCode::KindMismatch,
                      where + " must be >= " + std::to_string(kind.min_value), a.span);
        }
        return;
      case ParamKind::Tag::Identifier:
        if (!a.is_identifier()) {
          throw Error(ErrorCode::KindMismatch, where + " expects an identifier", a.span);
        }
        if (!kind.choices.empty() &&
            std::find(kind.choices.begin(), kind.choices.end(), a.text) == kind.choices.end()) {
          throw Error(ErrorCode::KindMismatch, where + " does not accept '" + a.text + "'",
                      a.span);
        }
        return;
      case ParamKind::Tag::Ludeme: {
        if (a.is_identifier()) {
          const LudemeSchema* s = library_.find(a.text);
          if (s && s->nullary() && contains(kind.categories, s->category)) {
            a.kind = LudemeNode::Kind::Ludeme;
            a.bare = true;
            return;
          }
          if (s) {
            throw Error(ErrorCode::KindMismatch,
                        where + " expects " + categories_text(kind.categories) + ", got '" +
                            a.text + "'",
                        a.span);
          }
          throw Error(ErrorCode::UnknownKeyword, a.text, a.span);
        }
        if (!a.is_ludeme()) {
          throw Error(ErrorCode::KindMismatch,
                      where + " expects a ludeme of " + categories_text(kind.categories),
                      a.span);
        }
        const LudemeSchema& s = check_node(a);
        if (!contains(kind.categories, s.category)) {
          throw Error(ErrorCode::KindMismatch,
                      where + " expects " + categories_text(kind.categories) + ", got '" +
                          a.text + "' (" + std::string(to_string(s.category)) + ")",
                      a.span);
        }
        return;
      }
      case ParamKind::Tag::ListOf:
      case ParamKind::Tag::Flag:
        throw Error(ErrorCode::KindMismatch, where + " has an unsupported nested kind", a.span);
    }
  }

  const LudemeLibrary& library_;
};

void require_keywords(const LudemeNode& node, std::initializer_list<std::string_view> allowed) {
  for (const auto& a : node.args) {
    if (!a.is_ludeme()) continue;
    if (std::find(allowed.begin(), allowed.end(), a.text) == allowed.end()) {
      throw Error(ErrorCode::KindMismatch, "'" + a.text + "' not allowed inside '" + node.text + "'",
                  a.span);
    }
  }
}

std::size_t count_keyword(const LudemeNode& node, std::string_view kw) {
  return node.children(kw).size();
}

// Region `board` nodes filter cells by content; the equipment `board`
// defines the shape. Walks the rules checking the filter form.
void check_region_boards(const LudemeNode& node) {
  for (const auto& a : node.args) {
    if (!a.is_ludeme()) continue;
    if (a.text == "board") {
      const LudemeNode& what = a.args.at(0);
      if (what.text != "Empty" && what.text != "Own" && what.text != "Enemy") {
        throw Error(ErrorCode::KindMismatch,
                    "region 'board' expects Empty, Own or Enemy, got '" + what.text + "'",
                    a.span);
      }
      continue;
    }
    check_region_boards(a);
  }
}

void check_structure(const LudemeNode& root, bool allow_partial) {
  (void)allow_partial;
  const LudemeNode* equipment = root.child("equipment");
  const auto boards = equipment->children("board");
  if (boards.empty()) throw Error(ErrorCode::MissingSection, "board", equipment->span);
  if (boards.size() > 1) {
    throw Error(ErrorCode::ArityMismatch, "equipment declares more than one board",
                boards[1]->span);
  }
  const LudemeNode& shape = boards.front()->args.at(0);
  const LudemeSchema* shape_schema = LudemeLibrary::standard().find(shape.text);
  if (!shape_schema || shape_schema->category != Category::Board) {
    throw Error(ErrorCode::KindMismatch, "equipment board needs a board shape, got '" +
                                             shape.text + "'",
                boards.front()->span);
  }
  if (shape.text == "graph") {
    if (shape.args.at(0).text != "vertices" || shape.args.at(1).text != "edges") {
      throw Error(ErrorCode::KindMismatch, "graph expects (vertices n) (edges ...)", shape.span);
    }
  }
  require_keywords(*equipment, {"board", "piece"});

  const LudemeNode* rules = root.child("rules");
  if (!rules) return;
  require_keywords(*rules, {"start", "play", "end"});
  if (count_keyword(*rules, "start") > 1) {
    throw Error(ErrorCode::ArityMismatch, "more than one start section", rules->span);
  }
  const std::size_t plays = count_keyword(*rules, "play");
  const std::size_t ends = count_keyword(*rules, "end");
  if (plays == 0) throw Error(ErrorCode::MissingSection, "play", rules->span);
  if (ends == 0) throw Error(ErrorCode::MissingSection, "end", rules->span);
  if (plays > 1 || ends > 1) {
    throw Error(ErrorCode::ArityMismatch, "rules need exactly one play and one end section",
                rules->span);
  }
  if (const LudemeNode* start = rules->child("start")) {
    require_keywords(*start, {"place", "empty"});
  }
  const LudemeNode* play = rules->child("play");
  require_keywords(*play, {"add", "step", "custodialCapture"});
  if (play->children("add").empty() && play->children("step").empty()) {
    throw Error(ErrorCode::MissingSection, "play needs at least one add or step rule",
                play->span);
  }
  const LudemeNode* end = rules->child("end");
  require_keywords(*end, {"win", "lose", "draw"});
  if (end->args.empty()) throw Error(ErrorCode::MissingSection, "end needs at least one rule", end->span);
  check_region_boards(*rules);
}

}  // namespace

GameDescription validate(const LudemeNode& tree, const LudemeLibrary& library,
                         bool allow_partial) {
  if (!tree.is_ludeme()) throw Error(ErrorCode::KindMismatch, "description must be a ludeme");
  if (tree.text != "game") {
    if (!library.find(tree.text)) throw Error(ErrorCode::UnknownKeyword, tree.text, tree.span);
    throw Error(ErrorCode::KindMismatch, "root must be 'game', got '" + tree.text + "'",
                tree.span);
  }
  // Section presence is reported before arity so that a description missing
  // a whole block gets the more useful error.
  for (const char* sec : {"players", "equipment", "rules"}) {
    if (!tree.child(sec)) {
      if (allow_partial && std::string_view(sec) == "rules") continue;
      throw Error(ErrorCode::MissingSection, sec, tree.span);
    }
  }
  GameDescription gd;
  gd.root_ = tree;
  Validator v(library);
  v.allow_partial_ = allow_partial;
  v.check_node(gd.root_);
  if (gd.root_.args.empty() || !gd.root_.args[0].is_identifier()) {
    throw Error(ErrorCode::KindMismatch, "game needs a name", tree.span);
  }
  if (&library == &LudemeLibrary::standard() || library.find("board")) {
    check_structure(gd.root_, allow_partial);
  }
  return gd;
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

void canonicalize_node(LudemeNode& node, const LudemeLibrary& library) {
  if (!node.is_ludeme()) return;
  for (auto& a : node.args) canonicalize_node(a, library);
  const LudemeSchema* schema = library.find(node.text);
  if (!schema) return;
  if (node.args.empty() && schema->nullary()) node.bare = true;

  std::vector<LudemeNode> positional;
  std::vector<LudemeNode> flags;
  for (auto& a : node.args) (a.is_flag() ? flags : positional).push_back(std::move(a));

  // Fill trailing defaults.
  std::size_t n_positional_params = 0;
  for (const auto& p : schema->parameters) {
    if (p.kind.tag == ParamKind::Tag::Flag || p.kind.tag == ParamKind::Tag::ListOf) continue;
    ++n_positional_params;
    if (positional.size() < n_positional_params && p.default_value) {
      LudemeNode d = *p.default_value;
      canonicalize_node(d, library);
      positional.push_back(std::move(d));
    }
  }

  const std::string& kw = node.text;
  auto by_text = [](const LudemeNode& a, const LudemeNode& b) { return serialize(a) < serialize(b); };
  auto by_value = [](const LudemeNode& a, const LudemeNode& b) { return a.value < b.value; };
  if (kw == "cells") {
    std::stable_sort(positional.begin(), positional.end(), by_value);
  } else if (kw == "place") {
    if (positional.size() > 2) std::stable_sort(positional.begin() + 2, positional.end(), by_value);
  } else if (kw == "edges") {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::size_t i = 0; i + 1 < positional.size(); i += 2) {
      auto a = positional[i].value;
      auto b = positional[i + 1].value;
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (positional.size() % 2 == 0) {
      std::sort(pairs.begin(), pairs.end());
      positional.clear();
      for (auto [a, b] : pairs) {
        positional.push_back(LudemeNode::integer(a));
        positional.push_back(LudemeNode::integer(b));
      }
    }
  } else if (kw == "equipment") {
    std::stable_sort(positional.begin(), positional.end(),
                     [&](const LudemeNode& a, const LudemeNode& b) {
                       const bool ab = a.text == "board";
                       const bool bb = b.text == "board";
                       if (ab != bb) return ab;
                       return serialize(a) < serialize(b);
                     });
  } else if (kw == "play") {
    std::stable_sort(positional.begin(), positional.end(), by_text);
  } else if (kw == "rules") {
    auto rank = [](const LudemeNode& n) {
      return n.text == "start" ? 0 : n.text == "play" ? 1 : n.text == "end" ? 2 : 3;
    };
    std::stable_sort(positional.begin(), positional.end(),
                     [&](const LudemeNode& a, const LudemeNode& b) { return rank(a) < rank(b); });
  }

  std::sort(flags.begin(), flags.end(),
            [](const LudemeNode& a, const LudemeNode& b) { return a.text < b.text; });
  flags.erase(std::unique(flags.begin(), flags.end()), flags.end());
  node.args = std::move(positional);
  for (auto& f : flags) node.args.push_back(std::move(f));
}

}  // namespace

GameDescription canonicalize(const GameDescription& gd, const LudemeLibrary& library) {
  GameDescription out = gd;
  canonicalize_node(out.root_, library);
  return out;
}

std::string canonical_text(const GameDescription& gd) { return serialize(canonicalize(gd).root()); }

GameDescription load_description(std::string_view text, bool allow_partial) {
  return canonicalize(validate(parse(text), LudemeLibrary::standard(), allow_partial));
}

// ---------------------------------------------------------------------------
// Grammar text

namespace {

struct ProductionWriter {
  std::ostringstream main;
  std::vector<std::string> helpers;

  std::string symbol_for(const ParamKind& kind, const std::string& helper_name) {
    switch (kind.tag) {
      case ParamKind::Tag::Int:
        return "<int>";
      case ParamKind::Tag::Identifier:
        if (kind.choices.empty()) return "<ident>";
        {
          std::string rhs;
          for (std::size_t i = 0; i < kind.choices.size(); ++i) {
            if (i) rhs += " | ";
            rhs += kind.choices[i];
          }
          helpers.push_back("<" + helper_name + "> ::= " + rhs);
          return "<" + helper_name + ">";
        }
      case ParamKind::Tag::Ludeme:
        if (kind.categories.size() == 1) return "<" + std::string(to_string(kind.categories[0])) + ">";
        {
          std::string rhs;
          for (std::size_t i = 0; i < kind.categories.size(); ++i) {
            if (i) rhs += " | ";
            rhs += "<" + std::string(to_string(kind.categories[i])) + ">";
          }
          helpers.push_back("<" + helper_name + "> ::= " + rhs);
          return "<" + helper_name + ">";
        }
      case ParamKind::Tag::ListOf:
        return "{" + symbol_for(*kind.element, helper_name) + "}";
      case ParamKind::Tag::Flag:
        return "";
    }
    return "";
  }
};

}  // namespace

std::string grammar_text(const LudemeLibrary& library) {
  std::ostringstream out;
  out << "// ludii-lite ludeme grammar, library version " << LudemeLibrary::kVersion << "\n";
  out << "// Generated from the ludeme library; do not edit.\n";
  out << "// Terminals: ( and ) delimit ludemes; <int> is a signed decimal; <ident> is any\n";
  out << "// other word. [x] is optional, {x} repeats zero or more times, | separates\n";
  out << "// alternatives. Nullary ludemes may be written bare or in parentheses.\n";
  out << "// Canonical form: defaults explicit; flags last, sorted by name; cells, place\n";
  out << "// and edges lists ascending; play items and non-board equipment sorted by text.\n";
  if (library.empty()) return out.str();
  out << "\n";

  for (Category c : all_categories()) {
    std::vector<std::string> alts;
    for (const auto& s : library.schemas()) {
      if (s.category == c) alts.push_back("<" + s.keyword + ">");
    }
    if (alts.empty()) continue;
    out << "<" << to_string(c) << "> ::= ";
    for (std::size_t i = 0; i < alts.size(); ++i) out << (i ? " | " : "") << alts[i];
    out << "\n";
  }
  out << "\n";

  for (const auto& s : library.schemas()) {
    ProductionWriter w;
    std::string rhs = "(" + s.keyword;
    std::vector<std::string> flag_names;
    for (const auto& p : s.parameters) {
      if (p.kind.tag == ParamKind::Tag::Flag) {
        flag_names.push_back(p.name);
        continue;
      }
      std::string sym = w.symbol_for(p.kind, s.keyword + "." + p.name);
      const bool optional = p.default_value.has_value() || (s.keyword == "game" && p.name == "rules");
      rhs += " " + (optional ? "[" + sym + "]" : sym);
    }
    std::sort(flag_names.begin(), flag_names.end());
    for (const auto& f : flag_names) rhs += " [" + f + "]";
    rhs += ")";
    if (s.nullary()) rhs = s.keyword + " | " + rhs;
    out << "<" << s.keyword << "> ::= " << rhs << "\n";
    for (const auto& h : w.helpers) out << h << "\n";
  }
  return out.str();
}

}  // namespace lud
