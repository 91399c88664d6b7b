#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lud/error.hpp"

namespace lud {

enum class Category {
  Game,
  Players,
  Equipment,
  Board,
  Piece,
  StartRule,
  PlayRule,
  EndRule,
  Condition,
  Region,
  Modifier,
};

std::string_view to_string(Category category);
const std::vector<Category>& all_categories();

// One node of a game description. Parsing produces Ludeme, Int and
// Identifier nodes only; validation turns identifiers sitting in flag
// positions into Flag nodes and bare keywords of nullary ludemes into
// zero-argument Ludeme nodes marked `bare`.
struct LudemeNode {
  enum class Kind { Ludeme, Int, Identifier, Flag };

  Kind kind = Kind::Ludeme;
  std::string text;  // keyword, identifier text or flag name
  std::int64_t value = 0;
  std::vector<LudemeNode> args;
  SourceSpan span;
  bool bare = false;  // zero-arg ludeme written without parentheses

  static LudemeNode ludeme(std::string keyword, std::vector<LudemeNode> args = {},
                           SourceSpan span = {});
  static LudemeNode integer(std::int64_t value, SourceSpan span = {});
  static LudemeNode identifier(std::string text, SourceSpan span = {});
  static LudemeNode flag(std::string name, SourceSpan span = {});

  bool is_ludeme() const { return kind == Kind::Ludeme; }
  bool is_int() const { return kind == Kind::Int; }
  bool is_identifier() const { return kind == Kind::Identifier; }
  bool is_flag() const { return kind == Kind::Flag; }

  // Ludeme argument with the given keyword, or null.
  const LudemeNode* child(std::string_view keyword) const;
  LudemeNode* child(std::string_view keyword);
  std::vector<const LudemeNode*> children(std::string_view keyword) const;
  bool has_flag(std::string_view name) const;
  // Number of nodes in the subtree, this node included.
  std::size_t size() const;

  // Structural equality: ignores source spans and the bare marker.
  friend bool operator==(const LudemeNode& a, const LudemeNode& b);
};

// Parenthesized S-expression parser. `//` starts a comment running to the
// end of the line. A bare word is an Int when it is a signed decimal and an
// Identifier otherwise.
LudemeNode parse(std::string_view text);

// Single-line rendering with single spaces; byte-stable.
std::string serialize(const LudemeNode& node);

struct ParamKind {
  enum class Tag { Int, Identifier, Ludeme, ListOf, Flag };

  Tag tag = Tag::Int;
  std::int64_t min_value = std::numeric_limits<std::int64_t>::min();
  std::vector<std::string> choices;  // Identifier: allowed values, empty = any
  std::vector<Category> categories;  // Ludeme: accepted categories
  std::shared_ptr<const ParamKind> element;  // ListOf

  static ParamKind integer(std::int64_t min_value = std::numeric_limits<std::int64_t>::min());
  static ParamKind identifier(std::vector<std::string> choices = {});
  static ParamKind ludeme(std::vector<Category> categories);
  static ParamKind list_of(ParamKind element);
  static ParamKind flag();
};

struct Parameter {
  std::string name;
  ParamKind kind;
  std::optional<LudemeNode> default_value;  // optional positional parameter
  bool section = false;  // absence reported as MissingSection
};

struct LudemeSchema {
  std::string keyword;
  Category category = Category::Modifier;
  std::vector<Parameter> parameters;
  std::set<std::string> concept_tags;

  bool nullary() const;
};

class LudemeLibrary {
 public:
  LudemeLibrary() = default;
  explicit LudemeLibrary(std::vector<LudemeSchema> schemas);

  // Throws InvalidArgument when the keyword already exists.
  void add(LudemeSchema schema);

  const LudemeSchema* find(std::string_view keyword) const;
  const std::vector<LudemeSchema>& schemas() const { return schemas_; }
  bool empty() const { return schemas_.empty(); }
  std::set<std::string> all_concept_tags() const;

  // The shipped ludeme set. Bumped whenever a schema changes.
  static constexpr int kVersion = 1;
  static const LudemeLibrary& standard();

 private:
  std::vector<LudemeSchema> schemas_;
};

class GameDescription {
 public:
  const LudemeNode& root() const { return root_; }
  const std::string& name() const { return root_.args.at(0).text; }
  const LudemeNode& players() const { return *root_.child("players"); }
  const LudemeNode& equipment() const { return *root_.child("equipment"); }
  // Null for partial (equipment-only) descriptions.
  const LudemeNode* rules() const { return root_.child("rules"); }
  bool partial() const { return rules() == nullptr; }

  friend bool operator==(const GameDescription& a, const GameDescription& b) {
    return a.root_ == b.root_;
  }

 private:
  friend GameDescription validate(const LudemeNode&, const LudemeLibrary&, bool);
  friend GameDescription canonicalize(const GameDescription&, const LudemeLibrary&);
  LudemeNode root_;
};

// Checks the tree against the library and the structural section rules.
// With allow_partial, a description without a rules section is accepted.
GameDescription validate(const LudemeNode& tree,
                         const LudemeLibrary& library = LudemeLibrary::standard(),
                         bool allow_partial = false);

// Normal form: defaults made explicit, flags sorted by name, unordered
// argument lists sorted (see grammar.ebnf header for the exact rules).
GameDescription canonicalize(const GameDescription& gd,
                             const LudemeLibrary& library = LudemeLibrary::standard());

std::string canonical_text(const GameDescription& gd);

// parse + validate + canonicalize.
GameDescription load_description(std::string_view text, bool allow_partial = false);

std::string grammar_text(const LudemeLibrary& library = LudemeLibrary::standard());

}  // namespace lud
