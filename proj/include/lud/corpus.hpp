#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lud/grammar.hpp"

namespace lud {

enum class Period { Ancient, Early, Modern };
std::string_view to_string(Period p);

// Ancient before 500, Early from 500 to 1499, Modern from 1500.
Period classify_period(int year);

struct GameMetadata {
  std::string name;
  std::string region;
  int earliest_date = 0;  // negative = BC
  std::vector<std::string> sources;
  bool partial = false;  // rules absent; validated with allow_partial

  Period period() const { return classify_period(earliest_date); }
};

GameMetadata metadata_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GameMetadata& m);

// Concept tag -> multiplicity over every ludeme node of the description.
using MathProfile = std::map<std::string, int>;
MathProfile math_profile(const GameDescription& gd,
                         const LudemeLibrary& library = LudemeLibrary::standard());

struct CorpusEntry {
  std::filesystem::path path;
  GameDescription description;
  GameMetadata metadata;
};

// Every `*.lud` in `dir` (sorted by file name) with its `.json` sidecar.
// Errors: ParseError (file named in the message), MetadataMismatch for a
// missing or disagreeing sidecar, DuplicateName, IoError.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

// Reads one `.lud` file; a sidecar, when present, decides allow_partial.
CorpusEntry load_game_file(const std::filesystem::path& lud, bool require_sidecar = false);

std::string read_file(const std::filesystem::path& p);

}  // namespace lud
