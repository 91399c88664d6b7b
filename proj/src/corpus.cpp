#include "lud/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace lud {

std::string_view to_string(Period p) {
  switch (p) {
    case Period::Ancient: return "Ancient";
    case Period::Early: return "Early";
    case Period::Modern: return "Modern";
  }
  return "Unknown";
}

Period classify_period(int year) {
  if (year < 500) return Period::Ancient;
  if (year < 1500) return Period::Early;
  return Period::Modern;
}

GameMetadata metadata_from_json(const nlohmann::json& j) {
  GameMetadata m;
  try {
    m.name = j.at("name").get<std::string>();
    m.region = j.value("region", std::string());
    m.earliest_date = j.at("earliest_date").get<int>();
    m.sources = j.value("sources", std::vector<std::string>{});
    m.partial = j.value("partial", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MetadataMismatch, std::string("metadata: ") + e.what());
  }
  return m;
}

nlohmann::json to_json(const GameMetadata& m) {
  nlohmann::json j = {{"name", m.name},
                      {"region", m.region},
                      {"earliest_date", m.earliest_date},
                      {"period", std::string(to_string(m.period()))},
                      {"sources", m.sources}};
  if (m.partial) j["partial"] = true;
  return j;
}

namespace {

void gather_tags(const LudemeNode& n, const LudemeLibrary& library, MathProfile& out) {
  if (n.is_ludeme()) {
    if (const LudemeSchema* s = library.find(n.text)) {
      for (const auto& tag : s->concept_tags) ++out[tag];
    }
  }
  for (const auto& a : n.args) gather_tags(a, library, out);
}

}  // namespace

MathProfile math_profile(const GameDescription& gd, const LudemeLibrary& library) {
  MathProfile out;
  gather_tags(gd.root(), library, out);
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CorpusEntry load_game_file(const std::filesystem::path& lud, bool require_sidecar) {
  CorpusEntry e;
  e.path = lud;
  std::filesystem::path sidecar = lud;
  sidecar.replace_extension(".json");
  const bool has_sidecar = std::filesystem::exists(sidecar);
  if (require_sidecar && !has_sidecar) {
    throw Error(ErrorCode::MetadataMismatch, lud.string() + ": no sidecar " + sidecar.string());
  }
  if (has_sidecar) {
    try {
      e.metadata = metadata_from_json(nlohmann::json::parse(read_file(sidecar)));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::MetadataMismatch, sidecar.string() + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ErrorCode::MetadataMismatch, sidecar.string() + ": " + ex.what());
    }
  }
  const std::string text = read_file(lud);
  try {
    e.description = load_description(text, e.metadata.partial);
  } catch (const Error& ex) {
    throw Error(ErrorCode::ParseError, lud.string() + ": " + ex.what());
  }
  if (!has_sidecar) {
    e.metadata.name = e.description.name();
  } else if (e.metadata.name != e.description.name()) {
    throw Error(ErrorCode::MetadataMismatch, lud.string() + ": description names '" +
                                                 e.description.name() + "' but sidecar says '" +
                                                 e.metadata.name + "'");
  }
  return e;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".lud") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  std::set<std::string> names;
  for (const auto& f : files) {
    CorpusEntry e = load_game_file(f, true);
    if (!names.insert(e.metadata.name).second) {
      throw Error(ErrorCode::DuplicateName, f.string() + ": game '" + e.metadata.name +
                                                "' already loaded");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace lud
