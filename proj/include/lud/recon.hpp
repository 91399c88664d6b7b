#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lud/quality.hpp"

namespace lud {

// A slot path walks from the game node: each step is an argument index
// (`2`), the first ludeme child with a keyword (`rules`), or the k-th one
// (`win[1]`), separated by `/`.
struct Slot {
  std::string path;
  std::vector<LudemeNode> candidates;
};

struct ReconstructionSpec {
  LudemeNode fixed;  // parsed, may hold placeholders at slot positions
  std::vector<Slot> slots;
  std::map<std::string, double> prior;  // keyword -> weight in (0, 1]
  std::size_t budget = 1000;
  std::size_t beam_width = 8;
  TrialSpec trials;
  std::vector<SearchConfig> ladder = default_ladder();
  Thresholds thresholds;
};

// Keys: fixed (.lud text), slots [{path, candidates: [.lud fragments]} or
// {path, range: [lo, hi]}], prior, budget, beam_width, trials, ladder,
// thresholds. Throws InvalidArgument, InvalidSlotPath or EmptySlot.
ReconstructionSpec recon_spec_from_json(const nlohmann::json& j);

// Number of slot assignments (product of candidate counts, saturating).
std::size_t candidate_count(const ReconstructionSpec& spec);

// The description for one assignment of candidate indices, validated and
// canonicalized. Throws InvalidSlotPath, or InvalidArgument when the result
// does not validate.
GameDescription instantiate(const ReconstructionSpec& spec, const std::vector<std::size_t>& choice);

// Cartesian product in odometer order (last slot varies fastest), stopping
// after `budget` descriptions. Returning false from `sink` stops early.
void enumerate_candidates(
    const ReconstructionSpec& spec,
    const std::function<bool(const std::vector<std::size_t>&, const GameDescription&)>& sink);

struct RankedCandidate {
  std::vector<std::size_t> choice;
  GameDescription description;
  std::string text;  // canonical
  QualityReport quality;
  double prior = 1.0;
  double score = 0.0;
};

// Product of prior weights over the distinct ludeme keywords present.
double authenticity_prior(const GameDescription& gd, const std::map<std::string, double>& prior);

RankedCandidate score_candidate(const GameDescription& gd, const ReconstructionSpec& spec);

// Exhaustive when the candidate count fits the budget, else a beam over
// slots. Sorted by score descending, ties by canonical text.
std::vector<RankedCandidate> reconstruct(const ReconstructionSpec& spec, int threads = 1);

nlohmann::json to_json(const RankedCandidate& c);
nlohmann::json to_json(const std::vector<RankedCandidate>& ranked);

}  // namespace lud
