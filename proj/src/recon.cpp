#include "lud/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lud/parallel.hpp"

namespace lud {

namespace {

LudemeNode* resolve(LudemeNode& root, const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::InvalidSlotPath, "empty slot path");
  LudemeNode* cur = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t end = std::min(path.find('/', start), path.size());
    const std::string step = path.substr(start, end - start);
    start = end + 1;
    if (step.empty()) throw Error(ErrorCode::InvalidSlotPath, "empty step in '" + path + "'");
    if (std::all_of(step.begin(), step.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const std::size_t k = std::stoul(step);
      if (k >= cur->args.size()) {
        throw Error(ErrorCode::InvalidSlotPath, "'" + path + "': no argument " + step);
      }
      cur = &cur->args[k];
    } else {
      std::string keyword = step;
      std::size_t nth = 0;
      const auto open = step.find('[');
      if (open != std::string::npos) {
        if (step.back() != ']') throw Error(ErrorCode::InvalidSlotPath, "bad step '" + step + "'");
        keyword = step.substr(0, open);
        const std::string idx = step.substr(open + 1, step.size() - open - 2);
        if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
          throw Error(ErrorCode::InvalidSlotPath, "bad step '" + step + "'");
        }
        nth = std::stoul(idx);
      }
      LudemeNode* found = nullptr;
      std::size_t seen = 0;
      for (auto& a : cur->args) {
        if (a.is_ludeme() && a.text == keyword && seen++ == nth) {
          found = &a;
          break;
        }
      }
      if (!found) {
        throw Error(ErrorCode::InvalidSlotPath, "'" + path + "': no child '" + step + "'");
      }
      cur = found;
    }
    if (end == path.size()) break;
  }
  return cur;
}

double as_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace

ReconstructionSpec recon_spec_from_json(const nlohmann::json& j) {
  ReconstructionSpec spec;
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "recon spec must be an object");
  try {
    spec.fixed = parse(j.at("fixed").get<std::string>());
    for (const auto& s : j.at("slots")) {
      Slot slot;
      slot.path = s.at("path").get<std::string>();
      if (s.contains("candidates")) {
        for (const auto& c : s.at("candidates")) {
          slot.candidates.push_back(c.is_number_integer() ? LudemeNode::integer(c.get<std::int64_t>())
                                                          : parse(c.get<std::string>()));
        }
      } else if (s.contains("range")) {
        const auto& r = s.at("range");
        if (!r.is_array() || r.size() != 2) {
          throw Error(ErrorCode::InvalidArgument, "range must be [lo, hi]");
        }
        const auto lo = r[0].get<std::int64_t>();
        const auto hi = r[1].get<std::int64_t>();
        if (hi - lo > 100000) throw Error(ErrorCode::InvalidArgument, "range too wide");
        for (auto v = lo; v <= hi; ++v) slot.candidates.push_back(LudemeNode::integer(v));
      }
      if (slot.candidates.empty()) {
        throw Error(ErrorCode::EmptySlot, "slot '" + slot.path + "' has no candidates");
      }
      spec.slots.push_back(std::move(slot));
    }
    if (j.contains("prior")) {
      for (const auto& [k, v] : j.at("prior").items()) {
        const double w = as_number(v, "prior weight");
        if (!(w > 0 && w <= 1)) {
          throw Error(ErrorCode::InvalidArgument, "prior for '" + k + "' must be in (0, 1]");
        }
        spec.prior[k] = w;
      }
    }
    if (j.contains("budget")) {
      const auto b = j.at("budget").get<std::int64_t>();
      if (b < 1) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
      spec.budget = static_cast<std::size_t>(b);
    }
    if (j.contains("beam_width")) {
      const auto b = j.at("beam_width").get<std::int64_t>();
      if (b < 1) throw Error(ErrorCode::InvalidArgument, "beam_width must be >= 1");
      spec.beam_width = static_cast<std::size_t>(b);
    }
    if (j.contains("trials")) spec.trials = trial_spec_from_json(j.at("trials"));
    if (j.contains("ladder")) spec.ladder = ladder_from_json(j.at("ladder"));
    if (j.contains("thresholds")) spec.thresholds = thresholds_from_json(j.at("thresholds"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("recon spec: ") + e.what());
  }
  for (const auto& s : spec.slots) resolve(spec.fixed, s.path);
  return spec;
}

std::size_t candidate_count(const ReconstructionSpec& spec) {
  std::size_t n = 1;
  for (const auto& s : spec.slots) {
    if (n > std::numeric_limits<std::size_t>::max() / s.candidates.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    n *= s.candidates.size();
  }
  return n;
}

GameDescription instantiate(const ReconstructionSpec& spec, const std::vector<std::size_t>& choice) {
  if (choice.size() != spec.slots.size()) {
    throw Error(ErrorCode::InvalidArgument, "choice does not match the slot count");
  }
  LudemeNode tree = spec.fixed;
  for (std::size_t i = 0; i < spec.slots.size(); ++i) {
    const Slot& s = spec.slots[i];
    if (choice[i] >= s.candidates.size()) {
      throw Error(ErrorCode::InvalidArgument, "candidate index out of range");
    }
    *resolve(tree, s.path) = s.candidates[choice[i]];
  }
  try {
    return canonicalize(validate(tree));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidArgument,
                "slot assignment gives an invalid description: " + std::string(e.what()));
  }
}

void enumerate_candidates(
    const ReconstructionSpec& spec,
    const std::function<bool(const std::vector<std::size_t>&, const GameDescription&)>& sink) {
  for (const auto& s : spec.slots) {
    if (s.candidates.empty()) throw Error(ErrorCode::EmptySlot, "slot '" + s.path + "' is empty");
  }
  std::vector<std::size_t> choice(spec.slots.size(), 0);
  for (std::size_t emitted = 0; emitted < spec.budget; ++emitted) {
    if (!sink(choice, instantiate(spec, choice))) return;
    std::size_t k = choice.size();
    while (k > 0) {
      --k;
      if (++choice[k] < spec.slots[k].candidates.size()) break;
      choice[k] = 0;
      if (k == 0) return;
    }
    if (choice.empty()) return;
  }
}

double authenticity_prior(const GameDescription& gd, const std::map<std::string, double>& prior) {
  std::set<std::string> keywords;
  std::function<void(const LudemeNode&)> walk = [&](const LudemeNode& n) {
    if (n.is_ludeme()) keywords.insert(n.text);
    for (const auto& a : n.args) walk(a);
  };
  walk(gd.root());
  double p = 1.0;
  for (const auto& k : keywords) {
    auto it = prior.find(k);
    if (it != prior.end()) p *= it->second;
  }
  return p;
}

RankedCandidate score_candidate(const GameDescription& gd, const ReconstructionSpec& spec) {
  RankedCandidate c;
  c.description = gd;
  c.text = canonical_text(gd);
  const Game g = compile(gd);
  TrialSpec trials = spec.trials;
  trials.threads = 1;
  c.quality = evaluate(g, trials, spec.ladder, spec.thresholds);
  c.prior = authenticity_prior(gd, spec.prior);
  c.score = std::clamp(c.quality.score * c.prior, 0.0, 1.0);
  return c;
}

namespace {

bool ranks_before(const RankedCandidate& a, const RankedCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.text < b.text;
}

void score_all(const ReconstructionSpec& spec, const std::vector<std::vector<std::size_t>>& choices,
               int threads, std::vector<RankedCandidate>& out) {
  std::vector<RankedCandidate> scored(choices.size());
  parallel_for(choices.size(), threads, [&](std::size_t i) {
    scored[i] = score_candidate(instantiate(spec, choices[i]), spec);
    scored[i].choice = choices[i];
  });
  for (auto& s : scored) out.push_back(std::move(s));
}

}  // namespace

std::vector<RankedCandidate> reconstruct(const ReconstructionSpec& spec, int threads) {
  std::vector<RankedCandidate> ranked;
  if (candidate_count(spec) <= spec.budget) {
    std::vector<std::vector<std::size_t>> choices;
    enumerate_candidates(spec, [&](const std::vector<std::size_t>& c, const GameDescription&) {
      choices.push_back(c);
      return true;
    });
    score_all(spec, choices, threads, ranked);
  } else {
    // Beam: from each kept assignment, vary one slot at a time.
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::vector<std::size_t>> beam{std::vector<std::size_t>(spec.slots.size(), 0)};
    score_all(spec, beam, threads, ranked);
    seen.insert(beam[0]);
    for (std::size_t s = 0; s < spec.slots.size() && ranked.size() < spec.budget; ++s) {
      std::vector<std::vector<std::size_t>> fresh;
      for (const auto& b : beam) {
        for (std::size_t k = 0; k < spec.slots[s].candidates.size(); ++k) {
          auto c = b;
          c[s] = k;
          if (seen.insert(c).second) fresh.push_back(std::move(c));
        }
      }
      if (fresh.size() > spec.budget - ranked.size()) fresh.resize(spec.budget - ranked.size());
      score_all(spec, fresh, threads, ranked);
      std::vector<const RankedCandidate*> pool;
      for (const auto& r : ranked) {
        if (std::find(beam.begin(), beam.end(), r.choice) != beam.end() ||
            std::find_if(fresh.begin(), fresh.end(), [&](const auto& f) { return f == r.choice; }) !=
                fresh.end()) {
          pool.push_back(&r);
        }
      }
      std::sort(pool.begin(), pool.end(),
                [](const RankedCandidate* a, const RankedCandidate* b) { return ranks_before(*a, *b); });
      beam.clear();
      for (std::size_t i = 0; i < pool.size() && i < spec.beam_width; ++i) beam.push_back(pool[i]->choice);
    }
  }
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  return ranked;
}

nlohmann::json to_json(const RankedCandidate& c) {
  return {{"description", c.text},
          {"choice", c.choice},
          {"quality", to_json(c.quality)},
          {"prior", c.prior},
          {"score", c.score}};
}

nlohmann::json to_json(const std::vector<RankedCandidate>& ranked) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    auto j = to_json(ranked[i]);
    j["rank"] = i + 1;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace lud
