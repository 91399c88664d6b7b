#pragma once
// Bridges between library trees and the oracle's plain trees.

#include <random>

#include "lud/distance.hpp"
#include "oracles.hpp"

namespace fixture {

inline oracle::Tree to_oracle(const lud::LudemeNode& n,
                              const lud::LudemeLibrary& lib = lud::LudemeLibrary::standard()) {
  oracle::Tree t;
  t.label = n.is_int() ? std::to_string(n.value) : n.text;
  t.numeric = n.is_int();
  t.cls = lud::node_class(n, lib);
  for (const auto& a : n.args) t.kids.push_back(to_oracle(a, lib));
  return t;
}

inline oracle::Costs to_oracle(const lud::WeightTable& w) {
  oracle::Costs c;
  c.indel = w.indel;
  c.default_indel = w.default_indel;
  c.relabel = w.relabel;
  c.cross = w.cross_relabel;
  c.numeric = w.numeric;
  return c;
}

// Random tree of exactly `size` nodes mixing ludemes from several
// categories, identifiers, flags and integers.
inline lud::LudemeNode random_tree(std::mt19937_64& rng, int size) {
  using lud::LudemeNode;
  static const char* keywords[] = {"square", "hex", "line", "win", "play", "add", "foo"};
  static const char* words[] = {"Own", "Enemy", "Any"};
  if (size == 1) {
    switch (rng() % 3) {
      case 0: return LudemeNode::integer(static_cast<int>(rng() % 4));
      case 1: return LudemeNode::identifier(words[rng() % 3]);
      default: return LudemeNode::flag(rng() % 2 ? "diagonals" : "bare");
    }
  }
  LudemeNode n = LudemeNode::ludeme(keywords[rng() % 7]);
  int left = size - 1;
  while (left > 0) {
    const int take = 1 + static_cast<int>(rng() % left);
    n.args.push_back(random_tree(rng, take));
    left -= take;
  }
  return n;
}

}  // namespace fixture
