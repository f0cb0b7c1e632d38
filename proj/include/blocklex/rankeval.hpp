#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "blocklex/learn.hpp"

namespace blocklex {

// Competition ranking produced from scores: rank = 1 + number of items with
// a strictly greater score, so tied scores share a rank and higher scores
// rank first.
struct RankedList {
  std::vector<std::string> items;
  std::vector<uint32_t> ranks;  // aligned with items
};

RankedList rank_from_values(const std::vector<std::string>& ids,
                            const std::vector<double>& values);

// Ranks the given subset of a score table; every subset id must be scored.
RankedList rank_from_scores(const ScoreTable& scores, const std::vector<std::string>& subset);

struct TauResult {
  double tau = 0.0;
  uint64_t h = 0;    // number of items
  uint64_t n_d = 0;  // discordant pairs (strictly opposite order)
  uint64_t n_u = 0;  // pairs tied in predicted but strictly ordered in gold
};

// p-normalized Kendall tau distance between two rankings over the same item
// set: (n_d + p * n_u) / (h(h-1)/2). 0 means perfect agreement. Runs in
// O(h log h) via inversion counting.
TauResult tau_p(const RankedList& predicted, const RankedList& gold, double p = 0.5);

struct EvalReport {
  Axis axis = Axis::Arousal;
  double tau = 0.0;
  uint64_t h = 0;
  uint64_t n_d = 0;
  uint64_t n_u = 0;
};

// Restricts to the gold-labeled synsets present in the predicted table,
// ranks both sides, and computes tau_p.
EvalReport evaluate_run(const ScoreTable& predicted,
                        const std::vector<std::pair<std::string, double>>& gold, double p = 0.5);

}  // namespace blocklex
