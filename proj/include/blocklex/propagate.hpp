#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "blocklex/learn.hpp"
#include "blocklex/lexnet.hpp"

namespace blocklex {

struct WalkConfig {
  double alpha = 0.7;
  uint32_t max_iters = 200;
  double tol = 1e-9;

  void validate() const;
};

struct WalkReport {
  uint32_t iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
};

// Synchronous random-walk refinement over the gloss graph:
//   a_i <- (alpha/|C(i)|) * sum_{j in C(i)} a_j + (1-alpha) * e_i
// with e_i fixed to the initial score and C(i) the gloss in-neighbors.
// Nodes without in-neighbors hold a_i = e_i. Iterates until the largest
// per-node change drops below tol or max_iters is reached; the result is
// clamped into [0,1]. alpha = 0 returns the initial table unchanged.
ScoreTable random_walk(const SynsetGraph& graph, const ScoreTable& initial, const WalkConfig& cfg,
                       WalkReport* report = nullptr);

struct AlphaSweepRow {
  double alpha = 0.0;
  double tau = 0.0;
  WalkReport walk;
};

struct AlphaSweepResult {
  std::vector<AlphaSweepRow> rows;
  double best_alpha = 0.0;
  double best_tau = 0.0;
  ScoreTable best_scores;
};

// Runs the walk for each alpha and evaluates the refined table (lower is
// better). Ties prefer the smaller alpha.
AlphaSweepResult alpha_sweep(const SynsetGraph& graph, const ScoreTable& initial,
                             const std::vector<double>& alphas, uint32_t max_iters, double tol,
                             const std::function<double(const ScoreTable&)>& evaluate);

}  // namespace blocklex
