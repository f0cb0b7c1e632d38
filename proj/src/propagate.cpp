#include "blocklex/propagate.hpp"

#include <algorithm>
#include <cmath>

#include "blocklex/error.hpp"

namespace blocklex {

void WalkConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) Error::config("alpha must lie in [0,1]");
  if (max_iters < 1) Error::config("max_iters must be >= 1");
  if (!(tol > 0.0)) Error::config("tol must be positive");
}

ScoreTable random_walk(const SynsetGraph& graph, const ScoreTable& initial, const WalkConfig& cfg,
                       WalkReport* report) {
  cfg.validate();
  std::vector<double> e(graph.size());
  for (uint32_t i = 0; i < graph.size(); ++i) {
    const auto* entry = initial.find(graph.synsets[i].id);
    if (!entry) Error::data("initial score missing for synset " + graph.synsets[i].id);
    e[i] = entry->score;
  }

  if (cfg.alpha == 0.0) {
    // The update collapses to a_i = e_i after one sweep.
    if (report) *report = WalkReport{1, 0.0, true};
    return initial;
  }

  std::vector<double> prev = e;
  std::vector<double> next(graph.size(), 0.0);
  uint32_t iters = 0;
  double delta = 0.0;
  bool converged = false;
  while (iters < cfg.max_iters) {
    ++iters;
    delta = 0.0;
    for (uint32_t i = 0; i < graph.size(); ++i) {
      const auto& in = graph.gloss_in[i];
      double a;
      if (in.empty()) {
        a = e[i];
      } else {
        double sum = 0.0;
        for (uint32_t j : in) sum += prev[j];
        a = cfg.alpha * sum / static_cast<double>(in.size()) + (1.0 - cfg.alpha) * e[i];
      }
      next[i] = a;
      delta = std::max(delta, std::abs(a - prev[i]));
    }
    std::swap(prev, next);
    if (delta < cfg.tol) {
      converged = true;
      break;
    }
  }
  if (report) *report = WalkReport{iters, delta, converged};

  ScoreTable result = initial;
  for (uint32_t i = 0; i < graph.size(); ++i) {
    const double score = std::min(1.0, std::max(0.0, prev[i]));
    const bool dangling = graph.gloss_in[i].empty();
    const auto* old_entry = initial.find(graph.synsets[i].id);
    result.set(graph.synsets[i].id, score,
               dangling ? old_entry->prov : Provenance::Propagated);
  }
  return result;
}

AlphaSweepResult alpha_sweep(const SynsetGraph& graph, const ScoreTable& initial,
                             const std::vector<double>& alphas, uint32_t max_iters, double tol,
                             const std::function<double(const ScoreTable&)>& evaluate) {
  if (alphas.empty()) Error::config("alpha sweep needs at least one alpha");
  AlphaSweepResult result;
  bool first = true;
  for (double alpha : alphas) {
    WalkConfig cfg{alpha, max_iters, tol};
    AlphaSweepRow row;
    row.alpha = alpha;
    ScoreTable walked = random_walk(graph, initial, cfg, &row.walk);
    row.tau = evaluate(walked);
    result.rows.push_back(row);
    if (first || row.tau < result.best_tau) {
      first = false;
      result.best_tau = row.tau;
      result.best_alpha = alpha;
      result.best_scores = std::move(walked);
    }
  }
  return result;
}

}  // namespace blocklex
