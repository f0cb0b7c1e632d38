#include "blocklex/rankeval.hpp"

#include <algorithm>
#include <unordered_set>

#include "blocklex/error.hpp"

namespace blocklex {

RankedList rank_from_values(const std::vector<std::string>& ids,
                            const std::vector<double>& values) {
  if (ids.empty()) Error::config("cannot rank an empty item set");
  if (ids.size() != values.size()) Error::config("ids/values size mismatch");
  std::vector<uint32_t> order(ids.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](uint32_t a, uint32_t b) { return values[a] > values[b]; });
  RankedList list;
  list.items = ids;
  list.ranks.resize(ids.size());
  uint32_t rank = 1;
  for (uint32_t i = 0; i < order.size(); ++i) {
    if (i > 0 && values[order[i]] < values[order[i - 1]]) rank = i + 1;
    list.ranks[order[i]] = rank;
  }
  return list;
}

RankedList rank_from_scores(const ScoreTable& scores, const std::vector<std::string>& subset) {
  if (subset.empty()) Error::config("cannot rank an empty item set");
  std::vector<double> values;
  values.reserve(subset.size());
  for (const auto& id : subset) {
    const auto* entry = scores.find(id);
    if (!entry) Error::data("no score for synset " + id);
    values.push_back(entry->score);
  }
  return rank_from_values(subset, values);
}

namespace {

// Counts pairs i < j with a[i] > a[j] by merge sort.
uint64_t count_strict_inversions(std::vector<uint32_t>& a) {
  const size_t n = a.size();
  std::vector<uint32_t> buf(n);
  uint64_t inversions = 0;
  for (size_t width = 1; width < n; width *= 2) {
    for (size_t lo = 0; lo + width < n; lo += 2 * width) {
      const size_t mid = lo + width;
      const size_t hi = std::min(n, mid + width);
      size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[j] < a[i]) {
          inversions += mid - i;
          buf[k++] = a[j++];
        } else {
          buf[k++] = a[i++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
      std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
    }
  }
  return inversions;
}

}  // namespace

TauResult tau_p(const RankedList& predicted, const RankedList& gold, double p) {
  if (!(p >= 0.0 && p <= 1.0)) Error::config("p must lie in [0,1]");
  if (predicted.items.size() != predicted.ranks.size() || gold.items.size() != gold.ranks.size())
    Error::config("malformed ranked list");
  const size_t h = predicted.items.size();
  if (h < 2) Error::config("tau_p needs at least two items");
  if (gold.items.size() != h) Error::data("ranked lists cover different item sets");

  // pair up (predicted rank, gold rank) per item
  std::vector<std::pair<uint32_t, uint32_t>> pairs(h);
  {
    std::vector<std::pair<std::string, uint32_t>> gold_sorted(h);
    for (size_t i = 0; i < h; ++i) gold_sorted[i] = {gold.items[i], gold.ranks[i]};
    std::sort(gold_sorted.begin(), gold_sorted.end());
    std::vector<std::pair<std::string, uint32_t>> pred_sorted(h);
    for (size_t i = 0; i < h; ++i) pred_sorted[i] = {predicted.items[i], predicted.ranks[i]};
    std::sort(pred_sorted.begin(), pred_sorted.end());
    for (size_t i = 0; i < h; ++i) {
      if (pred_sorted[i].first != gold_sorted[i].first)
        Error::data("ranked lists cover different item sets");
      pairs[i] = {pred_sorted[i].second, gold_sorted[i].second};
    }
  }

  std::sort(pairs.begin(), pairs.end());

  // n_u = pairs tied in predicted minus pairs tied in both
  auto choose2 = [](uint64_t g) { return g * (g - 1) / 2; };
  uint64_t tied_pred = 0, tied_both = 0;
  for (size_t i = 0; i < h;) {
    size_t j = i;
    while (j < h && pairs[j].first == pairs[i].first) ++j;
    tied_pred += choose2(j - i);
    for (size_t a = i; a < j;) {
      size_t b = a;
      while (b < j && pairs[b].second == pairs[a].second) ++b;
      tied_both += choose2(b - a);
      a = b;
    }
    i = j;
  }

  // Discordant pairs: with items sorted by (pred, gold) ascending, pairs tied
  // in predicted are gold-nondecreasing and contribute no strict inversion,
  // so strict inversions of the gold sequence are exactly the pairs ranked
  // oppositely by the two lists.
  std::vector<uint32_t> gold_sequence(h);
  for (size_t i = 0; i < h; ++i) gold_sequence[i] = pairs[i].second;
  const uint64_t n_d = count_strict_inversions(gold_sequence);

  TauResult result;
  result.h = h;
  result.n_d = n_d;
  result.n_u = tied_pred - tied_both;
  const double z = static_cast<double>(h) * static_cast<double>(h - 1) / 2.0;
  result.tau = (static_cast<double>(result.n_d) + p * static_cast<double>(result.n_u)) / z;
  return result;
}

EvalReport evaluate_run(const ScoreTable& predicted,
                        const std::vector<std::pair<std::string, double>>& gold, double p) {
  if (gold.empty()) Error::data("gold label set is empty");
  std::vector<std::string> ids;
  std::vector<double> gold_values;
  std::unordered_set<std::string> seen;
  for (const auto& [id, value] : gold) {
    if (!seen.insert(id).second) Error::data("duplicate gold label for synset " + id);
    if (predicted.find(id)) {
      ids.push_back(id);
      gold_values.push_back(value);
    }
  }
  if (ids.empty()) Error::data("no overlap between predicted scores and gold labels");
  if (ids.size() < 2) Error::data("evaluation needs at least two gold-labeled synsets");

  const RankedList pred_ranks = rank_from_scores(predicted, ids);
  const RankedList gold_ranks = rank_from_values(ids, gold_values);
  const TauResult tau = tau_p(pred_ranks, gold_ranks, p);

  EvalReport report;
  report.axis = predicted.axis;
  report.tau = tau.tau;
  report.h = tau.h;
  report.n_d = tau.n_d;
  report.n_u = tau.n_u;
  return report;
}

}  // namespace blocklex
