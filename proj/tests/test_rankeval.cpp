#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "blocklex/error.hpp"
#include "blocklex/rankeval.hpp"
#include "blocklex/rng.hpp"

using namespace blocklex;

namespace {

ScoreTable table_from(const std::vector<std::pair<std::string, double>>& entries) {
  ScoreTable table;
  for (const auto& [id, score] : entries) table.set(id, score, Provenance::Predicted);
  return table;
}

// Brute-force pair enumeration straight from the distance's definition:
// n_d counts pairs ranked strictly oppositely, n_u counts pairs tied in the
// predicted ranking but strictly ordered in gold. Independent of the
// production inversion counter.
TauResult brute_force_tau(const RankedList& predicted, const RankedList& gold, double p) {
  const size_t h = predicted.items.size();
  std::vector<uint32_t> pr(h), gr(h);
  for (size_t i = 0; i < h; ++i) {
    pr[i] = predicted.ranks[i];
    // align gold by item name
    for (size_t j = 0; j < h; ++j) {
      if (gold.items[j] == predicted.items[i]) {
        gr[i] = gold.ranks[j];
        break;
      }
    }
  }
  uint64_t n_d = 0, n_u = 0;
  for (size_t i = 0; i < h; ++i) {
    for (size_t j = i + 1; j < h; ++j) {
      const bool pred_lt = pr[i] < pr[j], pred_gt = pr[i] > pr[j];
      const bool gold_lt = gr[i] < gr[j], gold_gt = gr[i] > gr[j];
      if ((pred_lt && gold_gt) || (pred_gt && gold_lt)) ++n_d;
      if (pr[i] == pr[j] && gr[i] != gr[j]) ++n_u;
    }
  }
  TauResult r;
  r.h = h;
  r.n_d = n_d;
  r.n_u = n_u;
  r.tau = (static_cast<double>(n_d) + p * static_cast<double>(n_u)) /
          (static_cast<double>(h) * (h - 1) / 2.0);
  return r;
}

RankedList random_ranking(Rng& rng, const std::vector<std::string>& items, bool with_ties) {
  std::vector<double> values;
  values.reserve(items.size());
  const uint64_t buckets = with_ties ? 1 + rng.below(items.size()) : 0;
  for (size_t i = 0; i < items.size(); ++i) {
    values.push_back(with_ties ? static_cast<double>(rng.below(buckets)) / (buckets + 1)
                               : rng.uniform01());
  }
  return rank_from_values(items, values);
}

}  // namespace

TEST_CASE("rank_from_scores uses competition ranking") {
  const ScoreTable scores = table_from({{"a", 0.9}, {"b", 0.5}, {"c", 0.5}});
  const RankedList list = rank_from_scores(scores, {"a", "b", "c"});
  CHECK(list.ranks == std::vector<uint32_t>{1, 2, 2});

  const ScoreTable equal = table_from({{"a", 0.5}, {"b", 0.5}, {"c", 0.5}});
  const RankedList all_tied = rank_from_scores(equal, {"a", "b", "c"});
  CHECK(all_tied.ranks == std::vector<uint32_t>{1, 1, 1});

  CHECK_THROWS_AS(rank_from_scores(scores, {}), Error);
  CHECK_THROWS_AS(rank_from_scores(scores, {"a", "zzz"}), Error);
}

TEST_CASE("tau_p hand cases") {
  // identical rankings -> 0
  const RankedList id_a{{"x", "y", "z"}, {1, 2, 3}};
  const RankedList id_b{{"x", "y", "z"}, {1, 2, 3}};
  CHECK(tau_p(id_a, id_b, 0.5).tau == 0.0);
  CHECK(tau_p(id_a, id_b, 1.0).tau == 0.0);

  // one discordant pair of three -> 1/3
  const RankedList pred{{"x", "y", "z"}, {1, 3, 2}};
  const RankedList gold{{"x", "y", "z"}, {1, 2, 3}};
  const TauResult r = tau_p(pred, gold, 0.5);
  CHECK(r.n_d == 1);
  CHECK(r.n_u == 0);
  CHECK(r.tau == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // single pair, tied in predicted but ordered in gold, p = 0.5 -> 0.5
  const RankedList tied{{"x", "y"}, {1, 1}};
  const RankedList ordered{{"x", "y"}, {1, 2}};
  const TauResult t = tau_p(tied, ordered, 0.5);
  CHECK(t.n_d == 0);
  CHECK(t.n_u == 1);
  CHECK(t.tau == 0.5);
}

TEST_CASE("tau_p errors") {
  const RankedList a{{"x", "y"}, {1, 2}};
  const RankedList b{{"x", "q"}, {1, 2}};
  CHECK_THROWS_AS(tau_p(a, b, 0.5), Error);
  const RankedList single{{"x"}, {1}};
  CHECK_THROWS_AS(tau_p(single, single, 0.5), Error);
  CHECK_THROWS_AS(tau_p(a, a, 1.5), Error);
}

TEST_CASE("fully reversed strict rankings give tau_p = 1") {
  std::vector<std::string> items;
  std::vector<uint32_t> forward, backward;
  for (uint32_t i = 0; i < 25; ++i) {
    items.push_back("s" + std::to_string(i));
    forward.push_back(i + 1);
    backward.push_back(25 - i);
  }
  const RankedList f{items, forward}, r{items, backward};
  CHECK(tau_p(f, r, 0.5).tau == 1.0);
}

TEST_CASE("production tau_p matches brute force on random tied rankings") {
  Rng rng(424242);
  std::vector<std::string> items;
  for (int i = 0; i < 200; ++i) items.push_back("s" + std::to_string(i));
  for (int trial = 0; trial < 100; ++trial) {
    const size_t h = 2 + rng.below(60);
    const std::vector<std::string> subset(items.begin(), items.begin() + h);
    const RankedList a = random_ranking(rng, subset, trial % 2 == 0);
    const RankedList b = random_ranking(rng, subset, trial % 3 != 0);
    const double p = rng.uniform01();
    const TauResult fast = tau_p(a, b, p);
    const TauResult slow = brute_force_tau(a, b, p);
    CHECK(fast.n_d == slow.n_d);
    CHECK(fast.n_u == slow.n_u);
    CHECK(fast.tau == slow.tau);
  }
}

TEST_CASE("tau_p is invariant under strictly monotone score transforms") {
  Rng rng(11);
  std::vector<std::string> items;
  std::vector<double> values;
  for (int i = 0; i < 40; ++i) {
    items.push_back("s" + std::to_string(i));
    values.push_back(rng.uniform01());
  }
  std::vector<double> squashed;
  for (double v : values) squashed.push_back(1.0 / (1.0 + std::exp(-6.0 * v)));  // monotone

  const RankedList raw = rank_from_values(items, values);
  const RankedList transformed = rank_from_values(items, squashed);
  CHECK(raw.ranks == transformed.ranks);

  const RankedList gold = random_ranking(rng, items, true);
  CHECK(tau_p(raw, gold, 0.5).tau == tau_p(transformed, gold, 0.5).tau);
}

TEST_CASE("evaluate_run restricts to the gold ids present in the prediction") {
  const ScoreTable predicted = table_from({{"a", 0.9}, {"b", 0.7}, {"c", 0.2}, {"d", 0.4}});
  // gold covers a strict ordering over three of them plus one unknown synset
  const std::vector<std::pair<std::string, double>> gold = {
      {"a", 0.95}, {"c", 0.1}, {"b", 0.8}, {"zzz", 0.5}};
  const EvalReport report = evaluate_run(predicted, gold, 0.5);
  CHECK(report.h == 3);
  CHECK(report.tau == 0.0);  // predicted ordering a > b > c matches gold

  CHECK_THROWS_AS(evaluate_run(predicted, {}, 0.5), Error);
  CHECK_THROWS_AS(evaluate_run(predicted, {{"q", 0.5}, {"r", 0.2}}, 0.5), Error);
  CHECK_THROWS_AS(evaluate_run(predicted, {{"a", 0.5}, {"a", 0.2}}, 0.5), Error);
}

TEST_CASE("evaluate_run of a table against itself is zero") {
  Rng rng(313);
  ScoreTable table;
  std::vector<std::pair<std::string, double>> gold;
  for (int i = 0; i < 50; ++i) {
    const std::string id = "s" + std::to_string(i);
    const double v = rng.uniform01();
    table.set(id, v, Provenance::Predicted);
    gold.emplace_back(id, v);
  }
  CHECK(evaluate_run(table, gold, 0.5).tau == 0.0);
}
