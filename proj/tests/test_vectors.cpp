#include "doctest.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "blocklex/corpus.hpp"
#include "blocklex/error.hpp"
#include "blocklex/rng.hpp"
#include "blocklex/vectors.hpp"
#include "testutil.hpp"

using namespace blocklex;
using testutil::TempDir;
using testutil::write_file;

namespace {

SparseVector sv(uint32_t dim, std::initializer_list<std::pair<uint32_t, double>> entries) {
  SparseVector v;
  v.dim = dim;
  for (const auto& [i, x] : entries) v.push_back(i, x);
  return v;
}

// Set-based reimplementation of the per-dimension scores, partitioning the
// example set explicitly instead of counting in one pass.
double entropy_of(const std::vector<uint8_t>& labels, const std::vector<size_t>& subset) {
  if (subset.empty()) return 0.0;
  double pos = 0;
  for (size_t i : subset) pos += labels[i];
  const double n = static_cast<double>(subset.size());
  double h = 0.0;
  for (double c : {pos, n - pos}) {
    if (c > 0) h -= (c / n) * std::log2(c / n);
  }
  return h;
}

double gini_of(const std::vector<uint8_t>& labels, const std::vector<size_t>& subset) {
  if (subset.empty()) return 0.0;
  double pos = 0;
  for (size_t i : subset) pos += labels[i];
  const double n = static_cast<double>(subset.size());
  const double p = pos / n, q = (n - pos) / n;
  return 1.0 - p * p - q * q;
}

void oracle_scores(const std::vector<SparseVector>& vectors, const std::vector<uint8_t>& labels,
                   uint32_t d, double* igr_out, double* gini_out) {
  std::vector<size_t> present, absent, all;
  for (size_t i = 0; i < vectors.size(); ++i) {
    all.push_back(i);
    if (vectors[i].at(d) != 0.0) present.push_back(i);
    else absent.push_back(i);
  }
  const double n = static_cast<double>(vectors.size());
  const double wp = present.size() / n, wa = absent.size() / n;

  const double info_s = entropy_of(labels, all);
  const double info_v = wp * entropy_of(labels, present) + wa * entropy_of(labels, absent);
  double split = 0.0;
  for (double w : {wp, wa}) {
    if (w > 0) split -= w * std::log2(w);
  }
  *igr_out = split > 0 ? (info_s - info_v) / split : 0.0;
  *gini_out = gini_of(labels, all) - (wp * gini_of(labels, present) + wa * gini_of(labels, absent));
}

}  // namespace

TEST_CASE("synset_vector averages member word vectors") {
  // corpus: "a" everywhere, "b" at position 3 only, plus one word never used
  std::vector<std::string> tokens(8, "a");
  tokens[3] = "b";
  const BlockIndex index = segment(make_corpus(tokens), BlockSpec::make(4, 0.5));
  REQUIRE(index.block_count == 3);

  // singleton mean is the word vector itself
  const SparseVector single = synset_vector(index, {"b"});
  CHECK(single.entries == std::vector<std::pair<uint32_t, double>>{{0, 1.0}, {1, 1.0}});

  // two members: (1,1,1) and (1,1,0) -> (1, 1, 0.5)
  const SparseVector both = synset_vector(index, {"a", "b"});
  CHECK(both.entries ==
        std::vector<std::pair<uint32_t, double>>{{0, 1.0}, {1, 1.0}, {2, 0.5}});

  // a member absent from the corpus contributes zero but still counts
  const SparseVector with_ghost = synset_vector(index, {"b", "ghost"});
  CHECK(with_ghost.entries == std::vector<std::pair<uint32_t, double>>{{0, 0.5}, {1, 0.5}});

  CHECK_THROWS_AS(synset_vector(index, {}), Error);
}

TEST_CASE("igr hand values on a balanced set of four") {
  // dim 0: present in exactly the two positives -> perfect split
  // dim 1: present everywhere -> zero split entropy
  // dim 2: present in one positive and one negative -> independent
  const std::vector<SparseVector> vectors = {
      sv(3, {{0, 1.0}, {1, 1.0}, {2, 1.0}}),
      sv(3, {{0, 0.5}, {1, 1.0}}),
      sv(3, {{1, 1.0}, {2, 2.0}}),
      sv(3, {{1, 1.0}}),
  };
  const std::vector<uint8_t> labels = {1, 1, 0, 0};
  const std::vector<double> igr = igr_scores(vectors, labels);
  CHECK(igr[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(igr[1] == 0.0);
  CHECK(igr[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gini hand values on a balanced set of four") {
  const std::vector<SparseVector> vectors = {
      sv(3, {{0, 1.0}, {1, 1.0}, {2, 1.0}}),
      sv(3, {{0, 0.5}, {1, 1.0}}),
      sv(3, {{1, 1.0}, {2, 2.0}}),
      sv(3, {{1, 1.0}}),
  };
  const std::vector<uint8_t> labels = {1, 1, 0, 0};
  const std::vector<double> gini = gini_scores(vectors, labels);
  CHECK(gini[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gini[1] == doctest::Approx(0.0).epsilon(1e-12));  // constant feature
  CHECK(gini[2] == doctest::Approx(0.0).epsilon(1e-12));  // label-independent
}

TEST_CASE("feature scoring rejects single-class input") {
  const std::vector<SparseVector> vectors = {sv(2, {{0, 1.0}}), sv(2, {{1, 1.0}})};
  CHECK_THROWS_AS(igr_scores(vectors, {1, 1}), Error);
  CHECK_THROWS_AS(gini_scores(vectors, {0, 0}), Error);
}

TEST_CASE("production scores match the set-based oracle on random data") {
  Rng rng(321);
  for (int trial = 0; trial < 30; ++trial) {
    const uint32_t dim = 12;
    const size_t n = 4 + rng.below(40);
    std::vector<SparseVector> vectors;
    std::vector<uint8_t> labels;
    for (size_t i = 0; i < n; ++i) {
      SparseVector v;
      v.dim = dim;
      for (uint32_t d = 0; d < dim; ++d) {
        if (rng.uniform01() < 0.35) v.push_back(d, rng.uniform(0.1, 1.0));
      }
      vectors.push_back(std::move(v));
      labels.push_back(i % 2 == 0 ? 1 : 0);  // both classes guaranteed
    }
    const std::vector<double> igr = igr_scores(vectors, labels);
    const std::vector<double> gini = gini_scores(vectors, labels);
    const double gini_s = gini_of(labels, [&] {
      std::vector<size_t> all(n);
      for (size_t i = 0; i < n; ++i) all[i] = i;
      return all;
    }());
    for (uint32_t d = 0; d < dim; ++d) {
      double igr_expected, gini_expected;
      oracle_scores(vectors, labels, d, &igr_expected, &gini_expected);
      CHECK(igr[d] == doctest::Approx(igr_expected).epsilon(1e-12));
      CHECK(gini[d] == doctest::Approx(gini_expected).epsilon(1e-12));
      // bounds
      CHECK(igr[d] >= 0.0);
      CHECK(igr[d] <= 1.0);
      CHECK(gini[d] >= 0.0);
      CHECK(gini[d] <= gini_s + 1e-15);
      CHECK(gini_s <= 0.5);
    }

    // swapping the class labels changes neither score
    std::vector<uint8_t> swapped;
    for (uint8_t l : labels) swapped.push_back(1 - l);
    CHECK(igr_scores(vectors, swapped) == igr);
    CHECK(gini_scores(vectors, swapped) == gini);
  }
}

TEST_CASE("select_features with an explicit border") {
  const std::vector<double> scores = {0.5, 0.005, 0.02, 0.0};
  const FeatureMask mask = select_features(scores, FeatureMask::Method::Igr, 0.01);
  CHECK(mask.kept == std::vector<uint32_t>{0, 2});
  CHECK(mask.scores == std::vector<double>{0.5, 0.02});
  CHECK(mask.source_dim == 4);

  // epsilon 0 keeps everything
  CHECK(select_features(scores, FeatureMask::Method::Igr, 0.0).kept.size() == 4);
  // pruning everything is an error
  CHECK_THROWS_AS(select_features(scores, FeatureMask::Method::Igr, 2.0), Error);
}

TEST_CASE("median rule keeps every dimension when scores are equal") {
  const std::vector<double> scores(9, 0.25);
  const FeatureMask mask = select_features(scores, FeatureMask::Method::Gini, std::nullopt);
  CHECK(mask.border == 0.25);
  CHECK(mask.kept.size() == 9);
}

TEST_CASE("median rule keeps the upper half") {
  const std::vector<double> scores = {0.1, 0.4, 0.2, 0.3};  // median (0.2+0.3)/2 = 0.25
  const FeatureMask mask = select_features(scores, FeatureMask::Method::Gini, std::nullopt);
  CHECK(mask.border == doctest::Approx(0.25));
  CHECK(mask.kept == std::vector<uint32_t>{1, 3});
}

TEST_CASE("apply_mask projects and re-indexes") {
  const FeatureMask mask{FeatureMask::Method::Igr, 0.0, 3, {0, 2}, {1.0, 1.0}};
  const SparseVector v = sv(3, {{0, 1.0}, {2, 3.0}});
  const SparseVector projected = apply_mask(v, mask);
  CHECK(projected.dim == 2);
  CHECK(projected.entries == std::vector<std::pair<uint32_t, double>>{{0, 1.0}, {1, 3.0}});

  // dropped dimension disappears
  const SparseVector w = sv(3, {{1, 5.0}, {2, 7.0}});
  CHECK(apply_mask(w, mask).entries == std::vector<std::pair<uint32_t, double>>{{1, 7.0}});

  // identity mask re-indexes to itself
  const FeatureMask all{FeatureMask::Method::Igr, 0.0, 3, {0, 1, 2}, {1, 1, 1}};
  CHECK(apply_mask(v, all).entries == v.entries);

  CHECK_THROWS_AS(apply_mask(sv(5, {}), mask), Error);  // dim mismatch
  const FeatureMask empty{FeatureMask::Method::Igr, 0.0, 3, {}, {}};
  CHECK_THROWS_AS(apply_mask(v, empty), Error);
}

TEST_CASE("masking a masked vector with the projected-space identity is idempotent") {
  const FeatureMask mask{FeatureMask::Method::Gini, 0.0, 4, {1, 3}, {1.0, 1.0}};
  const SparseVector v = sv(4, {{0, 2.0}, {1, 4.0}, {3, 8.0}});
  const SparseVector once = apply_mask(v, mask);
  const FeatureMask identity{FeatureMask::Method::Gini, 0.0, 2, {0, 1}, {1.0, 1.0}};
  CHECK(apply_mask(once, identity) == once);
}

TEST_CASE("mask serialization round-trips in both formats") {
  TempDir dir;
  FeatureMask mask;
  mask.method = FeatureMask::Method::Gini;
  mask.border = 0.0123;
  mask.source_dim = 100;
  Rng rng(8);
  for (uint32_t d = 0; d < 100; d += 1 + rng.below(5)) {
    mask.kept.push_back(d);
    mask.scores.push_back(rng.uniform01());
  }

  mask.save_tsv(dir.file("mask.tsv"));
  const FeatureMask tsv = FeatureMask::load_tsv(dir.file("mask.tsv"));
  CHECK(tsv.kept == mask.kept);
  CHECK(tsv.border == mask.border);
  CHECK(tsv.source_dim == mask.source_dim);
  for (size_t i = 0; i < mask.scores.size(); ++i)
    CHECK(tsv.scores[i] == mask.scores[i]);  // exact: shortest round-trip text

  mask.save_bin(dir.file("mask.bin"));
  const FeatureMask bin = FeatureMask::load_bin(dir.file("mask.bin"));
  CHECK(bin.kept == mask.kept);
  CHECK(bin.scores == mask.scores);
  CHECK(bin.border == mask.border);
}

TEST_CASE("bow_vector counts in-vocabulary tokens") {
  const std::unordered_map<std::string, uint32_t> vocab = {{"a", 0}, {"b", 1}, {"c", 2}};
  const SparseVector counts = bow_vector({"a", "b", "a"}, vocab, 3);
  CHECK(counts.entries == std::vector<std::pair<uint32_t, double>>{{0, 2.0}, {1, 1.0}});
  CHECK(bow_vector({}, vocab, 3).nnz() == 0);
  CHECK(bow_vector({"zzz"}, vocab, 3).nnz() == 0);  // OOV ignored
}

TEST_CASE("load_embeddings parses and validates") {
  TempDir dir;
  const auto path = write_file(dir.file("emb.txt"), "alpha 1 2 3\nbeta 0 -1 0.5\n");
  const EmbeddingTable table = load_embeddings(path);
  CHECK(table.dim == 3);
  CHECK(table.vectors.at("alpha") == std::vector<double>{1, 2, 3});

  CHECK_THROWS_AS(load_embeddings(write_file(dir.file("ragged.txt"), "a 1 2\nb 1 2 3\n")), Error);
  CHECK_THROWS_AS(load_embeddings(write_file(dir.file("junk.txt"), "a 1 x\n")), Error);

  // synset embedding reuses the absent-word averaging rule
  const SparseVector mean = synset_embedding(table, {"alpha", "beta"});
  CHECK(mean.to_dense() == std::vector<double>{0.5, 0.5, 1.75});
  const SparseVector with_ghost = synset_embedding(table, {"alpha", "ghost"});
  CHECK(with_ghost.to_dense() == std::vector<double>{0.5, 1.0, 1.5});
}

TEST_CASE("gloss file loads tokens and builds a vocabulary") {
  TempDir dir;
  const auto path = write_file(dir.file("gloss.tsv"),
                               "# comment\n"
                               "n1\tsharp sudden feeling\n"
                               "n2\tcalm quiet feeling\n");
  const GlossFile gloss = load_gloss_file(path);
  CHECK(gloss.tokens_by_synset.at("n1").size() == 3);
  CHECK(gloss.vocab.size() == 5);  // sharp sudden feeling calm quiet
  CHECK_THROWS_AS(load_gloss_file(write_file(dir.file("bad.tsv"), "n1 no tab\n")), Error);
}
