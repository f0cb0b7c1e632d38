#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "blocklex/corpus.hpp"
#include "blocklex/sparse.hpp"

namespace blocklex {

// Mean of the member words' binary block vectors. Words absent from the
// corpus contribute zero vectors but still count in the denominator.
SparseVector synset_vector(const BlockIndex& index, const std::vector<std::string>& words);

// Per-dimension information gain ratio over the presence/absence partition
// (value != 0 vs == 0). Dimensions with zero split entropy score 0.
// labels[i] must be 0 or 1 and both classes must be present.
std::vector<double> igr_scores(const std::vector<SparseVector>& vectors,
                               const std::vector<uint8_t>& labels);

// Per-dimension Gini impurity decrease over the same partition.
std::vector<double> gini_scores(const std::vector<SparseVector>& vectors,
                                const std::vector<uint8_t>& labels);

struct FeatureMask {
  enum class Method { Igr, Gini };
  Method method = Method::Igr;
  double border = 0.0;  // resolved epsilon (the median when the rule is used)
  uint32_t source_dim = 0;
  std::vector<uint32_t> kept;  // sorted dimension indices
  std::vector<double> scores;  // aligned with kept

  void save_tsv(const std::string& path) const;
  static FeatureMask load_tsv(const std::string& path);
  void save_bin(const std::string& path) const;
  static FeatureMask load_bin(const std::string& path);
};

// Keeps dimensions with score >= epsilon. When epsilon is not given the
// border is the median of all per-dimension scores.
FeatureMask select_features(const std::vector<double>& scores, FeatureMask::Method method,
                            std::optional<double> epsilon);

// Projects v onto the mask's kept dimensions, re-indexed to [0, |kept|).
SparseVector apply_mask(const SparseVector& v, const FeatureMask& mask);

// Term-count vector over a fixed vocabulary; out-of-vocabulary tokens are
// ignored.
SparseVector bow_vector(const std::vector<std::string>& gloss_tokens,
                        const std::unordered_map<std::string, uint32_t>& vocab, uint32_t dim);

struct EmbeddingTable {
  uint32_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

// Space-separated text embeddings, `word v1 ... vd` per line with constant d.
EmbeddingTable load_embeddings(const std::string& path);

// Mean of the member words' embeddings under the same absent-word rule as
// synset_vector.
SparseVector synset_embedding(const EmbeddingTable& table, const std::vector<std::string>& words);

// Gloss token lists per synset id: TSV `synset-id \t token token ...`.
struct GlossFile {
  std::unordered_map<std::string, std::vector<std::string>> tokens_by_synset;
  std::unordered_map<std::string, uint32_t> vocab;  // gloss corpus vocabulary
  std::vector<std::string> vocab_words;
};

GlossFile load_gloss_file(const std::string& path);

}  // namespace blocklex
