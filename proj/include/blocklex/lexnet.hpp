#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace blocklex {

struct Synset {
  std::string id;
  std::string pos;                 // part-of-speech tag, informational
  std::vector<std::string> words;  // unique, load order
};

// Synset graph: synonym words per synset, undirected synonym edges (radius
// expansion) and directed gloss edges (random walk). Immutable after load.
struct SynsetGraph {
  std::vector<Synset> synsets;  // index order = file order
  std::unordered_map<std::string, uint32_t> id_to_index;
  std::vector<std::vector<uint32_t>> syn_adj;   // symmetric
  std::vector<std::vector<uint32_t>> gloss_in;  // gloss_in[i] = { j : (j -> i) }
  std::unordered_map<std::string, std::vector<uint32_t>> word_to_synsets;

  uint32_t size() const { return static_cast<uint32_t>(synsets.size()); }

  // Synset indices containing a word; empty when the word is unknown.
  const std::vector<uint32_t>* synsets_of(const std::string& word) const;
};

// Line-oriented interchange format:
//   S <synset-id> <pos> <word>[,<word>...]
//   E syn <id> <id>
//   E gloss <from-id> <to-id>
// '#' starts a comment line; blank lines are skipped.
SynsetGraph load_graph(const std::string& path);

struct SeedSet {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
};

// Validates positive/negative disjointness and drops duplicates in order.
SeedSet make_seed_set(std::vector<std::string> positive, std::vector<std::string> negative);

struct VadLexicon {
  struct Vad {
    double valence = 0.0;
    double arousal = 0.0;
    double dominance = 0.0;
  };
  std::vector<std::string> words;  // file order
  std::unordered_map<std::string, Vad> entries;

  uint32_t size() const { return static_cast<uint32_t>(words.size()); }

  // Sub-lexicon containing only the given words, order preserved.
  VadLexicon restricted_to(const std::unordered_set<std::string>& keep) const;
};

// TSV `word \t valence \t arousal \t dominance` with one header line.
VadLexicon load_vad_lexicon(const std::string& path);

enum class VadField { Valence, Arousal, Dominance };

struct ExpandResult {
  std::vector<uint32_t> positive;  // synset indices, sorted
  std::vector<uint32_t> negative;
  std::vector<std::string> unmatched_seeds;  // warning-level, not an error
};

// All synsets within k synonym hops of a positive/negative seed synset.
// Synsets reached from both sides are excluded from both.
ExpandResult expand_seeds(const SynsetGraph& graph, const SeedSet& seeds, int radius);

struct VadSeedResult {
  SeedSet seeds;
  // Graph-present lexicon words with their raw field values, file order.
  std::vector<std::pair<std::string, double>> regression;
};

// Thresholded seed words from a VAD lexicon: positive = value >= hi,
// negative = value <= lo, both restricted to words known to the graph.
VadSeedResult vad_seed_sets(const VadLexicon& lexicon, const SynsetGraph& graph,
                            double hi, double lo, VadField field = VadField::Arousal);

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

// Deterministic shuffle by rng_seed, then contiguous split. Fractions must
// sum to 1.
SplitResult split_lexicon(const VadLexicon& lexicon, const std::array<double, 3>& fractions,
                          uint64_t rng_seed);

// Labeled training material for one radius.
struct LabeledSet {
  int radius = 0;
  std::vector<uint32_t> binary_pos;  // synset indices, sorted
  std::vector<uint32_t> binary_neg;
  std::vector<std::pair<uint32_t, double>> regression;  // synset index -> target
};

// Builds the radius-k training set: binary sets by seed expansion and
// regression targets by k rounds of wavefront averaging from the synsets of
// labeled words. Synsets containing an excluded (validation/test) word are
// dropped from the final sets.
LabeledSet build_labeled_set(const SynsetGraph& graph, const SeedSet& binary_seeds,
                             const std::vector<std::pair<std::string, double>>& word_targets,
                             int radius,
                             const std::unordered_set<std::string>& excluded_words);

}  // namespace blocklex
