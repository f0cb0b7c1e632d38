#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blocklex/sparse.hpp"

namespace blocklex {

// Whitespace-tokenized corpus with a dense word-id vocabulary. Ids are
// assigned in order of first occurrence, so identical input yields an
// identical corpus.
struct TokenCorpus {
  std::vector<uint32_t> tokens;                     // word ids, corpus order
  std::vector<std::string> words;                   // id -> token string
  std::unordered_map<std::string, uint32_t> vocab;  // token string -> id

  uint64_t token_count() const { return tokens.size(); }
  uint32_t vocab_size() const { return static_cast<uint32_t>(words.size()); }
  const std::string& token_at(uint64_t pos) const { return words[tokens[pos]]; }
};

TokenCorpus load_corpus(const std::string& path, bool lowercase = true,
                        uint32_t min_token_len = 1);

// Builds a corpus from in-memory tokens (already filtered/normalized).
TokenCorpus make_corpus(const std::vector<std::string>& tokens);

// Block geometry: block i covers token positions [i*stride, i*stride + b),
// with the final block clipped at the corpus tail. The stride (1-o)*b must
// be a positive integer or the spec is rejected.
struct BlockSpec {
  uint32_t block_size = 0;  // b, tokens per block
  double overlap = 0.0;     // o in [0,1)
  uint32_t stride = 0;      // (1-o)*b

  static BlockSpec make(uint32_t block_size, double overlap);
};

// Number of blocks needed to cover m tokens: the smallest n with
// (n-1)*stride + b >= m.
uint32_t block_count_for(uint64_t token_count, const BlockSpec& spec);

// Inverted index over the blocks of a corpus: each vocabulary word maps to
// the sorted set of block ids containing at least one of its occurrences.
// Immutable once built.
struct BlockIndex {
  BlockSpec spec;
  uint32_t block_count = 0;  // n
  uint64_t token_count = 0;  // m of the source corpus
  std::vector<std::string> words;
  std::unordered_map<std::string, uint32_t> vocab;
  std::vector<std::vector<uint32_t>> postings;  // word id -> sorted block ids

  // [begin, end) token positions of block i.
  std::pair<uint64_t, uint64_t> block_range(uint32_t block) const;

  // Posting list for a word, or nullptr when the word is not in the vocab.
  const std::vector<uint32_t>* find_postings(const std::string& word) const;

  void save(const std::string& path) const;
  static BlockIndex load(const std::string& path);
};

BlockIndex segment(const TokenCorpus& corpus, const BlockSpec& spec);

// Binary block-occurrence vector of dimensionality n. A word absent from the
// vocabulary yields the zero vector.
SparseVector word_vector(const BlockIndex& index, const std::string& word);

}  // namespace blocklex
