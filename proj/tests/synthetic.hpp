#pragma once

// Planted-cluster synthetic dataset: one word class concentrates in
// "excited" regions, the other in "calm" regions, and each word's graded
// level decides which regions of its class it may appear in. Distractor
// words fall uniformly everywhere. The corpus, synset graph (singleton
// synsets plus value-adjacent synonym chains), and graded lexicon together
// give the pipeline a recoverable ranking signal.

#include <string>
#include <utility>
#include <vector>

#include "blocklex/rng.hpp"

namespace synthetic {

struct Spec {
  uint64_t corpus_tokens = 200000;
  uint32_t region_len = 120;     // matches the block size under test
  int words_per_class = 50;
  int distractor_words = 400;
  double planted_fraction = 0.5;  // chance a token is a class word
  double window = 0.04;           // level tolerance for word/region matching
  int chain_len = 5;              // synonym-chain group size
  uint64_t seed = 20240501;
};

struct Data {
  std::string corpus_text;
  std::string graph_text;
  std::string lexicon_tsv;
  std::vector<std::pair<std::string, double>> word_levels;  // all labeled words
};

inline Data generate(const Spec& spec) {
  blocklex::Rng rng(spec.seed);
  Data data;

  struct Word {
    std::string name;
    double level;
  };
  std::vector<Word> hot, cool;
  for (int i = 0; i < spec.words_per_class; ++i) {
    hot.push_back({"hot" + std::to_string(i), 0.72 + 0.0055 * i});
    cool.push_back({"cool" + std::to_string(i), 0.01 + 0.0055 * i});
  }
  std::vector<std::string> distractors;
  for (int i = 0; i < spec.distractor_words; ++i)
    distractors.push_back("filler" + std::to_string(i));

  for (const auto& w : hot) data.word_levels.emplace_back(w.name, w.level);
  for (const auto& w : cool) data.word_levels.emplace_back(w.name, w.level);

  // corpus: regions of region_len tokens, each pinned to one class and a
  // level within that class's range
  const auto level_range = [&](const std::vector<Word>& cls) {
    return std::pair<double, double>{cls.front().level, cls.back().level};
  };
  std::string& corpus = data.corpus_text;
  corpus.reserve(spec.corpus_tokens * 8);
  uint64_t written = 0;
  while (written < spec.corpus_tokens) {
    const bool is_hot = rng.below(2) == 0;
    const auto& cls = is_hot ? hot : cool;
    const auto [lo, hi] = level_range(cls);
    const double level = rng.uniform(lo, hi);
    std::vector<const Word*> pool;
    for (const auto& w : cls) {
      if (std::abs(w.level - level) <= spec.window) pool.push_back(&w);
    }
    for (uint32_t t = 0; t < spec.region_len && written < spec.corpus_tokens; ++t) {
      const bool planted = !pool.empty() && rng.uniform01() < spec.planted_fraction;
      const std::string& token =
          planted ? pool[rng.below(pool.size())]->name : distractors[rng.below(distractors.size())];
      corpus += token;
      corpus += written + 1 < spec.corpus_tokens ? ' ' : '\n';
      ++written;
    }
  }

  // graph: singleton synsets; synonym chains link value-adjacent words in
  // groups of chain_len; the same links double as gloss edges (both
  // directions) so the random walk smooths along the level axis
  std::string& graph = data.graph_text;
  const auto add_class = [&](const std::vector<Word>& cls) {
    for (const auto& w : cls) graph += "S syn_" + w.name + " n " + w.name + "\n";
    for (size_t i = 0; i + 1 < cls.size(); ++i) {
      if ((i + 1) % spec.chain_len == 0) continue;  // chain break
      graph += "E syn syn_" + cls[i].name + " syn_" + cls[i + 1].name + "\n";
      graph += "E gloss syn_" + cls[i].name + " syn_" + cls[i + 1].name + "\n";
      graph += "E gloss syn_" + cls[i + 1].name + " syn_" + cls[i].name + "\n";
    }
  };
  add_class(hot);
  add_class(cool);
  for (const auto& d : distractors) graph += "S syn_" + d + " n " + d + "\n";

  // lexicon: the planted words with their graded levels on the arousal axis
  std::string& lex = data.lexicon_tsv;
  lex = "word\tvalence\tarousal\tdominance\n";
  for (const auto& [word, level] : data.word_levels) {
    lex += word + "\t0.5\t" + std::to_string(level) + "\t0.5\n";
  }
  return data;
}

}  // namespace synthetic
