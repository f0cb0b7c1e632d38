#include "blocklex/lexnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blocklex/error.hpp"
#include "blocklex/rng.hpp"

namespace blocklex {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream in(line);
  std::string p;
  while (in >> p) parts.push_back(std::move(p));
  return parts;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= s.size()) {
    size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) parts.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return parts;
}

void add_unique(std::vector<uint32_t>& adj, uint32_t v) {
  if (std::find(adj.begin(), adj.end(), v) == adj.end()) adj.push_back(v);
}

double parse_level(const std::string& s, const std::string& context) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    Error::data("invalid number '" + s + "' in " + context);
  }
  if (pos != s.size()) Error::data("invalid number '" + s + "' in " + context);
  if (!(v >= 0.0 && v <= 1.0)) Error::data("value out of [0,1] in " + context + ": " + s);
  return v;
}

}  // namespace

const std::vector<uint32_t>* SynsetGraph::synsets_of(const std::string& word) const {
  auto it = word_to_synsets.find(word);
  if (it == word_to_synsets.end()) return nullptr;
  return &it->second;
}

SynsetGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open graph file: " + path);

  SynsetGraph graph;
  struct PendingEdge {
    bool gloss;
    std::string a, b;
    size_t line_no;
  };
  std::vector<PendingEdge> edges;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto parts = split_ws(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (parts[0] == "S") {
      if (parts.size() != 4) Error::data("malformed synset record at " + where);
      const std::string& id = parts[1];
      if (graph.id_to_index.count(id)) Error::data("duplicate synset id '" + id + "' at " + where);
      Synset s;
      s.id = id;
      s.pos = parts[2];
      for (auto& w : split_commas(parts[3])) {
        if (std::find(s.words.begin(), s.words.end(), w) == s.words.end()) s.words.push_back(w);
      }
      if (s.words.empty()) Error::data("synset '" + id + "' has no words at " + where);
      graph.id_to_index.emplace(id, graph.size());
      graph.synsets.push_back(std::move(s));
    } else if (parts[0] == "E") {
      if (parts.size() != 4 || (parts[1] != "syn" && parts[1] != "gloss"))
        Error::data("malformed edge record at " + where);
      edges.push_back({parts[1] == "gloss", parts[2], parts[3], line_no});
    } else {
      Error::data("unknown record type '" + parts[0] + "' at " + where);
    }
  }
  if (in.bad()) Error::data("read failure on graph file: " + path);

  graph.syn_adj.resize(graph.size());
  graph.gloss_in.resize(graph.size());
  for (const auto& e : edges) {
    auto ai = graph.id_to_index.find(e.a);
    auto bi = graph.id_to_index.find(e.b);
    if (ai == graph.id_to_index.end() || bi == graph.id_to_index.end()) {
      Error::data("edge endpoint not a known synset at " + path + ":" + std::to_string(e.line_no));
    }
    if (e.gloss) {
      add_unique(graph.gloss_in[bi->second], ai->second);  // (a -> b): a feeds b
    } else {
      add_unique(graph.syn_adj[ai->second], bi->second);
      add_unique(graph.syn_adj[bi->second], ai->second);
    }
  }

  for (uint32_t i = 0; i < graph.size(); ++i) {
    for (const auto& w : graph.synsets[i].words) graph.word_to_synsets[w].push_back(i);
  }
  return graph;
}

SeedSet make_seed_set(std::vector<std::string> positive, std::vector<std::string> negative) {
  auto dedupe = [](std::vector<std::string>& v) {
    std::vector<std::string> out;
    for (auto& w : v) {
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(std::move(w));
    }
    v = std::move(out);
  };
  dedupe(positive);
  dedupe(negative);
  for (const auto& w : positive) {
    if (std::find(negative.begin(), negative.end(), w) != negative.end())
      Error::config("seed word '" + w + "' appears in both classes");
  }
  return SeedSet{std::move(positive), std::move(negative)};
}

VadLexicon VadLexicon::restricted_to(const std::unordered_set<std::string>& keep) const {
  VadLexicon out;
  for (const auto& w : words) {
    if (keep.count(w)) {
      out.words.push_back(w);
      out.entries.emplace(w, entries.at(w));
    }
  }
  return out;
}

VadLexicon load_vad_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open lexicon file: " + path);
  VadLexicon lex;
  std::string line;
  size_t line_no = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_skipped) {
      header_skipped = true;  // one header line per the format
      continue;
    }
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (cols.size() != 4) Error::data("expected 4 tab-separated columns at " + where);
    if (cols[0].empty()) Error::data("empty word at " + where);
    VadLexicon::Vad vad;
    vad.valence = parse_level(cols[1], where);
    vad.arousal = parse_level(cols[2], where);
    vad.dominance = parse_level(cols[3], where);
    auto [it, inserted] = lex.entries.emplace(cols[0], vad);
    (void)it;
    if (!inserted) Error::data("duplicate lexicon word '" + cols[0] + "' at " + where);
    lex.words.push_back(cols[0]);
  }
  if (in.bad()) Error::data("read failure on lexicon file: " + path);
  if (lex.words.empty()) Error::data("lexicon has no entries: " + path);
  return lex;
}

namespace {

// Level-synchronous BFS over synonym edges, up to `radius` hops from the
// synsets containing seed words. Returns the visited set (sorted).
std::vector<uint32_t> bfs_from_words(const SynsetGraph& graph,
                                     const std::vector<std::string>& seed_words, int radius,
                                     std::vector<std::string>* unmatched) {
  std::vector<char> seen(graph.size(), 0);
  std::vector<uint32_t> frontier;
  for (const auto& w : seed_words) {
    const auto* ids = graph.synsets_of(w);
    if (!ids) {
      if (unmatched) unmatched->push_back(w);
      continue;
    }
    for (uint32_t i : *ids) {
      if (!seen[i]) {
        seen[i] = 1;
        frontier.push_back(i);
      }
    }
  }
  std::vector<uint32_t> visited = frontier;
  for (int hop = 0; hop < radius && !frontier.empty(); ++hop) {
    std::vector<uint32_t> next;
    for (uint32_t i : frontier) {
      for (uint32_t j : graph.syn_adj[i]) {
        if (!seen[j]) {
          seen[j] = 1;
          next.push_back(j);
          visited.push_back(j);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(visited.begin(), visited.end());
  return visited;
}

}  // namespace

ExpandResult expand_seeds(const SynsetGraph& graph, const SeedSet& seeds, int radius) {
  if (radius < 0) Error::config("radius must be >= 0");
  ExpandResult result;
  auto pos = bfs_from_words(graph, seeds.positive, radius, &result.unmatched_seeds);
  auto neg = bfs_from_words(graph, seeds.negative, radius, &result.unmatched_seeds);
  // conflict exclusion: synsets reached from both sides carry no label
  std::vector<uint32_t> both;
  std::set_intersection(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(both));
  std::set_difference(pos.begin(), pos.end(), both.begin(), both.end(),
                      std::back_inserter(result.positive));
  std::set_difference(neg.begin(), neg.end(), both.begin(), both.end(),
                      std::back_inserter(result.negative));
  return result;
}

VadSeedResult vad_seed_sets(const VadLexicon& lexicon, const SynsetGraph& graph, double hi,
                            double lo, VadField field) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) Error::config("thresholds must satisfy 0 <= lo < hi <= 1");
  auto value_of = [&](const VadLexicon::Vad& v) {
    switch (field) {
      case VadField::Valence: return v.valence;
      case VadField::Arousal: return v.arousal;
      case VadField::Dominance: return v.dominance;
    }
    return v.arousal;
  };
  VadSeedResult result;
  std::vector<std::string> positive, negative;
  for (const auto& w : lexicon.words) {
    if (!graph.synsets_of(w)) continue;
    const double v = value_of(lexicon.entries.at(w));
    result.regression.emplace_back(w, v);
    if (v >= hi) positive.push_back(w);
    else if (v <= lo) negative.push_back(w);
  }
  if (positive.empty()) Error::data("no positive seed words (threshold hi or lexicon/graph overlap too small)");
  if (negative.empty()) Error::data("no negative seed words (threshold lo or lexicon/graph overlap too small)");
  result.seeds = make_seed_set(std::move(positive), std::move(negative));
  return result;
}

SplitResult split_lexicon(const VadLexicon& lexicon, const std::array<double, 3>& fractions,
                          uint64_t rng_seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) Error::config("split fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) Error::config("split fractions must sum to 1");

  std::vector<std::string> order = lexicon.words;
  Rng rng(rng_seed);
  rng.shuffle(order);

  const size_t n = order.size();
  size_t n_train = static_cast<size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  size_t n_val = static_cast<size_t>(std::llround(fractions[1] * static_cast<double>(n)));
  if (n_train > n) n_train = n;
  if (n_train + n_val > n) n_val = n - n_train;

  SplitResult split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

LabeledSet build_labeled_set(const SynsetGraph& graph, const SeedSet& binary_seeds,
                             const std::vector<std::pair<std::string, double>>& word_targets,
                             int radius, const std::unordered_set<std::string>& excluded_words) {
  LabeledSet out;
  out.radius = radius;

  auto contains_excluded = [&](uint32_t synset) {
    for (const auto& w : graph.synsets[synset].words) {
      if (excluded_words.count(w)) return true;
    }
    return false;
  };

  auto expanded = expand_seeds(graph, binary_seeds, radius);
  for (uint32_t i : expanded.positive) {
    if (!contains_excluded(i)) out.binary_pos.push_back(i);
  }
  for (uint32_t i : expanded.negative) {
    if (!contains_excluded(i)) out.binary_neg.push_back(i);
  }

  if (!word_targets.empty()) {
    // Base values: mean target of the labeled words each synset lists.
    std::vector<double> value(graph.size(), 0.0);
    std::vector<uint32_t> count(graph.size(), 0);
    std::vector<char> labeled(graph.size(), 0);
    for (const auto& [word, target] : word_targets) {
      const auto* ids = graph.synsets_of(word);
      if (!ids) continue;
      for (uint32_t i : *ids) {
        value[i] += target;
        count[i] += 1;
      }
    }
    std::vector<uint32_t> frontier;
    for (uint32_t i = 0; i < graph.size(); ++i) {
      if (count[i]) {
        value[i] /= count[i];
        labeled[i] = 1;
        frontier.push_back(i);
      }
    }
    // Wavefront expansion: each round labels the unlabeled neighbors of the
    // current frontier with the mean of their labeled neighbors' values.
    for (int hop = 0; hop < radius && !frontier.empty(); ++hop) {
      std::vector<uint32_t> next;
      std::vector<double> acc(graph.size(), 0.0);
      std::vector<uint32_t> acc_n(graph.size(), 0);
      for (uint32_t i : frontier) {
        for (uint32_t j : graph.syn_adj[i]) {
          if (!labeled[j]) {
            if (acc_n[j] == 0) next.push_back(j);
            acc[j] += value[i];
            acc_n[j] += 1;
          }
        }
      }
      for (uint32_t j : next) {
        value[j] = acc[j] / acc_n[j];
        labeled[j] = 1;
      }
      frontier = std::move(next);
    }
    for (uint32_t i = 0; i < graph.size(); ++i) {
      if (labeled[i] && !contains_excluded(i)) out.regression.emplace_back(i, value[i]);
    }
  }
  return out;
}

}  // namespace blocklex
