#include "blocklex/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blocklex/error.hpp"
#include "blocklex/io.hpp"

namespace blocklex {

namespace {

constexpr uint32_t kMaskMagic = 0x4d584c42;  // "BLXM"
constexpr uint32_t kMaskVersion = 1;

double entropy2(uint64_t a, uint64_t b) {
  const uint64_t n = a + b;
  if (n == 0) return 0.0;
  double h = 0.0;
  for (uint64_t c : {a, b}) {
    if (c) {
      const double p = static_cast<double>(c) / static_cast<double>(n);
      h -= p * std::log2(p);
    }
  }
  return h;
}

// grouped so that swapping the classes is bit-exact
double gini2(uint64_t a, uint64_t b) {
  const uint64_t n = a + b;
  if (n == 0) return 0.0;
  const double p = static_cast<double>(a) / static_cast<double>(n);
  const double q = static_cast<double>(b) / static_cast<double>(n);
  return 1.0 - (p * p + q * q);
}

struct PresenceCounts {
  uint64_t total_pos = 0;
  uint64_t total_neg = 0;
  std::vector<uint32_t> present_pos;  // per dimension
  std::vector<uint32_t> present_neg;
  uint32_t dim = 0;
};

PresenceCounts count_presence(const std::vector<SparseVector>& vectors,
                              const std::vector<uint8_t>& labels) {
  if (vectors.empty()) Error::data("feature scoring needs at least one example");
  if (vectors.size() != labels.size()) Error::config("vectors/labels size mismatch");
  PresenceCounts c;
  c.dim = vectors.front().dim;
  c.present_pos.assign(c.dim, 0);
  c.present_neg.assign(c.dim, 0);
  for (size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim != c.dim) Error::config("inconsistent vector dimensionality");
    if (labels[i] > 1) Error::config("labels must be 0 or 1");
    auto& present = labels[i] ? c.present_pos : c.present_neg;
    (labels[i] ? c.total_pos : c.total_neg) += 1;
    for (const auto& [d, v] : vectors[i].entries) {
      (void)v;  // any nonzero value counts as presence
      present[d] += 1;
    }
  }
  if (c.total_pos == 0 || c.total_neg == 0)
    Error::data("feature scoring needs examples of both classes");
  return c;
}

}  // namespace

SparseVector synset_vector(const BlockIndex& index, const std::vector<std::string>& words) {
  if (words.empty()) Error::config("synset has no words");
  std::vector<uint32_t> ids;
  for (const auto& w : words) {
    const auto* postings = index.find_postings(w);
    if (postings) ids.insert(ids.end(), postings->begin(), postings->end());
  }
  std::sort(ids.begin(), ids.end());
  SparseVector v;
  v.dim = index.block_count;
  const double inv = 1.0 / static_cast<double>(words.size());
  for (size_t i = 0; i < ids.size();) {
    size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    v.entries.emplace_back(ids[i], static_cast<double>(j - i) * inv);
    i = j;
  }
  return v;
}

std::vector<double> igr_scores(const std::vector<SparseVector>& vectors,
                               const std::vector<uint8_t>& labels) {
  const auto c = count_presence(vectors, labels);
  const uint64_t n = c.total_pos + c.total_neg;
  const double info_s = entropy2(c.total_pos, c.total_neg);
  std::vector<double> scores(c.dim, 0.0);
  for (uint32_t d = 0; d < c.dim; ++d) {
    const uint64_t pp = c.present_pos[d];
    const uint64_t pn = c.present_neg[d];
    const uint64_t present = pp + pn;
    const uint64_t absent = n - present;
    const double split = entropy2(present, absent);
    if (split <= 0.0) continue;  // constant feature carries no information
    const double w_present = static_cast<double>(present) / static_cast<double>(n);
    const double w_absent = static_cast<double>(absent) / static_cast<double>(n);
    const double info_v =
        w_present * entropy2(pp, pn) + w_absent * entropy2(c.total_pos - pp, c.total_neg - pn);
    const double ig = std::max(0.0, info_s - info_v);
    scores[d] = std::min(1.0, ig / split);
  }
  return scores;
}

std::vector<double> gini_scores(const std::vector<SparseVector>& vectors,
                                const std::vector<uint8_t>& labels) {
  const auto c = count_presence(vectors, labels);
  const uint64_t n = c.total_pos + c.total_neg;
  const double gini_s = gini2(c.total_pos, c.total_neg);
  std::vector<double> scores(c.dim, 0.0);
  for (uint32_t d = 0; d < c.dim; ++d) {
    const uint64_t pp = c.present_pos[d];
    const uint64_t pn = c.present_neg[d];
    const uint64_t present = pp + pn;
    const uint64_t absent = n - present;
    const double w_present = static_cast<double>(present) / static_cast<double>(n);
    const double w_absent = static_cast<double>(absent) / static_cast<double>(n);
    const double gini_v =
        w_present * gini2(pp, pn) + w_absent * gini2(c.total_pos - pp, c.total_neg - pn);
    scores[d] = std::max(0.0, gini_s - gini_v);
  }
  return scores;
}

FeatureMask select_features(const std::vector<double>& scores, FeatureMask::Method method,
                            std::optional<double> epsilon) {
  if (scores.empty()) Error::config("no feature scores given");
  double border;
  if (epsilon) {
    border = *epsilon;
  } else {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    border = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  FeatureMask mask;
  mask.method = method;
  mask.border = border;
  mask.source_dim = static_cast<uint32_t>(scores.size());
  for (uint32_t d = 0; d < scores.size(); ++d) {
    if (scores[d] >= border) {
      mask.kept.push_back(d);
      mask.scores.push_back(scores[d]);
    }
  }
  if (mask.kept.empty()) Error::data("feature selection pruned every dimension");
  return mask;
}

SparseVector apply_mask(const SparseVector& v, const FeatureMask& mask) {
  if (v.dim != mask.source_dim) Error::config("vector/mask dimensionality mismatch");
  if (mask.kept.empty()) Error::config("mask keeps no dimensions");
  SparseVector out;
  out.dim = static_cast<uint32_t>(mask.kept.size());
  size_t ei = 0;
  for (uint32_t k = 0; k < mask.kept.size() && ei < v.entries.size(); ++k) {
    while (ei < v.entries.size() && v.entries[ei].first < mask.kept[k]) ++ei;
    if (ei < v.entries.size() && v.entries[ei].first == mask.kept[k]) {
      out.entries.emplace_back(k, v.entries[ei].second);
      ++ei;
    }
  }
  return out;
}

SparseVector bow_vector(const std::vector<std::string>& gloss_tokens,
                        const std::unordered_map<std::string, uint32_t>& vocab, uint32_t dim) {
  std::vector<uint32_t> ids;
  for (const auto& t : gloss_tokens) {
    auto it = vocab.find(t);
    if (it != vocab.end()) ids.push_back(it->second);
  }
  std::sort(ids.begin(), ids.end());
  SparseVector v;
  v.dim = dim;
  for (size_t i = 0; i < ids.size();) {
    size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    v.entries.emplace_back(ids[i], static_cast<double>(j - i));
    i = j;
  }
  return v;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open embedding file: " + path);
  EmbeddingTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> vec;
    double x;
    while (ls >> x) vec.push_back(x);
    const std::string where = path + ":" + std::to_string(line_no);
    if (!ls.eof()) Error::data("malformed embedding line at " + where);
    if (vec.empty()) Error::data("embedding line with no values at " + where);
    if (table.dim == 0) table.dim = static_cast<uint32_t>(vec.size());
    if (vec.size() != table.dim) Error::data("ragged embedding dimensions at " + where);
    table.vectors.emplace(std::move(word), std::move(vec));
  }
  if (in.bad()) Error::data("read failure on embedding file: " + path);
  if (table.vectors.empty()) Error::data("embedding file has no entries: " + path);
  return table;
}

SparseVector synset_embedding(const EmbeddingTable& table, const std::vector<std::string>& words) {
  if (words.empty()) Error::config("synset has no words");
  std::vector<double> sum(table.dim, 0.0);
  for (const auto& w : words) {
    auto it = table.vectors.find(w);
    if (it == table.vectors.end()) continue;  // zero contribution, still counted
    for (uint32_t d = 0; d < table.dim; ++d) sum[d] += it->second[d];
  }
  const double inv = 1.0 / static_cast<double>(words.size());
  for (double& x : sum) x *= inv;
  return SparseVector::from_dense(sum);
}

GlossFile load_gloss_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open gloss file: " + path);
  GlossFile gloss;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    const std::string where = path + ":" + std::to_string(line_no);
    if (tab == std::string::npos) Error::data("expected `synset-id \\t tokens` at " + where);
    const std::string id = line.substr(0, tab);
    if (id.empty()) Error::data("empty synset id at " + where);
    std::istringstream ts(line.substr(tab + 1));
    std::vector<std::string> tokens;
    std::string t;
    while (ts >> t) {
      auto [it, inserted] = gloss.vocab.try_emplace(t, static_cast<uint32_t>(gloss.vocab_words.size()));
      (void)it;
      if (inserted) gloss.vocab_words.push_back(t);
      tokens.push_back(std::move(t));
    }
    if (!gloss.tokens_by_synset.emplace(id, std::move(tokens)).second)
      Error::data("duplicate gloss entry for synset '" + id + "' at " + where);
  }
  if (in.bad()) Error::data("read failure on gloss file: " + path);
  return gloss;
}

void FeatureMask::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Error::data("cannot write mask file: " + path);
  out << "method\t" << (method == Method::Igr ? "igr" : "gini") << "\n";
  out << "border\t" << io::format_double(border) << "\n";
  out << "source_dim\t" << source_dim << "\n";
  out << "kept\t" << kept.size() << "\n";
  out << "index\tscore\n";
  for (size_t i = 0; i < kept.size(); ++i) {
    out << kept[i] << "\t" << io::format_double(scores[i]) << "\n";
  }
  if (!out) Error::data("write failure on mask file: " + path);
}

FeatureMask FeatureMask::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open mask file: " + path);
  FeatureMask mask;
  std::string line;
  auto next_kv = [&](const char* key) {
    if (!std::getline(in, line)) Error::data("truncated mask file: " + path);
    const size_t tab = line.find('\t');
    if (tab == std::string::npos || line.substr(0, tab) != key)
      Error::data("expected '" + std::string(key) + "' in mask file: " + path);
    return line.substr(tab + 1);
  };
  const std::string method = next_kv("method");
  if (method == "igr") mask.method = Method::Igr;
  else if (method == "gini") mask.method = Method::Gini;
  else Error::data("unknown mask method '" + method + "' in " + path);
  mask.border = std::stod(next_kv("border"));
  mask.source_dim = static_cast<uint32_t>(std::stoul(next_kv("source_dim")));
  const size_t count = std::stoul(next_kv("kept"));
  if (!std::getline(in, line) || line != "index\tscore")
    Error::data("missing column header in mask file: " + path);
  uint32_t prev = 0;
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) Error::data("truncated mask file: " + path);
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) Error::data("malformed mask row in " + path);
    const uint32_t index = static_cast<uint32_t>(std::stoul(line.substr(0, tab)));
    if (index >= mask.source_dim || (i > 0 && index <= prev))
      Error::data("mask indices must be strictly increasing and in range: " + path);
    prev = index;
    mask.kept.push_back(index);
    mask.scores.push_back(std::stod(line.substr(tab + 1)));
  }
  if (mask.kept.empty()) Error::data("mask keeps no dimensions: " + path);
  return mask;
}

void FeatureMask::save_bin(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Error::data("cannot write mask file: " + path);
  io::write_u32(out, kMaskMagic);
  io::write_u32(out, kMaskVersion);
  io::write_u32(out, method == Method::Igr ? 0u : 1u);
  io::write_f64(out, border);
  io::write_u32(out, source_dim);
  io::write_u64(out, kept.size());
  for (uint32_t k : kept) io::write_u32(out, k);
  for (double s : scores) io::write_f64(out, s);
  if (!out) Error::data("write failure on mask file: " + path);
}

FeatureMask FeatureMask::load_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::data("cannot open mask file: " + path);
  if (io::read_u32(in) != kMaskMagic) Error::data("not a mask file: " + path);
  if (io::read_u32(in) != kMaskVersion) Error::data("unsupported mask version: " + path);
  FeatureMask mask;
  mask.method = io::read_u32(in) == 0 ? Method::Igr : Method::Gini;
  mask.border = io::read_f64(in);
  mask.source_dim = io::read_u32(in);
  const uint64_t count = io::read_u64(in);
  mask.kept.reserve(count);
  for (uint64_t i = 0; i < count; ++i) mask.kept.push_back(io::read_u32(in));
  mask.scores.reserve(count);
  for (uint64_t i = 0; i < count; ++i) mask.scores.push_back(io::read_f64(in));
  if (mask.kept.empty()) Error::data("mask keeps no dimensions: " + path);
  return mask;
}

}  // namespace blocklex
