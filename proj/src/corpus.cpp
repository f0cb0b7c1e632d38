#include "blocklex/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

#include "blocklex/error.hpp"
#include "blocklex/io.hpp"

namespace blocklex {

namespace {

constexpr uint32_t kIndexMagic = 0x49584c42;  // "BLXI"
constexpr uint32_t kIndexVersion = 1;

void intern_token(TokenCorpus& corpus, const std::string& token) {
  auto [it, inserted] = corpus.vocab.try_emplace(token, corpus.vocab_size());
  if (inserted) corpus.words.push_back(token);
  corpus.tokens.push_back(it->second);
}

}  // namespace

TokenCorpus load_corpus(const std::string& path, bool lowercase, uint32_t min_token_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::data("cannot open corpus file: " + path);
  TokenCorpus corpus;
  std::string token;
  while (in >> token) {
    if (lowercase) {
      for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (token.size() < min_token_len) continue;
    intern_token(corpus, token);
  }
  if (in.bad()) Error::data("read failure on corpus file: " + path);
  if (corpus.tokens.empty()) Error::data("corpus is empty after filtering: " + path);
  return corpus;
}

TokenCorpus make_corpus(const std::vector<std::string>& tokens) {
  if (tokens.empty()) Error::data("corpus is empty");
  TokenCorpus corpus;
  for (const auto& t : tokens) intern_token(corpus, t);
  return corpus;
}

BlockSpec BlockSpec::make(uint32_t block_size, double overlap) {
  if (block_size == 0) Error::config("block size must be positive");
  if (!(overlap >= 0.0 && overlap < 1.0)) Error::config("overlap must lie in [0, 1)");
  const double stride_real = (1.0 - overlap) * static_cast<double>(block_size);
  const double rounded = std::round(stride_real);
  const double tol = 1e-9 + 1e-12 * block_size;
  if (rounded < 1.0 || std::abs(stride_real - rounded) > tol) {
    Error::config("(1-o)*b must be a positive integer; b=" + std::to_string(block_size) +
                  " o=" + io::format_double(overlap) + " gives stride " +
                  io::format_double(stride_real));
  }
  return BlockSpec{block_size, overlap, static_cast<uint32_t>(rounded)};
}

uint32_t block_count_for(uint64_t token_count, const BlockSpec& spec) {
  if (token_count == 0) Error::data("cannot segment an empty corpus");
  const uint64_t b = spec.block_size;
  const uint64_t s = spec.stride;
  const uint64_t n = token_count <= b ? 1 : 1 + (token_count - b + s - 1) / s;
  if (n > std::numeric_limits<uint32_t>::max()) Error::data("block count exceeds 2^32");
  return static_cast<uint32_t>(n);
}

std::pair<uint64_t, uint64_t> BlockIndex::block_range(uint32_t block) const {
  const uint64_t begin = static_cast<uint64_t>(block) * spec.stride;
  const uint64_t end = std::min<uint64_t>(begin + spec.block_size, token_count);
  return {begin, end};
}

const std::vector<uint32_t>* BlockIndex::find_postings(const std::string& word) const {
  auto it = vocab.find(word);
  if (it == vocab.end()) return nullptr;
  return &postings[it->second];
}

BlockIndex segment(const TokenCorpus& corpus, const BlockSpec& spec) {
  const uint64_t m = corpus.token_count();
  const uint32_t n = block_count_for(m, spec);
  const uint64_t b = spec.block_size;
  const uint64_t s = spec.stride;

  BlockIndex index;
  index.spec = spec;
  index.block_count = n;
  index.token_count = m;
  index.words = corpus.words;
  index.vocab = corpus.vocab;
  index.postings.assign(corpus.vocab_size(), {});

  // Position p falls in blocks i with i*s <= p < i*s + b. Positions arrive in
  // increasing order, so each word's list stays sorted by appending only the
  // ids above its current tail.
  for (uint64_t p = 0; p < m; ++p) {
    const uint64_t lo = p >= b ? (p - b) / s + 1 : 0;
    const uint64_t hi = std::min<uint64_t>(n - 1, p / s);
    auto& list = index.postings[corpus.tokens[p]];
    uint64_t start = lo;
    if (!list.empty() && list.back() >= lo) start = static_cast<uint64_t>(list.back()) + 1;
    for (uint64_t i = start; i <= hi; ++i) list.push_back(static_cast<uint32_t>(i));
  }
  return index;
}

SparseVector word_vector(const BlockIndex& index, const std::string& word) {
  SparseVector v;
  v.dim = index.block_count;
  const auto* postings = index.find_postings(word);
  if (!postings) return v;
  v.entries.reserve(postings->size());
  for (uint32_t id : *postings) v.entries.emplace_back(id, 1.0);
  return v;
}

void BlockIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Error::data("cannot write index file: " + path);
  io::write_u32(out, kIndexMagic);
  io::write_u32(out, kIndexVersion);
  io::write_u32(out, spec.block_size);
  io::write_f64(out, spec.overlap);
  io::write_u32(out, spec.stride);
  io::write_u32(out, block_count);
  io::write_u32(out, static_cast<uint32_t>(words.size()));
  io::write_u64(out, token_count);
  for (const auto& w : words) io::write_string(out, w);
  for (const auto& list : postings) {
    io::write_varint(out, list.size());
    uint32_t prev = 0;
    for (uint32_t id : list) {
      io::write_varint(out, id - prev);  // first delta is the id itself
      prev = id;
    }
  }
  out.flush();
  if (!out) Error::data("write failure on index file: " + path);
}

BlockIndex BlockIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::data("cannot open index file: " + path);
  if (io::read_u32(in) != kIndexMagic) Error::data("not a block index file: " + path);
  if (io::read_u32(in) != kIndexVersion) Error::data("unsupported index version: " + path);
  BlockIndex index;
  index.spec.block_size = io::read_u32(in);
  index.spec.overlap = io::read_f64(in);
  index.spec.stride = io::read_u32(in);
  index.block_count = io::read_u32(in);
  const uint32_t vocab_size = io::read_u32(in);
  index.token_count = io::read_u64(in);
  index.words.reserve(vocab_size);
  for (uint32_t i = 0; i < vocab_size; ++i) {
    index.words.push_back(io::read_string(in));
    index.vocab.emplace(index.words.back(), i);
  }
  index.postings.resize(vocab_size);
  for (uint32_t w = 0; w < vocab_size; ++w) {
    const uint64_t count = io::read_varint(in);
    auto& list = index.postings[w];
    list.reserve(count);
    uint32_t prev = 0;
    for (uint64_t i = 0; i < count; ++i) {
      prev += static_cast<uint32_t>(io::read_varint(in));
      if (prev >= index.block_count) Error::data("corrupt posting list in " + path);
      list.push_back(prev);
    }
  }
  return index;
}

}  // namespace blocklex
