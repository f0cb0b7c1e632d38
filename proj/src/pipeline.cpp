#include "blocklex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "blocklex/error.hpp"
#include "blocklex/io.hpp"
#include "blocklex/propagate.hpp"
#include "blocklex/rankeval.hpp"
#include "blocklex/vectors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace blocklex {

namespace {

constexpr uint32_t kVectorsMagic = 0x56584c42;  // "BLXV"
constexpr uint32_t kVectorsVersion = 1;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

std::string source_name(VectorSource s) {
  switch (s) {
    case VectorSource::BlockSegmentation: return "bseg";
    case VectorSource::GlossBow: return "bow";
    case VectorSource::Embeddings: return "embeddings";
  }
  return "bseg";
}

std::string selection_label(const SelectionConfig& s) {
  switch (s.method) {
    case SelectionMethod::None: return "none";
    case SelectionMethod::Igr:
      return s.median ? "igr(median)" : "igr(" + io::format_double(s.epsilon) + ")";
    case SelectionMethod::Gini:
      return s.median ? "gini(median)" : "gini(" + io::format_double(s.epsilon) + ")";
  }
  return "none";
}

std::vector<double> default_alpha_grid() {
  std::vector<double> alphas;
  for (int i = 0; i <= 10; ++i) alphas.push_back(static_cast<double>(i) / 10.0);
  return alphas;
}

// Tracks consumed keys so typos in configs fail loudly.
class JsonReader {
 public:
  JsonReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) Error::config(where_ + " must be a JSON object");
  }
  ~JsonReader() = default;

  const json* get(const char* key) {
    consumed_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!consumed_.count(it.key()))
        Error::config("unknown key '" + it.key() + "' in " + where_);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::unordered_set<std::string> consumed_;
};

template <typename T>
T get_number(const json& j, const char* key) {
  if (!j.is_number()) Error::config(std::string("'") + key + "' must be a number");
  return j.get<T>();
}

std::string get_string(const json& j, const char* key) {
  if (!j.is_string()) Error::config(std::string("'") + key + "' must be a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const char* key) {
  if (!j.is_boolean()) Error::config(std::string("'") + key + "' must be a boolean");
  return j.get<bool>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    Error::config(std::string("config is not valid JSON: ") + e.what());
  }
  JsonReader r(root, "config");
  RunConfig cfg;

  if (const auto* v = r.get("corpus")) cfg.corpus_path = get_string(*v, "corpus");
  if (const auto* v = r.get("graph")) cfg.graph_path = get_string(*v, "graph");
  if (const auto* v = r.get("lexicon")) cfg.lexicon_path = get_string(*v, "lexicon");
  if (const auto* v = r.get("gloss")) cfg.gloss_path = get_string(*v, "gloss");
  if (const auto* v = r.get("embeddings")) cfg.embeddings_path = get_string(*v, "embeddings");
  if (const auto* v = r.get("gold_test")) cfg.gold_test_path = get_string(*v, "gold_test");
  if (const auto* v = r.get("gold_val")) cfg.gold_val_path = get_string(*v, "gold_val");

  if (const auto* v = r.get("axis")) cfg.axis = axis_from_name(get_string(*v, "axis"));
  if (const auto* v = r.get("task")) {
    const std::string t = get_string(*v, "task");
    if (t == "classification") cfg.task = Task::Classification;
    else if (t == "regression") cfg.task = Task::Regression;
    else Error::config("task must be 'classification' or 'regression'");
  }
  if (const auto* v = r.get("source")) {
    const std::string s = get_string(*v, "source");
    if (s == "bseg") cfg.source = VectorSource::BlockSegmentation;
    else if (s == "bow") cfg.source = VectorSource::GlossBow;
    else if (s == "embeddings") cfg.source = VectorSource::Embeddings;
    else Error::config("source must be 'bseg', 'bow', or 'embeddings'");
  }
  if (const auto* v = r.get("block_sizes")) {
    if (!v->is_array()) Error::config("'block_sizes' must be an array");
    cfg.block_sizes.clear();
    for (const auto& x : *v) cfg.block_sizes.push_back(get_number<uint32_t>(x, "block_sizes"));
  }
  if (const auto* v = r.get("overlaps")) {
    if (!v->is_array()) Error::config("'overlaps' must be an array");
    cfg.overlaps.clear();
    for (const auto& x : *v) cfg.overlaps.push_back(get_number<double>(x, "overlaps"));
  }
  if (const auto* v = r.get("selection")) {
    JsonReader sr(*v, "selection");
    if (const auto* m = sr.get("method")) {
      const std::string name = get_string(*m, "method");
      if (name == "igr") cfg.selection.method = SelectionMethod::Igr;
      else if (name == "gini") cfg.selection.method = SelectionMethod::Gini;
      else if (name == "none") cfg.selection.method = SelectionMethod::None;
      else Error::config("selection method must be 'igr', 'gini', or 'none'");
    }
    if (const auto* b = sr.get("border")) {
      if (b->is_string()) {
        if (b->get<std::string>() != "median")
          Error::config("selection border must be a number or 'median'");
        cfg.selection.median = true;
      } else {
        cfg.selection.median = false;
        cfg.selection.epsilon = get_number<double>(*b, "border");
      }
    }
    sr.finish();
  }
  if (const auto* v = r.get("models")) {
    const std::string m = get_string(*v, "models");
    if (m == "nn") cfg.models = ModelFamily::Nn;
    else if (m == "rocchio+svm") cfg.models = ModelFamily::RocchioSvm;
    else Error::config("models must be 'nn' or 'rocchio+svm'");
  }
  if (const auto* v = r.get("radii")) {
    if (!v->is_array()) Error::config("'radii' must be an array");
    cfg.radii.clear();
    for (const auto& x : *v) cfg.radii.push_back(get_number<int>(x, "radii"));
  }
  if (const auto* v = r.get("walk")) {
    JsonReader wr(*v, "walk");
    cfg.walk.enabled = true;
    if (const auto* s = wr.get("sweep")) cfg.walk.sweep = get_bool(*s, "sweep");
    if (const auto* a = wr.get("alpha")) cfg.walk.alpha = get_number<double>(*a, "alpha");
    if (const auto* as = wr.get("alphas")) {
      if (!as->is_array()) Error::config("'alphas' must be an array");
      cfg.walk.alphas.clear();
      for (const auto& x : *as) cfg.walk.alphas.push_back(get_number<double>(x, "alphas"));
    }
    if (const auto* mi = wr.get("max_iters")) cfg.walk.max_iters = get_number<uint32_t>(*mi, "max_iters");
    if (const auto* t = wr.get("tol")) cfg.walk.tol = get_number<double>(*t, "tol");
    wr.finish();
  }
  if (const auto* v = r.get("split")) {
    JsonReader sr(*v, "split");
    if (const auto* x = sr.get("train")) cfg.split.train = get_number<double>(*x, "train");
    if (const auto* x = sr.get("val")) cfg.split.val = get_number<double>(*x, "val");
    if (const auto* x = sr.get("test")) cfg.split.test = get_number<double>(*x, "test");
    if (const auto* x = sr.get("seed")) cfg.split.seed = get_number<uint64_t>(*x, "seed");
    sr.finish();
  }
  if (const auto* v = r.get("vad_thresholds")) {
    JsonReader tr(*v, "vad_thresholds");
    if (const auto* x = tr.get("hi")) cfg.vad_hi = get_number<double>(*x, "hi");
    if (const auto* x = tr.get("lo")) cfg.vad_lo = get_number<double>(*x, "lo");
    tr.finish();
  }
  if (const auto* v = r.get("seeds")) {
    JsonReader sr(*v, "seeds");
    auto read_list = [](const json& arr, const char* key) {
      if (!arr.is_array()) Error::config(std::string("'") + key + "' must be an array");
      std::vector<std::string> words;
      for (const auto& x : arr) words.push_back(get_string(x, key));
      return words;
    };
    if (const auto* p = sr.get("positive")) cfg.positive_seeds = read_list(*p, "positive");
    if (const auto* n = sr.get("negative")) cfg.negative_seeds = read_list(*n, "negative");
    sr.finish();
  }
  if (const auto* v = r.get("nn")) {
    JsonReader nr(*v, "nn");
    if (const auto* h = nr.get("hidden")) {
      if (!h->is_array()) Error::config("'hidden' must be an array");
      cfg.nn.hidden.clear();
      for (const auto& x : *h) cfg.nn.hidden.push_back(get_number<uint32_t>(x, "hidden"));
    }
    if (const auto* e = nr.get("epochs")) cfg.nn.epochs = get_number<uint32_t>(*e, "epochs");
    if (const auto* b = nr.get("batch_size")) cfg.nn.batch_size = get_number<uint32_t>(*b, "batch_size");
    if (const auto* s = nr.get("seed")) cfg.nn.seed = get_number<uint64_t>(*s, "seed");
    if (const auto* w = nr.get("class_weights")) cfg.nn.class_weights = get_bool(*w, "class_weights");
    if (const auto* a = nr.get("adam")) {
      JsonReader ar(*a, "adam");
      if (const auto* x = ar.get("step")) cfg.nn.adam.step = get_number<double>(*x, "step");
      if (const auto* x = ar.get("beta1")) cfg.nn.adam.beta1 = get_number<double>(*x, "beta1");
      if (const auto* x = ar.get("beta2")) cfg.nn.adam.beta2 = get_number<double>(*x, "beta2");
      if (const auto* x = ar.get("eps")) cfg.nn.adam.eps = get_number<double>(*x, "eps");
      ar.finish();
    }
    nr.finish();
  }
  if (const auto* v = r.get("svm")) {
    JsonReader sr(*v, "svm");
    if (const auto* l = sr.get("lambda")) cfg.svm.lambda = get_number<double>(*l, "lambda");
    if (const auto* e = sr.get("epochs")) cfg.svm.epochs = get_number<uint32_t>(*e, "epochs");
    if (const auto* s = sr.get("seed")) cfg.svm.seed = get_number<uint64_t>(*s, "seed");
    sr.finish();
  }
  if (const auto* v = r.get("lowercase")) cfg.lowercase = get_bool(*v, "lowercase");
  if (const auto* v = r.get("min_token_len")) cfg.min_token_len = get_number<uint32_t>(*v, "min_token_len");
  if (const auto* v = r.get("tau_p")) cfg.tau_param = get_number<double>(*v, "tau_p");
  if (const auto* v = r.get("output_dir")) cfg.output_dir = get_string(*v, "output_dir");
  if (const auto* v = r.get("cache_dir")) cfg.cache_dir = get_string(*v, "cache_dir");
  if (const auto* v = r.get("jobs")) cfg.jobs = get_number<uint32_t>(*v, "jobs");
  r.finish();
  return cfg;
}

namespace {

json config_to_json_obj(const RunConfig& cfg) {
  json j;
  j["corpus"] = cfg.corpus_path;
  j["graph"] = cfg.graph_path;
  j["lexicon"] = cfg.lexicon_path;
  j["gloss"] = cfg.gloss_path;
  j["embeddings"] = cfg.embeddings_path;
  j["gold_test"] = cfg.gold_test_path;
  j["gold_val"] = cfg.gold_val_path;
  j["axis"] = std::string(axis_name(cfg.axis));
  j["task"] = cfg.task == Task::Classification ? "classification" : "regression";
  j["source"] = source_name(cfg.source);
  j["block_sizes"] = cfg.block_sizes;
  j["overlaps"] = cfg.overlaps;
  j["selection"] = {
      {"method", cfg.selection.method == SelectionMethod::None
                     ? "none"
                     : (cfg.selection.method == SelectionMethod::Igr ? "igr" : "gini")}};
  if (cfg.selection.method != SelectionMethod::None) {
    if (cfg.selection.median) j["selection"]["border"] = "median";
    else j["selection"]["border"] = cfg.selection.epsilon;
  }
  j["models"] = cfg.models == ModelFamily::Nn ? "nn" : "rocchio+svm";
  j["radii"] = cfg.radii;
  if (cfg.walk.enabled) {
    json w;
    if (cfg.walk.sweep) {
      w["sweep"] = true;
      w["alphas"] = cfg.walk.alphas.empty() ? default_alpha_grid() : cfg.walk.alphas;
    } else {
      w["alpha"] = cfg.walk.alpha;
    }
    w["max_iters"] = cfg.walk.max_iters;
    w["tol"] = cfg.walk.tol;
    j["walk"] = w;
  } else {
    j["walk"] = nullptr;
  }
  j["split"] = {{"train", cfg.split.train},
                {"val", cfg.split.val},
                {"test", cfg.split.test},
                {"seed", cfg.split.seed}};
  j["vad_thresholds"] = {{"hi", cfg.vad_hi}, {"lo", cfg.vad_lo}};
  j["seeds"] = {{"positive", cfg.positive_seeds}, {"negative", cfg.negative_seeds}};
  json nn;
  nn["hidden"] = cfg.nn.hidden;
  nn["epochs"] = cfg.nn.epochs;
  nn["batch_size"] = cfg.nn.batch_size;
  nn["seed"] = cfg.nn.seed;
  nn["class_weights"] = cfg.nn.class_weights;
  nn["adam"] = {{"step", cfg.nn.adam.step},
                {"beta1", cfg.nn.adam.beta1},
                {"beta2", cfg.nn.adam.beta2},
                {"eps", cfg.nn.adam.eps}};
  j["nn"] = nn;
  j["svm"] = {{"lambda", cfg.svm.lambda}, {"epochs", cfg.svm.epochs}, {"seed", cfg.svm.seed}};
  j["lowercase"] = cfg.lowercase;
  j["min_token_len"] = cfg.min_token_len;
  j["tau_p"] = cfg.tau_param;
  j["output_dir"] = cfg.output_dir;
  j["cache_dir"] = cfg.cache_dir;
  j["jobs"] = cfg.jobs;
  return j;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) Error::config(std::string("config requires '") + what + "'");
  if (!fs::exists(path)) Error::config(std::string(what) + " path does not exist: " + path);
}

}  // namespace

std::string run_config_to_json(const RunConfig& cfg) { return config_to_json_obj(cfg).dump(2); }

void RunConfig::validate() const {
  require_file(graph_path, "graph");
  switch (source) {
    case VectorSource::BlockSegmentation:
      require_file(corpus_path, "corpus");
      if (block_sizes.empty() || overlaps.empty())
        Error::config("block_sizes and overlaps must be non-empty");
      for (uint32_t b : block_sizes)
        for (double o : overlaps) BlockSpec::make(b, o);  // rejects non-integral strides
      break;
    case VectorSource::GlossBow:
      require_file(gloss_path, "gloss");
      break;
    case VectorSource::Embeddings:
      require_file(embeddings_path, "embeddings");
      break;
  }
  if (axis == Axis::Arousal) {
    require_file(lexicon_path, "lexicon");
    const double sum = split.train + split.val + split.test;
    if (std::abs(sum - 1.0) > 1e-9) Error::config("split fractions must sum to 1");
    if (!(vad_lo >= 0.0 && vad_lo < vad_hi && vad_hi <= 1.0))
      Error::config("vad thresholds must satisfy 0 <= lo < hi <= 1");
  } else {
    if (positive_seeds.empty() || negative_seeds.empty())
      Error::config("valence axes need positive and negative seed word lists");
    require_file(gold_test_path, "gold_test");
    if (!gold_val_path.empty()) require_file(gold_val_path, "gold_val");
    if (task != Task::Classification)
      Error::config("valence axes support classification only (no numeric seed targets)");
  }
  if (models == ModelFamily::RocchioSvm && task != Task::Classification)
    Error::config("the rocchio+svm family supports classification only");
  if (radii.empty()) Error::config("radii must be non-empty");
  for (int k : radii) {
    if (k < 0) Error::config("radii must be >= 0");
  }
  if (walk.enabled) {
    WalkConfig{walk.sweep ? 0.0 : walk.alpha, walk.max_iters, walk.tol}.validate();
    for (double a : walk.alphas) {
      if (!(a >= 0.0 && a <= 1.0)) Error::config("sweep alphas must lie in [0,1]");
    }
  }
  if (!(tau_param >= 0.0 && tau_param <= 1.0)) Error::config("tau_p must lie in [0,1]");
  if (jobs < 1) Error::config("jobs must be >= 1");
  if (output_dir.empty()) Error::config("output_dir must be set");
}

Stage stage_from_name(const std::string& name) {
  if (name == "index") return Stage::Index;
  if (name == "vectors") return Stage::Vectors;
  if (name == "select") return Stage::Select;
  if (name == "train") return Stage::Train;
  if (name == "scores") return Stage::Scores;
  if (name == "walk") return Stage::Walk;
  if (name == "eval") return Stage::Eval;
  Error::config("unknown stage '" + name + "'");
}

// ---------------------------------------------------------------------------
// Artifact files
// ---------------------------------------------------------------------------

void save_vectors_file(const std::string& path, const std::vector<std::string>& ids,
                       const std::vector<SparseVector>& vectors, uint32_t dim) {
  if (ids.size() != vectors.size()) Error::config("ids/vectors size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) Error::data("cannot write vectors file: " + path);
  io::write_u32(out, kVectorsMagic);
  io::write_u32(out, kVectorsVersion);
  io::write_u32(out, dim);
  io::write_u64(out, ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    io::write_string(out, ids[i]);
    io::write_varint(out, vectors[i].nnz());
    uint32_t prev = 0;
    for (const auto& [d, v] : vectors[i].entries) {
      io::write_varint(out, d - prev);
      io::write_f64(out, v);
      prev = d;
    }
  }
  if (!out) Error::data("write failure on vectors file: " + path);
}

VectorsFile load_vectors_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::data("cannot open vectors file: " + path);
  if (io::read_u32(in) != kVectorsMagic) Error::data("not a vectors file: " + path);
  if (io::read_u32(in) != kVectorsVersion) Error::data("unsupported vectors version: " + path);
  VectorsFile vf;
  vf.dim = io::read_u32(in);
  const uint64_t count = io::read_u64(in);
  vf.ids.reserve(count);
  vf.vectors.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    vf.ids.push_back(io::read_string(in));
    SparseVector v;
    v.dim = vf.dim;
    const uint64_t nnz = io::read_varint(in);
    v.entries.reserve(nnz);
    uint32_t prev = 0;
    for (uint64_t e = 0; e < nnz; ++e) {
      prev += static_cast<uint32_t>(io::read_varint(in));
      const double value = io::read_f64(in);
      v.entries.emplace_back(prev, value);
    }
    vf.vectors.push_back(std::move(v));
  }
  return vf;
}

std::vector<std::pair<std::string, double>> load_gold_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open gold file: " + path);
  std::vector<std::pair<std::string, double>> gold;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t t1 = line.find('\t');
    if (t1 == std::string::npos)
      Error::data("expected `synset-id \\t value` at " + path + ":" + std::to_string(line_no));
    const size_t t2 = line.find('\t', t1 + 1);
    const std::string value_str =
        t2 == std::string::npos ? line.substr(t1 + 1) : line.substr(t1 + 1, t2 - t1 - 1);
    try {
      gold.emplace_back(line.substr(0, t1), std::stod(value_str));
    } catch (const std::exception&) {
      Error::data("invalid value at " + path + ":" + std::to_string(line_no));
    }
  }
  if (in.bad()) Error::data("read failure on gold file: " + path);
  if (gold.empty()) Error::data("gold file has no entries: " + path);
  return gold;
}

// ---------------------------------------------------------------------------
// Pipeline context and per-point execution
// ---------------------------------------------------------------------------

namespace {

struct Context {
  RunConfig cfg;
  fs::path cache_dir;
  fs::path runs_dir;

  std::optional<TokenCorpus> corpus;
  uint64_t corpus_key = 0;
  SynsetGraph graph;
  uint64_t graph_hash = 0;
  std::optional<VadLexicon> lexicon;
  uint64_t lexicon_hash = 0;
  std::optional<GlossFile> gloss;
  uint64_t gloss_hash = 0;
  std::optional<EmbeddingTable> embeddings;
  uint64_t embeddings_hash = 0;

  SeedSet seeds;
  std::vector<std::pair<std::string, double>> word_targets;  // train words, graph-present
  std::unordered_set<std::string> excluded_words;            // val + test words
  std::vector<std::pair<std::string, double>> gold_val;      // synset-level
  std::vector<std::pair<std::string, double>> gold_test;
};

// Synset-level gold labels from the word split: a synset belongs to the test
// gold when it lists a test word, otherwise to the validation gold when it
// lists a validation word; the label is the mean lexicon value over the
// synset's words from that split.
void build_vad_gold(Context& ctx, const SplitResult& split) {
  const auto& lex = *ctx.lexicon;
  std::unordered_set<std::string> val_words(split.val.begin(), split.val.end());
  std::unordered_set<std::string> test_words(split.test.begin(), split.test.end());
  for (const auto& synset : ctx.graph.synsets) {
    double val_sum = 0.0, test_sum = 0.0;
    uint32_t val_n = 0, test_n = 0;
    for (const auto& w : synset.words) {
      auto it = lex.entries.find(w);
      if (it == lex.entries.end()) continue;
      if (test_words.count(w)) {
        test_sum += it->second.arousal;
        ++test_n;
      } else if (val_words.count(w)) {
        val_sum += it->second.arousal;
        ++val_n;
      }
    }
    if (test_n) ctx.gold_test.emplace_back(synset.id, test_sum / test_n);
    else if (val_n) ctx.gold_val.emplace_back(synset.id, val_sum / val_n);
  }
}

Context make_context(const RunConfig& cfg) {
  Context ctx;
  ctx.cfg = cfg;

  const char* cache_env = std::getenv("BLOCKLEX_CACHE_DIR");
  ctx.cache_dir = cache_env && *cache_env          ? fs::path(cache_env)
                  : !cfg.cache_dir.empty()         ? fs::path(cfg.cache_dir)
                                                   : fs::path(cfg.output_dir) / "cache";
  ctx.runs_dir = fs::path(cfg.output_dir) / "runs";
  fs::create_directories(ctx.cache_dir);
  fs::create_directories(ctx.runs_dir);

  ctx.graph = load_graph(cfg.graph_path);
  ctx.graph_hash = io::hash_file(cfg.graph_path);

  switch (cfg.source) {
    case VectorSource::BlockSegmentation: {
      ctx.corpus = load_corpus(cfg.corpus_path, cfg.lowercase, cfg.min_token_len);
      uint64_t key = io::hash_file(cfg.corpus_path);
      key = io::fnv1a64_u64(cfg.lowercase ? 1 : 0, key);
      key = io::fnv1a64_u64(cfg.min_token_len, key);
      ctx.corpus_key = key;
      break;
    }
    case VectorSource::GlossBow:
      ctx.gloss = load_gloss_file(cfg.gloss_path);
      ctx.gloss_hash = io::hash_file(cfg.gloss_path);
      break;
    case VectorSource::Embeddings:
      ctx.embeddings = load_embeddings(cfg.embeddings_path);
      ctx.embeddings_hash = io::hash_file(cfg.embeddings_path);
      break;
  }

  if (cfg.axis == Axis::Arousal) {
    ctx.lexicon = load_vad_lexicon(cfg.lexicon_path);
    ctx.lexicon_hash = io::hash_file(cfg.lexicon_path);
    const SplitResult split = split_lexicon(
        *ctx.lexicon, {cfg.split.train, cfg.split.val, cfg.split.test}, cfg.split.seed);
    ctx.excluded_words.insert(split.val.begin(), split.val.end());
    ctx.excluded_words.insert(split.test.begin(), split.test.end());
    std::unordered_set<std::string> train_words(split.train.begin(), split.train.end());
    const VadLexicon train_lex = ctx.lexicon->restricted_to(train_words);
    if (train_lex.words.empty()) Error::data("training split is empty");
    VadSeedResult vad = vad_seed_sets(train_lex, ctx.graph, cfg.vad_hi, cfg.vad_lo);
    ctx.seeds = std::move(vad.seeds);
    ctx.word_targets = std::move(vad.regression);
    build_vad_gold(ctx, split);
    if (ctx.gold_test.empty()) Error::data("test split yields no gold-labeled synsets");
  } else {
    ctx.seeds = make_seed_set(cfg.positive_seeds, cfg.negative_seeds);
    ctx.gold_test = load_gold_tsv(cfg.gold_test_path);
    if (!cfg.gold_val_path.empty()) ctx.gold_val = load_gold_tsv(cfg.gold_val_path);
  }
  return ctx;
}

struct StageLog {
  std::vector<std::string> lines;
  void built(const std::string& what) { lines.push_back("built   " + what); }
  void cached(const std::string& what) { lines.push_back("cached  " + what); }
  void save(const fs::path& path) const {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
  }
};

template <typename F>
auto stage_guard(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage ") + stage + ": " + e.what());
  }
}

uint64_t point_key(const Context& ctx, uint32_t b, double o) {
  json j = config_to_json_obj(ctx.cfg);
  j.erase("output_dir");
  j.erase("cache_dir");
  j.erase("jobs");
  j["block_sizes"] = json::array({b});
  j["overlaps"] = json::array({o});
  j["input_hashes"] = {io::hex64(ctx.corpus_key), io::hex64(ctx.graph_hash),
                       io::hex64(ctx.lexicon_hash), io::hex64(ctx.gloss_hash),
                       io::hex64(ctx.embeddings_hash)};
  return io::fnv1a64(j.dump());
}

fs::path index_cache_path(const Context& ctx, uint32_t b, double o) {
  uint64_t key = io::fnv1a64_u64(b, ctx.corpus_key);
  uint64_t o_bits;
  std::memcpy(&o_bits, &o, sizeof(o_bits));
  key = io::fnv1a64_u64(o_bits, key);
  return ctx.cache_dir / ("index-" + io::hex64(key) + ".blxi");
}

fs::path vectors_cache_path(const Context& ctx, uint32_t b, double o) {
  uint64_t key = ctx.graph_hash;
  switch (ctx.cfg.source) {
    case VectorSource::BlockSegmentation: {
      key = io::fnv1a64_u64(io::fnv1a64_u64(b, ctx.corpus_key), key);
      uint64_t o_bits;
      std::memcpy(&o_bits, &o, sizeof(o_bits));
      key = io::fnv1a64_u64(o_bits, key);
      break;
    }
    case VectorSource::GlossBow:
      key = io::fnv1a64_u64(ctx.gloss_hash, key);
      break;
    case VectorSource::Embeddings:
      key = io::fnv1a64_u64(ctx.embeddings_hash, key);
      break;
  }
  return ctx.cache_dir / ("vectors-" + io::hex64(key) + ".blxv");
}

// Ensures the on-disk block index exists; loads it only when needed.
void ensure_index(const Context& ctx, uint32_t b, double o, StageLog& log) {
  const fs::path path = index_cache_path(ctx, b, o);
  if (fs::exists(path)) {
    log.cached(path.filename().string());
    return;
  }
  const BlockSpec spec = BlockSpec::make(b, o);
  const BlockIndex index = segment(*ctx.corpus, spec);
  index.save(path.string());
  log.built(path.filename().string());
}

VectorsFile point_vectors(const Context& ctx, uint32_t b, double o, StageLog& log) {
  const fs::path path = vectors_cache_path(ctx, b, o);
  if (fs::exists(path)) {
    log.cached(path.filename().string());
    return load_vectors_file(path.string());
  }
  VectorsFile vf;
  vf.ids.reserve(ctx.graph.size());
  for (const auto& s : ctx.graph.synsets) vf.ids.push_back(s.id);
  vf.vectors.reserve(ctx.graph.size());
  switch (ctx.cfg.source) {
    case VectorSource::BlockSegmentation: {
      ensure_index(ctx, b, o, log);
      const BlockIndex index = BlockIndex::load(index_cache_path(ctx, b, o).string());
      vf.dim = index.block_count;
      for (const auto& s : ctx.graph.synsets) vf.vectors.push_back(synset_vector(index, s.words));
      break;
    }
    case VectorSource::GlossBow: {
      const auto& gloss = *ctx.gloss;
      vf.dim = static_cast<uint32_t>(gloss.vocab_words.size());
      static const std::vector<std::string> kEmpty;
      for (const auto& s : ctx.graph.synsets) {
        auto it = gloss.tokens_by_synset.find(s.id);
        vf.vectors.push_back(
            bow_vector(it == gloss.tokens_by_synset.end() ? kEmpty : it->second, gloss.vocab, vf.dim));
      }
      break;
    }
    case VectorSource::Embeddings: {
      vf.dim = ctx.embeddings->dim;
      for (const auto& s : ctx.graph.synsets)
        vf.vectors.push_back(synset_embedding(*ctx.embeddings, s.words));
      break;
    }
  }
  save_vectors_file(path.string(), vf.ids, vf.vectors, vf.dim);
  log.built(path.filename().string());
  return vf;
}

int max_radius(const std::vector<int>& radii) { return *std::max_element(radii.begin(), radii.end()); }

std::optional<FeatureMask> point_mask(const Context& ctx, const VectorsFile& vf,
                                      const fs::path& run_dir, StageLog& log) {
  if (ctx.cfg.selection.method == SelectionMethod::None) return std::nullopt;
  const fs::path path = run_dir / "mask.tsv";
  if (fs::exists(path)) {
    log.cached("mask.tsv");
    return FeatureMask::load_tsv(path.string());
  }
  // Selection labels come from the largest-radius binary training set so one
  // feature space serves every radius.
  const LabeledSet labeled =
      build_labeled_set(ctx.graph, ctx.seeds, {}, max_radius(ctx.cfg.radii), ctx.excluded_words);
  std::vector<SparseVector> vectors;
  std::vector<uint8_t> labels;
  for (uint32_t i : labeled.binary_pos) {
    vectors.push_back(vf.vectors[i]);
    labels.push_back(1);
  }
  for (uint32_t i : labeled.binary_neg) {
    vectors.push_back(vf.vectors[i]);
    labels.push_back(0);
  }
  const std::vector<double> scores = ctx.cfg.selection.method == SelectionMethod::Igr
                                         ? igr_scores(vectors, labels)
                                         : gini_scores(vectors, labels);
  const auto method = ctx.cfg.selection.method == SelectionMethod::Igr ? FeatureMask::Method::Igr
                                                                       : FeatureMask::Method::Gini;
  FeatureMask mask = select_features(
      scores, method,
      ctx.cfg.selection.median ? std::nullopt : std::optional<double>(ctx.cfg.selection.epsilon));
  mask.save_tsv(path.string());
  log.built("mask.tsv");
  return mask;
}

struct PointModels {
  std::vector<TrainedModel> models;
  bool has_loss = false;
  double initial_loss = 0.0;  // mean over radii
  double final_loss = 0.0;
};

std::vector<TrainExample> classification_examples(const LabeledSet& labeled,
                                                  const std::vector<SparseVector>& vectors,
                                                  bool class_weights) {
  std::vector<TrainExample> data;
  const double n = static_cast<double>(labeled.binary_pos.size() + labeled.binary_neg.size());
  const double w_pos = class_weights ? n / (2.0 * labeled.binary_pos.size()) : 1.0;
  const double w_neg = class_weights ? n / (2.0 * labeled.binary_neg.size()) : 1.0;
  for (uint32_t i : labeled.binary_pos) data.push_back({&vectors[i], 1.0, w_pos});
  for (uint32_t i : labeled.binary_neg) data.push_back({&vectors[i], 0.0, w_neg});
  return data;
}

PointModels point_models(const Context& ctx, const std::vector<SparseVector>& masked,
                         uint32_t input_dim, const fs::path& run_dir, StageLog& log) {
  PointModels out;
  const fs::path train_log_path = run_dir / "train_log.json";
  json train_log = json::object();
  if (fs::exists(train_log_path)) {
    std::ifstream in(train_log_path);
    try {
      in >> train_log;
    } catch (const json::exception&) {
      train_log = json::object();
    }
  }
  bool wrote = false;

  for (int k : ctx.cfg.radii) {
    const LabeledSet labeled = build_labeled_set(
        ctx.graph, ctx.seeds,
        ctx.cfg.task == Task::Regression ? ctx.word_targets
                                         : std::vector<std::pair<std::string, double>>{},
        k, ctx.excluded_words);

    if (ctx.cfg.models == ModelFamily::Nn) {
      const fs::path path = run_dir / ("model-k" + std::to_string(k) + ".bin");
      if (fs::exists(path)) {
        log.cached(path.filename().string());
        out.models.push_back(TrainedModel::load(path.string()));
      } else {
        std::vector<TrainExample> data;
        if (ctx.cfg.task == Task::Classification) {
          if (labeled.binary_pos.empty() || labeled.binary_neg.empty())
            Error::data("radius " + std::to_string(k) + " training set lacks a class");
          data = classification_examples(labeled, masked, ctx.cfg.nn.class_weights);
        } else {
          if (labeled.regression.empty())
            Error::data("radius " + std::to_string(k) + " has no regression targets");
          for (const auto& [i, target] : labeled.regression)
            data.push_back({&masked[i], std::min(1.0, std::max(0.0, target)), 1.0});
        }
        NetSpec spec;
        spec.input_dim = input_dim;
        spec.hidden = ctx.cfg.nn.hidden.empty() ? NetSpec::default_hidden(input_dim) : ctx.cfg.nn.hidden;
        spec.task = ctx.cfg.task;
        spec.epochs = ctx.cfg.nn.epochs;
        spec.batch_size = ctx.cfg.nn.batch_size;
        spec.adam = ctx.cfg.nn.adam;
        TrainReport report;
        TrainedModel tm;
        tm.radius = k;
        tm.model = train_nn(data, spec, io::fnv1a64_u64(static_cast<uint64_t>(k), ctx.cfg.nn.seed),
                            &report);
        tm.save(path.string());
        log.built(path.filename().string());
        train_log["k" + std::to_string(k)] = {{"initial_loss", report.initial_loss},
                                              {"final_loss", report.final_loss}};
        wrote = true;
        out.models.push_back(std::move(tm));
      }
    } else {
      if (labeled.binary_pos.empty() || labeled.binary_neg.empty())
        Error::data("radius " + std::to_string(k) + " training set lacks a class");
      const auto data = classification_examples(labeled, masked, false);
      const fs::path rocchio_path = run_dir / ("model-k" + std::to_string(k) + "-rocchio.bin");
      if (fs::exists(rocchio_path)) {
        log.cached(rocchio_path.filename().string());
        out.models.push_back(TrainedModel::load(rocchio_path.string()));
      } else {
        TrainedModel tm;
        tm.radius = k;
        tm.model = train_rocchio(data);
        tm.save(rocchio_path.string());
        log.built(rocchio_path.filename().string());
        out.models.push_back(std::move(tm));
      }
      const fs::path svm_path = run_dir / ("model-k" + std::to_string(k) + "-svm.bin");
      if (fs::exists(svm_path)) {
        log.cached(svm_path.filename().string());
        out.models.push_back(TrainedModel::load(svm_path.string()));
      } else {
        TrainedModel tm;
        tm.radius = k;
        tm.model = train_svm(data, ctx.cfg.svm.lambda, ctx.cfg.svm.epochs,
                             io::fnv1a64_u64(static_cast<uint64_t>(k), ctx.cfg.svm.seed));
        tm.save(svm_path.string());
        log.built(svm_path.filename().string());
        out.models.push_back(std::move(tm));
      }
    }
  }

  if (wrote) {
    std::ofstream o(train_log_path);
    o << train_log.dump(2) << "\n";
  }
  if (ctx.cfg.models == ModelFamily::Nn && !train_log.empty()) {
    double init_sum = 0.0, final_sum = 0.0;
    size_t n = 0;
    for (int k : ctx.cfg.radii) {
      auto it = train_log.find("k" + std::to_string(k));
      if (it != train_log.end()) {
        init_sum += (*it)["initial_loss"].get<double>();
        final_sum += (*it)["final_loss"].get<double>();
        ++n;
      }
    }
    if (n == ctx.cfg.radii.size()) {
      out.has_loss = true;
      out.initial_loss = init_sum / static_cast<double>(n);
      out.final_loss = final_sum / static_cast<double>(n);
    }
  }
  return out;
}

// Synsets holding a direct label keep it in the ensemble output: the k=0
// binary classes for classification, the k=0 regression bases otherwise.
std::vector<std::pair<std::string, double>> seed_labels_for(const Context& ctx) {
  const LabeledSet base = build_labeled_set(
      ctx.graph, ctx.seeds,
      ctx.cfg.task == Task::Regression ? ctx.word_targets
                                       : std::vector<std::pair<std::string, double>>{},
      0, ctx.excluded_words);
  std::vector<std::pair<std::string, double>> labels;
  if (ctx.cfg.task == Task::Classification) {
    for (uint32_t i : base.binary_pos) labels.emplace_back(ctx.graph.synsets[i].id, 1.0);
    for (uint32_t i : base.binary_neg) labels.emplace_back(ctx.graph.synsets[i].id, 0.0);
  } else {
    for (const auto& [i, v] : base.regression)
      labels.emplace_back(ctx.graph.synsets[i].id, std::min(1.0, std::max(0.0, v)));
  }
  return labels;
}

struct WalkOutcome {
  ScoreTable final_scores;
  bool walked = false;
  double alpha = 0.0;
};

WalkOutcome point_walk(const Context& ctx, const ScoreTable& predicted, const fs::path& run_dir,
                       StageLog& log) {
  WalkOutcome out;
  const fs::path final_path = run_dir / "scores_final.tsv";
  const fs::path result_path = run_dir / "walk_result.json";

  if (!ctx.cfg.walk.enabled) {
    if (fs::exists(final_path)) {
      log.cached("scores_final.tsv");
      out.final_scores = ScoreTable::load_tsv(final_path.string());
      out.final_scores.axis = ctx.cfg.axis;
    } else {
      out.final_scores = predicted;
      out.final_scores.save_tsv(final_path.string());
      log.built("scores_final.tsv");
    }
    return out;
  }

  out.walked = true;
  if (fs::exists(final_path) && fs::exists(result_path)) {
    log.cached("scores_final.tsv");
    out.final_scores = ScoreTable::load_tsv(final_path.string());
    out.final_scores.axis = ctx.cfg.axis;
    std::ifstream in(result_path);
    json j;
    in >> j;
    out.alpha = j.at("alpha").get<double>();
    return out;
  }

  json result;
  if (ctx.cfg.walk.sweep) {
    if (ctx.gold_val.empty())
      Error::data("the alpha sweep needs validation gold labels");
    const std::vector<double> alphas =
        ctx.cfg.walk.alphas.empty() ? default_alpha_grid() : ctx.cfg.walk.alphas;
    auto evaluate = [&](const ScoreTable& table) {
      return evaluate_run(table, ctx.gold_val, ctx.cfg.tau_param).tau;
    };
    AlphaSweepResult sweep = alpha_sweep(ctx.graph, predicted, alphas, ctx.cfg.walk.max_iters,
                                         ctx.cfg.walk.tol, evaluate);
    std::ofstream csv(run_dir / "alpha_sweep.csv");
    csv << "alpha,tau_p\n";
    json rows = json::array();
    for (const auto& row : sweep.rows) {
      csv << io::format_double(row.alpha) << "," << io::format_double(row.tau) << "\n";
      rows.push_back({{"alpha", row.alpha},
                      {"tau_p", row.tau},
                      {"iterations", row.walk.iterations},
                      {"converged", row.walk.converged}});
    }
    log.built("alpha_sweep.csv");
    out.alpha = sweep.best_alpha;
    out.final_scores = std::move(sweep.best_scores);
    result["alpha"] = sweep.best_alpha;
    result["val_tau_p"] = sweep.best_tau;
    result["rows"] = rows;
  } else {
    WalkConfig wc{ctx.cfg.walk.alpha, ctx.cfg.walk.max_iters, ctx.cfg.walk.tol};
    WalkReport report;
    out.final_scores = random_walk(ctx.graph, predicted, wc, &report);
    out.alpha = ctx.cfg.walk.alpha;
    result["alpha"] = wc.alpha;
    result["iterations"] = report.iterations;
    result["converged"] = report.converged;
  }
  out.final_scores.save_tsv(final_path.string());
  {
    std::ofstream o(result_path);
    o << result.dump(2) << "\n";
  }
  log.built("scores_final.tsv");
  return out;
}

RunReport run_point(const Context& ctx, uint32_t b, double o, Stage through, bool with_test) {
  const fs::path run_dir = ctx.runs_dir / io::hex64(point_key(ctx, b, o));
  fs::create_directories(run_dir);
  StageLog log;

  RunReport report;
  report.axis = ctx.cfg.axis;
  report.task = ctx.cfg.task;
  report.method = std::string(ctx.cfg.models == ModelFamily::Nn ? "nn" : "rocchio+svm") + "-" +
                  source_name(ctx.cfg.source);
  report.b = ctx.cfg.source == VectorSource::BlockSegmentation ? b : 0;
  report.o = ctx.cfg.source == VectorSource::BlockSegmentation ? o : 0.0;
  report.selection = selection_label(ctx.cfg.selection);
  report.run_dir = run_dir.string();

  const auto finish = [&]() {
    log.save(run_dir / "build.log");
    return report;
  };

  if (ctx.cfg.source == VectorSource::BlockSegmentation) {
    stage_guard("index", [&] { ensure_index(ctx, b, o, log); });
  }
  if (through == Stage::Index) return finish();

  const VectorsFile vf = stage_guard("vectors", [&] { return point_vectors(ctx, b, o, log); });
  if (through == Stage::Vectors) return finish();

  const std::optional<FeatureMask> mask =
      stage_guard("select", [&] { return point_mask(ctx, vf, run_dir, log); });
  if (through == Stage::Select) return finish();

  std::vector<SparseVector> masked;
  const std::vector<SparseVector>* features = &vf.vectors;
  uint32_t input_dim = vf.dim;
  if (mask) {
    masked.reserve(vf.vectors.size());
    for (const auto& v : vf.vectors) masked.push_back(apply_mask(v, *mask));
    features = &masked;
    input_dim = static_cast<uint32_t>(mask->kept.size());
  }

  const PointModels models =
      stage_guard("train", [&] { return point_models(ctx, *features, input_dim, run_dir, log); });
  report.has_train_loss = models.has_loss;
  report.train_initial_loss = models.initial_loss;
  report.train_final_loss = models.final_loss;
  if (through == Stage::Train) return finish();

  const fs::path predicted_path = run_dir / "scores_predicted.tsv";
  ScoreTable predicted;
  if (fs::exists(predicted_path)) {
    log.cached("scores_predicted.tsv");
    predicted = ScoreTable::load_tsv(predicted_path.string());
    predicted.axis = ctx.cfg.axis;
  } else {
    predicted = stage_guard("scores", [&] {
      ScoreTable table = ensemble_scores(models.models, ctx.cfg.radii, vf.ids, *features,
                                         seed_labels_for(ctx), ctx.cfg.axis);
      table.save_tsv(predicted_path.string());
      return table;
    });
    log.built("scores_predicted.tsv");
  }
  if (through == Stage::Scores) return finish();

  const WalkOutcome walked =
      stage_guard("walk", [&] { return point_walk(ctx, predicted, run_dir, log); });
  report.walked = walked.walked;
  report.alpha = walked.alpha;
  if (through == Stage::Walk) return finish();

  stage_guard("eval", [&] {
    if (!ctx.gold_val.empty()) {
      const EvalReport val = evaluate_run(walked.final_scores, ctx.gold_val, ctx.cfg.tau_param);
      report.has_val = true;
      report.val_tau = val.tau;
    }
    if (with_test) {
      const EvalReport test = evaluate_run(walked.final_scores, ctx.gold_test, ctx.cfg.tau_param);
      report.has_test = true;
      report.tau = test.tau;
      report.h = test.h;
      report.n_d = test.n_d;
      report.n_u = test.n_u;
      std::ofstream out(run_dir / "report.json");
      out << report.to_json(ctx.cfg) << "\n";
      log.built("report.json");
    }
  });
  return finish();
}

std::vector<std::pair<uint32_t, double>> grid_points(const RunConfig& cfg) {
  std::vector<std::pair<uint32_t, double>> points;
  if (cfg.source == VectorSource::BlockSegmentation) {
    for (uint32_t b : cfg.block_sizes) {
      for (double o : cfg.overlaps) {
        if (std::find(points.begin(), points.end(), std::make_pair(b, o)) == points.end())
          points.emplace_back(b, o);
      }
    }
  } else {
    points.emplace_back(0u, 0.0);  // the grid is meaningless off the block source
  }
  return points;
}

void parallel_for(size_t n, uint32_t jobs, const std::function<void(size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  const size_t workers = std::min<size_t>(jobs, n);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&] {
      for (size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::string csv_double(double v) { return io::format_double(v); }

}  // namespace

std::string RunReport::to_json(const RunConfig& cfg) const {
  json j;
  j["axis"] = std::string(axis_name(axis));
  j["task"] = task == Task::Classification ? "classification" : "regression";
  j["method"] = method;
  j["b"] = b;
  j["o"] = o;
  j["selection"] = selection;
  if (walked) j["alpha"] = alpha;
  else j["alpha"] = nullptr;
  if (has_test) {
    j["tau_p"] = tau;
    j["h"] = h;
    j["n_d"] = n_d;
    j["n_u"] = n_u;
  }
  if (has_val) j["val_tau_p"] = val_tau;
  if (has_train_loss) {
    j["train_initial_loss"] = train_initial_loss;
    j["train_final_loss"] = train_final_loss;
  }
  j["run_dir"] = run_dir;
  j["config"] = config_to_json_obj(cfg);
  return j.dump(2);
}

namespace {

void write_report_files(const RunConfig& cfg, const std::vector<RunReport>& reports,
                        const std::vector<bool>& ok) {
  std::ofstream csv(fs::path(cfg.output_dir) / "reports.csv");
  csv << "axis,method,task,b,o,selection,alpha,tau_p,h,n_d,n_u,val_tau_p\n";
  std::ofstream jsonl(fs::path(cfg.output_dir) / "reports.jsonl");
  for (size_t i = 0; i < reports.size(); ++i) {
    if (!ok[i]) continue;
    const RunReport& r = reports[i];
    csv << axis_name(r.axis) << "," << r.method << ","
        << (r.task == Task::Classification ? "classification" : "regression") << "," << r.b << ","
        << csv_double(r.o) << "," << io::csv_field(r.selection) << ","
        << (r.walked ? csv_double(r.alpha) : "") << "," << (r.has_test ? csv_double(r.tau) : "")
        << "," << r.h << "," << r.n_d << "," << r.n_u << ","
        << (r.has_val ? csv_double(r.val_tau) : "") << "\n";
    json j = json::parse(r.to_json(cfg));
    jsonl << j.dump() << "\n";
  }
}

}  // namespace

std::vector<RunReport> run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const Context ctx = make_context(cfg);
  const auto points = grid_points(cfg);

  std::vector<RunReport> reports(points.size());
  std::vector<bool> ok(points.size(), false);
  std::vector<std::string> errors(points.size());
  std::vector<ErrorKind> kinds(points.size(), ErrorKind::Data);

  parallel_for(points.size(), cfg.jobs, [&](size_t i) {
    try {
      reports[i] = run_point(ctx, points[i].first, points[i].second, Stage::Eval, true);
      ok[i] = true;
    } catch (const Error& e) {
      errors[i] = e.what();
      kinds[i] = e.kind();
    }
  });

  write_report_files(cfg, reports, ok);

  std::vector<RunReport> successful;
  for (size_t i = 0; i < points.size(); ++i) {
    if (ok[i]) successful.push_back(reports[i]);
    else {
      throw Error(kinds[i], "point b=" + std::to_string(points[i].first) + " o=" +
                                io::format_double(points[i].second) + " failed: " + errors[i]);
    }
  }
  return successful;
}

void run_stage(const RunConfig& cfg, Stage through) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const Context ctx = make_context(cfg);
  const auto points = grid_points(cfg);
  std::vector<std::string> errors(points.size());
  std::vector<bool> failed(points.size(), false);
  std::vector<ErrorKind> kinds(points.size(), ErrorKind::Data);
  parallel_for(points.size(), cfg.jobs, [&](size_t i) {
    try {
      run_point(ctx, points[i].first, points[i].second, through, false);
    } catch (const Error& e) {
      failed[i] = true;
      errors[i] = e.what();
      kinds[i] = e.kind();
    }
  });
  for (size_t i = 0; i < points.size(); ++i) {
    if (failed[i]) throw Error(kinds[i], errors[i]);
  }
}

SweepResult sweep_grid(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const Context ctx = make_context(cfg);
  if (ctx.gold_val.empty())
    Error::data("sweep needs validation gold labels (a validation split or gold_val file)");
  const auto points = grid_points(cfg);

  SweepResult result;
  result.rows.resize(points.size());
  parallel_for(points.size(), cfg.jobs, [&](size_t i) {
    SweepRow& row = result.rows[i];
    row.b = points[i].first;
    row.o = points[i].second;
    row.selection = selection_label(cfg.selection);
    try {
      const RunReport r = run_point(ctx, points[i].first, points[i].second, Stage::Eval, false);
      if (!r.has_val) Error::data("no validation evaluation for this point");
      row.val_tau = r.val_tau;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });

  {
    std::ofstream csv(fs::path(cfg.output_dir) / "sweep.csv");
    csv << "b,o,selection,tau_p\n";
    for (const auto& row : result.rows) {
      csv << row.b << "," << csv_double(row.o) << "," << io::csv_field(row.selection) << ","
          << (row.ok ? csv_double(row.val_tau) : "") << "\n";
    }
  }

  bool any_ok = false;
  for (size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    if (row.ok && (!any_ok || row.val_tau < result.rows[result.best_index].val_tau)) {
      any_ok = true;
      result.best_index = i;
    }
  }
  if (!any_ok) Error::data("every sweep point failed; first error: " + result.rows[0].error);

  // Test evaluation only for the winning configuration.
  result.best =
      run_point(ctx, points[result.best_index].first, points[result.best_index].second, Stage::Eval, true);

  json summary;
  summary["best"] = {{"b", result.best.b},
                     {"o", result.best.o},
                     {"selection", result.best.selection},
                     {"val_tau_p", result.rows[result.best_index].val_tau},
                     {"test_tau_p", result.best.tau}};
  summary["rows"] = json::array();
  for (const auto& row : result.rows) {
    json r = {{"b", row.b}, {"o", row.o}, {"selection", row.selection}};
    if (row.ok) r["val_tau_p"] = row.val_tau;
    else r["error"] = row.error;
    summary["rows"].push_back(r);
  }
  std::ofstream out(fs::path(cfg.output_dir) / "sweep_result.json");
  out << summary.dump(2) << "\n";
  return result;
}

void dump_token_labels(const TokenCorpus& corpus, const SynsetGraph& graph,
                       const ScoreTable& scores, uint64_t begin, uint64_t end, std::ostream& out) {
  if (begin >= end || end > corpus.token_count())
    Error::config("window [" + std::to_string(begin) + ", " + std::to_string(end) +
                  ") is out of corpus bounds (m=" + std::to_string(corpus.token_count()) + ")");
  // Per-word mean over the scored synsets listing it, computed once.
  std::unordered_map<uint32_t, std::string> cache;
  out << "position,token,level\n";
  for (uint64_t p = begin; p < end; ++p) {
    const uint32_t word_id = corpus.tokens[p];
    auto it = cache.find(word_id);
    if (it == cache.end()) {
      std::string level;
      const auto* ids = graph.synsets_of(corpus.words[word_id]);
      if (ids) {
        double sum = 0.0;
        uint32_t n = 0;
        for (uint32_t i : *ids) {
          const auto* entry = scores.find(graph.synsets[i].id);
          if (entry) {
            sum += entry->score;
            ++n;
          }
        }
        if (n) level = io::format_double(sum / n);
      }
      it = cache.emplace(word_id, std::move(level)).first;
    }
    out << p << "," << io::csv_field(corpus.words[word_id]) << "," << it->second << "\n";
  }
}

}  // namespace blocklex
