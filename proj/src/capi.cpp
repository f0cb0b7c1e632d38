#include "blocklex.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "blocklex/corpus.hpp"
#include "blocklex/error.hpp"
#include "blocklex/learn.hpp"
#include "blocklex/lexnet.hpp"
#include "blocklex/pipeline.hpp"
#include "blocklex/propagate.hpp"
#include "blocklex/rankeval.hpp"
#include "blocklex/vectors.hpp"

using namespace blocklex;

// Opaque handle definitions: each wraps one core value.
struct blx_corpus {
  TokenCorpus value;
};
struct blx_index {
  BlockIndex value;
};
struct blx_graph {
  SynsetGraph value;
};
struct blx_lexicon {
  VadLexicon value;
};
struct blx_vectors {
  VectorsFile value;
};
struct blx_scores {
  ScoreTable value;
};

namespace {

thread_local std::string g_last_error;

blx_status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return BLX_ERR_CONFIG;
    case ErrorKind::Data: return BLX_ERR_DATA;
    case ErrorKind::Numeric: return BLX_ERR_NUMERIC;
  }
  return BLX_ERR_INTERNAL;
}

template <typename F>
blx_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BLX_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BLX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BLX_ERR_INTERNAL;
  }
}

blx_status require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return BLX_ERR_CONFIG;
  }
  return BLX_OK;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* blx_version(void) { return "0.1.0"; }

const char* blx_last_error(void) { return g_last_error.c_str(); }

void blx_string_free(char* s) { std::free(s); }

/* ---- corpus -------------------------------------------------------------- */

blx_status blx_corpus_load(const char* path, int lowercase, uint32_t min_token_len,
                           blx_corpus** out) {
  if (blx_status s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new blx_corpus{load_corpus(path, lowercase != 0, min_token_len)}; });
}

void blx_corpus_free(blx_corpus* corpus) { delete corpus; }

uint64_t blx_corpus_token_count(const blx_corpus* corpus) {
  return corpus ? corpus->value.token_count() : 0;
}

uint32_t blx_corpus_vocab_size(const blx_corpus* corpus) {
  return corpus ? corpus->value.vocab_size() : 0;
}

/* ---- block inverted index ------------------------------------------------ */

blx_status blx_index_build(const blx_corpus* corpus, uint32_t block_size, double overlap,
                           blx_index** out) {
  if (blx_status s = require(corpus && out, "null argument")) return s;
  return guarded([&] {
    const BlockSpec spec = BlockSpec::make(block_size, overlap);
    *out = new blx_index{segment(corpus->value, spec)};
  });
}

blx_status blx_index_save(const blx_index* index, const char* path) {
  if (blx_status s = require(index && path, "null argument")) return s;
  return guarded([&] { index->value.save(path); });
}

blx_status blx_index_open(const char* path, blx_index** out) {
  if (blx_status s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new blx_index{BlockIndex::load(path)}; });
}

void blx_index_free(blx_index* index) { delete index; }

uint32_t blx_index_block_count(const blx_index* index) {
  return index ? index->value.block_count : 0;
}

uint64_t blx_index_token_count(const blx_index* index) {
  return index ? index->value.token_count : 0;
}

uint32_t blx_index_vocab_size(const blx_index* index) {
  return index ? static_cast<uint32_t>(index->value.words.size()) : 0;
}

blx_status blx_index_postings(const blx_index* index, const char* word, uint32_t* buf,
                              uint32_t cap, uint32_t* out_len) {
  if (blx_status s = require(index && word && out_len && (buf || cap == 0), "null argument"))
    return s;
  return guarded([&] {
    const auto* postings = index->value.find_postings(word);
    const uint32_t n = postings ? static_cast<uint32_t>(postings->size()) : 0;
    *out_len = n;
    if (n > cap) Error::config("posting buffer too small");
    if (postings && n) std::memcpy(buf, postings->data(), n * sizeof(uint32_t));
  });
}

/* ---- synset graph and lexicon -------------------------------------------- */

blx_status blx_graph_load(const char* path, blx_graph** out) {
  if (blx_status s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new blx_graph{load_graph(path)}; });
}

void blx_graph_free(blx_graph* graph) { delete graph; }

uint32_t blx_graph_synset_count(const blx_graph* graph) {
  return graph ? graph->value.size() : 0;
}

blx_status blx_lexicon_load(const char* path, blx_lexicon** out) {
  if (blx_status s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new blx_lexicon{load_vad_lexicon(path)}; });
}

void blx_lexicon_free(blx_lexicon* lexicon) { delete lexicon; }

uint32_t blx_lexicon_size(const blx_lexicon* lexicon) {
  return lexicon ? lexicon->value.size() : 0;
}

/* ---- synset feature vectors ---------------------------------------------- */

blx_status blx_vectors_build(const blx_index* index, const blx_graph* graph, blx_vectors** out) {
  if (blx_status s = require(index && graph && out, "null argument")) return s;
  return guarded([&] {
    VectorsFile vf;
    vf.dim = index->value.block_count;
    for (const auto& synset : graph->value.synsets) {
      vf.ids.push_back(synset.id);
      vf.vectors.push_back(synset_vector(index->value, synset.words));
    }
    *out = new blx_vectors{std::move(vf)};
  });
}

blx_status blx_vectors_save(const blx_vectors* vectors, const char* path) {
  if (blx_status s = require(vectors && path, "null argument")) return s;
  return guarded([&] {
    save_vectors_file(path, vectors->value.ids, vectors->value.vectors, vectors->value.dim);
  });
}

blx_status blx_vectors_open(const char* path, blx_vectors** out) {
  if (blx_status s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new blx_vectors{load_vectors_file(path)}; });
}

void blx_vectors_free(blx_vectors* vectors) { delete vectors; }

uint32_t blx_vectors_dim(const blx_vectors* vectors) { return vectors ? vectors->value.dim : 0; }

uint64_t blx_vectors_count(const blx_vectors* vectors) {
  return vectors ? vectors->value.ids.size() : 0;
}

/* ---- score tables --------------------------------------------------------- */

blx_status blx_scores_open(const char* path, blx_scores** out) {
  if (blx_status s = require(path && out, "null argument")) return s;
  return guarded([&] { *out = new blx_scores{ScoreTable::load_tsv(path)}; });
}

blx_status blx_scores_save(const blx_scores* scores, const char* path) {
  if (blx_status s = require(scores && path, "null argument")) return s;
  return guarded([&] { scores->value.save_tsv(path); });
}

void blx_scores_free(blx_scores* scores) { delete scores; }

uint64_t blx_scores_size(const blx_scores* scores) { return scores ? scores->value.size() : 0; }

blx_status blx_scores_get(const blx_scores* scores, const char* synset_id, double* out_score) {
  if (blx_status s = require(scores && synset_id && out_score, "null argument")) return s;
  return guarded([&] {
    const auto* entry = scores->value.find(synset_id);
    if (!entry) Error::data(std::string("no score for synset ") + synset_id);
    *out_score = entry->score;
  });
}

/* ---- random-walk refinement ----------------------------------------------- */

blx_status blx_random_walk(const blx_graph* graph, const blx_scores* initial, double alpha,
                           uint32_t max_iters, double tol, blx_scores** out,
                           uint32_t* out_iterations, int* out_converged) {
  if (blx_status s = require(graph && initial && out, "null argument")) return s;
  return guarded([&] {
    WalkReport report;
    WalkConfig cfg{alpha, max_iters, tol};
    ScoreTable result = random_walk(graph->value, initial->value, cfg, &report);
    if (out_iterations) *out_iterations = report.iterations;
    if (out_converged) *out_converged = report.converged ? 1 : 0;
    *out = new blx_scores{std::move(result)};
  });
}

/* ---- evaluation ------------------------------------------------------------ */

blx_status blx_evaluate(const blx_scores* predicted, const blx_scores* gold, double p,
                        double* out_tau, uint64_t* out_h, uint64_t* out_nd, uint64_t* out_nu) {
  if (blx_status s = require(predicted && gold && out_tau, "null argument")) return s;
  return guarded([&] {
    std::vector<std::pair<std::string, double>> gold_pairs;
    gold_pairs.reserve(gold->value.size());
    for (const auto& e : gold->value.entries) gold_pairs.emplace_back(e.id, e.score);
    const EvalReport report = evaluate_run(predicted->value, gold_pairs, p);
    *out_tau = report.tau;
    if (out_h) *out_h = report.h;
    if (out_nd) *out_nd = report.n_d;
    if (out_nu) *out_nu = report.n_u;
  });
}

/* ---- config-driven pipeline ------------------------------------------------ */

blx_status blx_run(const char* config_json, char** out_report_json) {
  if (blx_status s = require(config_json != nullptr, "null argument")) return s;
  return guarded([&] {
    const RunConfig cfg = parse_run_config(config_json);
    const auto reports = run_pipeline(cfg);
    if (out_report_json) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : reports) arr.push_back(nlohmann::json::parse(r.to_json(cfg)));
      *out_report_json = dup_string(arr.dump(2));
    }
  });
}

blx_status blx_run_stage(const char* config_json, const char* stage) {
  if (blx_status s = require(config_json && stage, "null argument")) return s;
  return guarded([&] {
    const RunConfig cfg = parse_run_config(config_json);
    run_stage(cfg, stage_from_name(stage));
  });
}

blx_status blx_sweep(const char* config_json, char** out_report_json) {
  if (blx_status s = require(config_json != nullptr, "null argument")) return s;
  return guarded([&] {
    const RunConfig cfg = parse_run_config(config_json);
    const SweepResult result = sweep_grid(cfg);
    if (out_report_json) {
      nlohmann::json summary;
      summary["best"] = nlohmann::json::parse(result.best.to_json(cfg));
      summary["rows"] = nlohmann::json::array();
      for (const auto& row : result.rows) {
        nlohmann::json r = {{"b", row.b}, {"o", row.o}, {"selection", row.selection}};
        if (row.ok) r["val_tau_p"] = row.val_tau;
        else r["error"] = row.error;
        summary["rows"].push_back(r);
      }
      *out_report_json = dup_string(summary.dump(2));
    }
  });
}

blx_status blx_dump_tokens(const char* config_json, const char* scores_path, uint64_t begin,
                           uint64_t end, const char* out_csv_path) {
  if (blx_status s = require(config_json && scores_path && out_csv_path, "null argument")) return s;
  return guarded([&] {
    const RunConfig cfg = parse_run_config(config_json);
    if (cfg.corpus_path.empty()) Error::config("config requires 'corpus' for dump-tokens");
    if (cfg.graph_path.empty()) Error::config("config requires 'graph' for dump-tokens");
    const TokenCorpus corpus = load_corpus(cfg.corpus_path, cfg.lowercase, cfg.min_token_len);
    const SynsetGraph graph = load_graph(cfg.graph_path);
    const ScoreTable scores = ScoreTable::load_tsv(scores_path);
    std::ofstream out(out_csv_path, std::ios::binary);
    if (!out) Error::data(std::string("cannot write ") + out_csv_path);
    dump_token_labels(corpus, graph, scores, begin, end, out);
  });
}

}  // extern "C"
