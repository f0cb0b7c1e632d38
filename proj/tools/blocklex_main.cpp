// blocklex command-line driver. Parses arguments, assembles the pipeline
// configuration (config file plus flag overrides), and calls the C API of
// libblocklex. Exit codes: 0 success, 2 config error, 3 data error,
// 4 numeric failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blocklex.h"

using nlohmann::json;

namespace {

int fail(blx_status status) {
  std::cerr << "error: " << blx_last_error() << "\n";
  return static_cast<int>(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open config file: " << path << "\n";
    std::exit(2);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Shared config options: a config file plus flag overrides that mirror the
// top-level config fields.
struct ConfigArgs {
  std::string config_path;
  std::string corpus, graph, lexicon, gloss, embeddings, gold_test, gold_val;
  std::string axis, task, source, models, output_dir, cache_dir;
  std::string block_sizes, overlaps, radii;
  std::string selection_method, selection_border;
  std::string walk_alpha;  // number, or "sweep"
  double split_train = -1, split_val = -1, split_test = -1;
  int64_t split_seed = -1;
  double vad_hi = -1, vad_lo = -1;
  int64_t nn_epochs = -1, nn_batch = -1, nn_seed = -1;
  std::string nn_hidden;
  double tau_p = -1;
  int64_t jobs = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "JSON config file");
    cmd->add_option("--corpus", corpus, "corpus file (whitespace tokens)");
    cmd->add_option("--graph", graph, "synset graph file");
    cmd->add_option("--lexicon", lexicon, "VAD lexicon TSV");
    cmd->add_option("--gloss", gloss, "gloss tokens TSV (bow source)");
    cmd->add_option("--embeddings", embeddings, "embedding text file");
    cmd->add_option("--gold-test", gold_test, "synset-level test gold TSV");
    cmd->add_option("--gold-val", gold_val, "synset-level validation gold TSV");
    cmd->add_option("--axis", axis, "arousal | positive | negative");
    cmd->add_option("--task", task, "classification | regression");
    cmd->add_option("--source", source, "bseg | bow | embeddings");
    cmd->add_option("--models", models, "nn | rocchio+svm");
    cmd->add_option("--block-sizes", block_sizes, "comma-separated block sizes");
    cmd->add_option("--overlaps", overlaps, "comma-separated overlaps");
    cmd->add_option("--radii", radii, "comma-separated expansion radii");
    cmd->add_option("--selection", selection_method, "igr | gini | none");
    cmd->add_option("--selection-border", selection_border, "epsilon value or 'median'");
    cmd->add_option("--walk-alpha", walk_alpha, "walk alpha, or 'sweep'");
    cmd->add_option("--split-train", split_train, "training fraction");
    cmd->add_option("--split-val", split_val, "validation fraction");
    cmd->add_option("--split-test", split_test, "test fraction");
    cmd->add_option("--split-seed", split_seed, "split shuffle seed");
    cmd->add_option("--vad-hi", vad_hi, "positive seed threshold");
    cmd->add_option("--vad-lo", vad_lo, "negative seed threshold");
    cmd->add_option("--nn-epochs", nn_epochs, "NN training epochs");
    cmd->add_option("--nn-batch", nn_batch, "NN batch size");
    cmd->add_option("--nn-seed", nn_seed, "NN init/shuffle seed");
    cmd->add_option("--nn-hidden", nn_hidden, "comma-separated hidden sizes");
    cmd->add_option("--tau-p", tau_p, "tie penalty p for tau_p");
    cmd->add_option("--output-dir", output_dir, "artifact/report directory");
    cmd->add_option("--cache-dir", cache_dir, "cache directory");
    cmd->add_option("--jobs", jobs, "parallel grid workers");
  }

  json merged() const {
    json cfg = json::object();
    if (!config_path.empty()) {
      try {
        cfg = json::parse(read_file(config_path));
      } catch (const json::exception& e) {
        std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
        std::exit(2);
      }
    }
    auto set_str = [&](const char* key, const std::string& v) {
      if (!v.empty()) cfg[key] = v;
    };
    set_str("corpus", corpus);
    set_str("graph", graph);
    set_str("lexicon", lexicon);
    set_str("gloss", gloss);
    set_str("embeddings", embeddings);
    set_str("gold_test", gold_test);
    set_str("gold_val", gold_val);
    set_str("axis", axis);
    set_str("task", task);
    set_str("source", source);
    set_str("models", models);
    set_str("output_dir", output_dir);
    set_str("cache_dir", cache_dir);
    if (!block_sizes.empty()) {
      cfg["block_sizes"] = json::array();
      for (const auto& s : split_list(block_sizes)) cfg["block_sizes"].push_back(std::stoul(s));
    }
    if (!overlaps.empty()) {
      cfg["overlaps"] = json::array();
      for (const auto& s : split_list(overlaps)) cfg["overlaps"].push_back(std::stod(s));
    }
    if (!radii.empty()) {
      cfg["radii"] = json::array();
      for (const auto& s : split_list(radii)) cfg["radii"].push_back(std::stoi(s));
    }
    if (!selection_method.empty()) cfg["selection"]["method"] = selection_method;
    if (!selection_border.empty()) {
      if (selection_border == "median") cfg["selection"]["border"] = "median";
      else cfg["selection"]["border"] = std::stod(selection_border);
    }
    if (!walk_alpha.empty()) {
      if (walk_alpha == "sweep") cfg["walk"] = {{"sweep", true}};
      else cfg["walk"] = {{"alpha", std::stod(walk_alpha)}};
    }
    if (split_train >= 0) cfg["split"]["train"] = split_train;
    if (split_val >= 0) cfg["split"]["val"] = split_val;
    if (split_test >= 0) cfg["split"]["test"] = split_test;
    if (split_seed >= 0) cfg["split"]["seed"] = split_seed;
    if (vad_hi >= 0) cfg["vad_thresholds"]["hi"] = vad_hi;
    if (vad_lo >= 0) cfg["vad_thresholds"]["lo"] = vad_lo;
    if (nn_epochs >= 0) cfg["nn"]["epochs"] = nn_epochs;
    if (nn_batch >= 0) cfg["nn"]["batch_size"] = nn_batch;
    if (nn_seed >= 0) cfg["nn"]["seed"] = nn_seed;
    if (!nn_hidden.empty()) {
      cfg["nn"]["hidden"] = json::array();
      for (const auto& s : split_list(nn_hidden)) cfg["nn"]["hidden"].push_back(std::stoul(s));
    }
    if (tau_p >= 0) cfg["tau_p"] = tau_p;
    if (jobs >= 0) cfg["jobs"] = jobs;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blocklex: affect-lexicon induction over block-segmentation word vectors"};
  app.require_subcommand(1);

  // ---- index ---------------------------------------------------------------
  auto* index_cmd = app.add_subcommand("index", "build the block inverted index of a corpus");
  std::string idx_corpus, idx_out;
  uint32_t idx_b = 120;
  double idx_o = 0.75;
  bool idx_no_lower = false;
  uint32_t idx_min_len = 1;
  index_cmd->add_option("--corpus", idx_corpus, "corpus file")->required();
  index_cmd->add_option("--block-size", idx_b, "block size b")->required();
  index_cmd->add_option("--overlap", idx_o, "overlap o in [0,1)")->required();
  index_cmd->add_option("--out", idx_out, "output index file")->required();
  index_cmd->add_flag("--no-lowercase", idx_no_lower, "keep token case");
  index_cmd->add_option("--min-token-len", idx_min_len, "minimum token length");

  // ---- vectors ---------------------------------------------------------------
  auto* vectors_cmd = app.add_subcommand("vectors", "build synset vectors from an index");
  std::string vec_index, vec_graph, vec_out;
  vectors_cmd->add_option("--index", vec_index, "index file")->required();
  vectors_cmd->add_option("--graph", vec_graph, "synset graph file")->required();
  vectors_cmd->add_option("--out", vec_out, "output vectors file")->required();

  // ---- config-driven stages ----------------------------------------------------
  ConfigArgs select_args, train_args, run_args, sweep_args;
  auto* select_cmd = app.add_subcommand("select", "compute the feature-selection mask");
  select_args.attach(select_cmd);
  auto* train_cmd = app.add_subcommand("train", "train the per-radius models");
  train_args.attach(train_cmd);
  auto* run_cmd = app.add_subcommand("run", "run the full pipeline and evaluate");
  run_args.attach(run_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep", "grid model selection on the validation split");
  sweep_args.attach(sweep_cmd);

  // ---- walk ---------------------------------------------------------------
  auto* walk_cmd = app.add_subcommand("walk", "refine a score table by the random walk");
  std::string walk_graph, walk_scores, walk_out;
  double walk_alpha = 0.7, walk_tol = 1e-9;
  uint32_t walk_iters = 200;
  walk_cmd->add_option("--graph", walk_graph, "synset graph file")->required();
  walk_cmd->add_option("--scores", walk_scores, "initial score table TSV")->required();
  walk_cmd->add_option("--alpha", walk_alpha, "control parameter in [0,1]")->required();
  walk_cmd->add_option("--out", walk_out, "output score table TSV")->required();
  walk_cmd->add_option("--max-iters", walk_iters, "iteration cap");
  walk_cmd->add_option("--tol", walk_tol, "convergence threshold");

  // ---- eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "tau_p between predicted and gold score tables");
  std::string eval_pred, eval_gold, eval_out;
  double eval_p = 0.5;
  eval_cmd->add_option("--predicted", eval_pred, "predicted score table TSV")->required();
  eval_cmd->add_option("--gold", eval_gold, "gold score/label TSV")->required();
  eval_cmd->add_option("--p", eval_p, "tie penalty p");
  eval_cmd->add_option("--out", eval_out, "write the JSON report here (default stdout)");

  // ---- dump-tokens ----------------------------------------------------------
  auto* dump_cmd = app.add_subcommand("dump-tokens", "per-token levels over a corpus window");
  ConfigArgs dump_args;
  dump_args.attach(dump_cmd);
  std::string dump_scores, dump_out;
  uint64_t dump_begin = 0, dump_end = 0;
  dump_cmd->add_option("--scores", dump_scores, "score table TSV")->required();
  dump_cmd->add_option("--begin", dump_begin, "window start position")->required();
  dump_cmd->add_option("--end", dump_end, "window end position (exclusive)")->required();
  dump_cmd->add_option("--out", dump_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  if (index_cmd->parsed()) {
    blx_corpus* corpus = nullptr;
    blx_status s = blx_corpus_load(idx_corpus.c_str(), idx_no_lower ? 0 : 1, idx_min_len, &corpus);
    if (s) return fail(s);
    blx_index* index = nullptr;
    s = blx_index_build(corpus, idx_b, idx_o, &index);
    if (!s) s = blx_index_save(index, idx_out.c_str());
    if (!s) {
      std::cout << "tokens=" << blx_index_token_count(index)
                << " vocab=" << blx_index_vocab_size(index)
                << " blocks=" << blx_index_block_count(index) << "\n";
    }
    blx_index_free(index);
    blx_corpus_free(corpus);
    return s ? fail(s) : 0;
  }

  if (vectors_cmd->parsed()) {
    blx_index* index = nullptr;
    blx_status s = blx_index_open(vec_index.c_str(), &index);
    if (s) return fail(s);
    blx_graph* graph = nullptr;
    s = blx_graph_load(vec_graph.c_str(), &graph);
    blx_vectors* vectors = nullptr;
    if (!s) s = blx_vectors_build(index, graph, &vectors);
    if (!s) s = blx_vectors_save(vectors, vec_out.c_str());
    if (!s) {
      std::cout << "synsets=" << blx_vectors_count(vectors) << " dim=" << blx_vectors_dim(vectors)
                << "\n";
    }
    blx_vectors_free(vectors);
    blx_graph_free(graph);
    blx_index_free(index);
    return s ? fail(s) : 0;
  }

  if (select_cmd->parsed() || train_cmd->parsed()) {
    const ConfigArgs& args = select_cmd->parsed() ? select_args : train_args;
    const char* stage = select_cmd->parsed() ? "select" : "train";
    const std::string cfg = args.merged().dump();
    const blx_status s = blx_run_stage(cfg.c_str(), stage);
    return s ? fail(s) : 0;
  }

  if (run_cmd->parsed()) {
    const std::string cfg = run_args.merged().dump();
    char* report = nullptr;
    const blx_status s = blx_run(cfg.c_str(), &report);
    if (report) {
      std::cout << report << "\n";
      blx_string_free(report);
    }
    return s ? fail(s) : 0;
  }

  if (sweep_cmd->parsed()) {
    const std::string cfg = sweep_args.merged().dump();
    char* report = nullptr;
    const blx_status s = blx_sweep(cfg.c_str(), &report);
    if (report) {
      std::cout << report << "\n";
      blx_string_free(report);
    }
    return s ? fail(s) : 0;
  }

  if (walk_cmd->parsed()) {
    blx_graph* graph = nullptr;
    blx_status s = blx_graph_load(walk_graph.c_str(), &graph);
    if (s) return fail(s);
    blx_scores* initial = nullptr;
    s = blx_scores_open(walk_scores.c_str(), &initial);
    blx_scores* refined = nullptr;
    uint32_t iterations = 0;
    int converged = 0;
    if (!s) s = blx_random_walk(graph, initial, walk_alpha, walk_iters, walk_tol, &refined,
                                &iterations, &converged);
    if (!s) s = blx_scores_save(refined, walk_out.c_str());
    if (!s) {
      std::cout << "iterations=" << iterations << " converged=" << (converged ? "yes" : "no")
                << "\n";
    }
    blx_scores_free(refined);
    blx_scores_free(initial);
    blx_graph_free(graph);
    return s ? fail(s) : 0;
  }

  if (eval_cmd->parsed()) {
    blx_scores* predicted = nullptr;
    blx_status s = blx_scores_open(eval_pred.c_str(), &predicted);
    if (s) return fail(s);
    blx_scores* gold = nullptr;
    s = blx_scores_open(eval_gold.c_str(), &gold);
    double tau = 0.0;
    uint64_t h = 0, nd = 0, nu = 0;
    if (!s) s = blx_evaluate(predicted, gold, eval_p, &tau, &h, &nd, &nu);
    if (!s) {
      json report = {{"tau_p", tau}, {"h", h}, {"n_d", nd}, {"n_u", nu}, {"p", eval_p}};
      if (eval_out.empty()) {
        std::cout << report.dump(2) << "\n";
      } else {
        std::ofstream out(eval_out);
        out << report.dump(2) << "\n";
      }
    }
    blx_scores_free(gold);
    blx_scores_free(predicted);
    return s ? fail(s) : 0;
  }

  if (dump_cmd->parsed()) {
    const std::string cfg = dump_args.merged().dump();
    const blx_status s =
        blx_dump_tokens(cfg.c_str(), dump_scores.c_str(), dump_begin, dump_end, dump_out.c_str());
    return s ? fail(s) : 0;
  }

  return 0;
}
