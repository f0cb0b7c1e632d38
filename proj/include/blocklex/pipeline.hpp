#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blocklex/corpus.hpp"
#include "blocklex/learn.hpp"
#include "blocklex/lexnet.hpp"

namespace blocklex {

enum class VectorSource { BlockSegmentation, GlossBow, Embeddings };
enum class SelectionMethod { Igr, Gini, None };
enum class ModelFamily { Nn, RocchioSvm };

struct SelectionConfig {
  SelectionMethod method = SelectionMethod::Gini;
  bool median = true;     // border = median of the per-dimension scores
  double epsilon = 0.01;  // used when median is false
};

struct WalkMode {
  bool enabled = false;
  bool sweep = false;
  double alpha = 0.7;          // fixed-alpha mode
  std::vector<double> alphas;  // sweep grid; empty = 0.0..1.0 step 0.1
  uint32_t max_iters = 200;
  double tol = 1e-9;
};

struct SplitConfig {
  double train = 0.5;
  double val = 0.4;
  double test = 0.1;
  uint64_t seed = 42;
};

struct NnConfig {
  std::vector<uint32_t> hidden;  // empty = default taper from the input width
  uint32_t epochs = 256;
  uint32_t batch_size = 32;
  AdamConfig adam;
  uint64_t seed = 7;
  bool class_weights = false;  // inverse-frequency class weights (classification)
};

struct SvmConfig {
  double lambda = 1e-4;
  uint32_t epochs = 32;
  uint64_t seed = 7;
};

// Declarative pipeline configuration; see parse_run_config for the JSON
// schema. Every report embeds the resolved form.
struct RunConfig {
  std::string corpus_path;
  std::string graph_path;
  std::string lexicon_path;
  std::string gloss_path;       // GlossBow source
  std::string embeddings_path;  // Embeddings source
  std::string gold_test_path;   // synset-level gold for valence axes
  std::string gold_val_path;

  Axis axis = Axis::Arousal;
  Task task = Task::Regression;
  VectorSource source = VectorSource::BlockSegmentation;
  std::vector<uint32_t> block_sizes{120};
  std::vector<double> overlaps{0.75};
  SelectionConfig selection;
  ModelFamily models = ModelFamily::Nn;
  std::vector<int> radii{0, 2, 4, 6};
  WalkMode walk;
  SplitConfig split;
  double vad_hi = 0.6;
  double vad_lo = 0.4;
  std::vector<std::string> positive_seeds;  // valence axes
  std::vector<std::string> negative_seeds;
  NnConfig nn;
  SvmConfig svm;
  bool lowercase = true;
  uint32_t min_token_len = 1;
  double tau_param = 0.5;
  std::string output_dir = "out";
  std::string cache_dir;  // default <output_dir>/cache; BLOCKLEX_CACHE_DIR overrides
  uint32_t jobs = 1;

  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

// Pipeline stages in execution order; running through a stage leaves its
// artifact (and everything upstream) on disk.
enum class Stage { Index, Vectors, Select, Train, Scores, Walk, Eval };
Stage stage_from_name(const std::string& name);

struct RunReport {
  Axis axis = Axis::Arousal;
  Task task = Task::Regression;
  std::string method;  // family + vector source, e.g. "nn-bseg"
  uint32_t b = 0;
  double o = 0.0;
  std::string selection;
  bool walked = false;
  double alpha = 0.0;  // resolved walk alpha (best of the sweep when swept)
  bool has_test = false;
  double tau = 0.0;
  uint64_t h = 0, n_d = 0, n_u = 0;
  bool has_val = false;
  double val_tau = 0.0;
  bool has_train_loss = false;
  double train_initial_loss = 0.0;  // mean over radii, NN family
  double train_final_loss = 0.0;
  std::string run_dir;

  std::string to_json(const RunConfig& cfg) const;
};

// Runs every (b, o) grid point through evaluation, persisting artifacts and
// writing reports.csv / reports.jsonl under the output directory. Stage
// errors carry the stage name; artifacts from completed stages remain.
std::vector<RunReport> run_pipeline(const RunConfig& cfg);

// Runs every grid point through the given stage, reusing cached artifacts.
void run_stage(const RunConfig& cfg, Stage through);

struct SweepRow {
  uint32_t b = 0;
  double o = 0.0;
  std::string selection;
  bool ok = false;
  double val_tau = 0.0;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  size_t best_index = 0;
  RunReport best;  // includes the test evaluation of the winning point
};

// Evaluates the grid on the validation split, picks the best point, and
// computes the test tau only for it. Per-point failures are recorded and the
// sweep continues.
SweepResult sweep_grid(const RunConfig& cfg);

// CSV of (position, token, level) over [begin, end); level is the mean score
// of the synsets listing the token, blank when there is none.
void dump_token_labels(const TokenCorpus& corpus, const SynsetGraph& graph,
                       const ScoreTable& scores, uint64_t begin, uint64_t end, std::ostream& out);

// Synset vector artifact (all synsets, graph order), versioned binary.
void save_vectors_file(const std::string& path, const std::vector<std::string>& ids,
                       const std::vector<SparseVector>& vectors, uint32_t dim);
struct VectorsFile {
  uint32_t dim = 0;
  std::vector<std::string> ids;
  std::vector<SparseVector> vectors;
};
VectorsFile load_vectors_file(const std::string& path);

// Gold labels: TSV `synset-id \t value`, '#' comments; a third column is
// permitted and ignored so score tables can be used directly.
std::vector<std::pair<std::string, double>> load_gold_tsv(const std::string& path);

}  // namespace blocklex
