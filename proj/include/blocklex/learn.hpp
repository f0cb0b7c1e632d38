#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blocklex/sparse.hpp"

namespace blocklex {

enum class Axis { Arousal, Positive, Negative };
enum class Provenance { Seed, Predicted, Propagated };

std::string_view axis_name(Axis axis);
Axis axis_from_name(std::string_view name);

// Per-synset real-valued labels in [0,1] with provenance; the currency
// passed between learner, propagation, and evaluation. Entries are kept
// sorted by synset id.
struct ScoreTable {
  struct Entry {
    std::string id;
    double score = 0.0;
    Provenance prov = Provenance::Predicted;
  };
  Axis axis = Axis::Arousal;
  std::vector<Entry> entries;

  const Entry* find(const std::string& id) const;
  void set(const std::string& id, double score, Provenance prov);
  size_t size() const { return entries.size(); }

  // TSV `synset-id \t score \t provenance`, ordered by synset id.
  void save_tsv(const std::string& path) const;
  static ScoreTable load_tsv(const std::string& path);
};

struct AdamConfig {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class Task { Classification, Regression };

struct NetSpec {
  uint32_t input_dim = 0;
  std::vector<uint32_t> hidden;  // strictly positive, non-increasing
  Task task = Task::Regression;
  uint32_t epochs = 256;
  uint32_t batch_size = 32;
  AdamConfig adam;

  // Geometric taper from the input width: ratio 1/2, floor 8, two layers.
  static std::vector<uint32_t> default_hidden(uint32_t input_dim);
  void validate() const;
};

struct Matrix {
  uint32_t rows = 0, cols = 0;
  std::vector<double> data;  // row-major

  static Matrix zeros(uint32_t rows, uint32_t cols) {
    return Matrix{rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0)};
  }
  double& at(uint32_t r, uint32_t c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(uint32_t r, uint32_t c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// Feedforward net: sigmoid hidden layers and a two-unit output layer.
// Classification trains cross-entropy over the softmax of the output units
// and predicts the positive-class probability (unit 1). Regression puts a
// sigmoid on the output layer, trains mean absolute error of unit 0 and
// ignores unit 1.
class NeuralNet {
 public:
  NetSpec spec;
  std::vector<Matrix> weights;  // layer l: (dims[l+1] x dims[l])
  std::vector<std::vector<double>> biases;

  static NeuralNet init(const NetSpec& spec, uint64_t rng_seed);

  std::vector<uint32_t> layer_dims() const;

  // Output-unit values after the task's output activation (softmax
  // probabilities / sigmoid levels).
  std::vector<double> output(const SparseVector& x) const;

  double predict(const SparseVector& x) const;

  struct Gradients {
    std::vector<Matrix> dw;
    std::vector<std::vector<double>> db;
    static Gradients zeros_like(const NeuralNet& net);
    void scale(double factor);
  };

  // Adds weight times this example's parameter gradients into acc and
  // returns weight times its loss.
  double loss_and_gradient(const SparseVector& x, double target, Gradients& acc,
                           double weight = 1.0) const;
  double loss(const SparseVector& x, double target) const;
};

struct TrainExample {
  const SparseVector* x = nullptr;
  double target = 0.0;
  double weight = 1.0;  // loss weight; used by the NN trainer
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Mini-batch Adam for the configured epoch count; weight init and batch
// order are deterministic in rng_seed. Throws a numeric error naming the
// epoch if the loss stops being finite.
NeuralNet train_nn(const std::vector<TrainExample>& data, const NetSpec& spec, uint64_t rng_seed,
                   TrainReport* report = nullptr);

// Nearest-centroid classifier by cosine similarity; ties predict 0.
struct RocchioModel {
  uint32_t dim = 0;
  std::vector<double> pos_centroid;
  std::vector<double> neg_centroid;

  double predict(const SparseVector& x) const;  // 0 or 1
};

RocchioModel train_rocchio(const std::vector<TrainExample>& data);

// Linear SVM trained by the Pegasos stochastic subgradient method on the
// hinge loss with L2 regularization; the bias is unregularized.
struct SvmModel {
  uint32_t dim = 0;
  std::vector<double> w;
  double bias = 0.0;

  double margin(const SparseVector& x) const;
  double predict(const SparseVector& x) const;  // 0 or 1 (margin <= 0 -> 0)
};

SvmModel train_svm(const std::vector<TrainExample>& data, double lambda, uint32_t epochs,
                   uint64_t rng_seed);

struct TrainedModel {
  int radius = 0;
  std::variant<NeuralNet, RocchioModel, SvmModel> model;

  double predict(const SparseVector& x) const;
  std::string_view kind() const;  // "nn" | "rocchio" | "svm"

  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);
};

// Arithmetic mean of the per-model predictions over every synset; entries in
// seed_labels keep their given value with provenance Seed.
ScoreTable ensemble_scores(const std::vector<TrainedModel>& models, const std::vector<int>& radii,
                           const std::vector<std::string>& ids,
                           const std::vector<SparseVector>& vectors,
                           const std::vector<std::pair<std::string, double>>& seed_labels,
                           Axis axis);

}  // namespace blocklex
