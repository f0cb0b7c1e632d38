#include "blocklex/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "blocklex/error.hpp"
#include "blocklex/io.hpp"
#include "blocklex/rng.hpp"

namespace blocklex {

namespace {

constexpr uint32_t kModelMagic = 0x4c444c42;  // "BLDL"
constexpr uint32_t kModelVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// softmax over two units, numerically stable
void softmax2(const double* z, double* p) {
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m);
  const double e1 = std::exp(z[1] - m);
  const double s = e0 + e1;
  p[0] = e0 / s;
  p[1] = e1 / s;
}

double dot_sparse(const std::vector<double>& w, const SparseVector& x) {
  double s = 0.0;
  for (const auto& [i, v] : x.entries) s += w[i] * v;
  return s;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::Arousal: return "arousal";
    case Axis::Positive: return "positive";
    case Axis::Negative: return "negative";
  }
  return "arousal";
}

Axis axis_from_name(std::string_view name) {
  if (name == "arousal") return Axis::Arousal;
  if (name == "positive") return Axis::Positive;
  if (name == "negative") return Axis::Negative;
  Error::config("unknown axis '" + std::string(name) + "'");
}

const ScoreTable::Entry* ScoreTable::find(const std::string& id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const Entry& e, const std::string& key) { return e.id < key; });
  if (it != entries.end() && it->id == id) return &*it;
  return nullptr;
}

void ScoreTable::set(const std::string& id, double score, Provenance prov) {
  if (!(score >= 0.0 && score <= 1.0)) Error::numeric("score out of [0,1] for synset " + id);
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const Entry& e, const std::string& key) { return e.id < key; });
  if (it != entries.end() && it->id == id) {
    it->score = score;
    it->prov = prov;
  } else {
    entries.insert(it, Entry{id, score, prov});
  }
}

namespace {

std::string_view prov_name(Provenance p) {
  switch (p) {
    case Provenance::Seed: return "seed";
    case Provenance::Predicted: return "predicted";
    case Provenance::Propagated: return "propagated";
  }
  return "predicted";
}

Provenance prov_from_name(std::string_view name) {
  if (name == "seed") return Provenance::Seed;
  if (name == "predicted") return Provenance::Predicted;
  if (name == "propagated") return Provenance::Propagated;
  Error::data("unknown provenance '" + std::string(name) + "'");
}

}  // namespace

void ScoreTable::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Error::data("cannot write score file: " + path);
  for (const auto& e : entries) {
    out << e.id << '\t' << io::format_double(e.score) << '\t' << prov_name(e.prov) << '\n';
  }
  if (!out) Error::data("write failure on score file: " + path);
}

ScoreTable ScoreTable::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Error::data("cannot open score file: " + path);
  ScoreTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const size_t t1 = line.find('\t');
    if (t1 == std::string::npos) Error::data("expected tab-separated columns at " + where);
    const size_t t2 = line.find('\t', t1 + 1);
    Entry e;
    e.id = line.substr(0, t1);
    const std::string score_str =
        t2 == std::string::npos ? line.substr(t1 + 1) : line.substr(t1 + 1, t2 - t1 - 1);
    try {
      e.score = std::stod(score_str);
    } catch (const std::exception&) {
      Error::data("invalid score at " + where);
    }
    if (!(e.score >= 0.0 && e.score <= 1.0)) Error::data("score out of [0,1] at " + where);
    // the provenance column is optional so hand-labeled gold files load too
    e.prov = t2 == std::string::npos ? Provenance::Seed : prov_from_name(line.substr(t2 + 1));
    if (!table.entries.empty() && !(table.entries.back().id < e.id))
      Error::data("score file not strictly ordered by synset id at " + where);
    table.entries.push_back(std::move(e));
  }
  if (in.bad()) Error::data("read failure on score file: " + path);
  return table;
}

std::vector<uint32_t> NetSpec::default_hidden(uint32_t input_dim) {
  std::vector<uint32_t> hidden;
  uint32_t width = input_dim;
  for (int i = 0; i < 2; ++i) {
    width = std::max<uint32_t>(8, width / 2);
    hidden.push_back(width);
  }
  return hidden;
}

void NetSpec::validate() const {
  if (input_dim == 0) Error::config("net input dimension must be positive");
  for (size_t i = 0; i < hidden.size(); ++i) {
    if (hidden[i] == 0) Error::config("hidden layer sizes must be positive");
    if (i > 0 && hidden[i] > hidden[i - 1])
      Error::config("hidden layer sizes must be non-increasing");
  }
  if (epochs == 0) Error::config("epoch count must be positive");
  if (batch_size == 0) Error::config("batch size must be positive");
  if (adam.step <= 0 || adam.eps <= 0) Error::config("Adam step size and epsilon must be positive");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1))
    Error::config("Adam betas must lie in [0,1)");
}

std::vector<uint32_t> NeuralNet::layer_dims() const {
  std::vector<uint32_t> dims;
  dims.push_back(spec.input_dim);
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(2);
  return dims;
}

NeuralNet NeuralNet::init(const NetSpec& spec, uint64_t rng_seed) {
  spec.validate();
  NeuralNet net;
  net.spec = spec;
  Rng rng(rng_seed);
  auto dims = net.layer_dims();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const uint32_t fan_in = dims[l];
    const uint32_t fan_out = dims[l + 1];
    Matrix w = Matrix::zeros(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
    for (double& x : w.data) x = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

namespace {

// Forward pass capturing the post-activation values of every layer.
// activations[0] is unused (the input stays sparse); the output layer holds
// raw pre-activation values for classification and sigmoid values for
// regression.
struct ForwardState {
  std::vector<std::vector<double>> activations;  // per non-input layer
};

void forward_pass(const NeuralNet& net, const SparseVector& x, ForwardState& state) {
  if (x.dim != net.spec.input_dim) Error::config("input dimensionality mismatch");
  const size_t layers = net.weights.size();
  state.activations.resize(layers);
  for (size_t l = 0; l < layers; ++l) {
    const Matrix& w = net.weights[l];
    auto& out = state.activations[l];
    out = net.biases[l];
    if (l == 0) {
      for (const auto& [i, v] : x.entries) {
        for (uint32_t r = 0; r < w.rows; ++r) out[r] += w.at(r, i) * v;
      }
    } else {
      const auto& prev = state.activations[l - 1];
      for (uint32_t r = 0; r < w.rows; ++r) {
        double s = out[r];
        const double* row = &w.data[static_cast<size_t>(r) * w.cols];
        for (uint32_t c = 0; c < w.cols; ++c) s += row[c] * prev[c];
        out[r] = s;
      }
    }
    const bool is_output = l + 1 == layers;
    if (!is_output || net.spec.task == Task::Regression) {
      for (double& z : out) z = sigmoid(z);
    }
  }
}

}  // namespace

std::vector<double> NeuralNet::output(const SparseVector& x) const {
  ForwardState state;
  forward_pass(*this, x, state);
  std::vector<double> out = state.activations.back();
  if (spec.task == Task::Classification) {
    double p[2];
    softmax2(out.data(), p);
    out[0] = p[0];
    out[1] = p[1];
  }
  return out;
}

double NeuralNet::predict(const SparseVector& x) const {
  const auto out = output(x);
  if (spec.task == Task::Classification) return out[1];
  return clamp01(out[0]);
}

NeuralNet::Gradients NeuralNet::Gradients::zeros_like(const NeuralNet& net) {
  Gradients g;
  for (const auto& w : net.weights) g.dw.push_back(Matrix::zeros(w.rows, w.cols));
  for (const auto& b : net.biases) g.db.emplace_back(b.size(), 0.0);
  return g;
}

void NeuralNet::Gradients::scale(double factor) {
  for (auto& m : dw)
    for (double& x : m.data) x *= factor;
  for (auto& b : db)
    for (double& x : b) x *= factor;
}

double NeuralNet::loss_and_gradient(const SparseVector& x, double target, Gradients& acc,
                                    double weight) const {
  ForwardState state;
  forward_pass(*this, x, state);
  const size_t layers = weights.size();
  const auto& out = state.activations.back();

  double loss = 0.0;
  std::vector<double> delta(2, 0.0);  // dLoss/dz of the output layer
  if (spec.task == Task::Classification) {
    if (target != 0.0 && target != 1.0) Error::config("classification target must be 0 or 1");
    const int cls = target == 1.0 ? 1 : 0;
    double p[2];
    softmax2(out.data(), p);
    loss = -std::log(std::max(p[cls], 1e-300));
    delta[0] = p[0] - (cls == 0 ? 1.0 : 0.0);
    delta[1] = p[1] - (cls == 1 ? 1.0 : 0.0);
  } else {
    if (!(target >= 0.0 && target <= 1.0)) Error::config("regression target must lie in [0,1]");
    const double y = out[0];
    loss = std::abs(y - target);
    const double sign = y > target ? 1.0 : (y < target ? -1.0 : 0.0);
    delta[0] = sign * y * (1.0 - y);  // through the output sigmoid
    delta[1] = 0.0;
  }
  loss *= weight;
  delta[0] *= weight;
  delta[1] *= weight;

  // Backward pass.
  std::vector<double> grad = delta;
  for (size_t l = layers; l-- > 0;) {
    const Matrix& w = weights[l];
    auto& dw = acc.dw[l];
    auto& db = acc.db[l];
    for (uint32_t r = 0; r < w.rows; ++r) db[r] += grad[r];
    if (l == 0) {
      for (const auto& [i, v] : x.entries) {
        for (uint32_t r = 0; r < w.rows; ++r) dw.at(r, i) += grad[r] * v;
      }
    } else {
      const auto& prev = state.activations[l - 1];
      for (uint32_t r = 0; r < w.rows; ++r) {
        double* drow = &dw.data[static_cast<size_t>(r) * w.cols];
        const double g = grad[r];
        for (uint32_t c = 0; c < w.cols; ++c) drow[c] += g * prev[c];
      }
      std::vector<double> next(w.cols, 0.0);
      for (uint32_t r = 0; r < w.rows; ++r) {
        const double g = grad[r];
        const double* row = &w.data[static_cast<size_t>(r) * w.cols];
        for (uint32_t c = 0; c < w.cols; ++c) next[c] += g * row[c];
      }
      for (uint32_t c = 0; c < w.cols; ++c) {
        const double a = prev[c];
        next[c] *= a * (1.0 - a);  // sigmoid derivative
      }
      grad = std::move(next);
    }
  }
  return loss;
}

double NeuralNet::loss(const SparseVector& x, double target) const {
  ForwardState state;
  forward_pass(*this, x, state);
  const auto& out = state.activations.back();
  if (spec.task == Task::Classification) {
    const int cls = target == 1.0 ? 1 : 0;
    double p[2];
    softmax2(out.data(), p);
    return -std::log(std::max(p[cls], 1e-300));
  }
  return std::abs(out[0] - target);
}

namespace {

struct AdamState {
  NeuralNet::Gradients m;
  NeuralNet::Gradients v;
  uint64_t t = 0;
};

void adam_step(NeuralNet& net, const NeuralNet::Gradients& grad, AdamState& state,
               const AdamConfig& cfg) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  auto update = [&](double& param, double g, double& m, double& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    param -= cfg.step * mhat / (std::sqrt(vhat) + cfg.eps);
  };
  for (size_t l = 0; l < net.weights.size(); ++l) {
    auto& w = net.weights[l].data;
    const auto& gw = grad.dw[l].data;
    auto& mw = state.m.dw[l].data;
    auto& vw = state.v.dw[l].data;
    for (size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);
    auto& b = net.biases[l];
    const auto& gb = grad.db[l];
    auto& mb = state.m.db[l];
    auto& vb = state.v.db[l];
    for (size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
  }
}

double mean_loss(const NeuralNet& net, const std::vector<TrainExample>& data) {
  double total = 0.0, weight = 0.0;
  for (const auto& ex : data) {
    total += ex.weight * net.loss(*ex.x, ex.target);
    weight += ex.weight;
  }
  return total / weight;
}

}  // namespace

NeuralNet train_nn(const std::vector<TrainExample>& data, const NetSpec& spec, uint64_t rng_seed,
                   TrainReport* report) {
  if (data.empty()) Error::data("training set is empty");
  for (const auto& ex : data) {
    if (ex.x->dim != spec.input_dim) Error::config("training vector dimensionality mismatch");
  }
  NeuralNet net = NeuralNet::init(spec, rng_seed);
  Rng rng(rng_seed ^ 0x9e3779b97f4a7c15ULL);

  if (report) report->initial_loss = mean_loss(net, data);

  AdamState adam;
  adam.m = NeuralNet::Gradients::zeros_like(net);
  adam.v = NeuralNet::Gradients::zeros_like(net);

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto grad = NeuralNet::Gradients::zeros_like(net);

  for (uint32_t epoch = 0; epoch < spec.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += spec.batch_size) {
      const size_t end = std::min(order.size(), start + spec.batch_size);
      for (auto& m : grad.dw) std::fill(m.data.begin(), m.data.end(), 0.0);
      for (auto& b : grad.db) std::fill(b.begin(), b.end(), 0.0);
      double batch_loss = 0.0;
      double batch_weight = 0.0;
      for (size_t i = start; i < end; ++i) {
        const auto& ex = data[order[i]];
        batch_loss += net.loss_and_gradient(*ex.x, ex.target, grad, ex.weight);
        batch_weight += ex.weight;
      }
      const double scale = 1.0 / batch_weight;
      batch_loss *= scale;
      if (!std::isfinite(batch_loss))
        Error::numeric("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
      grad.scale(scale);
      adam_step(net, grad, adam, spec.adam);
    }
  }
  if (report) report->final_loss = mean_loss(net, data);
  return net;
}

double RocchioModel::predict(const SparseVector& x) const {
  if (x.dim != dim) Error::config("input dimensionality mismatch");
  const double xn = [&] {
    double s = 0.0;
    for (const auto& [i, v] : x.entries) s += v * v;
    return std::sqrt(s);
  }();
  auto cosine = [&](const std::vector<double>& c) {
    const double cn = norm(c);
    if (xn == 0.0 || cn == 0.0) return 0.0;
    return dot_sparse(c, x) / (xn * cn);
  };
  return cosine(pos_centroid) > cosine(neg_centroid) ? 1.0 : 0.0;
}

RocchioModel train_rocchio(const std::vector<TrainExample>& data) {
  if (data.empty()) Error::data("training set is empty");
  RocchioModel model;
  model.dim = data.front().x->dim;
  model.pos_centroid.assign(model.dim, 0.0);
  model.neg_centroid.assign(model.dim, 0.0);
  uint64_t n_pos = 0, n_neg = 0;
  for (const auto& ex : data) {
    if (ex.x->dim != model.dim) Error::config("training vector dimensionality mismatch");
    if (ex.target != 0.0 && ex.target != 1.0) Error::config("classification target must be 0 or 1");
    auto& centroid = ex.target == 1.0 ? model.pos_centroid : model.neg_centroid;
    (ex.target == 1.0 ? n_pos : n_neg) += 1;
    for (const auto& [i, v] : ex.x->entries) centroid[i] += v;
  }
  if (n_pos == 0 || n_neg == 0) Error::data("Rocchio training needs both classes");
  for (double& v : model.pos_centroid) v /= static_cast<double>(n_pos);
  for (double& v : model.neg_centroid) v /= static_cast<double>(n_neg);
  return model;
}

double SvmModel::margin(const SparseVector& x) const {
  if (x.dim != dim) Error::config("input dimensionality mismatch");
  return dot_sparse(w, x) + bias;
}

double SvmModel::predict(const SparseVector& x) const { return margin(x) > 0.0 ? 1.0 : 0.0; }

SvmModel train_svm(const std::vector<TrainExample>& data, double lambda, uint32_t epochs,
                   uint64_t rng_seed) {
  if (data.empty()) Error::data("training set is empty");
  if (lambda <= 0.0) Error::config("SVM regularization must be positive");
  if (epochs == 0) Error::config("epoch count must be positive");
  uint64_t n_pos = 0, n_neg = 0;
  const uint32_t dim = data.front().x->dim;
  for (const auto& ex : data) {
    if (ex.x->dim != dim) Error::config("training vector dimensionality mismatch");
    if (ex.target != 0.0 && ex.target != 1.0) Error::config("classification target must be 0 or 1");
    (ex.target == 1.0 ? n_pos : n_neg) += 1;
  }
  if (n_pos == 0 || n_neg == 0) Error::data("SVM training needs both classes");

  SvmModel model;
  model.dim = dim;
  model.w.assign(dim, 0.0);
  // Iterate averaging stabilizes the noisy early steps of the 1/(lambda*t)
  // schedule; the returned model is the mean iterate.
  std::vector<double> w_sum(dim, 0.0);
  double bias_sum = 0.0;
  Rng rng(rng_seed);
  uint64_t t = 0;
  for (uint32_t epoch = 0; epoch < epochs; ++epoch) {
    for (size_t step = 0; step < data.size(); ++step) {
      t += 1;
      const auto& ex = data[rng.below(data.size())];
      const double y = ex.target == 1.0 ? 1.0 : -1.0;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double decay = 1.0 - eta * lambda;
      // the bias rides along as a constant-1 feature, regularized like w
      for (double& wi : model.w) wi *= decay;
      model.bias *= decay;
      if (y * model.margin(*ex.x) < 1.0) {
        for (const auto& [i, v] : ex.x->entries) model.w[i] += eta * y * v;
        model.bias += eta * y;
      }
      for (uint32_t i = 0; i < dim; ++i) w_sum[i] += model.w[i];
      bias_sum += model.bias;
    }
  }
  const double inv = 1.0 / static_cast<double>(t);
  for (uint32_t i = 0; i < dim; ++i) model.w[i] = w_sum[i] * inv;
  model.bias = bias_sum * inv;
  return model;
}

double TrainedModel::predict(const SparseVector& x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

std::string_view TrainedModel::kind() const {
  if (std::holds_alternative<NeuralNet>(model)) return "nn";
  if (std::holds_alternative<RocchioModel>(model)) return "rocchio";
  return "svm";
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Error::data("cannot write model file: " + path);
  io::write_u32(out, kModelMagic);
  io::write_u32(out, kModelVersion);
  io::write_u32(out, static_cast<uint32_t>(radius));
  if (const auto* nn = std::get_if<NeuralNet>(&model)) {
    io::write_u32(out, 0);
    io::write_u32(out, nn->spec.input_dim);
    io::write_u32(out, nn->spec.task == Task::Classification ? 0u : 1u);
    io::write_u32(out, nn->spec.epochs);
    io::write_u32(out, nn->spec.batch_size);
    io::write_f64(out, nn->spec.adam.step);
    io::write_f64(out, nn->spec.adam.beta1);
    io::write_f64(out, nn->spec.adam.beta2);
    io::write_f64(out, nn->spec.adam.eps);
    io::write_u32(out, static_cast<uint32_t>(nn->spec.hidden.size()));
    for (uint32_t h : nn->spec.hidden) io::write_u32(out, h);
    for (const auto& w : nn->weights)
      for (double x : w.data) io::write_f64(out, x);
    for (const auto& b : nn->biases)
      for (double x : b) io::write_f64(out, x);
  } else if (const auto* rocchio = std::get_if<RocchioModel>(&model)) {
    io::write_u32(out, 1);
    io::write_u32(out, rocchio->dim);
    for (double x : rocchio->pos_centroid) io::write_f64(out, x);
    for (double x : rocchio->neg_centroid) io::write_f64(out, x);
  } else {
    const auto& svm = std::get<SvmModel>(model);
    io::write_u32(out, 2);
    io::write_u32(out, svm.dim);
    io::write_f64(out, svm.bias);
    for (double x : svm.w) io::write_f64(out, x);
  }
  if (!out) Error::data("write failure on model file: " + path);
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Error::data("cannot open model file: " + path);
  if (io::read_u32(in) != kModelMagic) Error::data("not a model file: " + path);
  if (io::read_u32(in) != kModelVersion) Error::data("unsupported model version: " + path);
  TrainedModel tm;
  tm.radius = static_cast<int>(io::read_u32(in));
  const uint32_t kind = io::read_u32(in);
  if (kind == 0) {
    NeuralNet nn;
    nn.spec.input_dim = io::read_u32(in);
    nn.spec.task = io::read_u32(in) == 0 ? Task::Classification : Task::Regression;
    nn.spec.epochs = io::read_u32(in);
    nn.spec.batch_size = io::read_u32(in);
    nn.spec.adam.step = io::read_f64(in);
    nn.spec.adam.beta1 = io::read_f64(in);
    nn.spec.adam.beta2 = io::read_f64(in);
    nn.spec.adam.eps = io::read_f64(in);
    const uint32_t depth = io::read_u32(in);
    for (uint32_t i = 0; i < depth; ++i) nn.spec.hidden.push_back(io::read_u32(in));
    auto dims = nn.layer_dims();
    for (size_t l = 0; l + 1 < dims.size(); ++l)
      nn.weights.push_back(Matrix::zeros(dims[l + 1], dims[l]));
    for (auto& w : nn.weights)
      for (double& x : w.data) x = io::read_f64(in);
    for (size_t l = 0; l + 1 < dims.size(); ++l) nn.biases.emplace_back(dims[l + 1], 0.0);
    for (auto& b : nn.biases)
      for (double& x : b) x = io::read_f64(in);
    tm.model = std::move(nn);
  } else if (kind == 1) {
    RocchioModel m;
    m.dim = io::read_u32(in);
    m.pos_centroid.resize(m.dim);
    m.neg_centroid.resize(m.dim);
    for (double& x : m.pos_centroid) x = io::read_f64(in);
    for (double& x : m.neg_centroid) x = io::read_f64(in);
    tm.model = std::move(m);
  } else if (kind == 2) {
    SvmModel m;
    m.dim = io::read_u32(in);
    m.bias = io::read_f64(in);
    m.w.resize(m.dim);
    for (double& x : m.w) x = io::read_f64(in);
    tm.model = std::move(m);
  } else {
    Error::data("unknown model kind in " + path);
  }
  return tm;
}

ScoreTable ensemble_scores(const std::vector<TrainedModel>& models, const std::vector<int>& radii,
                           const std::vector<std::string>& ids,
                           const std::vector<SparseVector>& vectors,
                           const std::vector<std::pair<std::string, double>>& seed_labels,
                           Axis axis) {
  if (ids.size() != vectors.size()) Error::config("ids/vectors size mismatch");
  if (models.empty()) Error::config("no models to ensemble");
  for (int k : radii) {
    const bool found = std::any_of(models.begin(), models.end(),
                                   [&](const TrainedModel& m) { return m.radius == k; });
    if (!found) Error::config("no model for radius k=" + std::to_string(k));
  }
  for (const auto& m : models) {
    if (std::find(radii.begin(), radii.end(), m.radius) == radii.end())
      Error::config("model radius k=" + std::to_string(m.radius) + " not in the declared radii");
  }

  ScoreTable table;
  table.axis = axis;
  table.entries.reserve(ids.size());
  const double inv = 1.0 / static_cast<double>(models.size());
  std::vector<std::pair<std::string, double>> scored(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    double sum = 0.0;
    for (const auto& m : models) sum += m.predict(vectors[i]);
    scored[i] = {ids[i], std::min(1.0, std::max(0.0, sum * inv))};
  }
  std::sort(scored.begin(), scored.end());
  for (auto& [id, score] : scored) table.entries.push_back({std::move(id), score, Provenance::Predicted});
  for (const auto& [id, label] : seed_labels) {
    if (!table.find(id)) Error::config("seed label for unknown synset " + id);
    table.set(id, label, Provenance::Seed);
  }
  return table;
}

}  // namespace blocklex
