#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "blocklex/error.hpp"
#include "blocklex/learn.hpp"
#include "blocklex/rng.hpp"
#include "testutil.hpp"

using namespace blocklex;
using testutil::TempDir;

namespace {

SparseVector sv(uint32_t dim, std::initializer_list<std::pair<uint32_t, double>> entries) {
  SparseVector v;
  v.dim = dim;
  for (const auto& [i, x] : entries) v.push_back(i, x);
  return v;
}

SparseVector dense_sv(const std::vector<double>& values) {
  return SparseVector::from_dense(values);
}

// Flattened view over all net parameters for finite-difference probing.
struct ParamRef {
  double* value;
  double* grad;
};

std::vector<ParamRef> flatten(NeuralNet& net, NeuralNet::Gradients& grads) {
  std::vector<ParamRef> refs;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    for (size_t i = 0; i < net.weights[l].data.size(); ++i)
      refs.push_back({&net.weights[l].data[i], &grads.dw[l].data[i]});
    for (size_t i = 0; i < net.biases[l].size(); ++i)
      refs.push_back({&net.biases[l][i], &grads.db[l][i]});
  }
  return refs;
}

NetSpec small_spec(Task task) {
  NetSpec spec;
  spec.input_dim = 3;
  spec.hidden = {5};
  spec.task = task;
  return spec;
}

// Central finite differences against the analytic gradient; returns the
// worst relative error max(|a-n|) / max(1, |a|, |n|).
double gradient_check(NeuralNet& net, const SparseVector& x, double target, double step) {
  auto grads = NeuralNet::Gradients::zeros_like(net);
  net.loss_and_gradient(x, target, grads);
  auto refs = flatten(net, grads);
  double worst = 0.0;
  for (auto& ref : refs) {
    const double saved = *ref.value;
    *ref.value = saved + step;
    const double up = net.loss(x, target);
    *ref.value = saved - step;
    const double down = net.loss(x, target);
    *ref.value = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = *ref.grad;
    const double rel = std::abs(analytic - numeric) /
                       std::max({1.0, std::abs(analytic), std::abs(numeric)});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences on 3-5-2 nets") {
  Rng rng(90210);
  for (int draw = 0; draw < 40; ++draw) {
    const Task task = draw % 2 == 0 ? Task::Classification : Task::Regression;
    NeuralNet net = NeuralNet::init(small_spec(task), rng.next_u64());
    const SparseVector x =
        dense_sv({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const double target =
        task == Task::Classification ? static_cast<double>(rng.below(2)) : rng.uniform(0.05, 0.95);
    CHECK(gradient_check(net, x, target, 1e-4) < 1e-4);
  }
}

TEST_CASE("the first Adam step moves every parameter against its gradient") {
  Rng rng(4711);
  NetSpec spec = small_spec(Task::Classification);
  spec.epochs = 1;
  spec.batch_size = 1;
  for (int draw = 0; draw < 10; ++draw) {
    const uint64_t seed = rng.next_u64();
    NeuralNet before = NeuralNet::init(spec, seed);
    const SparseVector x = dense_sv({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const double target = static_cast<double>(rng.below(2));

    auto grads = NeuralNet::Gradients::zeros_like(before);
    before.loss_and_gradient(x, target, grads);

    const std::vector<TrainExample> data = {{&x, target, 1.0}};
    NeuralNet after = train_nn(data, spec, seed);  // exactly one Adam step

    auto before_refs = flatten(before, grads);
    auto after_grads = NeuralNet::Gradients::zeros_like(after);
    auto after_refs = flatten(after, after_grads);
    REQUIRE(before_refs.size() == after_refs.size());
    for (size_t i = 0; i < before_refs.size(); ++i) {
      const double g = *before_refs[i].grad;
      const double delta = *after_refs[i].value - *before_refs[i].value;
      if (g > 0.0) CHECK(delta < 0.0);
      else if (g < 0.0) CHECK(delta > 0.0);
      else CHECK(delta == 0.0);
    }
  }
}

TEST_CASE("a single regression example is memorized to within 0.01") {
  NetSpec spec;
  spec.input_dim = 2;
  spec.hidden = {4};
  spec.task = Task::Regression;
  spec.epochs = 256;
  spec.batch_size = 32;
  spec.adam.step = 0.01;  // 256 single-example steps need a livelier rate
  const SparseVector x = sv(2, {{0, 1.0}, {1, 0.5}});
  const std::vector<TrainExample> data = {{&x, 0.7, 1.0}};
  TrainReport report;
  const NeuralNet net = train_nn(data, spec, 3, &report);
  CHECK(net.predict(x) == doctest::Approx(0.7).epsilon(0.015));
  CHECK(report.final_loss <= report.initial_loss);
  CHECK(report.final_loss < 0.01);
}

TEST_CASE("a linearly separable 2-D set trains to accuracy 1.0") {
  Rng rng(88);
  std::vector<SparseVector> keep;
  std::vector<double> targets;
  for (int i = 0; i < 40; ++i) {
    const double cls = static_cast<double>(i % 2);
    // class 1 around (1,1), class 0 around (-1,-1); margin ~1
    const double cx = cls == 1.0 ? 1.0 : -1.0;
    keep.push_back(dense_sv({cx + rng.uniform(-0.3, 0.3), cx + rng.uniform(-0.3, 0.3)}));
    targets.push_back(cls);
  }
  std::vector<TrainExample> data;
  for (size_t i = 0; i < keep.size(); ++i) data.push_back({&keep[i], targets[i], 1.0});

  NetSpec spec;
  spec.input_dim = 2;
  spec.hidden = {8};
  spec.task = Task::Classification;
  spec.epochs = 200;
  spec.adam.step = 0.01;
  TrainReport report;
  const NeuralNet net = train_nn(data, spec, 5, &report);
  int correct = 0;
  for (size_t i = 0; i < keep.size(); ++i) {
    const double p = net.predict(keep[i]);
    correct += (p > 0.5) == (targets[i] == 1.0);
  }
  CHECK(correct == 40);
  CHECK(report.final_loss < 0.01);
  CHECK(report.final_loss <= report.initial_loss);

  // a memorized example predicts its own target within 0.05
  CHECK(net.predict(keep[0]) == doctest::Approx(targets[0]).epsilon(0.05));
}

TEST_CASE("zero-weight nets predict 0.5 for both tasks") {
  for (Task task : {Task::Classification, Task::Regression}) {
    NeuralNet net = NeuralNet::init(small_spec(task), 1);
    for (auto& w : net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (auto& b : net.biases) std::fill(b.begin(), b.end(), 0.0);
    CHECK(net.predict(sv(3, {{0, 1.0}})) == 0.5);
  }
}

TEST_CASE("prediction clamps regression output into [0,1]") {
  // force a saturated-positive output by a huge bias on unit 0
  NeuralNet net = NeuralNet::init(small_spec(Task::Regression), 1);
  for (auto& w : net.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  net.biases.back()[0] = 50.0;  // sigmoid -> 1.0 exactly at double precision
  const double p = net.predict(sv(3, {{0, 1.0}}));
  CHECK(p <= 1.0);
  CHECK(p >= 0.0);
  CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("training reports divergence with the epoch index") {
  NetSpec spec = small_spec(Task::Regression);
  spec.adam.step = 1e308;  // weights overflow to inf, then inf - inf = NaN
  spec.epochs = 64;
  const SparseVector x = sv(3, {{0, 1.0}});
  const std::vector<TrainExample> data = {{&x, 0.5, 1.0}};
  try {
    train_nn(data, spec, 1);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("input dimension mismatches are rejected") {
  const NeuralNet net = NeuralNet::init(small_spec(Task::Regression), 1);
  CHECK_THROWS_AS(net.predict(sv(7, {{0, 1.0}})), Error);
}

TEST_CASE("NetSpec validation") {
  NetSpec spec = small_spec(Task::Regression);
  spec.hidden = {4, 8};  // increasing widths
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.hidden = {8, 4};
  CHECK_NOTHROW(spec.validate());
  CHECK(NetSpec::default_hidden(100) == std::vector<uint32_t>{50, 25});
  CHECK(NetSpec::default_hidden(20) == std::vector<uint32_t>{10, 8});  // floor 8
}

TEST_CASE("rocchio predicts by nearest centroid with ties to 0") {
  const SparseVector pos = sv(2, {{0, 1.0}});
  const SparseVector neg = sv(2, {{1, 1.0}});
  const std::vector<TrainExample> data = {{&pos, 1.0, 1.0}, {&neg, 0.0, 1.0}};
  const RocchioModel model = train_rocchio(data);
  CHECK(model.predict(sv(2, {{0, 0.9}, {1, 0.1}})) == 1.0);
  CHECK(model.predict(sv(2, {{0, 0.1}, {1, 0.9}})) == 0.0);
  // equidistant query ties to 0
  CHECK(model.predict(sv(2, {{0, 0.5}, {1, 0.5}})) == 0.0);
  // the zero vector has no direction: cosine 0 on both sides, tie to 0
  CHECK(model.predict(sv(2, {})) == 0.0);
}

TEST_CASE("rocchio centroids are class means") {
  const SparseVector a = sv(2, {{0, 2.0}});
  const SparseVector b = sv(2, {{1, 2.0}});
  const SparseVector n = sv(2, {{0, 1.0}, {1, 1.0}});
  const std::vector<TrainExample> data = {{&a, 1.0, 1.0}, {&b, 1.0, 1.0}, {&n, 0.0, 1.0}};
  const RocchioModel model = train_rocchio(data);
  CHECK(model.pos_centroid == std::vector<double>{1.0, 1.0});
  CHECK(model.neg_centroid == std::vector<double>{1.0, 1.0});

  const SparseVector only = sv(2, {{0, 1.0}});
  const std::vector<TrainExample> single = {{&only, 1.0, 1.0}};
  CHECK_THROWS_AS(train_rocchio(single), Error);
}

TEST_CASE("rocchio predictions are invariant under uniform input scaling") {
  Rng rng(17);
  std::vector<SparseVector> vectors;
  std::vector<TrainExample> data;
  for (int i = 0; i < 30; ++i) {
    vectors.push_back(dense_sv({rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)}));
  }
  for (int i = 0; i < 30; ++i) data.push_back({&vectors[i], static_cast<double>(i % 2), 1.0});
  const RocchioModel model = train_rocchio(data);
  for (int q = 0; q < 20; ++q) {
    SparseVector query = dense_sv({rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)});
    SparseVector scaled = query;
    for (auto& [i, v] : scaled.entries) v *= 37.5;
    CHECK(model.predict(query) == model.predict(scaled));
  }
}

TEST_CASE("svm separates a 1-D set with the boundary near zero") {
  const SparseVector neg = sv(1, {{0, -1.0}});
  const SparseVector pos = sv(1, {{0, 1.0}});
  const std::vector<TrainExample> data = {{&neg, 0.0, 1.0}, {&pos, 1.0, 1.0}};
  const SvmModel model = train_svm(data, 1e-2, 200, 9);

  // grid-search oracle: best threshold t for sign(x - t) over [-1, 1]
  double best_t = -1.0;
  int best_correct = -1;
  for (double t = -1.0; t <= 1.0; t += 0.01) {
    int correct = (1.0 > t ? 1 : 0) + (-1.0 > t ? 0 : 1);
    if (correct > best_correct) {
      best_correct = correct;
      best_t = t;
    }
  }
  CHECK(best_correct == 2);  // separable
  (void)best_t;

  CHECK(model.predict(pos) == 1.0);
  CHECK(model.predict(neg) == 0.0);
  REQUIRE(model.w[0] > 0.0);
  const double boundary = -model.bias / model.w[0];
  CHECK(std::abs(boundary) < 0.5);  // near the oracle's separating region
}

TEST_CASE("svm weights vanish as the regularization grows") {
  Rng rng(3);
  std::vector<SparseVector> vectors;
  for (int i = 0; i < 20; ++i)
    vectors.push_back(dense_sv({rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  std::vector<TrainExample> data;
  for (int i = 0; i < 20; ++i) data.push_back({&vectors[i], static_cast<double>(i % 2), 1.0});

  const SvmModel weak = train_svm(data, 1e-3, 50, 9);
  const SvmModel strong = train_svm(data, 1e9, 50, 9);
  auto norm = [](const std::vector<double>& w) {
    double s = 0;
    for (double x : w) s += x * x;
    return std::sqrt(s);
  };
  CHECK(norm(strong.w) < 1e-6);
  CHECK(norm(strong.w) < norm(weak.w));
}

TEST_CASE("svm training is deterministic in the seed") {
  const SparseVector neg = sv(1, {{0, -1.0}});
  const SparseVector pos = sv(1, {{0, 1.0}});
  const std::vector<TrainExample> data = {{&neg, 0.0, 1.0}, {&pos, 1.0, 1.0}};
  const SvmModel a = train_svm(data, 1e-2, 50, 1234);
  const SvmModel b = train_svm(data, 1e-2, 50, 1234);
  CHECK(a.w == b.w);
  CHECK(a.bias == b.bias);
}

TEST_CASE("svm decisions on separable data survive uniform input scaling") {
  const SparseVector neg = sv(1, {{0, -1.0}});
  const SparseVector pos = sv(1, {{0, 1.0}});
  const std::vector<TrainExample> data = {{&neg, 0.0, 1.0}, {&pos, 1.0, 1.0}};
  const SvmModel model = train_svm(data, 1e-2, 200, 9);

  const SparseVector neg_scaled = sv(1, {{0, -250.0}});
  const SparseVector pos_scaled = sv(1, {{0, 250.0}});
  const std::vector<TrainExample> scaled = {{&neg_scaled, 0.0, 1.0}, {&pos_scaled, 1.0, 1.0}};
  const SvmModel model_scaled = train_svm(scaled, 1e-2, 200, 9);

  CHECK(model.predict(pos) == model_scaled.predict(pos_scaled));
  CHECK(model.predict(neg) == model_scaled.predict(neg_scaled));
}

TEST_CASE("ensemble averages model predictions") {
  // four constant-output "nets" are awkward to build; rocchio models with
  // known centroids act as deterministic 0/1 voters instead
  const SparseVector pos = sv(2, {{0, 1.0}});
  const SparseVector neg = sv(2, {{1, 1.0}});
  const std::vector<TrainExample> data = {{&pos, 1.0, 1.0}, {&neg, 0.0, 1.0}};
  const std::vector<TrainExample> flipped = {{&pos, 0.0, 1.0}, {&neg, 1.0, 1.0}};

  std::vector<TrainedModel> models;
  for (int k : {0, 2}) {
    TrainedModel straight;
    straight.radius = k;
    straight.model = train_rocchio(data);
    models.push_back(std::move(straight));
    TrainedModel contrarian;
    contrarian.radius = k;
    contrarian.model = train_rocchio(flipped);
    models.push_back(std::move(contrarian));
  }
  // per synset: two models vote 1 and two vote 0 -> mean 0.5
  const std::vector<std::string> ids = {"a", "b"};
  const std::vector<SparseVector> vectors = {sv(2, {{0, 0.9}, {1, 0.1}}),
                                             sv(2, {{0, 0.1}, {1, 0.9}})};
  const ScoreTable table = ensemble_scores(models, {0, 2}, ids, vectors, {}, Axis::Arousal);
  CHECK(table.find("a")->score == 0.5);
  CHECK(table.find("b")->score == 0.5);
  CHECK(table.find("a")->prov == Provenance::Predicted);
}

TEST_CASE("ensemble of eight unanimous models yields 1.0 and keeps seed labels") {
  const SparseVector pos = sv(2, {{0, 1.0}});
  const SparseVector neg = sv(2, {{1, 1.0}});
  const std::vector<TrainExample> data = {{&pos, 1.0, 1.0}, {&neg, 0.0, 1.0}};
  std::vector<TrainedModel> models;
  for (int k : {0, 2, 4, 6}) {
    TrainedModel rocchio;
    rocchio.radius = k;
    rocchio.model = train_rocchio(data);
    models.push_back(std::move(rocchio));
    TrainedModel svm;
    svm.radius = k;
    svm.model = train_svm(data, 1e-2, 100, 4);
    models.push_back(std::move(svm));
  }
  const std::vector<std::string> ids = {"a", "b"};
  const std::vector<SparseVector> vectors = {sv(2, {{0, 1.0}}), sv(2, {{0, 0.9}, {1, 0.1}})};
  const ScoreTable table =
      ensemble_scores(models, {0, 2, 4, 6}, ids, vectors, {{"b", 0.25}}, Axis::Positive);
  CHECK(table.find("a")->score == 1.0);  // all eight vote 1
  // the seed label wins over the model mean and is tagged as a seed
  CHECK(table.find("b")->score == 0.25);
  CHECK(table.find("b")->prov == Provenance::Seed);

  CHECK_THROWS_AS(ensemble_scores(models, {0, 2, 4, 6, 8}, ids, vectors, {}, Axis::Positive),
                  Error);  // radius 8 has no model
}

TEST_CASE("ensemble output stays in [0,1] for arbitrary model mixes") {
  Rng rng(21);
  std::vector<SparseVector> train_vecs;
  for (int i = 0; i < 20; ++i)
    train_vecs.push_back(dense_sv({rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)}));
  std::vector<TrainExample> data;
  for (int i = 0; i < 20; ++i) data.push_back({&train_vecs[i], static_cast<double>(i % 2), 1.0});

  NetSpec spec;
  spec.input_dim = 3;
  spec.hidden = {4};
  spec.task = Task::Classification;
  spec.epochs = 10;

  std::vector<TrainedModel> models;
  TrainedModel nn;
  nn.radius = 0;
  nn.model = train_nn(data, spec, 2);
  models.push_back(std::move(nn));
  TrainedModel svm;
  svm.radius = 2;
  svm.model = train_svm(data, 1e-2, 20, 2);
  models.push_back(std::move(svm));

  std::vector<std::string> ids;
  std::vector<SparseVector> vectors;
  for (int i = 0; i < 50; ++i) {
    ids.push_back("s" + std::to_string(i));
    vectors.push_back(dense_sv({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}));
  }
  const ScoreTable table = ensemble_scores(models, {0, 2}, ids, vectors, {}, Axis::Arousal);
  for (const auto& e : table.entries) {
    CHECK(e.score >= 0.0);
    CHECK(e.score <= 1.0);
  }
}

TEST_CASE("model files round-trip exactly") {
  TempDir dir;
  Rng rng(6);
  std::vector<SparseVector> vecs;
  for (int i = 0; i < 16; ++i)
    vecs.push_back(dense_sv({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  std::vector<TrainExample> data;
  for (int i = 0; i < 16; ++i) data.push_back({&vecs[i], static_cast<double>(i % 2), 1.0});

  NetSpec spec;
  spec.input_dim = 3;
  spec.hidden = {5, 4};
  spec.task = Task::Classification;
  spec.epochs = 5;

  TrainedModel nn;
  nn.radius = 4;
  nn.model = train_nn(data, spec, 11);
  nn.save(dir.file("nn.bin"));
  const TrainedModel nn2 = TrainedModel::load(dir.file("nn.bin"));
  CHECK(nn2.radius == 4);
  CHECK(nn2.kind() == "nn");
  const SparseVector probe = dense_sv({0.3, -0.2, 0.9});
  CHECK(nn.predict(probe) == nn2.predict(probe));  // bit-exact parameters

  TrainedModel rocchio;
  rocchio.radius = 2;
  rocchio.model = train_rocchio(data);
  rocchio.save(dir.file("r.bin"));
  const TrainedModel r2 = TrainedModel::load(dir.file("r.bin"));
  CHECK(r2.kind() == "rocchio");
  CHECK(std::get<RocchioModel>(r2.model).pos_centroid ==
        std::get<RocchioModel>(rocchio.model).pos_centroid);

  TrainedModel svm;
  svm.radius = 6;
  svm.model = train_svm(data, 1e-2, 10, 3);
  svm.save(dir.file("s.bin"));
  const TrainedModel s2 = TrainedModel::load(dir.file("s.bin"));
  CHECK(s2.kind() == "svm");
  CHECK(std::get<SvmModel>(s2.model).w == std::get<SvmModel>(svm.model).w);
  CHECK(std::get<SvmModel>(s2.model).bias == std::get<SvmModel>(svm.model).bias);
}

TEST_CASE("score tables save and load losslessly in sorted order") {
  TempDir dir;
  ScoreTable table;
  table.axis = Axis::Arousal;
  Rng rng(14);
  for (int i = 0; i < 60; ++i)
    table.set("syn" + std::to_string(i), rng.uniform01(),
              i % 3 ? Provenance::Predicted : Provenance::Seed);
  table.save_tsv(dir.file("scores.tsv"));
  const ScoreTable loaded = ScoreTable::load_tsv(dir.file("scores.tsv"));
  REQUIRE(loaded.size() == table.size());
  for (size_t i = 0; i < table.entries.size(); ++i) {
    CHECK(loaded.entries[i].id == table.entries[i].id);
    CHECK(loaded.entries[i].score == table.entries[i].score);  // exact text round-trip
    CHECK(loaded.entries[i].prov == table.entries[i].prov);
  }
  // identical content -> identical bytes
  loaded.save_tsv(dir.file("scores2.tsv"));
  CHECK(testutil::read_file(dir.file("scores.tsv")) == testutil::read_file(dir.file("scores2.tsv")));
}
