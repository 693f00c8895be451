#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "healsim/errors.hpp"
#include "healsim/model.hpp"
#include "healsim/rng.hpp"

using namespace healsim;

namespace {

Dataset make_dataset(std::size_t dim, std::vector<std::vector<double>> rows,
                     std::vector<int> labels, int num_classes) {
  Dataset ds;
  ds.dim = dim;
  ds.n = rows.size();
  for (const auto& r : rows)
    for (double v : r) ds.features.push_back(v);
  ds.labels = std::move(labels);
  ds.num_classes = num_classes;
  ds.validate();
  return ds;
}

DataShard whole(const Dataset& ds) {
  DataShard shard;
  shard.owner = 0;
  shard.dataset = &ds;
  for (std::size_t i = 0; i < ds.n; ++i) shard.indices.push_back(i);
  return shard;
}

ModelParams random_model(const ModelSpec& spec, Rng& rng) {
  ModelParams m;
  m.spec = spec;
  m.values.resize(spec.param_count());
  for (auto& v : m.values) v = 0.5 * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("one binary SGD step matches the hand-derived gradient") {
  // w=[0.5,-0.25], b=0.1, x=[1,2], y=1:
  //   z = 0.5 - 0.5 + 0.1 = 0.1, sigma = 1/(1+e^-0.1)
  //   dw = (sigma-1)*x, db = sigma-1
  const Dataset ds = make_dataset(2, {{1.0, 2.0}}, {1}, 2);
  ModelParams m;
  m.spec = {ModelKind::BinaryLogistic, 2, 1};
  m.values = {0.5, -0.25, 0.1};
  Hyperparams hp;
  hp.learning_rate = 0.2;
  hp.weight_decay = 0.0;
  Rng rng(1);
  const ModelParams next = train_step(m, whole(ds), hp, rng);

  const double sigma = 1.0 / (1.0 + std::exp(-0.1));
  const double g = sigma - 1.0;
  CHECK(next.values[0] == doctest::Approx(0.5 - 0.2 * g * 1.0).epsilon(1e-14));
  CHECK(next.values[1] == doctest::Approx(-0.25 - 0.2 * g * 2.0).epsilon(1e-14));
  CHECK(next.values[2] == doctest::Approx(0.1 - 0.2 * g).epsilon(1e-14));
}

TEST_CASE("weight decay pulls parameters toward zero") {
  const Dataset ds = make_dataset(1, {{0.0}}, {0}, 2);
  ModelParams m;
  m.spec = {ModelKind::BinaryLogistic, 1, 1};
  m.values = {2.0, 0.0};
  Hyperparams hp;
  hp.learning_rate = 0.1;
  hp.weight_decay = 0.5;
  Rng rng(1);
  // x=0 => data gradient on w is 0; only decay acts on w.
  const ModelParams next = train_step(m, whole(ds), hp, rng);
  CHECK(next.values[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0).epsilon(1e-14));
}

TEST_CASE("analytic gradient agrees with central finite differences") {
  Rng meta(42);
  int cases = 0;
  while (cases < 1000) {
    const bool binary = meta.below(2) == 0;
    const std::size_t dim = 1 + meta.below(6);
    const std::size_t classes = binary ? 2 : 2 + meta.below(4);
    ModelSpec spec;
    spec.kind = binary ? ModelKind::BinaryLogistic : ModelKind::MultinomialLogistic;
    spec.input_dim = dim;
    spec.num_classes = binary ? 1 : classes;

    const std::size_t n = 1 + meta.below(8);
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : rows[i]) v = meta.normal();
      labels[i] = static_cast<int>(meta.below(classes));
    }
    const Dataset ds = make_dataset(dim, rows, labels, static_cast<int>(classes));
    const DataShard shard = whole(ds);
    ModelParams m = random_model(spec, meta);

    std::vector<double> grad;
    gradient_on(m, shard, grad);
    REQUIRE(grad.size() == m.values.size());

    const double eps = 1e-5;
    for (std::size_t p = 0; p < m.values.size(); ++p) {
      ModelParams up = m, down = m;
      up.values[p] += eps;
      down.values[p] -= eps;
      const double fd = (loss_on(up, shard) - loss_on(down, shard)) / (2.0 * eps);
      const double scale = std::max({std::abs(fd), std::abs(grad[p]), 1e-7});
      REQUIRE(std::abs(grad[p] - fd) / scale < 1e-4);
    }
    ++cases;
  }
  CHECK(cases == 1000);
}

TEST_CASE("loss_on matches the closed-form binary cross entropy") {
  const Dataset ds = make_dataset(1, {{2.0}, {-1.0}}, {1, 0}, 2);
  ModelParams m;
  m.spec = {ModelKind::BinaryLogistic, 1, 1};
  m.values = {1.0, 0.5};  // z = x + 0.5
  auto ce = [](double z, int y) {
    const double p = 1.0 / (1.0 + std::exp(-z));
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
  };
  const double expected = 0.5 * (ce(2.5, 1) + ce(-0.5, 0));
  CHECK(loss_on(m, whole(ds)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("predict follows the documented tie rules") {
  ModelParams bin;
  bin.spec = {ModelKind::BinaryLogistic, 1, 1};
  bin.values = {1.0, 0.0};
  const std::vector<double> zero{0.0}, pos{1.0}, neg{-1.0};
  CHECK(predict(bin, zero) == 0);  // z == 0 is not > 0
  CHECK(predict(bin, pos) == 1);
  CHECK(predict(bin, neg) == 0);

  ModelParams multi;
  multi.spec = {ModelKind::MultinomialLogistic, 1, 3};
  multi.values.assign(multi.spec.param_count(), 0.0);  // all scores equal
  CHECK(predict(multi, pos) == 0);                     // lowest index wins ties
}

TEST_CASE("init_params is bounded, sized, and reproducible") {
  const ModelSpec spec{ModelKind::MultinomialLogistic, 7, 4};
  const ModelParams a = init_params(spec, 5);
  const ModelParams b = init_params(spec, 5);
  const ModelParams c = init_params(spec, 6);
  CHECK(a.values.size() == spec.param_count());
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  for (double v : a.values) {
    CHECK(v >= -0.05);
    CHECK(v <= 0.05);
  }
}

TEST_CASE("full-batch training consumes no randomness") {
  const Dataset ds = make_dataset(2, {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, {0, 1, 1}, 2);
  ModelParams m = init_params({ModelKind::BinaryLogistic, 2, 1}, 3);
  Hyperparams hp;

  Rng used(77), untouched(77);
  train_step(m, whole(ds), hp, used);
  CHECK(used.next_u64() == untouched.next_u64());

  hp.batch_size = 10;  // >= n behaves exactly like full batch
  Rng used2(77);
  const ModelParams full = train_step(m, whole(ds), hp, used2);
  Rng used3(77);
  hp.batch_size = 0;
  const ModelParams zero = train_step(m, whole(ds), hp, used3);
  CHECK(full.values == zero.values);
}

TEST_CASE("mini-batch training consumes randomness and is reproducible") {
  const Dataset ds = make_dataset(1, {{1.0}, {2.0}, {-1.0}, {0.5}}, {1, 1, 0, 0}, 2);
  ModelParams m = init_params({ModelKind::BinaryLogistic, 1, 1}, 9);
  Hyperparams hp;
  hp.batch_size = 1;

  Rng r1(5), r2(5), probe(5);
  const ModelParams a = train_step(m, whole(ds), hp, r1);
  const ModelParams b = train_step(m, whole(ds), hp, r2);
  CHECK(a.values == b.values);
  CHECK(r1.next_u64() != probe.next_u64());
}

TEST_CASE("a zero learning rate leaves the model untouched") {
  const Dataset ds = make_dataset(1, {{1.0}}, {1}, 2);
  ModelParams m = init_params({ModelKind::BinaryLogistic, 1, 1}, 4);
  Hyperparams hp;
  hp.learning_rate = 0.0;
  hp.weight_decay = 0.3;
  Rng rng(1);
  const ModelParams next = train_step(m, whole(ds), hp, rng);
  CHECK(next.values == m.values);
}

TEST_CASE("one full-batch step reduces the training loss") {
  Rng meta(12);
  for (int i = 0; i < 50; ++i) {
    const std::size_t dim = 2 + meta.below(4);
    std::vector<std::vector<double>> rows(12, std::vector<double>(dim));
    std::vector<int> labels(12);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (auto& v : rows[r]) v = meta.normal();
      labels[r] = static_cast<int>(meta.below(2));
    }
    const Dataset ds = make_dataset(dim, rows, labels, 2);
    ModelParams m = random_model({ModelKind::BinaryLogistic, dim, 1}, meta);
    Hyperparams hp;
    hp.learning_rate = 0.05;
    Rng rng(1);
    const ModelParams next = train_step(m, whole(ds), hp, rng);
    CHECK(loss_on(next, whole(ds)) < loss_on(m, whole(ds)));
  }
}

TEST_CASE("average_models matches a brute-force mean and ignores order") {
  Rng meta(2024);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t dim = 1 + meta.below(8);
    const ModelSpec spec{ModelKind::BinaryLogistic, dim, 1};
    const std::size_t count = 1 + meta.below(10);
    std::vector<ModelParams> models;
    for (std::size_t i = 0; i < count; ++i) models.push_back(random_model(spec, meta));

    const ModelParams mean = average_models(models);
    for (std::size_t p = 0; p < mean.values.size(); ++p) {
      double sum = 0.0;
      for (const auto& m : models) sum += m.values[p];
      const double expect = sum / static_cast<double>(count);
      const double scale = std::max(std::abs(expect), 1.0);
      REQUIRE(std::abs(mean.values[p] - expect) / scale < 1e-15);
    }

    std::vector<ModelParams> shuffled = models;
    meta.shuffle(shuffled);
    const ModelParams mean2 = average_models(shuffled);
    for (std::size_t p = 0; p < mean.values.size(); ++p) {
      const double scale = std::max(std::abs(mean.values[p]), 1.0);
      REQUIRE(std::abs(mean.values[p] - mean2.values[p]) / scale < 1e-12);
    }
  }
}

TEST_CASE("ModelAverager rejects mixed specs and empty finishes") {
  ModelAverager avg;
  CHECK_THROWS_AS(avg.finish(), PreconditionError);
  ModelParams a = init_params({ModelKind::BinaryLogistic, 2, 1}, 1);
  ModelParams b = init_params({ModelKind::BinaryLogistic, 3, 1}, 1);
  avg.add(a);
  CHECK_THROWS_AS(avg.add(b), ShapeError);
  CHECK_THROWS_AS(average_models({a, b}), ShapeError);
  CHECK_THROWS_AS(average_models({}), PreconditionError);
}

TEST_CASE("averaging one model returns it bitwise") {
  const ModelParams a = init_params({ModelKind::MultinomialLogistic, 5, 3}, 8);
  const ModelParams mean = average_models({a});
  CHECK(mean.values == a.values);
}

TEST_CASE("evaluate equals a per-sample prediction loop") {
  Rng meta(55);
  for (int c = 0; c < 50; ++c) {
    const std::size_t dim = 1 + meta.below(5);
    const std::size_t classes = 2 + meta.below(3);
    std::vector<std::vector<double>> rows(20, std::vector<double>(dim));
    std::vector<int> labels(20);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (auto& v : rows[r]) v = meta.normal();
      labels[r] = static_cast<int>(meta.below(classes));
    }
    const Dataset ds = make_dataset(dim, rows, labels, static_cast<int>(classes));
    ModelSpec spec;
    spec.kind = classes == 2 ? ModelKind::BinaryLogistic : ModelKind::MultinomialLogistic;
    spec.input_dim = dim;
    spec.num_classes = classes == 2 ? 1 : classes;
    const ModelParams m = random_model(spec, meta);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n; ++i)
      if (predict(m, ds.row(i)) == ds.labels[i]) ++correct;
    CHECK(evaluate(m, ds) == doctest::Approx(static_cast<double>(correct) / ds.n));
  }
}

TEST_CASE("hyperparameter validation rejects broken values") {
  Hyperparams hp;
  hp.learning_rate = -0.1;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp.learning_rate = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp.learning_rate = 0.1;
  hp.weight_decay = -1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
}
