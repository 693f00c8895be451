#include "healsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "healsim/errors.hpp"

namespace healsim {

namespace {

void check_finite(const std::vector<double>& values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(where) + ": non-finite parameter value");
  }
}

void check_shard(const ModelSpec& spec, const DataShard& shard, const char* where) {
  if (shard.dataset == nullptr || shard.empty())
    throw PreconditionError(std::string(where) + ": empty shard");
  if (shard.dataset->dim != spec.input_dim)
    throw ShapeError(std::string(where) + ": shard feature dim " +
                     std::to_string(shard.dataset->dim) + " != model input_dim " +
                     std::to_string(spec.input_dim));
  if (spec.kind == ModelKind::MultinomialLogistic &&
      shard.dataset->num_classes > static_cast<int>(spec.num_classes))
    throw ShapeError(std::string(where) + ": dataset has more classes than the model");
}

// Stable binary cross-entropy pieces. z is the logit, y in {0, 1}.
double binary_loss(double z, int y) {
  return std::max(z, 0.0) - z * static_cast<double>(y) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Adds one sample's gradient (d loss / d params) into acc.
void accumulate_sample_gradient(const ModelParams& params, std::span<const double> x, int y,
                                std::vector<double>& acc, std::vector<double>& scratch) {
  const std::size_t d = params.spec.input_dim;
  if (params.spec.kind == ModelKind::BinaryLogistic) {
    const double* w = params.values.data();
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    const double g = sigmoid(z) - static_cast<double>(y);
    for (std::size_t j = 0; j < d; ++j) acc[j] += g * x[j];
    acc[d] += g;
    return;
  }
  scores(params, x, scratch);
  const std::size_t k = params.spec.num_classes;
  double zmax = scratch[0];
  for (std::size_t c = 1; c < k; ++c) zmax = std::max(zmax, scratch[c]);
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    scratch[c] = std::exp(scratch[c] - zmax);
    sum += scratch[c];
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double g = scratch[c] / sum - (static_cast<int>(c) == y ? 1.0 : 0.0);
    double* row = acc.data() + c * (d + 1);
    for (std::size_t j = 0; j < d; ++j) row[j] += g * x[j];
    row[d] += g;
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (input_dim == 0) throw ConfigError("model spec: input_dim must be positive");
  if (kind == ModelKind::BinaryLogistic) {
    if (num_classes != 1)
      throw ConfigError("model spec: binary-logistic uses num_classes = 1");
  } else {
    if (num_classes < 2)
      throw ConfigError("model spec: multinomial-logistic needs num_classes >= 2");
  }
}

void Hyperparams::validate() const {
  if (learning_rate < 0.0 || !std::isfinite(learning_rate))
    throw ConfigError("hyperparams: learning_rate must be finite and >= 0");
  if (weight_decay < 0.0) throw ConfigError("hyperparams: weight_decay must be >= 0");
}

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, {seed_tag::kInitModel}));
  ModelParams out;
  out.spec = spec;
  out.values.resize(spec.param_count());
  for (double& v : out.values) v = rng.uniform(-0.05, 0.05);
  return out;
}

void scores(const ModelParams& params, std::span<const double> x, std::vector<double>& out) {
  const std::size_t d = params.spec.input_dim;
  const std::size_t rows = params.spec.rows();
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = params.values.data() + r * (d + 1);
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    out[r] = z;
  }
}

int predict(const ModelParams& params, std::span<const double> x) {
  const std::size_t d = params.spec.input_dim;
  if (x.size() != d) throw ShapeError("predict: sample dim mismatch");
  if (params.spec.kind == ModelKind::BinaryLogistic) {
    const double* w = params.values.data();
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    return z > 0.0 ? 1 : 0;
  }
  thread_local std::vector<double> z;
  scores(params, x, z);
  std::size_t best = 0;
  for (std::size_t c = 1; c < z.size(); ++c)
    if (z[c] > z[best]) best = c;
  return static_cast<int>(best);
}

double loss_on(const ModelParams& params, const DataShard& shard) {
  check_shard(params.spec, shard, "loss_on");
  const Dataset& ds = *shard.dataset;
  double total = 0.0;
  if (params.spec.kind == ModelKind::BinaryLogistic) {
    const std::size_t d = params.spec.input_dim;
    const double* w = params.values.data();
    for (std::size_t i : shard.indices) {
      auto x = ds.row(i);
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
      total += binary_loss(z, ds.labels[i]);
    }
  } else {
    std::vector<double> z;
    for (std::size_t i : shard.indices) {
      scores(params, ds.row(i), z);
      double zmax = z[0];
      for (double v : z) zmax = std::max(zmax, v);
      double sum = 0.0;
      for (double v : z) sum += std::exp(v - zmax);
      total += std::log(sum) - (z[ds.labels[i]] - zmax);
    }
  }
  return total / static_cast<double>(shard.size());
}

void gradient_on(const ModelParams& params, const DataShard& shard, std::vector<double>& grad) {
  check_shard(params.spec, shard, "gradient_on");
  grad.assign(params.values.size(), 0.0);
  std::vector<double> scratch;
  const Dataset& ds = *shard.dataset;
  for (std::size_t i : shard.indices)
    accumulate_sample_gradient(params, ds.row(i), ds.labels[i], grad, scratch);
  const double inv = 1.0 / static_cast<double>(shard.size());
  for (double& g : grad) g *= inv;
}

ModelParams train_step(const ModelParams& params, const DataShard& shard, const Hyperparams& hyper,
                       Rng& rng) {
  check_shard(params.spec, shard, "train_step");
  hyper.validate();

  ModelParams out = params;
  const Dataset& ds = *shard.dataset;
  std::vector<double> grad(out.values.size());
  std::vector<double> scratch;

  const std::size_t n = shard.size();
  const bool full_batch = hyper.batch_size == 0 || hyper.batch_size >= n;

  std::vector<std::size_t> order;
  if (!full_batch) {
    order = shard.indices;
    rng.shuffle(order);
  }
  const std::vector<std::size_t>& rows = full_batch ? shard.indices : order;
  const std::size_t batch = full_batch ? n : hyper.batch_size;

  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t end = std::min(start + batch, n);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t p = start; p < end; ++p)
      accumulate_sample_gradient(out, ds.row(rows[p]), ds.labels[rows[p]], grad, scratch);
    const double inv = 1.0 / static_cast<double>(end - start);
    const double lr = hyper.learning_rate;
    const double wd = hyper.weight_decay;
    for (std::size_t j = 0; j < out.values.size(); ++j)
      out.values[j] -= lr * (grad[j] * inv + wd * out.values[j]);
  }
  check_finite(out.values, "train_step");
  return out;
}

ModelParams average_models(const std::vector<ModelParams>& models) {
  if (models.empty()) throw PreconditionError("average_models: empty model list");
  ModelAverager avg;
  for (const auto& m : models) avg.add(m);
  return avg.finish();
}

void ModelAverager::add(const ModelParams& m) {
  if (count_ == 0) {
    spec_ = m.spec;
    sum_.assign(m.values.size(), 0.0);
  } else if (!(m.spec == spec_)) {
    throw ShapeError("average_models: mixed model specs");
  }
  for (std::size_t j = 0; j < sum_.size(); ++j) sum_[j] += m.values[j];
  ++count_;
}

ModelParams ModelAverager::finish() const {
  if (count_ == 0) throw PreconditionError("average_models: empty model list");
  ModelParams out;
  out.spec = spec_;
  out.values.resize(sum_.size());
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t j = 0; j < sum_.size(); ++j) out.values[j] = sum_[j] * inv;
  check_finite(out.values, "average_models");
  return out;
}

double evaluate(const ModelParams& params, const Dataset& test) {
  if (test.n == 0) throw PreconditionError("evaluate: empty test set");
  if (test.dim != params.spec.input_dim)
    throw ShapeError("evaluate: test dim " + std::to_string(test.dim) + " != model input_dim " +
                     std::to_string(params.spec.input_dim));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.n; ++i)
    if (predict(params, test.row(i)) == test.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test.n);
}

double evaluate(const ModelParams& params, const DataShard& shard) {
  check_shard(params.spec, shard, "evaluate");
  std::size_t correct = 0;
  for (std::size_t i : shard.indices)
    if (predict(params, shard.dataset->row(i)) == shard.dataset->labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(shard.size());
}

}  // namespace healsim
