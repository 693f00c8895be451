#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "healsim/dataset.hpp"
#include "healsim/rng.hpp"

namespace healsim {

enum class ModelKind { BinaryLogistic, MultinomialLogistic };

struct ModelSpec {
  ModelKind kind = ModelKind::BinaryLogistic;
  std::size_t input_dim = 0;
  std::size_t num_classes = 1;  // 1 for the binary kind

  /// Score rows: one for binary, one per class for multinomial.
  std::size_t rows() const { return kind == ModelKind::BinaryLogistic ? 1 : num_classes; }
  std::size_t param_count() const { return (input_dim + 1) * rows(); }
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct Hyperparams {
  double learning_rate = 0.1;
  double weight_decay = 0.0;
  std::size_t batch_size = 0;  // 0 = full batch

  void validate() const;
};

/// Flat parameter vector. Layout per score row: input_dim weights, then the
/// bias. All operations keep every value finite.
struct ModelParams {
  ModelSpec spec;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * (spec.input_dim + 1), spec.input_dim + 1};
  }
};

/// Uniform[-0.05, 0.05] init, bit-reproducible per (spec, seed).
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed);

/// Class scores for one sample; binary yields the single logit.
void scores(const ModelParams& params, std::span<const double> x, std::vector<double>& out);

/// Predicted class index. Binary: 1 iff sigmoid(z) > 0.5; ties go to class 0.
/// Multinomial: argmax, lowest index on ties.
int predict(const ModelParams& params, std::span<const double> x);

/// Mean cross-entropy over the shard (no decay term).
double loss_on(const ModelParams& params, const DataShard& shard);

/// Mean data gradient over the shard, written to grad (resized). No decay.
void gradient_on(const ModelParams& params, const DataShard& shard, std::vector<double>& grad);

/// One epoch of mini-batch SGD with L2 weight decay:
///   w <- w - lr * (mean batch gradient + weight_decay * w)
/// Full batch (batch_size 0) takes exactly one step and draws nothing from
/// rng; otherwise rng shuffles the epoch order.
ModelParams train_step(const ModelParams& params, const DataShard& shard, const Hyperparams& hyper,
                       Rng& rng);

/// Elementwise arithmetic mean, summed in list order.
ModelParams average_models(const std::vector<ModelParams>& models);

/// Streaming mean over models added in call order, without buffering copies.
class ModelAverager {
 public:
  void add(const ModelParams& m);
  bool empty() const { return count_ == 0; }
  std::size_t count() const { return count_; }
  /// Mean of everything added so far. Requires at least one add.
  ModelParams finish() const;

 private:
  ModelSpec spec_;
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

/// Fraction of correctly classified rows, in [0, 1].
double evaluate(const ModelParams& params, const Dataset& test);
double evaluate(const ModelParams& params, const DataShard& shard);

}  // namespace healsim
