#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "healsim/types.hpp"

namespace healsim {

/// Dense numeric dataset: n rows of dim features plus one class label each.
struct Dataset {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> features;  // row-major, n * dim
  std::vector<int> labels;       // each in [0, num_classes)
  int num_classes = 0;

  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  void validate() const;
};

/// One node's slice of a dataset, held as row indices into a shared Dataset.
/// Shards from one partition are pairwise disjoint and cover the input.
struct DataShard {
  NodeId owner = 0;
  const Dataset* dataset = nullptr;  // not owned; outlives the shard
  std::vector<std::size_t> indices;

  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
};

/// Per-feature affine transform fitted on training data.
struct NormalizeStats {
  std::vector<double> mean;
  std::vector<double> std_dev;  // 1.0 for zero-variance features
};

/// Parses a numeric CSV. label_column < 0 selects the last column.
/// Label values are mapped to class indices by sorted distinct value.
Dataset load_csv(const std::string& path, int label_column = -1, bool header = false);

/// k Gaussian clusters with unit noise and means at least `separation`
/// apart; class sizes balanced within one row.
Dataset generate_synthetic(std::size_t n, std::size_t dim, std::size_t classes, double separation,
                           std::uint64_t seed);

/// Fits mean/std on ds (sample std, n-1). Zero-variance features pass through.
NormalizeStats fit_normalize(const Dataset& ds);
Dataset apply_normalize(const NormalizeStats& stats, const Dataset& ds);
std::pair<Dataset, NormalizeStats> normalize(const Dataset& ds);

/// Seeded shuffle then split; returns (train, test).
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

/// Seeded shuffle then round-robin assignment; shard sizes differ by at most 1.
std::vector<DataShard> partition_iid(const Dataset& ds, std::size_t n_nodes, std::uint64_t seed);

/// Round-robin split of an arbitrary index list after a seeded shuffle.
/// Shared by partition_iid and the engine's churn reserve handling.
std::vector<std::vector<std::size_t>> partition_indices(std::vector<std::size_t> indices,
                                                        std::size_t n_groups, std::uint64_t seed);

}  // namespace healsim
