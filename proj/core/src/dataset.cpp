#include "healsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "healsim/errors.hpp"
#include "healsim/rng.hpp"

namespace healsim {

void Dataset::validate() const {
  if (features.size() != n * dim) throw ShapeError("dataset: feature buffer size != n * dim");
  if (labels.size() != n) throw ShapeError("dataset: label count != n");
  if (num_classes < 1) throw ShapeError("dataset: num_classes < 1");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw ShapeError("dataset: label out of range");
}

Dataset load_csv(const std::string& path, int label_column, bool header) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);

  Dataset ds;
  std::vector<double> raw_labels;
  std::string line;
  std::size_t lineno = 0;
  std::size_t arity = 0;
  bool first_data_row = true;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header && lineno == 1) continue;

    std::vector<double> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      std::size_t consumed = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      while (consumed < cell.size() && std::isspace(static_cast<unsigned char>(cell[consumed])))
        ++consumed;
      if (consumed != cell.size() || cell.empty())
        throw ParseError("load_csv: " + path + " row " + std::to_string(lineno) + ", column " +
                         std::to_string(cells.size() + 1) + ": not a number: '" + cell + "'");
      cells.push_back(v);
    }

    if (first_data_row) {
      arity = cells.size();
      if (arity < 2) throw ParseError("load_csv: " + path + ": rows need >= 2 columns");
      int lc = label_column < 0 ? static_cast<int>(arity) - 1 : label_column;
      if (lc >= static_cast<int>(arity))
        throw ConfigError("load_csv: label_column " + std::to_string(label_column) +
                          " out of range for " + std::to_string(arity) + " columns");
      ds.dim = arity - 1;
      first_data_row = false;
    } else if (cells.size() != arity) {
      throw ParseError("load_csv: " + path + " row " + std::to_string(lineno) + ": expected " +
                       std::to_string(arity) + " columns, got " + std::to_string(cells.size()));
    }

    const std::size_t lc =
        label_column < 0 ? arity - 1 : static_cast<std::size_t>(label_column);
    raw_labels.push_back(cells[lc]);
    for (std::size_t j = 0; j < arity; ++j)
      if (j != lc) ds.features.push_back(cells[j]);
    ++ds.n;
  }

  if (ds.n == 0) throw ParseError("load_csv: " + path + ": no data rows");

  std::vector<double> classes = raw_labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  ds.num_classes = static_cast<int>(classes.size());
  ds.labels.reserve(ds.n);
  for (double v : raw_labels) {
    auto it = std::lower_bound(classes.begin(), classes.end(), v);
    ds.labels.push_back(static_cast<int>(it - classes.begin()));
  }
  ds.validate();
  return ds;
}

Dataset generate_synthetic(std::size_t n, std::size_t dim, std::size_t classes, double separation,
                           std::uint64_t seed) {
  if (classes < 2 || n < classes || dim < 1)
    throw ConfigError("generate_synthetic: need n >= classes >= 2 and dim >= 1");

  // Axis-aligned means: class j sits at separation * (1 + j/dim) along axis
  // j % dim, so every pair of means is at least `separation` apart.
  Rng rng(derive_seed(seed, {seed_tag::kSyntheticData}));
  Dataset ds;
  ds.n = n;
  ds.dim = dim;
  ds.num_classes = static_cast<int>(classes);
  ds.features.resize(n * dim);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % classes;
    ds.labels[i] = static_cast<int>(k);
    double* x = ds.features.data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j) x[j] = rng.normal();
    x[k % dim] += separation * (1.0 + static_cast<double>(k / dim));
  }
  return ds;
}

NormalizeStats fit_normalize(const Dataset& ds) {
  if (ds.n < 2) throw PreconditionError("fit_normalize: need at least 2 rows");
  NormalizeStats st;
  st.mean.assign(ds.dim, 0.0);
  st.std_dev.assign(ds.dim, 1.0);
  for (std::size_t i = 0; i < ds.n; ++i) {
    auto x = ds.row(i);
    for (std::size_t j = 0; j < ds.dim; ++j) st.mean[j] += x[j];
  }
  for (double& m : st.mean) m /= static_cast<double>(ds.n);
  std::vector<double> var(ds.dim, 0.0);
  for (std::size_t i = 0; i < ds.n; ++i) {
    auto x = ds.row(i);
    for (std::size_t j = 0; j < ds.dim; ++j) {
      const double d = x[j] - st.mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < ds.dim; ++j) {
    if (var[j] == 0.0) {
      st.mean[j] = 0.0;  // identity transform for constant features
    } else {
      st.std_dev[j] = std::sqrt(var[j] / static_cast<double>(ds.n - 1));
    }
  }
  return st;
}

Dataset apply_normalize(const NormalizeStats& stats, const Dataset& ds) {
  if (stats.mean.size() != ds.dim)
    throw ShapeError("apply_normalize: stats fitted for dim " + std::to_string(stats.mean.size()) +
                     ", dataset has dim " + std::to_string(ds.dim));
  Dataset out = ds;
  for (std::size_t i = 0; i < out.n; ++i) {
    double* x = out.features.data() + i * out.dim;
    for (std::size_t j = 0; j < out.dim; ++j) x[j] = (x[j] - stats.mean[j]) / stats.std_dev[j];
  }
  return out;
}

std::pair<Dataset, NormalizeStats> normalize(const Dataset& ds) {
  NormalizeStats st = fit_normalize(ds);
  return {apply_normalize(st, ds), std::move(st)};
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.n = rows.size();
  out.dim = ds.dim;
  out.num_classes = ds.num_classes;
  out.features.reserve(out.n * out.dim);
  out.labels.reserve(out.n);
  for (std::size_t i : rows) {
    auto x = ds.row(i);
    out.features.insert(out.features.end(), x.begin(), x.end());
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("split_train_test: test_fraction must lie in (0, 1)");
  const auto n_test =
      static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(ds.n)));
  if (n_test == 0 || n_test >= ds.n)
    throw ConfigError("split_train_test: fraction " + std::to_string(test_fraction) +
                      " leaves an empty split for n = " + std::to_string(ds.n));

  std::vector<std::size_t> order(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, {seed_tag::kSplit}));
  rng.shuffle(order);

  std::vector<std::size_t> test_rows(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> train_rows(order.begin() + n_test, order.end());
  return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

std::vector<std::vector<std::size_t>> partition_indices(std::vector<std::size_t> indices,
                                                        std::size_t n_groups, std::uint64_t seed) {
  if (n_groups == 0) throw ConfigError("partition_indices: n_groups must be positive");
  Rng rng(seed);
  rng.shuffle(indices);
  std::vector<std::vector<std::size_t>> groups(n_groups);
  for (std::size_t p = 0; p < indices.size(); ++p) groups[p % n_groups].push_back(indices[p]);
  return groups;
}

std::vector<DataShard> partition_iid(const Dataset& ds, std::size_t n_nodes, std::uint64_t seed) {
  if (n_nodes == 0 || ds.n < n_nodes)
    throw ConfigError("partition_iid: need 1 <= n_nodes <= rows (" + std::to_string(n_nodes) +
                      " nodes, " + std::to_string(ds.n) + " rows)");
  std::vector<std::size_t> indices(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) indices[i] = i;
  auto groups = partition_indices(std::move(indices), n_nodes,
                                  derive_seed(seed, {seed_tag::kPartition}));
  std::vector<DataShard> shards(n_nodes);
  for (std::size_t g = 0; g < n_nodes; ++g) {
    shards[g].owner = static_cast<NodeId>(g);
    shards[g].dataset = &ds;
    shards[g].indices = std::move(groups[g]);
  }
  return shards;
}

}  // namespace healsim
