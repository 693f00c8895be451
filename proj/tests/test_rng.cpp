#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "healsim/rng.hpp"

using namespace healsim;

TEST_CASE("rng replays bit for bit from equal seeds") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng seeds produce distinct streams") {
  Rng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("below stays inside its bound") {
  Rng meta(7);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t bound = 1 + meta.next_u64() % 1000;
    Rng r(meta.next_u64());
    for (int j = 0; j < 20; ++j) CHECK(r.below(bound) < bound);
  }
  Rng r(3);
  for (int i = 0; i < 100; ++i) CHECK(r.below(1) == 0);
}

TEST_CASE("below covers small ranges roughly uniformly") {
  Rng r(11);
  int counts[10] = {};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[r.below(10)];
  for (int c : counts) {
    CHECK(c > draws / 10 - 1200);
    CHECK(c < draws / 10 + 1200);
  }
}

TEST_CASE("uniform lies in [0, 1)") {
  Rng r(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal matches its first two moments") {
  Rng r(17);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("shuffle permutes without losing elements") {
  Rng r(23);
  std::vector<int> v;
  for (int i = 0; i < 50; ++i) v.push_back(i);
  std::vector<int> shuffled = v;
  r.shuffle(shuffled);
  CHECK(shuffled != v);  // 50! makes identity astronomically unlikely
  std::vector<int> sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == v);

  Rng r2(23);
  std::vector<int> again = v;
  r2.shuffle(again);
  CHECK(again == shuffled);
}

TEST_CASE("sample_without_replacement draws distinct pool members") {
  Rng meta(31);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t pool_size = 1 + meta.next_u64() % 30;
    const std::size_t k = meta.next_u64() % (pool_size + 5);
    std::vector<std::uint64_t> pool;
    for (std::size_t j = 0; j < pool_size; ++j) pool.push_back(100 + j);
    Rng r(meta.next_u64());
    const auto picked = r.sample_without_replacement(pool, k);
    CHECK(picked.size() == std::min(k, pool_size));
    std::set<std::uint64_t> seen(picked.begin(), picked.end());
    CHECK(seen.size() == picked.size());
    for (auto v : picked) CHECK((v >= 100 && v < 100 + pool_size));
  }
}

TEST_CASE("derive_seed separates purposes and tag order") {
  const std::uint64_t root = 99;
  CHECK(derive_seed(root, {1, 2}) != derive_seed(root, {2, 1}));
  CHECK(derive_seed(root, {1}) != derive_seed(root, {2}));
  CHECK(derive_seed(root, {1}) != root);
  CHECK(derive_seed(root, {1, 2}) == derive_seed(root, {1, 2}));
  CHECK(derive_seed(1, {7}) != derive_seed(2, {7}));
}
