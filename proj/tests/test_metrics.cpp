// tests/test_metrics.cpp
//
// Copyright 2026 The speval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "speval/metrics.hpp"
#include "speval/rng.hpp"

using namespace speval;
using Catch::Matchers::ContainsSubstring;

namespace {

// Definitional oracle, independently coded: population covariance over the
// product of population standard deviations.
double PccOracle(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  long double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double cov = 0, vx = 0, vy = 0;
  for (size_t i = 0; i < n; ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  cov /= n;
  vx /= n;
  vy /= n;
  return static_cast<double>(cov / (std::sqrt(vx) * std::sqrt(vy)));
}

}  // namespace

TEST_CASE("pcc endpoints") {
  std::vector<double> x = {1, 2, 3, 5};
  CHECK(Pcc(x, x) == 1.0);
  std::vector<double> neg = {-1, -2, -3, -5};
  CHECK(Pcc(x, neg) == -1.0);
}

TEST_CASE("pcc of (1,2,3) vs (1,2,4) equals the definitional oracle") {
  std::vector<double> x = {1, 2, 3}, y = {1, 2, 4};
  // frozen from the oracle: sqrt(27/28)
  CHECK(Pcc(x, y) == Catch::Approx(0.9819805060619657).epsilon(1e-14));
  CHECK(Pcc(x, y) == Catch::Approx(PccOracle(x, y)).margin(1e-14));
  CHECK(Pcc(x, y) == Catch::Approx(std::sqrt(27.0 / 28.0)).epsilon(1e-14));
}

TEST_CASE("pcc matches the oracle on random lists") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.Int(2, 60);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.Uniform(-5, 5);
      y[i] = rng.Uniform(-5, 5);
    }
    // skip accidental zero-variance draws (possible only for n = 2)
    if (x[0] == x[1] || y[0] == y[1]) continue;
    CHECK(Pcc(x, y) == Catch::Approx(PccOracle(x, y)).margin(1e-12));
  }
}

TEST_CASE("pcc zero variance is an explicit error") {
  std::vector<double> flat = {2, 2, 2}, x = {1, 2, 3};
  CHECK_THROWS_AS(Pcc(flat, x), ZeroVarianceError);
  CHECK_THROWS_AS(Pcc(x, flat), ZeroVarianceError);
  CHECK_THROWS_WITH(Pcc(x, flat), ContainsSubstring("zero variance"));
  CHECK_THROWS_WITH(Pcc({1, 2}, {1, 2, 3}), ContainsSubstring("length"));
  CHECK_THROWS_WITH(Pcc({1}, {2}), ContainsSubstring("at least 2"));
}

TEST_CASE("pcc positive-affine invariance, negation under flips") {
  Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.Int(3, 40);
    std::vector<double> x(n), y(n), ax(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.Uniform(-1, 1);
      y[i] = rng.Uniform(-1, 1);
    }
    const double a = rng.Uniform(0.1, 4.0);
    const double b = rng.Uniform(-3.0, 3.0);
    for (int i = 0; i < n; ++i) ax[i] = a * x[i] + b;
    CHECK(Pcc(ax, y) == Catch::Approx(Pcc(x, y)).margin(1e-12));
    for (int i = 0; i < n; ++i) ax[i] = -a * x[i] + b;
    CHECK(Pcc(ax, y) == Catch::Approx(-Pcc(x, y)).margin(1e-12));
  }
}

TEST_CASE("mse basics") {
  std::vector<double> x = {1, 2}, y = {1, 2};
  CHECK(Mse(x, y) == 0.0);
  CHECK(Mse({0, 0}, {1, 3}) == Catch::Approx(5.0));
  CHECK_THROWS_WITH(Mse({1}, {1, 2}), ContainsSubstring("length"));
}

TEST_CASE("mse scales quadratically") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.Int(1, 30);
    std::vector<double> x(n), y(n), sx(n), sy(n);
    const double a = rng.Uniform(0.1, 3.0);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.Uniform(-2, 2);
      y[i] = rng.Uniform(-2, 2);
      sx[i] = a * x[i];
      sy[i] = a * y[i];
    }
    CHECK(Mse(sx, sy) == Catch::Approx(a * a * Mse(x, y)).margin(1e-12));
  }
}

TEST_CASE("rater aggregation") {
  CHECK(AggregateRaters({{1, 2}, {3, 4}}, Aggregation::kMean) ==
        std::vector<double>{2, 3});
  CHECK(AggregateRaters({{1}, {2}, {10}}, Aggregation::kMedian) ==
        std::vector<double>{2});
  CHECK(AggregateRaters({{4, 7}}, Aggregation::kMean) ==
        std::vector<double>{4, 7});
  CHECK(AggregateRaters({{4, 7}}, Aggregation::kMedian) ==
        std::vector<double>{4, 7});
  CHECK_THROWS_WITH(AggregateRaters({{1, 2}, {3}}, Aggregation::kMean),
                    ContainsSubstring("ragged"));
}

TEST_CASE("mean aggregation commutes with positive-affine rescaling") {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int raters = rng.Int(1, 5), items = rng.Int(1, 20);
    std::vector<std::vector<double>> scores(raters, std::vector<double>(items));
    for (auto& r : scores)
      for (auto& s : r) s = rng.Uniform(1, 5);
    const double a = rng.Uniform(0.5, 2.0), b = rng.Uniform(-1, 1);
    auto agg = AggregateRaters(scores, Aggregation::kMean);
    for (auto& r : scores)
      for (auto& s : r) s = a * s + b;
    auto agg2 = AggregateRaters(scores, Aggregation::kMean);
    for (int i = 0; i < items; ++i)
      CHECK(agg2[i] == Catch::Approx(a * agg[i] + b).margin(1e-12));
  }
}

TEST_CASE("interrater upper bound of identical raters is 1") {
  std::vector<std::vector<double>> raters(4, std::vector<double>{1, 2, 3, 4});
  CHECK(InterraterUpperbound(raters, Aggregation::kMean) ==
        Catch::Approx(1.0).margin(1e-12));
  CHECK(InterraterUpperbound(raters, Aggregation::kMedian) ==
        Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("interrater upper bound matches an independent leave-one-out pass") {
  Rng rng(47);
  const int n_raters = 4, n_items = 50;
  std::vector<std::vector<double>> raters(n_raters,
                                          std::vector<double>(n_items));
  for (int i = 0; i < n_items; ++i) {
    const double latent = rng.Uniform(1, 5);
    for (int r = 0; r < n_raters; ++r)
      raters[r][i] = latent + 0.3 * rng.Normal();
  }
  for (auto mode : {Aggregation::kMean, Aggregation::kMedian}) {
    // independent recomputation
    long double acc = 0;
    for (int i = 0; i < n_raters; ++i) {
      std::vector<std::vector<double>> rest;
      for (int j = 0; j < n_raters; ++j)
        if (j != i) rest.push_back(raters[j]);
      std::vector<double> agg(n_items);
      for (int t = 0; t < n_items; ++t) {
        std::vector<double> col;
        for (auto& r : rest) col.push_back(r[t]);
        std::sort(col.begin(), col.end());
        if (mode == Aggregation::kMean) {
          long double s = 0;
          for (double v : col) s += v;
          agg[t] = static_cast<double>(s / col.size());
        } else {
          agg[t] = col.size() % 2 ? col[col.size() / 2]
                                  : 0.5 * (col[col.size() / 2 - 1] +
                                           col[col.size() / 2]);
        }
      }
      acc += PccOracle(raters[i], agg);
    }
    const double oracle = static_cast<double>(acc / n_raters);
    CHECK(InterraterUpperbound(raters, mode) ==
          Catch::Approx(oracle).margin(1e-12));
  }
}

TEST_CASE("interrater upper bound needs 3 raters") {
  std::vector<std::vector<double>> two(2, std::vector<double>{1, 2, 3});
  CHECK_THROWS_WITH(InterraterUpperbound(two, Aggregation::kMean),
                    ContainsSubstring(">= 3"));
}

TEST_CASE("aggregation and rhythm-class names parse strictly") {
  CHECK(AggregationFromName("mean") == Aggregation::kMean);
  CHECK(AggregationFromName("median") == Aggregation::kMedian);
  CHECK_THROWS_WITH(AggregationFromName("mode"),
                    ContainsSubstring("unknown aggregation"));
}
