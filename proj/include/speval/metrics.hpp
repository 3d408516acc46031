// speval/metrics.hpp
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

#ifndef SPEVAL_METRICS_HPP_
#define SPEVAL_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "speval/common.hpp"

namespace speval {

/// Thrown when a correlation operand has zero variance. A silent 0 or NaN
/// would corrupt averaged reports, so this is always an explicit error.
class ZeroVarianceError : public Error {
 public:
  explicit ZeroVarianceError(const std::string& msg) : Error(msg) {}
};

/// Pearson correlation. Two-pass, accumulated in long double.
inline double Pcc(const std::vector<double>& x, const std::vector<double>& y) {
  Require(x.size() == y.size(), "pcc operands differ in length");
  Require(x.size() >= 2, "pcc needs at least 2 samples");
  const size_t n = x.size();
  long double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    long double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0)
    throw ZeroVarianceError("pcc undefined: first operand has zero variance");
  if (syy == 0)
    throw ZeroVarianceError("pcc undefined: second operand has zero variance");
  long double r = sxy / std::sqrt(sxx * syy);
  return static_cast<double>(std::clamp(r, -1.0L, 1.0L));
}

inline double Mse(const std::vector<double>& x, const std::vector<double>& y) {
  Require(x.size() == y.size(), "mse operands differ in length");
  Require(!x.empty(), "mse of empty lists");
  long double acc = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    long double d = x[i] - y[i];
    acc += d * d;
  }
  return static_cast<double>(acc / x.size());
}

enum class Aggregation { kMean, kMedian };

inline Aggregation AggregationFromName(const std::string& name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "median") return Aggregation::kMedian;
  Fail("unknown aggregation mode '" + name + "' (expected mean or median)");
}

inline const char* AggregationName(Aggregation mode) {
  return mode == Aggregation::kMean ? "mean" : "median";
}

inline double AggregateScalar(std::vector<double> values, Aggregation mode) {
  Require(!values.empty(), "aggregating an empty rater list");
  if (mode == Aggregation::kMean) {
    long double acc = 0;
    for (double v : values) acc += v;
    return static_cast<double>(acc / values.size());
  }
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Element-wise mean or median across raters. `raters[r][i]` is rater r's
/// score for item i; all raters must cover the same items.
inline std::vector<double> AggregateRaters(
    const std::vector<std::vector<double>>& raters, Aggregation mode) {
  Require(!raters.empty(), "no raters to aggregate");
  const size_t items = raters[0].size();
  for (const auto& r : raters)
    Require(r.size() == items, "ragged rater lists");
  std::vector<double> out(items);
  std::vector<double> column(raters.size());
  for (size_t i = 0; i < items; ++i) {
    for (size_t r = 0; r < raters.size(); ++r) column[r] = raters[r][i];
    out[i] = AggregateScalar(column, mode);
  }
  return out;
}

/// Human upper bound: mean over raters of PCC(rater_i, aggregate of the
/// others). Needs at least 3 raters so "the rest" is a real aggregate.
inline double InterraterUpperbound(
    const std::vector<std::vector<double>>& raters, Aggregation mode) {
  Require(raters.size() >= 3, "interrater upper bound needs >= 3 raters");
  const size_t items = raters[0].size();
  for (const auto& r : raters)
    Require(r.size() == items, "ragged rater lists");
  long double acc = 0;
  for (size_t i = 0; i < raters.size(); ++i) {
    std::vector<std::vector<double>> rest;
    rest.reserve(raters.size() - 1);
    for (size_t j = 0; j < raters.size(); ++j)
      if (j != i) rest.push_back(raters[j]);
    acc += Pcc(raters[i], AggregateRaters(rest, mode));
  }
  return static_cast<double>(acc / raters.size());
}

}  // namespace speval

#endif  // SPEVAL_METRICS_HPP_
