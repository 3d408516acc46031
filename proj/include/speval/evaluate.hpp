// speval/evaluate.hpp
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

#ifndef SPEVAL_EVALUATE_HPP_
#define SPEVAL_EVALUATE_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "speval/dataset.hpp"
#include "speval/metrics.hpp"
#include "speval/par.hpp"
#include "speval/scorer.hpp"
#include "speval/trainer.hpp"

namespace speval {

struct MetricResult {
  long count = 0;
  double mse = 0.0;                // original rater scale
  std::optional<double> pcc;       // absent when undefined
  std::string pcc_error;           // reason when absent
};

/// MSE is reported on the original rater scale (rescaled-space MSE is the
/// original-scale value divided by ((max-min)/2)^2). An undefined PCC is
/// recorded as an error per metric instead of a sentinel value.
struct MetricReport {
  std::array<std::optional<MetricResult>, kNumMetrics> metrics;
  Aggregation aggregation = Aggregation::kMean;

  std::string ToTable() const {
    std::string out = "metric          count  mse        pcc\n";
    for (int m = 0; m < kNumMetrics; ++m) {
      if (!metrics[m]) continue;
      const MetricResult& r = *metrics[m];
      char line[128];
      if (r.pcc)
        std::snprintf(line, sizeof(line), "%-15s %-6ld %-10.4f %.4f\n",
                      kMetricNames[m], r.count, r.mse, *r.pcc);
      else
        std::snprintf(line, sizeof(line), "%-15s %-6ld %-10.4f undefined (%s)\n",
                      kMetricNames[m], r.count, r.mse, r.pcc_error.c_str());
      out += line;
    }
    return out;
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["aggregation"] = AggregationName(aggregation);
    for (int m = 0; m < kNumMetrics; ++m) {
      if (!metrics[m]) continue;
      nlohmann::json e;
      e["count"] = metrics[m]->count;
      e["mse"] = metrics[m]->mse;
      if (metrics[m]->pcc)
        e["pcc"] = *metrics[m]->pcc;
      else
        e["pcc_error"] = metrics[m]->pcc_error;
      j["metrics"][kMetricNames[m]] = std::move(e);
    }
    return j;
  }
};

struct UtterancePrediction {
  std::string id;
  std::array<std::optional<double>, kNumMetrics> predicted;  // rater scale
  std::array<double, kNumMetrics> target;
};

/// Back-scales model predictions onto the rater scale and compares them with
/// the aggregated targets.
inline MetricReport Evaluate(const ScoringModelD& model,
                             const std::vector<LabeledFeatures>& data,
                             Aggregation mode, int jobs = 1,
                             std::vector<UtterancePrediction>* dump = nullptr) {
  Require(!data.empty(), "empty evaluation set");
  Require(data[0].layout == model.Layout(),
          "feature layout does not match the model (features '" +
              data[0].layout.SlotsString() + "' width " +
              std::to_string(data[0].layout.width) + ", model '" +
              model.Layout().SlotsString() + "' width " +
              std::to_string(model.Layout().width) + ")");
  const long n = static_cast<long>(data.size());
  std::vector<Prediction> preds(n);
  ParallelFor(n, jobs, [&](long i) {
    preds[i] = Predict(model, data[i].features, data[i].language,
                       data[i].scale_min, data[i].scale_max);
  });
  if (dump) {
    dump->clear();
    dump->reserve(n);
    for (long i = 0; i < n; ++i)
      dump->push_back({data[i].id, preds[i].score, data[i].target_raw});
  }
  MetricReport report;
  report.aggregation = mode;
  for (int m : model.Metrics()) {
    std::vector<double> y_pred(n), y_true(n);
    for (long i = 0; i < n; ++i) {
      y_pred[i] = *preds[i].score[m];
      y_true[i] = data[i].target_raw[m];
    }
    MetricResult r;
    r.count = n;
    r.mse = Mse(y_pred, y_true);
    try {
      r.pcc = Pcc(y_pred, y_true);
    } catch (const ZeroVarianceError& e) {
      r.pcc_error = e.what();
    }
    report.metrics[m] = std::move(r);
  }
  return report;
}

}  // namespace speval

#endif  // SPEVAL_EVALUATE_HPP_
