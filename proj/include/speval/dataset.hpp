// speval/dataset.hpp
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

#ifndef SPEVAL_DATASET_HPP_
#define SPEVAL_DATASET_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "speval/features.hpp"
#include "speval/manifest.hpp"
#include "speval/metrics.hpp"
#include "speval/par.hpp"
#include "speval/scorer.hpp"
#include "speval/trainer.hpp"

namespace speval {

/// Feature matrix plus aggregated rater targets for one utterance; the unit
/// that training and evaluation consume.
struct LabeledFeatures {
  std::string id;
  std::string language;
  Matrix features;  // (n_phones + 1) x width
  FeatureLayout layout;
  std::array<double, kNumMetrics> target_raw;  // aggregated, rater scale
  double scale_min = 0.0;
  double scale_max = 1.0;
};

inline LabeledFeatures MakeLabeled(const Utterance& utt, PhoneFeatureMatrix f,
                                   Aggregation mode) {
  LabeledFeatures out;
  out.id = utt.id;
  out.language = utt.language;
  out.features = std::move(f.rows);
  out.layout = f.layout;
  for (int m = 0; m < kNumMetrics; ++m)
    out.target_raw[m] = AggregateScalar(utt.scores.raters[m], mode);
  out.scale_min = utt.scores.scale_min;
  out.scale_max = utt.scores.scale_max;
  return out;
}

/// Loads `<dir>/<id>.feat` for every utterance and checks that all files
/// share one layout.
inline std::vector<LabeledFeatures> LoadFeatureDir(
    const std::vector<Utterance>& utts, const std::string& dir,
    Aggregation mode, int jobs = 1) {
  std::vector<LabeledFeatures> out(utts.size());
  ParallelFor(static_cast<long>(utts.size()), jobs, [&](long i) {
    const auto path =
        (std::filesystem::path(dir) / (utts[i].id + ".feat")).string();
    PhoneFeatureMatrix f = LoadFeatures(path);
    Require(f.language == utts[i].language,
            path + ": feature language '" + f.language +
                "' does not match manifest language '" + utts[i].language + "'");
    out[i] = MakeLabeled(utts[i], std::move(f), mode);
  });
  for (size_t i = 1; i < out.size(); ++i)
    Require(out[i].layout == out[0].layout,
            "feature layout of '" + out[i].id + "' differs from '" +
                out[0].id + "'");
  return out;
}

/// Rescales targets into (-1, +1) and selects the model's metrics.
inline Dataset ToDataset(const std::vector<LabeledFeatures>& data,
                         const std::vector<int>& metrics) {
  Dataset out;
  out.reserve(data.size());
  for (const auto& item : data) {
    SeqExample<double> ex;
    ex.id = item.id;
    ex.language = item.language;
    ex.features = item.features;
    ex.target.resize(static_cast<long>(metrics.size()));
    const double half = (item.scale_max - item.scale_min) / 2.0;
    for (size_t i = 0; i < metrics.size(); ++i)
      ex.target(static_cast<long>(i)) =
          (item.target_raw[metrics[i]] - item.scale_min) / half - 1.0;
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::map<std::string, Dataset> SplitByLanguage(
    const std::vector<LabeledFeatures>& data, const std::vector<int>& metrics) {
  std::map<std::string, std::vector<LabeledFeatures>> by_lang;
  for (const auto& item : data) by_lang[item.language].push_back(item);
  std::map<std::string, Dataset> out;
  for (auto& [lang, items] : by_lang) out[lang] = ToDataset(items, metrics);
  return out;
}

}  // namespace speval

#endif  // SPEVAL_DATASET_HPP_
