// speval/manifest.hpp
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

#ifndef SPEVAL_MANIFEST_HPP_
#define SPEVAL_MANIFEST_HPP_

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "speval/common.hpp"
#include "speval/phoneme_table.hpp"
#include "speval/text.hpp"

namespace speval {

enum Metric : int {
  kPronunciation = 0,
  kRhythm = 1,  // rhythm for read speech, fluency for the 5-point corpora
  kIntonation = 2,
};
inline constexpr int kNumMetrics = 3;
inline constexpr const char* kMetricNames[kNumMetrics] = {
    "pronunciation", "rhythm", "intonation"};

inline int MetricFromName(const std::string& name) {
  for (int m = 0; m < kNumMetrics; ++m)
    if (name == kMetricNames[m]) return m;
  Fail("unknown metric: '" + name + "'");
}

/// One aligned canonical phone. Times are seconds.
struct PhoneSegment {
  std::string phone;  // language-prefixed symbol, e.g. "en_AA"
  double start = 0.0;
  double duration = 0.0;
};

/// Per-metric rater scores plus the rating scale.
struct ScoreRecord {
  std::array<std::vector<double>, kNumMetrics> raters;
  double scale_min = 1.0;
  double scale_max = 5.0;

  void Validate(const std::string& context) const {
    Require(scale_max > scale_min, context + ": scale_max must exceed scale_min");
    for (int m = 0; m < kNumMetrics; ++m) {
      Require(!raters[m].empty(), context + ": no rater scores for metric '" +
                                      std::string(kMetricNames[m]) + "'");
      for (double s : raters[m])
        Require(s >= scale_min && s <= scale_max,
                context + ": score " + FormatDouble(s) + " for metric '" +
                    kMetricNames[m] + "' outside scale [" +
                    FormatDouble(scale_min) + ", " + FormatDouble(scale_max) +
                    "]");
    }
  }

  // maps [scale_min, scale_max] onto (-1, +1) training targets
  double Rescale(double s) const {
    return 2.0 * (s - scale_min) / (scale_max - scale_min) - 1.0;
  }
  double BackScale(double r) const {
    return scale_min + (r + 1.0) * (scale_max - scale_min) / 2.0;
  }
};

/// One scored speech sample. Posterior/pitch payloads live in separate files
/// referenced here; refs are kept verbatim and resolved against the manifest
/// directory when loaded.
struct Utterance {
  std::string id;
  std::string language;
  std::vector<PhoneSegment> phones;
  ScoreRecord scores;
  std::string posterior_ref;
  std::string pitch_ref;  // empty when absent
};

/// Half-open frame interval [lo, hi).
struct FrameRange {
  long lo = 0;
  long hi = 0;
  long Size() const { return hi - lo; }
  bool Empty() const { return hi <= lo; }
};

/// Maps a phone segment onto posterior/pitch frames at the given frame step.
/// Boundaries are rounded to the nearest frame; a range that rounds to zero
/// length is widened to one frame so every phone covers at least one frame.
inline FrameRange SegmentFrames(const PhoneSegment& seg, double step) {
  Require(step > 0.0, "frame step must be positive");
  FrameRange r;
  r.lo = std::llround(seg.start / step);
  r.hi = std::llround((seg.start + seg.duration) / step);
  if (r.hi <= r.lo) r.hi = r.lo + 1;
  return r;
}

inline void ValidateUtterance(const Utterance& utt,
                              const MultilingualPhonemeTable& table) {
  const std::string ctx = "utterance '" + utt.id + "'";
  Require(!utt.id.empty(), "utterance with empty id");
  Require(IsLanguageTag(utt.language),
          ctx + ": invalid language tag '" + utt.language + "'");
  Require(!utt.phones.empty(), ctx + ": no phones");
  const std::string prefix = utt.language + "_";
  double prev_end = -1.0;
  for (size_t i = 0; i < utt.phones.size(); ++i) {
    const PhoneSegment& seg = utt.phones[i];
    Require(seg.duration > 0.0, ctx + ": phone " + std::to_string(i) +
                                    " ('" + seg.phone + "') has non-positive duration");
    Require(seg.start >= 0.0, ctx + ": phone " + std::to_string(i) +
                                  " has negative start time");
    Require(seg.phone.rfind(prefix, 0) == 0,
            ctx + ": phone '" + seg.phone + "' does not carry the '" + prefix +
                "' language prefix");
    Require(table.Find(seg.phone) >= 0,
            ctx + ": unknown phoneme symbol '" + seg.phone + "'");
    Require(seg.start >= prev_end - 1e-9,
            ctx + ": phone " + std::to_string(i) + " overlaps its predecessor");
    prev_end = seg.start + seg.duration;
  }
  utt.scores.Validate(ctx);
}

namespace detail {

inline Utterance UtteranceFromJson(const nlohmann::json& j,
                                   const std::string& context) {
  Utterance utt;
  try {
    utt.id = j.at("id").get<std::string>();
    utt.language = j.at("language").get<std::string>();
    for (const auto& p : j.at("phones")) {
      PhoneSegment seg;
      seg.phone = p.at("phone").get<std::string>();
      seg.start = p.at("start").get<double>();
      seg.duration = p.at("dur").get<double>();
      utt.phones.push_back(seg);
    }
    const auto& sc = j.at("scores");
    for (int m = 0; m < kNumMetrics; ++m)
      utt.scores.raters[m] = sc.at(kMetricNames[m]).get<std::vector<double>>();
    utt.scores.scale_min = sc.at("scale_min").get<double>();
    utt.scores.scale_max = sc.at("scale_max").get<double>();
    utt.posterior_ref = j.at("posterior_ref").get<std::string>();
    if (j.contains("pitch_ref")) utt.pitch_ref = j.at("pitch_ref").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    Fail(context + ": " + e.what());
  }
  return utt;
}

inline nlohmann::json UtteranceToJson(const Utterance& utt) {
  nlohmann::json j;
  j["id"] = utt.id;
  j["language"] = utt.language;
  nlohmann::json phones = nlohmann::json::array();
  for (const auto& seg : utt.phones)
    phones.push_back({{"phone", seg.phone}, {"start", seg.start}, {"dur", seg.duration}});
  j["phones"] = std::move(phones);
  nlohmann::json sc;
  for (int m = 0; m < kNumMetrics; ++m) sc[kMetricNames[m]] = utt.scores.raters[m];
  sc["scale_min"] = utt.scores.scale_min;
  sc["scale_max"] = utt.scores.scale_max;
  j["scores"] = std::move(sc);
  j["posterior_ref"] = utt.posterior_ref;
  if (!utt.pitch_ref.empty()) j["pitch_ref"] = utt.pitch_ref;
  return j;
}

}  // namespace detail

/// Loads a line-delimited manifest (one JSON object per line) and validates
/// every utterance against the phoneme table. Errors carry file:line context.
inline std::vector<Utterance> LoadManifest(
    const std::string& path, const MultilingualPhonemeTable& table) {
  auto lines = ReadLines(path);
  std::vector<Utterance> utts;
  std::unordered_set<std::string> ids;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    const std::string ctx = path + ":" + std::to_string(i + 1);
    nlohmann::json j = nlohmann::json::parse(lines[i], nullptr, false);
    if (j.is_discarded()) Fail(ctx + ": manifest line is not valid JSON");
    Utterance utt = detail::UtteranceFromJson(j, ctx);
    try {
      ValidateUtterance(utt, table);
    } catch (const Error& e) {
      Fail(ctx + ": " + e.what());
    }
    Require(ids.insert(utt.id).second,
            ctx + ": duplicate utterance id '" + utt.id + "'");
    utts.push_back(std::move(utt));
  }
  return utts;
}

inline void SaveManifest(const std::string& path,
                         const std::vector<Utterance>& utts) {
  std::string out;
  for (const auto& utt : utts) out += detail::UtteranceToJson(utt).dump() + "\n";
  WriteFile(path, out);
}

}  // namespace speval

#endif  // SPEVAL_MANIFEST_HPP_
