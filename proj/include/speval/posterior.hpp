// speval/posterior.hpp
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

#ifndef SPEVAL_POSTERIOR_HPP_
#define SPEVAL_POSTERIOR_HPP_

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "speval/common.hpp"
#include "speval/manifest.hpp"
#include "speval/text.hpp"

namespace speval {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Text format shared by posterior, pitch and feature files:
//   #step_ms=<int>
//   <comma separated column labels>        (posterior files only)
//   <comma separated decimal row>          (one per frame)

/// frames x phones posterior probabilities at a fixed frame step.
/// Rows are normalized over the phone columns.
struct PosteriorMatrix {
  double step = 0.01;  // seconds per frame
  std::vector<std::string> phone_labels;
  Matrix values;  // frames x phones

  long Frames() const { return values.rows(); }
  long Phones() const { return values.cols(); }

  int FindLabel(const std::string& symbol) const {
    auto it = label_index_.find(symbol);
    return it == label_index_.end() ? -1 : it->second;
  }

  void RebuildIndex() {
    label_index_.clear();
    for (size_t i = 0; i < phone_labels.size(); ++i) {
      auto [it, inserted] =
          label_index_.emplace(phone_labels[i], static_cast<int>(i));
      (void)it;
      Require(inserted, "duplicate posterior phone label '" + phone_labels[i] + "'");
    }
  }

 private:
  std::unordered_map<std::string, int> label_index_;
};

/// frames x 4 pitch observations: raw log pitch, normalized log pitch,
/// delta log pitch, wrapped NCCF. The NCCF column is treated as opaque.
struct PitchFrames {
  double step = 0.01;
  Matrix values;  // frames x 4

  long Frames() const { return values.rows(); }
};

namespace detail {

inline double ParseStepHeader(const std::string& line, const std::string& ctx) {
  Require(line.rfind("#step_ms=", 0) == 0,
          ctx + ": malformed header, expected '#step_ms=<int>'");
  long ms = ParseLong(line.substr(9), ctx);
  Require(ms > 0, ctx + ": step_ms must be positive");
  return static_cast<double>(ms) / 1000.0;
}

inline void ParseCsvRow(const std::string& line, const std::string& ctx,
                        std::vector<double>* out) {
  out->clear();
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out->push_back(ParseDouble(
          std::string_view(line).substr(start, i - start), ctx));
      start = i + 1;
    }
  }
}

}  // namespace detail

/// Loads a posterior file. Rows off unity by at most 1e-3 are renormalized;
/// a row summing below 1e-6 is a hard error, anything else outside the
/// tolerance is a row-sum violation.
inline PosteriorMatrix LoadPosteriors(const std::string& path) {
  auto lines = ReadLines(path);
  Require(lines.size() >= 3, path + ": truncated posterior file");
  PosteriorMatrix post;
  post.step = detail::ParseStepHeader(lines[0], path + ":1");
  post.phone_labels = Split(lines[1], ',');
  Require(!post.phone_labels.empty() && !post.phone_labels[0].empty(),
          path + ":2: empty phone label line");
  post.RebuildIndex();
  // labels must all carry one language's prefix
  auto cut = post.phone_labels[0].find('_');
  Require(cut != std::string::npos,
          path + ":2: phone label '" + post.phone_labels[0] + "' lacks a language prefix");
  const std::string prefix = post.phone_labels[0].substr(0, cut + 1);
  for (const auto& label : post.phone_labels)
    Require(label.rfind(prefix, 0) == 0,
            path + ":2: phone labels mix languages ('" + label + "' vs prefix '" +
                prefix + "')");

  const long cols = static_cast<long>(post.phone_labels.size());
  post.values.resize(static_cast<long>(lines.size()) - 2, cols);
  std::vector<double> row;
  long frames = 0;
  for (size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = path + ":" + std::to_string(i + 1);
    detail::ParseCsvRow(lines[i], ctx, &row);
    Require(static_cast<long>(row.size()) == cols,
            ctx + ": expected " + std::to_string(cols) + " columns, got " +
                std::to_string(row.size()));
    double sum = 0.0;
    for (double v : row) {
      Require(std::isfinite(v) && v >= 0.0 && v <= 1.0 + 1e-3,
              ctx + ": posterior entry outside [0, 1]");
      sum += v;
    }
    Require(sum >= 1e-6, ctx + ": posterior row sums to " + FormatDouble(sum));
    // representation slack so a serialized 0.999 still counts as within 1e-3
    Require(std::abs(sum - 1.0) <= 1e-3 + 1e-12,
            ctx + ": posterior row sum " + FormatDouble(sum) +
                " violates the 1e-3 tolerance");
    for (long c = 0; c < cols; ++c) post.values(frames, c) = row[c] / sum;
    ++frames;
  }
  Require(frames > 0, path + ": no posterior rows");
  post.values.conservativeResize(frames, cols);
  return post;
}

inline void SavePosteriors(const std::string& path, const PosteriorMatrix& post) {
  std::string out = "#step_ms=" +
                    std::to_string(std::llround(post.step * 1000.0)) + "\n";
  for (size_t i = 0; i < post.phone_labels.size(); ++i) {
    if (i) out += ",";
    out += post.phone_labels[i];
  }
  out += "\n";
  for (long r = 0; r < post.values.rows(); ++r) {
    for (long c = 0; c < post.values.cols(); ++c) {
      if (c) out += ",";
      out += FormatDouble(post.values(r, c));
    }
    out += "\n";
  }
  WriteFile(path, out);
}

inline PitchFrames LoadPitch(const std::string& path) {
  auto lines = ReadLines(path);
  Require(lines.size() >= 2, path + ": truncated pitch file");
  PitchFrames pitch;
  pitch.step = detail::ParseStepHeader(lines[0], path + ":1");
  pitch.values.resize(static_cast<long>(lines.size()) - 1, 4);
  std::vector<double> row;
  long frames = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = path + ":" + std::to_string(i + 1);
    detail::ParseCsvRow(lines[i], ctx, &row);
    Require(row.size() == 4, ctx + ": pitch rows must have exactly 4 columns, got " +
                                 std::to_string(row.size()));
    for (double v : row)
      Require(std::isfinite(v), ctx + ": non-finite pitch value");
    for (long c = 0; c < 4; ++c) pitch.values(frames, c) = row[c];
    ++frames;
  }
  Require(frames > 0, path + ": no pitch rows");
  pitch.values.conservativeResize(frames, 4);
  return pitch;
}

inline void SavePitch(const std::string& path, const PitchFrames& pitch) {
  std::string out = "#step_ms=" +
                    std::to_string(std::llround(pitch.step * 1000.0)) + "\n";
  for (long r = 0; r < pitch.values.rows(); ++r) {
    for (long c = 0; c < 4; ++c) {
      if (c) out += ",";
      out += FormatDouble(pitch.values(r, c));
    }
    out += "\n";
  }
  WriteFile(path, out);
}

/// Every phone's frame range must fall inside the posterior matrix.
inline void ValidateFrameBounds(const Utterance& utt,
                                const PosteriorMatrix& post) {
  for (size_t i = 0; i < utt.phones.size(); ++i) {
    FrameRange r = SegmentFrames(utt.phones[i], post.step);
    Require(r.hi <= post.Frames(),
            "utterance '" + utt.id + "': phone " + std::to_string(i) + " ('" +
                utt.phones[i].phone + "') maps to frames [" +
                std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                ") beyond the posterior frame count " +
                std::to_string(post.Frames()));
  }
}

}  // namespace speval

#endif  // SPEVAL_POSTERIOR_HPP_
