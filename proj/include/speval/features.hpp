// speval/features.hpp
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
//
// Per-phone feature stack.
//
// GOP(p) over the aligned frames [lo, hi) of phone p is the time average of
// the log posterior of p:
//
//   GOP(p) = 1/T * sum_t log P(p | o_t),   T = hi - lo.
//
// The posterior rows are already normalized over the phone set, which stands
// in for the path-sum denominator; non-uniform phone priors reweight each row
// and renormalize it before the log. A probability floor keeps zero
// posteriors out of the log.
//
// The per-phone tempo is the pair (1/tau, (tau - mu)/sigma) with (mu, sigma)
// the population statistics of the phone durations in the sentence; the
// duration baseline uses (d_i, d_i - d_{i-1}) instead. Either is spliced with
// its k left/right neighbors, zero-padded at the sentence edges. Pitch
// features are the column means of the frame-level 4-dim pitch vectors over
// the phone's duration.

#ifndef SPEVAL_FEATURES_HPP_
#define SPEVAL_FEATURES_HPP_

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "speval/common.hpp"
#include "speval/embeddings.hpp"
#include "speval/manifest.hpp"
#include "speval/phoneme_table.hpp"
#include "speval/posterior.hpp"
#include "speval/text.hpp"

namespace speval {

struct GopConfig {
  // per-column priors aligned with the posterior's phone labels;
  // empty means uniform
  std::vector<double> priors;
  double epsilon = 1e-10;

  void Validate(long n_cols) const {
    Require(epsilon > 0.0, "gop epsilon must be positive");
    if (priors.empty()) return;
    Require(static_cast<long>(priors.size()) == n_cols,
            "priors size does not match the posterior phone count");
    double sum = 0.0;
    for (double p : priors) {
      Require(p >= 0.0 && std::isfinite(p), "priors must be non-negative");
      sum += p;
    }
    Require(std::abs(sum - 1.0) <= 1e-9, "priors must sum to 1 (got " +
                                             FormatDouble(sum) + ")");
  }
};

/// Aligns a symbol->weight map with posterior columns and normalizes it.
inline std::vector<double> MakePriors(
    const std::vector<std::string>& labels,
    const std::unordered_map<std::string, double>& weights) {
  std::vector<double> priors(labels.size());
  double sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    auto it = weights.find(labels[i]);
    Require(it != weights.end(), "no prior given for phone '" + labels[i] + "'");
    Require(it->second >= 0.0, "negative prior for phone '" + labels[i] + "'");
    priors[i] = it->second;
    sum += priors[i];
  }
  Require(sum > 0.0, "priors sum to zero");
  for (double& p : priors) p /= sum;
  return priors;
}

struct TempoConfig {
  int k = 2;                 // context radius in phones
  double sigma_floor = 1e-6;  // below this the z-score component is zero

  void Validate() const {
    Require(k >= 0, "tempo context radius must be >= 0");
    Require(sigma_floor > 0.0, "sigma floor must be positive");
  }
};

template <class Real>
using MatrixOf = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Core GOP over normalized posterior rows; templated so tests can run it in
/// wide precision. `priors` empty means uniform (rows used as-is).
template <class Real>
Real GopCore(const MatrixOf<Real>& values, long lo, long hi, long col,
             const std::vector<Real>& priors, Real epsilon) {
  Require(hi > lo, "empty frame range");
  Require(lo >= 0 && hi <= values.rows(), "frame range outside the posterior");
  Require(col >= 0 && col < values.cols(), "phone column out of bounds");
  Real acc = 0;
  for (long t = lo; t < hi; ++t) {
    Real p;
    if (priors.empty()) {
      p = values(t, col);
    } else {
      Real denom = 0;
      for (long j = 0; j < values.cols(); ++j) denom += priors[j] * values(t, j);
      p = denom > Real(0) ? priors[col] * values(t, col) / denom : Real(0);
    }
    acc += std::log(std::max(p, epsilon));
  }
  return acc / Real(hi - lo);
}

/// Time average of the log posterior of `col` over `range`. Always <= 0.
inline double ComputeGop(const PosteriorMatrix& post, FrameRange range,
                         long col, const GopConfig& cfg) {
  cfg.Validate(post.Phones());
  return GopCore<double>(post.values, range.lo, range.hi, col, cfg.priors,
                         cfg.epsilon);
}

/// (1/tau, sentence z-score of tau). Population statistics; sentences whose
/// sigma falls below the floor get a zero z component.
inline std::array<double, 2> TempoInstant(
    double tau, const std::vector<double>& sentence_durations,
    const TempoConfig& cfg) {
  cfg.Validate();
  Require(tau > 0.0, "phone duration must be positive");
  Require(!sentence_durations.empty(), "no sentence durations");
  double mu = 0.0;
  for (double d : sentence_durations) mu += d;
  mu /= static_cast<double>(sentence_durations.size());
  double var = 0.0;
  for (double d : sentence_durations) var += (d - mu) * (d - mu);
  var /= static_cast<double>(sentence_durations.size());
  double sigma = std::sqrt(var);
  double z = sigma < cfg.sigma_floor ? 0.0 : (tau - mu) / sigma;
  return {1.0 / tau, z};
}

/// Concatenates the instants at positions i-k .. i+k; positions outside the
/// sentence contribute zero pairs.
inline Vector SpliceContext(const std::vector<std::array<double, 2>>& instants,
                            long i, int k) {
  const long n = static_cast<long>(instants.size());
  Require(i >= 0 && i < n, "phone index out of bounds");
  Require(k >= 0, "context radius must be >= 0");
  Vector out = Vector::Zero(2 * (2 * k + 1));
  for (long j = i - k; j <= i + k; ++j) {
    if (j < 0 || j >= n) continue;
    long base = 2 * (j - (i - k));
    out(base) = instants[j][0];
    out(base + 1) = instants[j][1];
  }
  return out;
}

inline std::vector<std::array<double, 2>> TempoInstants(
    const std::vector<double>& durations, const TempoConfig& cfg) {
  std::vector<std::array<double, 2>> instants;
  instants.reserve(durations.size());
  for (double d : durations) instants.push_back(TempoInstant(d, durations, cfg));
  return instants;
}

inline Vector TempoSplice(const std::vector<std::array<double, 2>>& instants,
                          long i, int k) {
  return SpliceContext(instants, i, k);
}

/// Duration baseline: (d_j, d_j - d_{j-1}) pairs, first difference zero,
/// spliced exactly like the tempo vector.
inline Vector DurationVector(const std::vector<double>& durations, long i,
                             int k) {
  std::vector<std::array<double, 2>> pairs;
  pairs.reserve(durations.size());
  for (size_t j = 0; j < durations.size(); ++j)
    pairs.push_back({durations[j], j == 0 ? 0.0 : durations[j] - durations[j - 1]});
  return SpliceContext(pairs, i, k);
}

/// Column means of the pitch rows in `range`, clamped to the pitch frame
/// count. An empty clamped range yields zeros and a warning.
inline Eigen::Vector4d PitchPhoneAverage(const PitchFrames& pitch,
                                         FrameRange range) {
  long lo = std::max(range.lo, 0L);
  long hi = std::min(range.hi, pitch.Frames());
  if (hi <= lo) {
    log::Warn("phone frame range [" + std::to_string(range.lo) + ", " +
              std::to_string(range.hi) +
              ") is empty after clamping to the pitch frames; using zeros");
    return Eigen::Vector4d::Zero();
  }
  return pitch.values.middleRows(lo, hi - lo).colwise().mean().transpose();
}

enum class TimingSlot { kNone, kTempo, kDuration };

/// Which feature slots are active. Slot order in a row is fixed:
/// gop, tempo|dur, phonemb, pitch; inactive slots are omitted.
struct FeatureSpec {
  bool gop = true;
  TimingSlot timing = TimingSlot::kTempo;
  bool phonemb = true;
  bool pitch = true;
  int emb_dim = 32;
};

struct FeatureLayout {
  FeatureSpec spec;
  int k = 2;
  bool raw = false;  // layout unknown; only the width is meaningful
  int gop_offset = -1;
  int timing_offset = -1;
  int emb_offset = -1;
  int pitch_offset = -1;
  int width = 0;

  static FeatureLayout FromSpec(const FeatureSpec& spec, int k) {
    Require(k >= 0, "context radius must be >= 0");
    FeatureLayout layout;
    layout.spec = spec;
    layout.k = k;
    int off = 0;
    if (spec.gop) {
      layout.gop_offset = off;
      off += 1;
    }
    if (spec.timing != TimingSlot::kNone) {
      layout.timing_offset = off;
      off += 2 * (2 * k + 1);
    }
    if (spec.phonemb) {
      Require(spec.emb_dim >= 1, "embedding dim must be >= 1");
      layout.emb_offset = off;
      off += spec.emb_dim;
    }
    if (spec.pitch) {
      layout.pitch_offset = off;
      off += 4;
    }
    Require(off > 0, "no feature slots selected");
    layout.width = off;
    return layout;
  }

  static FeatureLayout Raw(int width) {
    Require(width >= 1, "feature width must be >= 1");
    FeatureLayout layout;
    layout.raw = true;
    layout.spec = FeatureSpec{false, TimingSlot::kNone, false, false, 0};
    layout.width = width;
    return layout;
  }

  std::string SlotsString() const {
    if (raw) return "raw";
    std::string out;
    auto add = [&out](const char* name) {
      if (!out.empty()) out += ",";
      out += name;
    };
    if (spec.gop) add("gop");
    if (spec.timing == TimingSlot::kTempo) add("tempo");
    if (spec.timing == TimingSlot::kDuration) add("dur");
    if (spec.phonemb) add("phonemb");
    if (spec.pitch) add("pitch");
    return out;
  }

  static FeatureLayout FromSlotsString(const std::string& slots, int k, int dim) {
    FeatureSpec spec{false, TimingSlot::kNone, false, false, dim};
    for (const auto& name : Split(slots, ',')) {
      if (name == "gop") {
        spec.gop = true;
      } else if (name == "tempo") {
        Require(spec.timing == TimingSlot::kNone, "both tempo and dur selected");
        spec.timing = TimingSlot::kTempo;
      } else if (name == "dur") {
        Require(spec.timing == TimingSlot::kNone, "both tempo and dur selected");
        spec.timing = TimingSlot::kDuration;
      } else if (name == "phonemb") {
        spec.phonemb = true;
      } else if (name == "pitch") {
        spec.pitch = true;
      } else {
        Fail("unknown feature slot '" + name + "'");
      }
    }
    return FromSpec(spec, k);
  }

  friend bool operator==(const FeatureLayout& a, const FeatureLayout& b) {
    if (a.raw || b.raw) return a.width == b.width;
    return a.width == b.width && a.spec.gop == b.spec.gop &&
           a.spec.timing == b.spec.timing && a.spec.phonemb == b.spec.phonemb &&
           a.spec.pitch == b.spec.pitch &&
           (a.spec.timing == TimingSlot::kNone || a.k == b.k) &&
           (!a.spec.phonemb || a.spec.emb_dim == b.spec.emb_dim);
  }
};

/// (n_phones + 1) x width feature rows for one utterance; the last row is the
/// end-symbol row (zeros except the embedding slot).
struct PhoneFeatureMatrix {
  Matrix rows;
  FeatureLayout layout;
  std::string language;
};

/// Assembles the active per-phone features for one utterance and appends the
/// end-symbol row. `pitch` may be null when the pitch slot is inactive;
/// `table`/`emb` may be null when the embedding slot is inactive.
inline PhoneFeatureMatrix Assemble(const Utterance& utt,
                                   const PosteriorMatrix& post,
                                   const PitchFrames* pitch,
                                   const MultilingualPhonemeTable* table,
                                   const EmbeddingMatrix* emb,
                                   const GopConfig& gop_cfg,
                                   const TempoConfig& tempo_cfg,
                                   const FeatureSpec& spec) {
  tempo_cfg.Validate();
  FeatureLayout layout = FeatureLayout::FromSpec(spec, tempo_cfg.k);
  if (spec.pitch)
    Require(pitch != nullptr,
            "utterance '" + utt.id + "': pitch slot active but no pitch data");
  if (spec.phonemb) {
    Require(table != nullptr && emb != nullptr,
            "utterance '" + utt.id +
                "': embedding slot active but no table/embedding given");
    Require(emb->Dim() == spec.emb_dim,
            "embedding dim " + std::to_string(emb->Dim()) +
                " does not match the configured D=" + std::to_string(spec.emb_dim));
  }
  ValidateFrameBounds(utt, post);

  const long n = static_cast<long>(utt.phones.size());
  std::vector<double> durations(n);
  std::vector<long> cols(n);
  std::vector<FrameRange> ranges(n);
  for (long i = 0; i < n; ++i) {
    const PhoneSegment& seg = utt.phones[i];
    durations[i] = seg.duration;
    ranges[i] = SegmentFrames(seg, post.step);
    if (spec.gop) {
      int col = post.FindLabel(seg.phone);
      Require(col >= 0, "utterance '" + utt.id + "': phone '" + seg.phone +
                            "' is not a posterior column");
      cols[i] = col;
    }
  }

  std::vector<std::array<double, 2>> instants;
  if (spec.timing == TimingSlot::kTempo) instants = TempoInstants(durations, tempo_cfg);

  PhoneFeatureMatrix out;
  out.layout = layout;
  out.language = utt.language;
  out.rows.setZero(n + 1, layout.width);
  for (long i = 0; i < n; ++i) {
    if (spec.gop)
      out.rows(i, layout.gop_offset) =
          ComputeGop(post, ranges[i], cols[i], gop_cfg);
    if (spec.timing == TimingSlot::kTempo) {
      out.rows.row(i).segment(layout.timing_offset, 2 * (2 * tempo_cfg.k + 1)) =
          TempoSplice(instants, i, tempo_cfg.k).transpose();
    } else if (spec.timing == TimingSlot::kDuration) {
      out.rows.row(i).segment(layout.timing_offset, 2 * (2 * tempo_cfg.k + 1)) =
          DurationVector(durations, i, tempo_cfg.k).transpose();
    }
    if (spec.phonemb)
      out.rows.row(i).segment(layout.emb_offset, spec.emb_dim) =
          Lookup(utt.phones[i].phone, *table, *emb).transpose();
    if (spec.pitch) {
      FrameRange pr = SegmentFrames(utt.phones[i], pitch->step);
      out.rows.row(i).segment(layout.pitch_offset, 4) =
          PitchPhoneAverage(*pitch, pr).transpose();
    }
  }
  // end-symbol row: zeros except the embedding slot
  if (spec.phonemb)
    out.rows.row(n).segment(layout.emb_offset, spec.emb_dim) =
        Lookup(MultilingualPhonemeTable::EosSymbol(utt.language), *table, *emb)
            .transpose();
  Require(out.rows.allFinite(),
          "utterance '" + utt.id + "': non-finite feature value");
  return out;
}

// Feature files reuse the header+rows text format:
//   #slots=gop,tempo,phonemb,pitch
//   #k=2
//   #D=32
//   #language=en
//   <comma separated row per phone, end-symbol row last>

inline void SaveFeatures(const std::string& path, const PhoneFeatureMatrix& f) {
  Require(!f.layout.raw, "cannot persist a raw feature layout");
  std::string out = "#slots=" + f.layout.SlotsString() + "\n";
  out += "#k=" + std::to_string(f.layout.k) + "\n";
  out += "#D=" + std::to_string(f.layout.spec.phonemb ? f.layout.spec.emb_dim : 0) + "\n";
  out += "#language=" + f.language + "\n";
  for (long r = 0; r < f.rows.rows(); ++r) {
    for (long c = 0; c < f.rows.cols(); ++c) {
      if (c) out += ",";
      out += FormatDouble(f.rows(r, c));
    }
    out += "\n";
  }
  WriteFile(path, out);
}

inline PhoneFeatureMatrix LoadFeatures(const std::string& path) {
  auto lines = ReadLines(path);
  Require(lines.size() >= 5, path + ": truncated feature file");
  auto header = [&](size_t idx, const std::string& key) {
    Require(lines[idx].rfind("#" + key + "=", 0) == 0,
            path + ":" + std::to_string(idx + 1) + ": expected '#" + key + "='");
    return lines[idx].substr(key.size() + 2);
  };
  const std::string slots = header(0, "slots");
  const int k = static_cast<int>(ParseLong(header(1, "k"), path + ":2"));
  const int dim = static_cast<int>(ParseLong(header(2, "D"), path + ":3"));
  PhoneFeatureMatrix f;
  f.language = header(3, "language");
  f.layout = FeatureLayout::FromSlotsString(slots, k, dim == 0 ? 32 : dim);
  f.rows.resize(static_cast<long>(lines.size()) - 4, f.layout.width);
  std::vector<double> row;
  long r = 0;
  for (size_t i = 4; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = path + ":" + std::to_string(i + 1);
    detail::ParseCsvRow(lines[i], ctx, &row);
    Require(static_cast<long>(row.size()) == f.layout.width,
            ctx + ": expected " + std::to_string(f.layout.width) + " columns");
    for (long c = 0; c < f.layout.width; ++c) f.rows(r, c) = row[c];
    ++r;
  }
  Require(r >= 2, path + ": feature file needs at least one phone row plus the end row");
  f.rows.conservativeResize(r, f.layout.width);
  return f;
}

}  // namespace speval

#endif  // SPEVAL_FEATURES_HPP_
