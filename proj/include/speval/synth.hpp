// speval/synth.hpp
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
// Deterministic synthetic corpus generator. Three latent proficiencies drive
// three disjoint observation channels, so feature ablations are causally
// separable:
//
//   q_pron   -> posterior target-phone mass (mix of one-hot and uniform)
//   q_rhythm -> phone durations (rhythm-class template, jitter ~ 1 - q)
//   q_inton  -> pitch contour amplitude and frame noise
//
// Duration templates caricature the three timing typologies: a stress-timed
// template alternates long and short phones, a syllable-timed template keeps
// durations near-constant, and a mora-timed template draws durations as
// integer multiples of a base mora. Rater scores are linear in the latent
// before clamping, plus Gaussian rater noise.
//
// Every utterance derives its own RNG stream from (seed, index), so
// generation is reproducible and parallelizable.

#ifndef SPEVAL_SYNTH_HPP_
#define SPEVAL_SYNTH_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "speval/common.hpp"
#include "speval/manifest.hpp"
#include "speval/par.hpp"
#include "speval/phoneme_table.hpp"
#include "speval/posterior.hpp"
#include "speval/rng.hpp"
#include "speval/text.hpp"

namespace speval {

enum class RhythmClass { kStress, kSyllable, kMora };

inline RhythmClass RhythmClassFromName(const std::string& name) {
  if (name == "stress") return RhythmClass::kStress;
  if (name == "syllable") return RhythmClass::kSyllable;
  if (name == "mora") return RhythmClass::kMora;
  Fail("unknown rhythm class '" + name + "' (expected stress, syllable or mora)");
}

inline const char* RhythmClassName(RhythmClass c) {
  switch (c) {
    case RhythmClass::kStress: return "stress";
    case RhythmClass::kSyllable: return "syllable";
    default: return "mora";
  }
}

struct SynthConfig {
  std::string language = "syn";
  RhythmClass rhythm_class = RhythmClass::kStress;
  int n_utterances = 100;
  int phones_min = 8;
  int phones_max = 18;
  int n_raters = 3;
  double rater_noise = 0.2;  // sigma of the per-rater score noise
  double scale_min = 1.0;
  double scale_max = 5.0;
  uint64_t seed = 1;
  double frame_step = 0.01;
  // proficiency distribution (uniform)
  double latent_min = 0.0;
  double latent_max = 1.0;
  // observation-channel knobs; jitters scale with (1 - latent)
  double duration_jitter = 0.35;
  double rate_jitter = 0.2;
  double posterior_frame_noise = 0.1;
  double pitch_base = 4.7;
  double pitch_contour_amp = 0.5;
  double pitch_period = 1.6;
  double pitch_noise = 0.5;
  // rhythm templates
  double stress_long = 0.22;
  double stress_short = 0.09;
  double syllable_dur = 0.14;
  double mora_base = 0.05;
  int mora_max_units = 4;
  std::string id_prefix = "utt";
  // embedding corpus
  int emb_lines = 1000;
  int emb_line_min = 5;
  int emb_line_max = 12;
  std::string emb_pair_a;  // unprefixed; defaults to the first two
  std::string emb_pair_b;  // inventory phones

  void Validate() const {
    Require(IsLanguageTag(language), "invalid language tag '" + language + "'");
    Require(n_utterances >= 1, "n_utterances must be >= 1");
    Require(phones_min >= 1 && phones_max >= phones_min,
            "invalid phones-per-utterance range");
    Require(n_raters >= 1, "n_raters must be >= 1");
    Require(rater_noise >= 0.0, "rater noise must be >= 0");
    Require(scale_max > scale_min, "scale_max must exceed scale_min");
    Require(frame_step > 0.0, "frame step must be positive");
    Require(latent_min >= 0.0 && latent_max <= 1.0 && latent_max >= latent_min,
            "latent range must be inside [0, 1]");
    Require(duration_jitter >= 0.0 && rate_jitter >= 0.0 &&
                posterior_frame_noise >= 0.0 && pitch_noise >= 0.0,
            "jitter parameters must be >= 0");
    Require(mora_max_units >= 1, "mora_max_units must be >= 1");
  }
};

struct SynthUtterance {
  Utterance utt;
  PosteriorMatrix post;
  PitchFrames pitch;
  std::array<double, kNumMetrics> latents;  // q_pron, q_rhythm, q_inton
};

struct SynthCorpus {
  std::vector<SynthUtterance> items;
};

namespace detail {

inline std::vector<double> SynthDurations(const SynthConfig& cfg, long n,
                                          double q_rhythm, Rng& rng) {
  std::vector<double> out(n);
  const long parity = static_cast<long>(rng.Below(2));
  const double spread = 1.0 - q_rhythm;
  const double rate = std::exp(cfg.rate_jitter * spread * rng.Normal());
  for (long i = 0; i < n; ++i) {
    double tmpl = 0.0;
    switch (cfg.rhythm_class) {
      case RhythmClass::kStress:
        tmpl = ((i + parity) % 2 == 0) ? cfg.stress_long : cfg.stress_short;
        break;
      case RhythmClass::kSyllable:
        tmpl = cfg.syllable_dur;
        break;
      case RhythmClass::kMora:
        tmpl = cfg.mora_base * (1 + static_cast<long>(rng.Below(cfg.mora_max_units)));
        break;
    }
    out[i] = tmpl * rate * std::exp(cfg.duration_jitter * spread * rng.Normal());
  }
  return out;
}

}  // namespace detail

/// Generates one utterance from its derived RNG stream. Draw order is fixed:
/// latents, phone count, phone ids, durations, posterior rows, pitch rows,
/// rater scores.
inline SynthUtterance GenerateUtterance(const SynthConfig& cfg,
                                        const std::vector<std::string>& inventory,
                                        long index) {
  Rng rng(DeriveSeed(cfg.seed, static_cast<uint64_t>(index)));
  SynthUtterance item;
  const double q_pron = rng.Uniform(cfg.latent_min, cfg.latent_max);
  const double q_rhythm = rng.Uniform(cfg.latent_min, cfg.latent_max);
  const double q_inton = rng.Uniform(cfg.latent_min, cfg.latent_max);
  item.latents = {q_pron, q_rhythm, q_inton};

  Utterance& utt = item.utt;
  char idbuf[32];
  std::snprintf(idbuf, sizeof(idbuf), "%05ld", index);
  utt.id = cfg.id_prefix + "-" + cfg.language + "-" + idbuf;
  utt.language = cfg.language;

  const long n = rng.Int(cfg.phones_min, cfg.phones_max);
  std::vector<long> phone_ids(n);
  for (long i = 0; i < n; ++i)
    phone_ids[i] = static_cast<long>(rng.Below(inventory.size()));
  std::vector<double> durations = detail::SynthDurations(cfg, n, q_rhythm, rng);

  double start = 0.0;
  utt.phones.resize(n);
  for (long i = 0; i < n; ++i) {
    utt.phones[i] = {inventory[phone_ids[i]], start, durations[i]};
    start += durations[i];
  }

  // posterior: every frame of phone i mixes a one-hot on phone i with the
  // uniform distribution; the mix follows q_pron with per-frame noise that
  // vanishes at both latent extremes
  const long n_cols = static_cast<long>(inventory.size());
  std::vector<FrameRange> ranges(n);
  long frames = 0;
  for (long i = 0; i < n; ++i) {
    ranges[i] = SegmentFrames(utt.phones[i], cfg.frame_step);
    frames = std::max(frames, ranges[i].hi);
  }
  item.post.step = cfg.frame_step;
  item.post.phone_labels = inventory;
  item.post.RebuildIndex();
  item.post.values.setConstant(frames, n_cols, 1.0 / static_cast<double>(n_cols));
  for (long i = 0; i < n; ++i) {
    for (long t = ranges[i].lo; t < ranges[i].hi; ++t) {
      double alpha = q_pron + cfg.posterior_frame_noise * q_pron * (1.0 - q_pron) *
                                  rng.Normal();
      alpha = std::clamp(alpha, 0.0, 1.0);
      for (long c = 0; c < n_cols; ++c)
        item.post.values(t, c) = (1.0 - alpha) / static_cast<double>(n_cols);
      item.post.values(t, phone_ids[i]) += alpha;
    }
  }

  // pitch: a slow contour whose amplitude grows with q_inton plus frame noise
  // that shrinks with it
  item.pitch.step = cfg.frame_step;
  item.pitch.values.resize(frames, 4);
  const double phase = rng.Uniform(0.0, 6.283185307179586);
  double prev_raw = 0.0;
  double mean_raw = 0.0;
  for (long t = 0; t < frames; ++t) {
    const double contour =
        cfg.pitch_base +
        cfg.pitch_contour_amp * q_inton *
            std::sin(6.283185307179586 * (static_cast<double>(t) * cfg.frame_step) /
                         cfg.pitch_period +
                     phase);
    const double raw = contour + cfg.pitch_noise * (1.0 - q_inton) * rng.Normal();
    item.pitch.values(t, 0) = raw;
    item.pitch.values(t, 2) = t == 0 ? 0.0 : raw - prev_raw;
    item.pitch.values(t, 3) = std::clamp(
        0.5 + 0.4 * q_inton + 0.25 * (1.0 - q_inton) * rng.Normal(), -1.0, 1.0);
    prev_raw = raw;
    mean_raw += raw;
  }
  mean_raw /= static_cast<double>(frames);
  for (long t = 0; t < frames; ++t)
    item.pitch.values(t, 1) = item.pitch.values(t, 0) - mean_raw;

  // rater scores: linear in the latent before clamping
  utt.scores.scale_min = cfg.scale_min;
  utt.scores.scale_max = cfg.scale_max;
  const double range = cfg.scale_max - cfg.scale_min;
  for (int m = 0; m < kNumMetrics; ++m) {
    utt.scores.raters[m].resize(cfg.n_raters);
    for (int r = 0; r < cfg.n_raters; ++r) {
      double s = cfg.scale_min + item.latents[m] * range +
                 cfg.rater_noise * rng.Normal();
      utt.scores.raters[m][r] = std::clamp(s, cfg.scale_min, cfg.scale_max);
    }
  }
  utt.posterior_ref = "posterior/" + utt.id + ".post";
  utt.pitch_ref = "pitch/" + utt.id + ".pitch";
  return item;
}

inline SynthCorpus Generate(const SynthConfig& cfg,
                            const MultilingualPhonemeTable& table,
                            int jobs = 1) {
  cfg.Validate();
  const auto inventory = table.LanguageEntries(cfg.language);
  Require(!inventory.empty(),
          "table has no phones for language '" + cfg.language + "'");
  SynthCorpus corpus;
  corpus.items.resize(cfg.n_utterances);
  // per-utterance seed streams keep parallel generation deterministic
  ParallelFor(cfg.n_utterances, jobs,
              [&](long i) { corpus.items[i] = GenerateUtterance(cfg, inventory, i); });
  return corpus;
}

/// Writes manifest.jsonl, posterior/, pitch/ and the latents.csv sidecar
/// (one `id,q_pron,q_rhythm,q_inton` line per utterance).
inline void WriteCorpus(const SynthCorpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "posterior");
  fs::create_directories(fs::path(dir) / "pitch");
  std::vector<Utterance> utts;
  std::string latents;
  for (const auto& item : corpus.items) {
    SavePosteriors((fs::path(dir) / item.utt.posterior_ref).string(), item.post);
    SavePitch((fs::path(dir) / item.utt.pitch_ref).string(), item.pitch);
    utts.push_back(item.utt);
    latents += item.utt.id + "," + FormatDouble(item.latents[0]) + "," +
               FormatDouble(item.latents[1]) + "," +
               FormatDouble(item.latents[2]) + "\n";
  }
  SaveManifest((fs::path(dir) / "manifest.jsonl").string(), utts);
  WriteFile((fs::path(dir) / "latents.csv").string(), latents);
}

/// Phoneme-string corpus for embedding training. Lines come in pairs built
/// from one random template whose designated slot holds pair_a in the even
/// line and pair_b in the odd line, so the pair occurs in identical context
/// multisets.
inline std::vector<std::vector<std::string>> GenerateEmbeddingCorpus(
    const SynthConfig& cfg, const MultilingualPhonemeTable& table) {
  cfg.Validate();
  Require(cfg.emb_lines >= 1, "emb_lines must be >= 1");
  Require(cfg.emb_line_min >= 2 && cfg.emb_line_max >= cfg.emb_line_min,
          "invalid embedding line-length range");
  const auto inventory = table.LanguageEntries(cfg.language);
  Require(inventory.size() >= 3,
          "embedding corpus needs at least 3 phones for language '" +
              cfg.language + "'");
  std::string pair_a = cfg.emb_pair_a.empty()
                           ? inventory[0]
                           : MultilingualPhonemeTable::Prefixed(cfg.language,
                                                                cfg.emb_pair_a);
  std::string pair_b = cfg.emb_pair_b.empty()
                           ? inventory[1]
                           : MultilingualPhonemeTable::Prefixed(cfg.language,
                                                                cfg.emb_pair_b);
  Require(table.Find(pair_a) >= 0 && table.Find(pair_b) >= 0,
          "embedding pair symbols are not in the table");
  Require(pair_a != pair_b, "embedding pair symbols must differ");
  std::vector<std::string> contexts;
  for (const auto& p : inventory)
    if (p != pair_a && p != pair_b) contexts.push_back(p);

  Rng rng(DeriveSeed(cfg.seed, 0xE3BCULL));
  std::vector<std::vector<std::string>> lines;
  lines.reserve(cfg.emb_lines);
  std::vector<std::string> tmpl;
  size_t slot = 0;
  for (int i = 0; i < cfg.emb_lines; ++i) {
    if (i % 2 == 0) {
      const int len = rng.Int(cfg.emb_line_min, cfg.emb_line_max);
      tmpl.resize(len);
      for (int t = 0; t < len; ++t)
        tmpl[t] = contexts[rng.Below(contexts.size())];
      slot = rng.Below(len);
    }
    auto line = tmpl;
    line[slot] = (i % 2 == 0) ? pair_a : pair_b;
    lines.push_back(std::move(line));
  }
  return lines;
}

inline void WriteEmbeddingCorpus(const std::string& path,
                                 const std::vector<std::vector<std::string>>& lines) {
  std::string out;
  for (const auto& line : lines) {
    for (size_t i = 0; i < line.size(); ++i) {
      if (i) out += " ";
      out += line[i];
    }
    out += "\n";
  }
  WriteFile(path, out);
}

}  // namespace speval

#endif  // SPEVAL_SYNTH_HPP_
