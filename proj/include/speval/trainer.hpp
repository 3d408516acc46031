// speval/trainer.hpp
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
// Adam training over the flat parameter buffer, with gradient clipping by
// global norm, deterministic shuffling, a validation split and best-epoch
// checkpointing. Multi-task training pools the per-language datasets and
// shuffles them together, which interleaves languages proportionally to their
// sizes; each example only ever touches its own language's head.

#ifndef SPEVAL_TRAINER_HPP_
#define SPEVAL_TRAINER_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "speval/common.hpp"
#include "speval/rng.hpp"
#include "speval/scorer.hpp"

namespace speval {

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 16;
  int epochs = 30;
  double clip_norm = 5.0;
  uint64_t seed = 1;
  double validation_fraction = 0.1;
  int patience = 10;
  std::vector<std::string> freeze_heads;

  void Validate() const {
    Require(lr >= 0.0, "learning rate must be >= 0");
    Require(batch_size >= 1, "batch size must be >= 1");
    Require(epochs >= 0, "epoch count must be >= 0");
    Require(clip_norm > 0.0, "gradient clip norm must be positive");
    Require(validation_fraction >= 0.0 && validation_fraction < 1.0,
            "validation fraction must be in [0, 1)");
    Require(patience >= 1, "early-stop patience must be >= 1");
  }
};

struct TrainResult {
  std::vector<double> train_loss;  // one entry per completed epoch
  std::vector<double> val_loss;
  int best_epoch = -1;
  double best_val = std::numeric_limits<double>::infinity();

  std::string CurveCsv() const {
    std::string out = "epoch,train_loss,val_loss\n";
    for (size_t e = 0; e < train_loss.size(); ++e)
      out += std::to_string(e) + "," + FormatDouble(train_loss[e]) + "," +
             FormatDouble(val_loss[e]) + "\n";
    return out;
  }
};

using Dataset = std::vector<SeqExample<double>>;

/// Shared training loop over already-split example lists. The model is left
/// at the best-validation checkpoint.
inline TrainResult TrainCore(
    ScoringModelD& model, const std::vector<const SeqExample<double>*>& train,
    const std::vector<const SeqExample<double>*>& val, const TrainConfig& cfg) {
  cfg.Validate();
  Require(!train.empty(), "empty dataset");

  std::vector<std::pair<long, long>> frozen;
  for (const auto& lang : cfg.freeze_heads)
    frozen.emplace_back(model.HeadOffset(model.HeadIndex(lang)), model.HeadSpan());

  const long n_params = model.ParamCount();
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0), grad;
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;

  Rng rng(DeriveSeed(cfg.seed, 0x7121));
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  TrainResult result;
  std::vector<double> best_params;
  int bad_epochs = 0;
  std::vector<const SeqExample<double>*> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.Shuffle(order);
    double running = 0.0;
    long batches = 0;
    for (size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      batch.clear();
      const size_t end = std::min(pos + cfg.batch_size, order.size());
      for (size_t i = pos; i < end; ++i) batch.push_back(train[order[i]]);
      double loss = BatchGradient(model, batch, &grad);
      if (!std::isfinite(loss))
        Fail("non-finite training loss in epoch " + std::to_string(epoch) +
             ", batch " + std::to_string(batches) + " (first utterance '" +
             batch[0]->id + "')");
      for (auto [off, len] : frozen)
        std::fill(grad.begin() + off, grad.begin() + off + len, 0.0);

      long double sq = 0;
      for (double g : grad) sq += static_cast<long double>(g) * g;
      const double norm = static_cast<double>(std::sqrt(sq));
      if (norm > cfg.clip_norm) {
        const double scale = cfg.clip_norm / norm;
        for (double& g : grad) g *= scale;
      }

      ++step;
      const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto& params = model.Params();
      for (long i = 0; i < n_params; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= cfg.lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + adam_eps);
      }
      running += loss;
      ++batches;
    }
    result.train_loss.push_back(running / static_cast<double>(batches));
    const double val_loss =
        val.empty() ? result.train_loss.back() : BatchLoss(model, val);
    result.val_loss.push_back(val_loss);
    if (val_loss < result.best_val) {
      result.best_val = val_loss;
      result.best_epoch = epoch;
      best_params = model.Params();
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }
  if (result.best_epoch >= 0) model.Params() = best_params;
  return result;
}

/// Deterministic validation split (shuffle by seed, first fraction becomes
/// validation), then the shared loop.
inline TrainResult Train(ScoringModelD& model, const Dataset& data,
                         const TrainConfig& cfg) {
  cfg.Validate();
  Require(!data.empty(), "empty dataset");
  std::vector<size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng(DeriveSeed(cfg.seed, 0x5917));
  rng.Shuffle(idx);
  size_t val_n = static_cast<size_t>(
      std::llround(cfg.validation_fraction * static_cast<double>(data.size())));
  if (val_n >= data.size()) val_n = data.size() - 1;
  std::vector<const SeqExample<double>*> train, val;
  for (size_t i = 0; i < idx.size(); ++i)
    (i < val_n ? val : train).push_back(&data[idx[i]]);
  return TrainCore(model, train, val, cfg);
}

/// Multi-task training: per-language validation splits keep every language
/// represented in both partitions; pooling plus uniform shuffling interleaves
/// languages proportionally to dataset sizes.
inline TrainResult TrainMultitask(ScoringModelD& model,
                                  const std::map<std::string, Dataset>& datasets,
                                  const TrainConfig& cfg) {
  cfg.Validate();
  Require(datasets.size() >= 2, "multi-task training needs >= 2 languages");
  std::vector<const SeqExample<double>*> train, val;
  Rng rng(DeriveSeed(cfg.seed, 0x3319));
  for (const auto& [language, data] : datasets) {
    Require(!data.empty(), "empty dataset for language '" + language + "'");
    model.HeadIndex(language);  // fails fast when the head is missing
    std::vector<size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    rng.Shuffle(idx);
    size_t val_n = static_cast<size_t>(std::llround(
        cfg.validation_fraction * static_cast<double>(data.size())));
    if (val_n >= data.size()) val_n = data.size() - 1;
    for (size_t i = 0; i < idx.size(); ++i)
      (i < val_n ? val : train).push_back(&data[idx[i]]);
  }
  return TrainCore(model, train, val, cfg);
}

/// Starts from a source model's backbone (and any existing heads), gives the
/// target language a fresh zero head if needed, and fine-tunes everything.
inline ScoringModelD Adapt(const ScoringModelD& source,
                           const std::string& target_language,
                           const Dataset& data, const TrainConfig& cfg,
                           TrainResult* result = nullptr) {
  ScoringModelD model = source;
  if (!model.HasLanguage(target_language)) model.AddLanguage(target_language);
  TrainResult r = Train(model, data, cfg);
  if (result) *result = r;
  return model;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization (layout documented in scorer.hpp).

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

inline constexpr char kCkptMagic[8] = {'S', 'P', 'E', 'V', 'C', 'K', 'P', 'T'};
inline constexpr uint32_t kCkptMajor = 1;
inline constexpr uint32_t kCkptMinor = 0;

template <class T>
void PutRaw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T GetRaw(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) Fail(path + ": corrupt checkpoint (truncated)");
  return value;
}

}  // namespace detail

inline void SaveModel(const std::string& path, const ScoringModelD& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(path + ": cannot open file for writing");
  out.write(detail::kCkptMagic, 8);
  detail::PutRaw(out, detail::kCkptMajor);
  detail::PutRaw(out, detail::kCkptMinor);
  detail::PutRaw(out, static_cast<uint32_t>(model.InputWidth()));
  detail::PutRaw(out, static_cast<uint32_t>(model.Hidden()));
  detail::PutRaw(out, static_cast<uint32_t>(model.Layers()));
  detail::PutRaw(out, static_cast<uint64_t>(model.Config().seed));
  const FeatureLayout& layout = model.Layout();
  uint8_t flags = 0;
  if (layout.spec.gop) flags |= 1;
  if (layout.spec.timing != TimingSlot::kNone) flags |= 2;
  if (layout.spec.timing == TimingSlot::kDuration) flags |= 4;
  if (layout.spec.phonemb) flags |= 8;
  if (layout.spec.pitch) flags |= 16;
  if (layout.raw) flags |= 32;
  detail::PutRaw(out, flags);
  detail::PutRaw(out, static_cast<uint32_t>(layout.k));
  detail::PutRaw(out, static_cast<uint32_t>(layout.spec.emb_dim));
  detail::PutRaw(out, static_cast<uint32_t>(model.Metrics().size()));
  for (int m : model.Metrics()) detail::PutRaw(out, static_cast<uint8_t>(m));
  detail::PutRaw(out, static_cast<uint32_t>(model.Languages().size()));
  for (const auto& lang : model.Languages()) {
    detail::PutRaw(out, static_cast<uint32_t>(lang.size()));
    out.write(lang.data(), static_cast<std::streamsize>(lang.size()));
  }
  detail::PutRaw(out, static_cast<uint64_t>(model.ParamCount()));
  out.write(reinterpret_cast<const char*>(model.Params().data()),
            static_cast<std::streamsize>(model.ParamCount() * sizeof(double)));
  if (!out) Fail(path + ": write failed");
}

inline ScoringModelD LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(path + ": cannot open checkpoint");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kCkptMagic, 8) != 0)
    Fail(path + ": corrupt checkpoint (bad magic)");
  const auto major = detail::GetRaw<uint32_t>(in, path);
  const auto minor = detail::GetRaw<uint32_t>(in, path);
  (void)minor;
  if (major != detail::kCkptMajor)
    Fail(path + ": checkpoint version mismatch (file major " +
         std::to_string(major) + ", toolkit supports " +
         std::to_string(detail::kCkptMajor) + ")");
  const auto input = detail::GetRaw<uint32_t>(in, path);
  const auto hidden = detail::GetRaw<uint32_t>(in, path);
  const auto layers = detail::GetRaw<uint32_t>(in, path);
  const auto seed = detail::GetRaw<uint64_t>(in, path);
  const auto flags = detail::GetRaw<uint8_t>(in, path);
  const auto k = detail::GetRaw<uint32_t>(in, path);
  const auto emb_dim = detail::GetRaw<uint32_t>(in, path);

  ScorerConfig cfg;
  if (flags & 32) {
    cfg.layout = FeatureLayout::Raw(static_cast<int>(input));
  } else {
    FeatureSpec spec;
    spec.gop = flags & 1;
    spec.timing = (flags & 2)
                      ? ((flags & 4) ? TimingSlot::kDuration : TimingSlot::kTempo)
                      : TimingSlot::kNone;
    spec.phonemb = flags & 8;
    spec.pitch = flags & 16;
    spec.emb_dim = static_cast<int>(emb_dim);
    cfg.layout = FeatureLayout::FromSpec(spec, static_cast<int>(k));
    if (cfg.layout.width != static_cast<int>(input))
      Fail(path + ": corrupt checkpoint (layout width " +
           std::to_string(cfg.layout.width) + " vs input " +
           std::to_string(input) + ")");
  }
  cfg.hidden = static_cast<int>(hidden);
  cfg.layers = static_cast<int>(layers);
  cfg.seed = seed;
  const auto n_metrics = detail::GetRaw<uint32_t>(in, path);
  if (n_metrics == 0 || n_metrics > kNumMetrics)
    Fail(path + ": corrupt checkpoint (metric count)");
  cfg.metrics.clear();
  for (uint32_t i = 0; i < n_metrics; ++i)
    cfg.metrics.push_back(detail::GetRaw<uint8_t>(in, path));
  const auto n_langs = detail::GetRaw<uint32_t>(in, path);
  if (n_langs > 1000) Fail(path + ": corrupt checkpoint (language count)");
  cfg.languages.clear();
  for (uint32_t i = 0; i < n_langs; ++i) {
    const auto len = detail::GetRaw<uint32_t>(in, path);
    if (len == 0 || len > 64) Fail(path + ": corrupt checkpoint (language tag)");
    std::string lang(len, '\0');
    in.read(lang.data(), len);
    if (!in) Fail(path + ": corrupt checkpoint (truncated)");
    cfg.languages.push_back(lang);
  }

  ScoringModelD model(cfg);
  const auto n_params = detail::GetRaw<uint64_t>(in, path);
  if (n_params != static_cast<uint64_t>(model.ParamCount()))
    Fail(path + ": corrupt checkpoint (parameter count " +
         std::to_string(n_params) + ", expected " +
         std::to_string(model.ParamCount()) + ")");
  in.read(reinterpret_cast<char*>(model.Params().data()),
          static_cast<std::streamsize>(n_params * sizeof(double)));
  if (!in) Fail(path + ": corrupt checkpoint (truncated)");
  in.peek();
  if (!in.eof()) Fail(path + ": corrupt checkpoint (trailing bytes)");
  return model;
}

/// Per-metric prediction, both in model space (-1, 1) and on the rater scale.
struct Prediction {
  std::array<std::optional<double>, kNumMetrics> rescaled;
  std::array<std::optional<double>, kNumMetrics> score;
};

inline Prediction Predict(const ScoringModelD& model, const Matrix& features,
                          const std::string& language, double scale_min,
                          double scale_max) {
  Require(scale_max > scale_min, "scale_max must exceed scale_min");
  VecOf<double> y = model.Forward(features, language);
  Prediction out;
  const auto& metrics = model.Metrics();
  for (size_t i = 0; i < metrics.size(); ++i) {
    out.rescaled[metrics[i]] = y(static_cast<long>(i));
    out.score[metrics[i]] =
        scale_min + (y(static_cast<long>(i)) + 1.0) * (scale_max - scale_min) / 2.0;
  }
  return out;
}

}  // namespace speval

#endif  // SPEVAL_TRAINER_HPP_
