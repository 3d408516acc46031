// speval/scorer.hpp
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
// Sentence scorer: a stack of bidirectional LSTM layers over the per-phone
// feature rows (end-symbol row included), pooled as the concatenation of the
// final forward state and the final backward state of the top layer, followed
// by a per-language affine head and tanh. Scores are predicted in (-1, +1)
// and mapped back to the rater scale outside the model.
//
// All parameters live in one flat buffer so gradients, the optimizer state
// and checkpoints share a single layout:
//
//   for layer l in 0..L-1, direction d in {fwd, bwd}:
//       W_ld (4h x in_l), R_ld (4h x h), b_ld (4h)     in_0 = input width,
//   for each language, in head order:                  in_l = 2h otherwise
//       Wh (n_out x 2h), bh (n_out)
//
// Matrices are column-major inside their span. The checkpoint file is:
//
//   offset  content
//   0       8-byte magic "SPEVCKPT"
//   8       u32 version major (1), u32 version minor (0)
//   16      u32 input width, u32 hidden size, u32 layer count
//   28      u64 init seed
//   36      u8 layout flags (bit0 gop, bit1 timing, bit2 timing-is-dur,
//           bit3 phonemb, bit4 pitch, bit5 raw), u32 k, u32 emb dim
//   45      u32 metric count, then one u8 metric id each
//   ...     u32 language count, then u32 length + bytes per language
//   ...     u64 parameter count, then that many little-endian f64
//
// Integers are little-endian. A major-version difference is a version
// mismatch error; any size inconsistency is a corrupt-file error.

#ifndef SPEVAL_SCORER_HPP_
#define SPEVAL_SCORER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "speval/common.hpp"
#include "speval/features.hpp"
#include "speval/lstm.hpp"
#include "speval/manifest.hpp"
#include "speval/rng.hpp"

namespace speval {

struct ScorerConfig {
  FeatureLayout layout = FeatureLayout::Raw(47);
  int hidden = 256;
  int layers = 2;
  std::vector<std::string> languages;
  std::vector<int> metrics = {kPronunciation, kRhythm, kIntonation};
  uint64_t seed = 1;

  void Validate() const {
    Require(layout.width >= 1, "scorer input width must be >= 1");
    Require(hidden >= 1, "scorer hidden size must be >= 1");
    Require(layers >= 1, "scorer needs at least one layer");
    Require(!metrics.empty(), "scorer needs at least one target metric");
    for (int m : metrics)
      Require(m >= 0 && m < kNumMetrics, "invalid metric id");
    for (size_t i = 0; i < metrics.size(); ++i)
      for (size_t j = i + 1; j < metrics.size(); ++j)
        Require(metrics[i] != metrics[j], "duplicate target metric");
  }
};

template <class Real>
struct ScorerCache {
  struct Layer {
    MatOf<Real> input;  // in_l x T
    LstmDirCache<Real> dir[2];
  };
  std::vector<Layer> layers;
  VecOf<Real> rep;  // 2h
  VecOf<Real> y;    // n_out
  int head = -1;
};

template <class Real>
class ScoringModel {
 public:
  struct Block {
    std::string name;
    long offset = 0;
    long rows = 0;
    long cols = 0;
    long Size() const { return rows * cols; }
  };

  explicit ScoringModel(const ScorerConfig& cfg) : cfg_(cfg) {
    cfg_.Validate();
    const long h = cfg_.hidden;
    long off = 0;
    layer_off_.resize(cfg_.layers);
    for (int l = 0; l < cfg_.layers; ++l) {
      const long in = l == 0 ? cfg_.layout.width : 2 * h;
      for (int d = 0; d < 2; ++d) {
        layer_off_[l][d] = {off, off + 4 * h * in, off + 4 * h * in + 4 * h * h};
        off += 4 * h * in + 4 * h * h + 4 * h;
      }
    }
    backbone_size_ = off;
    params_.assign(off, Real(0));
    InitBackbone();
    auto languages = cfg_.languages;
    cfg_.languages.clear();
    for (const auto& lang : languages) AddLanguage(lang);
  }

  const ScorerConfig& Config() const { return cfg_; }
  const FeatureLayout& Layout() const { return cfg_.layout; }
  int Hidden() const { return cfg_.hidden; }
  int Layers() const { return cfg_.layers; }
  int InputWidth() const { return cfg_.layout.width; }
  long OutputDim() const { return static_cast<long>(cfg_.metrics.size()); }
  const std::vector<int>& Metrics() const { return cfg_.metrics; }
  const std::vector<std::string>& Languages() const { return cfg_.languages; }

  std::vector<Real>& Params() { return params_; }
  const std::vector<Real>& Params() const { return params_; }
  long ParamCount() const { return static_cast<long>(params_.size()); }
  long BackboneCount() const { return backbone_size_; }
  long HeadCount() const { return OutputDim() * (2 * cfg_.hidden + 1); }

  static long ClosedFormCount(long input, long hidden, long layers,
                              long heads, long n_out) {
    long total = 0;
    for (long l = 0; l < layers; ++l) {
      const long in = l == 0 ? input : 2 * hidden;
      total += 2 * 4 * ((in + hidden) * hidden + hidden);
    }
    total += heads * (n_out * (2 * hidden + 1));
    return total;
  }

  int HeadIndex(const std::string& language) const {
    for (size_t i = 0; i < cfg_.languages.size(); ++i)
      if (cfg_.languages[i] == language) return static_cast<int>(i);
    Fail("no head for language '" + language + "'");
  }

  bool HasLanguage(const std::string& language) const {
    for (const auto& l : cfg_.languages)
      if (l == language) return true;
    return false;
  }

  /// Appends a zero-initialized head; existing parameter spans are unchanged.
  void AddLanguage(const std::string& language) {
    Require(!HasLanguage(language), "duplicate head for language '" + language + "'");
    cfg_.languages.push_back(language);
    head_off_.push_back(static_cast<long>(params_.size()));
    params_.resize(params_.size() + HeadCount(), Real(0));
  }

  /// Parameter blocks in storage order ("layer0.fwd.W", ..., "head.en.W",
  /// "head.en.b").
  std::vector<Block> Blocks() const {
    std::vector<Block> blocks;
    const long h = cfg_.hidden;
    for (int l = 0; l < cfg_.layers; ++l) {
      const long in = l == 0 ? cfg_.layout.width : 2 * h;
      for (int d = 0; d < 2; ++d) {
        const std::string prefix =
            "layer" + std::to_string(l) + (d == 0 ? ".fwd" : ".bwd");
        blocks.push_back({prefix + ".W", layer_off_[l][d][0], 4 * h, in});
        blocks.push_back({prefix + ".R", layer_off_[l][d][1], 4 * h, h});
        blocks.push_back({prefix + ".b", layer_off_[l][d][2], 4 * h, 1});
      }
    }
    for (size_t i = 0; i < cfg_.languages.size(); ++i) {
      blocks.push_back({"head." + cfg_.languages[i] + ".W", head_off_[i],
                        OutputDim(), 2 * h});
      blocks.push_back({"head." + cfg_.languages[i] + ".b",
                        head_off_[i] + OutputDim() * 2 * h, OutputDim(), 1});
    }
    return blocks;
  }

  long HeadOffset(int head) const { return head_off_[head]; }
  long HeadSpan() const { return HeadCount(); }

  /// Runs the encoder and head. `features` is (n_phones + 1) x width with the
  /// end-symbol row last. Returns one value per configured metric, each
  /// strictly inside (-1, +1).
  VecOf<Real> Forward(const MatOf<Real>& features,
                      const std::string& language) const {
    ScorerCache<Real> cache;
    return ForwardCached(features, language, &cache);
  }

  VecOf<Real> ForwardCached(const MatOf<Real>& features,
                            const std::string& language,
                            ScorerCache<Real>* cache) const {
    Require(features.cols() == cfg_.layout.width,
            "feature width mismatch: features have " +
                std::to_string(features.cols()) + " columns, model expects " +
                std::to_string(cfg_.layout.width));
    Require(features.rows() >= 1, "empty feature sequence");
    const int head = HeadIndex(language);
    const long h = cfg_.hidden;
    const long T = features.rows();
    cache->layers.resize(cfg_.layers);
    cache->head = head;

    MatOf<Real> x = features.transpose();
    for (int l = 0; l < cfg_.layers; ++l) {
      auto& layer = cache->layers[l];
      layer.input = std::move(x);
      LstmForward<Real>(WView(l, 0), RView(l, 0), BView(l, 0), layer.input,
                        false, &layer.dir[0]);
      LstmForward<Real>(WView(l, 1), RView(l, 1), BView(l, 1), layer.input,
                        true, &layer.dir[1]);
      if (l + 1 < cfg_.layers) {
        x.resize(2 * h, T);
        x.topRows(h) = layer.dir[0].h;
        x.bottomRows(h) = layer.dir[1].h;
      }
    }
    const auto& top = cache->layers[cfg_.layers - 1];
    cache->rep.resize(2 * h);
    cache->rep.head(h) = top.dir[0].h.col(T - 1);  // final forward state
    cache->rep.tail(h) = top.dir[1].h.col(0);      // final backward state

    VecOf<Real> y = HeadW(head) * cache->rep + HeadB(head);
    y = y.array().tanh().matrix();
    // keep the contract of an open interval even when tanh saturates
    const Real lim = std::nextafter(Real(1), Real(0));
    for (long i = 0; i < y.size(); ++i) y(i) = std::clamp(y(i), -lim, lim);
    cache->y = y;
    return y;
  }

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(y).
  void Backprop(const ScorerCache<Real>& cache, const VecOf<Real>& dy,
                std::vector<Real>* grad) const {
    Require(grad->size() == params_.size(), "gradient buffer size mismatch");
    const long h = cfg_.hidden;
    const long T = cache.layers[0].input.cols();
    const int head = cache.head;

    VecOf<Real> da = (dy.array() * (Real(1) - cache.y.array().square())).matrix();
    GradHeadW(head, grad).noalias() += da * cache.rep.transpose();
    GradHeadB(head, grad) += da;
    VecOf<Real> drep = HeadW(head).transpose() * da;

    MatOf<Real> dh_f = MatOf<Real>::Zero(h, T);
    MatOf<Real> dh_b = MatOf<Real>::Zero(h, T);
    dh_f.col(T - 1) = drep.head(h);
    dh_b.col(0) = drep.tail(h);
    for (int l = cfg_.layers - 1; l >= 0; --l) {
      const auto& layer = cache.layers[l];
      MatOf<Real> dx = MatOf<Real>::Zero(layer.input.rows(), T);
      LstmBackward<Real>(WView(l, 0), RView(l, 0), layer.input, false,
                         layer.dir[0], dh_f, GradW(l, 0, grad), GradR(l, 0, grad),
                         GradB(l, 0, grad), &dx);
      LstmBackward<Real>(WView(l, 1), RView(l, 1), layer.input, true,
                         layer.dir[1], dh_b, GradW(l, 1, grad), GradR(l, 1, grad),
                         GradB(l, 1, grad), &dx);
      if (l > 0) {
        dh_f = dx.topRows(h);
        dh_b = dx.bottomRows(h);
      }
    }
  }

  std::string ParamReport() const {
    std::string out = "parameters: total " + std::to_string(ParamCount()) +
                      " (backbone " + std::to_string(BackboneCount());
    out += ", " + std::to_string(cfg_.languages.size()) + " head(s) x " +
           std::to_string(HeadCount()) + ")";
    out += "; single-head total " +
           std::to_string(BackboneCount() + HeadCount());
    return out;
  }

 private:
  using MapM = Eigen::Map<MatOf<Real>>;
  using CMapM = Eigen::Map<const MatOf<Real>>;
  using MapV = Eigen::Map<VecOf<Real>>;
  using CMapV = Eigen::Map<const VecOf<Real>>;

  long InDim(int layer) const {
    return layer == 0 ? cfg_.layout.width : 2 * cfg_.hidden;
  }

  CMapM WView(int l, int d) const {
    return CMapM(params_.data() + layer_off_[l][d][0], 4 * cfg_.hidden, InDim(l));
  }
  CMapM RView(int l, int d) const {
    return CMapM(params_.data() + layer_off_[l][d][1], 4 * cfg_.hidden, cfg_.hidden);
  }
  CMapV BView(int l, int d) const {
    return CMapV(params_.data() + layer_off_[l][d][2], 4 * cfg_.hidden);
  }
  CMapM HeadW(int i) const {
    return CMapM(params_.data() + head_off_[i], OutputDim(), 2 * cfg_.hidden);
  }
  CMapV HeadB(int i) const {
    return CMapV(params_.data() + head_off_[i] + OutputDim() * 2 * cfg_.hidden,
                 OutputDim());
  }
  MapM GradW(int l, int d, std::vector<Real>* g) const {
    return MapM(g->data() + layer_off_[l][d][0], 4 * cfg_.hidden, InDim(l));
  }
  MapM GradR(int l, int d, std::vector<Real>* g) const {
    return MapM(g->data() + layer_off_[l][d][1], 4 * cfg_.hidden, cfg_.hidden);
  }
  MapV GradB(int l, int d, std::vector<Real>* g) const {
    return MapV(g->data() + layer_off_[l][d][2], 4 * cfg_.hidden);
  }
  MapM GradHeadW(int i, std::vector<Real>* g) const {
    return MapM(g->data() + head_off_[i], OutputDim(), 2 * cfg_.hidden);
  }
  MapV GradHeadB(int i, std::vector<Real>* g) const {
    return MapV(g->data() + head_off_[i] + OutputDim() * 2 * cfg_.hidden,
                OutputDim());
  }

  void InitBackbone() {
    Rng rng(cfg_.seed);
    const long h = cfg_.hidden;
    for (int l = 0; l < cfg_.layers; ++l) {
      for (int d = 0; d < 2; ++d) {
        const long in = InDim(l);
        const double sw = 1.0 / std::sqrt(static_cast<double>(in));
        Real* w = params_.data() + layer_off_[l][d][0];
        for (long n = 0; n < 4 * h * in; ++n)
          w[n] = static_cast<Real>(rng.Uniform(-sw, sw));
        const double sr = 1.0 / std::sqrt(static_cast<double>(h));
        Real* r = params_.data() + layer_off_[l][d][1];
        for (long n = 0; n < 4 * h * h; ++n)
          r[n] = static_cast<Real>(rng.Uniform(-sr, sr));
        Real* b = params_.data() + layer_off_[l][d][2];
        for (long n = 0; n < 4 * h; ++n) b[n] = Real(0);
        for (long n = h; n < 2 * h; ++n) b[n] = Real(1);  // forget-gate bias
      }
    }
  }

  ScorerConfig cfg_;
  std::vector<Real> params_;
  // per layer, per direction: offsets of W, R, b
  std::vector<std::array<std::array<long, 3>, 2>> layer_off_;
  std::vector<long> head_off_;
  long backbone_size_ = 0;
};

using ScoringModelD = ScoringModel<double>;

/// One training item: transposed features are built lazily by Forward, so
/// rows stay (n_phones + 1) x width here.
template <class Real>
struct SeqExample {
  std::string id;
  std::string language;
  MatOf<Real> features;
  VecOf<Real> target;  // rescaled targets, one per model metric
};

/// MSE over the predicted metrics of one example.
template <class Real>
Real MseLoss(const VecOf<Real>& pred, const VecOf<Real>& target) {
  Require(pred.size() == target.size() && pred.size() > 0,
          "loss operands differ in length");
  return (pred - target).squaredNorm() / Real(pred.size());
}

/// Mean over the batch of the per-example MSE over metrics.
template <class Real>
Real BatchLoss(const ScoringModel<Real>& model,
               const std::vector<const SeqExample<Real>*>& batch) {
  Require(!batch.empty(), "empty batch");
  Real acc = 0;
  for (const auto* ex : batch) {
    Require(ex->target.size() == model.OutputDim(),
            "target size does not match the model metrics");
    VecOf<Real> y = model.Forward(ex->features, ex->language);
    acc += MseLoss<Real>(y, ex->target);
  }
  return acc / Real(batch.size());
}

/// Exact reverse-mode gradient of BatchLoss; returns the loss.
template <class Real>
Real BatchGradient(const ScoringModel<Real>& model,
                   const std::vector<const SeqExample<Real>*>& batch,
                   std::vector<Real>* grad) {
  Require(!batch.empty(), "empty batch");
  grad->assign(model.ParamCount(), Real(0));
  Real acc = 0;
  ScorerCache<Real> cache;
  const Real scale = Real(2) / (Real(model.OutputDim()) * Real(batch.size()));
  for (const auto* ex : batch) {
    Require(ex->target.size() == model.OutputDim(),
            "target size does not match the model metrics");
    VecOf<Real> y = model.ForwardCached(ex->features, ex->language, &cache);
    VecOf<Real> resid = y - ex->target;
    acc += resid.squaredNorm() / Real(model.OutputDim());
    VecOf<Real> dy = scale * resid;
    model.Backprop(cache, dy, grad);
  }
  return acc / Real(batch.size());
}

}  // namespace speval

#endif  // SPEVAL_SCORER_HPP_
