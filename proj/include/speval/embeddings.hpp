// speval/embeddings.hpp
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
// Skip-gram with negative sampling over phoneme strings. For every
// center/context pair inside the window the training step ascends
//
//   log sigmoid(u_c . v_o) + sum_{n ~ P_neg} log sigmoid(-u_c . v_n)
//
// with P_neg the unigram distribution raised to 3/4. Center vectors are the
// published embedding; context vectors are discarded after training.

#ifndef SPEVAL_EMBEDDINGS_HPP_
#define SPEVAL_EMBEDDINGS_HPP_

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "speval/common.hpp"
#include "speval/phoneme_table.hpp"
#include "speval/posterior.hpp"
#include "speval/rng.hpp"
#include "speval/text.hpp"

namespace speval {

/// |table| x D embedding, row i belongs to table entry i.
struct EmbeddingMatrix {
  Matrix values;

  long Dim() const { return values.cols(); }
  long Rows() const { return values.rows(); }
};

struct SkipgramConfig {
  int dim = 32;
  int window = 4;     // context half-width
  int negatives = 5;  // negative samples per positive pair
  int epochs = 5;
  double lr = 0.025;
  uint64_t seed = 1;

  void Validate() const {
    Require(dim >= 1, "embedding dim must be >= 1");
    Require(window >= 1, "skip-gram window must be >= 1");
    Require(negatives >= 1, "skip-gram negatives must be >= 1");
    Require(epochs >= 1, "skip-gram epochs must be >= 1");
    Require(lr > 0.0, "skip-gram learning rate must be positive");
  }
};

/// Returns the embedding row for a symbol; unknown symbols fall back to the
/// <unk> row with a warning.
inline Vector Lookup(const std::string& symbol,
                     const MultilingualPhonemeTable& table,
                     const EmbeddingMatrix& emb) {
  Require(emb.Rows() == static_cast<long>(table.Size()),
          "embedding matrix does not match the phoneme table");
  int idx = table.Find(symbol);
  if (idx < 0) {
    log::Warn("unknown phoneme symbol '" + symbol + "', using " +
              MultilingualPhonemeTable::kUnk);
    idx = table.UnkIndex();
  }
  return emb.values.row(idx).transpose();
}

/// One whitespace-separated phoneme string per line, tokens already prefixed.
/// Tokens absent from the table map to <unk> (with one warning per load).
inline std::vector<std::vector<int>> LoadEmbeddingCorpus(
    const std::string& path, const MultilingualPhonemeTable& table) {
  auto lines = ReadLines(path);
  std::vector<std::vector<int>> corpus;
  long unknown = 0;
  for (const auto& line : lines) {
    auto tokens = SplitWhitespace(line);
    if (tokens.empty()) continue;
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) {
      int idx = table.Find(tok);
      if (idx < 0) {
        ++unknown;
        idx = table.UnkIndex();
      }
      ids.push_back(idx);
    }
    corpus.push_back(std::move(ids));
  }
  if (unknown > 0)
    log::Warn(path + ": " + std::to_string(unknown) +
              " corpus tokens not in the table, mapped to <unk>");
  return corpus;
}

inline EmbeddingMatrix TrainEmbeddings(
    const std::vector<std::vector<int>>& corpus,
    const MultilingualPhonemeTable& table, const SkipgramConfig& cfg) {
  cfg.Validate();
  const long vocab = static_cast<long>(table.Size());
  long total_tokens = 0;
  std::vector<double> counts(vocab, 0.0);
  for (const auto& line : corpus)
    for (int id : line) {
      Require(id >= 0 && id < vocab, "corpus token id out of table range");
      counts[id] += 1.0;
      ++total_tokens;
    }
  Require(total_tokens > 0, "empty embedding corpus");

  // cumulative unigram^(3/4) table for negative sampling
  std::vector<double> cum(vocab, 0.0);
  double acc = 0.0;
  for (long i = 0; i < vocab; ++i) {
    acc += std::pow(counts[i], 0.75);
    cum[i] = acc;
  }
  auto sample_negative = [&](Rng& rng) {
    double r = rng.Uniform() * acc;
    return static_cast<int>(
        std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
  };

  Rng rng(cfg.seed);
  const long dim = cfg.dim;
  Matrix center(vocab, dim);
  for (long i = 0; i < vocab; ++i)
    for (long d = 0; d < dim; ++d)
      center(i, d) = rng.Uniform(-0.5 / dim, 0.5 / dim);
  Matrix context = Matrix::Zero(vocab, dim);

  const double total_steps =
      static_cast<double>(cfg.epochs) * static_cast<double>(total_tokens);
  double processed = 0.0;
  Vector accum(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& line : corpus) {
      const long n = static_cast<long>(line.size());
      for (long i = 0; i < n; ++i, processed += 1.0) {
        double lr = cfg.lr * std::max(1.0 - processed / total_steps, 1e-4);
        const int c = line[i];
        const long b = 1 + static_cast<long>(rng.Below(cfg.window));
        for (long j = i - b; j <= i + b; ++j) {
          if (j == i || j < 0 || j >= n) continue;
          const int o = line[j];
          accum.setZero();
          // positive pair then cfg.negatives noise pairs
          for (int s = 0; s < cfg.negatives + 1; ++s) {
            int target;
            double label;
            if (s == 0) {
              target = o;
              label = 1.0;
            } else {
              target = sample_negative(rng);
              if (target == o) continue;
              label = 0.0;
            }
            double z = center.row(c).dot(context.row(target));
            double p = 1.0 / (1.0 + std::exp(-z));
            double g = (label - p) * lr;
            accum += g * context.row(target).transpose();
            context.row(target) += g * center.row(c);
          }
          center.row(c) += accum.transpose();
        }
      }
    }
  }

  EmbeddingMatrix emb;
  emb.values = std::move(center);
  Require(emb.values.allFinite(), "embedding training produced non-finite values");
  return emb;
}

// Persistence: header line '#dim=<D>', then 'symbol v1 ... vD' per line.

inline void SaveEmbeddings(const std::string& path,
                           const MultilingualPhonemeTable& table,
                           const EmbeddingMatrix& emb) {
  Require(emb.Rows() == static_cast<long>(table.Size()),
          "embedding matrix does not match the phoneme table");
  std::string out = "#dim=" + std::to_string(emb.Dim()) + "\n";
  for (long i = 0; i < emb.Rows(); ++i) {
    out += table.Entry(i);
    for (long d = 0; d < emb.Dim(); ++d) out += " " + FormatDouble(emb.values(i, d));
    out += "\n";
  }
  WriteFile(path, out);
}

/// Loads embeddings and aligns rows with the given table. Every table entry
/// must be present; extra file symbols are ignored with a warning.
inline EmbeddingMatrix LoadEmbeddings(const std::string& path,
                                      const MultilingualPhonemeTable& table) {
  auto lines = ReadLines(path);
  Require(!lines.empty() && lines[0].rfind("#dim=", 0) == 0,
          path + ":1: malformed embedding header, expected '#dim=<int>'");
  const long dim = ParseLong(lines[0].substr(5), path + ":1");
  Require(dim >= 1, path + ":1: dim must be >= 1");
  EmbeddingMatrix emb;
  emb.values.setZero(static_cast<long>(table.Size()), dim);
  std::vector<bool> seen(table.Size(), false);
  long extra = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string ctx = path + ":" + std::to_string(i + 1);
    auto fields = SplitWhitespace(lines[i]);
    Require(static_cast<long>(fields.size()) == dim + 1,
            ctx + ": expected symbol plus " + std::to_string(dim) + " values");
    int idx = table.Find(fields[0]);
    if (idx < 0) {
      ++extra;
      continue;
    }
    Require(!seen[idx], ctx + ": duplicate symbol '" + fields[0] + "'");
    seen[idx] = true;
    for (long d = 0; d < dim; ++d)
      emb.values(idx, d) = ParseDouble(fields[d + 1], ctx);
  }
  for (size_t i = 0; i < table.Size(); ++i)
    Require(seen[i], path + ": table symbol '" + table.Entry(i) +
                         "' missing from embedding file");
  if (extra > 0)
    log::Warn(path + ": ignored " + std::to_string(extra) +
              " embedding symbols not present in the table");
  return emb;
}

}  // namespace speval

#endif  // SPEVAL_EMBEDDINGS_HPP_
