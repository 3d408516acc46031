// tests/acceptance/acceptance.cpp
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
// Acceptance suite. Each criterion prints one pass/fail line; the process
// exits nonzero if any criterion fails. Optional argv: criterion numbers to
// run (default all), e.g. `acceptance 5 6`.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "speval/speval.hpp"

using namespace speval;

namespace {

struct Outcome {
  int id;
  bool pass;
};

std::vector<Outcome> g_outcomes;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void Report(int id, const std::string& label, bool pass,
            const std::string& detail, double seconds) {
  g_outcomes.push_back({id, pass});
  std::printf("[%s] criterion %d: %s (%s; %.1fs)\n", pass ? "PASS" : "FAIL", id,
              label.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string Fmt(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

// --------------------------------------------------------------------------
// criterion 1: GOP oracle equivalence in wide precision

using LD = long double;

LD GopOracleWide(const MatOf<LD>& rows, long lo, long hi, long col,
                 const std::vector<LD>& priors, LD eps) {
  LD total = 0;
  for (long t = lo; t < hi; ++t) {
    LD num = 0, den = 0;
    for (long j = 0; j < rows.cols(); ++j) {
      LD w = priors.empty() ? LD(1) : priors[j];
      den += w * rows(t, j);
      if (j == col) num = w * rows(t, j);
    }
    total += std::log(std::max(num / den, eps));
  }
  return total / LD(hi - lo);
}

void Criterion1() {
  Timer timer;
  Rng rng(1001);
  LD max_diff = 0;
  const int cases = 1000;
  for (int trial = 0; trial < cases; ++trial) {
    const long frames = rng.Int(1, 50);
    const long phones = rng.Int(2, 10);
    MatOf<LD> rows(frames, phones);
    for (long t = 0; t < frames; ++t) {
      LD sum = 0;
      for (long c = 0; c < phones; ++c) {
        rows(t, c) = static_cast<LD>(rng.Uniform(1e-7, 1.0));
        sum += rows(t, c);
      }
      for (long c = 0; c < phones; ++c) rows(t, c) /= sum;
    }
    std::vector<LD> priors;
    if (trial % 2 == 1) {
      priors.resize(phones);
      LD sum = 0;
      for (auto& p : priors) {
        p = static_cast<LD>(rng.Uniform(0.05, 1.0));
        sum += p;
      }
      for (auto& p : priors) p /= sum;
    }
    const long lo = rng.Int(0, static_cast<int>(frames - 1));
    const long hi = rng.Int(static_cast<int>(lo + 1), static_cast<int>(frames));
    const long col = rng.Int(0, static_cast<int>(phones - 1));
    const LD eps = 1e-10L;
    LD got = GopCore<LD>(rows, lo, hi, col, priors, eps);
    LD want = GopOracleWide(rows, lo, hi, col, priors, eps);
    max_diff = std::max(max_diff, std::abs(got - want));
  }
  const double secs = timer.Seconds();
  const bool pass = max_diff <= 1e-12L && secs < 10.0;
  Report(1, "gop matches the independent per-frame log-mean oracle", pass,
         Fmt("%d cases, max |diff| %.2Le, limit 1e-12", cases, max_diff), secs);
}

// --------------------------------------------------------------------------
// criterion 2: tempo normalization and splice dimensions

void Criterion2() {
  Timer timer;
  Rng rng(2002);
  TempoConfig cfg;
  double worst_mean = 0, worst_std = 0;
  bool dims_ok = true;
  const int cases = 1000;
  for (int trial = 0; trial < cases; ++trial) {
    const int n = rng.Int(2, 40);
    std::vector<double> durations(n);
    for (auto& d : durations) d = rng.Uniform(0.02, 0.5);
    auto instants = TempoInstants(durations, cfg);
    double mean = 0;
    for (const auto& in : instants) mean += in[1];
    mean /= n;
    double var = 0;
    for (const auto& in : instants) var += (in[1] - mean) * (in[1] - mean);
    var /= n;
    const double sigma = std::sqrt(var);
    if (sigma < cfg.sigma_floor) continue;  // degenerate draw; not in scope
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(sigma - 1.0));
    const int k = rng.Int(0, 5);
    const int i = rng.Int(0, n - 1);
    if (TempoSplice(instants, i, k).size() != 2 * (2 * k + 1)) dims_ok = false;
    if (DurationVector(durations, i, k).size() != 2 * (2 * k + 1)) dims_ok = false;
  }
  const double secs = timer.Seconds();
  const bool pass = worst_mean <= 1e-9 && worst_std <= 1e-9 && dims_ok;
  Report(2, "per-sentence tempo z-scores normalize; splice dims exact", pass,
         Fmt("%d sentences, worst |mean| %.1e, worst |std-1| %.1e, dims %s",
             cases, worst_mean, worst_std, dims_ok ? "ok" : "wrong"),
         secs);
}

// --------------------------------------------------------------------------
// criterion 3: gradient check on a downsized scorer

void Criterion3() {
  Timer timer;
  ScorerConfig cfg;
  cfg.layout = FeatureLayout::Raw(6);
  cfg.hidden = 4;
  cfg.layers = 2;
  cfg.languages = {"en"};
  ScoringModel<LD> model(cfg);
  Rng prng(3003);
  for (auto& p : model.Params()) p = static_cast<LD>(prng.Uniform(-0.5, 0.5));

  std::vector<SeqExample<LD>> storage;
  for (int i = 0; i < 2; ++i) {
    SeqExample<LD> ex;
    ex.id = "g" + std::to_string(i);
    ex.language = "en";
    ex.features.resize(4, 6);  // 3 phones plus the end row
    Rng rng(3100 + i);
    for (long r = 0; r < 4; ++r)
      for (long c = 0; c < 6; ++c)
        ex.features(r, c) = static_cast<LD>(rng.Uniform(-1, 1));
    ex.target.resize(3);
    for (int m = 0; m < 3; ++m)
      ex.target(m) = static_cast<LD>(rng.Uniform(-0.8, 0.8));
    storage.push_back(std::move(ex));
  }
  std::vector<const SeqExample<LD>*> batch = {&storage[0], &storage[1]};
  std::vector<LD> grad;
  BatchGradient(model, batch, &grad);

  double worst_rel = 0;
  std::string worst_block = "-";
  const LD eps = 1e-6L;
  auto& params = model.Params();
  for (const auto& block : model.Blocks()) {
    LD err_sq = 0, ref_sq = 0;
    for (long i = block.offset; i < block.offset + block.Size(); ++i) {
      const LD saved = params[i];
      params[i] = saved + eps;
      const LD up = BatchLoss(model, batch);
      params[i] = saved - eps;
      const LD down = BatchLoss(model, batch);
      params[i] = saved;
      const LD fd = (up - down) / (2 * eps);
      err_sq += (grad[i] - fd) * (grad[i] - fd);
      ref_sq += fd * fd;
    }
    const double rel = static_cast<double>(std::sqrt(err_sq) /
                                           std::max(std::sqrt(ref_sq), 1e-12L));
    if (rel > worst_rel) {
      worst_rel = rel;
      worst_block = block.name;
    }
  }
  const double secs = timer.Seconds();
  const bool pass = worst_rel < 1e-4 && secs < 60.0;
  Report(3, "analytic gradients match central finite differences", pass,
         Fmt("worst group %s rel err %.2e, limit 1e-4", worst_block.c_str(),
             worst_rel),
         secs);
}

// --------------------------------------------------------------------------
// criterion 4: interchangeable-pair embedding property

void Criterion4() {
  Timer timer;
  std::vector<std::string> phones = {"x", "y"};
  for (int i = 0; i < 8; ++i) phones.push_back("c" + std::to_string(i));
  auto table = MultilingualPhonemeTable::Build({{"en", phones}});
  SynthConfig scfg;
  scfg.language = "en";
  scfg.emb_lines = 2000;
  scfg.emb_pair_a = "x";
  scfg.emb_pair_b = "y";
  scfg.seed = 44;
  auto lines = GenerateEmbeddingCorpus(scfg, table);
  std::vector<std::vector<int>> corpus;
  for (const auto& line : lines) {
    std::vector<int> ids;
    for (const auto& tok : line) ids.push_back(table.IndexOf(tok));
    corpus.push_back(std::move(ids));
  }

  const int a = table.Find("en_x");
  const int b = table.Find("en_y");
  int passes = 0;
  std::string detail;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SkipgramConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 10;
    cfg.seed = seed;
    auto emb = TrainEmbeddings(corpus, table, cfg);
    auto cosine = [&](int u, int v) {
      Vector x = emb.values.row(u).transpose();
      Vector y = emb.values.row(v).transpose();
      return x.dot(y) / (x.norm() * y.norm());
    };
    const double pair_cos = cosine(a, b);
    std::vector<double> others;
    for (size_t i = 0; i < table.Size(); ++i) {
      if (static_cast<int>(i) == a || static_cast<int>(i) == b) continue;
      others.push_back(cosine(a, static_cast<int>(i)));
    }
    std::sort(others.begin(), others.end());
    const size_t idx = static_cast<size_t>(std::ceil(
                           0.95 * static_cast<double>(others.size()))) -
                       1;
    const double pct95 = others[idx];
    const bool ok = pair_cos > pct95;
    if (ok) ++passes;
    detail += Fmt("%s%.3f>%.3f", seed == 1 ? "" : " ", pair_cos, pct95);
  }
  const double secs = timer.Seconds();
  const bool pass = passes >= 4 && secs < 120.0;
  Report(4, "interchangeable pair beats the 95th cosine percentile", pass,
         Fmt("%d/5 seeds [%s]", passes, detail.c_str()), secs);
}

// --------------------------------------------------------------------------
// shared machinery for the synthetic training experiments (criteria 5-7)

std::vector<LabeledFeatures> AssembleCorpus(
    const SynthCorpus& corpus, const MultilingualPhonemeTable& table,
    const EmbeddingMatrix* emb, const FeatureSpec& spec,
    const TempoConfig& tempo) {
  std::vector<LabeledFeatures> out(corpus.items.size());
  ParallelFor(static_cast<long>(corpus.items.size()), 4, [&](long i) {
    const auto& item = corpus.items[i];
    PhoneFeatureMatrix f =
        Assemble(item.utt, item.post, spec.pitch ? &item.pitch : nullptr,
                 spec.phonemb ? &table : nullptr, emb, GopConfig{}, tempo,
                 spec);
    out[i] = MakeLabeled(item.utt, std::move(f), Aggregation::kMean);
  });
  return out;
}

struct ExperimentModel {
  int hidden = 32;
  int epochs = 30;
  int patience = 8;
  double lr = 1e-3;
  double val_frac = 0.15;
};

ScoringModelD TrainOn(const std::vector<LabeledFeatures>& train,
                      const std::vector<std::string>& languages,
                      const ExperimentModel& opt, uint64_t seed) {
  ScorerConfig cfg;
  cfg.layout = train[0].layout;
  cfg.hidden = opt.hidden;
  cfg.layers = 2;
  cfg.languages = languages;
  cfg.seed = seed;
  ScoringModelD model(cfg);
  TrainConfig tcfg;
  tcfg.epochs = opt.epochs;
  tcfg.patience = opt.patience;
  tcfg.lr = opt.lr;
  tcfg.validation_fraction = opt.val_frac;
  tcfg.seed = seed;
  if (languages.size() == 1) {
    Train(model, ToDataset(train, model.Metrics()), tcfg);
  } else {
    TrainMultitask(model, SplitByLanguage(train, model.Metrics()), tcfg);
  }
  return model;
}

double MetricPcc(const MetricReport& report, int metric) {
  if (!report.metrics[metric] || !report.metrics[metric]->pcc) return 0.0;
  return *report.metrics[metric]->pcc;
}

double MeanPcc(const MetricReport& report) {
  double acc = 0;
  int n = 0;
  for (int m = 0; m < kNumMetrics; ++m)
    if (report.metrics[m]) {
      acc += MetricPcc(report, m);
      ++n;
    }
  return n ? acc / n : 0.0;
}

// criterion 5: rhythm needs timing features, gop alone carries none

void Criterion5() {
  Timer timer;
  std::vector<std::string> phones;
  for (int i = 0; i < 12; ++i) phones.push_back("p" + std::to_string(i));
  auto table = MultilingualPhonemeTable::Build({{"sa", phones}});

  SynthConfig cfg;
  cfg.language = "sa";
  cfg.rhythm_class = RhythmClass::kStress;
  cfg.n_utterances = 700;  // 500 train + 200 test
  cfg.phones_min = 8;
  cfg.phones_max = 16;
  cfg.n_raters = 3;
  cfg.rater_noise = 0.4;  // 0.1 of the 1..5 scale range
  cfg.seed = 505;
  auto corpus = Generate(cfg, table);

  TempoConfig tempo;
  FeatureSpec both{true, TimingSlot::kTempo, false, false, 32};
  FeatureSpec gop_only{true, TimingSlot::kNone, false, false, 32};
  auto data_both = AssembleCorpus(corpus, table, nullptr, both, tempo);
  auto data_gop = AssembleCorpus(corpus, table, nullptr, gop_only, tempo);

  auto split = [](const std::vector<LabeledFeatures>& all) {
    std::vector<LabeledFeatures> train(all.begin(), all.begin() + 500);
    std::vector<LabeledFeatures> test(all.begin() + 500, all.end());
    return std::make_pair(train, test);
  };
  ExperimentModel opt;
  auto [train_b, test_b] = split(data_both);
  auto model_b = TrainOn(train_b, {"sa"}, opt, 1);
  const double pcc_both =
      MetricPcc(Evaluate(model_b, test_b, Aggregation::kMean, 4), kRhythm);
  auto [train_g, test_g] = split(data_gop);
  auto model_g = TrainOn(train_g, {"sa"}, opt, 1);
  // constant predictions (undefined pcc) would mean zero rhythm information
  const double pcc_gop =
      MetricPcc(Evaluate(model_g, test_g, Aggregation::kMean, 4), kRhythm);
  const double secs = timer.Seconds();
  const bool pass = pcc_both >= 0.8 && pcc_gop <= 0.3 && secs < 600.0;
  Report(5, "rhythm pcc: gop+tempo >= 0.8, gop alone <= 0.3", pass,
         Fmt("gop+tempo %.3f, gop-only %.3f", pcc_both, pcc_gop), secs);
}

// criteria 6 and 7: multi-task gain and adaptation on a low-resource language

void Criteria6And7() {
  Timer timer;
  std::vector<std::string> phones_a, phones_b;
  for (int i = 0; i < 12; ++i) {
    phones_a.push_back("a" + std::to_string(i));
    phones_b.push_back("b" + std::to_string(i));
  }
  auto table =
      MultilingualPhonemeTable::Build({{"sa", phones_a}, {"tb", phones_b}});

  SynthConfig base;
  base.phones_min = 8;
  base.phones_max = 14;
  base.n_raters = 3;
  base.rater_noise = 0.5;

  SynthConfig cfg_a = base;
  cfg_a.language = "sa";
  cfg_a.rhythm_class = RhythmClass::kSyllable;
  cfg_a.n_utterances = 2000;
  cfg_a.seed = 606;

  SynthConfig cfg_b_train = base;
  cfg_b_train.language = "tb";
  cfg_b_train.rhythm_class = RhythmClass::kMora;
  cfg_b_train.n_utterances = 200;
  cfg_b_train.seed = 707;

  SynthConfig cfg_b_test = cfg_b_train;
  cfg_b_test.n_utterances = 400;
  cfg_b_test.seed = 808;
  cfg_b_test.id_prefix = "tst";

  auto corpus_a = Generate(cfg_a, table);
  auto corpus_b_train = Generate(cfg_b_train, table);
  auto corpus_b_test = Generate(cfg_b_test, table);

  // quick multilingual embeddings for the phonemb slot
  SynthConfig emb_cfg_a = cfg_a;
  emb_cfg_a.emb_lines = 1500;
  SynthConfig emb_cfg_b = cfg_b_train;
  emb_cfg_b.emb_lines = 1500;
  auto lines = GenerateEmbeddingCorpus(emb_cfg_a, table);
  auto lines_b = GenerateEmbeddingCorpus(emb_cfg_b, table);
  lines.insert(lines.end(), lines_b.begin(), lines_b.end());
  std::vector<std::vector<int>> corpus_ids;
  for (const auto& line : lines) {
    std::vector<int> ids;
    for (const auto& tok : line) ids.push_back(table.IndexOf(tok));
    corpus_ids.push_back(std::move(ids));
  }
  SkipgramConfig sgcfg;
  sgcfg.dim = 16;
  sgcfg.epochs = 5;
  sgcfg.seed = 11;
  auto emb = TrainEmbeddings(corpus_ids, table, sgcfg);

  FeatureSpec spec;
  spec.emb_dim = 16;
  TempoConfig tempo;
  auto feats_a = AssembleCorpus(corpus_a, table, &emb, spec, tempo);
  auto feats_b_train = AssembleCorpus(corpus_b_train, table, &emb, spec, tempo);
  auto feats_b_test = AssembleCorpus(corpus_b_test, table, &emb, spec, tempo);

  auto merged = feats_a;
  merged.insert(merged.end(), feats_b_train.begin(), feats_b_train.end());

  ExperimentModel opt;
  opt.epochs = 25;
  opt.patience = 6;

  double gain_sum = 0, mono_sum = 0, adapt_sum = 0;
  std::string per_seed;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    auto mono_b = TrainOn(feats_b_train, {"tb"}, opt, seed);
    const double pcc_mono =
        MeanPcc(Evaluate(mono_b, feats_b_test, Aggregation::kMean, 4));

    auto multi = TrainOn(merged, {"sa", "tb"}, opt, seed);
    const double pcc_multi =
        MeanPcc(Evaluate(multi, feats_b_test, Aggregation::kMean, 4));

    auto mono_a = TrainOn(feats_a, {"sa"}, opt, seed);
    TrainConfig acfg;
    acfg.epochs = opt.epochs;
    acfg.patience = opt.patience;
    acfg.lr = opt.lr;
    acfg.validation_fraction = opt.val_frac;
    acfg.seed = seed;
    auto adapted =
        Adapt(mono_a, "tb", ToDataset(feats_b_train, mono_a.Metrics()), acfg);
    const double pcc_adapt =
        MeanPcc(Evaluate(adapted, feats_b_test, Aggregation::kMean, 4));

    gain_sum += pcc_multi - pcc_mono;
    mono_sum += pcc_mono;
    adapt_sum += pcc_adapt;
    per_seed += Fmt("%sseed%llu mono %.3f multi %.3f adapt %.3f",
                    seed == 1 ? "" : " | ",
                    static_cast<unsigned long long>(seed), pcc_mono, pcc_multi,
                    pcc_adapt);
  }
  const double mean_gain = gain_sum / 3.0;
  const double mean_mono = mono_sum / 3.0;
  const double mean_adapt = adapt_sum / 3.0;
  const double secs = timer.Seconds();

  const bool pass6 = mean_gain >= 0.03 && secs < 1800.0;
  Report(6, "multi-task beats the small monolingual baseline by >= 0.03", pass6,
         Fmt("mean gain %.3f [%s]", mean_gain, per_seed.c_str()), secs);
  const bool pass7 = mean_adapt >= mean_mono;
  Report(7, "adaptation from the big language matches or beats from-scratch",
         pass7, Fmt("adapt %.3f vs mono %.3f", mean_adapt, mean_mono), secs);
}

// --------------------------------------------------------------------------
// criterion 8: metric correctness

double PccOracle(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  long double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double cov = 0, vx = 0, vy = 0;
  for (size_t i = 0; i < n; ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cov / n / (std::sqrt(vx / n) * std::sqrt(vy / n)));
}

void Criterion8() {
  Timer timer;
  Rng rng(8008);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.Int(2, 50);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.Uniform(-10, 10);
      y[i] = rng.Uniform(-10, 10);
    }
    if (n == 2 && (x[0] == x[1] || y[0] == y[1])) continue;
    worst = std::max(worst, std::abs(Pcc(x, y) - PccOracle(x, y)));
    long double m = 0;
    for (int i = 0; i < n; ++i) m += (x[i] - y[i]) * (x[i] - y[i]);
    worst = std::max(worst, std::abs(Mse(x, y) - static_cast<double>(m / n)));
  }

  double worst_affine = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.Int(3, 40);
    std::vector<double> x(n), y(n), ax(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.Uniform(-1, 1);
      y[i] = rng.Uniform(-1, 1);
    }
    const double a = rng.Uniform(0.1, 5.0);
    const double b = rng.Uniform(-4.0, 4.0);
    for (int i = 0; i < n; ++i) ax[i] = a * x[i] + b;
    worst_affine = std::max(worst_affine, std::abs(Pcc(ax, y) - Pcc(x, y)));
  }

  double worst_irr = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n_raters = rng.Int(3, 6);
    const int items = rng.Int(20, 60);
    std::vector<std::vector<double>> raters(n_raters,
                                            std::vector<double>(items));
    for (int i = 0; i < items; ++i) {
      const double latent = rng.Uniform(1, 5);
      for (int r = 0; r < n_raters; ++r)
        raters[r][i] = latent + 0.4 * rng.Normal();
    }
    const Aggregation mode =
        trial % 2 ? Aggregation::kMean : Aggregation::kMedian;
    // independent leave-one-out recomputation
    long double acc = 0;
    for (int i = 0; i < n_raters; ++i) {
      std::vector<double> agg(items);
      for (int t = 0; t < items; ++t) {
        std::vector<double> col;
        for (int j = 0; j < n_raters; ++j)
          if (j != i) col.push_back(raters[j][t]);
        std::sort(col.begin(), col.end());
        if (mode == Aggregation::kMean) {
          long double s = 0;
          for (double v : col) s += v;
          agg[t] = static_cast<double>(s / col.size());
        } else {
          agg[t] = col.size() % 2
                       ? col[col.size() / 2]
                       : 0.5 * (col[col.size() / 2 - 1] + col[col.size() / 2]);
        }
      }
      acc += PccOracle(raters[i], agg);
    }
    worst_irr = std::max(worst_irr,
                         std::abs(InterraterUpperbound(raters, mode) -
                                  static_cast<double>(acc / n_raters)));
  }

  const double secs = timer.Seconds();
  const bool pass =
      worst <= 1e-12 && worst_affine <= 1e-12 && worst_irr <= 1e-12;
  Report(8, "pcc/mse/interrater match definitional oracles", pass,
         Fmt("defs %.1e, affine %.1e, interrater %.1e, limit 1e-12", worst,
             worst_affine, worst_irr),
         secs);
}

// --------------------------------------------------------------------------
// criterion 9: parameter budget of the default topology

void Criterion9() {
  Timer timer;
  ScorerConfig cfg;  // defaults: 47-wide layout, hidden 256, 2 layers
  cfg.languages = {"en"};
  ScoringModelD model(cfg);
  const long total = model.ParamCount();
  const long closed = ScoringModelD::ClosedFormCount(47, 256, 2, 1, 3);
  const double ratio = std::abs(static_cast<double>(total) - 2e6) / 2e6;
  const double secs = timer.Seconds();
  const bool pass = total == closed && ratio <= 0.10;
  Report(9, "default topology is within 10% of 2M parameters", pass,
         Fmt("%ld parameters, closed form %ld, off 2M by %.2f%%", total, closed,
             ratio * 100.0),
         secs);
}

// --------------------------------------------------------------------------
// criterion 10: checkpoint persistence

void Criterion10() {
  Timer timer;
  std::vector<std::string> phones;
  for (int i = 0; i < 8; ++i) phones.push_back("p" + std::to_string(i));
  auto table = MultilingualPhonemeTable::Build({{"sa", phones}});
  SynthConfig cfg;
  cfg.language = "sa";
  cfg.n_utterances = 50;
  cfg.seed = 1010;
  cfg.emb_lines = 400;
  auto corpus = Generate(cfg, table);
  auto lines = GenerateEmbeddingCorpus(cfg, table);
  std::vector<std::vector<int>> ids;
  for (const auto& line : lines) {
    std::vector<int> l;
    for (const auto& tok : line) l.push_back(table.IndexOf(tok));
    ids.push_back(std::move(l));
  }
  SkipgramConfig sgcfg;
  sgcfg.dim = 8;
  sgcfg.epochs = 3;
  auto emb = TrainEmbeddings(ids, table, sgcfg);
  FeatureSpec spec;
  spec.emb_dim = 8;
  auto data = AssembleCorpus(corpus, table, &emb, spec, TempoConfig{});

  ExperimentModel opt;
  opt.hidden = 16;
  opt.epochs = 3;
  auto model = TrainOn(data, {"sa"}, opt, 3);

  const std::string path =
      (std::filesystem::temp_directory_path() /
       ("speval_accept_" + std::to_string(::getpid()) + ".ckpt"))
          .string();
  SaveModel(path, model);
  auto loaded = LoadModel(path);
  std::filesystem::remove(path);

  bool identical = true;
  for (const auto& item : data) {
    auto y1 = model.Forward(item.features, item.language);
    auto y2 = loaded.Forward(item.features, item.language);
    if (std::memcmp(y1.data(), y2.data(), sizeof(double) * y1.size()) != 0)
      identical = false;
  }
  const double secs = timer.Seconds();
  Report(10, "save/load round trip keeps predictions bitwise identical",
         identical, Fmt("%zu utterances", data.size()), secs);
}

}  // namespace

int main(int argc, char** argv) {
  log::Quiet() = true;
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

  if (want(1)) Criterion1();
  if (want(2)) Criterion2();
  if (want(3)) Criterion3();
  if (want(4)) Criterion4();
  if (want(5)) Criterion5();
  if (want(6) || want(7)) Criteria6And7();
  if (want(8)) Criterion8();
  if (want(9)) Criterion9();
  if (want(10)) Criterion10();

  int failed = 0;
  for (const auto& o : g_outcomes)
    if (!o.pass) ++failed;
  std::printf("%zu criteria run, %d failed\n", g_outcomes.size(), failed);
  return failed == 0 ? 0 : 1;
}
