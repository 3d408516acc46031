// tools/speval.cpp
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
// Command-line front end. One multiplexed binary; every subcommand reads and
// writes the documented text formats, takes an output directory, and echoes
// its effective configuration (plus the toolkit version) into that directory.
// Exit codes: 0 success, 1 data/validation error, 2 usage error.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "speval/speval.hpp"

namespace fs = std::filesystem;
using namespace speval;

namespace {

const char* kManifestHelp =
    "Manifest: one JSON object per line:\n"
    "  {\"id\":\"u1\",\"language\":\"en\",\"phones\":[{\"phone\":\"en_AA\","
    "\"start\":0.0,\"dur\":0.12}],\n"
    "   \"scores\":{\"pronunciation\":[8],\"rhythm\":[7],\"intonation\":[9],"
    "\"scale_min\":1,\"scale_max\":10},\n"
    "   \"posterior_ref\":\"posterior/u1.post\",\"pitch_ref\":\"pitch/u1.pitch\"}\n"
    "Refs are resolved relative to the manifest directory.\n";

const char* kPosteriorHelp =
    "Posterior file: '#step_ms=10', a comma-separated phone-label line, then\n"
    "one comma-separated probability row per frame (rows sum to 1 within 1e-3).\n"
    "Pitch file: '#step_ms=10', then 4 comma-separated values per frame\n"
    "(raw log pitch, normalized log pitch, delta log pitch, NCCF).\n";

const char* kFeatureHelp =
    "Feature file (<id>.feat): headers '#slots=', '#k=', '#D=', '#language=',\n"
    "then one comma-separated row per phone plus the end-symbol row, e.g.\n"
    "  #slots=gop,tempo\\n#k=2\\n#D=0\\n#language=en\\n-0.11,5.0,...\n";

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, dir + ": cannot create directory");
}

// Effective configuration (after config-file and flag merging) goes next to
// every command's outputs, with the toolkit version.
void WriteEffectiveConfig(CLI::App* sub, const std::string& out_dir) {
  std::string text = "# speval " + std::string(kVersion) + " -- " +
                     sub->get_name() + "\n";
  text += sub->config_to_str(true, false);
  WriteFile((fs::path(out_dir) / "effective-config.txt").string(), text);
}

std::unordered_map<std::string, double> LoadPriorsFile(const std::string& path) {
  std::unordered_map<std::string, double> priors;
  auto lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty() || lines[i][0] == '#') continue;
    auto fields = SplitWhitespace(lines[i]);
    const std::string ctx = path + ":" + std::to_string(i + 1);
    Require(fields.size() == 2, ctx + ": expected 'symbol weight'");
    Require(priors.emplace(fields[0], ParseDouble(fields[1], ctx)).second,
            ctx + ": duplicate symbol '" + fields[0] + "'");
  }
  Require(!priors.empty(), path + ": empty priors file");
  return priors;
}

struct GenSynthOpts {
  std::string out, table_path, inventory, language = "syn";
  std::string rhythm = "stress";
  int jobs = 1;
  SynthConfig cfg;
};

void RunGenSynth(const GenSynthOpts& opts) {
  EnsureDir(opts.out);
  SynthConfig cfg = opts.cfg;
  cfg.language = opts.language;
  cfg.rhythm_class = RhythmClassFromName(opts.rhythm);
  MultilingualPhonemeTable table = [&] {
    if (!opts.inventory.empty()) {
      std::vector<std::string> symbols;
      for (auto& s : Split(opts.inventory, ','))
        if (!s.empty()) symbols.push_back(s);
      auto t = MultilingualPhonemeTable::Build({{cfg.language, symbols}});
      t.Save((fs::path(opts.out) / "table.txt").string());
      return t;
    }
    Require(!opts.table_path.empty(), "gen-synth needs --table or --inventory");
    return MultilingualPhonemeTable::Load(opts.table_path);
  }();
  SynthCorpus corpus = Generate(cfg, table, opts.jobs);
  WriteCorpus(corpus, opts.out);
  if (cfg.emb_lines > 0) {
    auto lines = GenerateEmbeddingCorpus(cfg, table);
    WriteEmbeddingCorpus((fs::path(opts.out) / "emb_corpus.txt").string(), lines);
  }
  log::Info("wrote " + std::to_string(corpus.items.size()) + " utterances to " +
            opts.out);
}

struct BuildTableOpts {
  std::string out;
  std::vector<std::string> langs;  // tag=path entries, in order
};

void RunBuildTable(const BuildTableOpts& opts) {
  EnsureDir(opts.out);
  std::vector<std::pair<std::string, std::vector<std::string>>> per_language;
  for (const auto& spec : opts.langs) {
    auto cut = spec.find('=');
    Require(cut != std::string::npos,
            "--lang expects tag=path, got '" + spec + "'");
    const std::string tag = spec.substr(0, cut);
    std::vector<std::string> symbols;
    for (const auto& line : ReadLines(spec.substr(cut + 1))) {
      auto t = Trim(line);
      if (!t.empty() && t[0] != '#') symbols.push_back(t);
    }
    per_language.emplace_back(tag, std::move(symbols));
  }
  auto table = MultilingualPhonemeTable::Build(per_language);
  table.Save((fs::path(opts.out) / "table.txt").string());
  log::Info("table with " + std::to_string(table.Size()) + " entries written");
}

struct TrainEmbedOpts {
  std::string out, table_path, corpus_path;
  SkipgramConfig cfg;
};

void RunTrainEmbed(const TrainEmbedOpts& opts) {
  EnsureDir(opts.out);
  auto table = MultilingualPhonemeTable::Load(opts.table_path);
  auto corpus = LoadEmbeddingCorpus(opts.corpus_path, table);
  auto emb = TrainEmbeddings(corpus, table, opts.cfg);
  SaveEmbeddings((fs::path(opts.out) / "embeddings.txt").string(), table, emb);
  log::Info("trained " + std::to_string(emb.Rows()) + " x " +
            std::to_string(emb.Dim()) + " embeddings");
}

struct ExtractOpts {
  std::string out, manifest, table_path, embeddings, priors;
  std::string slots = "gop,tempo,phonemb,pitch";
  int k = 2;
  int emb_dim = 32;
  double gop_epsilon = 1e-10;
  double sigma_floor = 1e-6;
  int jobs = 1;
};

void RunExtract(const ExtractOpts& opts) {
  EnsureDir(opts.out);
  auto table = MultilingualPhonemeTable::Load(opts.table_path);
  FeatureLayout layout =
      FeatureLayout::FromSlotsString(opts.slots, opts.k, opts.emb_dim);
  const FeatureSpec& spec = layout.spec;
  EmbeddingMatrix emb;
  if (spec.phonemb) {
    Require(!opts.embeddings.empty(),
            "--embeddings is required when the phonemb slot is active");
    emb = LoadEmbeddings(opts.embeddings, table);
  }
  std::unordered_map<std::string, double> prior_weights;
  if (!opts.priors.empty()) prior_weights = LoadPriorsFile(opts.priors);

  auto utts = LoadManifest(opts.manifest, table);
  const std::string base = DirName(opts.manifest);
  TempoConfig tempo_cfg{opts.k, opts.sigma_floor};
  ParallelFor(static_cast<long>(utts.size()), opts.jobs, [&](long i) {
    const Utterance& utt = utts[i];
    PosteriorMatrix post = LoadPosteriors(ResolveRef(base, utt.posterior_ref));
    PitchFrames pitch;
    if (spec.pitch) {
      Require(!utt.pitch_ref.empty(), "utterance '" + utt.id +
                                          "': pitch slot active but the "
                                          "manifest has no pitch_ref");
      pitch = LoadPitch(ResolveRef(base, utt.pitch_ref));
    }
    GopConfig gop_cfg;
    gop_cfg.epsilon = opts.gop_epsilon;
    if (!prior_weights.empty())
      gop_cfg.priors = MakePriors(post.phone_labels, prior_weights);
    PhoneFeatureMatrix f =
        Assemble(utt, post, spec.pitch ? &pitch : nullptr,
                 spec.phonemb ? &table : nullptr, spec.phonemb ? &emb : nullptr,
                 gop_cfg, tempo_cfg, spec);
    SaveFeatures((fs::path(opts.out) / (utt.id + ".feat")).string(), f);
  });
  log::Info("extracted features (width " + std::to_string(layout.width) +
            ") for " + std::to_string(utts.size()) + " utterances");
}

struct TrainOpts {
  std::string out, features_dir;
  std::vector<std::string> manifests;
  std::string source;    // adapt only
  std::string language;  // adapt target override
  std::string aggregation = "mean";
  std::string metrics = "pronunciation,rhythm,intonation";
  std::string table_path;
  int hidden = 256;
  int layers = 2;
  TrainConfig cfg;
  uint64_t seed = 1;
  int jobs = 1;
};

std::vector<LabeledFeatures> LoadLabeled(const TrainOpts& opts) {
  Require(!opts.table_path.empty(), "--table is required");
  auto table = MultilingualPhonemeTable::Load(opts.table_path);
  std::vector<LabeledFeatures> data;
  Aggregation mode = AggregationFromName(opts.aggregation);
  for (const auto& manifest : opts.manifests) {
    auto utts = LoadManifest(manifest, table);
    auto part = LoadFeatureDir(utts, opts.features_dir, mode, opts.jobs);
    data.insert(data.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  Require(!data.empty(), "no utterances in the given manifests");
  for (size_t i = 1; i < data.size(); ++i)
    Require(data[i].layout == data[0].layout,
            "feature layouts differ between manifests");
  return data;
}

std::vector<int> ParseMetrics(const std::string& csv) {
  std::vector<int> out;
  for (const auto& name : Split(csv, ','))
    if (!name.empty()) out.push_back(MetricFromName(name));
  return out;
}

void SaveTrainOutputs(const std::string& out_dir, const ScoringModelD& model,
                      const TrainResult& result) {
  SaveModel((fs::path(out_dir) / "model.ckpt").string(), model);
  WriteFile((fs::path(out_dir) / "loss_curve.csv").string(), result.CurveCsv());
}

void RunTrain(const TrainOpts& opts, bool multitask) {
  EnsureDir(opts.out);
  auto data = LoadLabeled(opts);
  std::vector<int> metrics = ParseMetrics(opts.metrics);
  auto by_language = SplitByLanguage(data, metrics);

  ScorerConfig mcfg;
  mcfg.layout = data[0].layout;
  mcfg.hidden = opts.hidden;
  mcfg.layers = opts.layers;
  mcfg.metrics = metrics;
  mcfg.seed = opts.seed;
  for (const auto& [lang, part] : by_language) mcfg.languages.push_back(lang);

  TrainConfig tcfg = opts.cfg;
  tcfg.seed = opts.seed;

  TrainResult result;
  ScoringModelD model(mcfg);
  std::cout << model.ParamReport() << "\n";
  if (multitask) {
    Require(by_language.size() >= 2,
            "train-multitask needs utterances from >= 2 languages");
    result = TrainMultitask(model, by_language, tcfg);
  } else {
    Require(by_language.size() == 1,
            "train expects a single language; use train-multitask");
    result = Train(model, by_language.begin()->second, tcfg);
  }
  SaveTrainOutputs(opts.out, model, result);
  std::cout << "best epoch " << result.best_epoch << ", validation loss "
            << result.best_val << "\n";
}

void RunAdapt(const TrainOpts& opts) {
  EnsureDir(opts.out);
  auto source = LoadModel(opts.source);
  auto data = LoadLabeled(opts);
  Require(data[0].layout == source.Layout(),
          "feature layout does not match the source checkpoint");
  auto by_language = SplitByLanguage(data, source.Metrics());
  Require(by_language.size() == 1, "adapt expects a single-language dataset");
  std::string target = opts.language.empty() ? by_language.begin()->first
                                             : opts.language;
  Require(target == by_language.begin()->first,
          "--language does not match the dataset language");
  TrainConfig tcfg = opts.cfg;
  tcfg.seed = opts.seed;
  TrainResult result;
  ScoringModelD model =
      Adapt(source, target, by_language.begin()->second, tcfg, &result);
  std::cout << model.ParamReport() << "\n";
  SaveTrainOutputs(opts.out, model, result);
  std::cout << "best epoch " << result.best_epoch << ", validation loss "
            << result.best_val << "\n";
}

struct EvalOpts {
  std::string out, model_path, features_dir, table_path;
  std::vector<std::string> manifests;
  std::string aggregation = "mean";
  bool per_utterance = false;
  int jobs = 1;
};

void RunEvaluate(const EvalOpts& opts) {
  EnsureDir(opts.out);
  auto model = LoadModel(opts.model_path);
  auto table = MultilingualPhonemeTable::Load(opts.table_path);
  Aggregation mode = AggregationFromName(opts.aggregation);
  std::vector<LabeledFeatures> data;
  for (const auto& manifest : opts.manifests) {
    auto utts = LoadManifest(manifest, table);
    auto part = LoadFeatureDir(utts, opts.features_dir, mode, opts.jobs);
    data.insert(data.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  Require(!data.empty(), "no utterances to evaluate");
  std::vector<UtterancePrediction> dump;
  MetricReport report = Evaluate(model, data, mode, opts.jobs,
                                 opts.per_utterance ? &dump : nullptr);
  const std::string table_str = report.ToTable();
  std::cout << table_str;
  WriteFile((fs::path(opts.out) / "report.txt").string(), table_str);
  WriteFile((fs::path(opts.out) / "report.json").string(),
            report.ToJson().dump(2) + "\n");
  if (opts.per_utterance) {
    std::string csv = "id";
    for (int m : model.Metrics())
      csv += std::string(",pred_") + kMetricNames[m] + ",target_" +
             kMetricNames[m];
    csv += "\n";
    for (const auto& u : dump) {
      csv += u.id;
      for (int m : model.Metrics())
        csv += "," + FormatDouble(*u.predicted[m]) + "," +
               FormatDouble(u.target[m]);
      csv += "\n";
    }
    WriteFile((fs::path(opts.out) / "per_utterance.csv").string(), csv);
  }
}

void RunScore(const EvalOpts& opts) {
  EnsureDir(opts.out);
  auto model = LoadModel(opts.model_path);
  auto table = MultilingualPhonemeTable::Load(opts.table_path);
  Aggregation mode = AggregationFromName(opts.aggregation);
  std::vector<LabeledFeatures> data;
  for (const auto& manifest : opts.manifests) {
    auto utts = LoadManifest(manifest, table);
    auto part = LoadFeatureDir(utts, opts.features_dir, mode, opts.jobs);
    data.insert(data.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  Require(!data.empty(), "no utterances to score");
  std::vector<Prediction> preds(data.size());
  ParallelFor(static_cast<long>(data.size()), opts.jobs, [&](long i) {
    preds[i] = Predict(model, data[i].features, data[i].language,
                       data[i].scale_min, data[i].scale_max);
  });
  std::string out;
  for (size_t i = 0; i < data.size(); ++i) {
    nlohmann::json j;
    j["id"] = data[i].id;
    j["language"] = data[i].language;
    for (int m : model.Metrics()) {
      j[kMetricNames[m]] = *preds[i].score[m];
      j["rescaled"][kMetricNames[m]] = *preds[i].rescaled[m];
    }
    out += j.dump() + "\n";
  }
  WriteFile((fs::path(opts.out) / "predictions.jsonl").string(), out);
  log::Info("scored " + std::to_string(data.size()) + " utterances");
}

void AddTrainFlags(CLI::App* sub, TrainOpts* opts) {
  sub->add_option("--manifest", opts->manifests, "Manifest file(s)")->required();
  sub->add_option("--features", opts->features_dir, "Extracted feature dir")
      ->required();
  sub->add_option("--table", opts->table_path, "Phoneme table file")->required();
  sub->add_option("--hidden", opts->hidden, "Hidden units per direction");
  sub->add_option("--layers", opts->layers, "Bidirectional layer count");
  sub->add_option("--metrics", opts->metrics, "Target metrics (csv subset)");
  sub->add_option("--aggregation", opts->aggregation, "Rater aggregation: mean|median");
  sub->add_option("--epochs", opts->cfg.epochs, "Training epochs");
  sub->add_option("--batch", opts->cfg.batch_size, "Batch size");
  sub->add_option("--lr", opts->cfg.lr, "Learning rate");
  sub->add_option("--clip", opts->cfg.clip_norm, "Gradient clip (global norm)");
  sub->add_option("--val-frac", opts->cfg.validation_fraction,
                  "Validation fraction");
  sub->add_option("--patience", opts->cfg.patience, "Early-stop patience");
  sub->add_option("--seed", opts->seed, "Random seed");
  sub->add_option("--jobs", opts->jobs, "Parallel feature loading");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speval: multilingual sentence-level speech evaluation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.add_flag("--quiet", "Suppress informational output")
      ->each([](const std::string&) { log::Quiet() = true; });
  app.set_config("--config", "",
                 "Key-value config file with [subcommand] sections; "
                 "command-line flags override it");
  app.allow_config_extras(false);

  // gen-synth ---------------------------------------------------------------
  GenSynthOpts gen;
  auto* sub_gen = app.add_subcommand(
      "gen-synth", "Generate a deterministic synthetic corpus");
  sub_gen->add_option("--out", gen.out, "Output directory")->required();
  sub_gen->add_option("--table", gen.table_path, "Phoneme table file");
  sub_gen->add_option("--inventory", gen.inventory,
                      "Comma-separated unprefixed phones; writes table.txt");
  sub_gen->add_option("--language", gen.language, "Language tag");
  sub_gen->add_option("--rhythm-class", gen.rhythm,
                      "stress | syllable | mora");
  sub_gen->add_option("--n", gen.cfg.n_utterances, "Utterance count");
  sub_gen->add_option("--phones-min", gen.cfg.phones_min, "Min phones");
  sub_gen->add_option("--phones-max", gen.cfg.phones_max, "Max phones");
  sub_gen->add_option("--raters", gen.cfg.n_raters, "Raters per metric");
  sub_gen->add_option("--rater-noise", gen.cfg.rater_noise,
                      "Rater score noise (score units)");
  sub_gen->add_option("--scale-min", gen.cfg.scale_min, "Scale minimum");
  sub_gen->add_option("--scale-max", gen.cfg.scale_max, "Scale maximum");
  sub_gen->add_option("--latent-min", gen.cfg.latent_min, "Latent lower bound");
  sub_gen->add_option("--latent-max", gen.cfg.latent_max, "Latent upper bound");
  sub_gen->add_option("--duration-jitter", gen.cfg.duration_jitter,
                      "Per-phone duration jitter at latent 0");
  sub_gen->add_option("--rate-jitter", gen.cfg.rate_jitter,
                      "Per-sentence rate jitter at latent 0");
  sub_gen->add_option("--posterior-noise", gen.cfg.posterior_frame_noise,
                      "Per-frame posterior mix noise");
  sub_gen->add_option("--pitch-noise", gen.cfg.pitch_noise,
                      "Pitch frame noise at latent 0");
  sub_gen->add_option("--mora-base", gen.cfg.mora_base, "Base mora (seconds)");
  sub_gen->add_option("--emb-lines", gen.cfg.emb_lines,
                      "Embedding corpus lines (writes emb_corpus.txt)");
  sub_gen->add_option("--seed", gen.cfg.seed, "Random seed");
  sub_gen->add_option("--jobs", gen.jobs, "Parallel workers");
  sub_gen->footer(std::string("Outputs: manifest.jsonl, posterior/, pitch/, "
                              "latents.csv (id,q_pron,q_rhythm,q_inton).\n") +
                  kManifestHelp + kPosteriorHelp);
  sub_gen->callback([&] { RunGenSynth(gen); WriteEffectiveConfig(sub_gen, gen.out); });

  // build-table ---------------------------------------------------------------
  BuildTableOpts bt;
  auto* sub_bt = app.add_subcommand(
      "build-table", "Merge per-language phone lists into one prefixed table");
  sub_bt->add_option("--out", bt.out, "Output directory")->required();
  sub_bt->add_option("--lang", bt.langs,
                     "tag=path with one unprefixed symbol per line (repeatable)")
      ->required();
  sub_bt->footer(
      "Table entries are '<tag>_<symbol>' in argument order, then one\n"
      "<eos:tag> per language and a final <unk>.");
  sub_bt->callback([&] { RunBuildTable(bt); WriteEffectiveConfig(sub_bt, bt.out); });

  // train-embed ---------------------------------------------------------------
  TrainEmbedOpts te;
  auto* sub_te = app.add_subcommand(
      "train-embed", "Train phoneme embeddings by skip-gram with negative sampling");
  sub_te->add_option("--out", te.out, "Output directory")->required();
  sub_te->add_option("--table", te.table_path, "Phoneme table file")->required();
  sub_te->add_option("--corpus", te.corpus_path,
                     "Phoneme-string corpus (one line per sentence)")
      ->required();
  sub_te->add_option("--dim", te.cfg.dim, "Embedding dimension");
  sub_te->add_option("--window", te.cfg.window, "Context half-width");
  sub_te->add_option("--negatives", te.cfg.negatives, "Negatives per positive");
  sub_te->add_option("--epochs", te.cfg.epochs, "Epochs");
  sub_te->add_option("--lr", te.cfg.lr, "Initial learning rate");
  sub_te->add_option("--seed", te.cfg.seed, "Random seed");
  sub_te->footer(
      "Corpus: whitespace-separated prefixed phonemes per line, e.g.\n"
      "  en_HH en_AH en_L en_OW\n"
      "Output embeddings.txt: '#dim=32' then 'symbol v1 ... v32' per line.");
  sub_te->callback([&] { RunTrainEmbed(te); WriteEffectiveConfig(sub_te, te.out); });

  // extract -------------------------------------------------------------------
  ExtractOpts ex;
  auto* sub_ex = app.add_subcommand(
      "extract", "Assemble per-phone feature files from a manifest");
  sub_ex->add_option("--out", ex.out, "Output directory")->required();
  sub_ex->add_option("--manifest", ex.manifest, "Manifest file")->required();
  sub_ex->add_option("--table", ex.table_path, "Phoneme table file")->required();
  sub_ex->add_option("--slots", ex.slots,
                     "Active slots, csv of gop,tempo|dur,phonemb,pitch");
  sub_ex->add_option("--k", ex.k, "Context radius (phones)");
  sub_ex->add_option("--emb-dim", ex.emb_dim, "Embedding dimension D");
  sub_ex->add_option("--embeddings", ex.embeddings, "Embedding file");
  sub_ex->add_option("--priors", ex.priors,
                     "Phone priors file ('symbol weight' per line), e.g. from "
                     "training-alignment frequencies; default uniform");
  sub_ex->add_option("--gop-epsilon", ex.gop_epsilon, "Probability floor");
  sub_ex->add_option("--sigma-floor", ex.sigma_floor, "Tempo sigma floor");
  sub_ex->add_option("--jobs", ex.jobs, "Parallel workers");
  sub_ex->footer(std::string(kFeatureHelp) +
                 "Row width: 1 (gop) + 2(2k+1) (tempo or dur) + D (phonemb) + "
                 "4 (pitch)\nfor the active slots; 47 with defaults.");
  sub_ex->callback([&] { RunExtract(ex); WriteEffectiveConfig(sub_ex, ex.out); });

  // train / train-multitask / adapt -------------------------------------------
  TrainOpts tr;
  auto* sub_tr = app.add_subcommand("train", "Train a monolingual scorer");
  sub_tr->add_option("--out", tr.out, "Output directory")->required();
  AddTrainFlags(sub_tr, &tr);
  sub_tr->footer("Writes model.ckpt (binary checkpoint) and loss_curve.csv.");
  sub_tr->callback([&] { RunTrain(tr, false); WriteEffectiveConfig(sub_tr, tr.out); });

  TrainOpts mt;
  auto* sub_mt = app.add_subcommand(
      "train-multitask", "Train one scorer over several languages");
  sub_mt->add_option("--out", mt.out, "Output directory")->required();
  AddTrainFlags(sub_mt, &mt);
  sub_mt->add_option("--freeze-head", mt.cfg.freeze_heads,
                     "Language tag whose head stays fixed (repeatable)");
  sub_mt->footer(
      "Languages share the recurrent backbone; each language keeps its own\n"
      "linear head. Batches mix languages proportionally to dataset sizes.");
  sub_mt->callback([&] { RunTrain(mt, true); WriteEffectiveConfig(sub_mt, mt.out); });

  TrainOpts ad;
  auto* sub_ad = app.add_subcommand(
      "adapt", "Fine-tune a trained checkpoint on a new language");
  sub_ad->add_option("--out", ad.out, "Output directory")->required();
  sub_ad->add_option("--source", ad.source, "Source checkpoint")->required();
  sub_ad->add_option("--language", ad.language, "Target language override");
  AddTrainFlags(sub_ad, &ad);
  sub_ad->footer(
      "The backbone starts from the source checkpoint; the target language\n"
      "gets a fresh zero head unless the source already has one.");
  sub_ad->callback([&] { RunAdapt(ad); WriteEffectiveConfig(sub_ad, ad.out); });

  // evaluate / score -----------------------------------------------------------
  EvalOpts ev;
  auto* sub_ev = app.add_subcommand(
      "evaluate", "Report MSE and PCC against aggregated rater scores");
  sub_ev->add_option("--out", ev.out, "Output directory")->required();
  sub_ev->add_option("--model", ev.model_path, "Model checkpoint")->required();
  sub_ev->add_option("--manifest", ev.manifests, "Manifest file(s)")->required();
  sub_ev->add_option("--features", ev.features_dir, "Extracted feature dir")
      ->required();
  sub_ev->add_option("--table", ev.table_path, "Phoneme table file")->required();
  sub_ev->add_option("--aggregation", ev.aggregation, "mean | median");
  sub_ev->add_flag("--per-utterance", ev.per_utterance,
                   "Also write per_utterance.csv prediction/target pairs");
  sub_ev->add_option("--jobs", ev.jobs, "Parallel workers");
  sub_ev->footer(
      "MSE/PCC are computed on the original rater scale after back-scaling\n"
      "the model outputs. Writes report.txt and report.json.");
  sub_ev->callback([&] { RunEvaluate(ev); WriteEffectiveConfig(sub_ev, ev.out); });

  EvalOpts sc;
  auto* sub_sc = app.add_subcommand("score", "Write per-utterance predictions");
  sub_sc->add_option("--out", sc.out, "Output directory")->required();
  sub_sc->add_option("--model", sc.model_path, "Model checkpoint")->required();
  sub_sc->add_option("--manifest", sc.manifests, "Manifest file(s)")->required();
  sub_sc->add_option("--features", sc.features_dir, "Extracted feature dir")
      ->required();
  sub_sc->add_option("--table", sc.table_path, "Phoneme table file")->required();
  sub_sc->add_option("--jobs", sc.jobs, "Parallel workers");
  sub_sc->footer(
      "predictions.jsonl: {\"id\",\"language\",\"pronunciation\",...} with\n"
      "back-scaled scores plus the raw (-1,1) outputs under \"rescaled\".");
  sub_sc->callback([&] { RunScore(sc); WriteEffectiveConfig(sub_sc, sc.out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "speval: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "speval: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
