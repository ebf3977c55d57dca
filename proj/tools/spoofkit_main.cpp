// Copyright 2026 The spoofkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Single spoofkit executable: eval, calibrate, fuse, greedy-fuse, train,
// grad-check, augment, report. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "spoofkit/augmentation.hpp"
#include "spoofkit/calibration.hpp"
#include "spoofkit/errors.hpp"
#include "spoofkit/grad_check.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/model_io.hpp"
#include "spoofkit/report.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/score_io.hpp"
#include "spoofkit/trainer.hpp"

namespace fs = std::filesystem;
using namespace spoofkit;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct GlobalOpts {
  std::uint64_t seed = kDefaultSeed;
  DcfParams dcf;
  int fit_max_iterations = 200;
  double fit_tolerance = 1e-8;
};

LabeledScoreSet LoadSet(const std::string& scores_path,
                        const std::string& keys_path) {
  JoinResult joined =
      Join(ParseScoresFile(scores_path), ParseKeysFile(keys_path));
  if (!joined.unscored_trials.empty())
    std::cerr << "warning: " << joined.unscored_trials.size()
              << " keyed trials have no score\n";
  return joined.set;
}

std::vector<Label> LabelsOf(const LabeledScoreSet& set) {
  std::vector<Label> labels;
  labels.reserve(set.records.size());
  for (const Trial& t : set.records) labels.push_back(t.label);
  return labels;
}

// Aligns a second score file on the trial order of `reference`.
std::vector<double> AlignedScores(const std::string& path,
                                  const LabeledScoreSet& reference) {
  std::vector<ScoreRecord> records = ParseScoresFile(path);
  std::map<std::string, double> by_id;
  for (const ScoreRecord& r : records) by_id[r.trial] = r.score;
  std::vector<double> out;
  out.reserve(reference.records.size());
  for (const Trial& t : reference.records) {
    auto it = by_id.find(t.id);
    if (it == by_id.end())
      throw DataError(path + ": missing score for trial '" + t.id + "'");
    out.push_back(it->second);
  }
  return out;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << text;
}

TrainConfig LoadTrainConfig(const std::string& path) {
  TrainConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::string key;
  double value;
  std::map<std::string, double*> fields = {
      {"lr_backend", &cfg.lr_backend},
      {"lr_encoder", &cfg.lr_encoder},
      {"per_epoch_decay", &cfg.per_epoch_decay},
      {"layerwise_decay", &cfg.layerwise_decay},
      {"class_weight_bonafide", &cfg.class_weight_bonafide},
      {"class_weight_spoof", &cfg.class_weight_spoof},
      {"l2_to_init_lambda", &cfg.l2_to_init_lambda},
  };
  std::map<std::string, int*> int_fields = {
      {"epochs", &cfg.epochs},
      {"patience", &cfg.patience},
      {"batch_size", &cfg.batch_size},
  };
  while (in >> key >> value) {
    if (key == "crop_frames") {
      cfg.crop_frames = static_cast<long>(value);
    } else if (fields.count(key)) {
      *fields[key] = value;
    } else if (int_fields.count(key)) {
      *int_fields[key] = static_cast<int>(value);
    } else {
      throw DataError("unknown train config key: " + key);
    }
  }
  return cfg;
}

// Manifest of `stack_path label` lines; paths resolve relative to the
// manifest location.
std::vector<TrainSample> LoadStackManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  fs::path base = fs::path(path).parent_path();
  std::vector<TrainSample> samples;
  std::string file, label;
  while (in >> file >> label) {
    int lab;
    if (label == "bonafide") {
      lab = 0;
    } else if (label == "spoof") {
      lab = 1;
    } else {
      throw DataError(path + ": unknown label '" + label + "'");
    }
    fs::path p = fs::path(file).is_absolute() ? fs::path(file) : base / file;
    samples.push_back({LoadFeatureStackFile(p.string()), lab});
  }
  if (samples.empty()) throw DataError(path + ": empty manifest");
  return samples;
}

int RunEval(const GlobalOpts& g, const std::string& scores,
            const std::string& keys, bool linear_eer) {
  LabeledScoreSet set = LoadSet(scores, keys);
  MetricReport report = ComputeMetrics(set, g.dcf, !linear_eer);
  std::cout << report.ToText();
  return 0;
}

int RunCalibrate(const GlobalOpts& g, const std::string& scores,
                 const std::string& keys, const std::string& out,
                 const std::string& scores_out) {
  LabeledScoreSet set = LoadSet(scores, keys);
  std::vector<double> raw;
  for (const Trial& t : set.records) raw.push_back(t.score);
  FitConfig cfg;
  cfg.effective_prior = EffectivePrior(g.dcf);
  cfg.max_iterations = g.fit_max_iterations;
  cfg.gradient_tolerance = g.fit_tolerance;
  std::string warning;
  FusionModel model = Fit({raw}, LabelsOf(set), cfg, &warning);
  model.system_names = {fs::path(scores).stem().string()};
  if (!warning.empty()) std::cerr << warning;
  std::cout << "# effective_prior assumed from DCF operating point\n";
  std::cout << "fit_objective_bits\t" << model.fit_objective << '\n';
  if (!out.empty()) WriteTextFile(out, model.Serialize());
  if (!scores_out.empty()) {
    std::vector<double> calibrated = Apply(model, {raw});
    std::string text;
    char buf[64];
    for (std::size_t i = 0; i < set.records.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", calibrated[i]);
      text += set.records[i].id + "\t" + buf + "\n";
    }
    WriteTextFile(scores_out, text);
  }
  return 0;
}

int RunFuse(const GlobalOpts& g, const std::vector<std::string>& score_files,
            const std::string& keys, const std::string& out,
            const std::string& fused_out, int k, bool greedy) {
  if (score_files.empty()) throw DataError("no score files given");
  LabeledScoreSet reference = LoadSet(score_files[0], keys);
  std::vector<NamedSystem> systems;
  for (const std::string& f : score_files)
    systems.push_back({fs::path(f).stem().string(), AlignedScores(f, reference)});
  std::vector<Label> labels = LabelsOf(reference);
  FitConfig cfg;
  cfg.effective_prior = EffectivePrior(g.dcf);
  cfg.max_iterations = g.fit_max_iterations;
  cfg.gradient_tolerance = g.fit_tolerance;

  FusionModel model;
  if (greedy) {
    GreedySelection sel =
        GreedySelect(systems, labels, g.dcf, k, cfg);
    for (std::size_t i = 0; i < sel.ranked_names.size(); ++i)
      std::cout << "rank\t" << sel.ranked_names[i] << '\t'
                << sel.ranked_min_dcf[i] << '\n';
    model = sel.model;
  } else {
    std::vector<std::vector<double>> raw;
    for (const NamedSystem& s : systems) raw.push_back(s.scores);
    model = Fit(raw, labels, cfg);
    for (const NamedSystem& s : systems)
      model.system_names.push_back(s.name);
  }
  std::cout << "fit_objective_bits\t" << model.fit_objective << '\n';
  if (!out.empty()) WriteTextFile(out, model.Serialize());

  std::vector<std::vector<double>> selected;
  for (const std::string& name : model.system_names)
    for (const NamedSystem& s : systems)
      if (s.name == name) selected.push_back(s.scores);
  std::vector<double> fused = Apply(model, selected);
  LabeledScoreSet fused_set = reference;
  for (std::size_t i = 0; i < fused.size(); ++i)
    fused_set.records[i].score = fused[i];
  MetricReport report = ComputeMetrics(fused_set, g.dcf);
  std::cout << report.ToText();
  if (!fused_out.empty()) {
    std::string text;
    char buf[64];
    for (std::size_t i = 0; i < fused_set.records.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", fused[i]);
      text += fused_set.records[i].id + "\t" + buf + "\n";
    }
    WriteTextFile(fused_out, text);
  }
  return 0;
}

int RunTrain(const GlobalOpts& g, const std::string& backend,
             const std::string& config, const std::string& train_manifest,
             const std::string& scoring_manifest, const std::string& out) {
  TrainConfig cfg = LoadTrainConfig(config);
  std::vector<TrainSample> train = LoadStackManifest(train_manifest);
  std::vector<TrainSample> scoring = scoring_manifest.empty()
                                         ? train
                                         : LoadStackManifest(scoring_manifest);
  const FeatureStack& first = std::get<FeatureStack>(train[0].input);
  const long nl = first.NumLayers();
  const long dim = first.Dim();
  std::mt19937_64 rng = DeriveRng(g.seed, 0, 0x1417);

  Checkpoint ckpt;
  std::vector<double> trace;
  if (backend == "wa") {
    WaModel model = WaModel::Random(nl, dim, 2, rng);
    auto result = Train(model, std::nullopt, train, scoring, cfg, g.seed);
    ckpt.backend = "wa";
    ckpt.wa = result.model;
    trace = result.eer_trace;
    std::cout << "best_epoch\t" << result.best_epoch << '\n';
  } else if (backend == "mhfa") {
    MhfaModel model =
        MhfaModel::Random(nl, dim, 4, std::max<long>(1, dim / 8), 16, 2, rng);
    auto result = Train(model, std::nullopt, train, scoring, cfg, g.seed);
    ckpt.backend = "mhfa";
    ckpt.mhfa = result.model;
    trace = result.eer_trace;
    std::cout << "best_epoch\t" << result.best_epoch << '\n';
  } else {
    throw DataError("unknown backend '" + backend + "'");
  }
  for (std::size_t e = 0; e < trace.size(); ++e)
    std::cout << "epoch_eer\t" << e << '\t' << trace[e] << '\n';
  if (!out.empty()) SaveCheckpointFile(ckpt, out);
  return 0;
}

int RunGradCheck(const GlobalOpts& g, const std::string& backend,
                 bool float32) {
  GradCheckOptions opt;
  auto run = [&](const char* name, auto result, double tol) {
    std::cout << name << "\tmax_rel_err\t" << result.max_rel_err << "\tworst\t"
              << result.worst_block << '\n';
    if (!(result.max_rel_err < tol))
      throw NumericalError(std::string("gradient check failed for ") + name);
  };
  double tol = float32 ? 1e-2 : 1e-4;
  if (backend == "wa" || backend == "all") {
    if (float32) {
      run("wa/encoder", GradCheck<float, WaModelT<float>>(opt, g.seed), tol);
    } else {
      run("wa/encoder", GradCheck<double, WaModel>(opt, g.seed), tol);
      GradCheckOptions raw = opt;
      raw.with_encoder = false;
      run("wa/stack", GradCheck<double, WaModel>(raw, g.seed), tol);
      GradCheckOptions sm = opt;
      sm.softmax_wa = true;
      run("wa-softmax/encoder", GradCheck<double, WaModel>(sm, g.seed), tol);
    }
  }
  if (backend == "mhfa" || backend == "all") {
    if (float32) {
      run("mhfa/encoder", GradCheck<float, MhfaModelT<float>>(opt, g.seed), tol);
    } else {
      run("mhfa/encoder", GradCheck<double, MhfaModel>(opt, g.seed), tol);
      GradCheckOptions raw = opt;
      raw.with_encoder = false;
      run("mhfa/stack", GradCheck<double, MhfaModel>(raw, g.seed), tol);
    }
  }
  return 0;
}

int RunAugment(const GlobalOpts& g, const std::string& in_dir,
               const std::string& out_dir, const std::string& noise_bank_path,
               const std::string& rir_bank_path, const std::string& rawboost,
               const std::string& replay, const std::string& plan_log) {
  WaveBank noise_bank, rir_bank;
  if (!noise_bank_path.empty())
    noise_bank = fs::is_directory(noise_bank_path)
                     ? WaveBank::LoadDirectory(noise_bank_path)
                     : WaveBank::LoadManifest(noise_bank_path);
  if (!rir_bank_path.empty())
    rir_bank = fs::is_directory(rir_bank_path)
                   ? WaveBank::LoadDirectory(rir_bank_path)
                   : WaveBank::LoadManifest(rir_bank_path);

  std::vector<std::string> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.path().extension() == ".wav")
      inputs.push_back(entry.path().string());
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw DataError("no .wav files in " + in_dir);
  fs::create_directories(out_dir);

  std::vector<AugmentPlan> replayed;
  if (!replay.empty()) {
    std::ifstream in(replay);
    if (!in) throw DataError("cannot open plan log: " + replay);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) replayed.push_back(AugmentPlan::Parse(line));
    if (replayed.size() != inputs.size())
      throw DataError("plan log has " + std::to_string(replayed.size()) +
                      " plans but input dir has " +
                      std::to_string(inputs.size()) + " files");
  }

  std::ofstream log;
  if (!plan_log.empty()) {
    log.open(plan_log);
    if (!log) throw DataError("cannot open plan log for writing: " + plan_log);
  }

  const auto& chains = DefaultCodecChains();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Waveform wave = ReadWav(inputs[i]);
    std::mt19937_64 rng = DeriveRng(g.seed, 0, i);
    Waveform augmented;
    AugmentPlan plan;
    if (!rawboost.empty()) {
      RawBoostParams params;
      RawBoostVariant variant;
      if (rawboost == "convolutive") {
        variant = RawBoostVariant::kConvolutive;
      } else if (rawboost == "impulsive") {
        variant = RawBoostVariant::kImpulsive;
      } else if (rawboost == "stationary") {
        variant = RawBoostVariant::kStationary;
      } else if (rawboost == "series12") {
        variant = RawBoostVariant::kSeries12;
      } else {
        throw DataError("unknown rawboost variant '" + rawboost + "'");
      }
      augmented = RawBoost(wave, variant, params, rng);
    } else {
      plan = replayed.empty()
                 ? SamplePlan(rng, static_cast<long>(noise_bank.waves.size()),
                              static_cast<long>(rir_bank.waves.size()),
                              static_cast<long>(chains.size()))
                 : replayed[i];
      augmented = ApplyPlan(wave, plan, noise_bank, rir_bank, chains);
      if (log) log << plan.ToString() << '\n';
    }
    fs::path out_path = fs::path(out_dir) / fs::path(inputs[i]).filename();
    WriteWav(augmented, out_path.string());
  }
  return 0;
}

int RunReport(const GlobalOpts& g, const std::string& scores,
              const std::string& keys, const std::string& metric,
              const std::string& format, const std::string& out,
              bool all_bonafide) {
  LabeledScoreSet set = LoadSet(scores, keys);
  ConditionTable table =
      BuildTable(set, ParseTableMetric(metric), g.dcf, !all_bonafide);
  TableFormat fmt;
  if (format == "tsv") {
    fmt = TableFormat::kTsv;
  } else if (format == "markdown") {
    fmt = TableFormat::kMarkdown;
  } else {
    throw DataError("unknown format '" + format + "'");
  }
  std::string text = Render(table, fmt);
  if (out.empty())
    std::cout << text;
  else
    WriteTextFile(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spoofkit: speech-deepfake countermeasure toolkit"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--dcf-cmiss", g.dcf.c_miss, "DCF miss cost")
      ->capture_default_str();
  app.add_option("--dcf-cfa", g.dcf.c_fa, "DCF false-alarm cost")
      ->capture_default_str();
  app.add_option("--max-iterations", g.fit_max_iterations,
                 "Newton iteration cap for calibration fits")
      ->capture_default_str();
  app.add_option("--fit-tolerance", g.fit_tolerance,
                 "Gradient-norm convergence tolerance for calibration fits")
      ->capture_default_str();
  app.add_option("--dcf-prior", g.dcf.prior_bonafide, "DCF bonafide prior")
      ->capture_default_str();

  std::string scores, keys, out, fused_out, scores_out;
  std::vector<std::string> score_files;
  bool linear_eer = false, all_bonafide = false, float32 = false;
  int k = 3;
  std::string backend = "wa", config, train_manifest, scoring_manifest;
  std::string metric = "minDCF", format = "tsv";
  std::string in_dir, out_dir, noise_bank, rir_bank, rawboost, replay, plan_log;

  CLI::App* eval = app.add_subcommand("eval", "Compute detection metrics");
  eval->add_option("--scores", scores, "Score file")->required();
  eval->add_option("--keys", keys, "Key file")->required();
  eval->add_flag("--linear-eer", linear_eer,
                 "Linear-interpolation EER instead of ROCCH-EER");

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Single-system LLR calibration");
  calibrate->add_option("--scores", scores, "Score file")->required();
  calibrate->add_option("--keys", keys, "Key file")->required();
  calibrate->add_option("--out", out, "Model output file");
  calibrate->add_option("--scores-out", scores_out, "Calibrated score output");

  CLI::App* fuse = app.add_subcommand("fuse", "Joint linear fusion");
  fuse->add_option("--scores", score_files, "Score files (repeatable)")
      ->required();
  fuse->add_option("--keys", keys, "Key file")->required();
  fuse->add_option("--out", out, "Model output file");
  fuse->add_option("--fused-out", fused_out, "Fused score output");

  CLI::App* greedy =
      app.add_subcommand("greedy-fuse", "Greedy selection then fusion");
  greedy->add_option("--scores", score_files, "Score files (repeatable)")
      ->required();
  greedy->add_option("--keys", keys, "Key file")->required();
  greedy->add_option("--k", k, "Number of systems to fuse")
      ->capture_default_str();
  greedy->add_option("--out", out, "Model output file");
  greedy->add_option("--fused-out", fused_out, "Fused score output");

  CLI::App* train = app.add_subcommand("train", "Train a pooling back-end");
  train->add_option("--backend", backend, "wa or mhfa")->required();
  train->add_option("--config", config, "Train config file (key value lines)");
  train->add_option("--data", train_manifest,
                    "Manifest of `stack_path label` lines")
      ->required();
  train->add_option("--scoring", scoring_manifest,
                    "Scoring manifest (defaults to training data)");
  train->add_option("--out", out, "Checkpoint output file");

  CLI::App* gc = app.add_subcommand("grad-check", "Finite-difference check");
  gc->add_option("--backend", backend, "wa, mhfa or all")
      ->capture_default_str();
  gc->add_flag("--float32", float32, "Check the float32 path");

  CLI::App* augment = app.add_subcommand("augment", "Augment a WAV directory");
  augment->add_option("--in", in_dir, "Input directory")->required();
  augment->add_option("--out", out_dir, "Output directory")->required();
  augment->add_option("--noise-bank", noise_bank, "Noise bank dir or manifest");
  augment->add_option("--rir-bank", rir_bank, "RIR bank dir or manifest");
  augment->add_option("--rawboost", rawboost,
                      "convolutive|impulsive|stationary|series12");
  augment->add_option("--replay", replay, "Replay a logged plan file");
  augment->add_option("--plan-log", plan_log, "Write sampled plans here");

  CLI::App* report = app.add_subcommand("report", "Condition breakdown table");
  report->add_option("--scores", scores, "Score file")->required();
  report->add_option("--keys", keys, "Key file")->required();
  report->add_option("--metric", metric, "minDCF|EER|actDCF|Cllr")
      ->capture_default_str();
  report->add_option("--format", format, "tsv|markdown")
      ->capture_default_str();
  report->add_option("--out", out, "Output file (default stdout)");
  report->add_flag("--all-bonafide", all_bonafide,
                   "Score every cell against the full bonafide pool");

  // Global options may appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (eval->parsed()) return RunEval(g, scores, keys, linear_eer);
    if (calibrate->parsed())
      return RunCalibrate(g, scores, keys, out, scores_out);
    if (fuse->parsed())
      return RunFuse(g, score_files, keys, out, fused_out, 0, false);
    if (greedy->parsed())
      return RunFuse(g, score_files, keys, out, fused_out, k, true);
    if (train->parsed())
      return RunTrain(g, backend, config, train_manifest, scoring_manifest, out);
    if (gc->parsed()) return RunGradCheck(g, backend, float32);
    if (augment->parsed())
      return RunAugment(g, in_dir, out_dir, noise_bank, rir_bank, rawboost,
                        replay, plan_log);
    if (report->parsed())
      return RunReport(g, scores, keys, metric, format, out, all_bonafide);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
