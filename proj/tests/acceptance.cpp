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
// Acceptance gate: ten oracle-equivalence and invariant suites, one
// pass/fail line each. Exit code 0 iff every criterion holds.
//
// Usage: spoofkit_acceptance <golden_dir> [--write-golden]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spoofkit/augmentation.hpp"
#include "spoofkit/calibration.hpp"
#include "spoofkit/grad_check.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/pooling.hpp"
#include "spoofkit/report.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/score_io.hpp"
#include "spoofkit/trainer.hpp"
#include "../tests/oracles.hpp"

using namespace spoofkit;

namespace {

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

LabeledScoreSet RandomSet(std::mt19937_64& rng, int n, double separation,
                          double bonafide_fraction) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LabeledScoreSet set;
  for (int i = 0; i < n; ++i) {
    bool bona = unif(rng) < bonafide_fraction;
    Trial t;
    t.id = "t" + std::to_string(i);
    t.label = bona ? Label::kBonafide : Label::kSpoof;
    t.score = noise(rng) + (bona ? 0.5 : -0.5) * separation;
    t.attack = bona ? "-" : "A0" + std::to_string(1 + i % 4);
    t.codec = i % 3 == 0 ? "-" : "codec-" + std::to_string(1 + i % 2);
    set.records.push_back(t);
  }
  set.records[0].label = Label::kBonafide;
  set.records[0].attack = "-";
  set.records[1].label = Label::kSpoof;
  set.records[1].attack = "A01";
  return set;
}

// --------------------------------------------------------------------------

bool Criterion1(std::string* detail) {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng = DeriveRng(1001, 0, 0);
  DcfParams param_sets[] = {{1, 10, 0.95}, {1, 1, 0.5}, {2, 1, 0.2}};
  for (int rep = 0; rep < 50; ++rep) {
    double frac = 0.15 + 0.01 * rep;  // mixed priors
    LabeledScoreSet set = RandomSet(rng, 200, 0.4 + 0.04 * rep, frac);
    double eer = Eer(set).first;
    double oracle_eer = oracles::RocchEer(set);
    if (std::abs(eer - oracle_eer) > 1e-12) {
      *detail = "eer mismatch at rep " + std::to_string(rep);
      return false;
    }
    for (const DcfParams& params : param_sets) {
      auto [dcf, threshold] = MinDcf(set, params);
      auto [oracle_dcf, oracle_thr] = oracles::MinDcf(set, params);
      if (dcf != oracle_dcf) {
        *detail = "min_dcf mismatch at rep " + std::to_string(rep);
        return false;
      }
      // The returned threshold must land on an optimal operating point.
      double miss = 0, fa = 0;
      for (const Trial& t : set.records)
        if (t.label == Label::kBonafide)
          miss += !(t.score > threshold);
        else
          fa += t.score > threshold;
      double cost = oracles::Cost({threshold,
                                   miss / static_cast<double>(set.n_bonafide()),
                                   fa / static_cast<double>(set.n_spoof())},
                                  params);
      if (std::abs(cost - oracle_dcf) > 1e-12) {
        *detail = "min_dcf threshold suboptimal at rep " + std::to_string(rep);
        return false;
      }
      double act = ActDcf(set, params);
      double oracle_act = oracles::ActDcf(set, params);
      if (std::abs(act - oracle_act) > 1e-12 * std::max(1.0, oracle_act)) {
        *detail = "act_dcf mismatch at rep " + std::to_string(rep);
        return false;
      }
    }
    double cllr = Cllr(set), oracle_cllr = oracles::Cllr(set);
    if (std::abs(cllr - oracle_cllr) > 1e-12 * std::max(1.0, oracle_cllr)) {
      *detail = "cllr mismatch at rep " + std::to_string(rep);
      return false;
    }
    LabeledScoreSet pav = set;
    std::vector<double> llrs = oracles::IsotonicLlrs(set);
    for (std::size_t i = 0; i < llrs.size(); ++i) pav.records[i].score = llrs[i];
    double mc = MinCllr(set), oracle_mc = oracles::Cllr(pav);
    if (std::abs(mc - oracle_mc) > 1e-12 * std::max(1.0, oracle_mc)) {
      *detail = "min_cllr mismatch at rep " + std::to_string(rep);
      return false;
    }
  }
  double elapsed = Seconds(start);
  if (elapsed >= 10.0) {
    *detail = "runtime " + std::to_string(elapsed) + " s exceeds 10 s";
    return false;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "50 sets, 3 cost models, %.2f s", elapsed);
  *detail = buf;
  return true;
}

bool Criterion2(std::string* detail) {
  std::mt19937_64 rng = DeriveRng(1002, 0, 0);
  DcfParams params;
  std::uniform_real_distribution<double> scale(0.2, 2.0);
  std::uniform_real_distribution<double> shift(-1.5, 1.5);
  int violations = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    LabeledScoreSet set = RandomSet(rng, 60, 0.2 + 0.003 * rep, 0.3);
    MetricReport r = ComputeMetrics(set, params);
    if (r.min_dcf > r.act_dcf + 1e-15) ++violations;
    if (r.min_cllr > r.cllr + 1e-12) ++violations;
    for (int m = 0; m < 10; ++m) {
      double a = scale(rng), b = shift(rng);
      LabeledScoreSet mapped = set;
      for (Trial& t : mapped.records)
        t.score = a * t.score + b + 0.1 * std::tanh(t.score);
      if (std::abs(Eer(mapped).first - r.eer) > 1e-12) ++violations;
      if (std::abs(MinDcf(mapped, params).first - r.min_dcf) > 1e-12)
        ++violations;
      if (std::abs(MinCllr(mapped) - r.min_cllr) > 1e-12) ++violations;
    }
  }
  *detail = std::to_string(violations) + " violations over 1000 sets";
  return violations == 0;
}

bool Criterion3(std::string* detail) {
  LabeledScoreSet set;
  for (int i = 0; i < 10; ++i)
    set.records.push_back({"t" + std::to_string(i), 0.0,
                           i < 4 ? Label::kBonafide : Label::kSpoof, "-", "-"});
  double cllr = Cllr(set);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "cllr(all-zero) = %.15f bits", cllr);
  *detail = buf;
  return std::abs(cllr - 1.0) <= 1e-12;
}

bool Criterion4(std::string* detail) {
  std::mt19937_64 rng = DeriveRng(1004, 0, 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  FitConfig cfg;
  for (int rep = 0; rep < 20; ++rep) {
    int n = 300 + 20 * rep;
    int k = 2 + rep % 3;
    std::vector<Label> labels;
    std::vector<std::vector<double>> systems(k);
    for (int i = 0; i < n; ++i) {
      bool bona = i % (3 + rep % 2) == 0;
      labels.push_back(bona ? Label::kBonafide : Label::kSpoof);
      for (int s = 0; s < k; ++s)
        systems[s].push_back((bona ? 1.0 : -1.0) * (0.4 + 0.4 * s) +
                             noise(rng) * (1.0 + 0.3 * s));
    }
    FusionModel fused = Fit(systems, labels, cfg);
    // Final gradient norm at the optimum, checked directly.
    LogRegObjective obj;
    obj.scores.resize(n, k);
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < k; ++s) obj.scores(i, s) = systems[s][i];
    obj.labels = labels;
    obj.config = cfg;
    Eigen::VectorXd theta(k + 1);
    theta.head(k) = fused.weights;
    theta[k] = fused.bias;
    double grad_norm = obj.Gradient(theta).norm();
    if (!(grad_norm < 1e-8)) {
      *detail = "gradient norm " + std::to_string(grad_norm) + " at rep " +
                std::to_string(rep);
      return false;
    }
    // Convexity + descent: the optimum cannot be worse than the zero start.
    if (fused.fit_objective >
        obj.Value(Eigen::VectorXd::Zero(k + 1)) / std::log(2.0) + 1e-12) {
      *detail = "objective above its start at rep " + std::to_string(rep);
      return false;
    }
    for (int s = 0; s < k; ++s) {
      FusionModel single = Fit({systems[s]}, labels, cfg);
      if (fused.fit_objective > single.fit_objective + 1e-10) {
        *detail = "fused objective above single system " + std::to_string(s);
        return false;
      }
    }
  }
  // Known-LLR recovery at N = 100k.
  std::vector<double> scores;
  std::vector<Label> labels;
  double mu = 1.0;
  std::normal_distribution<double> bon(mu, std::sqrt(2 * mu));
  std::normal_distribution<double> spf(-mu, std::sqrt(2 * mu));
  for (int i = 0; i < 50000; ++i) {
    scores.push_back(bon(rng));
    labels.push_back(Label::kBonafide);
    scores.push_back(spf(rng));
    labels.push_back(Label::kSpoof);
  }
  FusionModel cal = Fit({scores}, labels, cfg);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "recovered w = %.4f, b = %.4f at N = 100k",
                cal.weights[0], cal.bias);
  *detail = buf;
  return std::abs(cal.weights[0] - 1.0) <= 0.05 && std::abs(cal.bias) <= 0.05;
}

bool Criterion5(std::string* detail) {
  std::mt19937_64 rng = DeriveRng(1005, 0, 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n = 4000;
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i)
    labels.push_back(i % 5 == 0 ? Label::kBonafide : Label::kSpoof);
  std::vector<NamedSystem> systems;
  for (int s = 0; s < 5; ++s) {
    NamedSystem sys;
    sys.name = "sys" + std::to_string(s);
    double sep = 3.2 - 0.6 * s;
    for (int i = 0; i < n; ++i)
      sys.scores.push_back((labels[i] == Label::kBonafide ? sep : -sep) +
                           noise(rng));
    systems.push_back(std::move(sys));
  }
  DcfParams params;
  FitConfig cfg;
  cfg.effective_prior = EffectivePrior(params);
  GreedySelection sel = GreedySelect(systems, labels, params, 3, cfg);
  for (int s = 0; s < 5; ++s)
    if (sel.ranked_names[s] != "sys" + std::to_string(s)) {
      *detail = "ranking does not follow graded quality";
      return false;
    }
  std::vector<std::vector<double>> top;
  for (const std::string& name : sel.selected)
    for (const NamedSystem& s : systems)
      if (s.name == name) top.push_back(s.scores);
  std::vector<double> fused = Apply(sel.model, top);
  LabeledScoreSet fused_set, best_set;
  for (int i = 0; i < n; ++i) {
    Trial t{"t" + std::to_string(i), fused[i], labels[i], "-", "-"};
    fused_set.records.push_back(t);
    t.score = systems[0].scores[i];
    best_set.records.push_back(t);
  }
  double fused_dcf = MinDcf(fused_set, params).first;
  double best_dcf = MinDcf(best_set, params).first;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fused minDCF %.4f vs best single %.4f",
                fused_dcf, best_dcf);
  *detail = buf;
  return fused_dcf <= best_dcf + 1e-10;
}

bool Criterion6(std::string* detail) {
  auto start = std::chrono::steady_clock::now();
  GradCheckOptions opt;  // L = 4, D = 32, T = 16, H = 4
  double worst = 0.0;
  auto update = [&](const GradCheckResult& r) {
    worst = std::max(worst, r.max_rel_err);
  };
  update(GradCheck<double, WaModel>(opt, 2026));
  update(GradCheck<double, MhfaModel>(opt, 2026));
  GradCheckOptions softmax = opt;
  softmax.softmax_wa = true;
  update(GradCheck<double, WaModel>(softmax, 2026));
  GradCheckOptions raw = opt;
  raw.with_encoder = false;
  update(GradCheck<double, WaModel>(raw, 2026));
  update(GradCheck<double, MhfaModel>(raw, 2026));
  double elapsed = Seconds(start);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max rel err %.3e, %.2f s", worst, elapsed);
  *detail = buf;
  return worst < 1e-4 && elapsed < 30.0;
}

bool Criterion7(std::string* detail) {
  std::mt19937_64 data_rng = DeriveRng(1007, 0, 0);
  std::vector<TrainSample> train;
  for (int i = 0; i < 500; ++i) {
    int label = i % 2;
    FeatureStack stack;
    for (int l = 0; l < 3; ++l) {
      Eigen::MatrixXd m = detail::RandomMat<double>(30, 8, 1.0, data_rng);
      m.array() += label == 0 ? 0.8 : -0.8;
      stack.layers.push_back(m);
    }
    train.push_back({std::move(stack), label});
  }
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.patience = 30;
  cfg.batch_size = 50;
  cfg.crop_frames = 20;

  std::mt19937_64 rng = DeriveRng(1007, 1, 0);
  WaModel wa = WaModel::Random(3, 8, 2, rng);
  auto wa_run1 = Train(wa, std::nullopt, train, train, cfg, 13);
  auto wa_run2 = Train(wa, std::nullopt, train, train, cfg, 13);
  double wa_best = *std::min_element(wa_run1.eer_trace.begin(),
                                     wa_run1.eer_trace.end());
  if (wa_best != 0.0) {
    *detail = "WA never reached EER 0 within 30 epochs";
    return false;
  }
  if (wa_run1.eer_trace != wa_run2.eer_trace ||
      wa_run1.model.classifier_w != wa_run2.model.classifier_w) {
    *detail = "WA training is not deterministic per seed";
    return false;
  }
  MhfaModel mhfa = MhfaModel::Random(3, 8, 2, 4, 6, 2, rng);
  auto mhfa_run = Train(mhfa, std::nullopt, train, train, cfg, 13);
  if (*std::min_element(mhfa_run.eer_trace.begin(),
                        mhfa_run.eer_trace.end()) != 0.0) {
    *detail = "MHFA never reached EER 0 within 30 epochs";
    return false;
  }

  // lambda = 1e6 pins a trained encoder to its init.
  std::vector<TrainSample> raw_train;
  for (int i = 0; i < 40; ++i) {
    int label = i % 2;
    Eigen::MatrixXd raw = detail::RandomMat<double>(24, 5, 1.0, data_rng);
    raw.array() += label == 0 ? 0.5 : -0.5;
    raw_train.push_back({raw, label});
  }
  ToyEncoder encoder = ToyEncoder::Random(5, 6, 2, rng);
  ToyEncoder init = encoder;
  WaModel head = WaModel::Random(3, 6, 2, rng);
  TrainConfig pin_cfg = cfg;
  pin_cfg.epochs = 5;
  pin_cfg.patience = 5;
  pin_cfg.batch_size = 8;
  pin_cfg.crop_frames = 16;
  pin_cfg.l2_to_init_lambda = 1e6;
  auto pinned = Train(head, encoder, raw_train, raw_train, pin_cfg, 13);
  double dist2 = 0.0;
  auto mb = pinned.encoder.Blocks();
  auto ib = init.Blocks();
  for (std::size_t b = 0; b < mb.size(); ++b)
    for (long i = 0; i < mb[b].size; ++i) {
      double d = mb[b].data[i] - ib[b].data[i];
      dist2 += d * d;
    }
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "both back-ends hit EER 0; encoder drift %.2e", std::sqrt(dist2));
  *detail = buf;
  return std::sqrt(dist2) < 1e-3;
}

bool Criterion8(std::string* detail) {
  std::mt19937_64 rng = DeriveRng(1008, 0, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> snr_dist(-5.0, 25.0);

  // SNR accuracy over 1000 random draws.
  for (int rep = 0; rep < 1000; ++rep) {
    Waveform wave, noise;
    for (int i = 0; i < 1500; ++i) wave.samples.push_back(0.1 * gauss(rng));
    for (int i = 0; i < 900; ++i) noise.samples.push_back(0.07 * gauss(rng));
    double target = snr_dist(rng);
    Waveform mixed = MixNoise(wave, noise, target);
    std::vector<double> added(mixed.samples.size());
    for (std::size_t i = 0; i < added.size(); ++i)
      added[i] = mixed.samples[i] - wave.samples[i];
    double measured = oracles::MeasuredSnrDb(wave.samples, added);
    if (std::abs(measured - target) > 0.1) {
      *detail = "measured SNR off by more than 0.1 dB";
      return false;
    }
  }

  // delta-RIR identity.
  Waveform wave;
  for (int i = 0; i < 2000; ++i) wave.samples.push_back(0.2 * gauss(rng));
  Waveform delta;
  delta.samples = {1.0};
  if (ApplyRir(wave, delta).samples != wave.samples) {
    *detail = "delta RIR is not an exact identity";
    return false;
  }

  // Plan replay is bitwise reproducible however the items are sharded:
  // every item's stream derives from (seed, 0, item_index) alone.
  WaveBank noise_bank, rir_bank;
  for (int i = 0; i < 2; ++i) {
    Waveform n;
    for (int j = 0; j < 1000; ++j) n.samples.push_back(0.05 * gauss(rng));
    noise_bank.ids.push_back("n" + std::to_string(i));
    noise_bank.waves.push_back(n);
  }
  Waveform rir;
  rir.samples = {1.0, 0.4, -0.15, 0.05};
  rir_bank.ids.push_back("r0");
  rir_bank.waves.push_back(rir);
  const auto& chains = DefaultCodecChains();
  std::vector<Waveform> items;
  for (int i = 0; i < 64; ++i) {
    Waveform w;
    for (int j = 0; j < 1200; ++j) w.samples.push_back(0.1 * gauss(rng));
    items.push_back(w);
  }
  std::vector<std::vector<double>> reference(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::mt19937_64 item_rng = DeriveRng(77, 0, i);
    AugmentPlan plan = SamplePlan(item_rng, 2, 1, 8);
    reference[i] =
        ApplyPlan(items[i], plan, noise_bank, rir_bank, chains).samples;
  }
  for (int workers = 1; workers <= 8; ++workers) {
    for (int w = 0; w < workers; ++w) {
      for (std::size_t i = static_cast<std::size_t>(w); i < items.size();
           i += static_cast<std::size_t>(workers)) {
        std::mt19937_64 item_rng = DeriveRng(77, 0, i);
        AugmentPlan plan = SamplePlan(item_rng, 2, 1, 8);
        if (ApplyPlan(items[i], plan, noise_bank, rir_bank, chains).samples !=
            reference[i]) {
          *detail = "replay differs at " + std::to_string(workers) + " workers";
          return false;
        }
      }
    }
  }

  // Stage-1 branch frequencies over 100k draws.
  std::mt19937_64 plan_rng = DeriveRng(1008, 1, 0);
  int counts[4] = {0, 0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    counts[static_cast<int>(SamplePlan(plan_rng, 2, 1, 8).stage1)] += 1;
  for (int b = 0; b < 4; ++b) {
    double freq = counts[b] / static_cast<double>(n);
    if (std::abs(freq - 0.25) > 0.01) {
      *detail = "stage-1 branch " + std::to_string(b) + " frequency " +
                std::to_string(freq);
      return false;
    }
  }
  *detail = "SNR within 0.1 dB, replay stable over 1-8 workers";
  return true;
}

// Parametric score generator for the report-fidelity golden: binary search
// the class separation until the pooled minDCF lands on the target.
LabeledScoreSet ReportSet(double separation) {
  std::mt19937_64 rng = DeriveRng(1009, 0, 0);
  std::normal_distribution<double> noise(0.0, 1.0);
  LabeledScoreSet set;
  int id = 0;
  const char* codecs[] = {"-", "codec-1", "codec-2"};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 2200; ++i)
      set.records.push_back({"b" + std::to_string(id++),
                             0.5 * separation + noise(rng), Label::kBonafide,
                             "-", codecs[c]});
    for (int a = 0; a < 2; ++a)
      for (int i = 0; i < 2200; ++i)
        set.records.push_back({"s" + std::to_string(id++),
                               -0.5 * separation + (0.1 * a) + noise(rng),
                               Label::kSpoof, "A0" + std::to_string(a + 1),
                               codecs[c]});
  }
  return set;
}

bool Criterion9(const std::string& golden_dir, bool write_golden,
                std::string* detail) {
  const double target = 0.0937;
  DcfParams params;
  double lo = 0.5, hi = 8.0;
  LabeledScoreSet set;
  double pooled = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    set = ReportSet(mid);
    pooled = MinDcf(set, params).first;
    // Stop only once the value also rounds to the 4-decimal target cell.
    if (pooled >= target - 5e-5 && pooled < target + 5e-5) break;
    // Larger separation => smaller minDCF.
    if (pooled > target)
      lo = mid;
    else
      hi = mid;
  }
  if (std::abs(pooled - target) > 0.0005) {
    *detail = "binary search failed to reach the target pooled minDCF";
    return false;
  }

  ConditionTable table = BuildTable(set, TableMetric::kMinDcf, params);
  // Every cell equals the independently computed subset metric.
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      LabeledScoreSet cell;
      for (const Trial& t : set.records) {
        if (t.label == Label::kSpoof) {
          if (table.rows[r] != "pooled" && t.attack != table.rows[r]) continue;
          if (table.cols[c] != "pooled" && t.codec != table.cols[c]) continue;
        } else if (table.cols[c] != "pooled" && t.codec != table.cols[c]) {
          continue;
        }
        cell.records.push_back(t);
      }
      if (cell.n_spoof() == 0 || cell.n_bonafide() == 0) {
        if (table.cells[r][c].has_value()) {
          *detail = "cell expected absent";
          return false;
        }
        continue;
      }
      if (!table.cells[r][c].has_value() ||
          *table.cells[r][c] != oracles::MinDcf(cell, params).first) {
        *detail = "cell (" + table.rows[r] + ", " + table.cols[c] +
                  ") disagrees with the subset oracle";
        return false;
      }
    }

  std::string tsv = Render(table, TableFormat::kTsv);
  ConditionTable eer_table = BuildTable(set, TableMetric::kEer, params);
  std::string md = Render(eer_table, TableFormat::kMarkdown);
  if (tsv.find("0.0937") == std::string::npos) {
    *detail = "pooled cell does not print as 0.0937";
    return false;
  }
  std::string golden_path = golden_dir + "/report_mindcf.tsv";
  std::string golden_md_path = golden_dir + "/report_eer.md";
  if (write_golden) {
    std::ofstream(golden_path) << tsv;
    std::ofstream(golden_md_path) << md;
    *detail = "golden files rewritten";
    return true;
  }
  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  if (read_file(golden_path) != tsv) {
    *detail = "minDCF table differs from golden " + golden_path;
    return false;
  }
  if (read_file(golden_md_path) != md) {
    *detail = "EER table differs from golden " + golden_md_path;
    return false;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "pooled minDCF %.4f, goldens match", pooled);
  *detail = buf;
  return true;
}

bool Criterion10(std::string* detail) {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng = DeriveRng(1010, 0, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Synthetic waveforms: bonafide = tone + light noise, spoof = noise only.
  auto make_wave = [&](int label, int idx) {
    Waveform w;
    double freq = 200.0 + 10.0 * (idx % 8);
    for (int i = 0; i < 16000; ++i) {
      double s = 0.1 * gauss(rng);
      if (label == 0)
        s += 0.4 * std::sin(2.0 * M_PI * freq * i / 16000.0);
      w.samples.push_back(s);
    }
    return w;
  };

  // Augment with sampled per-index plans.
  WaveBank noise_bank, rir_bank;
  Waveform bank_noise;
  for (int j = 0; j < 4000; ++j) bank_noise.samples.push_back(0.05 * gauss(rng));
  noise_bank.ids.push_back("n0");
  noise_bank.waves.push_back(bank_noise);
  Waveform rir;
  rir.samples = {1.0, 0.3, -0.1};
  rir_bank.ids.push_back("r0");
  rir_bank.waves.push_back(rir);
  const auto& chains = DefaultCodecChains();

  // Waveform -> T x D_in features by block averaging (160-sample frames,
  // 16-sample sub-blocks of absolute amplitude).
  auto featurize = [](const Waveform& w) {
    const long frames = static_cast<long>(w.samples.size()) / 160;
    Eigen::MatrixXd feat(frames, 10);
    for (long t = 0; t < frames; ++t)
      for (long d = 0; d < 10; ++d) {
        double acc = 0;
        for (long j = 0; j < 16; ++j)
          acc += std::abs(w.samples[t * 160 + d * 16 + j]);
        feat(t, d) = acc / 16.0;
      }
    return feat;
  };

  ToyEncoder encoder = ToyEncoder::Random(10, 12, 3, rng);
  auto stack_of = [&](const Waveform& w) { return encoder.Forward(featurize(w)); };

  std::vector<TrainSample> train, held_out;
  for (int i = 0; i < 80; ++i) {
    int label = i % 2;
    Waveform wave = make_wave(label, i);
    std::mt19937_64 item_rng = DeriveRng(1010, 1, static_cast<std::uint64_t>(i));
    AugmentPlan plan = SamplePlan(item_rng, 1, 1, 8);
    Waveform augmented = ApplyPlan(wave, plan, noise_bank, rir_bank, chains);
    TrainSample sample{stack_of(augmented), label};
    (i < 56 ? train : held_out).push_back(std::move(sample));
  }

  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.patience = 12;
  cfg.batch_size = 14;
  cfg.crop_frames = 40;
  std::mt19937_64 model_rng = DeriveRng(1010, 2, 0);
  WaModel wa = WaModel::Random(4, 12, 2, model_rng);
  auto wa_result = Train(wa, std::nullopt, train, train, cfg, 55);
  MhfaModel mhfa = MhfaModel::Random(4, 12, 2, 4, 8, 2, model_rng);
  auto mhfa_result = Train(mhfa, std::nullopt, train, train, cfg, 55);

  // Score the held-out split with both systems.
  std::vector<Label> labels;
  std::vector<NamedSystem> systems(2);
  systems[0].name = "wa";
  systems[1].name = "mhfa";
  for (const TrainSample& s : held_out) {
    labels.push_back(s.label == 0 ? Label::kBonafide : Label::kSpoof);
    systems[0].scores.push_back(ScoreSample(s, wa_result.model, nullptr));
    systems[1].scores.push_back(ScoreSample(s, mhfa_result.model, nullptr));
  }

  DcfParams params;
  FitConfig fit_cfg;
  fit_cfg.effective_prior = EffectivePrior(params);
  GreedySelection sel = GreedySelect(systems, labels, params, 2, fit_cfg);
  std::vector<std::vector<double>> chosen;
  for (const std::string& name : sel.selected)
    for (const NamedSystem& s : systems)
      if (s.name == name) chosen.push_back(s.scores);
  std::vector<double> fused = Apply(sel.model, chosen);

  LabeledScoreSet fused_set;
  double best_individual = 1e300;
  for (std::size_t k = 0; k < systems.size(); ++k) {
    LabeledScoreSet single;
    for (std::size_t i = 0; i < labels.size(); ++i)
      single.records.push_back({"t" + std::to_string(i), systems[k].scores[i],
                                labels[i], "-", "-"});
    best_individual = std::min(best_individual, MinDcf(single, params).first);
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    fused_set.records.push_back({"t" + std::to_string(i), fused[i], labels[i],
                                 labels[i] == Label::kSpoof ? "A01" : "-",
                                 i % 2 ? "codec-1" : "-"});
  double fused_dcf = MinDcf(fused_set, params).first;
  if (fused_dcf > best_individual + 1e-12) {
    *detail = "fused minDCF above the best individual system";
    return false;
  }
  std::string table =
      Render(BuildTable(fused_set, TableMetric::kMinDcf, params),
             TableFormat::kMarkdown);
  if (table.find("pooled") == std::string::npos) {
    *detail = "report rendering failed";
    return false;
  }
  double elapsed = Seconds(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "fused minDCF %.4f <= best single %.4f, %.1f s", fused_dcf,
                best_individual, elapsed);
  *detail = buf;
  return elapsed < 300.0;
}

}  // namespace

int main(int argc, char** argv) {
  std::string golden_dir = argc > 1 ? argv[1] : "tests/golden";
  bool write_golden = argc > 2 && std::string(argv[2]) == "--write-golden";

  struct Criterion {
    const char* name;
    bool (*fn)(std::string*);
  };
  const Criterion simple[] = {
      {"1 metric oracle equivalence", Criterion1},
      {"2 metric inequalities and invariances", Criterion2},
      {"3 Cllr fixed point at all-zero scores", Criterion3},
      {"4 calibration convexity and known-LLR recovery", Criterion4},
      {"5 greedy fusion contract", Criterion5},
      {"6 gradient checks (float64)", Criterion6},
      {"7 trainer sanity and determinism", Criterion7},
      {"8 augmentation accuracy and replay", Criterion8},
  };

  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("%s criterion %s: %s\n", ok ? "PASS" : "FAIL", name,
                detail.c_str());
    if (!ok) ++failures;
  };
  for (const Criterion& c : simple) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(&detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report(c.name, ok, detail);
  }
  {
    std::string detail;
    bool ok = false;
    try {
      ok = Criterion9(golden_dir, write_golden, &detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report("9 report fidelity and golden files", ok, detail);
  }
  {
    std::string detail;
    bool ok = false;
    try {
      ok = Criterion10(&detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report("10 end-to-end smoke", ok, detail);
  }
  return failures == 0 ? 0 : 1;
}
