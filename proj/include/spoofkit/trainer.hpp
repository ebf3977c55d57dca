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

#ifndef SPOOFKIT_TRAINER_HPP
#define SPOOFKIT_TRAINER_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <type_traits>
#include <variant>
#include <vector>

#include "spoofkit/metrics.hpp"
#include "spoofkit/pooling.hpp"
#include "spoofkit/rng.hpp"
#include "spoofkit/score_io.hpp"

namespace spoofkit {

// A training or scoring item: either a precomputed feature stack (back-end
// training only) or raw T x D_in features routed through the toy encoder.
struct TrainSample {
  std::variant<FeatureStack, Eigen::MatrixXd> input;
  int label = 0;  // 0 bonafide, 1 spoof
};

template <class Model>
struct TrainResult {
  Model model;
  ToyEncoder encoder;
  bool has_encoder = false;
  std::vector<double> eer_trace;  // scoring-set EER per epoch
  int best_epoch = -1;
};

namespace detail {

// Per-block Adam state; the step direction is Adam's, the step size comes
// from LrSchedule so layer-wise and per-epoch decay compose with it.
struct AdamState {
  std::vector<Eigen::VectorXd> m, v;
  long step = 0;

  template <class Blocks>
  void Init(Blocks& blocks) {
    for (auto& b : blocks) {
      m.push_back(Eigen::VectorXd::Zero(b.size));
      v.push_back(Eigen::VectorXd::Zero(b.size));
    }
  }

  template <class Blocks, class GradBlocks>
  void Update(Blocks& params, const GradBlocks& grads, const TrainConfig& cfg,
              int epoch, int num_encoder_layers) {
    ++step;
    double bc1 = 1.0 - std::pow(cfg.adam_beta1, step);
    double bc2 = 1.0 - std::pow(cfg.adam_beta2, step);
    for (std::size_t b = 0; b < params.size(); ++b) {
      double lr =
          LrSchedule(cfg, epoch, params[b].encoder_depth, num_encoder_layers);
      for (long i = 0; i < params[b].size; ++i) {
        double g = grads[b].data[i];
        m[b][i] = cfg.adam_beta1 * m[b][i] + (1.0 - cfg.adam_beta1) * g;
        v[b][i] = cfg.adam_beta2 * v[b][i] + (1.0 - cfg.adam_beta2) * g * g;
        double mhat = m[b][i] / bc1;
        double vhat = v[b][i] / bc2;
        params[b].data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      }
    }
  }
};

inline Eigen::MatrixXd CropRows(const Eigen::MatrixXd& m, long start,
                                long frames) {
  Eigen::MatrixXd out(frames, m.cols());
  for (long j = 0; j < frames; ++j) out.row(j) = m.row((start + j) % m.rows());
  return out;
}

inline long CropStart(long total, long crop, std::mt19937_64& rng) {
  long hi = total >= crop ? total - crop : total - 1;
  if (hi <= 0) return 0;
  return static_cast<long>(
      std::uniform_int_distribution<long>(0, hi)(rng));
}

}  // namespace detail

// Scores one sample with the current system (full length, no crop).
template <class Model>
double ScoreSample(const TrainSample& sample, const Model& model,
                   const ToyEncoder* encoder) {
  const FeatureStack* stack = nullptr;
  FeatureStack encoded;
  if (std::holds_alternative<FeatureStack>(sample.input)) {
    stack = &std::get<FeatureStack>(sample.input);
  } else {
    if (!encoder)
      throw DataError("raw-feature sample given but no encoder configured");
    encoded = encoder->Forward(std::get<Eigen::MatrixXd>(sample.input));
    stack = &encoded;
  }
  if constexpr (std::is_same_v<Model, WaModel>) {
    VecT<double> logits = Forward(*stack, model, (WaCacheT<double>*)nullptr);
    return logits[0] - logits[1];
  } else {
    VecT<double> logits = Forward(*stack, model, (MhfaCacheT<double>*)nullptr);
    return logits[0] - logits[1];
  }
}

template <class Model>
double ScoringEer(const std::vector<TrainSample>& scoring, const Model& model,
                  const ToyEncoder* encoder) {
  LabeledScoreSet set;
  set.records.reserve(scoring.size());
  for (std::size_t i = 0; i < scoring.size(); ++i) {
    double s = ScoreSample(scoring[i], model, encoder);
    set.records.push_back({"s" + std::to_string(i), s,
                           scoring[i].label == 0 ? Label::kBonafide
                                                 : Label::kSpoof,
                           "-", "-"});
  }
  return Eer(set).first;
}

// Mini-batch Adam training with per-epoch and layer-wise learning-rate
// decay, weighted cross-entropy plus L2-to-init on the encoder, a fresh
// random crop per sample per epoch, and early stopping on scoring-set EER.
// Fully deterministic for a fixed seed: every random draw comes from a
// stream derived as hash(seed, epoch, sample_index).
template <class Model>
TrainResult<Model> Train(Model model, std::optional<ToyEncoder> encoder,
                         const std::vector<TrainSample>& train,
                         const std::vector<TrainSample>& scoring,
                         const TrainConfig& cfg, std::uint64_t seed) {
  if (train.empty()) throw DataError("empty training set");
  bool has_bon = false, has_spf = false;
  for (const TrainSample& s : train) (s.label == 0 ? has_bon : has_spf) = true;
  if (!has_bon || !has_spf)
    throw DataError("training set needs both classes");

  const ToyEncoder init_snapshot = encoder ? *encoder : ToyEncoder{};
  const int enc_layers = encoder ? static_cast<int>(encoder->NumLayers()) : 0;

  detail::AdamState adam_model, adam_encoder;
  {
    auto blocks = model.Blocks();
    adam_model.Init(blocks);
  }
  if (encoder) {
    auto blocks = encoder->Blocks();
    adam_encoder.Init(blocks);
  }

  TrainResult<Model> result;
  result.model = model;
  if (encoder) {
    result.encoder = *encoder;
    result.has_encoder = true;
  }
  double best_eer = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng =
        DeriveRng(seed, static_cast<std::uint64_t>(epoch), 0xabcdef);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 pos + static_cast<std::size_t>(cfg.batch_size));
      Model model_grads = model.ZeroLike();
      ToyEncoder encoder_grads = encoder ? encoder->ZeroLike() : ToyEncoder{};
      double batch_loss = 0.0;

      for (std::size_t p = pos; p < end; ++p) {
        std::size_t idx = order[p];
        const TrainSample& sample = train[idx];
        std::mt19937_64 rng =
            DeriveRng(seed, static_cast<std::uint64_t>(epoch), idx);

        FeatureStack stack;
        Eigen::MatrixXd raw;
        bool through_encoder = false;
        if (std::holds_alternative<FeatureStack>(sample.input)) {
          const FeatureStack& full = std::get<FeatureStack>(sample.input);
          long start = detail::CropStart(full.Frames(), cfg.crop_frames, rng);
          stack = full.Crop(start, cfg.crop_frames);
        } else {
          if (!encoder)
            throw DataError("raw-feature sample given but no encoder configured");
          const Eigen::MatrixXd& full = std::get<Eigen::MatrixXd>(sample.input);
          long start = detail::CropStart(full.rows(), cfg.crop_frames, rng);
          raw = detail::CropRows(full, start, cfg.crop_frames);
          stack = encoder->Forward(raw);
          through_encoder = true;
        }

        VecT<double> dlogits;
        double loss_value = 0.0;
        std::vector<MatT<double>> stack_grads;
        if constexpr (std::is_same_v<Model, WaModel>) {
          WaCacheT<double> cache;
          VecT<double> logits = Forward(stack, model, &cache);
          auto loss = WeightedCrossEntropy(logits, sample.label,
                                           cfg.class_weight_bonafide,
                                           cfg.class_weight_spoof);
          loss_value = loss.value;
          Backward(model, cache, loss.dlogits, &model_grads,
                   through_encoder ? &stack_grads : nullptr);
        } else {
          MhfaCacheT<double> cache;
          VecT<double> logits = Forward(stack, model, &cache);
          auto loss = WeightedCrossEntropy(logits, sample.label,
                                           cfg.class_weight_bonafide,
                                           cfg.class_weight_spoof);
          loss_value = loss.value;
          Backward(stack, model, cache, loss.dlogits, &model_grads,
                   through_encoder ? &stack_grads : nullptr);
        }
        if (!std::isfinite(loss_value))
          throw NumericalError("divergent loss at epoch " +
                               std::to_string(epoch) + ", sample " +
                               std::to_string(idx));
        batch_loss += loss_value;
        if (through_encoder)
          encoder->Backward(raw, stack, stack_grads, &encoder_grads);
      }

      const double inv_n = 1.0 / static_cast<double>(end - pos);
      for (auto& b : model_grads.Blocks())
        for (long i = 0; i < b.size; ++i) b.data[i] *= inv_n;
      if (encoder) {
        for (auto& b : encoder_grads.Blocks())
          for (long i = 0; i < b.size; ++i) b.data[i] *= inv_n;
        if (cfg.l2_to_init_lambda > 0)
          batch_loss += L2ToInit(*encoder, init_snapshot,
                                 cfg.l2_to_init_lambda, &encoder_grads);
      }
      if (!std::isfinite(batch_loss))
        throw NumericalError("divergent batch loss at epoch " +
                             std::to_string(epoch));

      auto params = model.Blocks();
      auto grads = model_grads.Blocks();
      adam_model.Update(params, grads, cfg, epoch, enc_layers);
      if (encoder) {
        auto eparams = encoder->Blocks();
        auto egrads = encoder_grads.Blocks();
        adam_encoder.Update(eparams, egrads, cfg, epoch, enc_layers);
      }
    }

    double eer = ScoringEer(scoring, model, encoder ? &*encoder : nullptr);
    result.eer_trace.push_back(eer);
    if (eer < best_eer) {
      best_eer = eer;
      result.model = model;
      if (encoder) result.encoder = *encoder;
      result.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epochs_since_best >= cfg.patience) break;
  }
  return result;
}

}  // namespace spoofkit

#endif  // SPOOFKIT_TRAINER_HPP
