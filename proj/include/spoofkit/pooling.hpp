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
// Pooling back-ends over encoder layer stacks:
//
//   WA    -- learned weighted average of the L+1 layer outputs, temporal
//            mean pooling, linear classifier.
//   MHFA  -- two softmax-normalized layer mixtures form per-frame keys and
//            values; H learned query vectors attend over frames; attended
//            values are compressed (D -> D'), concatenated across heads and
//            mapped to an utterance embedding, then classified.
//
// Everything is templated on the scalar so the same code runs in float64
// (default, used by all tests) and float32. All backward passes are exact
// analytic gradients, including the softmax Jacobians.

#ifndef SPOOFKIT_POOLING_HPP
#define SPOOFKIT_POOLING_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spoofkit/errors.hpp"

namespace spoofkit {

template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// A view into one named parameter tensor. encoder_depth is -1 for back-end
// parameters; encoder parameters carry their layer depth (0 = input
// projection) for layer-wise learning-rate decay.
template <class S>
struct ParamBlock {
  std::string name;
  S* data;
  long size;
  int encoder_depth;
};

// (L+1) layer outputs, each T frames x D dims. Index 0 is the
// convolutional-encoder output, indices 1..L the transformer layers.
template <class S>
struct FeatureStackT {
  std::vector<MatT<S>> layers;

  long NumLayers() const { return static_cast<long>(layers.size()); }
  long Frames() const { return layers.empty() ? 0 : layers[0].rows(); }
  long Dim() const { return layers.empty() ? 0 : layers[0].cols(); }

  void Validate() const {
    if (layers.empty()) throw DataError("empty feature stack");
    for (const auto& m : layers) {
      if (m.rows() != Frames() || m.cols() != Dim() || m.rows() < 1)
        throw DataError("feature stack layers disagree on shape");
      if (!m.allFinite()) throw DataError("non-finite feature stack entry");
    }
  }

  // Contiguous crop of `frames` rows starting at `start`, wrapping around.
  FeatureStackT Crop(long start, long frames) const {
    FeatureStackT out;
    out.layers.reserve(layers.size());
    const long t = Frames();
    for (const auto& m : layers) {
      MatT<S> c(frames, m.cols());
      for (long j = 0; j < frames; ++j) c.row(j) = m.row((start + j) % t);
      out.layers.push_back(std::move(c));
    }
    return out;
  }
};

using FeatureStack = FeatureStackT<double>;

namespace detail {

template <class S>
VecT<S> Softmax(const VecT<S>& x) {
  VecT<S> e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

// Pulls a softmax-output gradient back to the softmax input:
// dx_j = p_j * (dp_j - p . dp).
template <class S>
VecT<S> SoftmaxBackward(const VecT<S>& p, const VecT<S>& dp) {
  S inner = p.dot(dp);
  return (p.array() * (dp.array() - inner)).matrix();
}

template <class S>
S Uniform(std::mt19937_64& rng, double lo, double hi) {
  return static_cast<S>(std::uniform_real_distribution<double>(lo, hi)(rng));
}

template <class S>
MatT<S> RandomMat(long rows, long cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, scale);
  MatT<S> m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = static_cast<S>(dist(rng));
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Weighted Average back-end

template <class S>
struct WaModelT {
  VecT<S> layer_weights;  // L+1
  MatT<S> classifier_w;   // D x C
  VecT<S> classifier_b;   // C
  // Raw learnable weights by default; softmax normalization behind a flag.
  bool softmax_weights = false;

  static WaModelT Random(long num_layers, long dim, long classes,
                         std::mt19937_64& rng) {
    WaModelT m;
    m.layer_weights = detail::RandomMat<S>(num_layers, 1, 0.5, rng);
    m.layer_weights.array() += static_cast<S>(1.0 / num_layers);
    m.classifier_w = detail::RandomMat<S>(dim, classes, 1.0 / std::sqrt(dim), rng);
    m.classifier_b = VecT<S>::Zero(classes);
    return m;
  }

  WaModelT ZeroLike() const {
    WaModelT z;
    z.layer_weights = VecT<S>::Zero(layer_weights.size());
    z.classifier_w = MatT<S>::Zero(classifier_w.rows(), classifier_w.cols());
    z.classifier_b = VecT<S>::Zero(classifier_b.size());
    z.softmax_weights = softmax_weights;
    return z;
  }

  std::vector<ParamBlock<S>> Blocks() {
    return {
        {"wa.layer_weights", layer_weights.data(), layer_weights.size(), -1},
        {"wa.classifier_w", classifier_w.data(), classifier_w.size(), -1},
        {"wa.classifier_b", classifier_b.data(), classifier_b.size(), -1}};
  }

  long NumParams() const {
    return layer_weights.size() + classifier_w.size() + classifier_b.size();
  }
};

using WaModel = WaModelT<double>;

template <class S>
struct WaCacheT {
  MatT<S> layer_means;  // (L+1) x D, row l = mean_t of layer l
  VecT<S> mix;          // effective layer weights
  VecT<S> pooled;       // D
  long frames = 0;
};

template <class S>
struct ForwardResultT {
  VecT<S> logits;
};

// O_t = sum_l w_l * layer_l[t]; temporal mean; affine classifier.
template <class S>
VecT<S> Forward(const FeatureStackT<S>& stack, const WaModelT<S>& model,
                WaCacheT<S>* cache) {
  stack.Validate();
  if (stack.NumLayers() != model.layer_weights.size())
    throw DataError("stack depth does not match WA model");
  const long nl = stack.NumLayers();
  MatT<S> means(nl, stack.Dim());
  for (long l = 0; l < nl; ++l) means.row(l) = stack.layers[l].colwise().mean();
  VecT<S> mix = model.softmax_weights ? detail::Softmax<S>(model.layer_weights)
                                      : model.layer_weights;
  VecT<S> pooled = means.transpose() * mix;
  VecT<S> logits = model.classifier_w.transpose() * pooled + model.classifier_b;
  if (cache) {
    cache->layer_means = std::move(means);
    cache->mix = std::move(mix);
    cache->pooled = std::move(pooled);
    cache->frames = stack.Frames();
  }
  return logits;
}

template <class S>
void Backward(const WaModelT<S>& model, const WaCacheT<S>& cache,
              const VecT<S>& dlogits, WaModelT<S>* grads,
              std::vector<MatT<S>>* stack_grads = nullptr) {
  if (cache.frames == 0) throw DataError("stale or missing WA cache");
  grads->classifier_w += cache.pooled * dlogits.transpose();
  grads->classifier_b += dlogits;
  VecT<S> dpooled = model.classifier_w * dlogits;
  VecT<S> dmix = cache.layer_means * dpooled;
  if (model.softmax_weights)
    grads->layer_weights += detail::SoftmaxBackward<S>(cache.mix, dmix);
  else
    grads->layer_weights += dmix;
  if (stack_grads) {
    const long nl = cache.layer_means.rows();
    const S inv_t = static_cast<S>(1.0) / static_cast<S>(cache.frames);
    stack_grads->resize(nl);
    for (long l = 0; l < nl; ++l)
      (*stack_grads)[l] = (cache.mix[l] * inv_t) *
                          MatT<S>::Ones(cache.frames, 1) * dpooled.transpose();
  }
}

// ---------------------------------------------------------------------------
// Multi-Head Factorized Attentive back-end

template <class S>
struct MhfaModelT {
  VecT<S> key_layer_weights;    // L+1, softmax-mixed
  VecT<S> value_layer_weights;  // L+1, softmax-mixed
  MatT<S> head_queries;         // H x D
  MatT<S> value_projection;     // D x D'
  MatT<S> embedding;            // (H*D') x E
  MatT<S> classifier_w;         // E x C
  VecT<S> classifier_b;         // C

  long Heads() const { return head_queries.rows(); }

  static MhfaModelT Random(long num_layers, long dim, long heads,
                           long compressed, long embed_dim, long classes,
                           std::mt19937_64& rng) {
    MhfaModelT m;
    m.key_layer_weights = detail::RandomMat<S>(num_layers, 1, 0.5, rng);
    m.value_layer_weights = detail::RandomMat<S>(num_layers, 1, 0.5, rng);
    m.head_queries = detail::RandomMat<S>(heads, dim, 1.0 / std::sqrt(dim), rng);
    m.value_projection =
        detail::RandomMat<S>(dim, compressed, 1.0 / std::sqrt(dim), rng);
    m.embedding = detail::RandomMat<S>(heads * compressed, embed_dim,
                                       1.0 / std::sqrt(heads * compressed), rng);
    m.classifier_w =
        detail::RandomMat<S>(embed_dim, classes, 1.0 / std::sqrt(embed_dim), rng);
    m.classifier_b = VecT<S>::Zero(classes);
    return m;
  }

  MhfaModelT ZeroLike() const {
    MhfaModelT z;
    z.key_layer_weights = VecT<S>::Zero(key_layer_weights.size());
    z.value_layer_weights = VecT<S>::Zero(value_layer_weights.size());
    z.head_queries = MatT<S>::Zero(head_queries.rows(), head_queries.cols());
    z.value_projection =
        MatT<S>::Zero(value_projection.rows(), value_projection.cols());
    z.embedding = MatT<S>::Zero(embedding.rows(), embedding.cols());
    z.classifier_w = MatT<S>::Zero(classifier_w.rows(), classifier_w.cols());
    z.classifier_b = VecT<S>::Zero(classifier_b.size());
    return z;
  }

  std::vector<ParamBlock<S>> Blocks() {
    return {{"mhfa.key_layer_weights", key_layer_weights.data(),
             key_layer_weights.size(), -1},
            {"mhfa.value_layer_weights", value_layer_weights.data(),
             value_layer_weights.size(), -1},
            {"mhfa.head_queries", head_queries.data(), head_queries.size(), -1},
            {"mhfa.value_projection", value_projection.data(),
             value_projection.size(), -1},
            {"mhfa.embedding", embedding.data(), embedding.size(), -1},
            {"mhfa.classifier_w", classifier_w.data(), classifier_w.size(), -1},
            {"mhfa.classifier_b", classifier_b.data(), classifier_b.size(), -1}};
  }

  long NumParams() const {
    return key_layer_weights.size() + value_layer_weights.size() +
           head_queries.size() + value_projection.size() + embedding.size() +
           classifier_w.size() + classifier_b.size();
  }
};

using MhfaModel = MhfaModelT<double>;

template <class S>
struct MhfaCacheT {
  VecT<S> key_mix, value_mix;  // softmaxed layer weights
  MatT<S> keys;                // T x D
  MatT<S> values;              // T x D
  MatT<S> projected;           // T x D'
  MatT<S> attention;           // T x H, columns sum to 1
  VecT<S> concat;              // H*D'
  VecT<S> embed_out;           // E
  long frames = 0;
};

// k_t = sum_l softmax(a_key)_l layer_l[t]; v_t analogous;
// per head h: att = softmax_t(k_t . q_h), c_h = sum_t att_t (v_t P);
// concat heads -> embedding -> classifier.
template <class S>
VecT<S> Forward(const FeatureStackT<S>& stack, const MhfaModelT<S>& model,
                MhfaCacheT<S>* cache) {
  stack.Validate();
  if (stack.NumLayers() != model.key_layer_weights.size())
    throw DataError("stack depth does not match MHFA model");
  if (model.Heads() < 1) throw DataError("MHFA needs at least one head");
  const long nl = stack.NumLayers();
  const long t = stack.Frames();
  const long h = model.Heads();
  const long dp = model.value_projection.cols();

  VecT<S> key_mix = detail::Softmax<S>(model.key_layer_weights);
  VecT<S> value_mix = detail::Softmax<S>(model.value_layer_weights);
  MatT<S> keys = MatT<S>::Zero(t, stack.Dim());
  MatT<S> values = MatT<S>::Zero(t, stack.Dim());
  for (long l = 0; l < nl; ++l) {
    keys.noalias() += key_mix[l] * stack.layers[l];
    values.noalias() += value_mix[l] * stack.layers[l];
  }
  MatT<S> projected = values * model.value_projection;  // T x D'

  MatT<S> attention(t, h);
  VecT<S> concat(h * dp);
  for (long j = 0; j < h; ++j) {
    VecT<S> scores = keys * model.head_queries.row(j).transpose();
    attention.col(j) = detail::Softmax<S>(scores);
    concat.segment(j * dp, dp) = projected.transpose() * attention.col(j);
  }
  VecT<S> embed_out = model.embedding.transpose() * concat;
  VecT<S> logits = model.classifier_w.transpose() * embed_out + model.classifier_b;
  if (cache) {
    cache->key_mix = std::move(key_mix);
    cache->value_mix = std::move(value_mix);
    cache->keys = std::move(keys);
    cache->values = std::move(values);
    cache->projected = std::move(projected);
    cache->attention = std::move(attention);
    cache->concat = std::move(concat);
    cache->embed_out = std::move(embed_out);
    cache->frames = t;
  }
  return logits;
}

template <class S>
void Backward(const FeatureStackT<S>& stack, const MhfaModelT<S>& model,
              const MhfaCacheT<S>& cache, const VecT<S>& dlogits,
              MhfaModelT<S>* grads,
              std::vector<MatT<S>>* stack_grads = nullptr) {
  if (cache.frames != stack.Frames())
    throw DataError("stale or missing MHFA cache");
  const long nl = stack.NumLayers();
  const long h = model.Heads();
  const long dp = model.value_projection.cols();

  grads->classifier_w += cache.embed_out * dlogits.transpose();
  grads->classifier_b += dlogits;
  VecT<S> dembed_out = model.classifier_w * dlogits;
  grads->embedding += cache.concat * dembed_out.transpose();
  VecT<S> dconcat = model.embedding * dembed_out;

  MatT<S> dprojected = MatT<S>::Zero(cache.frames, dp);
  MatT<S> dkeys = MatT<S>::Zero(cache.frames, stack.Dim());
  for (long j = 0; j < h; ++j) {
    VecT<S> dc = dconcat.segment(j * dp, dp);
    dprojected.noalias() += cache.attention.col(j) * dc.transpose();
    VecT<S> datt = cache.projected * dc;
    VecT<S> dscores =
        detail::SoftmaxBackward<S>(cache.attention.col(j), datt);
    dkeys.noalias() += dscores * model.head_queries.row(j);
    grads->head_queries.row(j) += (cache.keys.transpose() * dscores).transpose();
  }
  grads->value_projection += cache.values.transpose() * dprojected;
  MatT<S> dvalues = dprojected * model.value_projection.transpose();

  VecT<S> dkey_mix(nl), dvalue_mix(nl);
  for (long l = 0; l < nl; ++l) {
    dkey_mix[l] = (dkeys.array() * stack.layers[l].array()).sum();
    dvalue_mix[l] = (dvalues.array() * stack.layers[l].array()).sum();
  }
  grads->key_layer_weights +=
      detail::SoftmaxBackward<S>(cache.key_mix, dkey_mix);
  grads->value_layer_weights +=
      detail::SoftmaxBackward<S>(cache.value_mix, dvalue_mix);

  if (stack_grads) {
    stack_grads->resize(nl);
    for (long l = 0; l < nl; ++l)
      (*stack_grads)[l] =
          cache.key_mix[l] * dkeys + cache.value_mix[l] * dvalues;
  }
}

// ---------------------------------------------------------------------------
// Toy encoder: a small stand-in for a pre-trained front-end so the
// fine-tuning machinery (L2-to-init, layer-wise decay) has a real target.
// Layer 0 is an input projection; layers 1..L are affine + tanh maps whose
// outputs populate the matching stack indices.

template <class S>
struct ToyEncoderT {
  MatT<S> input_proj;  // D_in x D
  VecT<S> input_bias;  // D
  std::vector<MatT<S>> layer_w;  // L of D x D
  std::vector<VecT<S>> layer_b;  // L of D

  long NumLayers() const { return static_cast<long>(layer_w.size()); }

  static ToyEncoderT Random(long in_dim, long dim, long num_layers,
                            std::mt19937_64& rng) {
    ToyEncoderT e;
    e.input_proj = detail::RandomMat<S>(in_dim, dim, 1.0 / std::sqrt(in_dim), rng);
    e.input_bias = VecT<S>::Zero(dim);
    for (long l = 0; l < num_layers; ++l) {
      e.layer_w.push_back(detail::RandomMat<S>(dim, dim, 1.0 / std::sqrt(dim), rng));
      e.layer_b.push_back(VecT<S>::Zero(dim));
    }
    return e;
  }

  ToyEncoderT ZeroLike() const {
    ToyEncoderT z;
    z.input_proj = MatT<S>::Zero(input_proj.rows(), input_proj.cols());
    z.input_bias = VecT<S>::Zero(input_bias.size());
    for (std::size_t l = 0; l < layer_w.size(); ++l) {
      z.layer_w.push_back(MatT<S>::Zero(layer_w[l].rows(), layer_w[l].cols()));
      z.layer_b.push_back(VecT<S>::Zero(layer_b[l].size()));
    }
    return z;
  }

  std::vector<ParamBlock<S>> Blocks() {
    std::vector<ParamBlock<S>> blocks;
    blocks.push_back({"enc.input_proj", input_proj.data(), input_proj.size(), 0});
    blocks.push_back({"enc.input_bias", input_bias.data(), input_bias.size(), 0});
    for (std::size_t l = 0; l < layer_w.size(); ++l) {
      int depth = static_cast<int>(l) + 1;
      blocks.push_back({"enc.layer_w" + std::to_string(l + 1),
                        layer_w[l].data(), layer_w[l].size(), depth});
      blocks.push_back({"enc.layer_b" + std::to_string(l + 1),
                        layer_b[l].data(), layer_b[l].size(), depth});
    }
    return blocks;
  }

  // input: T x D_in. The returned stack doubles as the backward cache.
  FeatureStackT<S> Forward(const MatT<S>& input) const {
    if (input.cols() != input_proj.rows())
      throw DataError("encoder input dimension mismatch");
    FeatureStackT<S> stack;
    MatT<S> cur =
        ((input * input_proj).rowwise() + input_bias.transpose()).array().tanh();
    stack.layers.push_back(cur);
    for (std::size_t l = 0; l < layer_w.size(); ++l) {
      cur = ((cur * layer_w[l]).rowwise() + layer_b[l].transpose()).array().tanh();
      stack.layers.push_back(cur);
    }
    return stack;
  }

  // dstack[l] is the gradient flowing into stack layer l from the pooling
  // back-end; every layer feeds both the next layer and the back-end.
  void Backward(const MatT<S>& input, const FeatureStackT<S>& stack,
                const std::vector<MatT<S>>& dstack, ToyEncoderT* grads) const {
    const long depth = NumLayers();
    if (stack.NumLayers() != depth + 1 ||
        static_cast<long>(dstack.size()) != depth + 1)
      throw DataError("encoder backward: stack/gradient depth mismatch");
    MatT<S> g = dstack[depth];
    for (long l = depth - 1; l >= 0; --l) {
      MatT<S> gz = (g.array() *
                    (1 - stack.layers[l + 1].array().square()))
                       .matrix();
      grads->layer_w[l] += stack.layers[l].transpose() * gz;
      grads->layer_b[l] += gz.colwise().sum().transpose();
      g = dstack[l] + gz * layer_w[l].transpose();
    }
    MatT<S> gz = (g.array() * (1 - stack.layers[0].array().square())).matrix();
    grads->input_proj += input.transpose() * gz;
    grads->input_bias += gz.colwise().sum().transpose();
  }
};

using ToyEncoder = ToyEncoderT<double>;

// ---------------------------------------------------------------------------
// Loss, L2-to-init, learning-rate schedule

// Class index 0 = bonafide, 1 = spoof. Detection score = logit0 - logit1.
template <class S>
struct LossResultT {
  S value;
  VecT<S> dlogits;
};

template <class S>
LossResultT<S> WeightedCrossEntropy(const VecT<S>& logits, int label,
                                    double weight_bonafide,
                                    double weight_spoof) {
  if (logits.size() != 2) throw DataError("loss expects 2 logits");
  if (label != 0 && label != 1) throw DataError("label must be 0 or 1");
  const S w = static_cast<S>(label == 0 ? weight_bonafide : weight_spoof);
  S m = logits.maxCoeff();
  VecT<S> e = (logits.array() - m).exp();
  S z = e.sum();
  VecT<S> p = e / z;
  S log_p = logits[label] - m - std::log(z);
  LossResultT<S> out;
  out.value = -w * log_p;
  out.dlogits = w * p;
  out.dlogits[label] -= w;
  return out;
}

// lambda * sum (theta - theta0)^2 over the encoder parameters; accumulates
// 2*lambda*(theta - theta0) into grads when given.
template <class S>
S L2ToInit(ToyEncoderT<S>& current, const ToyEncoderT<S>& init_snapshot,
           S lambda, ToyEncoderT<S>* grads) {
  ToyEncoderT<S> init_copy = init_snapshot;  // Blocks() needs mutable access
  auto cur_blocks = current.Blocks();
  auto init_blocks = init_copy.Blocks();
  std::vector<ParamBlock<S>> grad_blocks;
  if (grads) grad_blocks = grads->Blocks();
  if (cur_blocks.size() != init_blocks.size())
    throw DataError("L2-to-init: parameter shape mismatch");
  S penalty = 0;
  for (std::size_t b = 0; b < cur_blocks.size(); ++b) {
    if (cur_blocks[b].size != init_blocks[b].size)
      throw DataError("L2-to-init: parameter shape mismatch");
    for (long i = 0; i < cur_blocks[b].size; ++i) {
      S d = cur_blocks[b].data[i] - init_blocks[b].data[i];
      penalty += d * d;
      if (grads) grad_blocks[b].data[i] += 2 * lambda * d;
    }
  }
  return lambda * penalty;
}

struct TrainConfig {
  double lr_backend = 5e-3;
  double lr_encoder = 2e-5;
  double per_epoch_decay = 0.95;   // both rates shrink 5% per epoch
  double layerwise_decay = 0.9;    // gamma; earlier encoder layers get less
  double class_weight_bonafide = 9.0;
  double class_weight_spoof = 1.0;
  double l2_to_init_lambda = 0.0;
  int epochs = 100;
  int patience = 50;
  int batch_size = 120;
  long crop_frames = 200;  // 4 s at the 50 Hz encoder frame rate
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// encoder_depth -1 selects the back-end rate. Encoder layer depths run
// 0..num_encoder_layers (input projection is depth 0); the top layer gets
// the full encoder rate and each step down multiplies by gamma.
inline double LrSchedule(const TrainConfig& cfg, int epoch, int encoder_depth,
                         int num_encoder_layers) {
  double epoch_factor = std::pow(cfg.per_epoch_decay, epoch);
  if (encoder_depth < 0) return cfg.lr_backend * epoch_factor;
  return cfg.lr_encoder * epoch_factor *
         std::pow(cfg.layerwise_decay, num_encoder_layers - encoder_depth);
}

}  // namespace spoofkit

#endif  // SPOOFKIT_POOLING_HPP
