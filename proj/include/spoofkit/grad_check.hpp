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
// Central finite-difference verification of the analytic gradients through
// loss -> back-end -> (optionally) toy encoder + L2-to-init. Used by the
// test suites and the `grad-check` CLI subcommand.

#ifndef SPOOFKIT_GRAD_CHECK_HPP
#define SPOOFKIT_GRAD_CHECK_HPP

#include <string>
#include <type_traits>

#include "spoofkit/pooling.hpp"
#include "spoofkit/rng.hpp"

namespace spoofkit {

struct GradCheckOptions {
  long encoder_layers = 4;  // L; the stack carries L+1 layers
  long dim = 32;
  long in_dim = 12;
  long frames = 16;
  long heads = 4;
  long compressed = 8;
  long embed_dim = 16;
  bool with_encoder = true;
  double l2_lambda = 0.1;
  bool softmax_wa = false;
  int points_per_block = 10;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_block;
};

namespace detail {

template <class S>
double FdStep(double magnitude) {
  // float32 sits between two regimes: small steps amplify the roundoff
  // noise of the single-precision forward by 1/(2h), large steps grow the
  // h^2 truncation term through tanh. The check runs float32 at a big step
  // and cancels the truncation with one Richardson extrapolation instead.
  double rel = std::is_same_v<S, float> ? 4e-2 : 1e-4;
  return rel * std::max(magnitude, 1.0);
}

// f() must re-evaluate the full scalar objective at the current parameters.
template <class S, class Eval>
void FdCheckBlocks(std::vector<ParamBlock<S>> param_blocks,
                   std::vector<ParamBlock<S>> grad_blocks, Eval&& f,
                   const GradCheckOptions& opt, std::mt19937_64& rng,
                   GradCheckResult* result) {
  // The float32 FD reference carries an irreducible noise of roughly 1e-5
  // absolute however the step is chosen, so components below ~2e-3 cannot
  // be certified to 1% relative; under the floor the comparison degrades
  // to an absolute one at that noise scale.
  const double floor = std::is_same_v<S, float> ? 2e-3 : 1e-6;
  for (std::size_t b = 0; b < param_blocks.size(); ++b) {
    auto& pb = param_blocks[b];
    for (int p = 0; p < opt.points_per_block; ++p) {
      long i = static_cast<long>(
          std::uniform_int_distribution<long>(0, pb.size - 1)(rng));
      S saved = pb.data[i];
      double h = FdStep<S>(std::abs(static_cast<double>(saved)));
      auto central = [&](double step) {
        pb.data[i] = saved + static_cast<S>(step);
        double up = f();
        pb.data[i] = saved - static_cast<S>(step);
        double down = f();
        pb.data[i] = saved;
        return (up - down) / (2.0 * step);
      };
      double fd = central(h);
      if constexpr (std::is_same_v<S, float>) {
        // The large float32 step keeps roundoff down but leaves a visible
        // h^2 truncation term through tanh; one Richardson step cancels it.
        fd = (4.0 * central(0.5 * h) - fd) / 3.0;
      }
      double analytic = static_cast<double>(grad_blocks[b].data[i]);
      double err = std::abs(analytic - fd) /
                   std::max({std::abs(analytic), std::abs(fd), floor});
      if (err > result->max_rel_err) {
        result->max_rel_err = err;
        result->worst_block = pb.name;
      }
    }
  }
}

}  // namespace detail

// Backend: WaModelT<S> or MhfaModelT<S>.
template <class S, class Model>
GradCheckResult GradCheck(const GradCheckOptions& opt, std::uint64_t seed) {
  std::mt19937_64 rng = DeriveRng(seed, 0, 0x6c);
  const long nl = opt.encoder_layers + 1;

  Model model = [&] {
    if constexpr (std::is_same_v<Model, WaModelT<S>>) {
      Model m = Model::Random(nl, opt.dim, 2, rng);
      m.softmax_weights = opt.softmax_wa;
      return m;
    } else {
      return Model::Random(nl, opt.dim, opt.heads, opt.compressed,
                           opt.embed_dim, 2, rng);
    }
  }();
  ToyEncoderT<S> encoder =
      ToyEncoderT<S>::Random(opt.in_dim, opt.dim, opt.encoder_layers, rng);
  // A distinct init snapshot so the L2-to-init term carries gradient.
  ToyEncoderT<S> init =
      ToyEncoderT<S>::Random(opt.in_dim, opt.dim, opt.encoder_layers, rng);
  MatT<S> raw = detail::RandomMat<S>(opt.frames, opt.in_dim, 1.0, rng);
  FeatureStackT<S> fixed_stack;
  if (!opt.with_encoder) {
    fixed_stack.layers.reserve(nl);
    for (long l = 0; l < nl; ++l)
      fixed_stack.layers.push_back(
          detail::RandomMat<S>(opt.frames, opt.dim, 1.0, rng));
  }
  const int label = std::uniform_int_distribution<int>(0, 1)(rng);
  const S lambda = static_cast<S>(opt.l2_lambda);

  auto eval = [&]() -> double {
    FeatureStackT<S> stack =
        opt.with_encoder ? encoder.Forward(raw) : fixed_stack;
    VecT<S> logits;
    if constexpr (std::is_same_v<Model, WaModelT<S>>)
      logits = Forward(stack, model, static_cast<WaCacheT<S>*>(nullptr));
    else
      logits = Forward(stack, model, static_cast<MhfaCacheT<S>*>(nullptr));
    // The scalar reduction happens in double even on the float32 path: the
    // difference quotient divides out the step, so roundoff at the loss
    // level would otherwise swamp the small-gradient points. The forward
    // chain under test stays in S.
    const double l0 = static_cast<double>(logits(0));
    const double l1 = static_cast<double>(logits(1));
    const double m = std::max(l0, l1);
    const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    double value = (label == 0 ? 9.0 : 1.0) * (lse - (label == 0 ? l0 : l1));
    if (opt.with_encoder && lambda > 0) {
      double l2 = 0.0;
      auto cur = encoder.Blocks();
      auto ref = init.Blocks();
      for (std::size_t b = 0; b < cur.size(); ++b)
        for (long i = 0; i < cur[b].size; ++i) {
          double d = static_cast<double>(cur[b].data[i]) -
                     static_cast<double>(ref[b].data[i]);
          l2 += d * d;
        }
      value += static_cast<double>(lambda) * l2;
    }
    return value;
  };

  // Analytic gradients at the reference point.
  Model model_grads = model.ZeroLike();
  ToyEncoderT<S> encoder_grads = encoder.ZeroLike();
  {
    FeatureStackT<S> stack =
        opt.with_encoder ? encoder.Forward(raw) : fixed_stack;
    std::vector<MatT<S>> stack_grads;
    if constexpr (std::is_same_v<Model, WaModelT<S>>) {
      WaCacheT<S> cache;
      VecT<S> logits = Forward(stack, model, &cache);
      auto loss = WeightedCrossEntropy(logits, label, 9.0, 1.0);
      Backward(model, cache, loss.dlogits, &model_grads,
               opt.with_encoder ? &stack_grads : nullptr);
    } else {
      MhfaCacheT<S> cache;
      VecT<S> logits = Forward(stack, model, &cache);
      auto loss = WeightedCrossEntropy(logits, label, 9.0, 1.0);
      Backward(stack, model, cache, loss.dlogits, &model_grads,
               opt.with_encoder ? &stack_grads : nullptr);
    }
    if (opt.with_encoder) {
      encoder.Backward(raw, stack, stack_grads, &encoder_grads);
      if (lambda > 0) L2ToInit<S>(encoder, init, lambda, &encoder_grads);
    }
  }

  GradCheckResult result;
  detail::FdCheckBlocks<S>(model.Blocks(), model_grads.Blocks(), eval, opt,
                           rng, &result);
  if (opt.with_encoder)
    detail::FdCheckBlocks<S>(encoder.Blocks(), encoder_grads.Blocks(), eval,
                             opt, rng, &result);
  return result;
}

}  // namespace spoofkit

#endif  // SPOOFKIT_GRAD_CHECK_HPP
