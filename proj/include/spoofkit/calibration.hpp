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

#ifndef SPOOFKIT_CALIBRATION_HPP
#define SPOOFKIT_CALIBRATION_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spoofkit/metrics.hpp"
#include "spoofkit/score_io.hpp"

namespace spoofkit {

struct FitConfig {
  double effective_prior = 0.5;
  double ridge = 1e-6;  // L2 on weights, bias excluded
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
};

// DCF operating prior folded with the costs:
// pi_eff = c_miss*prior / (c_miss*prior + c_fa*(1 - prior)).
double EffectivePrior(const DcfParams& params);

// Per-system scale weights plus bias from prior-weighted logistic
// regression. Calibrated output is w . s + b (the prior offset logit(pi)
// lives in the training objective only, never in the output LLRs).
struct FusionModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double effective_prior = 0.5;
  double fit_objective = 0.0;  // bits
  std::vector<std::string> system_names;

  std::string Serialize() const;
  static FusionModel Parse(std::istream& in);
};

/*
  The training objective, with pi = effective_prior and llr_i = w.s_i + b:

    C(w, b) =   pi/N_bon   * sum_bon  log(1 + exp(-(llr_i + logit(pi))))
            + (1-pi)/N_spf * sum_spf  log(1 + exp(  llr_i + logit(pi)))
            + ridge * ||w||^2

  reported in bits. Convex, so Newton with backtracking line search reaches
  the global optimum; non-convergence within max_iterations throws
  NumericalError carrying the final gradient norm.
*/

// Objective/gradient/Hessian in (w, b); exposed so the analytic derivatives
// can be checked against finite differences.
struct LogRegObjective {
  Eigen::MatrixXd scores;  // N x K
  std::vector<Label> labels;
  FitConfig config;

  double Value(const Eigen::VectorXd& theta) const;  // theta = [w; b], nats
  Eigen::VectorXd Gradient(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd Hessian(const Eigen::VectorXd& theta) const;
};

// systems[k][i] is system k's score for trial i; all systems share the same
// trial alignment. A warning (returned diagnostic string, empty if none)
// flags fitted weights <= 0.
FusionModel Fit(const std::vector<std::vector<double>>& systems,
                const std::vector<Label>& labels, const FitConfig& config,
                std::string* warning = nullptr);

std::vector<double> Apply(const FusionModel& model,
                          const std::vector<std::vector<double>>& systems);

struct NamedSystem {
  std::string name;
  std::vector<double> scores;
};

struct GreedySelection {
  std::vector<std::string> ranked_names;  // all candidates, minDCF ascending
  std::vector<double> ranked_min_dcf;
  std::vector<std::string> selected;  // top k
  FusionModel model;                  // joint fit over the top k
};

// Stage 1: calibrate every candidate individually and rank by minDCF on the
// dev alignment. Stage 2: jointly fuse the best k.
GreedySelection GreedySelect(const std::vector<NamedSystem>& candidates,
                             const std::vector<Label>& labels,
                             const DcfParams& params, int k,
                             const FitConfig& config);

}  // namespace spoofkit

#endif  // SPOOFKIT_CALIBRATION_HPP
