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

#include "spoofkit/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <sstream>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

double Softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double Logit(double p) { return std::log(p) - std::log1p(-p); }

// Per-trial weight and sign: bonafide trials push the LLR up.
struct TrialTerm {
  double alpha;  // pi/N_bon or (1-pi)/N_spf
  double y;      // +1 bonafide, -1 spoof
};

std::vector<TrialTerm> Terms(const std::vector<Label>& labels, double prior) {
  double nb = 0, ns = 0;
  for (Label l : labels) (l == Label::kBonafide ? nb : ns) += 1;
  if (nb == 0 || ns == 0)
    throw DataError("calibration requires both classes");
  std::vector<TrialTerm> terms(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::kBonafide)
      terms[i] = {prior / nb, 1.0};
    else
      terms[i] = {(1.0 - prior) / ns, -1.0};
  }
  return terms;
}

Eigen::MatrixXd ToMatrix(const std::vector<std::vector<double>>& systems) {
  if (systems.empty()) throw DataError("no input systems");
  const std::size_t n = systems[0].size();
  for (const auto& s : systems)
    if (s.size() != n)
      throw DataError("input systems are not aligned on the same trials");
  if (n == 0) throw DataError("empty score vectors");
  Eigen::MatrixXd m(n, systems.size());
  for (std::size_t k = 0; k < systems.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) m(i, k) = systems[k][i];
  return m;
}

}  // namespace

double EffectivePrior(const DcfParams& params) {
  double target = params.c_miss * params.prior_bonafide;
  double non = params.c_fa * (1.0 - params.prior_bonafide);
  return target / (target + non);
}

double LogRegObjective::Value(const Eigen::VectorXd& theta) const {
  const long k = scores.cols();
  const Eigen::VectorXd w = theta.head(k);
  const double b = theta[k];
  const double offset = Logit(config.effective_prior);
  std::vector<TrialTerm> terms = Terms(labels, config.effective_prior);
  double value = 0.0;
  for (long i = 0; i < scores.rows(); ++i) {
    double a = scores.row(i).dot(w) + b + offset;
    value += terms[i].alpha * Softplus(-terms[i].y * a);
  }
  return value + config.ridge * w.squaredNorm();
}

Eigen::VectorXd LogRegObjective::Gradient(const Eigen::VectorXd& theta) const {
  const long k = scores.cols();
  const Eigen::VectorXd w = theta.head(k);
  const double b = theta[k];
  const double offset = Logit(config.effective_prior);
  std::vector<TrialTerm> terms = Terms(labels, config.effective_prior);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(k + 1);
  for (long i = 0; i < scores.rows(); ++i) {
    double a = scores.row(i).dot(w) + b + offset;
    double coeff = -terms[i].y * terms[i].alpha * Sigmoid(-terms[i].y * a);
    grad.head(k) += coeff * scores.row(i).transpose();
    grad[k] += coeff;
  }
  grad.head(k) += 2.0 * config.ridge * w;
  return grad;
}

Eigen::MatrixXd LogRegObjective::Hessian(const Eigen::VectorXd& theta) const {
  const long k = scores.cols();
  const Eigen::VectorXd w = theta.head(k);
  const double b = theta[k];
  const double offset = Logit(config.effective_prior);
  std::vector<TrialTerm> terms = Terms(labels, config.effective_prior);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd x(k + 1);
  for (long i = 0; i < scores.rows(); ++i) {
    double a = scores.row(i).dot(w) + b + offset;
    double s = Sigmoid(a);
    double coeff = terms[i].alpha * s * (1.0 - s);
    x.head(k) = scores.row(i).transpose();
    x[k] = 1.0;
    hess.noalias() += coeff * x * x.transpose();
  }
  for (long j = 0; j < k; ++j) hess(j, j) += 2.0 * config.ridge;
  return hess;
}

FusionModel Fit(const std::vector<std::vector<double>>& systems,
                const std::vector<Label>& labels, const FitConfig& config,
                std::string* warning) {
  LogRegObjective problem{ToMatrix(systems), labels, config};
  if (static_cast<std::size_t>(problem.scores.rows()) != labels.size())
    throw DataError("label count does not match score count");

  bool any_varying = false;
  for (long k = 0; k < problem.scores.cols(); ++k)
    if (problem.scores.col(k).maxCoeff() != problem.scores.col(k).minCoeff())
      any_varying = true;
  if (!any_varying)
    throw DataError("degenerate input: all scores identical in every system");

  const long dim = problem.scores.cols() + 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  double value = problem.Value(theta);
  double grad_norm = 0.0;
  bool converged = false;
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    Eigen::VectorXd grad = problem.Gradient(theta);
    grad_norm = grad.norm();
    if (grad_norm <= config.gradient_tolerance) {
      converged = true;
      break;
    }
    Eigen::MatrixXd hess = problem.Hessian(theta);
    Eigen::VectorXd step = hess.ldlt().solve(-grad);
    if (!step.allFinite() || grad.dot(step) >= 0)
      step = -grad;  // fall back to steepest descent
    // Backtracking line search (Armijo) keeps the objective monotone.
    double t = 1.0;
    double slope = grad.dot(step);
    while (t > 1e-12) {
      double trial = problem.Value(theta + t * step);
      if (trial <= value + 1e-4 * t * slope) {
        theta += t * step;
        value = trial;
        break;
      }
      t *= 0.5;
    }
    if (t <= 1e-12) break;  // no progress possible
  }
  if (!converged) {
    grad_norm = problem.Gradient(theta).norm();
    if (grad_norm > config.gradient_tolerance) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "logistic fit did not converge in %d iterations "
                    "(gradient norm %.3e)",
                    config.max_iterations, grad_norm);
      throw NumericalError(msg);
    }
  }

  FusionModel model;
  model.weights = theta.head(dim - 1);
  model.bias = theta[dim - 1];
  model.effective_prior = config.effective_prior;
  model.fit_objective = value / std::log(2.0);
  if (warning) {
    warning->clear();
    for (long k = 0; k < model.weights.size(); ++k)
      if (model.weights[k] <= 0)
        *warning += "warning: non-positive weight for system " +
                    std::to_string(k) + "\n";
  }
  return model;
}

std::vector<double> Apply(const FusionModel& model,
                          const std::vector<std::vector<double>>& systems) {
  if (static_cast<long>(systems.size()) != model.weights.size())
    throw DataError("system count does not match fusion model dimension");
  Eigen::MatrixXd scores = ToMatrix(systems);
  Eigen::VectorXd fused = scores * model.weights;
  std::vector<double> out(fused.size());
  for (long i = 0; i < fused.size(); ++i) out[i] = fused[i] + model.bias;
  return out;
}

GreedySelection GreedySelect(const std::vector<NamedSystem>& candidates,
                             const std::vector<Label>& labels,
                             const DcfParams& params, int k,
                             const FitConfig& config) {
  if (k < 1 || static_cast<std::size_t>(k) > candidates.size())
    throw DataError("greedy selection needs 1 <= k <= number of candidates");

  struct Ranked {
    std::size_t index;
    double min_dcf;
  };
  std::vector<Ranked> ranking;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    FusionModel single = Fit({candidates[c].scores}, labels, config);
    std::vector<double> calibrated = Apply(single, {candidates[c].scores});
    LabeledScoreSet set;
    set.records.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      set.records.push_back(
          {"t" + std::to_string(i), calibrated[i], labels[i], "-", "-"});
    ranking.push_back({c, MinDcf(set, params).first});
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const Ranked& a, const Ranked& b) {
                     return a.min_dcf < b.min_dcf;
                   });

  GreedySelection out;
  std::vector<std::vector<double>> top;
  for (const Ranked& r : ranking) {
    out.ranked_names.push_back(candidates[r.index].name);
    out.ranked_min_dcf.push_back(r.min_dcf);
  }
  for (int i = 0; i < k; ++i) {
    out.selected.push_back(candidates[ranking[i].index].name);
    top.push_back(candidates[ranking[i].index].scores);
  }
  out.model = Fit(top, labels, config);
  out.model.system_names = out.selected;
  return out;
}

std::string FusionModel::Serialize() const {
  std::ostringstream os;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "prior\t%.17g\nbias\t%.17g\n",
                effective_prior, bias);
  os << buf;
  for (long k = 0; k < weights.size(); ++k) {
    std::string name = static_cast<std::size_t>(k) < system_names.size()
                           ? system_names[k]
                           : "system" + std::to_string(k);
    std::snprintf(buf, sizeof(buf), "%.17g", weights[k]);
    os << name << '\t' << buf << '\n';
  }
  return os.str();
}

FusionModel FusionModel::Parse(std::istream& in) {
  FusionModel model;
  std::string field;
  if (!(in >> field) || field != "prior" || !(in >> model.effective_prior))
    throw DataError("fusion model: expected 'prior <value>'");
  if (!(in >> field) || field != "bias" || !(in >> model.bias))
    throw DataError("fusion model: expected 'bias <value>'");
  std::vector<double> weights;
  std::string name;
  double w;
  while (in >> name >> w) {
    model.system_names.push_back(name);
    weights.push_back(w);
  }
  if (weights.empty()) throw DataError("fusion model: no system weights");
  model.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), weights.size());
  return model;
}

}  // namespace spoofkit
