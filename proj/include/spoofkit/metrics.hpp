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

#ifndef SPOOFKIT_METRICS_HPP
#define SPOOFKIT_METRICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "spoofkit/score_io.hpp"

namespace spoofkit {

// Detection cost parameters. Defaults: c_miss = 1, c_fa = 10 and a spoof
// prior of 0.05 (prior_bonafide = 0.95). Every report echoes the values
// actually used.
struct DcfParams {
  double c_miss = 1.0;
  double c_fa = 10.0;
  double prior_bonafide = 0.95;

  // min(c_miss * prior, c_fa * (1 - prior)); cost of the better of the two
  // trivial systems, used to normalize DCF values.
  double Normalizer() const;
  // Fixed Bayes decision threshold in LLR space.
  double BayesThreshold() const;
};

// ROC convex hull, obtained from the pool-adjacent-violators solution over
// score-sorted labels. `vertices` runs from (p_miss=0, p_fa=1) to (1, 0).
// `pav_llrs` holds the optimal monotone score-to-LLR recalibration, aligned
// with the input set's record order (natural-log LLRs).
struct RocchCurve {
  std::vector<std::pair<double, double>> vertices;  // (p_miss, p_fa)
  std::vector<double> pav_llrs;
};

struct MetricReport {
  double eer = 0.0;
  double min_dcf = 0.0;
  double act_dcf = 0.0;
  double cllr = 0.0;      // bits
  double min_cllr = 0.0;  // bits
  double eer_threshold = 0.0;
  double min_dcf_threshold = 0.0;
  double bayes_threshold = 0.0;

  // Flat `metric<TAB>value` block.
  std::string ToText() const;
};

/*
  All metrics require at least one trial of each class and throw DataError
  otherwise. Scores follow the project-wide LLR convention (higher =>
  bonafide). Thresholded quantities decide bonafide iff score > threshold;
  candidate thresholds are midpoints between adjacent distinct scores plus
  -inf/+inf sentinels, so tied scores share one operating point.
*/

RocchCurve PavFit(const LabeledScoreSet& set);

// ROCCH-EER by default: the point where the convex hull crosses
// p_miss = p_fa, interpolating inside a hull segment. With rocch = false,
// linear interpolation of the raw ROC steps instead.
std::pair<double, double> Eer(const LabeledScoreSet& set, bool rocch = true);

std::pair<double, double> MinDcf(const LabeledScoreSet& set,
                                 const DcfParams& params);

// Normalized cost at the fixed Bayes threshold; meaningful when the scores
// are calibrated LLRs.
double ActDcf(const LabeledScoreSet& set, const DcfParams& params);

// 0.5 * [mean_bonafide log2(1 + e^-s) + mean_spoof log2(1 + e^s)], in bits.
double Cllr(const LabeledScoreSet& set);

// Cllr after optimal monotone recalibration (PAV).
double MinCllr(const LabeledScoreSet& set);

MetricReport ComputeMetrics(const LabeledScoreSet& set,
                            const DcfParams& params, bool rocch_eer = true);

}  // namespace spoofkit

#endif  // SPOOFKIT_METRICS_HPP
