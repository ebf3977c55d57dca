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

#include "spoofkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void RequireBothClasses(const LabeledScoreSet& set) {
  std::size_t nb = set.n_bonafide();
  if (nb == 0 || nb == set.records.size())
    throw DataError("metric requires at least one bonafide and one spoof trial");
}

// log(1 + e^x) without overflow.
double Softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double Logit(double p) { return std::log(p) - std::log1p(-p); }

struct PavBlock {
  double n_bon = 0;
  double n = 0;
  double score_lo = 0;
  double score_hi = 0;
  double Posterior() const { return n_bon / n; }
};

// PAV over score-sorted labels: tied scores form one block, then adjacent
// blocks whose bonafide rate does not increase are pooled until the block
// posteriors are strictly increasing.
std::vector<PavBlock> PavBlocks(const LabeledScoreSet& set,
                                std::vector<std::size_t>* order) {
  const std::size_t n = set.records.size();
  order->resize(n);
  std::iota(order->begin(), order->end(), std::size_t{0});
  std::stable_sort(order->begin(), order->end(),
                   [&](std::size_t a, std::size_t b) {
                     return set.records[a].score < set.records[b].score;
                   });
  // Tie blocks must be complete before any pooling: interleaving the two
  // steps can pool the first record of a tie group into earlier blocks
  // before its partners arrive, which over-merges and leaves a fit that is
  // monotone but not the least-squares one.
  std::vector<PavBlock> atoms;
  for (std::size_t i = 0; i < n; ++i) {
    const Trial& t = set.records[(*order)[i]];
    double bon = t.label == Label::kBonafide ? 1.0 : 0.0;
    if (!atoms.empty() && atoms.back().score_hi == t.score) {
      atoms.back().n_bon += bon;
      atoms.back().n += 1;
    } else {
      atoms.push_back({bon, 1.0, t.score, t.score});
    }
  }
  std::vector<PavBlock> blocks;
  for (const PavBlock& atom : atoms) {
    blocks.push_back(atom);
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].Posterior() >=
               blocks.back().Posterior()) {
      PavBlock top = blocks.back();
      blocks.pop_back();
      blocks.back().n_bon += top.n_bon;
      blocks.back().n += top.n;
      blocks.back().score_hi = top.score_hi;
    }
  }
  return blocks;
}

// Candidate thresholds: -inf, midpoints between adjacent distinct scores,
// +inf. Returns, per threshold, (p_miss, p_fa, threshold) for the rule
// "bonafide iff score > threshold".
struct OperatingPoint {
  double p_miss, p_fa, threshold;
};

std::vector<OperatingPoint> SweepPoints(const LabeledScoreSet& set) {
  std::vector<std::pair<double, Label>> sorted;
  sorted.reserve(set.records.size());
  for (const Trial& t : set.records) sorted.emplace_back(t.score, t.label);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const double nb = static_cast<double>(set.n_bonafide());
  const double ns = static_cast<double>(set.n_spoof());
  std::vector<OperatingPoint> points;
  points.push_back({0.0, 1.0, -kInf});
  double bon_below = 0, spf_below = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    double score = sorted[i].first;
    while (i < sorted.size() && sorted[i].first == score) {
      if (sorted[i].second == Label::kBonafide)
        bon_below += 1;
      else
        spf_below += 1;
      ++i;
    }
    double threshold =
        i < sorted.size() ? 0.5 * (score + sorted[i].first) : kInf;
    points.push_back({bon_below / nb, (ns - spf_below) / ns, threshold});
  }
  return points;
}

double NormalizedCost(double p_miss, double p_fa, const DcfParams& p) {
  return (p.c_miss * p.prior_bonafide * p_miss +
          p.c_fa * (1.0 - p.prior_bonafide) * p_fa) /
         p.Normalizer();
}

// Crossing of p_miss = p_fa on the segment (m1,f1) -> (m2,f2); assumes
// m1 - f1 <= 0 <= m2 - f2.
double SegmentEer(double m1, double f1, double m2, double f2) {
  double g1 = m1 - f1, g2 = m2 - f2;
  if (g2 == g1) return 0.5 * (m1 + f1);
  double t = -g1 / (g2 - g1);
  return m1 + t * (m2 - m1);
}

}  // namespace

double DcfParams::Normalizer() const {
  double norm = std::min(c_miss * prior_bonafide, c_fa * (1.0 - prior_bonafide));
  if (!(norm > 0))
    throw DataError("invalid DCF parameters: normalizer must be positive");
  return norm;
}

double DcfParams::BayesThreshold() const {
  return std::log(c_fa * (1.0 - prior_bonafide)) -
         std::log(c_miss * prior_bonafide);
}

RocchCurve PavFit(const LabeledScoreSet& set) {
  RequireBothClasses(set);
  std::vector<std::size_t> order;
  std::vector<PavBlock> blocks = PavBlocks(set, &order);

  const double nb = static_cast<double>(set.n_bonafide());
  const double ns = static_cast<double>(set.n_spoof());
  const double prior_logit = Logit(nb / (nb + ns));

  // Block posterior -> LLR at the empirical prior. Degenerate 0/1 blocks
  // (only the extremes can be degenerate after PAV) get a half pseudo-count
  // so the LLRs stay finite, then a clamp keeps the sequence monotone.
  std::vector<double> block_llr(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    double p = blocks[i].Posterior();
    if (p == 0.0 || p == 1.0)
      p = (blocks[i].n_bon + 0.5) / (blocks[i].n + 1.0);
    block_llr[i] = Logit(p) - prior_logit;
  }
  if (blocks.size() >= 2) {
    block_llr.front() = std::min(block_llr.front(), block_llr[1]);
    block_llr.back() =
        std::max(block_llr.back(), block_llr[blocks.size() - 2]);
  }

  RocchCurve curve;
  curve.pav_llrs.resize(set.records.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(blocks[i].n); ++j)
      curve.pav_llrs[order[pos++]] = block_llr[i];

  // Hull vertices: after classifying the k lowest-scoring blocks as spoof,
  // (p_miss, p_fa) = (cum_bon / nb, remaining_spoof / ns).
  curve.vertices.reserve(blocks.size() + 1);
  double cum_bon = 0, cum_spf = 0;
  curve.vertices.emplace_back(0.0, 1.0);
  for (const PavBlock& b : blocks) {
    cum_bon += b.n_bon;
    cum_spf += b.n - b.n_bon;
    curve.vertices.emplace_back(cum_bon / nb, (ns - cum_spf) / ns);
  }
  return curve;
}

std::pair<double, double> Eer(const LabeledScoreSet& set, bool rocch) {
  RequireBothClasses(set);
  if (rocch) {
    RocchCurve curve = PavFit(set);
    const auto& v = curve.vertices;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i].first - v[i].second >= 0.0) {
        double eer = SegmentEer(v[i - 1].first, v[i - 1].second, v[i].first,
                                v[i].second);
        // Threshold: midpoint of the raw-score gap at the upper vertex.
        std::vector<OperatingPoint> points = SweepPoints(set);
        double threshold = 0.0;
        double best = kInf;
        for (const OperatingPoint& p : points) {
          double d = std::abs(p.p_miss - p.p_fa);
          if (d < best) {
            best = d;
            threshold = p.threshold;
          }
        }
        return {eer, threshold};
      }
    }
    return {0.5, 0.0};  // unreachable: last vertex is (1, 0)
  }
  std::vector<OperatingPoint> points = SweepPoints(set);
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].p_miss - points[i].p_fa >= 0.0) {
      double eer = SegmentEer(points[i - 1].p_miss, points[i - 1].p_fa,
                              points[i].p_miss, points[i].p_fa);
      return {eer, points[i].threshold};
    }
  }
  return {0.5, 0.0};
}

std::pair<double, double> MinDcf(const LabeledScoreSet& set,
                                 const DcfParams& params) {
  RequireBothClasses(set);
  std::vector<OperatingPoint> points = SweepPoints(set);
  double best = kInf, best_threshold = -kInf;
  for (const OperatingPoint& p : points) {
    double cost = NormalizedCost(p.p_miss, p.p_fa, params);
    if (cost < best) {
      best = cost;
      best_threshold = p.threshold;
    }
  }
  return {best, best_threshold};
}

double ActDcf(const LabeledScoreSet& set, const DcfParams& params) {
  RequireBothClasses(set);
  const double tau = params.BayesThreshold();
  double miss = 0, fa = 0;
  for (const Trial& t : set.records) {
    if (t.label == Label::kBonafide) {
      if (!(t.score > tau)) miss += 1;
    } else {
      if (t.score > tau) fa += 1;
    }
  }
  return NormalizedCost(miss / static_cast<double>(set.n_bonafide()),
                        fa / static_cast<double>(set.n_spoof()), params);
}

double Cllr(const LabeledScoreSet& set) {
  RequireBothClasses(set);
  double bon = 0, spf = 0;
  for (const Trial& t : set.records) {
    if (t.label == Label::kBonafide)
      bon += Softplus(-t.score);
    else
      spf += Softplus(t.score);
  }
  bon /= static_cast<double>(set.n_bonafide());
  spf /= static_cast<double>(set.n_spoof());
  return 0.5 * (bon + spf) / std::log(2.0);
}

double MinCllr(const LabeledScoreSet& set) {
  RocchCurve curve = PavFit(set);
  LabeledScoreSet calibrated = set;
  for (std::size_t i = 0; i < calibrated.records.size(); ++i)
    calibrated.records[i].score = curve.pav_llrs[i];
  return Cllr(calibrated);
}

MetricReport ComputeMetrics(const LabeledScoreSet& set,
                            const DcfParams& params, bool rocch_eer) {
  MetricReport report;
  auto [eer, eer_thr] = Eer(set, rocch_eer);
  auto [dcf, dcf_thr] = MinDcf(set, params);
  report.eer = eer;
  report.eer_threshold = eer_thr;
  report.min_dcf = dcf;
  report.min_dcf_threshold = dcf_thr;
  report.act_dcf = ActDcf(set, params);
  report.cllr = Cllr(set);
  report.min_cllr = MinCllr(set);
  report.bayes_threshold = params.BayesThreshold();
  return report;
}

std::string MetricReport::ToText() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "eer\t%.6g\nmin_dcf\t%.6g\nact_dcf\t%.6g\ncllr\t%.6g\n"
                "min_cllr\t%.6g\neer_threshold\t%.6g\nmin_dcf_threshold\t%.6g\n"
                "bayes_threshold\t%.6g\n",
                eer, min_dcf, act_dcf, cllr, min_cllr, eer_threshold,
                min_dcf_threshold, bayes_threshold);
  return buf;
}

}  // namespace spoofkit
