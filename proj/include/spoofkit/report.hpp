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

#ifndef SPOOFKIT_REPORT_HPP
#define SPOOFKIT_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "spoofkit/metrics.hpp"
#include "spoofkit/score_io.hpp"

namespace spoofkit {

enum class TableMetric { kMinDcf, kEer, kActDcf, kCllr };

const char* TableMetricName(TableMetric metric);
TableMetric ParseTableMetric(const std::string& name);

// Attack x codec breakdown with pooled margins. Pooled cells are always
// recomputed from the pooled trial subsets, never averaged from cells; a
// cell is absent when its condition has no spoof trials.
struct ConditionTable {
  std::vector<std::string> rows;  // "pooled", then attacks
  std::vector<std::string> cols;  // "pooled", then codecs ("-" first)
  std::vector<std::vector<std::optional<double>>> cells;
  TableMetric metric = TableMetric::kMinDcf;
  DcfParams params;
  bool codec_matched_bonafide = true;
};

// Cell (attack a, codec c) scores the spoof trials keyed (a, c) against the
// bonafide trials of codec c; with codec_matched_bonafide = false every cell
// reuses the full bonafide pool instead.
ConditionTable BuildTable(const LabeledScoreSet& set, TableMetric metric,
                          const DcfParams& params,
                          bool codec_matched_bonafide = true);

enum class TableFormat { kTsv, kMarkdown };

// minDCF/actDCF/Cllr cells print with 4 decimals, EER cells as percent with
// 2 decimals; absent cells render as an em dash. Byte-deterministic and
// locale-independent.
std::string Render(const ConditionTable& table, TableFormat format);

}  // namespace spoofkit

#endif  // SPOOFKIT_REPORT_HPP
