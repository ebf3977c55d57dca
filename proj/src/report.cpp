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

#include "spoofkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

double EvalMetric(const LabeledScoreSet& set, TableMetric metric,
                  const DcfParams& params) {
  switch (metric) {
    case TableMetric::kMinDcf:
      return MinDcf(set, params).first;
    case TableMetric::kEer:
      return Eer(set).first;
    case TableMetric::kActDcf:
      return ActDcf(set, params);
    case TableMetric::kCllr:
      return Cllr(set);
  }
  throw DataError("unknown table metric");
}

std::string FormatCell(double value, TableMetric metric) {
  char buf[32];
  if (metric == TableMetric::kEer)
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * value);
  else
    std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

const char* TableMetricName(TableMetric metric) {
  switch (metric) {
    case TableMetric::kMinDcf:
      return "minDCF";
    case TableMetric::kEer:
      return "EER";
    case TableMetric::kActDcf:
      return "actDCF";
    case TableMetric::kCllr:
      return "Cllr";
  }
  return "?";
}

TableMetric ParseTableMetric(const std::string& name) {
  if (name == "minDCF") return TableMetric::kMinDcf;
  if (name == "EER") return TableMetric::kEer;
  if (name == "actDCF") return TableMetric::kActDcf;
  if (name == "Cllr") return TableMetric::kCllr;
  throw DataError("unknown metric '" + name +
                  "' (expected minDCF, EER, actDCF or Cllr)");
}

ConditionTable BuildTable(const LabeledScoreSet& set, TableMetric metric,
                          const DcfParams& params,
                          bool codec_matched_bonafide) {
  if (set.n_bonafide() == 0 || set.n_spoof() == 0)
    throw DataError("condition table needs both classes in the pooled set");

  std::set<std::string> attacks, codecs;
  for (const Trial& t : set.records) {
    if (t.label == Label::kSpoof) attacks.insert(t.attack);
    codecs.insert(t.codec);
  }

  ConditionTable table;
  table.metric = metric;
  table.params = params;
  table.codec_matched_bonafide = codec_matched_bonafide;
  table.rows.push_back("pooled");
  table.rows.insert(table.rows.end(), attacks.begin(), attacks.end());
  table.cols.push_back("pooled");
  if (codecs.count("-")) table.cols.push_back("-");
  for (const std::string& c : codecs)
    if (c != "-") table.cols.push_back(c);

  auto subset = [&](const std::string& attack, const std::string& codec) {
    LabeledScoreSet cell;
    for (const Trial& t : set.records) {
      if (t.label == Label::kSpoof) {
        if (attack != "pooled" && t.attack != attack) continue;
        if (codec != "pooled" && t.codec != codec) continue;
        cell.records.push_back(t);
      } else {
        if (codec != "pooled" && codec_matched_bonafide && t.codec != codec)
          continue;
        cell.records.push_back(t);
      }
    }
    return cell;
  };

  table.cells.assign(table.rows.size(),
                     std::vector<std::optional<double>>(table.cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      LabeledScoreSet cell = subset(table.rows[r], table.cols[c]);
      if (cell.n_spoof() == 0 || cell.n_bonafide() == 0) continue;
      table.cells[r][c] = EvalMetric(cell, metric, params);
    }
  }
  return table;
}

std::string Render(const ConditionTable& table, TableFormat format) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "# metric=%s c_miss=%g c_fa=%g prior_bonafide=%g "
                "bonafide_pool=%s\n",
                TableMetricName(table.metric), table.params.c_miss,
                table.params.c_fa, table.params.prior_bonafide,
                table.codec_matched_bonafide ? "codec-matched" : "all");
  os << buf;

  const bool md = format == TableFormat::kMarkdown;
  const char* sep = md ? " | " : "\t";
  if (md) os << "| ";
  os << "";
  for (std::size_t c = 0; c < table.cols.size(); ++c)
    os << sep << table.cols[c];
  if (md) os << " |";
  os << '\n';
  if (md) {
    os << "| ---";
    for (std::size_t c = 0; c < table.cols.size(); ++c) os << " | ---";
    os << " |\n";
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (md) os << "| ";
    os << table.rows[r];
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      os << sep;
      if (table.cells[r][c])
        os << FormatCell(*table.cells[r][c], table.metric);
      else
        os << "—";
    }
    if (md) os << " |";
    os << '\n';
  }
  return os.str();
}

}  // namespace spoofkit
