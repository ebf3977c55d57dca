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

#include "spoofkit/score_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

// Splits on blanks/tabs; strips a trailing CR so CRLF files parse.
std::vector<std::string> Tokenize(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> tokens;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

double ParseFiniteScore(const std::string& tok, int line_no) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": bad score '" +
                    tok + "'");
  }
  if (pos != tok.size())
    throw DataError("line " + std::to_string(line_no) + ": bad score '" +
                    tok + "'");
  if (!std::isfinite(value))
    throw DataError("line " + std::to_string(line_no) +
                    ": non-finite score '" + tok + "'");
  return value;
}

std::string FormatScore(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", score);
  return buf;
}

std::ifstream OpenOrThrow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

}  // namespace

const char* LabelName(Label label) {
  return label == Label::kBonafide ? "bonafide" : "spoof";
}

std::size_t LabeledScoreSet::n_bonafide() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(),
                    [](const Trial& t) { return t.label == Label::kBonafide; }));
}

std::size_t LabeledScoreSet::n_spoof() const {
  return records.size() - n_bonafide();
}

std::vector<ScoreRecord> ParseScores(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    std::vector<std::string> tokens = Tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 'trial_id score', got " +
                      std::to_string(tokens.size()) + " fields");
    if (!seen.insert(tokens[0]).second)
      throw DataError("line " + std::to_string(line_no) +
                      ": duplicate trial id '" + tokens[0] + "'");
    out.push_back({tokens[0], ParseFiniteScore(tokens[1], line_no)});
  }
  return out;
}

std::vector<ScoreRecord> ParseScoresFile(const std::string& path) {
  std::ifstream in = OpenOrThrow(path);
  return ParseScores(in);
}

std::vector<TrialKey> ParseKeys(std::istream& in) {
  std::vector<TrialKey> out;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    std::vector<std::string> tokens = Tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 4)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 'trial_id label attack codec', got " +
                      std::to_string(tokens.size()) + " fields");
    Label label;
    if (tokens[1] == "bonafide") {
      label = Label::kBonafide;
    } else if (tokens[1] == "spoof") {
      label = Label::kSpoof;
    } else {
      throw DataError("line " + std::to_string(line_no) +
                      ": unknown label '" + tokens[1] + "'");
    }
    if (!seen.insert(tokens[0]).second)
      throw DataError("line " + std::to_string(line_no) +
                      ": duplicate trial id '" + tokens[0] + "'");
    out.push_back({tokens[0], label, tokens[2], tokens[3]});
  }
  return out;
}

std::vector<TrialKey> ParseKeysFile(const std::string& path) {
  std::ifstream in = OpenOrThrow(path);
  return ParseKeys(in);
}

JoinResult Join(const std::vector<ScoreRecord>& scores,
                const std::vector<TrialKey>& keys) {
  std::unordered_map<std::string, const TrialKey*> by_id;
  by_id.reserve(keys.size());
  for (const TrialKey& key : keys) {
    if (!by_id.emplace(key.trial, &key).second)
      throw DataError("duplicate key for trial '" + key.trial + "'");
  }
  JoinResult result;
  result.set.records.reserve(scores.size());
  std::unordered_set<std::string> scored;
  scored.reserve(scores.size());
  for (const ScoreRecord& rec : scores) {
    auto it = by_id.find(rec.trial);
    if (it == by_id.end())
      throw DataError("no key for scored trial '" + rec.trial + "'");
    const TrialKey& key = *it->second;
    result.set.records.push_back(
        {rec.trial, rec.score, key.label, key.attack, key.codec});
    scored.insert(rec.trial);
  }
  for (const TrialKey& key : keys)
    if (!scored.count(key.trial)) result.unscored_trials.push_back(key.trial);
  return result;
}

std::map<std::string, LabeledScoreSet> Partition(const LabeledScoreSet& set,
                                                 PartitionAxis axis) {
  if (set.records.empty()) throw DataError("cannot partition an empty set");
  std::map<std::string, LabeledScoreSet> cells;
  if (axis == PartitionAxis::kCodec) {
    for (const Trial& t : set.records) cells[t.codec].records.push_back(t);
  } else {
    // Attack cells come from spoof trials; bonafide (attack "-") is a shared
    // pool replicated into every cell, codec-matched on the combined axis.
    for (const Trial& t : set.records) {
      if (t.label != Label::kSpoof) continue;
      std::string key = axis == PartitionAxis::kAttack
                            ? t.attack
                            : t.attack + ":" + t.codec;
      cells[key].records.push_back(t);
    }
    if (cells.empty()) cells["-"];  // bonafide-only set
    for (const Trial& t : set.records) {
      if (t.label != Label::kBonafide) continue;
      for (auto& [key, cell] : cells) {
        if (axis == PartitionAxis::kAttackCodec) {
          std::string codec = key.substr(key.find(':') + 1);
          if (codec != t.codec) continue;
        }
        cell.records.push_back(t);
      }
    }
  }
  cells["pooled"] = set;
  return cells;
}

std::string Serialize(const LabeledScoreSet& set) {
  std::string out;
  for (const Trial& t : set.records) {
    out += t.id;
    out += '\t';
    out += FormatScore(t.score);
    out += '\t';
    out += LabelName(t.label);
    out += '\t';
    out += t.attack;
    out += '\t';
    out += t.codec;
    out += '\n';
  }
  return out;
}

LabeledScoreSet ParseLabeledScoreSet(std::istream& in) {
  LabeledScoreSet set;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    std::vector<std::string> tokens = Tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 5)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 'id score label attack codec'");
    Label label;
    if (tokens[2] == "bonafide") {
      label = Label::kBonafide;
    } else if (tokens[2] == "spoof") {
      label = Label::kSpoof;
    } else {
      throw DataError("line " + std::to_string(line_no) +
                      ": unknown label '" + tokens[2] + "'");
    }
    if (!seen.insert(tokens[0]).second)
      throw DataError("line " + std::to_string(line_no) +
                      ": duplicate trial id '" + tokens[0] + "'");
    set.records.push_back({tokens[0], ParseFiniteScore(tokens[1], line_no),
                           label, tokens[3], tokens[4]});
  }
  return set;
}

}  // namespace spoofkit
