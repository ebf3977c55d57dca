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

#ifndef SPOOFKIT_SCORE_IO_HPP
#define SPOOFKIT_SCORE_IO_HPP

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spoofkit {

enum class Label { kBonafide, kSpoof };

const char* LabelName(Label label);

// One line of a score file: `trial_id score`. Scores follow the LLR
// convention used project-wide: higher score means more bonafide-like.
struct ScoreRecord {
  std::string trial;
  double score = 0.0;
};

// One line of a key file: `trial_id label attack codec`. Bonafide trials
// carry attack token "-"; uncompressed trials carry codec token "-".
struct TrialKey {
  std::string trial;
  Label label = Label::kBonafide;
  std::string attack;
  std::string codec;
};

struct Trial {
  std::string id;
  double score = 0.0;
  Label label = Label::kBonafide;
  std::string attack;
  std::string codec;

  bool operator==(const Trial&) const = default;
};

// Scored, labeled, condition-annotated trials. The substrate of every
// metric computation downstream.
struct LabeledScoreSet {
  std::vector<Trial> records;

  std::size_t n_bonafide() const;
  std::size_t n_spoof() const;

  bool operator==(const LabeledScoreSet&) const = default;
};

// Parses `trial_id score` lines. Lines starting with '#' are skipped.
// Throws DataError on malformed lines (with line number), non-finite
// scores, or duplicate trial ids.
std::vector<ScoreRecord> ParseScores(std::istream& in);
std::vector<ScoreRecord> ParseScoresFile(const std::string& path);

// Parses `trial_id label attack codec` lines. Labels must be exactly
// "bonafide" or "spoof".
std::vector<TrialKey> ParseKeys(std::istream& in);
std::vector<TrialKey> ParseKeysFile(const std::string& path);

struct JoinResult {
  LabeledScoreSet set;
  // Keyed trials that had no score. Reported, not fatal.
  std::vector<std::string> unscored_trials;
};

// Joins scores with keys. A scored trial without a key is an error.
JoinResult Join(const std::vector<ScoreRecord>& scores,
                const std::vector<TrialKey>& keys);

enum class PartitionAxis { kAttack, kCodec, kAttackCodec };

// Splits a set by condition. The returned map always contains a synthetic
// "pooled" cell equal to the input. Spoof trials land in exactly one cell
// per axis; on the attack (and attack x codec) axis the bonafide pool is
// replicated into every attack cell so per-attack metrics stay computable.
// Attack x codec cells are keyed "<attack>:<codec>"; bonafide trials join
// the cells whose codec matches theirs.
std::map<std::string, LabeledScoreSet> Partition(const LabeledScoreSet& set,
                                                 PartitionAxis axis);

// Combined `id score label attack codec` text form; round-trips exactly.
std::string Serialize(const LabeledScoreSet& set);
LabeledScoreSet ParseLabeledScoreSet(std::istream& in);

}  // namespace spoofkit

#endif  // SPOOFKIT_SCORE_IO_HPP
