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

#include <doctest.h>

#include <random>
#include <sstream>

#include "spoofkit/errors.hpp"
#include "spoofkit/score_io.hpp"
#include "test_util.hpp"

using namespace spoofkit;

TEST_CASE("score parsing: valid lines, comments, blanks, CRLF") {
  std::istringstream in(
      "# header comment\n"
      "t1 0.5\n"
      "\n"
      "t2\t-1.25e3\r\n"
      "t3 7\n");
  auto records = ParseScores(in);
  REQUIRE(records.size() == 3);
  CHECK(records[0].trial == "t1");
  CHECK(records[0].score == 0.5);
  CHECK(records[1].score == -1250.0);
  CHECK(records[2].score == 7.0);
}

TEST_CASE("score parsing errors carry line numbers") {
  SUBCASE("wrong field count") {
    std::istringstream in("t1 0.5\nt2 0.5 extra\n");
    CHECK_THROWS_WITH_AS(ParseScores(in), doctest::Contains("line 2"),
                         DataError);
  }
  SUBCASE("bad score token") {
    std::istringstream in("t1 abc\n");
    CHECK_THROWS_WITH_AS(ParseScores(in), doctest::Contains("bad score"),
                         DataError);
  }
  SUBCASE("non-finite score") {
    std::istringstream in("t1 nan\n");
    CHECK_THROWS_AS(ParseScores(in), DataError);
  }
  SUBCASE("duplicate trial id") {
    std::istringstream in("t1 0.5\nt1 0.6\n");
    CHECK_THROWS_WITH_AS(ParseScores(in), doctest::Contains("duplicate"),
                         DataError);
  }
}

TEST_CASE("key parsing and label validation") {
  std::istringstream in(
      "t1 bonafide - -\n"
      "t2 spoof A01 codec-3\n");
  auto keys = ParseKeys(in);
  REQUIRE(keys.size() == 2);
  CHECK(keys[0].label == Label::kBonafide);
  CHECK(keys[1].attack == "A01");
  CHECK(keys[1].codec == "codec-3");

  std::istringstream bad("t1 genuine - -\n");
  CHECK_THROWS_WITH_AS(ParseKeys(bad), doctest::Contains("unknown label"),
                       DataError);
}

TEST_CASE("join: missing key is fatal, unscored key is a warning") {
  std::vector<ScoreRecord> scores = {{"t1", 0.1}, {"t2", -0.2}};
  std::vector<TrialKey> keys = {{"t1", Label::kBonafide, "-", "-"},
                                {"t2", Label::kSpoof, "A01", "-"},
                                {"t3", Label::kSpoof, "A02", "-"}};
  JoinResult joined = Join(scores, keys);
  CHECK(joined.set.records.size() == 2);
  CHECK(joined.set.records[1].attack == "A01");
  REQUIRE(joined.unscored_trials.size() == 1);
  CHECK(joined.unscored_trials[0] == "t3");

  std::vector<ScoreRecord> orphan = {{"t9", 1.0}};
  CHECK_THROWS_WITH_AS(Join(orphan, keys), doctest::Contains("no key"),
                       DataError);
}

TEST_CASE("partition by attack replicates the bonafide pool") {
  LabeledScoreSet set;
  set.records = {{"b1", 1.0, Label::kBonafide, "-", "-"},
                 {"b2", 2.0, Label::kBonafide, "-", "codec-1"},
                 {"s1", -1.0, Label::kSpoof, "A01", "-"},
                 {"s2", -2.0, Label::kSpoof, "A02", "codec-1"}};
  auto cells = Partition(set, PartitionAxis::kAttack);
  REQUIRE(cells.count("pooled") == 1);
  CHECK(cells["pooled"] == set);
  REQUIRE(cells.count("A01") == 1);
  REQUIRE(cells.count("A02") == 1);
  CHECK(cells["A01"].n_bonafide() == 2);  // full pool in every attack cell
  CHECK(cells["A02"].n_bonafide() == 2);
  CHECK(cells["A01"].n_spoof() == 1);
}

TEST_CASE("partition by attack x codec matches bonafide codecs") {
  LabeledScoreSet set;
  set.records = {{"b1", 1.0, Label::kBonafide, "-", "-"},
                 {"b2", 2.0, Label::kBonafide, "-", "codec-1"},
                 {"s1", -1.0, Label::kSpoof, "A01", "-"},
                 {"s2", -2.0, Label::kSpoof, "A01", "codec-1"}};
  auto cells = Partition(set, PartitionAxis::kAttackCodec);
  REQUIRE(cells.count("A01:-") == 1);
  REQUIRE(cells.count("A01:codec-1") == 1);
  CHECK(cells["A01:-"].n_bonafide() == 1);
  CHECK(cells["A01:-"].records[1].id == "b1");
  CHECK(cells["A01:codec-1"].n_bonafide() == 1);
  CHECK(cells["A01:codec-1"].records[1].id == "b2");
}

TEST_CASE("partition by codec splits both classes") {
  LabeledScoreSet set;
  set.records = {{"b1", 1.0, Label::kBonafide, "-", "-"},
                 {"s1", -1.0, Label::kSpoof, "A01", "codec-2"}};
  auto cells = Partition(set, PartitionAxis::kCodec);
  CHECK(cells["-"].records.size() == 1);
  CHECK(cells["codec-2"].records.size() == 1);
  CHECK(cells["pooled"].records.size() == 2);
}

TEST_CASE("serialize round-trips byte-for-byte") {
  std::mt19937_64 rng(11);
  LabeledScoreSet set = testutil::RandomSet(rng, 64);
  set.records[3].score = 1.0 / 3.0;  // not representable in short decimal
  std::string text = Serialize(set);
  std::istringstream in(text);
  LabeledScoreSet back = ParseLabeledScoreSet(in);
  CHECK(back == set);
  CHECK(Serialize(back) == text);
}
