// Copyright 2026 The qgforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "qgforge/errors.hpp"
#include "qgforge/labels.hpp"

using namespace qgforge;

TEST_CASE("narrative labels round-trip and accept long forms") {
  for (auto n : kNarrativeLabels) CHECK(parse_narrative(to_string(n)) == n);
  CHECK(parse_narrative("Causal Relationship") == NarrativeLabel::kCausal);
  CHECK(parse_narrative("outcome_resolution") == NarrativeLabel::kOutcome);
  CHECK(parse_narrative("CHARACTER") == NarrativeLabel::kCharacter);
  CHECK_FALSE(try_parse_narrative("humor"));
  CHECK_THROWS_AS(parse_narrative("humor"), Error);
}

TEST_CASE("difficulty labels are ordered and regroup into three levels") {
  for (auto d : kDifficultyLabels) CHECK(parse_difficulty(to_string(d)) == d);
  CHECK(regroup(DifficultyLabel::kEasy) == DifficultyLevel3::kEasy);
  CHECK(regroup(DifficultyLabel::kMedium) == DifficultyLevel3::kMedium);
  CHECK(regroup(DifficultyLabel::kModerate) == DifficultyLevel3::kMedium);
  CHECK(regroup(DifficultyLabel::kHard) == DifficultyLevel3::kMedium);
  CHECK(regroup(DifficultyLabel::kExtreme) == DifficultyLevel3::kExtreme);
  CHECK(parse_scheme(5) == DifficultyScheme::kFiveLevel);
  CHECK(parse_scheme(3) == DifficultyScheme::kThreeLevel);
  CHECK_THROWS_AS(parse_scheme(4), Error);
}

TEST_CASE("difficulty requests carry scheme, ordinal and position") {
  const auto five = difficulty_levels(DifficultyScheme::kFiveLevel);
  const auto three = difficulty_levels(DifficultyScheme::kThreeLevel);
  REQUIRE(five.size() == 5);
  REQUIRE(three.size() == 3);
  for (std::size_t i = 0; i < five.size(); ++i) {
    CHECK(ordinal(five[i]) == static_cast<int>(i));
    CHECK(nominal_position(five[i]) == doctest::Approx(static_cast<double>(i) / 4.0));
    CHECK(parse_difficulty_request(to_string(five[i]), DifficultyScheme::kFiveLevel) == five[i]);
  }
  CHECK(nominal_position(three[1]) == 0.5);
  CHECK(to_string(three[2]) == "extreme");
  CHECK_THROWS_AS(parse_difficulty_request("hard", DifficultyScheme::kThreeLevel), Error);
}

TEST_CASE("setups and splits parse from their short and long names") {
  for (auto s : kDataSetups) {
    CHECK(parse_setup(to_string(s)) == s);
    CHECK(parse_setup(short_name(s)) == s);
  }
  CHECK(uses_narrative(DataSetup::kNarDifTextQA));
  CHECK(uses_difficulty(DataSetup::kNarDifTextQA));
  CHECK_FALSE(uses_difficulty(DataSetup::kNarTextQA));
  CHECK_THROWS_AS(parse_setup("joint"), Error);
  CHECK(try_parse_split("validation") == Split::kVal);
  CHECK(try_parse_split("dev") == Split::kVal);
  CHECK_FALSE(try_parse_split("holdout"));
}
