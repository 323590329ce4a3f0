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

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qgforge {

/// Reading-comprehension category attached to every corpus question.
enum class NarrativeLabel { kCharacter, kSetting, kAction, kFeeling, kCausal, kOutcome, kPrediction };

inline constexpr std::array<NarrativeLabel, 7> kNarrativeLabels = {
    NarrativeLabel::kCharacter, NarrativeLabel::kSetting, NarrativeLabel::kAction,
    NarrativeLabel::kFeeling,   NarrativeLabel::kCausal,  NarrativeLabel::kOutcome,
    NarrativeLabel::kPrediction};

std::string_view to_string(NarrativeLabel label);

/// Accepts the canonical words plus the long forms "causal relationship" and
/// "outcome resolution". Case, spaces, underscores and hyphens are ignored.
std::optional<NarrativeLabel> try_parse_narrative(std::string_view text);
NarrativeLabel parse_narrative(std::string_view text);

/// Five ordered difficulty classes, easiest first.
enum class DifficultyLabel { kEasy, kMedium, kModerate, kHard, kExtreme };

inline constexpr std::array<DifficultyLabel, 5> kDifficultyLabels = {
    DifficultyLabel::kEasy, DifficultyLabel::kMedium, DifficultyLabel::kModerate,
    DifficultyLabel::kHard, DifficultyLabel::kExtreme};

/// Coarse scheme: medium, moderate and hard collapse into medium.
enum class DifficultyLevel3 { kEasy, kMedium, kExtreme };

inline constexpr std::array<DifficultyLevel3, 3> kDifficultyLevels3 = {
    DifficultyLevel3::kEasy, DifficultyLevel3::kMedium, DifficultyLevel3::kExtreme};

DifficultyLevel3 regroup(DifficultyLabel label);

std::string_view to_string(DifficultyLabel label);
std::string_view to_string(DifficultyLevel3 label);
std::optional<DifficultyLabel> try_parse_difficulty(std::string_view text);
DifficultyLabel parse_difficulty(std::string_view text);
std::optional<DifficultyLevel3> try_parse_difficulty3(std::string_view text);

enum class DifficultyScheme { kFiveLevel = 5, kThreeLevel = 3 };

int level_count(DifficultyScheme scheme);
DifficultyScheme parse_scheme(int levels);

/// A requested difficulty in either scheme. Ordering is (scheme, ordinal).
using DifficultyRequest = std::variant<DifficultyLabel, DifficultyLevel3>;

std::vector<DifficultyRequest> difficulty_levels(DifficultyScheme scheme);
DifficultyScheme scheme_of(const DifficultyRequest& request);
int ordinal(const DifficultyRequest& request);
std::string_view to_string(const DifficultyRequest& request);
DifficultyRequest parse_difficulty_request(std::string_view text, DifficultyScheme scheme);
/// Position on [0, 1]: ordinal / (levels - 1).
double nominal_position(const DifficultyRequest& request);

/// Which control attributes appear in the generation input.
enum class DataSetup { kTextQA, kNarTextQA, kDifTextQA, kNarDifTextQA };

inline constexpr std::array<DataSetup, 4> kDataSetups = {
    DataSetup::kTextQA, DataSetup::kNarTextQA, DataSetup::kDifTextQA, DataSetup::kNarDifTextQA};

constexpr bool uses_narrative(DataSetup s) {
  return s == DataSetup::kNarTextQA || s == DataSetup::kNarDifTextQA;
}
constexpr bool uses_difficulty(DataSetup s) {
  return s == DataSetup::kDifTextQA || s == DataSetup::kNarDifTextQA;
}

/// Enumerator-style name, e.g. "NAR_DIF_TEXT_QA".
std::string_view to_string(DataSetup setup);
/// Short CLI name: text, nar, dif, nardif.
std::string_view short_name(DataSetup setup);
/// Accepts either the enumerator-style or the short name.
DataSetup parse_setup(std::string_view text);

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
/// Accepts train, val, validation, valid, dev, test.
std::optional<Split> try_parse_split(std::string_view text);

}  // namespace qgforge
