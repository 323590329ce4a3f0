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

#include "qgforge/labels.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "qgforge/errors.hpp"

namespace qgforge {
namespace {

std::string squash(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isspace(c) || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::string_view to_string(NarrativeLabel label) {
  switch (label) {
    case NarrativeLabel::kCharacter: return "character";
    case NarrativeLabel::kSetting: return "setting";
    case NarrativeLabel::kAction: return "action";
    case NarrativeLabel::kFeeling: return "feeling";
    case NarrativeLabel::kCausal: return "causal";
    case NarrativeLabel::kOutcome: return "outcome";
    case NarrativeLabel::kPrediction: return "prediction";
  }
  return "?";
}

std::optional<NarrativeLabel> try_parse_narrative(std::string_view text) {
  const std::string key = squash(text);
  if (key == "causalrelationship") return NarrativeLabel::kCausal;
  if (key == "outcomeresolution") return NarrativeLabel::kOutcome;
  for (NarrativeLabel label : kNarrativeLabels) {
    if (key == to_string(label)) return label;
  }
  return std::nullopt;
}

NarrativeLabel parse_narrative(std::string_view text) {
  if (auto label = try_parse_narrative(text)) return *label;
  throw Error(fmt::format("unknown narrative label '{}'", text));
}

DifficultyLevel3 regroup(DifficultyLabel label) {
  switch (label) {
    case DifficultyLabel::kEasy: return DifficultyLevel3::kEasy;
    case DifficultyLabel::kExtreme: return DifficultyLevel3::kExtreme;
    default: return DifficultyLevel3::kMedium;
  }
}

std::string_view to_string(DifficultyLabel label) {
  switch (label) {
    case DifficultyLabel::kEasy: return "easy";
    case DifficultyLabel::kMedium: return "medium";
    case DifficultyLabel::kModerate: return "moderate";
    case DifficultyLabel::kHard: return "hard";
    case DifficultyLabel::kExtreme: return "extreme";
  }
  return "?";
}

std::string_view to_string(DifficultyLevel3 label) {
  switch (label) {
    case DifficultyLevel3::kEasy: return "easy";
    case DifficultyLevel3::kMedium: return "medium";
    case DifficultyLevel3::kExtreme: return "extreme";
  }
  return "?";
}

std::optional<DifficultyLabel> try_parse_difficulty(std::string_view text) {
  const std::string key = squash(text);
  for (DifficultyLabel label : kDifficultyLabels) {
    if (key == to_string(label)) return label;
  }
  return std::nullopt;
}

DifficultyLabel parse_difficulty(std::string_view text) {
  if (auto label = try_parse_difficulty(text)) return *label;
  throw Error(fmt::format("unknown difficulty label '{}'", text));
}

std::optional<DifficultyLevel3> try_parse_difficulty3(std::string_view text) {
  const std::string key = squash(text);
  for (DifficultyLevel3 label : kDifficultyLevels3) {
    if (key == to_string(label)) return label;
  }
  return std::nullopt;
}

int level_count(DifficultyScheme scheme) { return static_cast<int>(scheme); }

DifficultyScheme parse_scheme(int levels) {
  if (levels == 5) return DifficultyScheme::kFiveLevel;
  if (levels == 3) return DifficultyScheme::kThreeLevel;
  throw Error(fmt::format("difficulty scheme must have 5 or 3 levels, got {}", levels));
}

std::vector<DifficultyRequest> difficulty_levels(DifficultyScheme scheme) {
  std::vector<DifficultyRequest> out;
  if (scheme == DifficultyScheme::kFiveLevel) {
    for (auto l : kDifficultyLabels) out.emplace_back(l);
  } else {
    for (auto l : kDifficultyLevels3) out.emplace_back(l);
  }
  return out;
}

DifficultyScheme scheme_of(const DifficultyRequest& request) {
  return std::holds_alternative<DifficultyLabel>(request) ? DifficultyScheme::kFiveLevel
                                                         : DifficultyScheme::kThreeLevel;
}

int ordinal(const DifficultyRequest& request) {
  return std::visit([](auto l) { return static_cast<int>(l); }, request);
}

std::string_view to_string(const DifficultyRequest& request) {
  return std::visit([](auto l) { return to_string(l); }, request);
}

DifficultyRequest parse_difficulty_request(std::string_view text, DifficultyScheme scheme) {
  if (scheme == DifficultyScheme::kFiveLevel) return parse_difficulty(text);
  if (auto l = try_parse_difficulty3(text)) return *l;
  throw Error(fmt::format("unknown 3-level difficulty label '{}'", text));
}

double nominal_position(const DifficultyRequest& request) {
  return static_cast<double>(ordinal(request)) / (level_count(scheme_of(request)) - 1);
}

std::string_view to_string(DataSetup setup) {
  switch (setup) {
    case DataSetup::kTextQA: return "TEXT_QA";
    case DataSetup::kNarTextQA: return "NAR_TEXT_QA";
    case DataSetup::kDifTextQA: return "DIF_TEXT_QA";
    case DataSetup::kNarDifTextQA: return "NAR_DIF_TEXT_QA";
  }
  return "?";
}

std::string_view short_name(DataSetup setup) {
  switch (setup) {
    case DataSetup::kTextQA: return "text";
    case DataSetup::kNarTextQA: return "nar";
    case DataSetup::kDifTextQA: return "dif";
    case DataSetup::kNarDifTextQA: return "nardif";
  }
  return "?";
}

DataSetup parse_setup(std::string_view text) {
  for (DataSetup s : kDataSetups) {
    if (text == to_string(s) || text == short_name(s)) return s;
  }
  throw Error(fmt::format("unknown data setup '{}' (expected text, nar, dif or nardif)", text));
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::optional<Split> try_parse_split(std::string_view text) {
  const std::string key = squash(text);
  if (key == "train") return Split::kTrain;
  if (key == "val" || key == "validation" || key == "valid" || key == "dev") return Split::kVal;
  if (key == "test") return Split::kTest;
  return std::nullopt;
}

}  // namespace qgforge
