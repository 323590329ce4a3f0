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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgforge/labels.hpp"

namespace qgforge {

struct RaschCalibration;

/// Separators between question and answer in generation targets.
inline constexpr std::string_view kQuestionToken = "⟨QU⟩";
inline constexpr std::string_view kAnswerToken = "⟨AN⟩";

struct QARecord {
  std::string story_id;
  std::string section_id;
  std::string text;
  std::string question;
  std::string answer;
  NarrativeLabel narrative = NarrativeLabel::kCharacter;
  std::optional<DifficultyLabel> difficulty;
  std::optional<double> difficulty_value;
  Split split = Split::kTrain;
  std::string question_id;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

/// One story section: the unit a generation request is made for.
struct Section {
  std::string story_id;
  std::string section_id;
  std::string text;
  /// Distinct narratives of the section's questions, in label order.
  std::vector<NarrativeLabel> narratives;

  std::string key() const { return story_id + "/" + section_id; }
};

/// Validated, immutable collection of QA records.
class Corpus {
 public:
  Corpus() = default;
  /// Throws CorpusError listing every violated record invariant.
  explicit Corpus(std::vector<QARecord> records);

  const std::vector<QARecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::vector<const QARecord*> split(Split split) const;
  const QARecord* find(std::string_view question_id) const;

  /// Sections of a split in order of first appearance.
  std::vector<Section> sections(Split split) const;
  const Section* find_section(std::string_view story_id, std::string_view section_id) const;

  /// True when every train and val record carries a difficulty.
  bool augmented() const;

 private:
  std::vector<QARecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<Section> all_sections_;
  std::vector<Split> section_splits_;
};

enum class CorpusFormat { kAuto, kDelimited, kRecordPerLine };

/// Delimited tables use ',' unless the extension is .tsv. Record-per-line
/// files hold one JSON object per line. Column names: story_id, section_id,
/// text, question, answer, narrative, split, and optionally question_id,
/// difficulty_value, difficulty. Missing question ids are derived as
/// "<story>-<section>-<n>".
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format = CorpusFormat::kAuto);

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);
void save_corpus_csv(const Corpus& corpus, const std::filesystem::path& path);

/// Attaches normalized difficulty and label to every train/val record.
Corpus augment_corpus(const Corpus& corpus, const RaschCalibration& calibration);

/// Counts of (narrative, difficulty) over augmented train/val records.
std::map<std::pair<NarrativeLabel, DifficultyLabel>, std::size_t> difficulty_distribution(
    const Corpus& corpus);

struct PromptControls {
  std::optional<NarrativeLabel> narrative;
  std::optional<DifficultyRequest> difficulty;

  friend bool operator==(const PromptControls&, const PromptControls&) = default;
};

/// Renders the generation prompt. Throws Error when the setup needs a control
/// that is absent.
std::string render_prompt(DataSetup setup, const PromptControls& controls, std::string_view text);

std::string render_input(const QARecord& record, DataSetup setup,
                         DifficultyScheme scheme = DifficultyScheme::kFiveLevel);

struct ParsedPrompt {
  DataSetup setup;
  PromptControls controls;
  std::string text;
};

/// Inverse of render_prompt. Difficulty words are read in `scheme`.
/// Throws ParseError when the prompt matches none of the setups.
ParsedPrompt parse_prompt(std::string_view prompt,
                          DifficultyScheme scheme = DifficultyScheme::kFiveLevel);

std::string render_target(std::string_view question, std::string_view answer);
std::string render_target(const QARecord& record);

/// Writes one {"input", "target"} object per line for records of `split`.
/// Returns the number of lines written.
std::size_t export_training_file(const Corpus& corpus, DataSetup setup,
                                 const std::filesystem::path& path,
                                 Split split = Split::kTrain,
                                 DifficultyScheme scheme = DifficultyScheme::kFiveLevel);

}  // namespace qgforge
