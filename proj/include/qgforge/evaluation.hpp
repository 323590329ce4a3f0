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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qgforge/corpus.hpp"
#include "qgforge/endpoint.hpp"
#include "qgforge/genclient.hpp"
#include "qgforge/textmetrics.hpp"

namespace qgforge {

enum class PairPart { kQuestion, kAnswer };
std::string_view to_string(PairPart part);

/// An aggregate and the number of observations behind it.
struct Cell {
  double value = 0.0;
  std::size_t count = 0;
};

struct SimilarityCell {
  double mean = 0.0;
  std::size_t count = 0;
  /// Pairs whose section has no ground-truth question of the narrative.
  std::size_t excluded = 0;
};

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// One panel respondent's answer to one generated question.
struct Judgment {
  std::string pair_key;
  std::string respondent;
  std::string answer_text;
  int correct = 0;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

using SetupScheme = std::pair<DataSetup, DifficultyScheme>;

struct EvaluationReport {
  std::map<std::pair<DataSetup, NarrativeLabel>, SimilarityCell> narrative_similarity;
  /// Percent correct per (setup, respondent, difficulty) over questions.
  std::map<std::tuple<DataSetup, std::string, DifficultyRequest>, Cell> difficulty_accuracy;
  /// Same, averaged over per-narrative percentages.
  std::map<std::tuple<DataSetup, std::string, DifficultyRequest>, Cell> difficulty_accuracy_macro;
  /// Percent correct per (setup, narrative, difficulty) over all respondents.
  std::map<std::tuple<DataSetup, NarrativeLabel, DifficultyRequest>, Cell> per_narrative_accuracy;
  std::map<SetupScheme, TrendFit> trend_fits;
  std::map<std::tuple<DataSetup, PairPart, DifficultyRequest>, Cell> pinc_by_difficulty;
  std::map<std::tuple<DataSetup, PairPart, DifficultyRequest>, Cell> length_stats;
  /// Proportion of questions per opener; count is the questions in the class.
  std::map<std::tuple<DataSetup, DifficultyRequest, Interrogative>, Cell> interrogative_dist;

  bool empty() const;
};

/// Max ROUGE-L F1 of each generated question against the same section's
/// ground-truth questions of the requested narrative, averaged per (setup,
/// narrative). Pairs without a requested narrative count towards every
/// narrative their section has. Throws Error when no pair matches a test
/// section.
std::map<std::pair<DataSetup, NarrativeLabel>, SimilarityCell> narrative_similarity(
    std::span<const GeneratedPair> pairs, const Corpus& corpus);

struct JudgeOptions {
  int jobs = 4;
  int attempts = 3;
  int retry_delay_ms = 200;
};

/// Every respondent answers every generated question given its section
/// text; correctness is score_answer against the generated answer. Output
/// order is (pair order, panel order).
std::vector<Judgment> judge_pairs(std::span<const GeneratedPair> pairs, const Corpus& corpus,
                                  AnsweringEndpoint& endpoint, std::span<const std::string> panel,
                                  const JudgeOptions& options = {});

struct DifficultyAccuracy {
  std::map<std::tuple<DataSetup, std::string, DifficultyRequest>, Cell> micro;
  std::map<std::tuple<DataSetup, std::string, DifficultyRequest>, Cell> macro;
  std::map<std::tuple<DataSetup, NarrativeLabel, DifficultyRequest>, Cell> per_narrative;
};

/// Aggregates judgments. Throws Error when a judged pair has no difficulty.
DifficultyAccuracy difficulty_accuracy(std::span<const GeneratedPair> pairs, std::span<const Judgment> judgments);

DifficultyAccuracy difficulty_accuracy(std::span<const GeneratedPair> pairs, const Corpus& corpus,
                                       AnsweringEndpoint& endpoint, std::span<const std::string> panel,
                                       const JudgeOptions& options = {});

/// Ordinary least squares y = slope * x + intercept. Throws Error unless at
/// least two distinct x values are present.
TrendFit fit_linear_trend(std::span<const std::pair<double, double>> points);

/// One fit per (setup, scheme) over every respondent's (position, percent)
/// point, with position = ordinal / (levels - 1).
std::map<SetupScheme, TrendFit> trend_fits(
    const std::map<std::tuple<DataSetup, std::string, DifficultyRequest>, Cell>& accuracy);

/// Percent PINC of questions and answers against their section text.
std::map<std::tuple<DataSetup, PairPart, DifficultyRequest>, Cell> pinc_by_difficulty(
    std::span<const GeneratedPair> pairs, const Corpus& corpus, int max_n = 3, PincMode mode = PincMode::kAverage);

struct LengthAndInterrogatives {
  std::map<std::tuple<DataSetup, PairPart, DifficultyRequest>, Cell> lengths;
  std::map<std::tuple<DataSetup, DifficultyRequest, Interrogative>, Cell> interrogatives;
};

LengthAndInterrogatives length_and_interrogative_stats(std::span<const GeneratedPair> pairs);

/// All tables from generated pairs, the corpus and panel judgments.
EvaluationReport build_report(std::span<const GeneratedPair> pairs, const Corpus& corpus,
                              std::span<const Judgment> judgments, PincMode pinc_mode = PincMode::kAverage);

/// Writes the seven tables plus plots/*.series; returns the written paths
/// relative to `dir`. Throws Error for an empty report.
std::vector<std::filesystem::path> emit_report(const EvaluationReport& report, const std::filesystem::path& dir);

std::vector<Judgment> load_judgments(const std::filesystem::path& path);
void save_judgments(std::span<const Judgment> judgments, const std::filesystem::path& path);

}  // namespace qgforge
