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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qgforge/corpus.hpp"

namespace qgforge {

class AnsweringEndpoint;

struct AnswerRecord {
  std::string respondent;
  std::string question_id;
  std::string answer_text;

  friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

/// Correct when the candidate is an exact match or reaches ROUGE-L F1 0.5.
int score_answer(std::string_view ground_truth, std::string_view candidate);

inline constexpr double kRougeCorrectThreshold = 0.5;

/// Complete respondents x questions table of 0/1 outcomes.
class ResponseMatrix {
 public:
  using Cells = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  ResponseMatrix() = default;
  /// Throws Error on duplicate ids, dimension mismatch, or a cell outside {0, 1}.
  ResponseMatrix(std::vector<std::string> respondents, std::vector<std::string> question_ids,
                 Cells cells);

  const std::vector<std::string>& respondents() const { return respondents_; }
  const std::vector<std::string>& question_ids() const { return question_ids_; }
  const Cells& cells() const { return cells_; }
  Eigen::Index rows() const { return cells_.rows(); }
  Eigen::Index cols() const { return cells_.cols(); }
  bool empty() const { return cells_.size() == 0; }

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> as() const {
    return cells_.cast<Scalar>();
  }

  /// Fraction of items respondent `row` answered correctly.
  double row_accuracy(Eigen::Index row) const;

 private:
  std::vector<std::string> respondents_;
  std::vector<std::string> question_ids_;
  Cells cells_;
};

/// Rows follow `panel`; columns are the train/val question ids in
/// lexicographic order. Every (respondent, question) pair must be answered.
ResponseMatrix build_matrix(const Corpus& corpus, std::span<const AnswerRecord> answers,
                            std::span<const std::string> panel);

struct CollectOptions {
  int jobs = 4;
  /// Attempts per call, including the first.
  int attempts = 3;
  int retry_delay_ms = 200;
  /// Append-only answer log; existing entries are reused, not re-requested.
  std::optional<std::filesystem::path> log_path;
};

/// Asks every respondent every train/val question. Output order is
/// (panel order, question id).
std::vector<AnswerRecord> collect_answers(const Corpus& corpus, AnsweringEndpoint& endpoint,
                                          std::span<const std::string> panel,
                                          const CollectOptions& options = {});

std::vector<AnswerRecord> load_answer_log(const std::filesystem::path& path);
void save_answer_log(std::span<const AnswerRecord> answers, const std::filesystem::path& path);

/// Header "respondent,<qid>,...", one row per respondent.
void save_matrix_csv(const ResponseMatrix& matrix, const std::filesystem::path& path);
ResponseMatrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace qgforge
