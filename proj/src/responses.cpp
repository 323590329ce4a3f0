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

#include "qgforge/responses.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "qgforge/detail/parallel.hpp"
#include "qgforge/endpoint.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/io.hpp"
#include "qgforge/textmetrics.hpp"

namespace qgforge {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int score_answer(std::string_view ground_truth, std::string_view candidate) {
  const TokenSeq ref = tokenize(ground_truth);
  const TokenSeq cand = tokenize(candidate);
  if (ref == cand) return 1;
  return rouge_l_f1(ref, cand) >= kRougeCorrectThreshold ? 1 : 0;
}

ResponseMatrix::ResponseMatrix(std::vector<std::string> respondents, std::vector<std::string> question_ids,
                               Cells cells)
    : respondents_(std::move(respondents)), question_ids_(std::move(question_ids)), cells_(std::move(cells)) {
  if (cells_.rows() != static_cast<Eigen::Index>(respondents_.size()) ||
      cells_.cols() != static_cast<Eigen::Index>(question_ids_.size())) {
    throw Error(fmt::format("response matrix is {}x{} but has {} respondents and {} questions", cells_.rows(),
                            cells_.cols(), respondents_.size(), question_ids_.size()));
  }
  if ((cells_.array() > 1).any()) throw Error("response matrix cells must be 0 or 1");
  if (std::set(respondents_.begin(), respondents_.end()).size() != respondents_.size()) {
    throw Error("duplicate respondent in response matrix");
  }
  if (std::set(question_ids_.begin(), question_ids_.end()).size() != question_ids_.size()) {
    throw Error("duplicate question id in response matrix");
  }
}

double ResponseMatrix::row_accuracy(Eigen::Index row) const {
  if (cells_.cols() == 0) return 0.0;
  return cells_.row(row).cast<double>().sum() / static_cast<double>(cells_.cols());
}

namespace {

std::vector<const QARecord*> calibration_items(const Corpus& corpus) {
  std::vector<const QARecord*> items;
  for (const auto& r : corpus.records()) {
    if (r.split != Split::kTest) items.push_back(&r);
  }
  std::sort(items.begin(), items.end(),
            [](const QARecord* a, const QARecord* b) { return a->question_id < b->question_id; });
  return items;
}

void check_panel(std::span<const std::string> panel) {
  if (panel.empty()) throw Error("respondent panel is empty");
  std::set<std::string> seen;
  for (const auto& name : panel) {
    if (name.empty()) throw Error("respondent names must be non-empty");
    if (!seen.insert(name).second) throw Error(fmt::format("duplicate respondent '{}' in panel", name));
  }
}

ordered_json answer_json(const AnswerRecord& a) {
  ordered_json j;
  j["respondent"] = a.respondent;
  j["question_id"] = a.question_id;
  j["answer_text"] = a.answer_text;
  return j;
}

}  // namespace

ResponseMatrix build_matrix(const Corpus& corpus, std::span<const AnswerRecord> answers,
                            std::span<const std::string> panel) {
  check_panel(panel);
  const auto items = calibration_items(corpus);
  std::map<std::string, std::size_t, std::less<>> row_of, col_of;
  for (std::size_t i = 0; i < panel.size(); ++i) row_of.emplace(panel[i], i);
  for (std::size_t j = 0; j < items.size(); ++j) col_of.emplace(items[j]->question_id, j);

  ResponseMatrix::Cells cells(static_cast<Eigen::Index>(panel.size()), static_cast<Eigen::Index>(items.size()));
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(cells.rows(), cells.cols(), false);
  for (const auto& a : answers) {
    auto r = row_of.find(a.respondent);
    if (r == row_of.end()) continue;
    auto c = col_of.find(a.question_id);
    if (c == col_of.end()) {
      throw Error(fmt::format("answer from '{}' refers to unknown question_id '{}'", a.respondent, a.question_id));
    }
    const auto i = static_cast<Eigen::Index>(r->second);
    const auto j = static_cast<Eigen::Index>(c->second);
    if (seen(i, j)) {
      throw Error(fmt::format("duplicate answer for ({}, {})", a.respondent, a.question_id));
    }
    seen(i, j) = true;
    cells(i, j) = static_cast<std::uint8_t>(score_answer(items[c->second]->answer, a.answer_text));
  }
  for (Eigen::Index i = 0; i < seen.rows(); ++i) {
    for (Eigen::Index j = 0; j < seen.cols(); ++j) {
      if (!seen(i, j)) {
        throw Error(fmt::format("missing answer for ({}, {})", panel[static_cast<std::size_t>(i)],
                                items[static_cast<std::size_t>(j)]->question_id));
      }
    }
  }
  std::vector<std::string> qids;
  qids.reserve(items.size());
  for (const auto* r : items) qids.push_back(r->question_id);
  return ResponseMatrix(std::vector<std::string>(panel.begin(), panel.end()), std::move(qids), std::move(cells));
}

std::vector<AnswerRecord> collect_answers(const Corpus& corpus, AnsweringEndpoint& endpoint,
                                          std::span<const std::string> panel, const CollectOptions& options) {
  check_panel(panel);
  const auto items = calibration_items(corpus);

  std::map<std::pair<std::string, std::string>, std::string> done;
  if (options.log_path && fs::exists(*options.log_path)) {
    for (auto& a : load_answer_log(*options.log_path)) {
      done.emplace(std::make_pair(a.respondent, a.question_id), std::move(a.answer_text));
    }
  }

  struct Task {
    std::size_t respondent;
    const QARecord* item;
  };
  std::vector<Task> pending;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    for (const auto* item : items) {
      if (!done.contains({panel[i], item->question_id})) pending.push_back({i, item});
    }
  }

  std::mutex mutex;
  const int attempts = std::max(options.attempts, 1);
  detail::parallel_for(pending.size(), options.jobs, [&](std::size_t t) {
    const Task& task = pending[t];
    const std::string& who = panel[task.respondent];
    std::string reply;
    for (int attempt = 1;; ++attempt) {
      try {
        reply = endpoint.answer(who, task.item->text, task.item->question);
        break;
      } catch (const EndpointError& e) {
        if (!e.transient() || attempt >= attempts) {
          throw EndpointError(fmt::format("answering endpoint failed for ({}, {}) after {} attempt(s): {}", who,
                                          task.item->question_id, attempt, e.what()),
                              false);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(options.retry_delay_ms * attempt));
      }
    }
    AnswerRecord record{who, task.item->question_id, std::move(reply)};
    std::lock_guard lock(mutex);
    if (options.log_path) io::append_line(*options.log_path, answer_json(record).dump());
    done.emplace(std::make_pair(record.respondent, record.question_id), std::move(record.answer_text));
  });

  std::vector<AnswerRecord> out;
  out.reserve(panel.size() * items.size());
  for (const auto& who : panel) {
    for (const auto* item : items) {
      out.push_back({who, item->question_id, done.at({who, item->question_id})});
    }
  }
  if (options.log_path) save_answer_log(out, *options.log_path);
  return out;
}

std::vector<AnswerRecord> load_answer_log(const fs::path& path) {
  std::vector<AnswerRecord> out;
  for (const auto& j : io::read_jsonl(path)) {
    try {
      out.push_back({j.at("respondent").get<std::string>(), j.at("question_id").get<std::string>(),
                     j.at("answer_text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}: malformed answer record: {}", path.string(), e.what()));
    }
  }
  return out;
}

void save_answer_log(std::span<const AnswerRecord> answers, const fs::path& path) {
  std::string out;
  for (const auto& a : answers) out += answer_json(a).dump() + "\n";
  io::write_file_atomic(path, out);
}

void save_matrix_csv(const ResponseMatrix& matrix, const fs::path& path) {
  std::string out = "respondent";
  for (const auto& q : matrix.question_ids()) out += "," + io::escape_delimited(q);
  out += "\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out += io::escape_delimited(matrix.respondents()[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out += matrix.cells()(i, j) ? ",1" : ",0";
    out += "\n";
  }
  io::write_file_atomic(path, out);
}

ResponseMatrix load_matrix_csv(const fs::path& path) {
  const auto table = io::parse_delimited(io::read_file(path), ',');
  if (table.empty() || table.front().empty()) throw Error(fmt::format("{}: empty response matrix", path.string()));
  std::vector<std::string> qids(table.front().begin() + 1, table.front().end());
  std::vector<std::string> names;
  ResponseMatrix::Cells cells(static_cast<Eigen::Index>(table.size() - 1), static_cast<Eigen::Index>(qids.size()));
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() != qids.size() + 1) {
      throw Error(fmt::format("{}: row {} has {} cells, expected {}", path.string(), r, row.size(), qids.size() + 1));
    }
    names.push_back(row.front());
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] != "0" && row[c] != "1") {
        throw Error(fmt::format("{}: row {} column {} is '{}', expected 0 or 1", path.string(), r, c, row[c]));
      }
      cells(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = row[c] == "1" ? 1 : 0;
    }
  }
  return ResponseMatrix(std::move(names), std::move(qids), std::move(cells));
}

}  // namespace qgforge
