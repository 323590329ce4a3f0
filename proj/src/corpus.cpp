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

#include "qgforge/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "qgforge/errors.hpp"
#include "qgforge/io.hpp"
#include "qgforge/irt/calibration.hpp"

namespace qgforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::size_t kMaxDiagnostics = 25;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void throw_diagnostics(const std::vector<std::string>& diagnostics) {
  std::string msg = fmt::format("corpus rejected ({} problem{}):", diagnostics.size(),
                                diagnostics.size() == 1 ? "" : "s");
  for (std::size_t i = 0; i < diagnostics.size() && i < kMaxDiagnostics; ++i) {
    msg += "\n  " + diagnostics[i];
  }
  if (diagnostics.size() > kMaxDiagnostics) {
    msg += fmt::format("\n  ... and {} more", diagnostics.size() - kMaxDiagnostics);
  }
  throw CorpusError(msg);
}

// Raw field values of one input row before conversion.
struct RawRow {
  std::map<std::string, std::string> fields;
  std::size_t row = 0;
};

constexpr std::array<std::string_view, 7> kRequiredColumns = {
    "story_id", "section_id", "text", "question", "answer", "narrative", "split"};

std::vector<QARecord> convert_rows(const std::vector<RawRow>& rows) {
  std::vector<std::string> diagnostics;
  std::vector<QARecord> records;
  records.reserve(rows.size());
  std::unordered_map<std::string, std::size_t> per_section;
  for (const auto& raw : rows) {
    auto get = [&](std::string_view key) -> std::string {
      auto it = raw.fields.find(std::string(key));
      return it == raw.fields.end() ? std::string{} : trim(it->second);
    };
    QARecord rec;
    rec.story_id = get("story_id");
    rec.section_id = get("section_id");
    rec.text = get("text");
    rec.question = get("question");
    rec.answer = get("answer");
    rec.question_id = get("question_id");
    if (rec.question_id.empty()) {
      const std::size_t n = ++per_section[rec.story_id + "\x1f" + rec.section_id];
      rec.question_id = fmt::format("{}-{}-{}", rec.story_id, rec.section_id, n);
    }
    const std::string narrative = get("narrative");
    if (auto label = try_parse_narrative(narrative)) {
      rec.narrative = *label;
    } else {
      diagnostics.push_back(fmt::format("row {}: unknown narrative label '{}'", raw.row, narrative));
    }
    const std::string split = get("split");
    if (auto s = try_parse_split(split)) {
      rec.split = *s;
    } else {
      diagnostics.push_back(fmt::format("row {}: unknown split '{}'", raw.row, split));
    }
    const std::string difficulty = get("difficulty");
    if (!difficulty.empty()) {
      if (auto d = try_parse_difficulty(difficulty)) {
        rec.difficulty = *d;
      } else {
        diagnostics.push_back(fmt::format("row {}: unknown difficulty label '{}'", raw.row, difficulty));
      }
    }
    const std::string value = get("difficulty_value");
    if (!value.empty()) {
      try {
        std::size_t used = 0;
        rec.difficulty_value = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        diagnostics.push_back(fmt::format("row {}: difficulty_value '{}' is not a number", raw.row, value));
      }
    }
    records.push_back(std::move(rec));
  }
  if (!diagnostics.empty()) throw_diagnostics(diagnostics);
  return records;
}

std::vector<RawRow> read_delimited(const fs::path& path, char delim) {
  const auto table = io::parse_delimited(io::read_file(path), delim);
  if (table.empty()) throw CorpusError(fmt::format("{}: empty corpus file", path.string()));
  std::vector<std::string> header;
  for (const auto& h : table.front()) header.push_back(lower(trim(h)));
  for (auto col : kRequiredColumns) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      throw CorpusError(fmt::format("{}: missing required column '{}'", path.string(), col));
    }
  }
  std::vector<RawRow> rows;
  std::vector<std::string> diagnostics;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    if (cells.size() != header.size()) {
      diagnostics.push_back(fmt::format("row {}: expected {} fields, found {}", r, header.size(), cells.size()));
      continue;
    }
    RawRow raw;
    raw.row = r;
    for (std::size_t c = 0; c < header.size(); ++c) raw.fields[header[c]] = cells[c];
    rows.push_back(std::move(raw));
  }
  if (!diagnostics.empty()) throw_diagnostics(diagnostics);
  return rows;
}

std::vector<RawRow> read_record_per_line(const fs::path& path) {
  const auto docs = io::read_jsonl(path);
  std::vector<RawRow> rows;
  std::vector<std::string> diagnostics;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    const auto& doc = docs[r];
    if (!doc.is_object()) {
      diagnostics.push_back(fmt::format("row {}: not an object", r + 1));
      continue;
    }
    RawRow raw;
    raw.row = r + 1;
    for (const auto& [key, value] : doc.items()) {
      if (value.is_string()) {
        raw.fields[lower(key)] = value.get<std::string>();
      } else if (value.is_number()) {
        raw.fields[lower(key)] = value.dump();
      } else if (!value.is_null()) {
        diagnostics.push_back(fmt::format("row {}: field '{}' must be a string or number", r + 1, key));
      }
    }
    for (auto col : kRequiredColumns) {
      if (!raw.fields.contains(std::string(col))) {
        diagnostics.push_back(fmt::format("row {}: missing required column '{}'", r + 1, col));
      }
    }
    rows.push_back(std::move(raw));
  }
  if (!diagnostics.empty()) throw_diagnostics(diagnostics);
  return rows;
}

std::string_view after(std::string_view s, std::string_view prefix, bool& ok) {
  if (!ok || !s.starts_with(prefix)) {
    ok = false;
    return s;
  }
  return s.substr(prefix.size());
}

constexpr std::string_view kPromptHead = "Generate a ";
constexpr std::string_view kPromptPair = "question-answer pair ";
constexpr std::string_view kPromptNarrative = "about narrative label ";
constexpr std::string_view kPromptText = "considering the following text: ";

}  // namespace

Corpus::Corpus(std::vector<QARecord> records) : records_(std::move(records)) {
  std::vector<std::string> diagnostics;
  std::vector<std::pair<double, DifficultyLabel>> valued;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const QARecord& r = records_[i];
    const std::size_t row = i + 1;
    auto require = [&](const std::string& v, std::string_view name) {
      if (trim(v).empty()) diagnostics.push_back(fmt::format("row {}: empty field '{}'", row, name));
    };
    require(r.story_id, "story_id");
    require(r.section_id, "section_id");
    require(r.text, "text");
    require(r.question, "question");
    require(r.answer, "answer");
    require(r.question_id, "question_id");
    if (!r.question_id.empty()) {
      auto [it, inserted] = by_id_.emplace(r.question_id, i);
      if (!inserted) {
        diagnostics.push_back(fmt::format("row {}: duplicate question_id '{}' (first seen at row {})", row,
                                          r.question_id, it->second + 1));
      }
    }
    if (r.difficulty.has_value() != r.difficulty_value.has_value()) {
      diagnostics.push_back(
          fmt::format("row {}: difficulty and difficulty_value must be both present or both absent", row));
    }
    if (r.difficulty_value) {
      if (!(*r.difficulty_value >= 0.0 && *r.difficulty_value <= 1.0)) {
        diagnostics.push_back(fmt::format("row {}: difficulty_value {} outside [0, 1]", row, *r.difficulty_value));
      } else if (r.difficulty) {
        valued.emplace_back(*r.difficulty_value, *r.difficulty);
      }
    }
  }
  // Higher normalized difficulty never carries an easier label.
  std::sort(valued.begin(), valued.end());
  for (std::size_t i = 1; i < valued.size(); ++i) {
    const auto& [v0, l0] = valued[i - 1];
    const auto& [v1, l1] = valued[i];
    if ((v0 == v1 && l0 != l1) || l1 < l0) {
      diagnostics.push_back(fmt::format("difficulty labels disagree with values: {} is '{}' but {} is '{}'", v0,
                                        to_string(l0), v1, to_string(l1)));
      break;
    }
  }
  if (!diagnostics.empty()) throw_diagnostics(diagnostics);

  std::map<std::tuple<Split, std::string, std::string>, std::size_t> index;
  for (const QARecord& r : records_) {
    auto key = std::make_tuple(r.split, r.story_id, r.section_id);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, all_sections_.size());
      all_sections_.push_back(Section{r.story_id, r.section_id, r.text, {r.narrative}});
      section_splits_.push_back(r.split);
      continue;
    }
    Section& s = all_sections_[it->second];
    if (s.text != r.text) {
      diagnostics.push_back(fmt::format("question '{}': section {} text differs from earlier rows", r.question_id,
                                        s.key()));
    }
    if (std::find(s.narratives.begin(), s.narratives.end(), r.narrative) == s.narratives.end()) {
      s.narratives.push_back(r.narrative);
    }
  }
  for (Section& s : all_sections_) std::sort(s.narratives.begin(), s.narratives.end());
  if (!diagnostics.empty()) throw_diagnostics(diagnostics);
}

std::vector<const QARecord*> Corpus::split(Split split) const {
  std::vector<const QARecord*> out;
  for (const auto& r : records_) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

const QARecord* Corpus::find(std::string_view question_id) const {
  auto it = by_id_.find(question_id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::vector<Section> Corpus::sections(Split split) const {
  std::vector<Section> out;
  for (std::size_t i = 0; i < all_sections_.size(); ++i) {
    if (section_splits_[i] == split) out.push_back(all_sections_[i]);
  }
  return out;
}

const Section* Corpus::find_section(std::string_view story_id, std::string_view section_id) const {
  for (const auto& s : all_sections_) {
    if (s.story_id == story_id && s.section_id == section_id) return &s;
  }
  return nullptr;
}

bool Corpus::augmented() const {
  return std::all_of(records_.begin(), records_.end(), [](const QARecord& r) {
    return r.split == Split::kTest || r.difficulty.has_value();
  });
}

Corpus load_corpus(const fs::path& path, CorpusFormat format) {
  if (!fs::exists(path)) throw CorpusError(fmt::format("corpus file '{}' does not exist", path.string()));
  const std::string ext = lower(path.extension().string());
  if (format == CorpusFormat::kAuto) {
    format = (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? CorpusFormat::kRecordPerLine
                                                                     : CorpusFormat::kDelimited;
  }
  const auto rows = format == CorpusFormat::kRecordPerLine ? read_record_per_line(path)
                                                           : read_delimited(path, ext == ".tsv" ? '\t' : ',');
  return Corpus(convert_rows(rows));
}

namespace {

ordered_json record_json(const QARecord& r) {
  ordered_json j;
  j["question_id"] = r.question_id;
  j["story_id"] = r.story_id;
  j["section_id"] = r.section_id;
  j["split"] = to_string(r.split);
  j["narrative"] = to_string(r.narrative);
  j["text"] = r.text;
  j["question"] = r.question;
  j["answer"] = r.answer;
  if (r.difficulty) {
    j["difficulty_value"] = *r.difficulty_value;
    j["difficulty"] = to_string(*r.difficulty);
  }
  return j;
}

}  // namespace

void save_corpus_jsonl(const Corpus& corpus, const fs::path& path) {
  std::string out;
  for (const auto& r : corpus.records()) out += record_json(r).dump() + "\n";
  io::write_file_atomic(path, out);
}

void save_corpus_csv(const Corpus& corpus, const fs::path& path) {
  std::string out = "question_id,story_id,section_id,split,narrative,text,question,answer,difficulty_value,difficulty\n";
  for (const auto& r : corpus.records()) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", io::escape_delimited(r.question_id),
                       io::escape_delimited(r.story_id), io::escape_delimited(r.section_id), to_string(r.split),
                       to_string(r.narrative), io::escape_delimited(r.text), io::escape_delimited(r.question),
                       io::escape_delimited(r.answer),
                       r.difficulty_value ? fmt::format("{}", *r.difficulty_value) : std::string{},
                       r.difficulty ? std::string(to_string(*r.difficulty)) : std::string{});
  }
  io::write_file_atomic(path, out);
}

Corpus augment_corpus(const Corpus& corpus, const RaschCalibration& calibration) {
  std::vector<QARecord> records = corpus.records();
  std::vector<std::string> missing;
  for (QARecord& r : records) {
    if (r.split == Split::kTest) continue;
    auto value = calibration.normalized.find(r.question_id);
    auto label = calibration.labels.find(r.question_id);
    if (value == calibration.normalized.end() || label == calibration.labels.end()) {
      missing.push_back(r.question_id);
      continue;
    }
    r.difficulty_value = value->second;
    r.difficulty = label->second;
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < kMaxDiagnostics; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > kMaxDiagnostics) list += ", ...";
    throw Error(fmt::format("calibration lacks {} question id(s): {}", missing.size(), list));
  }
  return Corpus(std::move(records));
}

std::map<std::pair<NarrativeLabel, DifficultyLabel>, std::size_t> difficulty_distribution(const Corpus& corpus) {
  std::map<std::pair<NarrativeLabel, DifficultyLabel>, std::size_t> counts;
  for (const auto& r : corpus.records()) {
    if (r.split != Split::kTest && r.difficulty) ++counts[{r.narrative, *r.difficulty}];
  }
  return counts;
}

std::string render_prompt(DataSetup setup, const PromptControls& controls, std::string_view text) {
  std::string out(kPromptHead);
  if (uses_difficulty(setup)) {
    if (!controls.difficulty) throw Error(fmt::format("setup {} requires a difficulty label", to_string(setup)));
    out += to_string(*controls.difficulty);
    out += ' ';
  }
  out += kPromptPair;
  if (uses_narrative(setup)) {
    if (!controls.narrative) throw Error(fmt::format("setup {} requires a narrative label", to_string(setup)));
    out += kPromptNarrative;
    out += to_string(*controls.narrative);
    out += ' ';
  }
  out += kPromptText;
  out += text;
  return out;
}

std::string render_input(const QARecord& record, DataSetup setup, DifficultyScheme scheme) {
  PromptControls controls;
  controls.narrative = record.narrative;
  if (record.difficulty) {
    if (scheme == DifficultyScheme::kFiveLevel) {
      controls.difficulty = *record.difficulty;
    } else {
      controls.difficulty = regroup(*record.difficulty);
    }
  } else if (uses_difficulty(setup)) {
    throw Error(fmt::format("setup {} requires a difficulty label but question '{}' has none", to_string(setup),
                            record.question_id));
  }
  return render_prompt(setup, controls, record.text);
}

ParsedPrompt parse_prompt(std::string_view prompt, DifficultyScheme scheme) {
  auto fail = [&](std::string_view why) -> ParseError {
    return ParseError(fmt::format("unrecognized prompt ({})", why), std::string(prompt));
  };
  bool ok = true;
  std::string_view rest = after(prompt, kPromptHead, ok);
  if (!ok) throw fail("missing instruction head");
  ParsedPrompt parsed{DataSetup::kTextQA, {}, {}};
  if (!rest.starts_with(kPromptPair)) {
    const auto space = rest.find(' ');
    if (space == std::string_view::npos) throw fail("missing difficulty word");
    const std::string_view word = rest.substr(0, space);
    try {
      parsed.controls.difficulty = parse_difficulty_request(word, scheme);
    } catch (const Error&) {
      throw fail(fmt::format("unknown difficulty '{}'", word));
    }
    rest.remove_prefix(space + 1);
  }
  rest = after(rest, kPromptPair, ok);
  if (!ok) throw fail("missing 'question-answer pair'");
  if (rest.starts_with(kPromptNarrative)) {
    rest.remove_prefix(kPromptNarrative.size());
    const auto marker = rest.find(std::string(" ") + std::string(kPromptText));
    if (marker == std::string_view::npos) throw fail("missing text marker");
    const auto word = rest.substr(0, marker);
    auto label = try_parse_narrative(word);
    if (!label) throw fail(fmt::format("unknown narrative '{}'", word));
    parsed.controls.narrative = *label;
    rest.remove_prefix(marker + 1);
  }
  rest = after(rest, kPromptText, ok);
  if (!ok) throw fail("missing text marker");
  parsed.text = std::string(rest);
  const bool nar = parsed.controls.narrative.has_value();
  const bool dif = parsed.controls.difficulty.has_value();
  parsed.setup = nar ? (dif ? DataSetup::kNarDifTextQA : DataSetup::kNarTextQA)
                     : (dif ? DataSetup::kDifTextQA : DataSetup::kTextQA);
  return parsed;
}

std::string render_target(std::string_view question, std::string_view answer) {
  for (auto token : {kQuestionToken, kAnswerToken}) {
    if (question.find(token) != std::string_view::npos || answer.find(token) != std::string_view::npos) {
      throw Error(fmt::format("reserved token {} appears in question or answer", token));
    }
  }
  return fmt::format("{} {} {} {}", kQuestionToken, question, kAnswerToken, answer);
}

std::string render_target(const QARecord& record) { return render_target(record.question, record.answer); }

std::size_t export_training_file(const Corpus& corpus, DataSetup setup, const fs::path& path, Split split,
                                 DifficultyScheme scheme) {
  std::string out;
  std::size_t lines = 0;
  for (const QARecord* r : corpus.split(split)) {
    ordered_json j;
    j["input"] = render_input(*r, setup, scheme);
    j["target"] = render_target(*r);
    out += j.dump() + "\n";
    ++lines;
  }
  io::write_file_atomic(path, out);
  return lines;
}

}  // namespace qgforge
