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

#include "qgforge/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "qgforge/detail/parallel.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/io.hpp"
#include "qgforge/responses.hpp"

namespace qgforge {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(PairPart part) { return part == PairPart::kQuestion ? "Q" : "A"; }

bool EvaluationReport::empty() const {
  return narrative_similarity.empty() && difficulty_accuracy.empty() && per_narrative_accuracy.empty() &&
         pinc_by_difficulty.empty() && length_stats.empty() && interrogative_dist.empty();
}

namespace {

// Running mean keyed by K.
template <typename K>
struct Accumulator {
  std::map<K, std::pair<double, std::size_t>> sums;
  void add(const K& key, double v) {
    auto& [s, n] = sums[key];
    s += v;
    ++n;
  }
  std::map<K, Cell> cells(double scale = 1.0) const {
    std::map<K, Cell> out;
    for (const auto& [k, sn] : sums) out[k] = Cell{scale * sn.first / static_cast<double>(sn.second), sn.second};
    return out;
  }
};

const Section& section_of(const Corpus& corpus, const GeneratedPair& p) {
  const Section* s = corpus.find_section(p.story_id, p.section_id);
  if (s == nullptr) throw Error(fmt::format("generated pair refers to unknown section {}/{}", p.story_id, p.section_id));
  return *s;
}

}  // namespace

std::map<std::pair<DataSetup, NarrativeLabel>, SimilarityCell> narrative_similarity(
    std::span<const GeneratedPair> pairs, const Corpus& corpus) {
  if (pairs.empty()) throw Error("narrative similarity needs at least one generated pair");
  // Ground-truth questions per (story, section, narrative) in the test split.
  std::map<std::tuple<std::string, std::string, NarrativeLabel>, std::vector<TokenSeq>> truth;
  std::map<std::pair<std::string, std::string>, std::set<NarrativeLabel>> present;
  for (const QARecord* r : corpus.split(Split::kTest)) {
    truth[{r->story_id, r->section_id, r->narrative}].push_back(tokenize(r->question));
    present[{r->story_id, r->section_id}].insert(r->narrative);
  }
  Accumulator<std::pair<DataSetup, NarrativeLabel>> acc;
  std::map<std::pair<DataSetup, NarrativeLabel>, std::size_t> excluded;
  std::size_t matched = 0;
  for (const auto& p : pairs) {
    auto sec = present.find({p.story_id, p.section_id});
    if (sec == present.end()) continue;
    ++matched;
    const TokenSeq generated = tokenize(p.question);
    auto score = [&](NarrativeLabel n) {
      double best = 0.0;
      for (const auto& gt : truth.at({p.story_id, p.section_id, n})) best = std::max(best, rouge_l_f1(gt, generated));
      acc.add({p.setup, n}, best);
    };
    if (p.requested_narrative) {
      if (sec->second.contains(*p.requested_narrative)) {
        score(*p.requested_narrative);
      } else {
        ++excluded[{p.setup, *p.requested_narrative}];
      }
    } else {
      for (NarrativeLabel n : sec->second) score(n);
    }
  }
  if (matched == 0) throw Error("no generated pair refers to a test section of the corpus");
  std::map<std::pair<DataSetup, NarrativeLabel>, SimilarityCell> out;
  for (const auto& [key, cell] : acc.cells()) out[key] = SimilarityCell{cell.value, cell.count, 0};
  for (const auto& [key, n] : excluded) out[key].excluded = n;
  return out;
}

std::vector<Judgment> judge_pairs(std::span<const GeneratedPair> pairs, const Corpus& corpus,
                                  AnsweringEndpoint& endpoint, std::span<const std::string> panel,
                                  const JudgeOptions& options) {
  if (panel.empty()) throw Error("respondent panel is empty");
  std::vector<const Section*> sections;
  for (const auto& p : pairs) {
    if (!p.requested_difficulty) {
      throw Error(fmt::format("generated pair {} has no requested difficulty", p.key()));
    }
    sections.push_back(&section_of(corpus, p));
  }
  std::vector<Judgment> out(pairs.size() * panel.size());
  const int attempts = std::max(options.attempts, 1);
  detail::parallel_for(out.size(), options.jobs, [&](std::size_t t) {
    const std::size_t pi = t / panel.size();
    const GeneratedPair& p = pairs[pi];
    const std::string& who = panel[t % panel.size()];
    std::string reply;
    for (int attempt = 1;; ++attempt) {
      try {
        reply = endpoint.answer(who, sections[pi]->text, p.question);
        break;
      } catch (const EndpointError& e) {
        if (!e.transient() || attempt >= attempts) {
          throw EndpointError(fmt::format("answering endpoint failed for ({}, {}) after {} attempt(s): {}", who,
                                          p.key(), attempt, e.what()),
                              false);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(options.retry_delay_ms * attempt));
      }
    }
    const int correct = score_answer(p.answer, reply);
    out[t] = Judgment{p.key(), who, std::move(reply), correct};
  });
  return out;
}

DifficultyAccuracy difficulty_accuracy(std::span<const GeneratedPair> pairs, std::span<const Judgment> judgments) {
  std::map<std::string, const GeneratedPair*> by_key;
  for (const auto& p : pairs) {
    if (!by_key.emplace(p.key(), &p).second) throw Error(fmt::format("duplicate generated pair {}", p.key()));
  }
  using MicroKey = std::tuple<DataSetup, std::string, DifficultyRequest>;
  Accumulator<MicroKey> micro;
  Accumulator<std::tuple<DataSetup, std::string, DifficultyRequest, std::optional<NarrativeLabel>>> grouped;
  Accumulator<std::tuple<DataSetup, NarrativeLabel, DifficultyRequest>> per_narrative;
  for (const auto& j : judgments) {
    auto it = by_key.find(j.pair_key);
    if (it == by_key.end()) throw Error(fmt::format("judgment refers to unknown pair {}", j.pair_key));
    const GeneratedPair& p = *it->second;
    if (!p.requested_difficulty) throw Error(fmt::format("generated pair {} has no requested difficulty", p.key()));
    const double v = j.correct ? 1.0 : 0.0;
    micro.add({p.setup, j.respondent, *p.requested_difficulty}, v);
    grouped.add({p.setup, j.respondent, *p.requested_difficulty, p.requested_narrative}, v);
    if (p.requested_narrative) per_narrative.add({p.setup, *p.requested_narrative, *p.requested_difficulty}, v);
  }
  DifficultyAccuracy out;
  out.micro = micro.cells(100.0);
  out.per_narrative = per_narrative.cells(100.0);
  Accumulator<MicroKey> macro;
  std::map<MicroKey, std::size_t> macro_counts;
  for (const auto& [key, cell] : grouped.cells(100.0)) {
    const auto& [setup, who, difficulty, narrative] = key;
    macro.add({setup, who, difficulty}, cell.value);
    macro_counts[{setup, who, difficulty}] += cell.count;
  }
  out.macro = macro.cells();
  for (auto& [key, cell] : out.macro) cell.count = macro_counts[key];
  return out;
}

DifficultyAccuracy difficulty_accuracy(std::span<const GeneratedPair> pairs, const Corpus& corpus,
                                       AnsweringEndpoint& endpoint, std::span<const std::string> panel,
                                       const JudgeOptions& options) {
  const auto judgments = judge_pairs(pairs, corpus, endpoint, panel, options);
  return difficulty_accuracy(pairs, judgments);
}

TrendFit fit_linear_trend(std::span<const std::pair<double, double>> points) {
  if (points.empty()) throw Error("trend fit needs at least two distinct x values");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const bool distinct = std::any_of(points.begin(), points.end(),
                                    [&](const auto& p) { return p.first != points.front().first; });
  if (!distinct || sxx <= 0.0) throw Error("trend fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  return TrendFit{slope, my - slope * mx, points.size()};
}

std::map<SetupScheme, TrendFit> trend_fits(
    const std::map<std::tuple<DataSetup, std::string, DifficultyRequest>, Cell>& accuracy) {
  std::map<SetupScheme, std::vector<std::pair<double, double>>> points;
  for (const auto& [key, cell] : accuracy) {
    const auto& [setup, who, difficulty] = key;
    points[{setup, scheme_of(difficulty)}].emplace_back(nominal_position(difficulty), cell.value);
  }
  std::map<SetupScheme, TrendFit> out;
  for (const auto& [key, pts] : points) {
    const bool distinct =
        std::any_of(pts.begin(), pts.end(), [&](const auto& p) { return p.first != pts.front().first; });
    if (distinct) out[key] = fit_linear_trend(pts);
  }
  return out;
}

std::map<std::tuple<DataSetup, PairPart, DifficultyRequest>, Cell> pinc_by_difficulty(
    std::span<const GeneratedPair> pairs, const Corpus& corpus, int max_n, PincMode mode) {
  Accumulator<std::tuple<DataSetup, PairPart, DifficultyRequest>> acc;
  for (const auto& p : pairs) {
    if (!p.requested_difficulty) continue;
    const std::string& text = section_of(corpus, p).text;
    acc.add({p.setup, PairPart::kQuestion, *p.requested_difficulty}, pinc(text, p.question, max_n, mode));
    acc.add({p.setup, PairPart::kAnswer, *p.requested_difficulty}, pinc(text, p.answer, max_n, mode));
  }
  return acc.cells(100.0);
}

LengthAndInterrogatives length_and_interrogative_stats(std::span<const GeneratedPair> pairs) {
  Accumulator<std::tuple<DataSetup, PairPart, DifficultyRequest>> lengths;
  std::map<std::pair<DataSetup, DifficultyRequest>, std::map<Interrogative, std::size_t>> openers;
  for (const auto& p : pairs) {
    if (!p.requested_difficulty) continue;
    lengths.add({p.setup, PairPart::kQuestion, *p.requested_difficulty}, static_cast<double>(word_count(p.question)));
    lengths.add({p.setup, PairPart::kAnswer, *p.requested_difficulty}, static_cast<double>(word_count(p.answer)));
    ++openers[{p.setup, *p.requested_difficulty}][initial_interrogative(p.question)];
  }
  LengthAndInterrogatives out;
  out.lengths = lengths.cells();
  for (const auto& [key, counts] : openers) {
    std::size_t total = 0;
    for (const auto& [w, n] : counts) total += n;
    for (Interrogative w : kInterrogatives) {
      auto it = counts.find(w);
      const std::size_t n = it == counts.end() ? 0 : it->second;
      out.interrogatives[{key.first, key.second, w}] = Cell{static_cast<double>(n) / static_cast<double>(total), n};
    }
  }
  return out;
}

EvaluationReport build_report(std::span<const GeneratedPair> pairs, const Corpus& corpus,
                              std::span<const Judgment> judgments, PincMode pinc_mode) {
  EvaluationReport report;
  report.narrative_similarity = narrative_similarity(pairs, corpus);
  if (!judgments.empty()) {
    std::vector<GeneratedPair> judged;
    std::set<std::string> keys;
    for (const auto& j : judgments) keys.insert(j.pair_key);
    for (const auto& p : pairs) {
      if (keys.contains(p.key())) judged.push_back(p);
    }
    auto acc = difficulty_accuracy(judged, judgments);
    report.difficulty_accuracy = std::move(acc.micro);
    report.difficulty_accuracy_macro = std::move(acc.macro);
    report.per_narrative_accuracy = std::move(acc.per_narrative);
    report.trend_fits = trend_fits(report.difficulty_accuracy);
  }
  report.pinc_by_difficulty = pinc_by_difficulty(pairs, corpus, 3, pinc_mode);
  auto stats = length_and_interrogative_stats(pairs);
  report.length_stats = std::move(stats.lengths);
  report.interrogative_dist = std::move(stats.interrogatives);
  return report;
}

namespace {

std::string file_safe(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    out.push_back(std::isalnum(c) || c == '-' || c == '.' ? static_cast<char>(c) : '_');
  }
  return out;
}

int levels_of(const DifficultyRequest& d) { return level_count(scheme_of(d)); }

// Wide table: one row per (setup, levels, part), one column per 5-level word.
std::string wide_by_difficulty(const std::map<std::tuple<DataSetup, PairPart, DifficultyRequest>, Cell>& cells,
                               std::string_view value_name) {
  std::string out = "setup,levels,part";
  for (auto l : kDifficultyLabels) out += fmt::format(",{}", to_string(l));
  for (auto l : kDifficultyLabels) out += fmt::format(",n_{}", to_string(l));
  out += "\n";
  std::map<std::tuple<DataSetup, int, PairPart>, std::map<std::string, Cell>> rows;
  for (const auto& [key, cell] : cells) {
    const auto& [setup, part, d] = key;
    rows[{setup, levels_of(d), part}][std::string(to_string(d))] = cell;
  }
  for (const auto& [key, row] : rows) {
    const auto& [setup, levels, part] = key;
    std::string values, counts;
    for (auto l : kDifficultyLabels) {
      auto it = row.find(std::string(to_string(l)));
      values += "," + (it == row.end() ? std::string{} : io::fixed(it->second.value, 2));
      counts += "," + (it == row.end() ? std::string{} : std::to_string(it->second.count));
    }
    out += fmt::format("{},{},{}{}{}\n", to_string(setup), levels, to_string(part), values, counts);
  }
  (void)value_name;
  return out;
}

}  // namespace

std::vector<fs::path> emit_report(const EvaluationReport& report, const fs::path& dir) {
  if (report.empty()) throw Error("refusing to emit an empty evaluation report");
  std::vector<fs::path> written;
  auto write = [&](const fs::path& rel, const std::string& content) {
    io::write_file_atomic(dir / rel, content);
    written.push_back(rel);
  };

  {
    std::string out = "setup";
    for (auto n : kNarrativeLabels) out += fmt::format(",{}", to_string(n));
    for (auto n : kNarrativeLabels) out += fmt::format(",n_{}", to_string(n));
    for (auto n : kNarrativeLabels) out += fmt::format(",excluded_{}", to_string(n));
    out += "\n";
    for (DataSetup setup : kDataSetups) {
      bool any = false;
      std::string values, counts, excluded;
      for (auto n : kNarrativeLabels) {
        auto it = report.narrative_similarity.find({setup, n});
        const bool has = it != report.narrative_similarity.end();
        any |= has;
        values += "," + (has && it->second.count ? io::fixed(it->second.mean, 4) : std::string{});
        counts += "," + std::to_string(has ? it->second.count : 0);
        excluded += "," + std::to_string(has ? it->second.excluded : 0);
      }
      if (any) out += fmt::format("{}{}{}{}\n", to_string(setup), values, counts, excluded);
    }
    write("narrative_similarity.csv", out);
  }
  {
    std::string out = "setup,levels,respondent,difficulty,percent_correct,n,percent_correct_macro,n_macro\n";
    for (const auto& [key, cell] : report.difficulty_accuracy) {
      const auto& [setup, who, d] = key;
      auto macro = report.difficulty_accuracy_macro.find(key);
      const bool has_macro = macro != report.difficulty_accuracy_macro.end();
      out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(setup), levels_of(d), io::escape_delimited(who),
                         to_string(d), io::fixed(cell.value, 2), cell.count,
                         has_macro ? io::fixed(macro->second.value, 2) : std::string{},
                         has_macro ? std::to_string(macro->second.count) : std::string{});
    }
    write("difficulty_accuracy.csv", out);
  }
  {
    std::string out = "setup,levels,narrative,difficulty,percent_correct,n\n";
    for (const auto& [key, cell] : report.per_narrative_accuracy) {
      const auto& [setup, n, d] = key;
      out += fmt::format("{},{},{},{},{},{}\n", to_string(setup), levels_of(d), to_string(n), to_string(d),
                         io::fixed(cell.value, 2), cell.count);
    }
    write("per_narrative_accuracy.csv", out);
  }
  write("pinc.csv", wide_by_difficulty(report.pinc_by_difficulty, "pinc"));
  write("lengths.csv", wide_by_difficulty(report.length_stats, "words"));
  {
    std::string out = "setup,levels,difficulty";
    for (Interrogative w : kInterrogatives) out += fmt::format(",{}", to_string(w));
    out += ",total\n";
    std::map<std::pair<DataSetup, DifficultyRequest>, std::pair<std::string, std::size_t>> rows;
    for (const auto& [key, cell] : report.interrogative_dist) {
      const auto& [setup, d, w] = key;
      auto& [text, total] = rows[{setup, d}];
      text += "," + io::fixed(cell.value, 4);
      total += cell.count;
    }
    for (const auto& [key, row] : rows) {
      out += fmt::format("{},{},{}{},{}\n", to_string(key.first), levels_of(key.second), to_string(key.second),
                         row.first, row.second);
    }
    write("interrogatives.csv", out);
  }
  {
    std::string out = "setup,levels,slope,intercept,points\n";
    for (const auto& [key, fit] : report.trend_fits) {
      out += fmt::format("{},{},{},{},{}\n", to_string(key.first), level_count(key.second), io::fixed(fit.slope, 4),
                         io::fixed(fit.intercept, 4), fit.points);
    }
    write("trend.csv", out);
  }
  std::map<std::tuple<DataSetup, int, std::string>, std::string> series;
  for (const auto& [key, cell] : report.difficulty_accuracy) {
    const auto& [setup, who, d] = key;
    series[{setup, levels_of(d), who}] += fmt::format("{},{}\n", io::fixed(nominal_position(d), 4), io::fixed(cell.value, 2));
  }
  for (const auto& [key, content] : series) {
    const auto& [setup, levels, who] = key;
    write(fs::path("plots") / fmt::format("{}-L{}__{}.series", short_name(setup), levels, file_safe(who)),
          "x,y\n" + content);
  }
  return written;
}

std::vector<Judgment> load_judgments(const fs::path& path) {
  std::vector<Judgment> out;
  for (const auto& j : io::read_jsonl(path)) {
    try {
      out.push_back({j.at("pair_key").get<std::string>(), j.at("respondent").get<std::string>(),
                     j.at("answer_text").get<std::string>(), j.at("correct").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}: malformed judgment: {}", path.string(), e.what()));
    }
  }
  return out;
}

void save_judgments(std::span<const Judgment> judgments, const fs::path& path) {
  std::string out;
  for (const auto& j : judgments) {
    ordered_json doc;
    doc["pair_key"] = j.pair_key;
    doc["respondent"] = j.respondent;
    doc["answer_text"] = j.answer_text;
    doc["correct"] = j.correct;
    out += doc.dump() + "\n";
  }
  io::write_file_atomic(path, out);
}

}  // namespace qgforge
