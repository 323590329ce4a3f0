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

#include "qgforge/simlearner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qgforge/errors.hpp"
#include "qgforge/io.hpp"

namespace qgforge {

double keyed_uniform(std::uint64_t seed, std::string_view a, std::string_view b) {
  std::uint64_t x = io::splitmix64(seed);
  x = io::splitmix64(x ^ io::fnv1a64(a));
  x = io::splitmix64(x ^ io::fnv1a64(b));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

double keyed_normal(std::uint64_t seed, std::string_view a, std::string_view b) {
  const double u1 = keyed_uniform(seed, a, b);
  const double u2 = keyed_uniform(seed ^ 0x5bd1e9955bd1e995ULL, a, b);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ResponseMatrix simulate_responses(std::span<const SyntheticLearner> learners, const ParameterMap& true_b) {
  if (learners.empty()) throw Error("simulate_responses: no learners");
  if (true_b.empty()) throw Error("simulate_responses: no items");
  std::vector<std::string> names, qids;
  for (const auto& l : learners) names.push_back(l.name);
  for (const auto& [qid, b] : true_b) qids.push_back(qid);
  ResponseMatrix::Cells cells(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(qids.size()));
  for (std::size_t i = 0; i < learners.size(); ++i) {
    std::size_t j = 0;
    for (const auto& [qid, b] : true_b) {
      const double u = keyed_uniform(learners[i].rng_seed, learners[i].name, qid);
      cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j++)) =
          u < irt::rasch_prob(learners[i].true_theta, b) ? 1 : 0;
    }
  }
  return ResponseMatrix(std::move(names), std::move(qids), std::move(cells));
}

void AnswerKey::add(const std::string& context, const std::string& question, std::string answer, double true_b,
                    std::string draw_key) {
  if (draw_key.empty()) draw_key = question;
  auto [it, inserted] = entries_.try_emplace({context, question}, Entry{answer, true_b, draw_key});
  if (!inserted && (it->second.answer != answer || it->second.true_b != true_b || it->second.draw_key != draw_key)) {
    throw Error(fmt::format("answer key conflict for question '{}'", question));
  }
}

const AnswerKey::Entry* AnswerKey::find(const std::string& context, const std::string& question) const {
  auto it = entries_.find(std::make_pair(context, question));
  return it == entries_.end() ? nullptr : &it->second;
}

AnswerKey answer_key_from_corpus(const Corpus& corpus, const ParameterMap& true_b) {
  AnswerKey key;
  for (const auto& r : corpus.records()) {
    if (r.split == Split::kTest) continue;
    auto it = true_b.find(r.question_id);
    if (it == true_b.end()) throw Error(fmt::format("no true difficulty for question '{}'", r.question_id));
    key.add(r.text, r.question, r.answer, it->second);
  }
  return key;
}

double label_true_difficulty(const DifficultyRequest& label) {
  const int levels = level_count(scheme_of(label));
  return -4.0 + 8.0 * ordinal(label) / (levels - 1);
}

AnswerKey answer_key_from_generated(std::span<const GeneratedPair> pairs, const Corpus& corpus) {
  AnswerKey key;
  for (const auto& p : pairs) {
    const Section* s = corpus.find_section(p.story_id, p.section_id);
    if (s == nullptr) throw Error(fmt::format("generated pair refers to unknown section {}/{}", p.story_id, p.section_id));
    key.add(s->text, p.question, p.answer, p.requested_difficulty ? label_true_difficulty(*p.requested_difficulty) : 0.0,
            s->key());
  }
  return key;
}

MockAnswerEngine::MockAnswerEngine(std::vector<SyntheticLearner> learners, AnswerKey key) : key_(std::move(key)) {
  for (auto& l : learners) {
    const std::string name = l.name;
    if (!learners_.emplace(name, std::move(l)).second) throw Error(fmt::format("duplicate learner '{}'", name));
  }
}

std::string MockAnswerEngine::answer(const std::string& respondent, const std::string& context,
                                     const std::string& question) {
  auto learner = learners_.find(respondent);
  if (learner == learners_.end()) throw EndpointError(fmt::format("unknown respondent '{}'", respondent), false);
  const AnswerKey::Entry* entry = key_.find(context, question);
  if (entry == nullptr) throw EndpointError(fmt::format("no reference answer for question '{}'", question), false);
  const double u = keyed_uniform(learner->second.rng_seed, context, entry->draw_key);
  return u < irt::rasch_prob(learner->second.true_theta, entry->true_b) ? entry->answer : std::string(kWrongAnswer);
}

std::unique_ptr<AnsweringEndpoint> mock_answer_engine(const SyntheticLearner& learner, const Corpus& corpus,
                                                      const ParameterMap& true_b) {
  return std::make_unique<MockAnswerEngine>(std::vector<SyntheticLearner>{learner},
                                            answer_key_from_corpus(corpus, true_b));
}

std::string_view narrative_opener(std::optional<NarrativeLabel> narrative) {
  if (!narrative) return "Tell me about";
  switch (*narrative) {
    case NarrativeLabel::kCharacter: return "Who";
    case NarrativeLabel::kSetting: return "Where did";
    case NarrativeLabel::kAction: return "What did";
    case NarrativeLabel::kFeeling: return "How did";
    case NarrativeLabel::kCausal: return "Why did";
    case NarrativeLabel::kOutcome: return "What happened after";
    case NarrativeLabel::kPrediction: return "What will happen if";
  }
  return "Tell me about";
}

namespace {

std::vector<std::vector<std::string>> sentences_of(std::string_view text) {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    const bool ends = word.back() == '.' || word.back() == '!' || word.back() == '?';
    auto first = word.find_first_not_of("\"'([");
    auto last = word.find_last_not_of("\"')].,;:!?");
    if (first != std::string::npos && last != std::string::npos && first <= last) {
      current.push_back(word.substr(first, last - first + 1));
    }
    if (ends && !current.empty()) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to && i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

constexpr std::array<std::string_view, 5> kQualifiers = {"", "exactly", "really", "truly", "ultimately"};
constexpr std::array<std::string_view, 8> kParaphrase = {"perhaps",    "somehow",   "eventually", "indeed",
                                                         "apparently", "certainly", "quietly",    "suddenly"};

bool first_half(NarrativeLabel n) {
  return n == NarrativeLabel::kCharacter || n == NarrativeLabel::kSetting || n == NarrativeLabel::kAction ||
         n == NarrativeLabel::kFeeling;
}

}  // namespace

MockGenerator::MockGenerator(DifficultyScheme scheme, const Corpus* corpus) : scheme_(scheme) {
  if (corpus != nullptr) {
    for (const auto& r : corpus->records()) known_texts_.push_back(r.text);
    std::sort(known_texts_.begin(), known_texts_.end());
    known_texts_.erase(std::unique(known_texts_.begin(), known_texts_.end()), known_texts_.end());
  }
}

std::string MockGenerator::generate(const std::string& prompt, const SamplingConfig& /*sampling*/) {
  ++calls_;
  const ParsedPrompt parsed = parse_prompt(prompt, scheme_);
  if (!known_texts_.empty() && !std::binary_search(known_texts_.begin(), known_texts_.end(), parsed.text)) {
    throw ParseError("prompt text is not a known section", prompt);
  }
  const auto sentences = sentences_of(parsed.text);
  if (sentences.empty()) throw ParseError("prompt text has no words", prompt);

  // Level position on the 5-level grid: 3-level labels sit at 0, 2, 4.
  std::size_t level = 0;
  if (parsed.controls.difficulty) {
    const auto& d = *parsed.controls.difficulty;
    level = static_cast<std::size_t>(ordinal(d) * 4 / (level_count(scheme_of(d)) - 1));
  }
  const std::size_t count = sentences.size();
  std::size_t base = count / 2;
  if (parsed.controls.narrative) base = first_half(*parsed.controls.narrative) ? 0 : count - 1;
  const auto& sentence = sentences[(base + level) % count];

  std::string question(narrative_opener(parsed.controls.narrative));
  const std::string content = join(sentence, sentence.size() > 1 ? 1 : 0, 9);
  if (!content.empty()) question += " " + content;
  if (!kQualifiers[level].empty()) question += " " + std::string(kQualifiers[level]);
  question += "?";

  std::vector<std::string> answer(sentence.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(4, sentence.size())),
                                  sentence.end());
  for (std::size_t i = 0; i < std::min(level, answer.size()); ++i) {
    answer[i] = std::string(kParaphrase[(io::fnv1a64(answer[i]) + level) % kParaphrase.size()]);
  }
  return render_target(question, join(answer, 0, answer.size()));
}

std::unique_ptr<MockGenerator> mock_generator(const Corpus& corpus, DifficultyScheme scheme) {
  return std::make_unique<MockGenerator>(scheme, &corpus);
}

namespace {

constexpr std::array<std::string_view, 16> kCharacters = {
    "hare",   "turtle", "king",   "miller", "princess", "fox",     "giant",  "shepherd",
    "witch",  "tailor", "raven",  "widow",  "fisherman", "dwarf",  "goose",  "prince"};
constexpr std::array<std::string_view, 12> kVerbs = {"found",  "followed", "feared",  "helped", "chased", "thanked",
                                                     "warned", "carried",  "visited", "fooled", "praised", "met"};
constexpr std::array<std::string_view, 12> kPlaces = {"forest", "castle", "river",  "meadow", "village", "mountain",
                                                      "mill",   "garden", "bridge", "cave",   "market", "lake"};
constexpr std::array<std::string_view, 10> kAdjectives = {"old",   "clever", "proud", "poor",   "brave",
                                                          "tired", "hungry", "kind", "greedy", "young"};
constexpr std::array<std::string_view, 8> kTimes = {"at dawn",     "that night",  "in winter",  "on saturday",
                                                    "after supper", "before noon", "at harvest", "one morning"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, std::uint64_t seed, std::string_view a,
                      std::string_view b) {
  return words[static_cast<std::size_t>(keyed_uniform(seed, a, b) * N)];
}

}  // namespace

Corpus synthetic_corpus(const SyntheticCorpusOptions& options) {
  std::vector<QARecord> records;
  const std::uint64_t seed = options.seed;
  auto emit_split = [&](Split split, std::size_t sections) {
    for (std::size_t s = 0; s < sections; ++s) {
      const std::string story = fmt::format("{}-story-{:03}", to_string(split), s / options.sections_per_story);
      const std::string section = fmt::format("{}", s % options.sections_per_story + 1);
      const std::string key = story + "/" + section;
      const std::size_t n_sentences = 5 + static_cast<std::size_t>(keyed_uniform(seed, key, "len") * 3);
      std::vector<std::string> sentences;
      for (std::size_t k = 0; k < n_sentences; ++k) {
        const std::string tag = fmt::format("s{}", k);
        sentences.push_back(fmt::format("The {} {} {} the {} near the {} {}.", pick(kAdjectives, seed, key, tag + "a"),
                                        pick(kCharacters, seed, key, tag + "c"), pick(kVerbs, seed, key, tag + "v"),
                                        pick(kCharacters, seed, key, tag + "o"), pick(kPlaces, seed, key, tag + "p"),
                                        pick(kTimes, seed, key, tag + "t")));
      }
      std::string text;
      for (const auto& sent : sentences) text += (text.empty() ? "" : " ") + sent;
      const auto split_sentences = sentences_of(text);
      for (std::size_t q = 0; q < options.questions_per_section; ++q) {
        const std::string tag = fmt::format("q{}", q);
        const auto narrative =
            kNarrativeLabels[static_cast<std::size_t>(keyed_uniform(seed, key, tag + "n") * kNarrativeLabels.size())];
        const std::size_t start = static_cast<std::size_t>(keyed_uniform(seed, key, "start") * split_sentences.size());
        const auto& sent = split_sentences[(start + q) % split_sentences.size()];
        QARecord r;
        r.story_id = story;
        r.section_id = section;
        r.text = text;
        r.question = fmt::format("{} {}?", narrative_opener(narrative), join(sent, 1, 6));
        r.answer = join(sent, sent.size() - 4, sent.size());
        r.narrative = narrative;
        r.split = split;
        r.question_id = fmt::format("{}-{}-{}", story, section, q + 1);
        records.push_back(std::move(r));
      }
    }
  };
  emit_split(Split::kTrain, options.train_sections);
  emit_split(Split::kVal, options.val_sections);
  emit_split(Split::kTest, options.test_sections);
  return Corpus(std::move(records));
}

ParameterMap synthetic_difficulties(const Corpus& corpus, std::uint64_t seed) {
  ParameterMap b;
  for (const auto& r : corpus.records()) {
    if (r.split != Split::kTest) b.emplace(r.question_id, keyed_normal(seed, "difficulty", r.question_id));
  }
  return b;
}

}  // namespace qgforge
