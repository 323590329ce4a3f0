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

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qgforge/corpus.hpp"
#include "qgforge/endpoint.hpp"
#include "qgforge/genclient.hpp"
#include "qgforge/irt/calibration.hpp"
#include "qgforge/responses.hpp"

namespace qgforge {

/// A respondent with a known ability whose behaviour is fixed by its seed.
struct SyntheticLearner {
  std::string name;
  double true_theta = 0.0;
  std::uint64_t rng_seed = 0;
};

/// Counter-based uniform in [0, 1): a pure function of its three keys.
double keyed_uniform(std::uint64_t seed, std::string_view a, std::string_view b);
/// Standard normal from two keyed uniforms (Box-Muller).
double keyed_normal(std::uint64_t seed, std::string_view a, std::string_view b);

/// Bernoulli(rasch_prob(theta_i, b_j)) draws keyed by (seed, learner, item).
/// Columns are the item ids in lexicographic order.
ResponseMatrix simulate_responses(std::span<const SyntheticLearner> learners, const ParameterMap& true_b);

/// Reference answers and true difficulties, looked up by (context, question).
class AnswerKey {
 public:
  struct Entry {
    std::string answer;
    double true_b = 0.0;
    /// Keys the respondent's random draw; entries sharing it share the draw.
    std::string draw_key;
  };

  /// Throws Error when the same (context, question) is added with a
  /// different answer, difficulty or draw key. An empty draw key means the
  /// question itself.
  void add(const std::string& context, const std::string& question, std::string answer, double true_b,
           std::string draw_key = {});
  const Entry* find(const std::string& context, const std::string& question) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, Entry, std::less<>> entries_;
};

/// Train/val questions with their corpus answers and the given true b.
AnswerKey answer_key_from_corpus(const Corpus& corpus, const ParameterMap& true_b);

/// True difficulty by requested label: 5 levels at -4, -2, 0, 2, 4 and
/// 3 levels at -4, 0, 4.
double label_true_difficulty(const DifficultyRequest& label);

/// Generated pairs keyed on their section text; b comes from the requested
/// difficulty via label_true_difficulty (0 when absent). Pairs of one section
/// share a draw key, so a respondent correct at one level is correct at every
/// easier level of that section.
AnswerKey answer_key_from_generated(std::span<const GeneratedPair> pairs, const Corpus& corpus);

inline constexpr std::string_view kWrongAnswer = "xqzv";

/// Answers correctly with probability rasch_prob(theta, b_true), otherwise
/// with kWrongAnswer. The draw is keyed by (learner seed, context, draw key),
/// so learners sharing a seed share their uniforms and a higher theta is
/// correct on a superset of items.
class MockAnswerEngine final : public AnsweringEndpoint {
 public:
  MockAnswerEngine(std::vector<SyntheticLearner> learners, AnswerKey key);
  std::string answer(const std::string& respondent, const std::string& context,
                     const std::string& question) override;

 private:
  std::map<std::string, SyntheticLearner, std::less<>> learners_;
  AnswerKey key_;
};

std::unique_ptr<AnsweringEndpoint> mock_answer_engine(const SyntheticLearner& learner, const Corpus& corpus,
                                                      const ParameterMap& true_b);

/// Conventional question opener per narrative; the no-narrative opener when
/// the label is absent.
std::string_view narrative_opener(std::optional<NarrativeLabel> narrative);

/// Deterministic stand-in for a generation model. Questions take the
/// narrative's opener plus a sentence chosen by narrative class (first
/// sentence for character/setting/action/feeling, last for the rest) shifted
/// by difficulty level; answers replace more words with novel vocabulary as
/// the level rises.
class MockGenerator final : public GenerationEndpoint {
 public:
  /// With a corpus, prompts whose text is not one of its sections are rejected.
  explicit MockGenerator(DifficultyScheme scheme = DifficultyScheme::kFiveLevel, const Corpus* corpus = nullptr);
  std::string generate(const std::string& prompt, const SamplingConfig& sampling) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  DifficultyScheme scheme_;
  std::vector<std::string> known_texts_;
  std::atomic<std::size_t> calls_{0};
};

std::unique_ptr<MockGenerator> mock_generator(const Corpus& corpus,
                                              DifficultyScheme scheme = DifficultyScheme::kFiveLevel);

struct SyntheticCorpusOptions {
  std::size_t test_sections = 394;
  std::size_t train_sections = 120;
  std::size_t val_sections = 20;
  std::size_t questions_per_section = 3;
  std::size_t sections_per_story = 15;
  std::uint64_t seed = 7;
};

/// Fairy-tale-like sections and questions built from a fixed vocabulary.
Corpus synthetic_corpus(const SyntheticCorpusOptions& options = {});

/// b ~ N(0, 1) per train/val question, keyed by (seed, question id).
ParameterMap synthetic_difficulties(const Corpus& corpus, std::uint64_t seed);

}  // namespace qgforge
