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

#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/irt/calibration.hpp"
#include "qgforge/simlearner.hpp"

using namespace qgforge;

TEST_CASE("keyed draws are pure functions of their keys") {
  CHECK(keyed_uniform(7, "a", "b") == keyed_uniform(7, "a", "b"));
  CHECK(keyed_uniform(7, "a", "b") != keyed_uniform(8, "a", "b"));
  CHECK(keyed_uniform(7, "ab", "") != keyed_uniform(7, "a", "b"));
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = keyed_uniform(1, "u", std::to_string(i));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = keyed_normal(1, "z", std::to_string(i));
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("simulated responses are reproducible and follow the Rasch rate") {
  ParameterMap b;
  for (int j = 0; j < 400; ++j) b["q" + std::to_string(1000 + j)] = 0.5;
  const std::vector<SyntheticLearner> learners{{"x", 1.5, 3}, {"y", -0.5, 3}};
  const ResponseMatrix a = simulate_responses(learners, b);
  CHECK(a.cells() == simulate_responses(learners, b).cells());
  CHECK(a.question_ids().front() == "q1000");
  CHECK(a.row_accuracy(0) == doctest::Approx(oracle::logistic(1.0)).epsilon(0.08));
  CHECK(a.row_accuracy(1) == doctest::Approx(oracle::logistic(-1.0)).epsilon(0.15));
  CHECK_THROWS_AS(simulate_responses({}, b), Error);
}

TEST_CASE("answer keys reject conflicting entries") {
  AnswerKey key;
  key.add("ctx", "q?", "yes", 1.0);
  key.add("ctx", "q?", "yes", 1.0);
  CHECK(key.size() == 1);
  CHECK(key.find("ctx", "q?")->draw_key == "q?");
  CHECK(key.find("ctx", "other?") == nullptr);
  CHECK_THROWS_AS(key.add("ctx", "q?", "no", 1.0), Error);
  CHECK_THROWS_AS(key.add("ctx", "q?", "yes", 2.0), Error);
  CHECK(label_true_difficulty(DifficultyLabel::kEasy) == -4.0);
  CHECK(label_true_difficulty(DifficultyLabel::kModerate) == 0.0);
  CHECK(label_true_difficulty(DifficultyLevel3::kMedium) == 0.0);
  CHECK(label_true_difficulty(DifficultyLevel3::kExtreme) == 4.0);
}

TEST_CASE("mock answer engine answers with the Rasch probability") {
  const Corpus corpus = synthetic_corpus({.test_sections = 2, .train_sections = 60, .val_sections = 10});
  const ParameterMap b = synthetic_difficulties(corpus, 4);
  const std::vector<SyntheticLearner> panel{{"hi", 3.0, 4}, {"lo", -3.0, 4}};
  MockAnswerEngine engine(panel, answer_key_from_corpus(corpus, b));
  int hi = 0, lo = 0, total = 0;
  for (const auto* r : corpus.split(Split::kTrain)) {
    const std::string a = engine.answer("hi", r->text, r->question);
    const std::string z = engine.answer("lo", r->text, r->question);
    CHECK(a == engine.answer("hi", r->text, r->question));
    CHECK((a == r->answer || a == kWrongAnswer));
    // Shared seed: the weaker learner is right only where the stronger one is.
    if (z == r->answer) CHECK(a == r->answer);
    hi += a == r->answer;
    lo += z == r->answer;
    ++total;
  }
  CHECK(hi > 0.85 * total);
  CHECK(lo < 0.15 * total);
  CHECK_THROWS_AS(engine.answer("nobody", "x", "y"), EndpointError);
  CHECK_THROWS_AS(engine.answer("hi", "x", "y"), EndpointError);
}

TEST_CASE("synthetic corpus has the requested shape") {
  const Corpus c = synthetic_corpus({.test_sections = 20, .train_sections = 10, .val_sections = 4});
  CHECK(c.sections(Split::kTest).size() == 20);
  CHECK(c.sections(Split::kTrain).size() == 10);
  CHECK(c.split(Split::kVal).size() == 12);
  for (const auto& s : c.sections(Split::kTrain)) {
    std::set<std::string> questions;
    for (const auto* r : c.split(Split::kTrain)) {
      if (r->story_id == s.story_id && r->section_id == s.section_id) questions.insert(r->question);
    }
    CHECK(questions.size() == 3);
  }
  const Corpus again = synthetic_corpus({.test_sections = 20, .train_sections = 10, .val_sections = 4});
  CHECK(again.records() == c.records());
}

TEST_CASE("mock generator follows narrative and difficulty controls") {
  const Corpus c = synthetic_corpus({.test_sections = 3, .train_sections = 1, .val_sections = 1});
  auto gen = mock_generator(c);
  const Section s = c.sections(Split::kTest).front();
  const SamplingConfig sampling;
  const std::string who =
      gen->generate(render_prompt(DataSetup::kNarTextQA, {NarrativeLabel::kCharacter, {}}, s.text), sampling);
  CHECK(who.starts_with(std::string(kQuestionToken) + " Who "));
  std::set<std::string> outputs;
  for (const auto& d : difficulty_levels(DifficultyScheme::kFiveLevel)) {
    outputs.insert(gen->generate(render_prompt(DataSetup::kDifTextQA, {std::nullopt, d}, s.text), sampling));
  }
  CHECK(outputs.size() == 5);
  CHECK(gen->calls() == 6);
  CHECK_THROWS_AS(gen->generate(render_prompt(DataSetup::kTextQA, {}, "Unknown text."), sampling), ParseError);
  CHECK_THROWS_AS(gen->generate("not a prompt", sampling), ParseError);
}
