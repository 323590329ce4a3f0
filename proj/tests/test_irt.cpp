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
#include <limits>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/irt/calibration.hpp"
#include "qgforge/simlearner.hpp"

using namespace qgforge;
using fixture::to_matrix;

namespace {

ResponseMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, double p = 0.5) {
  std::bernoulli_distribution coin(p);
  std::vector<std::vector<int>> y(static_cast<std::size_t>(rows), std::vector<int>(static_cast<std::size_t>(cols)));
  for (auto& row : y) {
    for (auto& v : row) v = coin(rng) ? 1 : 0;
  }
  return to_matrix(y);
}

}  // namespace

TEST_CASE("rasch_prob is exact at zero, antisymmetric and overflow-free") {
  CHECK(irt::rasch_prob(0.3, 0.3) == 0.5);
  CHECK(irt::rasch_prob(-7.0, -7.0) == 0.5);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int t = 0; t < 1000; ++t) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(irt::rasch_prob(a, b) + irt::rasch_prob(b, a) - 1.0) <= 1e-12);
  }
  CHECK(irt::rasch_prob(700.0, 0.0) == 1.0);
  CHECK(irt::rasch_prob(0.0, 700.0) >= 0.0);
  CHECK(std::isfinite(irt::rasch_prob(0.0, 700.0)));
  CHECK(irt::rasch_prob(0.0f, 0.0f) == 0.5f);
  CHECK_THROWS_AS(irt::rasch_prob(std::numeric_limits<double>::quiet_NaN(), 0.0), std::domain_error);
  CHECK_THROWS_AS(irt::rasch_prob(0.0, std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("quadrature is the renormalized standard normal on a fixed grid") {
  const auto q = irt::normal_quadrature(61, -6.0, 6.0);
  CHECK(q.nodes.size() == 61);
  CHECK(q.nodes(0) == -6.0);
  CHECK(q.nodes(60) == 6.0);
  CHECK(q.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q.weights(30) == q.weights.maxCoeff());
  CHECK_THROWS_AS(irt::normal_quadrature(1, -6.0, 6.0), std::invalid_argument);
}

TEST_CASE("marginal likelihood agrees with the loop oracle") {
  const oracle::GridPrior prior;
  const auto q = irt::normal_quadrature(61, -6.0, 6.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto y = oracle::random_3x4(seed);
    Eigen::VectorXd b(4);
    b << -1.0, 0.3, 0.0, 2.5;
    const double ours = irt::marginal_log_likelihood(to_matrix(y).as<double>(), b, q);
    CHECK(ours == doctest::Approx(oracle::marginal_ll(y, {-1.0, 0.3, 0.0, 2.5}, prior)).epsilon(1e-12));
  }
}

TEST_CASE("EM matches the brute-force grid maximizer on small matrices") {
  const oracle::GridPrior prior;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CAPTURE(seed);
    const auto y = oracle::random_3x4(seed);
    const auto est = estimate_difficulties_em(to_matrix(y));
    const auto grid = oracle::grid_mle(y, prior);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(est.difficulties.at("q" + std::to_string(j)) - grid[j]) <= 0.05);
    }
  }
}

TEST_CASE("EM log-likelihood never decreases and equal raw scores tie exactly") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const ResponseMatrix m = random_matrix(rng, 12, 9, 0.6);
    const auto est = estimate_difficulties_em(m);
    for (std::size_t i = 1; i < est.log_likelihood.size(); ++i) {
      CHECK(est.log_likelihood[i] >= est.log_likelihood[i - 1] - 1e-9);
    }
    const Eigen::VectorXi raw = m.as<int>().colwise().sum().transpose();
    for (Eigen::Index a = 0; a < m.cols(); ++a) {
      for (Eigen::Index b = 0; b < m.cols(); ++b) {
        const double ba = est.difficulties.at(m.question_ids()[a]);
        const double bb = est.difficulties.at(m.question_ids()[b]);
        if (raw(a) == raw(b)) CHECK(ba == bb);
        if (raw(a) > raw(b)) CHECK(ba < bb);
      }
    }
  }
}

TEST_CASE("EM clamps items everyone or no one answers") {
  std::vector<std::vector<int>> y{{1, 0, 1}, {1, 0, 0}, {1, 0, 1}, {1, 0, 0}};
  const auto est = estimate_difficulties_em(to_matrix(y));
  CHECK(est.difficulties.at("q0") == -6.0);
  CHECK(est.difficulties.at("q1") == 6.0);
  CHECK(est.converged);
  CHECK(std::abs(est.difficulties.at("q2")) < 6.0);
}

TEST_CASE("EM rejects degenerate matrices and reports non-convergence") {
  CHECK_THROWS_AS(estimate_difficulties_em(ResponseMatrix{}), Error);
  CHECK_THROWS_AS(estimate_difficulties_em(to_matrix({{1, 0}})), Error);
  irt::EmOptions one;
  one.max_iters = 1;
  const auto est = estimate_difficulties_em(to_matrix(oracle::random_3x4(4)), one);
  CHECK(est.iterations == 1);
  CHECK_FALSE(est.converged);
}

TEST_CASE("EM is generic over the scalar type") {
  const ResponseMatrix m = to_matrix(oracle::random_3x4(9));
  const auto d = irt::rasch_em(m.as<double>());
  const auto f = irt::rasch_em(m.as<float>());
  for (Eigen::Index j = 0; j < 4; ++j) CHECK(f.difficulties(j) == doctest::Approx(d.difficulties(j)).epsilon(1e-3));
}

TEST_CASE("MAP ability solves its score equation and is monotone in raw score") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  Eigen::VectorXd b(30);
  for (auto& v : b) v = normal(rng);
  double previous = -INFINITY;
  for (int score = 0; score <= 30; ++score) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(30);
    y.head(score).setOnes();
    const double theta = irt::rasch_map_ability(y, b);
    double g = score - theta;
    for (Eigen::Index j = 0; j < 30; ++j) g -= oracle::logistic(theta - b(j));
    CHECK(std::abs(g) < 1e-6);
    CHECK(theta > previous);
    previous = theta;
  }
  CHECK(irt::rasch_map_ability(Eigen::VectorXd(0), Eigen::VectorXd(0)) == 0.0);
  Eigen::VectorXd bad = b;
  bad(0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(irt::rasch_map_ability(Eigen::VectorXd::Zero(30), bad), std::domain_error);
}

TEST_CASE("strictly ordered row accuracies give strictly ordered abilities") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const ResponseMatrix m = random_matrix(rng, 5, 15);
    const auto cal = calibrate(m);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index k = 0; k < 5; ++k) {
        if (m.row_accuracy(i) > m.row_accuracy(k)) {
          CHECK(cal.abilities.at(m.respondents()[i]) > cal.abilities.at(m.respondents()[k]));
        }
      }
    }
  }
}

TEST_CASE("normalization maps five classes onto 0..1 with ordered labels") {
  const ParameterMap b{{"a", -1.3}, {"b", -0.2}, {"c", 0.1}, {"d", 0.9}, {"e", 2.0}, {"f", -0.2}};
  const auto n = normalize_and_label(b);
  CHECK(n.normalized.at("a") == 0.0);
  CHECK(n.normalized.at("e") == 1.0);
  CHECK(n.normalized.at("c") == doctest::Approx(1.4 / 3.3));
  const std::vector<std::string> order{"a", "b", "c", "d", "e"};
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(n.labels.at(order[i]) == DifficultyRequest{kDifficultyLabels[i]});
  }
  CHECK(n.labels.at("f") == n.labels.at("b"));
  const auto three = normalize_and_label(b, DifficultyScheme::kThreeLevel);
  CHECK(three.labels.at("c") == DifficultyRequest{DifficultyLevel3::kMedium});
  CHECK(three.labels.at("e") == DifficultyRequest{DifficultyLevel3::kExtreme});
}

TEST_CASE("normalization falls back to equal-width bins and handles one value") {
  const ParameterMap six{{"a", 0.0}, {"b", 0.1}, {"c", 0.3}, {"d", 0.5}, {"e", 0.95}, {"f", 1.0}};
  const auto n = normalize_and_label(six);
  CHECK(n.labels.at("a") == DifficultyRequest{DifficultyLabel::kEasy});
  CHECK(n.labels.at("b") == DifficultyRequest{DifficultyLabel::kEasy});
  CHECK(n.labels.at("c") == DifficultyRequest{DifficultyLabel::kMedium});
  CHECK(n.labels.at("d") == DifficultyRequest{DifficultyLabel::kModerate});
  CHECK(n.labels.at("e") == DifficultyRequest{DifficultyLabel::kExtreme});
  CHECK(n.labels.at("f") == DifficultyRequest{DifficultyLabel::kExtreme});

  const auto one = normalize_and_label(ParameterMap{{"x", 1.5}, {"y", 1.5}});
  CHECK(one.normalized.at("x") == 0.5);
  CHECK(one.labels.at("y") == DifficultyRequest{DifficultyLabel::kModerate});
  CHECK(normalize_and_label(ParameterMap{{"x", 1.5}}, DifficultyScheme::kThreeLevel).labels.at("x") ==
        DifficultyRequest{DifficultyLevel3::kMedium});
  CHECK_THROWS_AS(normalize_and_label(ParameterMap{}), Error);
  CHECK_THROWS_AS(normalize_and_label(ParameterMap{{"x", NAN}}), Error);
}

TEST_CASE("labels follow raw-score order end to end") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ParameterMap truth;
    std::vector<SyntheticLearner> learners;
    for (int j = 0; j < 40; ++j) truth["i" + std::to_string(100 + j)] = keyed_normal(seed, "b", std::to_string(j));
    for (int i = 0; i < 5; ++i) learners.push_back({"l" + std::to_string(i), 2.0 - i, seed});
    const ResponseMatrix m = simulate_responses(learners, truth);
    const auto cal = calibrate(m);
    const Eigen::VectorXi raw = m.as<int>().colwise().sum().transpose();
    for (Eigen::Index a = 0; a < m.cols(); ++a) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const auto la = cal.labels.at(m.question_ids()[a]), lc = cal.labels.at(m.question_ids()[c]);
        if (raw(a) > raw(c)) CHECK(la <= lc);
        if (raw(a) == raw(c)) CHECK(la == lc);
      }
    }
  }
}

TEST_CASE("calibration files round-trip and fit reports add up") {
  const auto dir = oracle::scratch("calibration");
  std::mt19937_64 rng(2);
  const ResponseMatrix m = random_matrix(rng, 6, 8);
  const auto cal = calibrate(m);
  save_calibration(cal, dir / "c.json");
  const auto back = load_calibration(dir / "c.json");
  CHECK(back.difficulties == cal.difficulties);
  CHECK(back.abilities == cal.abilities);
  CHECK(back.normalized == cal.normalized);
  CHECK(back.labels == cal.labels);
  CHECK(back.quadrature.weights == cal.quadrature.weights);
  CHECK(back.log_likelihood == cal.log_likelihood);

  const auto fit = simulate_fit_report(m, cal);
  REQUIRE(fit.items.size() == 8);
  double joint = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double b = cal.difficulties.at(m.question_ids()[j]);
    double expected = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double p = oracle::logistic(cal.abilities.at(m.respondents()[i]) - b);
      expected += p;
      joint += std::log(m.cells()(i, j) ? p : 1.0 - p);
    }
    CHECK(fit.items[static_cast<std::size_t>(j)].expected == doctest::Approx(expected));
  }
  CHECK(fit.log_likelihood == doctest::Approx(joint));
  save_fit_report_csv(fit, dir / "fit.csv");
  CHECK(std::filesystem::file_size(dir / "fit.csv") > 0);
}
