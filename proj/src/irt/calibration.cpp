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

#include "qgforge/irt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "qgforge/errors.hpp"
#include "qgforge/io.hpp"

namespace qgforge {

using nlohmann::ordered_json;

DifficultyEstimates estimate_difficulties_em(const ResponseMatrix& matrix,
                                             const irt::EmOptions& options) {
  if (matrix.empty()) throw Error("cannot calibrate an empty response matrix");
  if (matrix.rows() < 2 || matrix.cols() < 2) {
    throw Error(fmt::format("calibration needs at least 2 respondents and 2 items, got {}x{}",
                            matrix.rows(), matrix.cols()));
  }
  const auto fit = irt::rasch_em(matrix.as<double>(), options);
  DifficultyEstimates out;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    out.difficulties.emplace(matrix.question_ids()[j], fit.difficulties(j));
  }
  out.quadrature = fit.quadrature;
  out.iterations = fit.iterations;
  out.final_delta = fit.final_delta;
  out.converged = fit.converged;
  out.log_likelihood = fit.log_likelihood;
  return out;
}

ParameterMap estimate_abilities_map(const ResponseMatrix& matrix, const ParameterMap& difficulties,
                                    double tol) {
  Eigen::VectorXd b(matrix.cols());
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    const auto& qid = matrix.question_ids()[j];
    auto it = difficulties.find(qid);
    if (it == difficulties.end()) throw Error(fmt::format("no difficulty for item '{}'", qid));
    if (!std::isfinite(it->second)) throw Error(fmt::format("non-finite difficulty for item '{}'", qid));
    b(j) = it->second;
  }
  const Eigen::MatrixXd y = matrix.as<double>();
  ParameterMap abilities;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    abilities.emplace(matrix.respondents()[i], irt::rasch_map_ability(y.row(i), b, tol));
  }
  return abilities;
}

NormalizedDifficulties normalize_and_label(const ParameterMap& difficulties,
                                           DifficultyScheme scheme) {
  if (difficulties.empty()) throw Error("cannot normalize an empty difficulty map");
  std::set<double> distinct;
  for (const auto& [qid, b] : difficulties) {
    if (!std::isfinite(b)) throw Error(fmt::format("non-finite difficulty for item '{}'", qid));
    distinct.insert(b);
  }
  constexpr int kLabels = static_cast<int>(kDifficultyLabels.size());
  const double lo = *distinct.begin();
  const double range = *distinct.rbegin() - lo;
  const std::vector<double> ranked(distinct.begin(), distinct.end());

  NormalizedDifficulties out;
  for (const auto& [qid, b] : difficulties) {
    double value = 0.5;
    int index = kLabels / 2;
    if (distinct.size() > 1) {
      value = (b - lo) / range;
      if (static_cast<int>(distinct.size()) == kLabels) {
        index = static_cast<int>(std::lower_bound(ranked.begin(), ranked.end(), b) - ranked.begin());
      } else {
        index = std::min(static_cast<int>(std::floor(value * kLabels)), kLabels - 1);
      }
    }
    const DifficultyLabel label = kDifficultyLabels[static_cast<std::size_t>(index)];
    out.normalized.emplace(qid, value);
    if (scheme == DifficultyScheme::kFiveLevel) {
      out.labels.emplace(qid, label);
    } else {
      out.labels.emplace(qid, regroup(label));
    }
  }
  return out;
}

RaschCalibration calibrate(const ResponseMatrix& matrix, const irt::EmOptions& options) {
  DifficultyEstimates em = estimate_difficulties_em(matrix, options);
  RaschCalibration cal;
  cal.abilities = estimate_abilities_map(matrix, em.difficulties);
  const NormalizedDifficulties norm = normalize_and_label(em.difficulties);
  cal.normalized = norm.normalized;
  for (const auto& [qid, label] : norm.labels) cal.labels.emplace(qid, std::get<DifficultyLabel>(label));
  cal.difficulties = std::move(em.difficulties);
  cal.quadrature = std::move(em.quadrature);
  cal.iterations = em.iterations;
  cal.final_delta = em.final_delta;
  cal.converged = em.converged;
  cal.log_likelihood = em.log_likelihood.back();
  return cal;
}

void save_calibration(const RaschCalibration& cal, const std::filesystem::path& path) {
  ordered_json doc;
  ordered_json items = ordered_json::array();
  for (const auto& [qid, b] : cal.difficulties) {
    items.push_back({{"question_id", qid},
                     {"b", b},
                     {"normalized", cal.normalized.at(qid)},
                     {"label", to_string(cal.labels.at(qid))}});
  }
  ordered_json respondents = ordered_json::array();
  for (const auto& [name, theta] : cal.abilities) {
    respondents.push_back({{"name", name}, {"theta", theta}});
  }
  std::vector<double> nodes(cal.quadrature.nodes.data(),
                            cal.quadrature.nodes.data() + cal.quadrature.nodes.size());
  std::vector<double> weights(cal.quadrature.weights.data(),
                              cal.quadrature.weights.data() + cal.quadrature.weights.size());
  doc["items"] = std::move(items);
  doc["respondents"] = std::move(respondents);
  doc["quadrature"] = {{"nodes", nodes}, {"weights", weights}};
  doc["convergence"] = {{"iterations", cal.iterations},
                        {"final_delta", cal.final_delta},
                        {"converged", cal.converged},
                        {"log_likelihood", cal.log_likelihood}};
  io::write_file_atomic(path, doc.dump(2) + "\n");
}

RaschCalibration load_calibration(const std::filesystem::path& path) {
  RaschCalibration cal;
  try {
    const auto doc = nlohmann::json::parse(io::read_file(path));
    for (const auto& item : doc.at("items")) {
      const auto qid = item.at("question_id").get<std::string>();
      cal.difficulties.emplace(qid, item.at("b").get<double>());
      cal.normalized.emplace(qid, item.at("normalized").get<double>());
      cal.labels.emplace(qid, parse_difficulty(item.at("label").get<std::string>()));
    }
    for (const auto& r : doc.at("respondents")) {
      cal.abilities.emplace(r.at("name").get<std::string>(), r.at("theta").get<double>());
    }
    const auto nodes = doc.at("quadrature").at("nodes").get<std::vector<double>>();
    const auto weights = doc.at("quadrature").at("weights").get<std::vector<double>>();
    cal.quadrature.nodes = Eigen::Map<const Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
    cal.quadrature.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    const auto& conv = doc.at("convergence");
    cal.iterations = conv.at("iterations").get<int>();
    cal.final_delta = conv.at("final_delta").get<double>();
    cal.converged = conv.at("converged").get<bool>();
    cal.log_likelihood = conv.at("log_likelihood").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: malformed calibration file: {}", path.string(), e.what()));
  }
  return cal;
}

FitReport simulate_fit_report(const ResponseMatrix& matrix, const RaschCalibration& calibration) {
  std::vector<double> theta(static_cast<std::size_t>(matrix.rows()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const auto& name = matrix.respondents()[i];
    auto it = calibration.abilities.find(name);
    if (it == calibration.abilities.end()) {
      throw Error(fmt::format("calibration has no ability for respondent '{}'", name));
    }
    theta[static_cast<std::size_t>(i)] = it->second;
  }
  FitReport report;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    const auto& qid = matrix.question_ids()[j];
    auto it = calibration.difficulties.find(qid);
    if (it == calibration.difficulties.end()) {
      throw Error(fmt::format("calibration has no difficulty for item '{}'", qid));
    }
    ItemFit fit{qid, 0.0, 0.0};
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
      const double t = theta[static_cast<std::size_t>(i)];
      const bool correct = matrix.cells()(i, j) != 0;
      fit.observed += correct ? 1.0 : 0.0;
      fit.expected += irt::rasch_prob(t, it->second);
      report.log_likelihood += irt::log_sigmoid(correct ? t - it->second : it->second - t);
    }
    report.items.push_back(std::move(fit));
  }
  return report;
}

void save_fit_report_csv(const FitReport& report, const std::filesystem::path& path) {
  std::string out = "question_id,observed,expected\n";
  for (const auto& item : report.items) {
    out += fmt::format("{},{},{}\n", io::escape_delimited(item.question_id), io::fixed(item.observed, 0),
                       io::fixed(item.expected, 6));
  }
  out += fmt::format("# log_likelihood,{}\n", io::fixed(report.log_likelihood, 6));
  io::write_file_atomic(path, out);
}

}  // namespace qgforge
