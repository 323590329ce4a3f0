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
#include <string>
#include <vector>

#include "qgforge/irt/rasch.hpp"
#include "qgforge/labels.hpp"
#include "qgforge/responses.hpp"

namespace qgforge {

using ParameterMap = std::map<std::string, double, std::less<>>;

struct DifficultyEstimates {
  ParameterMap difficulties;
  irt::Quadrature<double> quadrature;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<double> log_likelihood;
};

/// EM marginal maximum likelihood. Non-convergence is reported through
/// `converged`, not thrown. Throws Error for an empty matrix or fewer than two
/// respondents or items.
DifficultyEstimates estimate_difficulties_em(const ResponseMatrix& matrix,
                                             const irt::EmOptions& options = {});

/// MAP ability per respondent given fixed item difficulties.
ParameterMap estimate_abilities_map(const ResponseMatrix& matrix, const ParameterMap& difficulties,
                                    double tol = 1e-6);

struct NormalizedDifficulties {
  ParameterMap normalized;
  std::map<std::string, DifficultyRequest, std::less<>> labels;
};

/// Min-max normalization onto [0, 1] followed by labeling. When the number of
/// distinct values equals the number of labels they are assigned in order;
/// otherwise equal-width bins over [0, 1] are used. A single distinct value
/// gets the middle label. The 3-level scheme regroups the 5-level labels.
NormalizedDifficulties normalize_and_label(const ParameterMap& difficulties,
                                           DifficultyScheme scheme = DifficultyScheme::kFiveLevel);

struct RaschCalibration {
  ParameterMap difficulties;
  ParameterMap abilities;
  ParameterMap normalized;
  std::map<std::string, DifficultyLabel, std::less<>> labels;
  irt::Quadrature<double> quadrature;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  double log_likelihood = 0.0;
};

/// EM difficulties, MAP abilities and 5-level labels in one pass.
RaschCalibration calibrate(const ResponseMatrix& matrix, const irt::EmOptions& options = {});

void save_calibration(const RaschCalibration& calibration, const std::filesystem::path& path);
RaschCalibration load_calibration(const std::filesystem::path& path);

struct ItemFit {
  std::string question_id;
  double observed = 0.0;
  double expected = 0.0;
};

struct FitReport {
  /// Joint log-likelihood at the estimated abilities and difficulties.
  double log_likelihood = 0.0;
  std::vector<ItemFit> items;
};

FitReport simulate_fit_report(const ResponseMatrix& matrix, const RaschCalibration& calibration);

void save_fit_report_csv(const FitReport& report, const std::filesystem::path& path);

}  // namespace qgforge
