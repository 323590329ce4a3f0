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
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qgforge/corpus.hpp"
#include "qgforge/endpoint.hpp"
#include "qgforge/labels.hpp"

namespace qgforge::pipeline {

inline constexpr std::string_view kVersion = "0.1.0";

/// Endpoint value that selects the in-process mock generator and panel.
inline constexpr std::string_view kMockEndpoint = "mock";

/// Corpus value that selects the built-in synthetic corpus. "synthetic:N"
/// asks for N test sections.
inline constexpr std::string_view kSyntheticCorpus = "synthetic";

/// "name" or "name:theta". Theta is required for mock respondents.
struct PanelMember {
  std::string name;
  std::optional<double> theta;
};
PanelMember parse_panel_member(std::string_view spec);

/// Five mock respondents at theta 2, 1, 0, -1, -2.
std::vector<std::string> default_mock_panel();

struct RunConfig {
  std::string corpus;
  std::string endpoint;
  std::vector<std::string> panel;
  DataSetup setup = DataSetup::kNarDifTextQA;
  DifficultyScheme scheme = DifficultyScheme::kFiveLevel;
  SamplingConfig sampling;
  std::uint64_t seed = 7;
  int retries = 3;
  int jobs = 4;
  std::filesystem::path out = "qgforge-out";

  bool mock() const { return endpoint == kMockEndpoint; }
  /// Throws Error on an invalid field.
  void validate() const;
  /// Every field that can change a stage's output; jobs and out are left out.
  nlohmann::ordered_json replay_json() const;
  /// The same fields in the config-file syntax the CLI reads back.
  std::string to_toml() const;
  std::string hash() const;
};

/// Directory name for a setup and scheme, e.g. "nardif" or "nardif-3lvl".
std::string run_label(DataSetup setup, DifficultyScheme scheme);

Corpus load_run_corpus(const RunConfig& config);

struct StageResult {
  std::filesystem::path dir;
  /// Paths relative to `dir`, manifest excluded.
  std::vector<std::filesystem::path> outputs;
};

/// Writes manifest.json and config.toml into `dir`. Inputs are hashed under
/// their logical names; outputs under their paths relative to `dir`.
void write_manifest(const std::filesystem::path& dir, std::string_view stage, const RunConfig& config,
                    const std::map<std::string, std::string>& input_hashes,
                    const std::vector<std::filesystem::path>& outputs);

StageResult cmd_collect(const RunConfig& config);
StageResult cmd_calibrate(const RunConfig& config);
StageResult cmd_augment(const RunConfig& config);
StageResult cmd_export(const RunConfig& config);
StageResult cmd_generate(const RunConfig& config);
StageResult cmd_evaluate(const RunConfig& config);
StageResult cmd_report(const RunConfig& config);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs every stage against the synthetic corpus and mock endpoints under
/// <out>/simulate and checks the end-to-end properties. One line per check
/// goes to `status`.
std::vector<PropertyCheck> cmd_simulate(const RunConfig& config, std::ostream& status);

}  // namespace qgforge::pipeline
