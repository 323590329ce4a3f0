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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qgforge/corpus.hpp"
#include "qgforge/endpoint.hpp"

namespace qgforge {

struct GeneratedPair {
  std::string story_id;
  std::string section_id;
  DataSetup setup = DataSetup::kTextQA;
  std::optional<NarrativeLabel> requested_narrative;
  std::optional<DifficultyRequest> requested_difficulty;
  std::string question;
  std::string answer;
  std::string raw_output;

  PromptControls controls() const { return {requested_narrative, requested_difficulty}; }
  /// Identifies the request that produced the pair within a suite run.
  std::string key() const;

  friend bool operator==(const GeneratedPair&, const GeneratedPair&) = default;
};

/// Splits model text on the first question token and the first answer token
/// after it; both parts are trimmed. The ASCII spellings <QU>/<AN> are
/// accepted when the bracketed tokens are absent. Throws ParseError.
std::pair<std::string, std::string> parse_generated(std::string_view raw);

/// Base URL from the flag when given, else from QGFORGE_ENDPOINT. Throws
/// Error when neither is set.
std::string resolve_endpoint(const std::optional<std::string>& flag);

inline constexpr const char* kEndpointEnvVar = "QGFORGE_ENDPOINT";

struct HttpOptions {
  int connect_timeout_s = 10;
  int read_timeout_s = 300;
};

/// JSON body of a /generate request, byte-for-byte as sent.
std::string generation_request_body(const std::string& prompt, const SamplingConfig& sampling);
/// JSON body of an /answer request, byte-for-byte as sent.
std::string answer_request_body(const std::string& context, const std::string& question);

/// POST {base}/generate.
class HttpGenerationEndpoint final : public GenerationEndpoint {
 public:
  explicit HttpGenerationEndpoint(std::string base_url, HttpOptions options = {});
  std::string generate(const std::string& prompt, const SamplingConfig& sampling) override;

 private:
  std::string host_;
  std::string prefix_;
  HttpOptions options_;
};

/// POST {base}/answer?respondent=<name>. The respondent travels in the query
/// string so the body stays {"context", "question"}.
class HttpAnsweringEndpoint final : public AnsweringEndpoint {
 public:
  explicit HttpAnsweringEndpoint(std::string base_url, HttpOptions options = {});
  std::string answer(const std::string& respondent, const std::string& context,
                     const std::string& question) override;

 private:
  std::string host_;
  std::string prefix_;
  HttpOptions options_;
};

struct GenerationOptions {
  /// Model calls per request whose output must parse, including the first.
  int parse_attempts = 3;
  /// Attempts for transient endpoint failures, including the first.
  int endpoint_attempts = 3;
  int retry_delay_ms = 200;
};

/// Renders the prompt, calls the endpoint and parses the reply. Throws Error
/// when the controls do not fit the setup, EndpointError on endpoint failure,
/// and ParseError (with the last raw output) when every attempt is unparseable.
GeneratedPair generate_for_section(const Section& section, DataSetup setup, const PromptControls& controls,
                                   GenerationEndpoint& endpoint, const SamplingConfig& sampling,
                                   const GenerationOptions& options = {});

struct GenerationRequest {
  const Section* section = nullptr;
  PromptControls controls;
};

/// Requests a suite issues for the test split, ordered by section then
/// difficulty. Difficulty-bearing setups ask once per level; the joint setup
/// cycles through the section's narratives by level. TEXT_QA asks once per
/// section and NAR_TEXT_QA once per narrative present in the section.
std::vector<GenerationRequest> plan_generation(std::span<const Section> sections, DataSetup setup,
                                               DifficultyScheme scheme);

struct SuiteOptions {
  DifficultyScheme scheme = DifficultyScheme::kFiveLevel;
  int jobs = 4;
  GenerationOptions generation;
  /// Pairs already present here are not requested again.
  std::optional<std::filesystem::path> persist_path;
};

std::vector<GeneratedPair> run_generation_suite(const Corpus& corpus, DataSetup setup, GenerationEndpoint& endpoint,
                                                const SamplingConfig& sampling, const SuiteOptions& options = {});

std::vector<GeneratedPair> load_generated(const std::filesystem::path& path);
void save_generated(std::span<const GeneratedPair> pairs, const std::filesystem::path& path);

}  // namespace qgforge
