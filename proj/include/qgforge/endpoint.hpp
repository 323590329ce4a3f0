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

#include <string>

namespace qgforge {

/// Decoding parameters forwarded to the generation server.
struct SamplingConfig {
  int top_k = 50;
  double top_p = 0.9;
  double temperature = 1.2;

  /// Throws Error when top_k < 1, top_p outside (0, 1] or temperature <= 0.
  void validate() const;
};

/// Something that turns a control prompt into raw model text.
class GenerationEndpoint {
 public:
  virtual ~GenerationEndpoint() = default;
  virtual std::string generate(const std::string& prompt, const SamplingConfig& sampling) = 0;
};

/// Something that answers a question about a passage on behalf of one panel
/// respondent. Implementations must be safe to call concurrently.
class AnsweringEndpoint {
 public:
  virtual ~AnsweringEndpoint() = default;
  virtual std::string answer(const std::string& respondent, const std::string& context,
                             const std::string& question) = 0;
};

}  // namespace qgforge
