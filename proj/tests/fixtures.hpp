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

// Fixtures shared by the unit tests and the acceptance run.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qgforge/responses.hpp"

namespace fixture {

struct ScoreCase {
  const char* truth;
  const char* candidate;
  int expected;
};

inline constexpr ScoreCase kScoreCases[] = {
    {"the cat sat", "the cat sat", 1},          // exact
    {"The Cat sat.", "the cat sat", 1},         // exact after normalization
    {"the cat sat", "the cat", 1},              // F1 0.8
    {"the cat sat", "cat", 1},                  // F1 exactly 0.5
    {"the cat sat on", "cat", 0},               // F1 0.4
    {"the cat sat", "dog", 0},                  // disjoint
    {"the cat sat", "", 0},                     // empty candidate
    {"", "", 1},                                // both empty: exact
    {"under the old bridge", "the bridge", 1},  // F1 2/3
    {"under the old bridge", "bridge", 0},      // F1 0.4
    {"a b c d", "a b", 1},                      // F1 2/3
    {"a b c d e f", "a b", 1},                  // F1 0.5
    {"a b c d e f g", "a b", 0},                // F1 4/9
    {"a b", "b a", 1},                          // F1 0.5
    {"a b c", "c b a", 0},                      // F1 1/3
    {"fox", "the quick fox", 1},                // F1 0.5
    {"fox", "the quick brown fox", 0},          // F1 0.4
    {"in the forest", "In the forest!", 1},     // exact after normalization
    {"in the forest", "forest in the", 1},      // F1 2/3
    {"seven dwarfs", "seven", 1},               // F1 2/3
};

// Rows r0.., columns q0.. from a nested 0/1 vector.
inline qgforge::ResponseMatrix to_matrix(const std::vector<std::vector<int>>& y) {
  qgforge::ResponseMatrix::Cells cells(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(y[0].size()));
  std::vector<std::string> rows, cols;
  for (std::size_t i = 0; i < y.size(); ++i) rows.push_back("r" + std::to_string(i));
  for (std::size_t j = 0; j < y[0].size(); ++j) cols.push_back("q" + std::to_string(j));
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y[0].size(); ++j) {
      cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<std::uint8_t>(y[i][j]);
    }
  }
  return qgforge::ResponseMatrix(rows, cols, cells);
}

}  // namespace fixture
