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
#include <string_view>
#include <vector>

namespace qgforge {

/// Lowercased tokens with ASCII punctuation removed; never contains empty
/// tokens. Non-ASCII bytes are kept as-is.
using TokenSeq = std::vector<std::string>;

TokenSeq tokenize(std::string_view text);

/// Length of the longest common subsequence of two token sequences.
std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

/// LCS-based F1 over tokens. Zero when either side is empty or nothing matches.
double rouge_l_f1(std::string_view reference, std::string_view candidate);
double rouge_l_f1(const TokenSeq& reference, const TokenSeq& candidate);

/// 1 when both sides tokenize identically.
int exact_match(std::string_view reference, std::string_view candidate);

enum class PincMode {
  kAverage,      // mean novelty over n = 1..max_n
  kHighestOnly,  // novelty of max_n-grams only
};

/// Fraction of the generated text's distinct n-grams absent from the source.
/// Levels where `generated` has no n-grams are skipped; 0 when none remain.
/// Throws std::invalid_argument when max_n < 1.
double pinc(std::string_view source, std::string_view generated, int max_n = 3,
            PincMode mode = PincMode::kAverage);

enum class Interrogative { kWhat, kWho, kWhy, kHow, kWhere, kWhen, kWhich, kOther };

inline constexpr Interrogative kInterrogatives[] = {
    Interrogative::kWhat,  Interrogative::kWho,  Interrogative::kWhy,   Interrogative::kHow,
    Interrogative::kWhere, Interrogative::kWhen, Interrogative::kWhich, Interrogative::kOther};

Interrogative initial_interrogative(std::string_view question);
std::string_view to_string(Interrogative word);

std::size_t word_count(std::string_view text);

}  // namespace qgforge
