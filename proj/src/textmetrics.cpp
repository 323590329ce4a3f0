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

#include "qgforge/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <stdexcept>

namespace qgforge {

TokenSeq tokenize(std::string_view text) {
  TokenSeq tokens;
  std::string current;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

// Exact 64-bit token keys: up to 7 bytes are packed with the length, longer
// tokens are numbered by first occurrence across both sequences.
std::vector<std::uint64_t> token_keys(const TokenSeq& a, const TokenSeq& b) {
  constexpr std::uint64_t kNumbered = std::uint64_t{1} << 63;
  std::vector<std::uint64_t> keys;
  keys.reserve(a.size() + b.size());
  std::vector<const std::string*> long_tokens;
  auto key = [&](const std::string& t) -> std::uint64_t {
    if (t.size() <= 7) {
      std::uint64_t k = static_cast<std::uint64_t>(t.size()) << 56;
      for (std::size_t i = 0; i < t.size(); ++i) {
        k |= static_cast<std::uint64_t>(static_cast<unsigned char>(t[i])) << (8 * i);
      }
      return k;
    }
    for (std::size_t n = 0; n < long_tokens.size(); ++n) {
      if (*long_tokens[n] == t) return kNumbered | n;
    }
    long_tokens.push_back(&t);
    return kNumbered | (long_tokens.size() - 1);
  };
  for (const auto& t : a) keys.push_back(key(t));
  for (const auto& t : b) keys.push_back(key(t));
  return keys;
}

}  // namespace

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty()) return 0;
  const auto keys = token_keys(a, b);
  const std::uint64_t* kb = keys.data() + a.size();
  // One DP row over b; `diag` holds the previous row's value at j - 1. On a
  // match diag + 1 bounds both neighbours, so the cell is a plain max.
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::uint64_t ka = keys[i];
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t hit = static_cast<std::size_t>(ka == kb[j - 1]) * (diag + 1);
      row[j] = std::max({up, row[j - 1], hit});
      diag = up;
    }
  }
  return row[b.size()];
}

double rouge_l_f1(const TokenSeq& reference, const TokenSeq& candidate) {
  const std::size_t lcs = lcs_length(reference, candidate);
  if (lcs == 0) return 0.0;
  const double precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
  const double recall = static_cast<double>(lcs) / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

double rouge_l_f1(std::string_view reference, std::string_view candidate) {
  return rouge_l_f1(tokenize(reference), tokenize(candidate));
}

int exact_match(std::string_view reference, std::string_view candidate) {
  return tokenize(reference) == tokenize(candidate) ? 1 : 0;
}

namespace {

std::set<std::vector<std::string>> ngrams(const TokenSeq& tokens, std::size_t n) {
  std::set<std::vector<std::string>> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

}  // namespace

double pinc(std::string_view source, std::string_view generated, int max_n, PincMode mode) {
  if (max_n < 1) throw std::invalid_argument("pinc: max_n must be at least 1");
  const TokenSeq src = tokenize(source);
  const TokenSeq gen = tokenize(generated);
  const int first = mode == PincMode::kAverage ? 1 : max_n;
  double total = 0.0;
  int levels = 0;
  for (int n = first; n <= max_n; ++n) {
    const auto gen_ngrams = ngrams(gen, static_cast<std::size_t>(n));
    if (gen_ngrams.empty()) continue;
    const auto src_ngrams = ngrams(src, static_cast<std::size_t>(n));
    std::size_t shared = 0;
    for (const auto& g : gen_ngrams) shared += src_ngrams.count(g);
    total += 1.0 - static_cast<double>(shared) / static_cast<double>(gen_ngrams.size());
    ++levels;
  }
  return levels == 0 ? 0.0 : total / levels;
}

std::string_view to_string(Interrogative word) {
  switch (word) {
    case Interrogative::kWhat: return "what";
    case Interrogative::kWho: return "who";
    case Interrogative::kWhy: return "why";
    case Interrogative::kHow: return "how";
    case Interrogative::kWhere: return "where";
    case Interrogative::kWhen: return "when";
    case Interrogative::kWhich: return "which";
    case Interrogative::kOther: return "other";
  }
  return "other";
}

Interrogative initial_interrogative(std::string_view question) {
  const TokenSeq tokens = tokenize(question);
  if (tokens.empty()) return Interrogative::kOther;
  for (Interrogative word : kInterrogatives) {
    if (word != Interrogative::kOther && tokens.front() == to_string(word)) return word;
  }
  return Interrogative::kOther;
}

std::size_t word_count(std::string_view text) { return tokenize(text).size(); }

}  // namespace qgforge
