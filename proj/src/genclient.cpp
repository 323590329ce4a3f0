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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "qgforge/genclient.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "qgforge/detail/parallel.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/io.hpp"

namespace qgforge {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void SamplingConfig::validate() const {
  if (top_k < 1) throw Error(fmt::format("top_k must be at least 1, got {}", top_k));
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(fmt::format("top_p must lie in (0, 1], got {}", top_p));
  if (!(temperature > 0.0)) throw Error(fmt::format("temperature must be positive, got {}", temperature));
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string difficulty_key(const DifficultyRequest& d) {
  return fmt::format("{}:{}", level_count(scheme_of(d)), to_string(d));
}

// Splits "http://host:port/prefix" into the origin and the path prefix.
std::pair<std::string, std::string> split_base(const std::string& base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(fmt::format("endpoint '{}' must start with http:// or https://", base));
  }
  const std::string scheme = base.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(fmt::format("endpoint '{}' has unsupported scheme '{}'", base, scheme));
  }
  const auto path_start = base.find('/', scheme_end + 3);
  std::string host = path_start == std::string::npos ? base : base.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? std::string{} : base.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {std::move(host), std::move(prefix)};
}

// Issues one JSON POST and returns the parsed reply object.
nlohmann::json post_json(const std::string& host, const std::string& path, const std::string& body,
                         const HttpOptions& options) {
  httplib::Client client(host);
  client.set_connection_timeout(options.connect_timeout_s, 0);
  client.set_read_timeout(options.read_timeout_s, 0);
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    throw EndpointError(fmt::format("POST {}{} failed: {}", host, path, httplib::to_string(res.error())), true);
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw EndpointError(fmt::format("POST {}{} returned {} with a non-JSON body", host, path, res->status),
                        res->status >= 500);
  }
  if (res->status != 200) {
    std::string message = reply.is_object() && reply.contains("error") && reply["error"].is_string()
                              ? reply["error"].get<std::string>()
                              : res->body;
    throw EndpointError(fmt::format("POST {}{} returned {}: {}", host, path, res->status, message),
                        res->status >= 500 || res->status == 429);
  }
  if (!reply.is_object()) {
    throw EndpointError(fmt::format("POST {}{} returned a non-object reply", host, path), false);
  }
  return reply;
}

ordered_json pair_json(const GeneratedPair& p) {
  ordered_json j;
  j["story_id"] = p.story_id;
  j["section_id"] = p.section_id;
  j["setup"] = to_string(p.setup);
  if (p.requested_narrative) j["narrative"] = to_string(*p.requested_narrative);
  if (p.requested_difficulty) {
    j["difficulty"] = to_string(*p.requested_difficulty);
    j["levels"] = level_count(scheme_of(*p.requested_difficulty));
  }
  j["question"] = p.question;
  j["answer"] = p.answer;
  j["raw_output"] = p.raw_output;
  return j;
}

GeneratedPair pair_from_json(const nlohmann::json& j) {
  GeneratedPair p;
  p.story_id = j.at("story_id").get<std::string>();
  p.section_id = j.at("section_id").get<std::string>();
  p.setup = parse_setup(j.at("setup").get<std::string>());
  if (j.contains("narrative")) p.requested_narrative = parse_narrative(j.at("narrative").get<std::string>());
  if (j.contains("difficulty")) {
    p.requested_difficulty =
        parse_difficulty_request(j.at("difficulty").get<std::string>(), parse_scheme(j.value("levels", 5)));
  }
  p.question = j.at("question").get<std::string>();
  p.answer = j.at("answer").get<std::string>();
  p.raw_output = j.value("raw_output", std::string{});
  return p;
}

}  // namespace

std::string GeneratedPair::key() const {
  return fmt::format("{}|{}|{}|{}|{}", to_string(setup), story_id, section_id,
                     requested_narrative ? to_string(*requested_narrative) : "-",
                     requested_difficulty ? difficulty_key(*requested_difficulty) : "-");
}

std::pair<std::string, std::string> parse_generated(std::string_view raw) {
  auto try_split = [&](std::string_view qtok,
                       std::string_view atok) -> std::optional<std::pair<std::string, std::string>> {
    const auto q = raw.find(qtok);
    if (q == std::string_view::npos) return std::nullopt;
    const auto a = raw.find(atok, q + qtok.size());
    if (a == std::string_view::npos) {
      throw ParseError(fmt::format("model output has {} but no {} after it", qtok, atok), std::string(raw));
    }
    return std::make_pair(trim(raw.substr(q + qtok.size(), a - q - qtok.size())), trim(raw.substr(a + atok.size())));
  };
  auto parts = try_split(kQuestionToken, kAnswerToken);
  if (!parts) parts = try_split("<QU>", "<AN>");
  if (!parts) throw ParseError("model output has no question token", std::string(raw));
  if (parts->first.empty()) throw ParseError("model output has an empty question", std::string(raw));
  if (parts->second.empty()) throw ParseError("model output has an empty answer", std::string(raw));
  return *parts;
}

std::string resolve_endpoint(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kEndpointEnvVar); env != nullptr && *env != '\0') return env;
  throw Error(fmt::format("no endpoint configured: pass --endpoint or set {}", kEndpointEnvVar));
}

std::string generation_request_body(const std::string& prompt, const SamplingConfig& sampling) {
  ordered_json body;
  body["prompt"] = prompt;
  body["sampling"] = ordered_json{{"top_k", sampling.top_k}, {"top_p", sampling.top_p},
                                  {"temperature", sampling.temperature}};
  return body.dump();
}

std::string answer_request_body(const std::string& context, const std::string& question) {
  ordered_json body;
  body["context"] = context;
  body["question"] = question;
  return body.dump();
}

HttpGenerationEndpoint::HttpGenerationEndpoint(std::string base_url, HttpOptions options) : options_(options) {
  std::tie(host_, prefix_) = split_base(base_url);
}

std::string HttpGenerationEndpoint::generate(const std::string& prompt, const SamplingConfig& sampling) {
  const auto reply = post_json(host_, prefix_ + "/generate", generation_request_body(prompt, sampling), options_);
  if (!reply.contains("raw") || !reply["raw"].is_string()) {
    throw EndpointError("generation reply lacks a string field 'raw'", false);
  }
  return reply["raw"].get<std::string>();
}

HttpAnsweringEndpoint::HttpAnsweringEndpoint(std::string base_url, HttpOptions options) : options_(options) {
  std::tie(host_, prefix_) = split_base(base_url);
}

std::string HttpAnsweringEndpoint::answer(const std::string& respondent, const std::string& context,
                                          const std::string& question) {
  const std::string path = prefix_ + "/answer?respondent=" + httplib::detail::encode_query_param(respondent);
  const auto reply = post_json(host_, path, answer_request_body(context, question), options_);
  if (!reply.contains("answer") || !reply["answer"].is_string()) {
    throw EndpointError("answer reply lacks a string field 'answer'", false);
  }
  return reply["answer"].get<std::string>();
}

GeneratedPair generate_for_section(const Section& section, DataSetup setup, const PromptControls& controls,
                                   GenerationEndpoint& endpoint, const SamplingConfig& sampling,
                                   const GenerationOptions& options) {
  sampling.validate();
  const std::string prompt = render_prompt(setup, controls, section.text);
  GeneratedPair pair;
  pair.story_id = section.story_id;
  pair.section_id = section.section_id;
  pair.setup = setup;
  if (uses_narrative(setup)) pair.requested_narrative = controls.narrative;
  if (uses_difficulty(setup)) pair.requested_difficulty = controls.difficulty;

  const int parse_attempts = std::max(options.parse_attempts, 1);
  const int endpoint_attempts = std::max(options.endpoint_attempts, 1);
  std::string raw;
  for (int attempt = 1; attempt <= parse_attempts; ++attempt) {
    for (int call = 1;; ++call) {
      try {
        raw = endpoint.generate(prompt, sampling);
        break;
      } catch (const EndpointError& e) {
        if (!e.transient() || call >= endpoint_attempts) {
          throw EndpointError(
              fmt::format("generation failed for section {} after {} call(s): {}", section.key(), call, e.what()),
              false);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(options.retry_delay_ms * call));
      }
    }
    try {
      std::tie(pair.question, pair.answer) = parse_generated(raw);
      pair.raw_output = raw;
      return pair;
    } catch (const ParseError&) {
      if (attempt == parse_attempts) break;
    }
  }
  throw ParseError(fmt::format("section {}: no parseable output after {} attempt(s); last output: {}",
                               section.key(), parse_attempts, raw),
                   raw);
}

std::vector<GenerationRequest> plan_generation(std::span<const Section> sections, DataSetup setup,
                                               DifficultyScheme scheme) {
  std::vector<GenerationRequest> plan;
  const auto levels = difficulty_levels(scheme);
  for (const Section& s : sections) {
    switch (setup) {
      case DataSetup::kTextQA:
        plan.push_back({&s, {}});
        break;
      case DataSetup::kNarTextQA:
        for (NarrativeLabel n : s.narratives) plan.push_back({&s, {n, std::nullopt}});
        break;
      case DataSetup::kDifTextQA:
        for (const auto& d : levels) plan.push_back({&s, {std::nullopt, d}});
        break;
      case DataSetup::kNarDifTextQA:
        if (s.narratives.empty()) throw Error(fmt::format("section {} has no narrative labels", s.key()));
        for (std::size_t i = 0; i < levels.size(); ++i) {
          plan.push_back({&s, {s.narratives[i % s.narratives.size()], levels[i]}});
        }
        break;
    }
  }
  return plan;
}

std::vector<GeneratedPair> run_generation_suite(const Corpus& corpus, DataSetup setup, GenerationEndpoint& endpoint,
                                                const SamplingConfig& sampling, const SuiteOptions& options) {
  sampling.validate();
  const auto sections = corpus.sections(Split::kTest);
  if (sections.empty()) throw Error("the corpus has no test sections to generate for");
  const auto plan = plan_generation(sections, setup, options.scheme);

  auto key_of = [&](const GenerationRequest& r) {
    GeneratedPair probe;
    probe.story_id = r.section->story_id;
    probe.section_id = r.section->section_id;
    probe.setup = setup;
    if (uses_narrative(setup)) probe.requested_narrative = r.controls.narrative;
    if (uses_difficulty(setup)) probe.requested_difficulty = r.controls.difficulty;
    return probe.key();
  };

  std::map<std::string, GeneratedPair> done;
  if (options.persist_path && fs::exists(*options.persist_path)) {
    for (auto& p : load_generated(*options.persist_path)) done.emplace(p.key(), std::move(p));
  }
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!done.contains(key_of(plan[i]))) pending.push_back(i);
  }

  std::mutex mutex;
  detail::parallel_for(pending.size(), options.jobs, [&](std::size_t t) {
    const GenerationRequest& req = plan[pending[t]];
    GeneratedPair pair = generate_for_section(*req.section, setup, req.controls, endpoint, sampling, options.generation);
    std::lock_guard lock(mutex);
    if (options.persist_path) io::append_line(*options.persist_path, pair_json(pair).dump());
    done.emplace(pair.key(), std::move(pair));
  });

  std::vector<GeneratedPair> out;
  out.reserve(plan.size());
  for (const auto& req : plan) out.push_back(done.at(key_of(req)));
  if (options.persist_path) save_generated(out, *options.persist_path);
  return out;
}

std::vector<GeneratedPair> load_generated(const fs::path& path) {
  std::vector<GeneratedPair> out;
  for (const auto& j : io::read_jsonl(path)) {
    try {
      out.push_back(pair_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}: malformed generated pair: {}", path.string(), e.what()));
    }
  }
  return out;
}

void save_generated(std::span<const GeneratedPair> pairs, const fs::path& path) {
  std::string out;
  for (const auto& p : pairs) out += pair_json(p).dump() + "\n";
  io::write_file_atomic(path, out);
}

}  // namespace qgforge
