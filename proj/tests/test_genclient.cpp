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
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "oracles.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/genclient.hpp"
#include "qgforge/io.hpp"
#include "qgforge/simlearner.hpp"
#include "qgforge/textmetrics.hpp"

// After Eigen: resolv.h defines a macro that collides with Eigen internals.
#include <httplib.h>

using namespace qgforge;

namespace {

// Reference server for the /generate and /answer wire protocol, backed by the
// mock generator. Used as the contract counterpart of the HTTP clients.
class ContractServer {
 public:
  explicit ContractServer(const Corpus& corpus) : generator_(DifficultyScheme::kFiveLevel, &corpus) {
    for (const char* prefix : {"", "/api"}) {
      server_.Post(std::string(prefix) + "/generate", [this](const httplib::Request& req, httplib::Response& res) {
        on_generate(req, res);
      });
      server_.Post(std::string(prefix) + "/answer", [this](const httplib::Request& req, httplib::Response& res) {
        on_answer(req, res);
      });
    }
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ContractServer() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> fail_next{0};
  std::atomic<int> status_for_failures{503};
  std::string last_body() {
    std::lock_guard lock(mutex_);
    return last_body_;
  }
  std::string last_respondent() {
    std::lock_guard lock(mutex_);
    return last_respondent_;
  }

 private:
  static void error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
  }

  bool should_fail(httplib::Response& res) {
    if (fail_next.load() > 0) {
      --fail_next;
      error(res, status_for_failures.load(), "temporarily unavailable");
      return true;
    }
    return false;
  }

  void on_generate(const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mutex_);
      last_body_ = req.body;
    }
    if (should_fail(res)) return;
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("prompt") || !body["prompt"].is_string() ||
        !body.contains("sampling") || !body["sampling"].is_object()) {
      return error(res, 400, "malformed request body");
    }
    try {
      const auto& s = body["sampling"];
      SamplingConfig sampling{s.at("top_k").get<int>(), s.at("top_p").get<double>(), s.at("temperature").get<double>()};
      const std::string raw = generator_.generate(body["prompt"].get<std::string>(), sampling);
      res.set_content(nlohmann::json{{"raw", raw}}.dump(), "application/json");
    } catch (const std::exception& e) {
      error(res, 422, e.what());
    }
  }

  void on_answer(const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mutex_);
      last_body_ = req.body;
      last_respondent_ = req.get_param_value("respondent");
    }
    if (should_fail(res)) return;
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("context") || !body["context"].is_string() ||
        !body.contains("question") || !body["question"].is_string()) {
      return error(res, 400, "malformed request body");
    }
    if (!req.has_param("respondent")) return error(res, 400, "missing respondent");
    // The last word of the context stands in for an extracted span.
    const auto words = tokenize(body["context"].get<std::string>());
    res.set_content(nlohmann::json{{"answer", words.empty() ? std::string("none") : words.back()}}.dump(),
                    "application/json");
  }

  MockGenerator generator_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mutex_;
  std::string last_body_;
  std::string last_respondent_;
};

// Protocol fixtures any conforming server must pass.
void run_contract_fixtures(const std::string& base, const Section& section) {
  HttpGenerationEndpoint gen(base);
  const std::string prompt = render_prompt(
      DataSetup::kNarDifTextQA, {NarrativeLabel::kCausal, DifficultyRequest{DifficultyLabel::kHard}}, section.text);
  const std::string raw = gen.generate(prompt, SamplingConfig{});
  const auto [question, answer] = parse_generated(raw);
  CHECK_FALSE(question.empty());
  CHECK_FALSE(answer.empty());

  HttpAnsweringEndpoint ans(base);
  CHECK_FALSE(ans.answer("reader one", section.text, question).empty());

  const auto [host, path] = [&] {
    const auto slash = base.find('/', base.find("://") + 3);
    return slash == std::string::npos ? std::pair{base, std::string{}}
                                      : std::pair{base.substr(0, slash), base.substr(slash)};
  }();
  httplib::Client client(host);
  for (const char* route : {"/generate", "/answer?respondent=x"}) {
    auto res = client.Post(path + route, "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status >= 400);
    CHECK(res->status < 500);
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    CHECK(reply.is_object());
    CHECK(reply.contains("error"));
  }
}

// Returns a fixed sequence of outputs, then repeats the last one.
class ScriptedGenerator : public GenerationEndpoint {
 public:
  explicit ScriptedGenerator(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}
  std::string generate(const std::string&, const SamplingConfig&) override {
    const std::size_t i = std::min(calls++, outputs_.size() - 1);
    if (outputs_[i] == "TRANSIENT") throw EndpointError("busy", true);
    if (outputs_[i] == "FATAL") throw EndpointError("bad request", false);
    return outputs_[i];
  }
  std::size_t calls = 0;

 private:
  std::vector<std::string> outputs_;
};

// Delegates to the mock generator but fails permanently after `budget` calls.
class BudgetGenerator : public GenerationEndpoint {
 public:
  BudgetGenerator(const Corpus& corpus, int budget) : inner_(DifficultyScheme::kFiveLevel, &corpus), budget_(budget) {}
  std::string generate(const std::string& prompt, const SamplingConfig& s) override {
    if (budget_.fetch_sub(1) <= 0) throw EndpointError("quota exhausted", false);
    ++calls;
    return inner_.generate(prompt, s);
  }
  std::atomic<int> calls{0};

 private:
  MockGenerator inner_;
  std::atomic<int> budget_;
};

Section small_section() {
  return Section{"st", "1", "The fox ran to the river. It drank the cold water. Then it slept.",
                 {NarrativeLabel::kAction, NarrativeLabel::kOutcome}};
}

}  // namespace

TEST_CASE("request bodies are byte-exact") {
  CHECK(generation_request_body("Generate a question-answer pair considering the following text: \"Hi\"",
                                SamplingConfig{50, 0.9, 1.2}) ==
        R"({"prompt":"Generate a question-answer pair considering the following text: \"Hi\"",)"
        R"("sampling":{"top_k":50,"top_p":0.9,"temperature":1.2}})");
  CHECK(answer_request_body("ctx ⟨x⟩", "why?") == R"({"context":"ctx ⟨x⟩","question":"why?"})");
}

TEST_CASE("model output parsing") {
  CHECK(parse_generated("⟨QU⟩ Who ran? ⟨AN⟩ the fox ") == std::pair<std::string, std::string>{"Who ran?", "the fox"});
  CHECK(parse_generated("noise <QU>Who ran?<AN>the fox") ==
        std::pair<std::string, std::string>{"Who ran?", "the fox"});
  CHECK(parse_generated("⟨QU⟩ a <AN> b ⟨AN⟩ c").first == "a <AN> b");
  try {
    parse_generated("⟨QU⟩ Who ran? the fox");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.raw() == "⟨QU⟩ Who ran? the fox");
  }
  CHECK_THROWS_AS(parse_generated("just text"), ParseError);
  CHECK_THROWS_AS(parse_generated("⟨QU⟩ ⟨AN⟩ x"), ParseError);
  CHECK_THROWS_AS(parse_generated("⟨QU⟩ q ⟨AN⟩   "), ParseError);
}

TEST_CASE("endpoint resolution prefers the flag over the environment") {
  ::unsetenv(kEndpointEnvVar);
  CHECK_THROWS_AS(resolve_endpoint(std::nullopt), Error);
  ::setenv(kEndpointEnvVar, "http://env:1", 1);
  CHECK(resolve_endpoint(std::nullopt) == "http://env:1");
  CHECK(resolve_endpoint(std::string("http://flag:2")) == "http://flag:2");
  ::unsetenv(kEndpointEnvVar);
  CHECK_THROWS_AS(HttpGenerationEndpoint("ftp://x"), Error);
  CHECK_THROWS_AS(HttpGenerationEndpoint("localhost:80"), Error);
}

TEST_CASE("sampling configuration is validated") {
  CHECK_NOTHROW(SamplingConfig{}.validate());
  CHECK_THROWS_AS((SamplingConfig{0, 0.9, 1.0}.validate()), Error);
  CHECK_THROWS_AS((SamplingConfig{5, 0.0, 1.0}.validate()), Error);
  CHECK_THROWS_AS((SamplingConfig{5, 1.1, 1.0}.validate()), Error);
  CHECK_THROWS_AS((SamplingConfig{5, 1.0, 0.0}.validate()), Error);
}

TEST_CASE("generation plans follow section then level order") {
  const Corpus c = synthetic_corpus();
  const auto sections = c.sections(Split::kTest);
  REQUIRE(sections.size() == 394);
  CHECK(plan_generation(sections, DataSetup::kNarDifTextQA, DifficultyScheme::kFiveLevel).size() == 1970);
  CHECK(plan_generation(sections, DataSetup::kDifTextQA, DifficultyScheme::kThreeLevel).size() == 1182);
  CHECK(plan_generation(sections, DataSetup::kTextQA, DifficultyScheme::kFiveLevel).size() == 394);
  std::size_t narratives = 0;
  for (const auto& s : sections) narratives += s.narratives.size();
  CHECK(plan_generation(sections, DataSetup::kNarTextQA, DifficultyScheme::kFiveLevel).size() == narratives);

  const std::vector<Section> one{small_section()};
  const auto plan = plan_generation(one, DataSetup::kNarDifTextQA, DifficultyScheme::kThreeLevel);
  REQUIRE(plan.size() == 3);
  CHECK(plan[0].controls.narrative == NarrativeLabel::kAction);
  CHECK(plan[1].controls.narrative == NarrativeLabel::kOutcome);
  CHECK(plan[2].controls.narrative == NarrativeLabel::kAction);
  CHECK(plan[2].controls.difficulty == DifficultyRequest{DifficultyLevel3::kExtreme});
}

TEST_CASE("generate_for_section retries unparseable output and transient failures") {
  const Section s = small_section();
  const PromptControls controls{NarrativeLabel::kAction, DifficultyRequest{DifficultyLabel::kEasy}};
  GenerationOptions fast{3, 3, 0};
  {
    ScriptedGenerator gen({"garbage", "TRANSIENT", "⟨QU⟩ Who? ⟨AN⟩ fox"});
    const auto pair = generate_for_section(s, DataSetup::kNarDifTextQA, controls, gen, {}, fast);
    CHECK(pair.question == "Who?");
    CHECK(pair.raw_output == "⟨QU⟩ Who? ⟨AN⟩ fox");
    CHECK(pair.requested_narrative == NarrativeLabel::kAction);
    CHECK(gen.calls == 3);
  }
  {
    ScriptedGenerator gen({"garbage one", "garbage two", "garbage three"});
    try {
      generate_for_section(s, DataSetup::kTextQA, {}, gen, {}, fast);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.raw() == "garbage three");
    }
    CHECK(gen.calls == 3);
  }
  {
    ScriptedGenerator gen({"FATAL"});
    CHECK_THROWS_AS(generate_for_section(s, DataSetup::kTextQA, {}, gen, {}, fast), EndpointError);
    CHECK(gen.calls == 1);
  }
  {
    ScriptedGenerator gen({"⟨QU⟩ q ⟨AN⟩ a"});
    CHECK_THROWS_AS(generate_for_section(s, DataSetup::kDifTextQA, {}, gen, {}, fast), Error);
    CHECK_THROWS_AS(generate_for_section(s, DataSetup::kTextQA, {}, gen, SamplingConfig{0, 1, 1}, fast), Error);
  }
}

TEST_CASE("generation suites persist, resume and are order-stable") {
  const auto dir = oracle::scratch("suite");
  const Corpus c = synthetic_corpus({.test_sections = 12, .train_sections = 2, .val_sections = 2});
  SuiteOptions options{DifficultyScheme::kFiveLevel, 4, GenerationOptions{1, 1, 0}, dir / "gen.jsonl"};

  BudgetGenerator limited(c, 25);
  CHECK_THROWS_AS(run_generation_suite(c, DataSetup::kNarDifTextQA, limited, {}, options), EndpointError);
  const auto partial = load_generated(dir / "gen.jsonl");
  CHECK(partial.size() >= 20);
  CHECK(partial.size() <= 25);

  BudgetGenerator rest(c, 1000);
  const auto resumed = run_generation_suite(c, DataSetup::kNarDifTextQA, rest, {}, options);
  CHECK(resumed.size() == 60);
  CHECK(static_cast<std::size_t>(rest.calls.load()) == 60 - partial.size());

  MockGenerator fresh(DifficultyScheme::kFiveLevel, &c);
  SuiteOptions serial{DifficultyScheme::kFiveLevel, 1, GenerationOptions{}, dir / "serial.jsonl"};
  const auto one_shot = run_generation_suite(c, DataSetup::kNarDifTextQA, fresh, {}, serial);
  CHECK(one_shot == resumed);
  CHECK(io::read_file(dir / "serial.jsonl") == io::read_file(dir / "gen.jsonl"));
  CHECK(load_generated(dir / "serial.jsonl") == one_shot);
  CHECK(one_shot[0].key() == "NAR_DIF_TEXT_QA|test-story-000|1|" + std::string(to_string(*one_shot[0].requested_narrative)) +
                                 "|5:easy");
}

TEST_CASE("HTTP clients speak the wire protocol") {
  const Corpus c = synthetic_corpus({.test_sections = 2, .train_sections = 1, .val_sections = 1});
  const Section s = c.sections(Split::kTest).front();
  ContractServer server(c);

  SUBCASE("contract fixtures") { run_contract_fixtures(server.base(), s); }

  SUBCASE("path prefix and exact body") {
    HttpGenerationEndpoint gen(server.base() + "/api/");
    const std::string prompt = render_prompt(DataSetup::kTextQA, {}, s.text);
    const SamplingConfig sampling{7, 0.5, 0.8};
    const std::string raw = gen.generate(prompt, sampling);
    CHECK(server.last_body() == generation_request_body(prompt, sampling));
    CHECK(parse_generated(raw).first.starts_with("Tell me about"));
  }

  SUBCASE("respondent travels in the query string") {
    HttpAnsweringEndpoint ans(server.base());
    CHECK(ans.answer("Model A&B", s.text, "Who?") == tokenize(s.text).back());
    CHECK(server.last_respondent() == "Model A&B");
    CHECK(server.last_body() == answer_request_body(s.text, "Who?"));
  }

  SUBCASE("5xx is transient and retried; 4xx is not") {
    HttpGenerationEndpoint gen(server.base());
    server.fail_next = 1;
    try {
      gen.generate(render_prompt(DataSetup::kTextQA, {}, s.text), {});
      FAIL("expected EndpointError");
    } catch (const EndpointError& e) {
      CHECK(e.transient());
      CHECK(std::string(e.what()).find("temporarily unavailable") != std::string::npos);
    }
    server.fail_next = 2;
    const auto pair = generate_for_section(s, DataSetup::kTextQA, {}, gen, {}, GenerationOptions{1, 3, 0});
    CHECK_FALSE(pair.question.empty());

    server.status_for_failures = 400;
    server.fail_next = 1;
    try {
      gen.generate(render_prompt(DataSetup::kTextQA, {}, s.text), {});
      FAIL("expected EndpointError");
    } catch (const EndpointError& e) {
      CHECK_FALSE(e.transient());
    }
    server.status_for_failures = 429;
    server.fail_next = 1;
    try {
      gen.generate(render_prompt(DataSetup::kTextQA, {}, s.text), {});
      FAIL("expected EndpointError");
    } catch (const EndpointError& e) {
      CHECK(e.transient());
    }
  }

  SUBCASE("unknown section text is reported by the server") {
    HttpGenerationEndpoint gen(server.base());
    CHECK_THROWS_AS(gen.generate(render_prompt(DataSetup::kTextQA, {}, "Not in the corpus."), {}), EndpointError);
  }
}

TEST_CASE("connection failures are transient") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpGenerationEndpoint gen("http://127.0.0.1:" + std::to_string(port), HttpOptions{1, 1});
  try {
    gen.generate("x", {});
    FAIL("expected EndpointError");
  } catch (const EndpointError& e) {
    CHECK(e.transient());
  }
}

TEST_CASE("external server passes the contract fixtures when configured") {
  const char* url = std::getenv("QGFORGE_CONTRACT_URL");
  if (url == nullptr || *url == '\0') {
    MESSAGE("QGFORGE_CONTRACT_URL not set; external contract run skipped");
    return;
  }
  const Corpus c = synthetic_corpus({.test_sections = 1, .train_sections = 1, .val_sections = 1});
  run_contract_fixtures(url, c.sections(Split::kTest).front());
}
