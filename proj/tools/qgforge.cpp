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

// Command-line front end: one subcommand per pipeline stage.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qgforge/errors.hpp"
#include "qgforge/genclient.hpp"
#include "qgforge/pipeline.hpp"

namespace {

using namespace qgforge;
using namespace qgforge::pipeline;

struct Flags {
  std::string corpus;
  std::string endpoint;
  std::vector<std::string> panel;
  std::string setup = "nardif";
  int levels = 5;
  SamplingConfig sampling;
  std::uint64_t seed = 7;
  int jobs = 4;
  int retries = 3;
  std::string out = "qgforge-out";
};

RunConfig to_config(const Flags& flags, bool needs_endpoint) {
  RunConfig config;
  config.corpus = flags.corpus;
  if (needs_endpoint) {
    config.endpoint = resolve_endpoint(flags.endpoint.empty() ? std::nullopt : std::optional(flags.endpoint));
  } else {
    config.endpoint = flags.endpoint;
  }
  config.panel = flags.panel;
  if (config.panel.empty() && config.mock()) config.panel = default_mock_panel();
  config.setup = parse_setup(flags.setup);
  config.scheme = parse_scheme(flags.levels);
  config.sampling = flags.sampling;
  config.seed = flags.seed;
  config.jobs = flags.jobs;
  config.retries = flags.retries;
  config.out = flags.out;
  return config;
}

void report(const StageResult& result) {
  for (const auto& rel : result.outputs) std::cerr << "wrote " << (result.dir / rel).string() << "\n";
  std::cerr << "wrote " << (result.dir / "manifest.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgforge: IRT-calibrated, narrative- and difficulty-controlled question generation pipeline"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "TOML file with the same keys as the flags; flags given on the command line win");

  Flags flags;
  app.add_option("--corpus", flags.corpus, "Corpus file (.csv, .tsv or .jsonl), or synthetic[:N]");
  app.add_option("--endpoint", flags.endpoint, "Model server base URL, or 'mock'; defaults to $QGFORGE_ENDPOINT");
  app.add_option("--panel", flags.panel, "Respondents as name or name:theta (theta required for mock)")
      ->delimiter(',');
  app.add_option("--setup", flags.setup, "Data setup: text, nar, dif or nardif")->capture_default_str();
  app.add_option("--levels", flags.levels, "Difficulty scheme: 5 or 3")->check(CLI::IsMember({3, 5}))
      ->capture_default_str();
  app.add_option("--top-k", flags.sampling.top_k, "Sampling top-k")->capture_default_str();
  app.add_option("--top-p", flags.sampling.top_p, "Sampling top-p")->capture_default_str();
  app.add_option("--temperature", flags.sampling.temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--seed", flags.seed, "Seed for synthetic data and mock respondents")->capture_default_str();
  app.add_option("--jobs", flags.jobs, "Concurrent endpoint calls")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--retries", flags.retries, "Attempts per endpoint call")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", flags.out, "Run directory; each stage writes <out>/<stage>/")->capture_default_str();

  struct Command {
    const char* name;
    const char* help;
    bool needs_endpoint;
  };
  const std::vector<Command> commands = {
      {"collect", "Ask every panel respondent every train/val question and build the response matrix", true},
      {"calibrate", "Fit Rasch difficulties and abilities to the response matrix", false},
      {"augment", "Attach normalized difficulty labels to the corpus", false},
      {"export", "Write training input/target files for the chosen setup", false},
      {"generate", "Request question-answer pairs for every test section", true},
      {"evaluate", "Have the panel answer the generated questions", true},
      {"report", "Aggregate generated pairs and judgments into tables and plot series", false},
      {"simulate", "Run the whole pipeline on synthetic data with mock endpoints and check its properties", false},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    bool needs_endpoint = false;
    for (const auto& c : commands) needs_endpoint |= stage == c.name && c.needs_endpoint;
    const RunConfig config = to_config(flags, needs_endpoint);
    if (stage == "collect") report(cmd_collect(config));
    if (stage == "calibrate") report(cmd_calibrate(config));
    if (stage == "augment") report(cmd_augment(config));
    if (stage == "export") report(cmd_export(config));
    if (stage == "generate") report(cmd_generate(config));
    if (stage == "evaluate") report(cmd_evaluate(config));
    if (stage == "report") report(cmd_report(config));
    if (stage == "simulate") {
      bool all = true;
      for (const auto& check : cmd_simulate(config, std::cout)) all &= check.passed;
      if (!all) {
        std::cerr << "qgforge simulate: at least one property failed\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "qgforge " << stage << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
