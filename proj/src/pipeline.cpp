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

#include "qgforge/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <set>

#include <Eigen/Core>
#include <fmt/format.h>

#include "qgforge/errors.hpp"
#include "qgforge/evaluation.hpp"
#include "qgforge/genclient.hpp"
#include "qgforge/io.hpp"
#include "qgforge/irt/calibration.hpp"
#include "qgforge/responses.hpp"
#include "qgforge/simlearner.hpp"

namespace qgforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kRetryDelayMs = 200;

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return value;
}

std::vector<PanelMember> panel_members(const RunConfig& config) {
  std::vector<std::string> specs = config.panel;
  if (specs.empty() && config.mock()) specs = default_mock_panel();
  if (specs.empty()) throw Error("the respondent panel is empty; pass --panel name[,name...]");
  std::vector<PanelMember> members;
  std::set<std::string, std::less<>> seen;
  for (const auto& spec : specs) {
    PanelMember m = parse_panel_member(spec);
    if (!seen.insert(m.name).second) throw Error(fmt::format("duplicate panel respondent '{}'", m.name));
    if (config.mock() && !m.theta) {
      throw Error(fmt::format("mock respondent '{}' needs an ability: use name:theta", m.name));
    }
    members.push_back(std::move(m));
  }
  return members;
}

std::vector<std::string> panel_names(const std::vector<PanelMember>& members) {
  std::vector<std::string> names;
  for (const auto& m : members) names.push_back(m.name);
  return names;
}

std::vector<SyntheticLearner> mock_learners(const RunConfig& config, const std::vector<PanelMember>& members) {
  std::vector<SyntheticLearner> learners;
  for (const auto& m : members) learners.push_back({m.name, *m.theta, config.seed});
  return learners;
}

bool is_synthetic(std::string_view corpus) {
  return corpus == kSyntheticCorpus || corpus.starts_with(fmt::format("{}:", kSyntheticCorpus));
}

std::string corpus_hash(const RunConfig& config) {
  if (is_synthetic(config.corpus)) return io::sha256_hex(fmt::format("{}#{}", config.corpus, config.seed));
  return io::sha256_file(config.corpus);
}

fs::path require(const fs::path& path, std::string_view stage, std::string_view producer) {
  if (!fs::exists(path)) {
    throw PrerequisiteError(fmt::format("{} needs {}, which the `{}` stage writes; run `qgforge {}` first", stage,
                                        path.string(), producer, producer));
  }
  return path;
}

GenerationOptions generation_options(const RunConfig& config) {
  return GenerationOptions{config.retries, config.retries, kRetryDelayMs};
}

}  // namespace

PanelMember parse_panel_member(std::string_view spec) {
  PanelMember member;
  const auto colon = spec.rfind(':');
  if (colon != std::string_view::npos) {
    const auto theta = parse_double(spec.substr(colon + 1));
    if (!theta) throw Error(fmt::format("panel entry '{}': ability after ':' is not a number", spec));
    member.theta = *theta;
    spec = spec.substr(0, colon);
  }
  if (spec.empty()) throw Error("panel entry has an empty respondent name");
  member.name = std::string(spec);
  return member;
}

std::vector<std::string> default_mock_panel() {
  return {"strong:2", "above:1", "middle:0", "below:-1", "weak:-2"};
}

void RunConfig::validate() const {
  if (corpus.empty()) throw Error("no corpus given; pass --corpus <file> or --corpus synthetic");
  if (endpoint.empty()) throw Error(fmt::format("no endpoint given; pass --endpoint or set {}", kEndpointEnvVar));
  sampling.validate();
  if (retries < 1) throw Error(fmt::format("retries must be at least 1, got {}", retries));
  if (jobs < 1) throw Error(fmt::format("jobs must be at least 1, got {}", jobs));
  panel_members(*this);
}

ordered_json RunConfig::replay_json() const {
  ordered_json j;
  j["corpus"] = corpus;
  j["endpoint"] = endpoint;
  j["panel"] = panel;
  j["setup"] = short_name(setup);
  j["levels"] = level_count(scheme);
  j["top_k"] = sampling.top_k;
  j["top_p"] = sampling.top_p;
  j["temperature"] = sampling.temperature;
  j["seed"] = seed;
  j["retries"] = retries;
  return j;
}

std::string RunConfig::to_toml() const {
  auto quote = [](const std::string& s) { return nlohmann::json(s).dump(); };
  // Empty values are left out: the reader rejects an empty list.
  std::string out;
  if (!corpus.empty()) out += fmt::format("corpus = {}\n", quote(corpus));
  if (!endpoint.empty()) out += fmt::format("endpoint = {}\n", quote(endpoint));
  if (!panel.empty()) {
    std::string list;
    for (const auto& p : panel) list += (list.empty() ? "" : ", ") + quote(p);
    out += fmt::format("panel = [{}]\n", list);
  }
  out += fmt::format("setup = \"{}\"\nlevels = {}\ntop-k = {}\ntop-p = {}\ntemperature = {}\nseed = {}\nretries = {}\n",
                     short_name(setup), level_count(scheme), sampling.top_k, sampling.top_p, sampling.temperature, seed,
                     retries);
  return out;
}

std::string RunConfig::hash() const { return io::sha256_hex(replay_json().dump()); }

std::string run_label(DataSetup setup, DifficultyScheme scheme) {
  std::string label(short_name(setup));
  if (uses_difficulty(setup) && scheme == DifficultyScheme::kThreeLevel) label += "-3lvl";
  return label;
}

Corpus load_run_corpus(const RunConfig& config) {
  if (!is_synthetic(config.corpus)) return load_corpus(config.corpus);
  SyntheticCorpusOptions options;
  options.seed = config.seed;
  if (config.corpus.size() > kSyntheticCorpus.size()) {
    const std::string_view count = std::string_view(config.corpus).substr(kSyntheticCorpus.size() + 1);
    std::size_t n = 0;
    const auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (ec != std::errc{} || end != count.data() + count.size() || n == 0) {
      throw Error(fmt::format("corpus '{}': expected synthetic:<test sections>", config.corpus));
    }
    options.test_sections = n;
    options.train_sections = n;
    options.val_sections = std::max<std::size_t>(2, n / 5);
  }
  return synthetic_corpus(options);
}

void write_manifest(const fs::path& dir, std::string_view stage, const RunConfig& config,
                    const std::map<std::string, std::string>& input_hashes, const std::vector<fs::path>& outputs) {
  ordered_json manifest;
  manifest["stage"] = stage;
  manifest["version"] = kVersion;
  manifest["versions"] = {
      {"qgforge", kVersion},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
      {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                    NLOHMANN_JSON_VERSION_PATCH)}};
  manifest["config"] = config.replay_json();
  manifest["config_hash"] = config.hash();
  manifest["inputs"] = ordered_json::object();
  for (const auto& [name, hash] : input_hashes) manifest["inputs"][name] = hash;
  std::vector<fs::path> sorted = outputs;
  std::sort(sorted.begin(), sorted.end());
  manifest["outputs"] = ordered_json::object();
  for (const auto& rel : sorted) manifest["outputs"][rel.generic_string()] = io::sha256_file(dir / rel);
  io::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  io::write_file_atomic(dir / "config.toml", fmt::format("# qgforge {} replay config\n{}", stage, config.to_toml()));
}

StageResult cmd_collect(const RunConfig& config) {
  config.validate();
  const Corpus corpus = load_run_corpus(config);
  const auto members = panel_members(config);
  const auto names = panel_names(members);
  const fs::path dir = config.out / "collect";
  fs::create_directories(dir);

  std::unique_ptr<AnsweringEndpoint> endpoint;
  if (config.mock()) {
    endpoint = std::make_unique<MockAnswerEngine>(
        mock_learners(config, members), answer_key_from_corpus(corpus, synthetic_difficulties(corpus, config.seed)));
  } else {
    endpoint = std::make_unique<HttpAnsweringEndpoint>(config.endpoint);
  }
  CollectOptions options{config.jobs, config.retries, kRetryDelayMs, dir / "answers.jsonl"};
  const auto answers = collect_answers(corpus, *endpoint, names, options);
  save_answer_log(answers, dir / "answers.jsonl");
  save_matrix_csv(build_matrix(corpus, answers, names), dir / "responses.csv");

  StageResult result{dir, {"answers.jsonl", "responses.csv"}};
  write_manifest(dir, "collect", config, {{"corpus", corpus_hash(config)}}, result.outputs);
  return result;
}

StageResult cmd_calibrate(const RunConfig& config) {
  const fs::path matrix_path = require(config.out / "collect" / "responses.csv", "calibrate", "collect");
  const ResponseMatrix matrix = load_matrix_csv(matrix_path);
  const fs::path dir = config.out / "calibrate";
  fs::create_directories(dir);
  const RaschCalibration calibration = calibrate(matrix);
  save_calibration(calibration, dir / "calibration.json");
  save_fit_report_csv(simulate_fit_report(matrix, calibration), dir / "fit.csv");

  StageResult result{dir, {"calibration.json", "fit.csv"}};
  write_manifest(dir, "calibrate", config, {{"responses", io::sha256_file(matrix_path)}}, result.outputs);
  return result;
}

StageResult cmd_augment(const RunConfig& config) {
  const fs::path calibration_path = require(config.out / "calibrate" / "calibration.json", "augment", "calibrate");
  if (config.corpus.empty()) throw Error("no corpus given; pass --corpus <file> or --corpus synthetic");
  const Corpus augmented = augment_corpus(load_run_corpus(config), load_calibration(calibration_path));
  const fs::path dir = config.out / "augment";
  fs::create_directories(dir);
  save_corpus_jsonl(augmented, dir / "corpus.jsonl");

  std::string table = "narrative,difficulty,count\n";
  const auto counts = difficulty_distribution(augmented);
  for (auto n : kNarrativeLabels) {
    for (auto d : kDifficultyLabels) {
      auto it = counts.find({n, d});
      table += fmt::format("{},{},{}\n", to_string(n), to_string(d), it == counts.end() ? 0 : it->second);
    }
  }
  io::write_file_atomic(dir / "distribution.csv", table);

  StageResult result{dir, {"corpus.jsonl", "distribution.csv"}};
  write_manifest(dir, "augment", config,
                 {{"corpus", corpus_hash(config)}, {"calibration", io::sha256_file(calibration_path)}},
                 result.outputs);
  return result;
}

StageResult cmd_export(const RunConfig& config) {
  std::map<std::string, std::string> inputs;
  Corpus corpus = [&] {
    if (uses_difficulty(config.setup)) {
      const fs::path path = require(config.out / "augment" / "corpus.jsonl", "export", "augment");
      inputs["augmented_corpus"] = io::sha256_file(path);
      return load_corpus(path);
    }
    if (config.corpus.empty()) throw Error("no corpus given; pass --corpus <file> or --corpus synthetic");
    inputs["corpus"] = corpus_hash(config);
    return load_run_corpus(config);
  }();
  const fs::path dir = config.out / "export" / run_label(config.setup, config.scheme);
  fs::create_directories(dir);
  export_training_file(corpus, config.setup, dir / "train.jsonl", Split::kTrain, config.scheme);
  export_training_file(corpus, config.setup, dir / "val.jsonl", Split::kVal, config.scheme);

  StageResult result{dir, {"train.jsonl", "val.jsonl"}};
  write_manifest(dir, "export", config, inputs, result.outputs);
  return result;
}

StageResult cmd_generate(const RunConfig& config) {
  config.validate();
  const Corpus corpus = load_run_corpus(config);
  const fs::path dir = config.out / "generate" / run_label(config.setup, config.scheme);
  fs::create_directories(dir);
  std::unique_ptr<GenerationEndpoint> endpoint;
  if (config.mock()) {
    endpoint = mock_generator(corpus, config.scheme);
  } else {
    endpoint = std::make_unique<HttpGenerationEndpoint>(config.endpoint);
  }
  SuiteOptions options{config.scheme, config.jobs, generation_options(config), dir / "generated.jsonl"};
  const auto pairs = run_generation_suite(corpus, config.setup, *endpoint, config.sampling, options);
  save_generated(pairs, dir / "generated.jsonl");

  StageResult result{dir, {"generated.jsonl"}};
  write_manifest(dir, "generate", config, {{"corpus", corpus_hash(config)}}, result.outputs);
  return result;
}

StageResult cmd_evaluate(const RunConfig& config) {
  if (!uses_difficulty(config.setup)) {
    throw Error(fmt::format("evaluate needs a difficulty-bearing setup (dif or nardif), got {}",
                            short_name(config.setup)));
  }
  config.validate();
  const std::string label = run_label(config.setup, config.scheme);
  const fs::path generated_path = require(config.out / "generate" / label / "generated.jsonl", "evaluate", "generate");
  const Corpus corpus = load_run_corpus(config);
  const auto pairs = load_generated(generated_path);
  const auto members = panel_members(config);
  const auto names = panel_names(members);

  std::unique_ptr<AnsweringEndpoint> endpoint;
  if (config.mock()) {
    endpoint = std::make_unique<MockAnswerEngine>(mock_learners(config, members),
                                                  answer_key_from_generated(pairs, corpus));
  } else {
    endpoint = std::make_unique<HttpAnsweringEndpoint>(config.endpoint);
  }
  const auto judgments =
      judge_pairs(pairs, corpus, *endpoint, names, JudgeOptions{config.jobs, config.retries, kRetryDelayMs});
  const fs::path dir = config.out / "evaluate" / label;
  fs::create_directories(dir);
  save_judgments(judgments, dir / "judgments.jsonl");

  StageResult result{dir, {"judgments.jsonl"}};
  write_manifest(dir, "evaluate", config,
                 {{"corpus", corpus_hash(config)}, {"generated", io::sha256_file(generated_path)}}, result.outputs);
  return result;
}

StageResult cmd_report(const RunConfig& config) {
  const fs::path generate_dir = config.out / "generate";
  std::vector<fs::path> runs;
  if (fs::is_directory(generate_dir)) {
    for (const auto& entry : fs::directory_iterator(generate_dir)) {
      if (fs::exists(entry.path() / "generated.jsonl")) runs.push_back(entry.path());
    }
  }
  if (runs.empty()) {
    throw PrerequisiteError(fmt::format("report needs generated pairs under {}, which the `generate` stage writes; "
                                        "run `qgforge generate` first",
                                        generate_dir.string()));
  }
  std::sort(runs.begin(), runs.end());
  if (config.corpus.empty()) throw Error("no corpus given; pass --corpus <file> or --corpus synthetic");
  const Corpus corpus = load_run_corpus(config);

  std::map<std::string, std::string> inputs{{"corpus", corpus_hash(config)}};
  std::vector<GeneratedPair> pairs;
  std::vector<Judgment> judgments;
  for (const auto& run : runs) {
    const std::string label = run.filename().string();
    const fs::path generated = run / "generated.jsonl";
    inputs["generated/" + label] = io::sha256_file(generated);
    const auto loaded = load_generated(generated);
    pairs.insert(pairs.end(), loaded.begin(), loaded.end());
    const fs::path judged = config.out / "evaluate" / label / "judgments.jsonl";
    if (fs::exists(judged)) {
      inputs["judgments/" + label] = io::sha256_file(judged);
      const auto loaded_judgments = load_judgments(judged);
      judgments.insert(judgments.end(), loaded_judgments.begin(), loaded_judgments.end());
    }
  }
  const fs::path dir = config.out / "report";
  fs::remove_all(dir / "plots");
  fs::create_directories(dir);
  StageResult result{dir, emit_report(build_report(pairs, corpus, judgments), dir)};
  write_manifest(dir, "report", config, inputs, result.outputs);
  return result;
}

namespace {

PropertyCheck check(std::string name, bool passed, std::string detail) {
  return PropertyCheck{std::move(name), passed, std::move(detail)};
}

PropertyCheck check_generation_counts(const RunConfig& sim, std::size_t test_sections) {
  std::string detail;
  bool ok = true;
  for (DataSetup setup : {DataSetup::kDifTextQA, DataSetup::kNarDifTextQA}) {
    for (DifficultyScheme scheme : {DifficultyScheme::kFiveLevel, DifficultyScheme::kThreeLevel}) {
      const std::string label = run_label(setup, scheme);
      const std::size_t got = load_generated(sim.out / "generate" / label / "generated.jsonl").size();
      const std::size_t want = test_sections * static_cast<std::size_t>(level_count(scheme));
      ok &= got == want;
      detail += fmt::format("{}{}={}/{}", detail.empty() ? "" : " ", label, got, want);
    }
  }
  return check("generation pair counts", ok, detail);
}

PropertyCheck check_raw_score_order(const RunConfig& sim) {
  const ResponseMatrix matrix = load_matrix_csv(sim.out / "collect" / "responses.csv");
  const RaschCalibration cal = load_calibration(sim.out / "calibrate" / "calibration.json");
  const Eigen::VectorXi raw = matrix.as<int>().colwise().sum().transpose();
  const auto& ids = matrix.question_ids();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const int ci = raw(static_cast<Eigen::Index>(i)), cj = raw(static_cast<Eigen::Index>(j));
      const double bi = cal.difficulties.at(ids[i]), bj = cal.difficulties.at(ids[j]);
      const auto li = static_cast<int>(cal.labels.at(ids[i])), lj = static_cast<int>(cal.labels.at(ids[j]));
      if (ci == cj && (bi != bj || li != lj)) ++violations;
      if (ci > cj && (bi >= bj || li > lj)) ++violations;
    }
  }
  return check("calibration follows raw-score order", violations == 0,
               fmt::format("{} items, {} ordered-pair violations", ids.size(), violations));
}

PropertyCheck check_ability_order(const RunConfig& sim) {
  const ResponseMatrix matrix = load_matrix_csv(sim.out / "collect" / "responses.csv");
  const RaschCalibration cal = load_calibration(sim.out / "calibrate" / "calibration.json");
  bool ok = true;
  std::string detail;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const auto& who = matrix.respondents()[static_cast<std::size_t>(i)];
    detail += fmt::format("{}{}={}", i ? " " : "", who, io::fixed(cal.abilities.at(who), 2));
    for (Eigen::Index k = 0; k < matrix.rows(); ++k) {
      const auto& other = matrix.respondents()[static_cast<std::size_t>(k)];
      if (matrix.row_accuracy(i) > matrix.row_accuracy(k) && cal.abilities.at(who) <= cal.abilities.at(other)) {
        ok = false;
      }
    }
  }
  return check("ability estimates follow accuracy order", ok, detail);
}

std::vector<PropertyCheck> check_difficulty_control(const RunConfig& sim, const std::vector<PanelMember>& members) {
  std::vector<PropertyCheck> checks;
  std::map<std::string, double, std::less<>> theta;
  for (const auto& m : members) theta[m.name] = *m.theta;
  for (DifficultyScheme scheme : {DifficultyScheme::kFiveLevel, DifficultyScheme::kThreeLevel}) {
    bool decreasing = true, pointwise = true;
    std::string detail;
    for (DataSetup setup : {DataSetup::kDifTextQA, DataSetup::kNarDifTextQA}) {
      const std::string label = run_label(setup, scheme);
      const auto pairs = load_generated(sim.out / "generate" / label / "generated.jsonl");
      const auto judgments = load_judgments(sim.out / "evaluate" / label / "judgments.jsonl");
      const auto acc = difficulty_accuracy(pairs, judgments).micro;
      const auto levels = difficulty_levels(scheme);
      for (const auto& m : members) {
        std::string series;
        for (std::size_t k = 0; k < levels.size(); ++k) {
          const double here = acc.at({setup, m.name, levels[k]}).value;
          series += fmt::format("{}{}", k ? "/" : "", io::fixed(here, 1));
          if (k > 0 && here >= acc.at({setup, m.name, levels[k - 1]}).value) decreasing = false;
          for (const auto& other : members) {
            if (m.theta > other.theta && here < acc.at({setup, other.name, levels[k]}).value) pointwise = false;
          }
        }
        if (m.name == members.front().name || m.name == members.back().name) {
          detail += fmt::format("{}{}:{}={}", detail.empty() ? "" : " ", label, m.name, series);
        }
      }
    }
    const int n = level_count(scheme);
    checks.push_back(check(fmt::format("accuracy strictly decreasing over {} levels", n), decreasing, detail));
    checks.push_back(check(fmt::format("higher ability never less accurate ({} levels)", n), pointwise,
                           fmt::format("{} respondents", members.size())));
  }
  return checks;
}

PropertyCheck check_narrative_control(const RunConfig& sim, const Corpus& corpus) {
  std::vector<GeneratedPair> pairs;
  for (DataSetup setup : {DataSetup::kTextQA, DataSetup::kNarTextQA, DataSetup::kNarDifTextQA}) {
    const auto loaded =
        load_generated(sim.out / "generate" / run_label(setup, DifficultyScheme::kFiveLevel) / "generated.jsonl");
    pairs.insert(pairs.end(), loaded.begin(), loaded.end());
  }
  const auto cells = narrative_similarity(pairs, corpus);
  bool ok = true;
  std::size_t compared = 0;
  double worst = 1.0;
  for (auto n : kNarrativeLabels) {
    auto base = cells.find({DataSetup::kTextQA, n});
    if (base == cells.end() || base->second.count == 0) {
      ok = false;
      continue;
    }
    for (DataSetup setup : {DataSetup::kNarTextQA, DataSetup::kNarDifTextQA}) {
      auto it = cells.find({setup, n});
      if (it == cells.end() || it->second.count == 0) {
        ok = false;
        continue;
      }
      ++compared;
      worst = std::min(worst, it->second.mean - base->second.mean);
      if (it->second.mean < base->second.mean) ok = false;
    }
  }
  return check("narrative similarity at or above baseline", ok,
               fmt::format("{} of 14 cells compared, smallest margin {}", compared, io::fixed(worst, 4)));
}

}  // namespace

std::vector<PropertyCheck> cmd_simulate(const RunConfig& config, std::ostream& status) {
  RunConfig sim = config;
  if (sim.corpus.empty()) sim.corpus = std::string(kSyntheticCorpus);
  sim.endpoint = std::string(kMockEndpoint);
  if (sim.panel.empty()) sim.panel = default_mock_panel();
  sim.out = config.out / "simulate";
  sim.validate();
  const auto members = panel_members(sim);

  cmd_collect(sim);
  cmd_calibrate(sim);
  cmd_augment(sim);
  for (DataSetup setup : kDataSetups) {
    std::vector<DifficultyScheme> schemes{DifficultyScheme::kFiveLevel};
    if (uses_difficulty(setup)) schemes.push_back(DifficultyScheme::kThreeLevel);
    for (DifficultyScheme scheme : schemes) {
      RunConfig stage = sim;
      stage.setup = setup;
      stage.scheme = scheme;
      cmd_export(stage);
      cmd_generate(stage);
      if (uses_difficulty(setup)) cmd_evaluate(stage);
    }
  }
  const StageResult report = cmd_report(sim);

  const Corpus corpus = load_run_corpus(sim);
  std::vector<PropertyCheck> checks;
  checks.push_back(check_generation_counts(sim, corpus.sections(Split::kTest).size()));
  checks.push_back(check_raw_score_order(sim));
  checks.push_back(check_ability_order(sim));
  for (auto& c : check_difficulty_control(sim, members)) checks.push_back(std::move(c));
  checks.push_back(check_narrative_control(sim, corpus));
  std::size_t tables = 0;
  for (const auto& rel : report.outputs) tables += rel.extension() == ".csv" ? 1 : 0;
  checks.push_back(check("report has all seven tables", tables == 7, fmt::format("{} tables", tables)));

  std::string lines;
  for (const auto& c : checks) {
    lines += fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
  }
  status << lines << std::flush;
  io::write_file_atomic(sim.out / "properties.txt", lines);
  write_manifest(sim.out, "simulate", sim, {{"corpus", corpus_hash(sim)}}, {"properties.txt"});
  return checks;
}

}  // namespace qgforge::pipeline
