// Copyright 2026 The CtxBugGen Authors
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

#include "ctxbug/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "ctxbug/baselines.hpp"
#include "ctxbug/corpus.hpp"
#include "ctxbug/evaluate.hpp"
#include "ctxbug/identify.hpp"
#include "ctxbug/llm.hpp"
#include "ctxbug/obfuscate.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/syntax.hpp"
#include "ctxbug/text_util.hpp"

namespace ctxbug::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::kPerturb, "perturb"},   {Stage::kObfuscate, "obfuscate"},
    {Stage::kGenerate, "generate"}, {Stage::kIdentify, "identify"},
    {Stage::kBaseline, "baseline"}, {Stage::kEvaluate, "evaluate"},
    {Stage::kReport, "report"},
};

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Writes through a temporary file so readers never see partial output.
void WriteFile(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write " + tmp.string());
    out << bytes;
  }
  fs::rename(tmp, path);
}

std::string Jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<json> ReadJsonl(const fs::path& path) {
  std::vector<json> records;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!text::Trim(line).empty()) records.push_back(json::parse(line));
  }
  return records;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results are stored
// by index, so output order never depends on scheduling.
template <typename T>
std::vector<T> ParallelMap(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<T> results(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  if (error) std::rethrow_exception(error);
  return results;
}

struct Input {
  std::string name;
  fs::path path;
  Stage producer;  // stage to run when the file is missing
  bool from_corpus = false;
};

struct StageSpec {
  std::vector<Input> inputs;
  json config;
  std::vector<std::string> outputs;
};

fs::path OutPath(const PipelineConfig& config, std::string_view name) {
  return config.out / std::string(name);
}

std::string FailuresName(Stage stage) {
  return std::string(StageName(stage)) + "_failures.jsonl";
}

Input Artifact(const PipelineConfig& config, std::string_view name, Stage producer) {
  return {std::string(name), OutPath(config, name), producer};
}

Input CorpusInput(const PipelineConfig& config) {
  return {"corpus", config.corpus, Stage::kPerturb, true};
}

json ModelConfigJson(const PipelineConfig& config) {
  return {{"models", config.models},
          {"stub", config.stub},
          {"seed", config.seed},
          {"endpoint", config.endpoint},
          {"max_output_tokens", config.max_output_tokens}};
}

json ExecConfigJson(const PipelineConfig& config) {
  return {{"timeout", config.timeout.count()}, {"shim", config.shim_command}};
}

StageSpec SpecFor(Stage stage, const PipelineConfig& config) {
  StageSpec spec;
  std::string failures = FailuresName(stage);
  switch (stage) {
    case Stage::kPerturb:
      spec.inputs = {CorpusInput(config)};
      spec.config = {{"rules", config.rules}, {"grammar", config.grammar}};
      spec.outputs = {std::string(artifacts::kTemplates)};
      break;
    case Stage::kObfuscate:
      spec.inputs = {CorpusInput(config),
                     Artifact(config, artifacts::kTemplates, Stage::kPerturb)};
      spec.config = json::object();
      spec.outputs = {std::string(artifacts::kPrompts), failures};
      break;
    case Stage::kGenerate:
      spec.inputs = {Artifact(config, artifacts::kTemplates, Stage::kPerturb),
                     Artifact(config, artifacts::kPrompts, Stage::kObfuscate)};
      spec.config = ModelConfigJson(config);
      spec.outputs = {std::string(artifacts::kGenerations), failures};
      break;
    case Stage::kIdentify:
      spec.inputs = {CorpusInput(config),
                     Artifact(config, artifacts::kTemplates, Stage::kPerturb),
                     Artifact(config, artifacts::kPrompts, Stage::kObfuscate),
                     Artifact(config, artifacts::kGenerations, Stage::kGenerate)};
      spec.config = ExecConfigJson(config);
      spec.outputs = {std::string(artifacts::kClassifications),
                      std::string(artifacts::kCtxBugs), std::string(artifacts::kCtxBugStats),
                      std::string(artifacts::kFunnel), failures};
      break;
    case Stage::kBaseline:
      spec.inputs = {CorpusInput(config),
                     Artifact(config, artifacts::kCtxBugs, Stage::kIdentify)};
      spec.config = {{"models", ModelConfigJson(config)}, {"exec", ExecConfigJson(config)}};
      spec.outputs = {std::string(artifacts::kWithoutCtxBugs),
                      std::string(artifacts::kIsoBugAttempts),
                      std::string(artifacts::kIsoBugs),
                      std::string(artifacts::kBenchmarkStats), failures};
      break;
    case Stage::kEvaluate:
      spec.inputs = {CorpusInput(config),
                     Artifact(config, artifacts::kCtxBugs, Stage::kIdentify),
                     Artifact(config, artifacts::kWithoutCtxBugs, Stage::kBaseline),
                     Artifact(config, artifacts::kIsoBugs, Stage::kBaseline)};
      spec.config = {{"models", ModelConfigJson(config)}, {"exec", ExecConfigJson(config)}};
      spec.outputs = {std::string(artifacts::kEvalRecords), failures};
      break;
    case Stage::kReport:
      spec.inputs = {Artifact(config, artifacts::kEvalRecords, Stage::kEvaluate)};
      spec.config = json::object();
      spec.outputs = {std::string(artifacts::kReportCsv), std::string(artifacts::kReportJson),
                      std::string(artifacts::kReportByGenerator)};
      break;
  }
  if (!config.stub_table.empty() &&
      (stage == Stage::kGenerate || stage == Stage::kBaseline || stage == Stage::kEvaluate)) {
    spec.inputs.push_back({"stub_table", config.stub_table, stage, true});
  }
  return spec;
}

json InputHashes(const StageSpec& spec, Stage stage) {
  json hashes = json::object();
  for (const auto& input : spec.inputs) {
    if (!fs::exists(input.path)) {
      if (input.from_corpus) {
        throw StageError(std::string(StageName(stage)) + ": input not found: " +
                         input.path.string());
      }
      throw StageError(std::string(StageName(stage)) + ": missing artifact " +
                       input.path.string() + "; run the '" +
                       std::string(StageName(input.producer)) + "' stage first");
    }
    hashes[input.name] = text::Sha256Hex(ReadFile(input.path));
  }
  return hashes;
}

// Result of a stage body: artifact bytes by file name plus counts.
struct StageOutput {
  std::map<std::string, std::string> files;
  json counts = json::object();
  int items = 0;
  int failures = 0;
};

std::unordered_map<std::string, corpus::AdaptationCase> LoadCases(const PipelineConfig& config,
                                                                 std::ostream& log) {
  corpus::LoadResult loaded;
  try {
    loaded = corpus::LoadCorpus(config.corpus);
  } catch (const corpus::CorpusError& e) {
    throw StageError(std::string("corpus: ") + e.what());
  }
  for (const auto& d : loaded.diagnostics) {
    log << "corpus " << (d.severity == corpus::Diagnostic::Severity::kError ? "error" : "warning")
        << (d.line ? " line " + std::to_string(d.line) : std::string()) << " "
        << d.case_id << ": " << d.message << "\n";
  }
  std::unordered_map<std::string, corpus::AdaptationCase> cases;
  for (auto& c : loaded.cases) cases.emplace(c.case_id, std::move(c));
  return cases;
}

std::vector<corpus::AdaptationCase> LoadCaseList(const PipelineConfig& config,
                                                 std::ostream& log) {
  corpus::LoadResult loaded;
  try {
    loaded = corpus::LoadCorpus(config.corpus);
  } catch (const corpus::CorpusError& e) {
    throw StageError(std::string("corpus: ") + e.what());
  }
  for (const auto& d : loaded.diagnostics) {
    log << "corpus: " << d.case_id << ": " << d.message << "\n";
  }
  return loaded.cases;
}

const corpus::AdaptationCase& CaseFor(
    const std::unordered_map<std::string, corpus::AdaptationCase>& cases,
    const std::string& case_id) {
  auto it = cases.find(case_id);
  if (it == cases.end()) throw StageError("case not in corpus: " + case_id);
  return it->second;
}

llm::ModelConfig ModelFor(const PipelineConfig& config, const std::string& model_id) {
  llm::ModelConfig m;
  m.model_id = model_id;
  m.endpoint = config.endpoint;
  m.temperature = 0.0;
  m.max_output_tokens = config.max_output_tokens;
  m.concurrency = config.concurrency;
  m.stub = config.stub;
  m.seed = config.seed;
  m.stub_table = config.stub_table;
  return m;
}

std::map<std::string, std::unique_ptr<llm::Backend>> Backends(const PipelineConfig& config) {
  std::map<std::string, std::unique_ptr<llm::Backend>> backends;
  for (const auto& model : config.models) {
    try {
      backends.emplace(model, llm::MakeBackend(ModelFor(config, model)));
    } catch (const std::exception& e) {
      throw StageError("model " + model + ": " + e.what());
    }
  }
  return backends;
}

std::vector<perturb::PerturbedTemplate> LoadTemplates(const PipelineConfig& config) {
  std::vector<perturb::PerturbedTemplate> templates;
  for (const auto& j : ReadJsonl(OutPath(config, artifacts::kTemplates))) {
    templates.push_back(perturb::TemplateFromJson(j));
  }
  return templates;
}

std::vector<identify::BugInstance> LoadInstances(const PipelineConfig& config,
                                                 std::string_view name) {
  std::vector<identify::BugInstance> out;
  for (const auto& j : ReadJsonl(OutPath(config, name))) {
    out.push_back(identify::InstanceFromJson(j));
  }
  return out;
}

json Failure(std::string item, const std::string& message) {
  return {{"item", std::move(item)}, {"error", message}};
}

// ---------------------------------------------------------------------------

StageOutput Perturb(const PipelineConfig& config, std::ostream& log) {
  std::vector<corpus::AdaptationCase> cases = LoadCaseList(config, log);
  auto per_case = ParallelMap<std::vector<perturb::PerturbedTemplate>>(
      cases.size(), config.jobs,
      [&](std::size_t i) { return perturb::PerturbAll(cases[i], config.rules); });
  std::vector<json> records;
  std::map<int, int> per_rule;
  for (const auto& templates : per_case) {
    for (const auto& t : templates) {
      records.push_back(perturb::ToJson(t));
      ++per_rule[t.rule_id];
    }
  }
  StageOutput out;
  out.files[std::string(artifacts::kTemplates)] = Jsonl(records);
  out.items = static_cast<int>(records.size());
  json rules = json::object();
  for (const auto& [rule, count] : per_rule) {
    rules["r" + std::to_string(rule)] = count;
    log << "perturb: rule " << rule << ": " << count << " templates\n";
  }
  out.counts = {{"cases", cases.size()}, {"templates", records.size()}, {"per_rule", rules}};
  return out;
}

StageOutput Obfuscate(const PipelineConfig& config, std::ostream& log) {
  auto cases = LoadCases(config, log);
  auto templates = LoadTemplates(config);
  struct Item {
    json record;
    json failure;
  };
  auto items = ParallelMap<Item>(templates.size(), config.jobs, [&](std::size_t i) {
    const auto& t = templates[i];
    const auto& c = CaseFor(cases, t.case_id);
    Item item;
    try {
      auto map = obfuscate::BuildRenaming(c, obfuscate::Scope::kMethod);
      llm::Prompt prompt = llm::BuildInfillPrompt(
          obfuscate::ObfuscateCode(t.template_source, map),
          obfuscate::ObfuscateText(c.requirement, map), t.rule_id, c.lib_deps);
      prompt.case_id = c.case_id;
      prompt.tag = t.Id();
      item.record = {{"template_index", i},
                     {"template_id", t.Id()},
                     {"case_id", c.case_id},
                     {"map", obfuscate::ToJson(map)},
                     {"prompt", {{"kind", llm::PromptKindName(prompt.kind)},
                                 {"text", prompt.text},
                                 {"hash", prompt.Hash()}}}};
    } catch (const std::exception& e) {
      item.failure = Failure(t.Id(), e.what());
    }
    return item;
  });
  std::vector<json> records;
  std::vector<json> failures;
  for (auto& item : items) {
    if (item.failure.is_null()) {
      records.push_back(std::move(item.record));
    } else {
      failures.push_back(std::move(item.failure));
    }
  }
  StageOutput out;
  out.files[std::string(artifacts::kPrompts)] = Jsonl(records);
  out.files[FailuresName(Stage::kObfuscate)] = Jsonl(failures);
  out.items = static_cast<int>(records.size());
  out.failures = static_cast<int>(failures.size());
  out.counts = {{"prompts", records.size()}, {"failures", failures.size()}};
  return out;
}

llm::Prompt PromptFromRecord(const json& record) {
  llm::Prompt prompt;
  prompt.kind = llm::PromptKind::kInfill;
  prompt.text = record.at("prompt").at("text").get<std::string>();
  prompt.case_id = record.at("case_id").get<std::string>();
  prompt.tag = record.at("template_id").get<std::string>();
  return prompt;
}

StageOutput Generate(const PipelineConfig& config, std::ostream&) {
  std::vector<json> prompts = ReadJsonl(OutPath(config, artifacts::kPrompts));
  auto backends = Backends(config);
  std::size_t n = prompts.size() * config.models.size();
  auto generations = ParallelMap<json>(n, config.jobs, [&](std::size_t k) {
    const std::string& model = config.models[k / prompts.size()];
    const json& record = prompts[k % prompts.size()];
    llm::Generation g = backends.at(model)->Generate(PromptFromRecord(record));
    return json{{"template_index", record.at("template_index")},
                {"template_id", record.at("template_id")},
                {"case_id", record.at("case_id")},
                {"model_id", model},
                {"generation", llm::ToJson(g)}};
  });
  std::vector<json> failures;
  for (const auto& g : generations) {
    if (g.at("generation").value("failed", false)) {
      failures.push_back(Failure(g.at("template_id").get<std::string>() + "@" +
                                     g.at("model_id").get<std::string>(),
                                 g.at("generation").value("error", std::string())));
    }
  }
  StageOutput out;
  out.files[std::string(artifacts::kGenerations)] = Jsonl(generations);
  out.files[FailuresName(Stage::kGenerate)] = Jsonl(failures);
  out.items = static_cast<int>(generations.size());
  out.failures = static_cast<int>(failures.size());
  out.counts = {{"generations", generations.size()}, {"failures", failures.size()}};
  return out;
}

identify::ClassifyOptions ClassifyOptionsFor(const PipelineConfig& config) {
  identify::ClassifyOptions options;
  options.shim.command = config.shim_command;
  options.timeout = config.timeout;
  return options;
}

std::string FunnelCsv(const std::vector<std::string>& models,
                      const std::vector<std::pair<std::string, identify::Classification>>& rows,
                      const std::map<std::string, int>& failures) {
  std::ostringstream out;
  out << "generator,generated";
  for (identify::Verdict v : identify::kAllVerdicts) out << ',' << identify::VerdictName(v);
  out << ",failures\n";
  for (const auto& model : models) {
    std::map<identify::Verdict, int> counts;
    int generated = 0;
    for (const auto& [m, c] : rows) {
      if (m != model) continue;
      ++counts[c.verdict];
      ++generated;
    }
    int failed = failures.contains(model) ? failures.at(model) : 0;
    out << model << ',' << generated + failed;
    for (identify::Verdict v : identify::kAllVerdicts) out << ',' << counts[v];
    out << ',' << failed << '\n';
  }
  return out.str();
}

StageOutput Identify(const PipelineConfig& config, std::ostream& log) {
  auto cases = LoadCases(config, log);
  auto templates = LoadTemplates(config);
  std::vector<json> prompts = ReadJsonl(OutPath(config, artifacts::kPrompts));
  std::map<std::size_t, obfuscate::RenamingMap> maps;
  for (const auto& p : prompts) {
    maps.emplace(p.at("template_index").get<std::size_t>(),
                 obfuscate::MapFromJson(p.at("map")));
  }
  std::vector<json> generations = ReadJsonl(OutPath(config, artifacts::kGenerations));
  identify::ClassifyOptions options = ClassifyOptionsFor(config);

  struct Item {
    std::string model;
    std::string template_id;
    std::optional<identify::Classification> classification;
    std::string failure;
  };
  auto items = ParallelMap<Item>(generations.size(), config.jobs, [&](std::size_t i) {
    const json& g = generations[i];
    std::size_t index = g.at("template_index").get<std::size_t>();
    if (index >= templates.size() || !maps.contains(index)) {
      throw StageError("generation refers to an unknown template: " +
                       g.at("template_id").get<std::string>());
    }
    const auto& t = templates[index];
    Item item;
    item.model = g.at("model_id").get<std::string>();
    item.template_id = t.Id();
    try {
      item.classification = identify::ClassifyVariant(
          CaseFor(cases, t.case_id), identify::SpecFromTemplate(t, item.model),
          llm::GenerationFromJson(g.at("generation")), maps.at(index), options);
    } catch (const identify::InfrastructureError& e) {
      item.failure = e.what();
    }
    return item;
  });

  std::vector<identify::Classification> classified;
  std::vector<std::size_t> classified_index;
  std::vector<json> failures;
  std::map<std::string, int> failures_by_model;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].classification) {
      classified.push_back(*items[i].classification);
      classified_index.push_back(i);
    } else {
      failures.push_back(Failure(items[i].template_id + "@" + items[i].model, items[i].failure));
      ++failures_by_model[items[i].model];
    }
  }
  identify::MarkDuplicates(classified);

  std::vector<json> records;
  std::vector<identify::BugInstance> instances;
  std::vector<std::pair<std::string, identify::Classification>> funnel;
  for (std::size_t k = 0; k < classified.size(); ++k) {
    const Item& item = items[classified_index[k]];
    json record = identify::ToJson(classified[k]);
    record["template_id"] = item.template_id;
    record["model_id"] = item.model;
    records.push_back(std::move(record));
    funnel.emplace_back(item.model, classified[k]);
    if (classified[k].instance) instances.push_back(*classified[k].instance);
  }
  std::vector<json> instance_records;
  for (const auto& b : instances) instance_records.push_back(identify::ToJson(b));

  StageOutput out;
  out.files[std::string(artifacts::kClassifications)] = Jsonl(records);
  out.files[std::string(artifacts::kCtxBugs)] = Jsonl(instance_records);
  out.files[std::string(artifacts::kCtxBugStats)] =
      identify::StatsCsv(identify::Summarize(instances));
  out.files[std::string(artifacts::kFunnel)] =
      FunnelCsv(config.models, funnel, failures_by_model);
  out.files[FailuresName(Stage::kIdentify)] = Jsonl(failures);
  out.items = static_cast<int>(items.size());
  out.failures = static_cast<int>(failures.size());
  out.counts = {{"classified", classified.size()},
                {"ctxbugs", instances.size()},
                {"failures", failures.size()}};
  log << "identify: " << instances.size() << " CtxBugs from " << items.size()
      << " generations\n";
  return out;
}

StageOutput Baseline(const PipelineConfig& config, std::ostream& log) {
  auto cases = LoadCases(config, log);
  auto ctxbugs = LoadInstances(config, artifacts::kCtxBugs);
  auto backends = Backends(config);
  identify::ClassifyOptions options = ClassifyOptionsFor(config);
  for (const auto& b : ctxbugs) {
    if (!backends.contains(b.generator_model_id)) {
      throw StageError("baseline: generator " + b.generator_model_id +
                       " is not among the configured models");
    }
  }

  std::vector<json> masked;
  for (const auto& b : ctxbugs) {
    masked.push_back(baselines::ToJson(baselines::BuildWithoutCtxBugs(CaseFor(cases, b.case_id), b)));
  }

  struct Item {
    json attempt;
    std::optional<identify::BugInstance> instance;
    std::string failure;
  };
  auto items = ParallelMap<Item>(ctxbugs.size(), config.jobs, [&](std::size_t i) {
    const auto& b = ctxbugs[i];
    Item item;
    try {
      baselines::IsoBugAttempt attempt =
          baselines::BuildIsoBug(CaseFor(cases, b.case_id), b,
                                 *backends.at(b.generator_model_id), b.generator_model_id,
                                 options);
      item.attempt = identify::ToJson(attempt.classification);
      item.attempt["source_instance_id"] = b.instance_id;
      item.attempt["model_id"] = b.generator_model_id;
      item.attempt["prompt_hash"] = attempt.prompt.Hash();
      item.attempt["generation"] = llm::ToJson(attempt.generation);
      item.instance = attempt.classification.instance;
    } catch (const identify::InfrastructureError& e) {
      item.failure = e.what();
    }
    return item;
  });

  std::vector<json> attempts;
  std::vector<identify::BugInstance> isobugs;
  std::vector<json> failures;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].failure.empty()) {
      failures.push_back(Failure(ctxbugs[i].instance_id, items[i].failure));
      continue;
    }
    attempts.push_back(items[i].attempt);
    if (items[i].instance) isobugs.push_back(*items[i].instance);
  }
  isobugs = identify::Clean(isobugs);
  std::vector<json> iso_records;
  for (const auto& b : isobugs) iso_records.push_back(identify::ToJson(b));
  std::vector<identify::BugInstance> all = ctxbugs;
  all.insert(all.end(), isobugs.begin(), isobugs.end());

  StageOutput out;
  out.files[std::string(artifacts::kWithoutCtxBugs)] = Jsonl(masked);
  out.files[std::string(artifacts::kIsoBugAttempts)] = Jsonl(attempts);
  out.files[std::string(artifacts::kIsoBugs)] = Jsonl(iso_records);
  out.files[std::string(artifacts::kBenchmarkStats)] =
      identify::StatsCsv(identify::Summarize(all));
  out.files[FailuresName(Stage::kBaseline)] = Jsonl(failures);
  out.items = static_cast<int>(ctxbugs.size());
  out.failures = static_cast<int>(failures.size());
  out.counts = {{"masked", masked.size()},
                {"isobug_attempts", attempts.size()},
                {"isobugs", isobugs.size()},
                {"failures", failures.size()}};
  log << "baseline: " << isobugs.size() << " IsoBugs from " << ctxbugs.size()
      << " CtxBugs\n";
  return out;
}

StageOutput Evaluate(const PipelineConfig& config, std::ostream& log) {
  auto cases = LoadCases(config, log);
  auto ctxbugs = LoadInstances(config, artifacts::kCtxBugs);
  auto isobugs = LoadInstances(config, artifacts::kIsoBugs);
  std::map<std::string, std::string> masked;
  for (const auto& j : ReadJsonl(OutPath(config, artifacts::kWithoutCtxBugs))) {
    baselines::MaskedCode m = baselines::MaskedFromJson(j);
    masked.emplace(m.source_instance_id, m.source);
  }
  auto backends = Backends(config);
  evaluate::EvalOptions options;
  options.shim.command = config.shim_command;
  options.timeout = config.timeout;

  struct Job {
    std::string model;
    evaluate::Setting setting;
    const identify::BugInstance* instance;
    std::string reused;
  };
  std::vector<Job> jobs;
  for (const auto& model : config.models) {
    for (const auto& b : ctxbugs) {
      if (!masked.contains(b.instance_id)) {
        throw StageError("evaluate: no masked code for " + b.instance_id +
                         "; rerun the 'baseline' stage");
      }
      jobs.push_back({model, evaluate::Setting::kWithCtxBugs, &b, b.method_source});
      jobs.push_back({model, evaluate::Setting::kWithoutCtxBugs, &b, masked.at(b.instance_id)});
    }
    for (const auto& b : isobugs) {
      jobs.push_back({model, evaluate::Setting::kWithIsoBugs, &b, b.method_source});
    }
  }

  struct Item {
    json record;
    std::string failure;
  };
  auto items = ParallelMap<Item>(jobs.size(), config.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    Item item;
    try {
      evaluate::EvalRecord r = evaluate::RunAdaptation(
          CaseFor(cases, job.instance->case_id), job.setting, *job.instance, job.reused,
          *backends.at(job.model), job.model, options);
      item.record = evaluate::ToJson(r);
    } catch (const identify::InfrastructureError& e) {
      item.failure = e.what();
    }
    return item;
  });
  std::vector<json> records;
  std::vector<json> failures;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].failure.empty()) {
      records.push_back(std::move(items[i].record));
    } else {
      failures.push_back(Failure(std::string(evaluate::SettingName(jobs[i].setting)) + ":" +
                                     jobs[i].instance->instance_id + "@" + jobs[i].model,
                                 items[i].failure));
    }
  }
  StageOutput out;
  out.files[std::string(artifacts::kEvalRecords)] = Jsonl(records);
  out.files[FailuresName(Stage::kEvaluate)] = Jsonl(failures);
  out.items = static_cast<int>(jobs.size());
  out.failures = static_cast<int>(failures.size());
  out.counts = {{"records", records.size()}, {"failures", failures.size()}};
  return out;
}

StageOutput Report(const PipelineConfig& config, std::ostream& log) {
  std::vector<evaluate::EvalRecord> records;
  for (const auto& j : ReadJsonl(OutPath(config, artifacts::kEvalRecords))) {
    records.push_back(evaluate::RecordFromJson(j));
  }
  evaluate::Report report = evaluate::BuildReport(records);
  for (const auto& note : report.notes) log << "report: " << note << "\n";
  StageOutput out;
  out.files[std::string(artifacts::kReportCsv)] = evaluate::ReportCsv(report.rows);
  out.files[std::string(artifacts::kReportJson)] = evaluate::ReportJson(report).dump(2) + "\n";
  out.files[std::string(artifacts::kReportByGenerator)] =
      evaluate::ReportCsv(report.by_generator, true);
  out.items = static_cast<int>(records.size());
  out.counts = {{"records", records.size()}, {"rows", report.rows.size()}};
  return out;
}

StageOutput RunBody(Stage stage, const PipelineConfig& config, std::ostream& log) {
  switch (stage) {
    case Stage::kPerturb:
      return Perturb(config, log);
    case Stage::kObfuscate:
      return Obfuscate(config, log);
    case Stage::kGenerate:
      return Generate(config, log);
    case Stage::kIdentify:
      return Identify(config, log);
    case Stage::kBaseline:
      return Baseline(config, log);
    case Stage::kEvaluate:
      return Evaluate(config, log);
    case Stage::kReport:
      return Report(config, log);
  }
  throw StageError("unknown stage");
}

bool NeedsShim(Stage stage) {
  return stage == Stage::kIdentify || stage == Stage::kBaseline || stage == Stage::kEvaluate;
}

}  // namespace

std::string_view StageName(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "";
}

Stage StageFromName(std::string_view name) {
  for (const auto& [s, n] : kStageNames) {
    if (n == name) return s;
  }
  throw std::invalid_argument("unknown stage: " + std::string(name));
}

const std::vector<Stage>& AllStages() {
  static const std::vector<Stage> stages = {Stage::kPerturb,  Stage::kObfuscate,
                                            Stage::kGenerate, Stage::kIdentify,
                                            Stage::kBaseline, Stage::kEvaluate,
                                            Stage::kReport};
  return stages;
}

std::string ManifestName(Stage stage) {
  return std::string(StageName(stage)) + ".manifest.json";
}

void PipelineConfig::Validate() const {
  if (out.empty()) throw std::invalid_argument("--out is required");
  if (grammar != syntax::kPythonGrammar) {
    throw std::invalid_argument("unsupported grammar: " + grammar);
  }
  if (rules.empty()) throw std::invalid_argument("rule subset is empty");
  for (int r : rules) {
    if (r < 1 || r > 10) throw std::invalid_argument("rule out of range: " + std::to_string(r));
  }
  if (models.empty()) throw std::invalid_argument("no models configured");
  if (jobs < 1) throw std::invalid_argument("--jobs must be at least 1");
  if (timeout.count() < 1) throw std::invalid_argument("--timeout must be positive");
}

StageResult RunStage(Stage stage, const PipelineConfig& config, std::ostream& log) {
  try {
    config.Validate();
  } catch (const std::invalid_argument& e) {
    throw StageError(std::string(StageName(stage)) + ": " + e.what());
  }
  if (NeedsShim(stage) && config.shim_command.empty()) {
    throw StageError(std::string(StageName(stage)) + ": no test shim configured (--shim)");
  }
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw StageError("cannot create " + config.out.string() + ": " + ec.message());

  StageSpec spec = SpecFor(stage, config);
  json inputs = InputHashes(spec, stage);
  const fs::path manifest_path = config.out / ManifestName(stage);

  StageResult result;
  result.stage = stage;
  if (fs::exists(manifest_path)) {
    json previous = json::parse(ReadFile(manifest_path), nullptr, false);
    bool same = !previous.is_discarded() && previous.value("inputs", json()) == inputs &&
                previous.value("config", json()) == spec.config;
    if (same) {
      const json& outputs = previous.at("outputs");
      for (const auto& name : spec.outputs) {
        fs::path path = config.out / name;
        if (!outputs.contains(name) || !fs::exists(path) ||
            outputs.at(name) != text::Sha256Hex(ReadFile(path))) {
          same = false;
          break;
        }
      }
    }
    if (same) {
      result.up_to_date = true;
      result.items = previous.value("items", 0);
      result.failures = previous.value("failures", 0);
      log << StageName(stage) << ": up-to-date\n";
      return result;
    }
  }

  StageOutput output;
  try {
    output = RunBody(stage, config, log);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(StageName(stage)) + ": " + e.what());
  }
  json outputs = json::object();
  for (const auto& name : spec.outputs) {
    const std::string& bytes = output.files[name];
    WriteFile(config.out / name, bytes);
    outputs[name] = text::Sha256Hex(bytes);
  }
  json manifest = {{"stage", StageName(stage)},
                   {"inputs", inputs},
                   {"config", spec.config},
                   {"counts", output.counts},
                   {"items", output.items},
                   {"failures", output.failures},
                   {"outputs", outputs}};
  WriteFile(manifest_path, manifest.dump(2) + "\n");
  result.items = output.items;
  result.failures = output.failures;
  log << StageName(stage) << ": " << output.items << " items, " << output.failures
      << " failures\n";
  return result;
}

std::vector<StageResult> RunAll(const PipelineConfig& config, std::ostream& log) {
  std::vector<StageResult> results;
  for (Stage stage : AllStages()) results.push_back(RunStage(stage, config, log));
  return results;
}

int ValidateCorpus(const fs::path& path, std::ostream& log) {
  corpus::LoadResult loaded;
  try {
    loaded = corpus::LoadCorpus(path);
  } catch (const corpus::CorpusError& e) {
    log << "error: " << e.what() << "\n";
    return kExitStageFailure;
  }
  int errors = 0;
  for (const auto& d : loaded.diagnostics) {
    bool error = d.severity == corpus::Diagnostic::Severity::kError;
    errors += error ? 1 : 0;
    log << (error ? "error" : "warning");
    if (d.line) log << " line " << d.line;
    if (!d.case_id.empty()) log << " " << d.case_id;
    log << ": " << d.message << "\n";
  }
  log << loaded.cases.size() << " valid cases, " << errors << " rejected records\n";
  return errors > 0 ? kExitStageFailure : kExitOk;
}

int ConvertClassEval(const fs::path& release, const fs::path& corpus_out, std::ostream& log) {
  try {
    json data = json::parse(ReadFile(release));
    std::vector<corpus::AdaptationCase> cases = corpus::ConvertClassEval(data);
    corpus::WriteCorpus(corpus_out, cases);
    log << "wrote " << cases.size() << " cases to " << corpus_out.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitStageFailure;
  }
}

}  // namespace ctxbug::pipeline
