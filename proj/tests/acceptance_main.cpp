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

// Acceptance runner: one PASS, FAIL, or SKIP line per headline criterion.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbug/corpus.hpp"
#include "ctxbug/evaluate.hpp"
#include "ctxbug/identify.hpp"
#include "ctxbug/perturb.hpp"
#include "ctxbug/pipeline.hpp"
#include "oracles.hpp"
#include "studies.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using ctxbug::corpus::AdaptationCase;
using ctxbug::identify::Verdict;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
  std::vector<std::string> log;    // printed below a failing line
  std::vector<std::string> notes;  // always printed
};

Outcome FromStudy(const ctxbug::studies::StudyResult& result, const std::string& what) {
  Outcome out;
  out.status = result.ok() ? Status::kPass : Status::kFail;
  out.detail = result.Summary() + " " + what;
  out.log = result.failures;
  out.notes = result.notes;
  return out;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

fs::path FixturePath(const std::string& name) { return fs::path(CTXBUG_FIXTURE_DIR) / name; }

const std::vector<AdaptationCase>& Corpus() {
  static const std::vector<AdaptationCase> cases =
      ctxbug::corpus::LoadCorpus(FixturePath("mini_corpus.jsonl")).cases;
  return cases;
}

const AdaptationCase& StatusFlagsAdd() {
  for (const auto& c : Corpus()) {
    if (c.case_id == "StatusFlags.add") return c;
  }
  throw std::runtime_error("fixture corpus lacks StatusFlags.add");
}

ctxbug::testexec::ShimConfig MockShim() {
  return {{CTXBUG_PYTHON, FixturePath("mock_shim.py").string()}, {}};
}

const ctxbug::perturb::PerturbedTemplate& StatusFlagsTemplate(int rule_id) {
  static const auto templates = ctxbug::perturb::PerturbAll(StatusFlagsAdd());
  for (const auto& t : templates) {
    if (t.rule_id == rule_id) return t;
  }
  throw std::runtime_error("no status-flag template for rule " + std::to_string(rule_id));
}

ctxbug::identify::Classification ClassifyStatusFlags(int rule_id, const std::string& code) {
  ctxbug::identify::ClassifyOptions options;
  options.shim = MockShim();
  options.timeout = std::chrono::seconds(20);
  return ctxbug::identify::ClassifyCode(
      StatusFlagsAdd(), ctxbug::identify::SpecFromTemplate(StatusFlagsTemplate(rule_id), "gen"),
      code, options);
}

constexpr char kPipeVariant[] =
    "def add(self, status):\n"
    "    self.state = self.state | status\n"
    "    return self.state\n";
constexpr char kPlusVariant[] =
    "def add(self, status):\n"
    "    self.state = self.state + status\n"
    "    return self.state\n";
constexpr char kSwappedOperands[] =
    "def add(self, status):\n"
    "    self.state = status | self.state\n"
    "    return self.state\n";

Outcome StatusFlagVerdicts() {
  Outcome out;
  bool ok = true;
  std::ostringstream detail;
  double slowest = 0.0;
  auto check = [&](const std::string& label, int rule, const std::string& code,
                   Verdict expected) {
    auto start = Clock::now();
    auto result = ClassifyStatusFlags(rule, code);
    double elapsed = Seconds(start);
    slowest = std::max(slowest, elapsed);
    bool good = result.verdict == expected && elapsed < 1.0;
    if (!good) {
      out.log.push_back(label + ": got " + std::string(VerdictName(result.verdict)) + " in " +
                        std::to_string(elapsed) + " s; " + result.details);
    }
    ok = ok && good;
    return result;
  };

  auto plus = check("'+' variant", 4, kPlusVariant, Verdict::kValid);
  if (plus.instance) {
    const auto& locs = plus.instance->bug_locations;
    bool operator_changed =
        locs.size() == 1 && locs[0].solution_text == "|" && locs[0].variant_text == "+" &&
        locs[0].correspondence.state == ctxbug::differ::Correspondence::State::kMatched &&
        !locs[0].correspondence.identical;
    bool one_plus_one_fails = false;
    if (plus.outcome) {
      for (const auto& t : plus.outcome->tests) {
        if (t.name.find("test_add_same_flag_twice") != std::string::npos) {
          one_plus_one_fails = t.verdict != ctxbug::testexec::Verdict::kPass;
        }
      }
    }
    if (!operator_changed) out.log.push_back("'+' location is not a changed operator");
    if (!one_plus_one_fails) out.log.push_back("state=1, status=1 test did not fail");
    ok = ok && operator_changed && one_plus_one_fails;
  } else {
    ok = false;
  }
  check("'|' variant", 4, kPipeVariant, Verdict::kNoDifference);
  check("swapped operands", 5, kSwappedOperands, Verdict::kPassesTests);
  detail << "'+' valid, '|' no_difference, 'status | self.state' passes_tests; slowest "
         << ctxbug::evaluate::FormatFixed(slowest, 3) << " s";
  out.status = ok ? Status::kPass : Status::kFail;
  out.detail = detail.str();
  return out;
}

Outcome DecisionTable() {
  struct Row {
    std::string label;
    int rule;
    std::string code;
    Verdict expected;
  };
  const std::vector<Row> rows = {
      {"identity", 4, kPipeVariant, Verdict::kNoDifference},
      {"single-location change", 4, kPlusVariant, Verdict::kValid},
      {"deleted node", 2,
       "def add(self, status):\n    self.state = self.state | status\n", Verdict::kValid},
      {"extraneous change", 4,
       "def add(self, status):\n    print(status)\n    self.state = self.state + status\n"
       "    return self.state\n",
       Verdict::kExtraneousChange},
      {"passing alternative", 5, kSwappedOperands, Verdict::kPassesTests},
      {"unparseable", 4, "def add(self, status):\n    self.state = (\n",
       Verdict::kUnparseable},
      {"empty", 4, "", Verdict::kEmpty},
  };
  Outcome out;
  std::vector<ctxbug::identify::Classification> results;
  int correct = 0;
  for (const auto& row : rows) {
    results.push_back(ClassifyStatusFlags(row.rule, row.code));
    if (results.back().verdict == row.expected) {
      ++correct;
    } else {
      out.log.push_back(row.label + ": expected " + std::string(VerdictName(row.expected)) +
                        ", got " + std::string(VerdictName(results.back().verdict)));
    }
  }
  // A reformatted repeat of the single-location change is the duplicate.
  results.push_back(ClassifyStatusFlags(4, std::string(kPlusVariant) + "\n\n"));
  ctxbug::identify::MarkDuplicates(results);
  bool duplicate = results.back().verdict == Verdict::kDuplicate &&
                   results[1].verdict == Verdict::kValid;
  if (!duplicate) out.log.push_back("reformatted repeat was not marked duplicate");
  int total = static_cast<int>(rows.size()) + 1;
  correct += duplicate ? 1 : 0;
  out.status = correct == total ? Status::kPass : Status::kFail;
  out.detail = std::to_string(correct) + "/" + std::to_string(total) +
               " fixtures on their designated verdict (all seven verdicts covered)";
  return out;
}

Outcome ClassEvalScale() {
  const char* release = std::getenv("CTXBUG_CLASSEVAL");
  Outcome out;
  if (!release || !*release) {
    out.status = Status::kSkip;
    out.detail = "set CTXBUG_CLASSEVAL to the ClassEval release JSON to run";
    return out;
  }
  std::ifstream in(release);
  if (!in) {
    out.detail = std::string("cannot read ") + release;
    return out;
  }
  auto cases = ctxbug::corpus::ConvertClassEval(nlohmann::json::parse(in));
  std::map<int, int> per_rule;
  int templates = 0;
  for (const auto& c : cases) {
    if (!ctxbug::corpus::ValidateCase(c).empty()) continue;
    for (const auto& t : ctxbug::perturb::PerturbAll(c)) {
      ++per_rule[t.rule_id];
      ++templates;
    }
  }
  for (const auto& [rule, count] : per_rule) {
    out.notes.push_back("rule " + std::to_string(rule) + ": " + std::to_string(count) +
                        " templates");
  }
  constexpr double kReference = 3527.0;
  double deviation = std::abs(templates - kReference) / kReference;
  out.status = deviation <= 0.15 ? Status::kPass : Status::kFail;
  out.detail = std::to_string(cases.size()) + " methods, " + std::to_string(templates) +
               " templates (" + ctxbug::evaluate::FormatFixed(100.0 * deviation) +
               "% from 3527)";
  return out;
}

Outcome DifferOracle() {
  auto edits = ctxbug::studies::SingleTokenEdits(Corpus(), 1000, 7);
  auto trees = ctxbug::studies::RandomTreeScripts(2000, 20, 20260518);
  Outcome out;
  out.status = edits.ok() && trees.ok() && edits.trials == 1000 && trees.trials == 2000
                   ? Status::kPass
                   : Status::kFail;
  out.detail = edits.Summary() + " single-token edits located exactly, " + trees.Summary() +
               " random tree pairs reproduced";
  out.log = edits.failures;
  out.log.insert(out.log.end(), trees.failures.begin(), trees.failures.end());
  return out;
}

Outcome MetricsArithmetic() {
  using ctxbug::evaluate::FormatFixed;
  using ctxbug::evaluate::RelativeDrop;
  Outcome out;
  std::string headline = FormatFixed(RelativeDrop(68.67, 53.20));
  int within = 0;
  const auto& cells = ctxbug::oracles::PublishedRelativeCells();
  for (const auto& cell : cells) {
    double got = RelativeDrop(cell.baseline, cell.value);
    if (std::abs(got - cell.published) <= 0.01 + 1e-9) {
      ++within;
    } else {
      out.log.push_back(cell.table + " " + cell.model + " " + cell.column + ": " +
                        FormatFixed(got) + " vs " + FormatFixed(cell.published));
    }
  }
  bool ok = headline == "22.53" && within == static_cast<int>(cells.size());
  out.status = ok ? Status::kPass : Status::kFail;
  out.detail = "53.20 vs 68.67 -> " + headline + "%; " + std::to_string(within) + "/" +
               std::to_string(cells.size()) + " published relative cells within 0.01";
  return out;
}

std::map<std::string, std::string> DirectoryBytes(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    files[entry.path().filename().string()] = buffer.str();
  }
  return files;
}

Outcome Determinism() {
  Outcome out;
  std::string pattern = (fs::temp_directory_path() / "ctxbug-acceptance-XXXXXX").string();
  if (!mkdtemp(pattern.data())) {
    out.detail = "cannot create a temporary directory";
    return out;
  }
  const fs::path root = pattern;
  ctxbug::pipeline::PipelineConfig config;
  config.corpus = FixturePath("mini_corpus.jsonl");
  config.models = {"stub"};
  config.stub = true;
  config.jobs = 2;
  config.timeout = std::chrono::seconds(20);
  config.shim_command = MockShim().command;

  auto start = Clock::now();
  std::ostringstream log;
  int item_failures = 0;
  try {
    for (const char* name : {"first", "second"}) {
      config.out = root / name;
      for (const auto& r : ctxbug::pipeline::RunAll(config, log)) item_failures += r.failures;
    }
  } catch (const std::exception& e) {
    out.detail = e.what();
    fs::remove_all(root);
    return out;
  }
  double elapsed = Seconds(start);
  auto first = DirectoryBytes(root / "first");
  auto second = DirectoryBytes(root / "second");
  int identical = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it != second.end() && it->second == bytes) {
      ++identical;
    } else {
      out.log.push_back(name + " differs between runs");
    }
  }
  if (first.size() != second.size()) out.log.push_back("artifact sets differ");
  if (item_failures > 0) out.log.push_back(std::to_string(item_failures) + " item failures");
  bool has_report = first.count(std::string(ctxbug::pipeline::artifacts::kReportCsv)) > 0;
  bool ok = identical == static_cast<int>(first.size()) && first.size() == second.size() &&
            has_report && item_failures == 0 && elapsed < 300.0;
  out.status = ok ? Status::kPass : Status::kFail;
  out.detail = std::to_string(identical) + "/" + std::to_string(first.size()) +
               " artifacts byte-identical across two full stub runs in " +
               ctxbug::evaluate::FormatFixed(elapsed, 1) + " s";
  fs::remove_all(root);
  return out;
}

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<Criterion> criteria = {
      {"status-flag-end-to-end", StatusFlagVerdicts},
      {"perturbation-oracle",
       [] {
         return FromStudy(ctxbug::studies::PerturbationOracle(Corpus()),
                          "templates agree with the tree-walk oracle and refill byte-exactly");
       }},
      {"classeval-scale", ClassEvalScale},
      {"obfuscation-round-trip",
       [] {
         return FromStudy(ctxbug::studies::ObfuscationRoundTrip(Corpus()),
                          "sources and requirements round-trip with kind sequences kept");
       }},
      {"differ-oracle", DifferOracle},
      {"identification-decision-table", DecisionTable},
      {"metrics-arithmetic", MetricsArithmetic},
      {"resolution-rate-oracle",
       [] {
         return FromStudy(ctxbug::studies::ResolutionOracle(Corpus(), 3, 7),
                          "trials agree with the text-splice oracle");
       }},
      {"determinism", Determinism},
  };

  if (Corpus().size() != 20) {
    std::cout << "FAIL  fixture-corpus: expected 20 cases, loaded " << Corpus().size() << "\n";
    return 1;
  }
  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), criterion.name) == only.end()) {
      continue;
    }
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.status = Status::kFail;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const char* label = outcome.status == Status::kPass   ? "PASS"
                        : outcome.status == Status::kSkip ? "SKIP"
                                                          : "FAIL";
    std::cout << label << "  " << criterion.name << ": " << outcome.detail << "\n";
    if (outcome.status == Status::kFail) {
      ++failures;
      for (const auto& line : outcome.log) std::cout << "      " << line << "\n";
    }
    for (const auto& line : outcome.notes) std::cout << "      " << line << "\n";
    std::cout.flush();
  }
  return failures == 0 ? 0 : 1;
}
