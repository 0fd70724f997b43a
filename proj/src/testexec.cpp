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

#include "ctxbug/testexec.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "ctxbug/python_lang.hpp"
#include "ctxbug/syntax.hpp"
#include "ctxbug/text_util.hpp"

namespace ctxbug::testexec {

namespace fs = std::filesystem;
using syntax::Node;
using syntax::Tree;

namespace {

constexpr const char* kEnvAllowlist[] = {"PATH", "HOME", "LANG", "LC_ALL",
                                         "PYTHONPATH", "TMPDIR"};

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

fs::path MakePrivateDir() {
  std::string pattern = (fs::temp_directory_path() / "ctxbug-run-XXXXXX").string();
  if (!mkdtemp(pattern.data())) {
    throw std::runtime_error(std::string("mkdtemp failed: ") + std::strerror(errno));
  }
  return pattern;
}

std::vector<std::string> ScrubbedEnvironment(const ShimConfig& shim) {
  std::vector<std::string> env;
  for (const char* name : kEnvAllowlist) {
    if (const char* value = std::getenv(name)) {
      env.push_back(std::string(name) + "=" + value);
    }
  }
  env.emplace_back("PYTHONHASHSEED=0");
  env.emplace_back("PYTHONDONTWRITEBYTECODE=1");
  for (const auto& entry : shim.extra_env) env.push_back(entry);
  return env;
}

TestOutcome ErrorOutcome(std::string name, std::string diagnostic) {
  TestOutcome outcome;
  outcome.tests.push_back({std::move(name), Verdict::kError, diagnostic});
  outcome.diagnostic = std::move(diagnostic);
  return outcome;
}

}  // namespace

AssembledProgram Assemble(const corpus::AdaptationCase& c,
                          std::string_view candidate_method) {
  Tree candidate = syntax::Parse(std::string(candidate_method));
  const Node* function = python::SoleFunction(candidate);
  if (!function || candidate.has_errors()) {
    throw AssemblyError("candidate is not a single method definition");
  }
  const Node* slot = candidate.Parent(*function);
  bool decorated = slot && slot->kind == "decorated_definition";
  if (!decorated) slot = function;

  // Normalize the method name before extracting text.
  std::vector<syntax::SpanEdit> renames;
  const Node* name = syntax::ChildByField(*function, "name");
  if (name && syntax::NodeText(candidate, *name) != c.method_name) {
    renames.push_back({name->span, c.method_name});
  }
  std::size_t column =
      slot->span.start - python::LineStart(candidate.source(), slot->span.start);
  std::string text = syntax::Splice(
      std::string_view(candidate.source()).substr(0, slot->span.end),
      std::move(renames));
  text = text.substr(slot->span.start);
  text = text::Dedent(text, column);

  Tree context = syntax::Parse(c.class_context);
  corpus::MethodSlot target;
  try {
    target = corpus::FindMethodSlot(context, c.class_name, c.method_name);
  } catch (const corpus::CorpusError& e) {
    throw std::logic_error(std::string("target slot missing: ") + e.what());
  }
  syntax::Span replaced = decorated ? target.span : target.def_span;
  std::string body = text::IndentFollowingLines(text::Trim(text), target.indent);

  AssembledProgram program;
  program.case_id = c.case_id;
  program.module_source = syntax::Splice(c.class_context, {{replaced, body}});
  program.tests_source = c.test_suite;
  return program;
}

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kError:
      return "error";
  }
  return "error";
}

Verdict VerdictFromName(std::string_view name) {
  if (name == "pass") return Verdict::kPass;
  if (name == "fail") return Verdict::kFail;
  return Verdict::kError;
}

bool AllPassed(const TestOutcome& outcome) {
  if (outcome.timed_out || outcome.tests.empty()) return false;
  for (const auto& test : outcome.tests) {
    if (test.verdict != Verdict::kPass) return false;
  }
  return true;
}

nlohmann::json ToJson(const TestOutcome& outcome) {
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : outcome.tests) {
    tests.push_back(
        {{"name", t.name}, {"verdict", VerdictName(t.verdict)}, {"message", t.message}});
  }
  return {{"tests", std::move(tests)},
          {"all_passed", outcome.all_passed},
          {"timed_out", outcome.timed_out},
          {"diagnostic", outcome.diagnostic}};
}

TestOutcome ParseResult(const nlohmann::json& result) {
  TestOutcome outcome;
  for (const auto& t : result.at("tests")) {
    outcome.tests.push_back({t.at("name").get<std::string>(),
                             VerdictFromName(t.at("verdict").get<std::string>()),
                             t.value("message", std::string())});
  }
  outcome.duration_seconds = result.value("duration", 0.0);
  outcome.all_passed = AllPassed(outcome);
  return outcome;
}

TestOutcome RunTests(const AssembledProgram& program, std::chrono::seconds timeout,
                     const ShimConfig& shim) {
  if (shim.command.empty()) return ErrorOutcome("<shim>", "no shim command configured");
  fs::path dir;
  try {
    dir = MakePrivateDir();
  } catch (const std::exception& e) {
    return ErrorOutcome("<shim>", e.what());
  }
  const fs::path job = dir / "job.json";
  const fs::path result = dir / "result.json";
  const fs::path log = dir / "shim.log";
  WriteFile(job, nlohmann::json{{"module_source", program.module_source},
                                {"tests_source", program.tests_source},
                                {"timeout", timeout.count()}}
                     .dump());

  // Everything the child needs is prepared before fork.
  std::vector<std::string> args = shim.command;
  args.push_back(job.string());
  args.push_back(result.string());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<std::string> env = ScrubbedEnvironment(shim);
  std::vector<char*> envp;
  for (auto& e : env) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::string dir_string = dir.string();
  std::string log_string = log.string();

  auto started = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    fs::remove_all(dir);
    return ErrorOutcome("<shim>", std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    if (chdir(dir_string.c_str()) != 0) _exit(126);
    int fd = open(log_string.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    if (fd >= 0) {
      dup2(fd, STDOUT_FILENO);
      dup2(fd, STDERR_FILENO);
      close(fd);
    }
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    execvpe(argv[0], argv.data(), envp.data());
    _exit(127);
  }
  setpgid(pid, pid);

  bool timed_out = false;
  int status = 0;
  auto deadline = started + timeout;
  while (true) {
    pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 started)
                       .count();

  TestOutcome outcome;
  std::string log_text = ReadFile(log);
  if (timed_out) {
    outcome = ErrorOutcome("<timeout>", "wall-clock limit exceeded");
    outcome.timed_out = true;
  } else if (!fs::exists(result)) {
    outcome = ErrorOutcome("<shim>", "shim wrote no result file: " + log_text);
  } else {
    try {
      outcome = ParseResult(nlohmann::json::parse(ReadFile(result)));
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        outcome.diagnostic = "shim exited abnormally: " + log_text;
      }
    } catch (const std::exception& e) {
      outcome = ErrorOutcome("<shim>", std::string("malformed result file: ") + e.what());
    }
  }
  outcome.duration_seconds = elapsed;
  outcome.all_passed = AllPassed(outcome);
  std::error_code ignored;
  fs::remove_all(dir, ignored);
  return outcome;
}

}  // namespace ctxbug::testexec
