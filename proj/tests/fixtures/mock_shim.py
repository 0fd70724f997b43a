# Copyright 2026 The CtxBugGen Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Minimal result-file writer used by the test suite in place of the shim.

Usage: mock_shim.py JOB_JSON RESULT_JSON

Runs the job's unittest cases in the module namespace and writes
{"tests": [{"name", "verdict", "message"}], "duration"}.
"""

import io
import json
import sys
import time
import types
import unittest


def _collect(suite):
    for item in suite:
        if isinstance(item, unittest.TestSuite):
            yield from _collect(item)
        else:
            yield item


def main(job_path, result_path):
    with open(job_path, encoding="utf-8") as f:
        job = json.load(f)
    started = time.monotonic()
    module = types.ModuleType("candidate")
    sys.modules["candidate"] = module
    tests = []
    try:
        exec(compile(job["module_source"], "candidate.py", "exec"), module.__dict__)
        exec(compile(job["tests_source"], "tests.py", "exec"), module.__dict__)
    except BaseException as exc:  # import-time crash
        tests.append({"name": "<module>", "verdict": "error",
                      "message": f"{type(exc).__name__}: {exc}"})
    else:
        loader = unittest.TestLoader()
        cases = []
        for value in list(module.__dict__.values()):
            if (isinstance(value, type) and issubclass(value, unittest.TestCase)
                    and value is not unittest.TestCase):
                cases.extend(_collect(loader.loadTestsFromTestCase(value)))
        cases.sort(key=lambda case: case.id())
        for case in cases:
            result = unittest.TestResult()
            case.run(result)
            name = case.id().split(".", 1)[-1]
            if result.failures:
                verdict, message = "fail", result.failures[0][1].strip().splitlines()[-1]
            elif result.errors:
                verdict, message = "error", result.errors[0][1].strip().splitlines()[-1]
            else:
                verdict, message = "pass", ""
            tests.append({"name": name, "verdict": verdict, "message": message})
    with open(result_path, "w", encoding="utf-8") as f:
        json.dump({"tests": tests, "duration": time.monotonic() - started}, f)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
