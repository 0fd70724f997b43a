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
"""Regenerates mini_corpus.jsonl from the readable sources in mini_classes/.

Each listed method becomes one record. The script also runs every class
test file against its unmodified class and refuses to write the corpus if
any test fails.
"""

import ast
import json
import pathlib
import sys
import textwrap
import unittest

HERE = pathlib.Path(__file__).resolve().parent
SOURCES = HERE / "mini_classes"

CLASSES = [
    ("status_flags", "StatusFlags", "A set of integer bit flags stored in state.", [
        ("add", "Combine the given status value into state and return the new state."),
        ("remove", "Clear the given status value from state if it is set and return state."),
    ]),
    ("shopping_cart", "ShoppingCart", "A shopping cart that maps item names to price and quantity.", [
        ("add_item", "Add quantity units of an item with the given price, merging with an existing entry."),
        ("remove_item", "Remove quantity units of an item, dropping it when none remain. Return False if absent."),
        ("total_price", "Return the total price of all items including tax, rounded to two decimals."),
    ]),
    ("vector_stats", "VectorStats", "Summary statistics over a numeric vector.", [
        ("mean", "Return the arithmetic mean of the values, or None when there are no values."),
        ("normalize", "Return the values scaled to unit Euclidean length as a list; a zero vector is returned unchanged."),
        ("clip", "Return the values limited to the closed range [low, high] as a list."),
    ]),
    ("bank_account", "BankAccount", "A bank account with a balance and a transaction history.", [
        ("deposit", "Add a positive amount to the balance, record it, and return the balance."),
        ("withdraw", "Remove an amount from the balance, record it, and return the balance. Raise InsufficientFunds when the balance is too low."),
        ("transfer", "Move an amount from this account to another account and return True."),
    ]),
    ("text_processor", "TextProcessor", "Simple text utilities over a stored string.", [
        ("word_count", "Return the number of alphabetic words in the text, ignoring case."),
        ("capitalize_words", "Return the text with the first letter of every space-separated word in upper case."),
        ("is_palindrome", "Return whether the text reads the same backwards, ignoring case and non-alphanumeric characters."),
    ]),
    ("grade_book", "GradeBook", "A grade book mapping students to lists of scores.", [
        ("average", "Return the average score of a student, or 0 when the student has no scores."),
        ("letter_grade", "Return A for an average of at least 90, B for at least 80, C for at least the passing score, else F."),
        ("passing_students", "Return the sorted names of students whose average reaches the passing score."),
    ]),
    ("bounded_stack", "BoundedStack", "A stack with a fixed capacity.", [
        ("push", "Push an item unless the stack is full. Return whether the item was pushed."),
        ("pop", "Remove and return the top item, or None when the stack is empty."),
        ("is_full", "Return whether the stack holds capacity items."),
    ]),
]

STDLIB = set(sys.stdlib_module_names)


def method_source(class_file, class_name, method_name):
    tree = ast.parse(class_file)
    lines = class_file.splitlines(keepends=True)
    for node in tree.body:
        if isinstance(node, ast.ClassDef) and node.name == class_name:
            for item in node.body:
                if isinstance(item, ast.FunctionDef) and item.name == method_name:
                    text = "".join(lines[item.lineno - 1:item.end_lineno])
                    return textwrap.dedent(text).rstrip("\n")
    raise KeyError(method_name)


def lib_deps(class_file):
    roots = set()
    for node in ast.walk(ast.parse(class_file)):
        if isinstance(node, ast.Import):
            roots.update(alias.name.split(".")[0] for alias in node.names)
        elif isinstance(node, ast.ImportFrom) and node.level == 0 and node.module:
            roots.add(node.module.split(".")[0])
    return sorted(r for r in roots if r not in STDLIB)


def check_tests(class_file, test_file):
    namespace = {"__name__": "fixture"}
    exec(compile(class_file, "class.py", "exec"), namespace)
    exec(compile(test_file, "tests.py", "exec"), namespace)
    suite = unittest.TestSuite()
    loader = unittest.TestLoader()
    for value in namespace.values():
        if isinstance(value, type) and issubclass(value, unittest.TestCase):
            suite.addTests(loader.loadTestsFromTestCase(value))
    result = unittest.TestResult()
    suite.run(result)
    if result.failures or result.errors or result.testsRun == 0:
        raise SystemExit(f"fixture tests fail: {result.failures + result.errors}")


def main():
    records = []
    for stem, class_name, class_description, methods in CLASSES:
        class_file = (SOURCES / f"{stem}.py").read_text()
        test_file = (SOURCES / f"{stem}_test.py").read_text()
        check_tests(class_file, test_file)
        for method_name, method_description in methods:
            records.append({
                "case_id": f"{class_name}.{method_name}",
                "class_name": class_name,
                "class_context": class_file,
                "method_name": method_name,
                "solution_method": method_source(class_file, class_name, method_name),
                "requirement": f"{class_description}\n\n{method_description}",
                "test_suite": test_file,
                "lib_deps": lib_deps(class_file),
                "topic": stem,
            })
    out = HERE / "mini_corpus.jsonl"
    with out.open("w") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
