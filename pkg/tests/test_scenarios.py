#!/usr/bin/env python
"""
Scenario runner tests: document validation, the check registry, report
determinism and the command-line exit codes.
"""

import copy
import importlib
import json
import os
import sys
import unittest
import logging

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
import env
import main
import services.scenarios_services as scenarios_services
from services.examples_services import builtin_example
from services.logtensor_services import DecompositionInconsistency
from services.scenarios_services import (
    CHECKS,
    LIBRARY_OPERATIONS,
    ScenarioError,
    covered_operations,
    parse_scenario,
    report_document,
    run,
)

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

SEED = 20240611


@pytest.fixture(scope="module")
def fibration_document():
    return builtin_example("rational-fibration", SEED).to_document()


@pytest.fixture(scope="module")
def planes_document():
    return builtin_example("p3-planes", SEED).to_document()


@pytest.fixture(scope="module")
def fibration_report():
    return run(builtin_example("rational-fibration", SEED))


def _without_timings(document):
    document = copy.deepcopy(document)
    for check in document["checks"]:
        check.pop("seconds", None)
    return document


def test_builtin_document_parses(fibration_document):
    scenario = parse_scenario(fibration_document)
    assert scenario.name == "rational-fibration"
    assert fibration_document["schema"] == env.SCENARIO_SCHEMA


def test_every_violation_is_reported(fibration_document):
    document = copy.deepcopy(fibration_document)
    document["schema"] = "logfol.scenario/0"
    document["poles"][0][0][1] = "1/0"
    document["checks"].append({"name": "no_such_check"})
    document["tolerances"] = {"bogus": 1.0}
    with pytest.raises(ScenarioError) as info:
        parse_scenario(document)
    violations = info.value.violations
    assert len(violations) == 4
    assert any("schema" in v for v in violations)
    assert any("pole 1" in v for v in violations)
    assert any("no_such_check" in v for v in violations)
    assert any("bogus" in v for v in violations)


def test_unknown_fields_are_rejected(fibration_document):
    document = copy.deepcopy(fibration_document)
    document["colour"] = "blue"
    with pytest.raises(ScenarioError):
        parse_scenario(document)


def test_tensor_off_the_radial_kernel(fibration_document):
    document = copy.deepcopy(fibration_document)
    document["tensor"]["entries"] = [[[1, 2], "1"]]
    with pytest.raises(ScenarioError, match="radial kernel"):
        parse_scenario(document)


def test_proportional_poles(planes_document):
    document = copy.deepcopy(planes_document)
    document["poles"][1] = copy.deepcopy(document["poles"][0])
    with pytest.raises(ScenarioError, match="non-proportional"):
        parse_scenario(document)


def test_registry_covers_every_operation():
    assert covered_operations() == set(LIBRARY_OPERATIONS)


def test_builtin_checks_are_registered():
    for name in ("p3-planes", "rational-fibration", "perturbation-family"):
        scenario = builtin_example(name, SEED)
        assert {c.name for c in scenario.checks} <= set(CHECKS)


def test_fibration_report_passes(fibration_report):
    assert fibration_report.passed, [c for c in fibration_report.checks if not c.passed]
    names = [c.name for c in fibration_report.checks]
    assert names == sorted(names)
    first_integral = next(c for c in fibration_report.checks if c.name == "first_integral")
    assert first_integral.counts["exponents"] == [6, 3, 2]


def test_reports_are_deterministic(fibration_report):
    again = run(builtin_example("rational-fibration", SEED))
    assert _without_timings(report_document(again)) == _without_timings(report_document(fibration_report))


def test_report_document_uses_schema_key(fibration_report):
    document = report_document(fibration_report)
    assert document["schema"] == env.REPORT_SCHEMA
    assert "schema_" not in document
    json.dumps(document)


def test_perturbation_family_report():
    report = run(builtin_example("perturbation-family", SEED))
    assert report.passed, [c for c in report.checks if not c.passed]
    kupka = next(c for c in report.checks if c.name == "kupka")
    assert kupka.counts["kind"] == "kupka"


def test_failing_check_is_captured(fibration_document):
    document = copy.deepcopy(fibration_document)
    document["checks"] = [{"name": "decompose_corank2"}, {"name": "foliation_degree", "params": {"expected": 99}}]
    report = run(parse_scenario(document))
    assert not report.passed
    corank = next(c for c in report.checks if c.name == "decompose_corank2")
    assert corank.error_type == "ValueError"
    degree = next(c for c in report.checks if c.name == "foliation_degree")
    assert degree.error is None and not degree.passed


def test_debug_run_cross_checks_the_expansion(fibration_document, monkeypatch):
    document = copy.deepcopy(fibration_document)
    document["checks"] = [{"name": "foliation_degree", "params": {"expected": 3}}]
    scenario = parse_scenario(document)
    monkeypatch.setattr(env, "LOGFOL_DEBUG_CHECKS", True)
    assert run(scenario).passed
    monkeypatch.setattr(scenarios_services, "radial_compatibility", lambda spec, form: False)
    with pytest.raises(DecompositionInconsistency):
        run(scenario)
    monkeypatch.setattr(env, "LOGFOL_DEBUG_CHECKS", False)
    assert run(scenario).passed


class TestCommandLine(unittest.TestCase):
    """Exit codes of the command-line entry point."""

    @pytest.fixture(autouse=True)
    def _tmp(self, tmp_path):
        self.tmp_path = tmp_path

    def _write(self, name, document):
        path = self.tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    def test_decompose_decomposable(self):
        tensor = {"r": 4, "p": 2, "entries": [[[1, 2], "1"], [[1, 3], "2"], [[2, 3], "1"]]}
        out = self.tmp_path / "decomposition.json"
        self.assertEqual(main.main(["decompose", self._write("t.json", tensor), "--out", str(out)]), main.EXIT_OK)
        self.assertTrue(json.loads(out.read_text())["decomposable"])

    def test_decompose_not_decomposable(self):
        tensor = {"r": 4, "p": 2, "entries": [[[1, 2], "1"], [[3, 4], "1"]]}
        out = self.tmp_path / "defects.json"
        self.assertEqual(main.main(["decompose", self._write("t.json", tensor), "--out", str(out)]), main.EXIT_FAILED)
        self.assertEqual(json.loads(out.read_text())["plucker_defects"], ["1"])

    def test_invalid_scenario(self):
        document = builtin_example("rational-fibration", SEED).to_document()
        document["checks"] = [{"name": "no_such_check"}]
        self.assertEqual(main.main(["check", self._write("bad.json", document)]), main.EXIT_INVALID)

    def test_unreadable_file(self):
        path = self.tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        self.assertEqual(main.main(["check", str(path)]), main.EXIT_INVALID)

    def test_degree_command(self):
        document = builtin_example("rational-fibration", SEED).to_document()
        out = self.tmp_path / "degree.json"
        self.assertEqual(main.main(["degree", self._write("s.json", document), "--out", str(out)]), main.EXIT_OK)
        self.assertEqual(json.loads(out.read_text()), {"formula": 3, "restriction": 3})


class TestEnvironmentOverrides(unittest.TestCase):
    """Settings come from the environment (or a .env file) when env is loaded."""

    def setUp(self):
        self.original = {key: os.environ.get(key) for key in ("LOGFOL_THREADS", "LOGFOL_SEED")}
        os.environ["LOGFOL_THREADS"] = "2"
        os.environ["LOGFOL_SEED"] = "7"
        importlib.reload(env)

    def tearDown(self):
        for key, value in self.original.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value
        importlib.reload(env)

    def test_overrides_are_read(self):
        self.assertEqual(env.LOGFOL_THREADS, 2)
        self.assertEqual(env.LOGFOL_SEED, 7)
        self.assertIn("dedup", env.DEFAULT_TOLERANCES)


if __name__ == "__main__":
    unittest.main()
