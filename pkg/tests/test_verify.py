from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import pytest

from kondratiev.errors import InvalidParams, SuiteUnknown
from kondratiev.verify import (
    CLOSED_FORM_CASES,
    FROZEN,
    SHARPNESS_CASES,
    SUITES,
    Case,
    Suite,
    SuiteReport,
    _run_case,
    run_suite,
)

EXPECTED_SUITES = [
    "homogeneity", "closed-form", "oracle", "equivalent-norm", "partition", "product-bounds", "moser",
    "multiplier", "algebra-sharpness", "noncompact-witness", "decomposition", "decision-consistency",
]


def test_registry_lists_every_suite_once():
    assert list(SUITES) == EXPECTED_SUITES
    assert all(isinstance(s, Suite) and s.id == k for k, s in SUITES.items())


def test_unknown_suite():
    with pytest.raises(SuiteUnknown):
        run_suite("nope")


def test_unknown_config_key():
    with pytest.raises(InvalidParams):
        run_suite("closed-form", {"speed": 11})


def test_case_errors_are_recorded():
    def boom():
        raise ZeroDivisionError("x")

    rec = _run_case(Case({"k": 1}, 0, boom, lambda e, o: True))
    assert rec["pass"] is False and "ZeroDivisionError" in rec["error"]


def test_frozen_bounds_are_finite_and_ordered():
    assert all(math.isfinite(v) and v > 0 for v in FROZEN.values())
    assert FROZEN["localization_lower"] < FROZEN["localization_upper"]
    assert FROZEN["decomposition_lower"] < FROZEN["decomposition_upper"]


def test_closed_form_cases_are_in_range():
    assert len(CLOSED_FORM_CASES) == 10
    for a, p, _ in CLOSED_FORM_CASES:
        assert Fraction(a) * p < 3


def test_closed_form_suite_passes():
    rep = run_suite("closed-form")
    assert rep.passed and rep.summary["total"] == 10


def test_report_serialization():
    rep = run_suite("closed-form", {"quick": True})
    doc = json.loads(rep.to_json())
    assert doc["suite"] == "closed-form"
    assert set(doc["summary"]) == {"total", "passed", "failed", "errors", "pass"}
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert len(rows) == rep.summary["total"]
    assert rows[0]["suite"] == "closed-form"


def test_workers_do_not_change_results():
    a = run_suite("closed-form", {"workers": 1}).to_dict()
    b = run_suite("closed-form", {"workers": 3}).to_dict()
    assert a["cases"] == b["cases"]


def test_decision_consistency_quick():
    rep = run_suite("decision-consistency", {"quick": True})
    assert rep.passed


def test_oracle_quick():
    rep = run_suite("oracle", {"quick": True})
    assert rep.passed


def test_sharpness_expectations_follow_exact_slopes():
    rep = run_suite("algebra-sharpness")
    assert rep.passed
    assert len(rep.cases) == 2 * len(SHARPNESS_CASES)


def test_witness_quick():
    rep = run_suite("noncompact-witness", {"quick": True})
    assert rep.passed


def test_seed_changes_sampled_oracle_cases():
    a = run_suite("oracle", {"quick": True, "seed": 0}).to_dict()["cases"]
    b = run_suite("oracle", {"quick": True, "seed": 1}).to_dict()["cases"]
    assert [c["input"] for c in a] != [c["input"] for c in b]


def test_empty_report_passes_when_summary_says_so():
    rep = SuiteReport("x", [], {"total": 0, "passed": 0, "failed": 0, "errors": 0, "pass": True}, 0.0)
    assert rep.passed
