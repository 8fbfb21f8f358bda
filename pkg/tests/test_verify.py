"""The verification battery: sweeps, indifference, identities, safety floor."""

import dataclasses
import json
import time

import numpy as np
import pytest

from stopduel.equilibrium import NoEquilibriumError, build_profile
from stopduel.verify import (DEFAULT_U_GRID, EvalReport, best_response_sweep,
                             identity_suite, indifference_check,
                             render_table, reports_to_json, run_suite,
                             safety_dominance)


def test_standard_suite_all_pass(std_oracle):
    t0 = time.perf_counter()
    reports = run_suite(std_oracle, 0.15, 0.15, 1.5)
    assert time.perf_counter() - t0 < 60.0
    assert len(reports) == 5
    for r in reports:
        assert r.passed, "%s failed: %r" % (r.name, r)
    names = [r.name for r in reports]
    assert "best_response_sweep_player1" in names
    assert any("indiff" in n for n in names)


def test_suite_subsets_and_validation(std_oracle):
    br = run_suite(std_oracle, 0.15, 0.15, 1.5, suite="br")
    assert len(br) == 2
    with pytest.raises(ValueError):
        run_suite(std_oracle, 0.15, 0.15, 1.5, suite="everything")
    with pytest.raises(NoEquilibriumError):
        run_suite(std_oracle, 0.0, 0.3, 1.5)
    # on the stop region the indifference check has nothing to certify
    stop_all = run_suite(std_oracle, 0.25, 0.5, 1.5)
    assert all("indiff" not in r.name for r in stop_all)
    with pytest.raises(ValueError):
        run_suite(std_oracle, 0.25, 0.5, 1.5, suite="indiff")


def test_sweep_fails_on_doctored_value(std_oracle):
    profile = build_profile(std_oracle, 0.15, 0.15, 1.5)
    doctored = dataclasses.replace(profile, value1=0.99 * profile.value1)
    report = best_response_sweep(std_oracle, doctored, 1)
    assert not report.passed
    assert report.estimate > report.target


def test_indifference_flags_doctored_atom(std_oracle):
    profile = build_profile(std_oracle, 0.15, 0.15, 1.5)
    bent = dataclasses.replace(profile.rule2, atom0=0.5)
    doctored = dataclasses.replace(profile, rule2=bent)
    report = indifference_check(std_oracle, doctored)
    assert not report.passed


def test_indifference_rejects_stop_profile(std_oracle):
    stopped = build_profile(std_oracle, 0.25, 0.5, 1.5)
    with pytest.raises(ValueError):
        indifference_check(std_oracle, stopped)


def test_u_grid_avoids_terminal_endpoint():
    assert DEFAULT_U_GRID[0] == 0.0
    assert DEFAULT_U_GRID[-1] < 1.0
    assert len(DEFAULT_U_GRID) == 101


def test_identity_suite_asymmetric(std_oracle):
    profile = build_profile(std_oracle, 0.15, 0.3, 1.5)
    report = identity_suite(profile, n_paths=500, seed=9)
    assert report.passed
    assert report.tolerance == 1.0


def test_safety_dominance_grid(std_oracle):
    report = safety_dominance(std_oracle, [(0.15, 0.15, 1.5), (0.25, 0.5, 1.5)])
    assert report.passed
    with pytest.raises(ValueError):
        safety_dominance(std_oracle, [])


def test_report_serialization_is_stable(std_oracle):
    a = reports_to_json(run_suite(std_oracle, 0.15, 0.15, 1.5))
    b = reports_to_json(run_suite(std_oracle, 0.15, 0.15, 1.5))
    assert a == b
    rows = json.loads(a)
    assert list(rows[0].keys()) == ["name", "target", "target_basis",
                                    "estimate", "stderr", "tolerance",
                                    "verdict"]
    assert "runtime" not in rows[0]


def test_render_table(std_oracle):
    reports = run_suite(std_oracle, 0.15, 0.15, 1.5, suite="br")
    text = render_table(reports)
    lines = text.splitlines()
    assert lines[0].split()[:3] == ["check", "target", "estimate"]
    assert len(lines) == 3
    assert all("pass" in line for line in lines[1:])


def test_eval_report_passed_property():
    r = EvalReport(name="x", target=1.0, target_basis="t", estimate=1.0,
                   stderr=None, tolerance=0.1, verdict="pass", runtime=0.0)
    assert r.passed
    assert not dataclasses.replace(r, verdict="fail").passed
