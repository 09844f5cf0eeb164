import json

import pytest

from graftlab.errors import ConfigError
from graftlab.verify import (
    CheckResult,
    RunConfig,
    SUITES,
    canonical_json,
    run_suite,
    run_verify,
)

CRITERIA = (
    "holonomy-invariance",
    "bilipschitz-bending",
    "fold-counterexample",
    "right-triangle",
    "fan-area",
    "gauss-bonnet",
    "multiarc-integrality",
    "switch-assembly",
    "bending-equivariance",
    "2pi-invisibility",
    "thurston-K",
    "traintrack-geometry",
)

# fast suites used wherever the test only exercises plumbing
QUICK = ("fan-area", "multiarc-integrality", "traintrack-geometry")


def test_registry_covers_every_criterion():
    assert set(SUITES) == set(CRITERIA)


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(depth=7)
    with pytest.raises(ConfigError):
        RunConfig(depth=-1)
    with pytest.raises(ConfigError):
        RunConfig(tol={"x": -1.0})
    with pytest.raises(ConfigError):
        RunConfig(tol={"x": float("nan")})
    with pytest.raises(ConfigError):
        RunConfig(sample_counts={"equivariance": 0})
    with pytest.raises(ConfigError):
        RunConfig(seed="7")
    # zero is a legal override: it forces a reported failure
    RunConfig(tol={"x": 0.0})


def test_unknown_suite_raises():
    with pytest.raises(ConfigError, match="unknown suite"):
        run_verify(RunConfig(suites=("no-such-suite",)))
    with pytest.raises(ConfigError, match="unknown suite"):
        run_suite("no-such-suite", RunConfig())


def test_reports_sorted_and_deterministic():
    cfg = RunConfig(suites=QUICK)
    r1 = run_verify(cfg)
    r2 = run_verify(cfg)
    assert [r.suite for r in r1.reports] == sorted(QUICK)
    assert canonical_json(r1.to_json()) == canonical_json(r2.to_json())
    # wall time varies between runs but must not leak into the bytes
    assert "wall" not in canonical_json(r1.to_json()).lower()


def test_report_schema_and_shape():
    rep = run_suite("fan-area", RunConfig())
    data = rep.to_json()
    assert data["schema"] == "graftlab/1"
    assert data["suite"] == "fan-area"
    assert data["passed"] is True
    for check in data["checks"]:
        assert set(check) == {"name", "measured", "bound", "op", "passed"}
    battery = run_verify(RunConfig(suites=("fan-area",)))
    payload = battery.to_json()
    assert payload["schema"] == "graftlab/1"
    assert payload["passed"] is True
    json.loads(canonical_json(payload))  # stays valid JSON


def test_zero_tolerance_forces_reported_failure():
    rep = run_suite("fan-area", RunConfig(tol={"quadrature": 0.0}))
    assert not rep.passed
    bad = {c.name: c for c in rep.checks}["quadrature"]
    assert not bad.passed
    assert bad.bound == 0.0
    assert bad.measured >= 0.0  # the measurement still gets reported


def test_suite_qualified_override_beats_bare_name():
    cfg = RunConfig(tol={"quadrature": 0.0, "fan-area.quadrature": 1.0})
    rep = run_suite("fan-area", cfg)
    bad = {c.name: c for c in rep.checks}["quadrature"]
    assert bad.passed and bad.bound == 1.0


def test_check_result_ops():
    assert CheckResult("x", 1.0, 2.0, "<", True).to_json()["op"] == "<"
    r = run_suite("traintrack-geometry", RunConfig())
    ops = {c.name: c.op for c in r.checks}
    assert ops["rail-floor-definition"] == "<="
    assert ops["rails-above-floor"] == ">="


def test_sample_count_override_is_used():
    cfg = RunConfig(sample_counts={"gauss-bonnet": 3})
    rep = run_suite("gauss-bonnet", cfg)
    assert rep.passed
    # a tiny sample count must run visibly faster than the full 50
    assert rep.wall_time < 2.0
