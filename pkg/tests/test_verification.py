import math

import pytest

from distill.formulas import FormulaId
from distill.protocols import ProtocolId
from distill.verification import (
    _deviation,
    default_grid,
    nla_grid,
    parallel_map,
    purification_grid,
    run_verification,
    thread_count,
)


def test_grid_sizes():
    assert len(nla_grid()) == 2 * 9 * 9 * 2 * 2
    assert len(default_grid(2)) == 2 * 2 * 2 * 2 * 2 + 2 + 18 + 11


def test_deviation_sentinels():
    assert _deviation(math.inf, math.inf) == 0.0
    assert _deviation(math.inf, 3.0) == math.inf
    assert _deviation(math.nan, math.nan) == 0.0
    assert _deviation(1.0, 1.5) == 0.5


def test_every_formula_is_checked():
    checked = {c.formula for c in run_verification(default_grid(2))}
    assert checked == set(FormulaId)


@pytest.mark.parametrize("fault", list(FormulaId))
def test_fault_is_caught(fault):
    pts = [p for p in default_grid(2) if fault.value.startswith(p.protocol.value.replace("-", "_"))]
    checks = run_verification(pts, fault=fault)
    failed = [c.formula for c in checks if not c.passed]
    assert failed == [fault]


def test_parallel_matches_serial():
    pts = purification_grid()[:6]
    serial = run_verification(pts, workers=1)
    fanned = run_verification(pts, workers=2)
    assert serial == fanned


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("DISTILL_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("DISTILL_THREADS", "lots")
    assert thread_count() == 1


def test_parallel_map_keeps_order():
    assert parallel_map(abs, [-3, 2, -1], workers=2) == [3, 2, 1]
