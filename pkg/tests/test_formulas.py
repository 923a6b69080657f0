import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distill import formulas as F
from distill.components import NoiseParams

XS = np.linspace(0.5, 50.0, 10)
ETAS = np.linspace(0.05, 0.95, 10)


@pytest.mark.parametrize("eta,want", [(0.5, 2.0), (0.0, 0.0), (1 / 3, 1.0), (1.0, math.inf)])
def test_x_do_nothing(eta, want):
    assert F.x_do_nothing(eta) == pytest.approx(want)


def test_p_nla_bob_example():
    assert F.p_nla_bob(2, 0.5) == pytest.approx(0.5)


def test_p_nla_halfway_example():
    assert F.p_nla_halfway(2, 0.25) == pytest.approx(0.375)


def test_p_purification_examples():
    assert F.p_purification(0.8) == (pytest.approx(0.1), math.inf)
    assert F.p_purification(0.5, 1.0, 0.9)[1] == pytest.approx(1.62 / 0.19)
    p, _ = F.p_purification(1.0, 0.9, 0.9)
    assert p == pytest.approx(0.6561 * 0.81 * 1.81 / 14.44)


@pytest.mark.parametrize("eps,want", [(0.9, 18.0), (1.0, math.inf), (0.99, 198.0)])
def test_x_max(eps, want):
    assert F.x_max(eps) == pytest.approx(want)


def test_x_root_examples():
    assert F.x_root_nla_bob(0.5) == pytest.approx(-1 + math.sqrt(0.75) / 0.5)
    assert F.x_root_nla_bob(1 / 3) is None
    assert F.x_root_nla_bob(0.2) is None
    # a stationary point, but below every physical purity
    assert -1 < F.x_root_nla_bob(0.4) < 0


@pytest.mark.parametrize("x,want", [(math.inf, 1.0), (2.0, 5 / 9), (1.0, 0.5)])
def test_purity(x, want):
    assert F.purity_from_x(x) == pytest.approx(want)


@pytest.mark.parametrize("d,want", [(0, 1.0), (22, math.exp(-1)), (50, 0.103031)])
def test_eta_from_distance(d, want):
    assert F.eta_from_distance(d) == pytest.approx(want, abs=1e-6)


def test_distance_round_trip():
    for d in (0.0, 3.5, 120.0):
        assert F.distance_from_eta(F.eta_from_distance(d)) == pytest.approx(d, abs=1e-12)


def test_reduction_source_to_detector():
    for x in XS:
        for eta in ETAS:
            for delta in (0.7, 1.0):
                assert F.p_nla_bob(x, eta, delta, 1.0) == pytest.approx(
                    F.p_nla_bob_detector_noise(x, eta, delta), abs=1e-12)
                assert F.p_nla_halfway(x, eta, delta, 1.0) == pytest.approx(
                    F.p_nla_halfway_detector_noise(x, eta, delta), abs=1e-12)


def test_reduction_detector_to_perfect():
    for x in XS:
        for eta in ETAS:
            assert F.p_nla_bob_detector_noise(x, eta, 1.0) == pytest.approx(
                F.p_nla_bob_perfect(x, eta), abs=1e-12)
            assert F.p_nla_halfway_detector_noise(x, eta, 1.0) == pytest.approx(
                F.p_nla_halfway_perfect(x, eta), abs=1e-12)


def test_purification_reduction():
    for eta in ETAS:
        assert F.p_purification(eta)[0] == pytest.approx(F.p_purification_perfect(eta), abs=1e-15)


def test_t_inversions():
    for eta in (0.2, 0.5, 0.8):
        for t in (0.1, 0.5, 0.9):
            x = F.x_nla_bob_from_t(t, eta, 0.9, 0.95)
            assert F.t_nla_bob_from_x(x, eta, 0.9, 0.95) == pytest.approx(t)
            x = F.x_nla_halfway_from_t(t, eta, 0.9, 0.95)
            assert F.t_nla_halfway_from_x(x, eta, 0.9, 0.95) == pytest.approx(t)


def test_t_examples():
    assert F.t_nla_bob_from_x(2, 0.5) == pytest.approx(0.5)
    assert F.t_nla_halfway_from_x(2, 0.25) == pytest.approx(0.5)


@pytest.mark.parametrize("x", [18.0, 18.0 + 1e-9, 30.0])
def test_bound_rejected(x):
    with pytest.raises(F.InfeasibleTarget):
        F.t_nla_bob_from_x(x, 0.5, 1.0, 0.9)
    with pytest.raises(F.InfeasibleTarget):
        F.p_nla_halfway(x, 0.5, 1.0, 0.9)


def test_nonpositive_target_rejected():
    with pytest.raises(F.InfeasibleTarget):
        F.p_nla_bob(0.0, 0.5)


def test_purification_target_always_reachable_by_nla():
    for eps in np.linspace(0.01, 0.999, 200):
        assert F.x_purification(eps) <= F.x_max(eps)


def test_limit_cells():
    assert F.limiting_forms("nla-bob")(100, 0.01) == pytest.approx(4e-4)
    noisy = NoiseParams(1.0, 0.95, 0.99)
    assert F.limiting_forms("purification", noisy)(100, 0.01) == pytest.approx(
        0.95**4 * 0.99**2 * 0.01 / 8)
    ratio = F.limiting_forms("nla-halfway")(100, 0.01) / F.limiting_forms("nla-bob")(100, 0.01)
    assert ratio == pytest.approx(1 / (2 * math.sqrt(0.01)))
    with pytest.raises(ValueError):
        F.limiting_forms("teleport")


def test_bob_limit_within_five_percent():
    exact = F.p_nla_bob_perfect(100, 0.01)
    assert abs(exact - 4e-4) / exact < 0.05


def test_purification_limit_is_close():
    for delta, eps in ((1.0, 1.0), (0.999, 0.999)):
        p, _ = F.p_purification(0.01, delta, eps)
        assert p == pytest.approx(F.limiting_p_success("purification", 1e3, 0.01, delta, eps), rel=1e-3)


def test_peak_below_do_nothing_purity():
    for eta in np.arange(0.4, 0.95, 0.05):
        assert F.x_root_nla_bob(eta) <= F.x_do_nothing(eta)


unit_open = st.floats(0.01, 0.99)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 1e3), unit_open, st.floats(0.5, 1.0), st.floats(0.5, 1.0))
def test_probabilities_in_unit_interval(x, eta, delta, eps):
    for fn in (F.p_nla_bob, F.p_nla_halfway):
        try:
            p = fn(x, eta, delta, eps)
        except F.InfeasibleTarget:
            assert x >= F.x_max(eps) * (1 - 1e-12)
            continue
        assert -1e-15 <= p <= 1.0 + 1e-15
    p, _ = F.p_purification(eta, delta, eps)
    assert 0.0 <= p <= 1.0


@settings(max_examples=100, deadline=None)
@given(unit_open, unit_open, unit_open, st.floats(0.5, 1.0), st.floats(0.5, 1.0))
def test_click_probability_splits_into_patterns(tau, t, eta, delta, eps):
    # two click patterns of equal weight
    bob = 2 * (F.p_f_nla_bob(tau, t, eta, delta, eps) + F.p_0_nla_bob(tau, t, eta, delta, eps))
    assert bob == pytest.approx(F.p_success_nla_bob_t(tau, t, eta, delta, eps), abs=1e-14)
    half = 2 * (F.p_f_nla_halfway(tau, t, eta, delta, eps)
                + F.p_0_nla_halfway(tau, t, eta, delta, eps))
    assert half == pytest.approx(F.p_success_nla_halfway_t(tau, t, eta, delta, eps), abs=1e-14)
    pur = 16 * (F.p_f_purification(tau, t, eta, delta, eps)
                + F.p_0_purification(tau, t, eta, delta, eps))
    assert pur == pytest.approx(F.p_success_purification_t(tau, t, eta, delta, eps), abs=1e-14)
