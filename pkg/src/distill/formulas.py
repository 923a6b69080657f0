"""Closed-form click probabilities, purity ratios and their inversions.

Every expression is kept in its unsimplified reference form so it can be
checked term by term against brute-force simulation. Division-by-zero edges
return ``math.inf`` rather than raising.

Naming: ``p_f``/``p_0`` are per-click-pattern probabilities of the heralded
state with no / some environmental loss, ``x = p_f / p_0`` is the purity
ratio, ``tau`` is Alice's splitter and ``t`` Bob's (or the resource) splitter.
"""

from __future__ import annotations

import math
from enum import Enum

ATTENUATION_LENGTH_KM = 22.0
BOUND_RTOL = 1e-12


class InfeasibleTarget(ValueError):
    """Requested purity lies at or beyond what the noisy source allows."""


class FormulaId(str, Enum):
    DO_NOTHING_X = "do_nothing.x"
    DO_NOTHING_P_F = "do_nothing.p_f"
    DO_NOTHING_P_0 = "do_nothing.p_0"
    NLA_BOB_P_F = "nla_bob.p_f"
    NLA_BOB_P_0 = "nla_bob.p_0"
    NLA_BOB_X = "nla_bob.x"
    NLA_BOB_P_SUCCESS_T = "nla_bob.p_success(t)"
    NLA_BOB_P_SUCCESS = "nla_bob.p_success(x)"
    NLA_HALFWAY_P_F = "nla_halfway.p_f"
    NLA_HALFWAY_P_0 = "nla_halfway.p_0"
    NLA_HALFWAY_X = "nla_halfway.x"
    NLA_HALFWAY_P_SUCCESS_T = "nla_halfway.p_success(t)"
    NLA_HALFWAY_P_SUCCESS = "nla_halfway.p_success(x)"
    PURIFICATION_P_F = "purification.p_f"
    PURIFICATION_P_0 = "purification.p_0"
    PURIFICATION_P_SUCCESS_T = "purification.p_success(t)"
    PURIFICATION_P_SUCCESS = "purification.p_success"
    PURIFICATION_X = "purification.x"


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        if num == 0.0:
            return math.nan
        return math.inf
    return num / den


# -- channel model and purity ------------------------------------------------

def eta_from_distance(d_km: float) -> float:
    if d_km < 0:
        raise ValueError(f"distance must be non-negative, got {d_km}")
    return math.exp(-d_km / ATTENUATION_LENGTH_KM)


def distance_from_eta(eta: float) -> float:
    if eta <= 0.0:
        return math.inf
    return -ATTENUATION_LENGTH_KM * math.log(eta)


def purity_from_x(x: float) -> float:
    """Tr(rho^2) of the heralded mixture for purity ratio ``x``."""
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    if math.isinf(x):
        return 1.0
    return (1 + x**2) / (1 + x) ** 2


def x_max(epsilon: float) -> float:
    """Highest purity reachable by either NLA placement with source quality epsilon."""
    return _ratio(2 * epsilon, 1 - epsilon)


# -- do nothing --------------------------------------------------------------

def tau_do_nothing(eta: float) -> float:
    return eta / (1 + eta)


def p_f_do_nothing(tau: float, eta: float) -> float:
    return tau + eta * (1 - tau)


def p_0_do_nothing(tau: float, eta: float) -> float:
    return (1 - tau) * (1 - eta)


def x_do_nothing(eta: float) -> float:
    return _ratio(2 * eta, 1 - eta)


# -- NLA at Bob's end --------------------------------------------------------

def tau_nla_bob(t: float, eta: float) -> float:
    den = 1 - t + t * eta
    return 0.0 if den == 0.0 else t * eta / den


def p_f_nla_bob(tau, t, eta, delta=1.0, epsilon=1.0):
    return 0.5 * tau * delta * epsilon * (1 - t) + 0.5 * (1 - tau) * delta * eta * t * epsilon


def p_0_nla_bob(tau, t, eta, delta=1.0, epsilon=1.0):
    return (
        delta * epsilon * (1 - tau) * (1 - t) * (0.5 * (1 - eta) + eta * (1 - delta))
        + 0.5 * (1 - tau) * eta * delta * (1 - epsilon)
    )


def p_success_nla_bob_t(tau, t, eta, delta=1.0, epsilon=1.0):
    """Click probability summed over both click patterns, before fixing tau."""
    return (
        epsilon * delta * tau * (1 - t)
        + epsilon * delta * (1 - tau) * (1 - eta) * (1 - t)
        + epsilon * delta * (1 - tau) * eta * t
        + 2 * epsilon * (1 - tau) * (1 - t) * (1 - delta) * eta * delta
        + delta * (1 - tau) * eta * (1 - epsilon)
    )


def x_nla_bob_from_t(t, eta, delta=1.0, epsilon=1.0):
    return _ratio(
        2 * t * eta * epsilon,
        epsilon * (1 + eta - 2 * eta * delta) * (1 - t) + eta * (1 - epsilon),
    )


def t_nla_bob_from_x(x, eta, delta=1.0, epsilon=1.0):
    _check_target(x, epsilon)
    a = 1 + eta - 2 * eta * delta
    return _ratio(
        x * (epsilon * a + eta * (1 - epsilon)),
        2 * eta * epsilon + x * epsilon * a,
    )


def p_nla_bob_perfect(x, eta):
    """Click probability at purity x with ideal source and detectors."""
    return (4 * eta * (1 - eta) * (1 + x)) / (
        (2 * eta + x * (1 - eta)) * (2 + x * (1 - eta))
    )


def p_nla_bob_detector_noise(x, eta, delta):
    a = 1 + eta - 2 * eta * delta
    return (4 * delta * eta * a * (1 + x)) / ((2 * eta + x * a) * (2 + x * a))


def p_nla_bob(x, eta, delta=1.0, epsilon=1.0):
    """Click probability of NLA at Bob's end at purity ``x``.

    Most general form (imperfect detectors and Bob's source). Raises
    :class:`InfeasibleTarget` for ``x >= x_max(epsilon)``.
    """
    _check_target(x, epsilon)
    if math.isinf(x):
        return 0.0
    return (
        2 * delta * eta * (1 + x) * (epsilon + eta - 2 * epsilon * eta * delta)
        * (2 * epsilon - x * (1 - epsilon))
    ) / (
        (2 * eta + x * (1 + eta - 2 * eta * delta))
        * (2 * epsilon + x * (2 * epsilon * (1 - eta * delta) + eta - 1))
    )


def x_root_nla_bob(eta: float) -> float | None:
    """Stationary point of the ideal Bob's-end click probability in ``x``.

    Returns ``None`` when ``3 eta - 1 <= 0`` (no root above ``x = -1``). For
    ``1/3 < eta < sqrt(2) - 1`` the root is negative: the click probability
    then falls monotonically over all physical purities.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    disc = (eta + 1) * (3 * eta - 1)
    if disc <= 0:
        return None
    return -1 + math.sqrt(disc) / (1 - eta)


# -- NLA half-way ------------------------------------------------------------

def tau_nla_halfway(t: float) -> float:
    return t


def p_f_nla_halfway(tau, t, eta, delta=1.0, epsilon=1.0):
    return 0.5 * math.sqrt(eta) * delta * epsilon * ((1 - tau) * t + tau * (1 - t))


def p_0_nla_halfway(tau, t, eta, delta=1.0, epsilon=1.0):
    s = math.sqrt(eta)
    return (
        epsilon * (1 - tau) * (1 - t) * delta * s * (1 - delta * s)
        + 0.5 * (1 - tau) * delta * (1 - epsilon) * s
    )


def p_success_nla_halfway_t(tau, t, eta, delta=1.0, epsilon=1.0):
    s = math.sqrt(eta)
    return (
        delta * epsilon * s * ((1 - tau) * t + tau * (1 - t))
        + 2 * delta * epsilon * s * (1 - tau) * (1 - t) * (1 - delta * s)
        + (1 - tau) * s * delta * (1 - epsilon)
    )


def x_nla_halfway_from_t(t, eta, delta=1.0, epsilon=1.0):
    s = math.sqrt(eta)
    return _ratio(epsilon * t, epsilon * (1 - t) * (1 - delta * s) + 0.5 * (1 - epsilon))


def t_nla_halfway_from_x(x, eta, delta=1.0, epsilon=1.0):
    _check_target(x, epsilon)
    s = math.sqrt(eta)
    return _ratio(
        x * (epsilon * (1 - delta * s) + 0.5 * (1 - epsilon)),
        epsilon + x * epsilon * (1 - delta * s),
    )


def p_nla_halfway_perfect(x, eta):
    s = math.sqrt(eta)
    return (2 * s * (1 - s) * (1 + x)) / (x * (s - 1) - 1) ** 2


def p_nla_halfway_detector_noise(x, eta, delta):
    s = math.sqrt(eta)
    return (2 * delta * s * (1 + x) * (1 - delta * s)) / (1 + x * (1 - delta * s)) ** 2


def p_nla_halfway(x, eta, delta=1.0, epsilon=1.0):
    """Click probability of half-way NLA at purity ``x`` (most general form)."""
    _check_target(x, epsilon)
    if math.isinf(x):
        return 0.0
    s = math.sqrt(eta)
    return (
        delta * s * (1 + x) * (1 + epsilon - 2 * epsilon * delta * s)
        * (2 * epsilon - x * (1 - epsilon))
    ) / (2 * epsilon * (1 + x * (1 - delta * s)) ** 2)


# -- purification ------------------------------------------------------------

def tau_purification(t: float, epsilon: float = 1.0) -> float:
    den = 1 - t + epsilon**2 * t
    return 0.0 if den == 0.0 else epsilon**2 * t / den


def optimal_t_purification(epsilon: float = 1.0) -> float:
    """Resource splitter maximising the click probability once tau is matched."""
    return 1 / (1 + epsilon)


def p_f_purification(tau, t, eta, delta=1.0, epsilon=1.0):
    return delta**4 * epsilon**2 * eta * (tau * (1 - t) + epsilon**2 * t * (1 - tau)) / 64


def p_0_purification(tau, t, eta, delta=1.0, epsilon=1.0):
    return delta**4 * epsilon**2 * eta * t * (1 - epsilon) * (1 - tau) * (1 + epsilon) / 64


def p_success_purification_t(tau, t, eta, delta=1.0, epsilon=1.0):
    return 0.25 * delta**4 * epsilon**2 * eta * (t * (1 - tau) + tau * (1 - t))


def x_purification(epsilon: float) -> float:
    return _ratio(2 * epsilon**2, 1 - epsilon**2)


def p_purification(eta, delta=1.0, epsilon=1.0) -> tuple[float, float]:
    """(click probability, purity) at the optimal resource splitter."""
    p = delta**4 * epsilon**2 * eta * (1 + epsilon**2) / (4 * (1 + epsilon) ** 2)
    return p, x_purification(epsilon)


def p_purification_perfect(eta):
    return eta / 8


# -- limits ------------------------------------------------------------------

def limiting_p_success(protocol: str, x: float, eta: float, delta: float = 1.0,
                       epsilon: float = 1.0) -> float:
    """Large-purity, long-distance, good-source approximation of a click probability.

    ``protocol`` is one of ``do-nothing``, ``nla-bob``, ``nla-halfway``,
    ``purification``. Valid for ``x >> 1``, ``eta << 1`` and
    ``1 - epsilon << 1``.
    """
    if protocol == "do-nothing":
        return 1.0
    if protocol == "nla-bob":
        return 4 * delta * eta * (1 / x - (1 - epsilon) / 2)
    if protocol == "nla-halfway":
        return 2 * delta * math.sqrt(eta) * (1 / x - (1 - epsilon) / 2)
    if protocol == "purification":
        return delta**4 * epsilon**2 * eta / 8
    raise ValueError(f"unknown protocol {protocol!r}")


def _check_target(x: float, epsilon: float) -> None:
    if not x > 0:
        raise InfeasibleTarget(f"purity target must be positive, got {x}")
    bound = x_max(epsilon)
    # the bound itself carries rounding error (2*0.9/(1-0.9) > 18)
    if epsilon < 1.0 and x >= bound * (1 - BOUND_RTOL):
        raise InfeasibleTarget(f"purity {x} is not below the bound {bound} for epsilon={epsilon}")


def limiting_forms(protocol: str, noise=None):
    """Evaluator ``(x, eta) -> p`` for the limiting click probability.

    ``noise`` is anything with ``delta`` and ``epsilon`` attributes
    (typically :class:`distill.components.NoiseParams`); ``None`` means ideal.
    """
    delta = 1.0 if noise is None else noise.delta
    epsilon = 1.0 if noise is None else noise.epsilon
    protocol = getattr(protocol, "value", protocol)
    limiting_p_success(protocol, 1.0, 0.5, delta, epsilon)  # reject unknown names now

    def evaluate(x: float, eta: float) -> float:
        return limiting_p_success(protocol, x, eta, delta, epsilon)

    return evaluate
