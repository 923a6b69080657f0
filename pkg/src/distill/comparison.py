"""Best-protocol selection over distance and source quality.

Decision rule for a given distance, detector quality and source quality:

1. If the source quality is below the channel transmissivity, doing nothing
   wins outright.
2. Otherwise the purification protocol fixes the purity target, and both
   NLA placements are evaluated at that same purity.
3. The highest click probability wins. Exact ties go to the protocol with
   the higher purity (purification, then half-way NLA, then NLA at Bob's end).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from distill import formulas
from distill.protocols import ProtocolId

# Higher rank wins exact ties.
TIE_RANK = {
    ProtocolId.PURIFICATION: 3,
    ProtocolId.NLA_HALFWAY: 2,
    ProtocolId.NLA_BOB: 1,
    ProtocolId.DO_NOTHING: 0,
}

DEFAULT_D_RANGE = (0.0, 200.0)
DEFAULT_EPSILON_RANGE = (0.5, 1.0)
DEFAULT_STEPS = (400, 200)
DEFAULT_DELTA = 0.9


@dataclass(frozen=True)
class ComparisonPoint:
    d_km: float
    delta: float
    epsilon: float
    x_target: float
    p_by_protocol: dict[ProtocolId, float] = field(hash=False)
    winner: ProtocolId

    @property
    def eta(self) -> float:
        return formulas.eta_from_distance(self.d_km)


def _nla_probability(fn, x, eta, delta, epsilon) -> float:
    if math.isinf(x):
        return 0.0
    # Purification purity never exceeds the NLA bound for epsilon < 1.
    assert x < formulas.x_max(epsilon), (x, epsilon)
    return fn(x, eta, delta, epsilon)


def pick_winner(probabilities: dict[ProtocolId, float]) -> ProtocolId:
    return max(probabilities, key=lambda p: (probabilities[p], TIE_RANK[p]))


def best_protocol(d_km: float, delta: float, epsilon: float) -> ComparisonPoint:
    eta = formulas.eta_from_distance(d_km)
    p_pur, x_target = formulas.p_purification(eta, delta, epsilon)
    probs = {
        ProtocolId.DO_NOTHING: 1.0,
        ProtocolId.NLA_BOB: _nla_probability(formulas.p_nla_bob, x_target, eta, delta, epsilon),
        ProtocolId.NLA_HALFWAY: _nla_probability(
            formulas.p_nla_halfway, x_target, eta, delta, epsilon
        ),
        ProtocolId.PURIFICATION: p_pur,
    }
    if epsilon < eta:
        winner = ProtocolId.DO_NOTHING
    else:
        winner = pick_winner({p: v for p, v in probs.items() if p is not ProtocolId.DO_NOTHING})
    return ComparisonPoint(d_km, delta, epsilon, x_target, probs, winner)


def grid_axis(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError(f"grid steps must be positive, got {steps}")
    if steps == 1:
        return np.array([lo])
    return np.linspace(lo, hi, steps)


def region_map(
    d_range: tuple[float, float] = DEFAULT_D_RANGE,
    epsilon_range: tuple[float, float] = DEFAULT_EPSILON_RANGE,
    delta: float = DEFAULT_DELTA,
    steps: tuple[int, int] = DEFAULT_STEPS,
) -> list[list[ComparisonPoint]]:
    """Best protocol on a (distance, source quality) grid, rows by distance."""
    ds = grid_axis(*d_range, steps[0])
    eps = grid_axis(*epsilon_range, steps[1])
    return [[best_protocol(float(d), delta, float(e)) for e in eps] for d in ds]


@dataclass(frozen=True)
class CurvePoint:
    x: float
    p_success: float
    feasible: bool
    dominated: bool


def tradeoff_curve(
    protocol: ProtocolId | str,
    eta: float,
    delta: float,
    epsilon: float,
    x_values: Sequence[float],
) -> list[CurvePoint]:
    """Click probability against target purity for one protocol.

    Points at or beyond the reachable purity are infeasible (probability 0);
    points below the do-nothing purity are flagged as dominated.
    """
    protocol = ProtocolId(protocol)
    x_free = formulas.x_do_nothing(eta)
    out = []
    for x in x_values:
        feasible, p = True, 0.0
        if protocol is ProtocolId.NLA_BOB or protocol is ProtocolId.NLA_HALFWAY:
            fn = formulas.p_nla_bob if protocol is ProtocolId.NLA_BOB else formulas.p_nla_halfway
            try:
                p = fn(x, eta, delta, epsilon)
            except formulas.InfeasibleTarget:
                feasible = False
        elif protocol is ProtocolId.PURIFICATION:
            p, x_pur = formulas.p_purification(eta, delta, epsilon)
            feasible = x <= x_pur
        else:
            p = 1.0
            feasible = x <= x_free
        if not feasible:
            p = 0.0
        out.append(CurvePoint(float(x), float(p), feasible, x < x_free))
    return out
