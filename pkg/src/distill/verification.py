"""Simulation-versus-closed-form comparison over parameter grids."""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from distill import formulas as F
from distill.components import NoiseParams
from distill.formulas import FormulaId
from distill.protocols import ProtocolId, evaluate, build, max_entanglement_tau, ProtocolParams

DEFAULT_TOLERANCE = 1e-10
FAULT_OFFSET = 1e-3

AXIS = tuple(round(0.1 * k, 10) for k in range(1, 10))


@dataclass(frozen=True)
class GridPoint:
    protocol: ProtocolId
    eta: float
    t: float
    delta: float = 1.0
    epsilon: float = 1.0


@dataclass(frozen=True)
class FormulaCheck:
    formula: FormulaId
    n_points: int
    max_abs_dev: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs_dev <= self.tolerance


def nla_grid(
    etas: Sequence[float] = AXIS,
    ts: Sequence[float] = AXIS,
    deltas: Sequence[float] = (0.8, 1.0),
    epsilons: Sequence[float] = (0.9, 1.0),
) -> list[GridPoint]:
    return [
        GridPoint(p, eta, t, d, e)
        for p in (ProtocolId.NLA_BOB, ProtocolId.NLA_HALFWAY)
        for eta in etas
        for t in ts
        for d in deltas
        for e in epsilons
    ]


def purification_grid(etas: Sequence[float] = AXIS) -> list[GridPoint]:
    pts = [GridPoint(ProtocolId.PURIFICATION, eta, 0.5) for eta in etas]
    for eta in (0.2, 0.5, 0.8):
        for d, e in ((0.9, 0.9), (0.8, 1.0), (1.0, 0.9)):
            for t in (0.3, F.optimal_t_purification(e)):
                pts.append(GridPoint(ProtocolId.PURIFICATION, eta, t, d, e))
    return pts


def do_nothing_grid(etas: Sequence[float] = (0.0,) + AXIS + (1.0,)) -> list[GridPoint]:
    return [GridPoint(ProtocolId.DO_NOTHING, eta, 0.0) for eta in etas]


def default_grid(axis_steps: int = 9) -> list[GridPoint]:
    axis = tuple(round(k / (axis_steps + 1), 10) for k in range(1, axis_steps + 1))
    return nla_grid(axis, axis) + purification_grid(axis) + do_nothing_grid()


def analytic_values(pt: GridPoint, tau: float, fault: FormulaId | None = None) -> dict[FormulaId, float]:
    """Closed-form predictions at one grid point, keyed by formula.

    ``fault`` names one formula whose channel transmissivity is offset by
    ``FAULT_OFFSET``, to prove the comparison can fail.
    """

    def eta_for(fid: FormulaId) -> float:
        return pt.eta + FAULT_OFFSET if fid is fault else pt.eta

    d, e, t = pt.delta, pt.epsilon, pt.t
    out: dict[FormulaId, float] = {}
    if pt.protocol is ProtocolId.DO_NOTHING:
        out[FormulaId.DO_NOTHING_P_F] = F.p_f_do_nothing(tau, eta_for(FormulaId.DO_NOTHING_P_F))
        out[FormulaId.DO_NOTHING_P_0] = F.p_0_do_nothing(tau, eta_for(FormulaId.DO_NOTHING_P_0))
        out[FormulaId.DO_NOTHING_X] = F.x_do_nothing(eta_for(FormulaId.DO_NOTHING_X))
        return out

    if pt.protocol is ProtocolId.PURIFICATION:
        ids = (FormulaId.PURIFICATION_P_F, FormulaId.PURIFICATION_P_0,
               FormulaId.PURIFICATION_P_SUCCESS_T)
        fns = (F.p_f_purification, F.p_0_purification, F.p_success_purification_t)
        for fid, fn in zip(ids, fns):
            out[fid] = fn(tau, t, eta_for(fid), d, e)
        # the purity does not depend on eta, so its fault shifts epsilon
        shift = FAULT_OFFSET if fault is FormulaId.PURIFICATION_X else 0.0
        out[FormulaId.PURIFICATION_X] = F.x_purification(e - shift)
        if math.isclose(t, F.optimal_t_purification(e), rel_tol=0, abs_tol=1e-15):
            eta = eta_for(FormulaId.PURIFICATION_P_SUCCESS)
            out[FormulaId.PURIFICATION_P_SUCCESS] = F.p_purification(eta, d, e)[0]
        return out

    if pt.protocol is ProtocolId.NLA_BOB:
        ids = (FormulaId.NLA_BOB_P_F, FormulaId.NLA_BOB_P_0, FormulaId.NLA_BOB_P_SUCCESS_T,
               FormulaId.NLA_BOB_X, FormulaId.NLA_BOB_P_SUCCESS)
        fns = (F.p_f_nla_bob, F.p_0_nla_bob, F.p_success_nla_bob_t,
               F.x_nla_bob_from_t, F.p_nla_bob)
    else:
        ids = (FormulaId.NLA_HALFWAY_P_F, FormulaId.NLA_HALFWAY_P_0,
               FormulaId.NLA_HALFWAY_P_SUCCESS_T, FormulaId.NLA_HALFWAY_X,
               FormulaId.NLA_HALFWAY_P_SUCCESS)
        fns = (F.p_f_nla_halfway, F.p_0_nla_halfway, F.p_success_nla_halfway_t,
               F.x_nla_halfway_from_t, F.p_nla_halfway)
    for fid, fn in zip(ids[:3], fns[:3]):
        out[fid] = fn(tau, t, eta_for(fid), d, e)
    out[ids[3]] = fns[3](t, eta_for(ids[3]), d, e)
    # the closed-form click probability is a function of the purity reached
    x = fns[3](t, pt.eta, d, e)
    out[ids[4]] = fns[4](x, eta_for(ids[4]), d, e)
    return out


def simulated_values(pt: GridPoint) -> tuple[float, dict[FormulaId, float], float]:
    """(tau, formula -> simulated value, total outcome probability)."""
    noise = NoiseParams(pt.eta, pt.delta, pt.epsilon)
    tau = max_entanglement_tau(pt.protocol, pt.t, noise)
    circuit = build(pt.protocol, ProtocolParams(tau, pt.t), noise)
    output = circuit.output_state()
    res = evaluate(circuit, output)
    total = output.norm_squared()
    name = {
        ProtocolId.DO_NOTHING: "DO_NOTHING",
        ProtocolId.NLA_BOB: "NLA_BOB",
        ProtocolId.NLA_HALFWAY: "NLA_HALFWAY",
        ProtocolId.PURIFICATION: "PURIFICATION",
    }[pt.protocol]
    vals = {}
    for suffix, value in (("P_F", res.p_f), ("P_0", res.p_0), ("X", res.x),
                          ("P_SUCCESS_T", res.p_success), ("P_SUCCESS", res.p_success)):
        fid = FormulaId.__members__.get(f"{name}_{suffix}")
        if fid is not None:
            vals[fid] = value
    return tau, vals, total


def _deviation(sim: float, ref: float) -> float:
    if math.isinf(sim) or math.isinf(ref):
        return 0.0 if sim == ref else math.inf
    if math.isnan(sim) or math.isnan(ref):
        return 0.0 if math.isnan(sim) and math.isnan(ref) else math.inf
    return abs(sim - ref)


def check_point(pt: GridPoint, fault: FormulaId | None = None) -> dict[FormulaId, float]:
    tau, sim, _ = simulated_values(pt)
    ref = analytic_values(pt, tau, fault)
    return {fid: _deviation(sim[fid], ref[fid]) for fid in ref}


def _check_star(args):
    return check_point(*args)


def thread_count() -> int:
    raw = os.environ.get("DISTILL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable, workers: int | None = None) -> list:
    """Ordered map, fanned out to processes when more than one worker is allowed."""
    items = list(items)
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def run_verification(
    points: Sequence[GridPoint] | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    fault: FormulaId | None = None,
    workers: int | None = None,
) -> list[FormulaCheck]:
    """Maximum absolute simulation-vs-formula deviation per formula."""
    points = default_grid() if points is None else list(points)
    results = parallel_map(_check_star, [(pt, fault) for pt in points], workers)
    worst: dict[FormulaId, float] = {}
    counts: dict[FormulaId, int] = {}
    for devs in results:
        for fid, dev in devs.items():
            worst[fid] = max(worst.get(fid, 0.0), dev)
            counts[fid] = counts.get(fid, 0) + 1
    return [
        FormulaCheck(fid, counts[fid], worst[fid], tolerance)
        for fid in FormulaId
        if fid in worst
    ]
