"""Command-line entry point: simulate, verify, sweep and regions.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence

from distill import comparison, formulas
from distill.components import NoiseParams
from distill.formulas import FormulaId, InfeasibleTarget
from distill.protocols import ProtocolId, max_entanglement_tau, simulate, t_from_target_x
from distill.verification import DEFAULT_TOLERANCE, default_grid, run_verification

SWEEP_COLUMNS = ("protocol", "eta", "d_km", "delta", "epsilon", "x", "p_success",
                 "feasible", "dominated")
REGION_COLUMNS = ("d_km", "epsilon", "delta", "x_target", "p_do_nothing", "p_nla_bob",
                  "p_nla_halfway", "p_purification", "winner")
SIMULATE_COLUMNS = ("protocol", "eta", "d_km", "delta", "epsilon", "tau", "t", "p_success",
                    "p_f", "p_0", "x", "purity", "psi_f")
LATTICE_TOL = 1e-12


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """Deterministic text form: 12 significant digits, ``inf`` and ``undefined``."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, complex):
        if abs(value.imag) < 1e-12:
            return fmt(value.real)
        sign = "+" if value.imag >= 0 else "-"
        return f"{fmt(value.real)}{sign}{fmt(abs(value.imag))}j"
    value = float(value)
    if math.isnan(value):
        return "undefined"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = format(value, ".12g")
    return "0" if text == "-0" else text


def _json_value(value):
    if isinstance(value, (bool, str)):
        return value
    text = fmt(value)
    if text in ("inf", "-inf", "undefined"):
        return text
    return float(text)


def render(rows: Sequence[dict], columns: Sequence[str], fmt_name: str) -> str:
    if fmt_name == "json":
        records = [{c: _json_value(row[c]) for c in columns} for row in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def parse_range(text: str) -> list[float]:
    """Comma list of numbers or inclusive ``start:end:step`` lattices."""
    values: list[float] = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        parts = item.split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise UsageError(f"not a number or range: {item!r}") from None
        if len(nums) == 1:
            values.append(nums[0])
            continue
        if len(nums) != 3:
            raise UsageError(f"range must be start:end:step, got {item!r}")
        start, end, step = nums
        if step <= 0 or start > end:
            raise UsageError(f"range needs start <= end and step > 0, got {item!r}")
        n = int(math.floor((end - start) / step + LATTICE_TOL))
        values.extend(start + i * step for i in range(n + 1))
    return values


def parse_span(text: str, name: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        lo, hi = (float(p) for p in parts[:2]) if len(parts) >= 2 else (float(text),) * 2
    except ValueError:
        raise UsageError(f"{name} must be start:end, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"{name} needs start <= end, got {text!r}")
    return lo, hi


def _single(args, name: str, default: float | None = None) -> float | None:
    raw = getattr(args, name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')} expects one number, got {raw!r}") from None


def _eta_and_distance(args) -> tuple[float, float]:
    if (args.eta is None) == (args.d_km is None):
        raise UsageError("give exactly one of --eta or --d-km")
    if args.eta is not None:
        eta = _single(args, "eta")
        return eta, formulas.distance_from_eta(eta)
    d = _single(args, "d_km")
    if d < 0:
        raise UsageError("--d-km must be non-negative")
    return formulas.eta_from_distance(d), d


def _noise(eta, args) -> NoiseParams:
    try:
        return NoiseParams(eta, _single(args, "delta", 1.0), _single(args, "epsilon", 1.0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _ket(state) -> str:
    parts = []
    for pattern, amp in sorted(state.to_fock().items(), reverse=True):
        label = "".join(str(k) for k in pattern)
        parts.append(f"|{label}>_{''.join(state.modes)}={fmt(amp)}")
    return ";".join(parts)


def cmd_simulate(args) -> list[dict]:
    if args.protocol is None:
        raise UsageError("simulate needs --protocol")
    protocols = _protocols(args.protocol)
    if len(protocols) != 1:
        raise UsageError("simulate takes exactly one protocol")
    protocol = protocols[0]
    eta, d_km = _eta_and_distance(args)
    noise = _noise(eta, args)
    if args.t is not None and args.x is not None:
        raise UsageError("give at most one of --t or --x")
    if args.x is not None:
        if protocol not in (ProtocolId.NLA_BOB, ProtocolId.NLA_HALFWAY):
            raise UsageError(f"--x only applies to NLA protocols, not {protocol.value}")
        try:
            t = t_from_target_x(protocol, _single(args, "x"), noise)
        except InfeasibleTarget as exc:
            raise UsageError(str(exc)) from None
    elif args.t is not None:
        t = _single(args, "t")
    elif protocol is ProtocolId.PURIFICATION:
        t = formulas.optimal_t_purification(noise.epsilon)
    elif protocol is ProtocolId.DO_NOTHING:
        t = 0.0
    else:
        raise UsageError(f"{protocol.value} needs --t or --x")
    tau = _single(args, "tau")
    if tau is None:
        tau = max_entanglement_tau(protocol, t, noise)
    try:
        res = simulate(protocol, t, noise, tau=tau)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return [{
        "protocol": protocol.value, "eta": eta, "d_km": d_km, "delta": noise.delta,
        "epsilon": noise.epsilon, "tau": tau, "t": t, "p_success": res.p_success,
        "p_f": res.p_f, "p_0": res.p_0, "x": res.x, "purity": res.purity,
        "psi_f": _ket(res.psi_f),
    }]


def _protocols(text: str) -> list[ProtocolId]:
    try:
        return [ProtocolId(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args) -> list[dict]:
    if args.protocol is None:
        raise UsageError("sweep needs --protocol")
    protocols = _protocols(args.protocol)
    if (args.eta is None) == (args.d_km is None):
        raise UsageError("give exactly one of --eta or --d-km")
    if args.eta is not None:
        etas = parse_range(args.eta)
        pairs = [(eta, formulas.distance_from_eta(eta)) for eta in etas]
    else:
        ds = parse_range(args.d_km)
        if any(d < 0 for d in ds):
            raise UsageError("--d-km must be non-negative")
        pairs = [(formulas.eta_from_distance(d), d) for d in ds]
    if args.x is None:
        raise UsageError("sweep needs --x")
    xs = parse_range(args.x)
    if any(x <= 0 for x in xs) or xs != sorted(xs):
        raise UsageError("--x values must be positive and ascending")
    deltas = parse_range(args.delta) if args.delta else [1.0]
    epsilons = parse_range(args.epsilon) if args.epsilon else [1.0]
    for v in [eta for eta, _ in pairs] + deltas + epsilons:
        if not 0.0 <= v <= 1.0:
            raise UsageError(f"parameter {v} outside [0, 1]")

    rows = []
    for protocol in protocols:
        block = []
        for eta, d in pairs:
            for delta in deltas:
                for eps in epsilons:
                    curve = comparison.tradeoff_curve(protocol, eta, delta, eps, xs)
                    for pt in curve:
                        block.append({
                            "protocol": protocol.value, "eta": eta, "d_km": d,
                            "delta": delta, "epsilon": eps, "x": pt.x,
                            "p_success": pt.p_success, "feasible": pt.feasible,
                            "dominated": pt.dominated,
                        })
        block.sort(key=lambda r: r["x"])
        rows.extend(block)
    rows.sort(key=lambda r: r["protocol"])
    return rows


def _grid_steps(text: str | None, default: tuple[int, int]) -> tuple[int, int]:
    if text is None:
        return default
    try:
        parts = [int(p) for p in text.lower().split("x")]
    except ValueError:
        raise UsageError(f"--grid must look like 400x200, got {text!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) < 1:
        raise UsageError(f"--grid needs two positive step counts, got {text!r}")
    return parts[0], parts[1]


def cmd_regions(args) -> list[dict]:
    d_range = parse_span(args.d_km, "--d-km") if args.d_km else comparison.DEFAULT_D_RANGE
    e_range = (parse_span(args.epsilon, "--epsilon") if args.epsilon
               else comparison.DEFAULT_EPSILON_RANGE)
    delta = _single(args, "delta", comparison.DEFAULT_DELTA)
    if d_range[0] < 0 or not (0 <= e_range[0] and e_range[1] <= 1) or not 0 <= delta <= 1:
        raise UsageError("region bounds out of range")
    steps = _grid_steps(args.grid, comparison.DEFAULT_STEPS)
    grid = comparison.region_map(d_range, e_range, delta, steps)
    rows = []
    for line in grid:
        for cell in line:
            p = cell.p_by_protocol
            rows.append({
                "d_km": cell.d_km, "epsilon": cell.epsilon, "delta": cell.delta,
                "x_target": cell.x_target,
                "p_do_nothing": p[ProtocolId.DO_NOTHING],
                "p_nla_bob": p[ProtocolId.NLA_BOB],
                "p_nla_halfway": p[ProtocolId.NLA_HALFWAY],
                "p_purification": p[ProtocolId.PURIFICATION],
                "winner": cell.winner.value,
            })
    return rows


def cmd_verify(args) -> tuple[str, int]:
    tol = DEFAULT_TOLERANCE if args.tolerance is None else args.tolerance
    steps = 9
    if args.grid is not None:
        try:
            steps = int(args.grid)
        except ValueError:
            raise UsageError(f"verify --grid takes an axis step count, got {args.grid!r}") from None
        if steps < 1:
            raise UsageError("verify --grid must be positive")
    fault = None
    if args.inject_fault:
        try:
            fault = FormulaId(args.inject_fault)
        except ValueError:
            raise UsageError(f"unknown formula {args.inject_fault!r}") from None
    checks = run_verification(default_grid(steps), tol, fault)
    rows = [{"formula": c.formula.value, "grid_size": c.n_points,
             "max_abs_dev": c.max_abs_dev, "tolerance": c.tolerance,
             "status": "pass" if c.passed else "FAIL"} for c in checks]
    text = render(rows, ("formula", "grid_size", "max_abs_dev", "tolerance", "status"),
                  args.format)
    return text, 0 if all(c.passed for c in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distill",
        description="Entanglement distribution over lossy channels: "
                    "simulation, formula checks, sweeps and protocol maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--protocol", help="do-nothing, nla-bob, nla-halfway, purification")
        p.add_argument("--eta", help="channel transmissivity (value or range)")
        p.add_argument("--d-km", dest="d_km", help="distance in km, eta = exp(-d/22)")
        p.add_argument("--delta", help="detector efficiency")
        p.add_argument("--epsilon", help="source efficiency")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="write output to PATH instead of stdout")
        p.add_argument("--grid", help="grid steps")
        p.add_argument("--tolerance", type=float)

    p = sub.add_parser("simulate", help="brute-force one protocol configuration")
    common(p)
    p.add_argument("--t", help="Bob/resource splitter transmissivity")
    p.add_argument("--x", help="target purity (NLA protocols)")
    p.add_argument("--tau", help="override Alice's splitter")

    p = sub.add_parser("verify", help="compare simulation with closed forms")
    common(p)
    p.add_argument("--inject-fault", dest="inject_fault", help=argparse.SUPPRESS)

    p = sub.add_parser("sweep", help="click probability against purity")
    common(p)
    p.add_argument("--x", help="purity values or start:end:step")

    p = sub.add_parser("regions", help="best protocol over distance and source quality")
    common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            text, code = cmd_verify(args)
        else:
            handler = {"simulate": (cmd_simulate, SIMULATE_COLUMNS),
                       "sweep": (cmd_sweep, SWEEP_COLUMNS),
                       "regions": (cmd_regions, REGION_COLUMNS)}[args.command]
            rows = handler[0](args)
            text, code = render(rows, handler[1], args.format), 0
    except UsageError as exc:
        print(f"distill: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
