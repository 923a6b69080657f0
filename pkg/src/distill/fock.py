"""Multi-mode bosonic pure states written as creation-operator polynomials.

A state is stored as a sparse map from monomials (per-mode exponents of the
creation operators) to complex coefficients, implicitly applied to vacuum.
Passive linear networks act on such polynomials by substituting every input
creation operator with its row of output operators, which keeps the expansion
exact with no photon-number truncation.

The Fock amplitude of a pattern ``n`` is the monomial coefficient times
``prod(sqrt(n_i!))``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PRUNE_THRESHOLD = 1e-15
MAX_PHOTONS_PER_MODE = 4

Monomial = tuple[int, ...]


class PhotonNumberError(ValueError):
    """Raised when a mode would hold more photons than the simulator allows."""


class Role(str, Enum):
    KEPT = "kept"
    DETECTED = "detected"
    ENVIRONMENT = "environment"
    AUXILIARY = "auxiliary"


@dataclass(frozen=True)
class ModeLabel:
    """Name and role of one optical mode.

    ``tag`` is free-form metadata such as ``"channel-loss"`` or
    ``"detector-loss"``; it never changes any probability.
    """

    name: str
    role: Role = Role.AUXILIARY
    tag: str | None = None


_SQRT_FACTORIAL = tuple(math.sqrt(math.factorial(k)) for k in range(MAX_PHOTONS_PER_MODE + 1))


def _bosonic_factor(mono: Monomial) -> float:
    factor = 1.0
    for k in mono:
        if k > 1:
            factor *= _SQRT_FACTORIAL[k]
    return factor


@dataclass(frozen=True)
class OperatorState:
    """Polynomial in creation operators applied to vacuum.

    Attributes:
        modes: Mode names, fixing the order of every monomial tuple.
        terms: Monomial -> complex coefficient. Terms below the prune
            threshold are dropped at construction.
    """

    modes: tuple[str, ...]
    terms: Mapping[Monomial, complex] = field(default_factory=dict)

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(set(modes)) != len(modes):
            raise ValueError(f"duplicate mode names in {modes}")
        n = len(modes)
        clean: dict[Monomial, complex] = {}
        for mono, amp in self.terms.items():
            mono = tuple(int(k) for k in mono)
            if len(mono) != n:
                raise ValueError(f"monomial {mono} does not match {n} modes")
            if any(k < 0 for k in mono):
                raise ValueError(f"negative exponent in {mono}")
            if any(k > MAX_PHOTONS_PER_MODE for k in mono):
                raise PhotonNumberError(
                    f"monomial {mono} exceeds {MAX_PHOTONS_PER_MODE} photons per mode"
                )
            if abs(amp) >= PRUNE_THRESHOLD:
                clean[mono] = complex(amp)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def vacuum(cls, modes: Sequence[str]) -> OperatorState:
        return cls(tuple(modes), {(0,) * len(modes): 1.0})

    @classmethod
    def from_fock(
        cls, modes: Sequence[str], amplitudes: Mapping[Monomial, complex]
    ) -> OperatorState:
        """Build a state from Fock amplitudes (inverse of ``to_fock``)."""
        terms = {}
        for pattern, amp in amplitudes.items():
            terms[tuple(pattern)] = amp / _bosonic_factor(pattern)
        return cls(tuple(modes), terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: OperatorState) -> OperatorState:
        if self.modes != other.modes:
            raise ValueError("cannot add states over different modes")
        out = dict(self.terms)
        for mono, amp in other.terms.items():
            out[mono] = out.get(mono, 0.0) + amp
        return OperatorState(self.modes, out)

    def __rmul__(self, scalar: complex) -> OperatorState:
        return OperatorState(self.modes, {m: scalar * a for m, a in self.terms.items()})

    def __mul__(self, other):
        """Scalar multiple, or operator product of two states.

        The operator product is taken over the union of both mode sets,
        self's modes first, so ``(g + k h) * (m + n p)`` builds a product of
        resource polynomials.
        """
        if not isinstance(other, OperatorState):
            return self.__rmul__(other)
        modes = self.modes + tuple(m for m in other.modes if m not in self.modes)
        left = [modes.index(m) for m in self.modes]
        right = [modes.index(m) for m in other.modes]
        out: dict[Monomial, complex] = {}
        for m1, a1 in self.terms.items():
            for m2, a2 in other.terms.items():
                key = [0] * len(modes)
                for i, k in zip(left, m1):
                    key[i] += k
                for i, k in zip(right, m2):
                    key[i] += k
                key = tuple(key)
                out[key] = out.get(key, 0.0) + a1 * a2
        return OperatorState(modes, out)

    def to_fock(self) -> dict[Monomial, complex]:
        return to_fock_amplitudes(self)

    def norm_squared(self) -> float:
        return inner_norm_squared(self)

    def normalized(self) -> OperatorState:
        norm = self.norm_squared()
        if norm <= 0.0:
            return self
        return (1.0 / math.sqrt(norm)) * self

    def reorder(self, modes: Sequence[str]) -> OperatorState:
        """Return the same state with monomials over ``modes``.

        ``modes`` may add extra (empty) modes but must contain all of ours.
        """
        modes = tuple(modes)
        missing = set(self.modes) - set(modes)
        if missing:
            raise ValueError(f"reorder drops modes {sorted(missing)}")
        idx = [self.modes.index(m) if m in self.modes else None for m in modes]
        terms = {
            tuple(0 if i is None else mono[i] for i in idx): amp
            for mono, amp in self.terms.items()
        }
        return OperatorState(modes, terms)


@dataclass(frozen=True)
class LinearNetwork:
    """Passive linear map from input creation operators to output ones.

    ``matrix[i, j]`` is the coefficient of ``output_modes[j]`` in the
    expansion of ``input_modes[i]``.
    """

    input_modes: tuple[ModeLabel, ...]
    output_modes: tuple[ModeLabel, ...]
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        n_in, n_out = len(self.input_modes), len(self.output_modes)
        if matrix.shape != (n_in, n_out):
            raise ValueError(f"matrix shape {matrix.shape} != ({n_in}, {n_out})")
        for labels in (self.input_modes, self.output_modes):
            names = [m.name for m in labels]
            if len(set(names)) != len(names):
                raise ValueError(f"mode names not unique: {names}")
        row_norms = np.linalg.norm(matrix, axis=1)
        if not np.allclose(row_norms, 1.0, atol=1e-12, rtol=0.0):
            raise ValueError(f"network rows are not normalized: {row_norms}")
        matrix.setflags(write=False)
        object.__setattr__(self, "input_modes", tuple(self.input_modes))
        object.__setattr__(self, "output_modes", tuple(self.output_modes))
        object.__setattr__(self, "matrix", matrix)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.input_modes)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.output_modes)

    def modes_with_role(self, role: Role) -> tuple[str, ...]:
        return tuple(m.name for m in self.output_modes if m.role == role)

    def output_label(self, name: str) -> ModeLabel:
        for m in self.output_modes:
            if m.name == name:
                return m
        raise KeyError(name)

    def row(self, name: str) -> dict[str, complex]:
        """Nonzero output coefficients of one input operator."""
        i = self.input_names.index(name)
        return {
            out: complex(c)
            for out, c in zip(self.output_names, self.matrix[i])
            if abs(c) > 0.0
        }

    def is_isometry(self, atol: float = 1e-12) -> bool:
        gram = self.matrix @ self.matrix.conj().T
        return bool(np.allclose(gram, np.eye(len(self.input_modes)), atol=atol, rtol=0.0))


def make_state(modes: Sequence[str], photons: Mapping[str, int]) -> OperatorState:
    """Monomial ``prod(mode^dagger ** count)`` over ``modes`` with amplitude 1."""
    modes = tuple(modes)
    exps = [0] * len(modes)
    for name, count in photons.items():
        if name not in modes:
            raise KeyError(f"unknown mode {name!r}")
        if count < 0:
            raise ValueError(f"negative photon count for {name!r}")
        exps[modes.index(name)] = int(count)
    return OperatorState(modes, {tuple(exps): 1.0})


def apply_network(state: OperatorState, net: LinearNetwork) -> OperatorState:
    """Substitute each input operator by its output combination and collect."""
    in_names = net.input_names
    unknown = set(state.modes) - set(in_names)
    if unknown:
        raise ValueError(f"state modes {sorted(unknown)} are not network inputs")
    n_out = len(net.output_modes)
    rows = []
    for name in state.modes:
        r = net.matrix[in_names.index(name)]
        rows.append([(j, complex(c)) for j, c in enumerate(r) if c != 0])

    out: dict[Monomial, complex] = {}
    for mono, coeff in state.terms.items():
        poly: dict[Monomial, complex] = {(0,) * n_out: coeff}
        for row, power in zip(rows, mono):
            for _ in range(power):
                nxt: dict[Monomial, complex] = {}
                for key, amp in poly.items():
                    for j, c in row:
                        new = key[:j] + (key[j] + 1,) + key[j + 1 :]
                        nxt[new] = nxt.get(new, 0.0) + amp * c
                poly = nxt
        for key, amp in poly.items():
            out[key] = out.get(key, 0.0) + amp
    return OperatorState(net.output_names, out)


def to_fock_amplitudes(state: OperatorState) -> dict[Monomial, complex]:
    return {mono: amp * _bosonic_factor(mono) for mono, amp in state.terms.items()}


def inner_norm_squared(state: OperatorState) -> float:
    return float(sum(abs(a) ** 2 for a in to_fock_amplitudes(state).values()))


def project(
    state: OperatorState,
    pattern: Mapping[str, int],
    amplitudes: Mapping[Monomial, complex] | None = None,
) -> tuple[OperatorState, float]:
    """Project onto a photon-count pattern over a subset of modes.

    Returns the unnormalized residual over the remaining modes together with
    its probability (squared norm). ``amplitudes`` may pass in a cached
    ``to_fock_amplitudes(state)``.
    """
    unknown = set(pattern) - set(state.modes)
    if unknown:
        raise ValueError(f"pattern modes {sorted(unknown)} not in state")
    if amplitudes is None:
        amplitudes = to_fock_amplitudes(state)
    fixed = [(state.modes.index(m), int(n)) for m, n in pattern.items()]
    keep = [i for i, m in enumerate(state.modes) if m not in pattern]
    amps = {}
    for mono, amp in amplitudes.items():
        if all(mono[i] == n for i, n in fixed):
            amps[tuple(mono[i] for i in keep)] = amp
    residual = OperatorState.from_fock(tuple(state.modes[i] for i in keep), amps)
    prob = float(sum(abs(a) ** 2 for a in amps.values()))
    return residual, prob


def outcome_probabilities(
    state: OperatorState, modes: Iterable[str]
) -> dict[Monomial, float]:
    """Marginal photon-count distribution over ``modes`` (complete basis)."""
    idx = [state.modes.index(m) for m in modes]
    probs: dict[Monomial, float] = {}
    for mono, amp in to_fock_amplitudes(state).items():
        key = tuple(mono[i] for i in idx)
        probs[key] = probs.get(key, 0.0) + abs(amp) ** 2
    return probs
