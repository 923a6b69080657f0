"""Optical circuit elements as small linear-network fragments.

Every element is a two-port beam splitter. With transmissivity ``t`` the
first input maps to ``sqrt(t) out1 + sqrt(1-t) out2`` and the second to
``-sqrt(1-t) out1 + sqrt(t) out2``. ``sign=-1`` flips the off-diagonal signs;
probabilities do not depend on it.

Fragments are chained with :class:`NetworkBuilder`, which tracks named rails
and composes fragments into a single :class:`~distill.fock.LinearNetwork`.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from distill.fock import LinearNetwork, ModeLabel, Role

CHANNEL_LOSS = "channel-loss"
SOURCE_LOSS = "source-loss"
DETECTOR_LOSS = "detector-loss"


@dataclass(frozen=True)
class NoiseParams:
    """Channel transmissivity and component efficiencies, all in [0, 1]."""

    eta: float = 1.0
    delta: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        for name in ("eta", "delta", "epsilon"):
            _check_unit(name, getattr(self, name))


@dataclass(frozen=True)
class ProtocolParams:
    """Alice's splitter ``tau`` and Bob's (or resource) splitter ``t``."""

    tau: float
    t: float

    def __post_init__(self):
        _check_unit("tau", self.tau)
        _check_unit("t", self.t)


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


def beam_splitter(
    t: float,
    inputs: tuple[str, str] = ("in1", "in2"),
    outputs: Sequence[ModeLabel | str] = ("out1", "out2"),
    sign: int = 1,
) -> LinearNetwork:
    _check_unit("transmissivity", t)
    r, s = math.sqrt(t), math.sqrt(1.0 - t)
    matrix = np.array([[r, sign * s], [-sign * s, r]])
    outs = tuple(o if isinstance(o, ModeLabel) else ModeLabel(o) for o in outputs)
    return LinearNetwork(tuple(ModeLabel(i) for i in inputs), outs, matrix)


def entangler(tau: float, sign: int = 1) -> LinearNetwork:
    """Single photon in ``in`` -> sqrt(tau)|10> + sqrt(1-tau)|01> over (kept, sent)."""
    return beam_splitter(
        tau,
        inputs=("in", "vac"),
        outputs=(ModeLabel("kept", Role.KEPT), ModeLabel("sent")),
        sign=sign,
    )


def loss_channel(transmissivity: float, tag: str = CHANNEL_LOSS, sign: int = 1) -> LinearNetwork:
    """Pure loss: the photon survives with amplitude sqrt(transmissivity)."""
    return beam_splitter(
        transmissivity,
        inputs=("in", "env_in"),
        outputs=(ModeLabel("out"), ModeLabel("env", Role.ENVIRONMENT, tag)),
        sign=sign,
    )


def noisy_source(epsilon: float, sign: int = 1) -> LinearNetwork:
    return loss_channel(epsilon, tag=SOURCE_LOSS, sign=sign)


def noisy_detector(delta: float, mode: str, sign: int = 1) -> tuple[LinearNetwork, str]:
    """Loss of ``1 - delta`` ahead of an ideal photon-number detector on ``mode``."""
    _check_unit("delta", delta)
    frag = beam_splitter(
        delta,
        inputs=("in", "env_in"),
        outputs=(
            ModeLabel(mode, Role.DETECTED),
            ModeLabel("env", Role.ENVIRONMENT, DETECTOR_LOSS),
        ),
        sign=sign,
    )
    return frag, mode


class NetworkBuilder:
    """Compose fragments on named rails into one network.

    Each rail starts as a vacuum-or-photon input mode and carries a current
    output label. ``apply`` embeds a two-port fragment on two rails (``None``
    opens a fresh vacuum rail) and relabels them.

    Example:
        >>> b = NetworkBuilder()
        >>> b.add_input("b_i")
        >>> b.apply(entangler(0.5), ["b_i", None], ["a", "chan"])
    """

    def __init__(self, sign: int = 1):
        self.sign = sign
        self._inputs: list[ModeLabel] = []
        self._labels: list[ModeLabel] = []
        self._matrix = np.zeros((0, 0), dtype=complex)

    def add_input(self, name: str, output: ModeLabel | str | None = None) -> str:
        label = output if isinstance(output, ModeLabel) else ModeLabel(output or name)
        if any(m.name == name for m in self._inputs):
            raise ValueError(f"input {name!r} already exists")
        if any(m.name == label.name for m in self._labels):
            raise ValueError(f"rail {label.name!r} already exists")
        n = len(self._inputs)
        grown = np.zeros((n + 1, n + 1), dtype=complex)
        grown[:n, :n] = self._matrix
        grown[n, n] = 1.0
        self._matrix = grown
        self._inputs.append(ModeLabel(name))
        self._labels.append(label)
        return label.name

    def _rail(self, name: str) -> int:
        for i, label in enumerate(self._labels):
            if label.name == name:
                return i
        raise KeyError(f"no rail named {name!r}")

    def apply(
        self,
        fragment: LinearNetwork,
        rails: Sequence[str | None],
        names: Sequence[ModeLabel | str | None] | None = None,
    ) -> None:
        """Embed ``fragment`` with its inputs on ``rails`` (in order).

        ``names`` sets the output label of each rail; ``None`` keeps the
        fragment's own output label (renamed after the rail for fresh rails).
        """
        k = len(fragment.input_modes)
        if len(rails) != k:
            raise ValueError(f"fragment has {k} ports, got {len(rails)} rails")
        names = list(names) if names is not None else [None] * k
        idx = []
        for port, rail in enumerate(rails):
            if rail is None:
                want = names[port]
                base = want.name if isinstance(want, ModeLabel) else want
                if base is None:
                    raise ValueError("a fresh rail needs an output name")
                rail = self.add_input(f"{base}_i", base)
            idx.append(self._rail(rail))
        if len(set(idx)) != k:
            raise ValueError("fragment ports must sit on distinct rails")

        n = len(self._labels)
        step = np.eye(n, dtype=complex)
        sub = np.asarray(fragment.matrix)
        for a, ia in enumerate(idx):
            for b, ib in enumerate(idx):
                step[ia, ib] = sub[a, b]
        self._matrix = self._matrix @ step

        for port, i in enumerate(idx):
            frag_label = fragment.output_modes[port]
            want = names[port]
            if isinstance(want, ModeLabel):
                label = want
            elif want is not None:
                label = ModeLabel(want, frag_label.role, frag_label.tag)
            else:
                label = ModeLabel(self._labels[i].name, frag_label.role, frag_label.tag)
            self._labels[i] = label
        if len({m.name for m in self._labels}) != n:
            raise ValueError(f"duplicate rail names after apply: {self._labels}")

    def splitter(self, t: float, rails, names=None) -> None:
        self.apply(beam_splitter(t, sign=self.sign), rails, names)

    def relabel(self, rail: str, label: ModeLabel) -> None:
        self._labels[self._rail(rail)] = label

    def build(
        self,
        input_order: Sequence[str] | None = None,
        output_order: Sequence[str] | None = None,
    ) -> LinearNetwork:
        """Freeze into a network, optionally fixing the mode orders.

        Modes not listed in an order are appended in creation order.
        """
        def order(labels, wanted):
            names = [m.name for m in labels]
            wanted = list(wanted or [])
            rest = [n for n in names if n not in wanted]
            return [names.index(n) for n in wanted + rest]

        rows = order(self._inputs, input_order)
        cols = order(self._labels, output_order)
        matrix = self._matrix[np.ix_(rows, cols)]
        return LinearNetwork(
            tuple(self._inputs[i] for i in rows),
            tuple(self._labels[j] for j in cols),
            matrix,
        )
