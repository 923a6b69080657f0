"""Circuits for the four entanglement-distribution protocols and their evaluation.

Each circuit is a single passive network plus an input polynomial. Evaluation
expands the input exactly, projects onto every heralding click pattern and
splits the residual into the loss-free part (all environment modes empty) and
the rest.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum

from distill import formulas
from distill.components import (
    CHANNEL_LOSS,
    NetworkBuilder,
    NoiseParams,
    ProtocolParams,
    entangler,
    loss_channel,
    noisy_detector,
    noisy_source,
)
from distill.fock import (
    LinearNetwork,
    ModeLabel,
    OperatorState,
    Role,
    apply_network,
    make_state,
    outcome_probabilities,
    project,
    to_fock_amplitudes,
)

UNIFORMITY_TOL = 1e-10
ZERO_PROB = 1e-15


class ProtocolId(str, Enum):
    DO_NOTHING = "do-nothing"
    NLA_BOB = "nla-bob"
    NLA_HALFWAY = "nla-halfway"
    PURIFICATION = "purification"


class NonUniformClicks(RuntimeError):
    """Click patterns of one circuit herald with different probabilities."""


@dataclass(frozen=True)
class Circuit:
    protocol: ProtocolId
    params: ProtocolParams
    noise: NoiseParams
    network: LinearNetwork
    input_state: OperatorState
    click_patterns: tuple[Mapping[str, int], ...]

    @property
    def kept_modes(self) -> tuple[str, ...]:
        return self.network.modes_with_role(Role.KEPT)

    @property
    def detected_modes(self) -> tuple[str, ...]:
        return self.network.modes_with_role(Role.DETECTED)

    @property
    def environment_modes(self) -> tuple[str, ...]:
        return self.network.modes_with_role(Role.ENVIRONMENT)

    def output_state(self) -> OperatorState:
        return apply_network(self.input_state, self.network)


@dataclass(frozen=True)
class ConditionedOutcome:
    """Heralded result of one circuit.

    ``p_f``, ``p_0``, ``psi_f`` and ``psi_0`` refer to the first click pattern;
    ``p_success`` sums over all of them. ``x`` is ``inf`` when nothing is lost
    and ``nan`` when the circuit never clicks.
    """

    p_success: float
    p_f: float
    p_0: float
    x: float
    psi_f: OperatorState
    psi_0: OperatorState
    click_multiplicity: int
    pattern_probabilities: tuple[float, ...] = field(default=())

    @property
    def psi_f_normalized(self) -> OperatorState:
        return self.psi_f.normalized()

    @property
    def psi_0_normalized(self) -> OperatorState:
        return self.psi_0.normalized()

    @property
    def purity(self) -> float:
        return math.nan if math.isnan(self.x) else formulas.purity_from_x(self.x)


def max_entanglement_tau(
    protocol: ProtocolId | str,
    t: float,
    noise: NoiseParams,
    resource_loss: str = "asymmetric",
) -> float:
    """Alice's splitter that balances the two kept-mode amplitudes of psi_f."""
    protocol = ProtocolId(protocol)
    if protocol is ProtocolId.PURIFICATION and resource_loss == "uniform":
        return t
    if protocol is ProtocolId.DO_NOTHING:
        return formulas.tau_do_nothing(noise.eta)
    if protocol is ProtocolId.NLA_BOB:
        return formulas.tau_nla_bob(t, noise.eta)
    if protocol is ProtocolId.NLA_HALFWAY:
        return formulas.tau_nla_halfway(t)
    return formulas.tau_purification(t, noise.epsilon)


def t_from_target_x(protocol: ProtocolId | str, x: float, noise: NoiseParams) -> float:
    """Bob's splitter giving purity ``x``; raises InfeasibleTarget past the bound."""
    protocol = ProtocolId(protocol)
    if protocol is ProtocolId.NLA_BOB:
        return formulas.t_nla_bob_from_x(x, noise.eta, noise.delta, noise.epsilon)
    if protocol is ProtocolId.NLA_HALFWAY:
        return formulas.t_nla_halfway_from_x(x, noise.eta, noise.delta, noise.epsilon)
    raise ValueError(f"purity of {protocol.value} is not tunable through t")


def matched_params(protocol: ProtocolId | str, t: float, noise: NoiseParams) -> ProtocolParams:
    return ProtocolParams(tau=max_entanglement_tau(protocol, t, noise), t=t)


def build(
    protocol: ProtocolId | str,
    params: ProtocolParams,
    noise: NoiseParams = NoiseParams(),
    *,
    alice_source: bool = False,
    sign: int = 1,
    resource_loss: str = "asymmetric",
) -> Circuit:
    """Wire up one protocol.

    Args:
        protocol: Which protocol to build.
        params: Splitter settings ``tau`` and ``t``.
        noise: Channel transmissivity and component efficiencies. The source
            efficiency applies to Bob's photon (NLA) or to every resource
            branch (purification).
        alice_source: Also pass Alice's photon through a source loss.
        sign: Beam-splitter sign convention, +1 or -1.
        resource_loss: Source-loss placement on the purification resource
            states, a key of ``RESOURCE_LOSS_PASSES``.
    """
    protocol = ProtocolId(protocol)
    builders = {
        ProtocolId.DO_NOTHING: _build_do_nothing,
        ProtocolId.NLA_BOB: _build_nla_bob,
        ProtocolId.NLA_HALFWAY: _build_nla_halfway,
    }
    if resource_loss not in RESOURCE_LOSS_PASSES:
        raise ValueError(f"unknown resource loss placement {resource_loss!r}")
    if protocol is ProtocolId.PURIFICATION:
        net, state, patterns = _build_purification(
            params, noise, alice_source, sign, resource_loss
        )
    else:
        net, state, patterns = builders[protocol](params, noise, alice_source, sign)
    return Circuit(protocol, params, noise, net, state, patterns)


def _alice_photon(b: NetworkBuilder, rail: str, noise, alice_source, sign):
    if alice_source:
        b.apply(noisy_source(noise.epsilon, sign), [rail, None], [None, "s_a"])


def _build_do_nothing(params, noise, alice_source, sign):
    b = NetworkBuilder(sign)
    for name in ("a_i", "b_i", "e_i"):
        b.add_input(name)
    _alice_photon(b, "b_i", noise, alice_source, sign)
    b.apply(entangler(params.tau, sign), ["b_i", "a_i"], ["a", "chan"])
    b.apply(loss_channel(noise.eta, sign=sign), ["chan", "e_i"],
            [ModeLabel("b", Role.KEPT), ModeLabel("e", Role.ENVIRONMENT, CHANNEL_LOSS)])
    net = b.build(["a_i", "b_i", "e_i"], ["a", "b", "e"])
    return net, make_state(net.input_names, {"b_i": 1}), ()


def _nla_patterns():
    return ({"b": 0, "c": 1}, {"b": 1, "c": 0})


def _detect(b: NetworkBuilder, modes, delta, sign):
    for mode in modes:
        frag, _ = noisy_detector(delta, mode, sign)
        b.apply(frag, [mode, None], [None, "l" + mode])


def _build_nla_bob(params, noise, alice_source, sign):
    b = NetworkBuilder(sign)
    for name in ("a_i", "b_i", "c_i", "d_i", "e_i"):
        b.add_input(name)
    _alice_photon(b, "b_i", noise, alice_source, sign)
    b.apply(entangler(params.tau, sign), ["b_i", "a_i"], ["a", "chan_a"])
    b.apply(loss_channel(noise.eta, sign=sign), ["chan_a", "e_i"], [None, "e"])
    b.apply(noisy_source(noise.epsilon, sign), ["d_i", None], [None, "s"])
    b.apply(entangler(params.t, sign), ["d_i", "c_i"], ["d", "chan_b"])
    b.splitter(0.5, ["chan_a", "chan_b"], ["b", "c"])
    _detect(b, ("b", "c"), noise.delta, sign)
    net = b.build(["a_i", "b_i", "c_i", "d_i", "e_i"], ["a", "b", "c", "d", "e"])
    return net, make_state(net.input_names, {"b_i": 1, "d_i": 1}), _nla_patterns()


def _build_nla_halfway(params, noise, alice_source, sign):
    # Both parties keep their entangled halves at home; each sent half crosses
    # half the channel (transmissivity sqrt(eta)) to the central splitter.
    half = math.sqrt(noise.eta)
    b = NetworkBuilder(sign)
    for name in ("a_i", "b_i", "c_i", "d_i", "e_i", "f_i"):
        b.add_input(name)
    _alice_photon(b, "b_i", noise, alice_source, sign)
    b.apply(entangler(params.tau, sign), ["b_i", "a_i"], ["a", "chan_a"])
    b.apply(loss_channel(half, sign=sign), ["chan_a", "e_i"], [None, "e"])
    b.apply(noisy_source(noise.epsilon, sign), ["d_i", None], [None, "s"])
    b.apply(entangler(params.t, sign), ["d_i", "c_i"], ["d", "chan_b"])
    b.apply(loss_channel(half, sign=sign), ["chan_b", "f_i"], [None, "f"])
    b.splitter(0.5, ["chan_a", "chan_b"], ["b", "c"])
    _detect(b, ("b", "c"), noise.delta, sign)
    net = b.build(
        ["a_i", "b_i", "c_i", "d_i", "e_i", "f_i"], ["a", "b", "c", "d", "e", "f"]
    )
    return net, make_state(net.input_names, {"b_i": 1, "d_i": 1}), _nla_patterns()


PURIFICATION_PAIRS = (("b", "k"), ("d", "g"), ("c", "m"), ("a", "p"))

# Number of source-loss passes on each resource branch. "asymmetric" leaves h
# lossless and passes n twice; it is the placement whose heralded P_f and P_0
# follow the closed forms in ``formulas``. "uniform" gives every branch one
# pass, which yields x = epsilon / (1 - epsilon) at tau = t.
RESOURCE_LOSS_PASSES = {
    "asymmetric": {"k": 1, "h": 0, "g": 1, "m": 1, "n": 2, "p": 1},
    "uniform": {"k": 1, "h": 1, "g": 1, "m": 1, "n": 1, "p": 1},
}


def _purification_patterns():
    patterns = []
    for bits in range(16):
        pattern = {}
        for j, (first, second) in enumerate(PURIFICATION_PAIRS):
            hit = (bits >> (3 - j)) & 1
            pattern[first], pattern[second] = 1 - hit, hit
        patterns.append(pattern)
    return tuple(patterns)


def _build_purification(params, noise, alice_source, sign, resource_loss="asymmetric"):
    tau, t = params.tau, params.t
    env = lambda name: ModeLabel(name, Role.ENVIRONMENT, CHANNEL_LOSS)  # noqa: E731
    inputs = ("a_i", "b_i", "c_i", "d_i", "e_i", "f_i",
              "k_i", "h_i", "g_i", "m_i", "n_i", "p_i")
    b = NetworkBuilder(sign)
    for name in inputs:
        b.add_input(name)
    if alice_source:
        raise ValueError("purification assumes Alice's entangled photons are ideal")
    passes = RESOURCE_LOSS_PASSES[resource_loss]
    for name in ("k_i", "h_i", "g_i", "m_i", "n_i", "p_i"):
        for j in range(passes[name[0]]):
            b.apply(noisy_source(noise.epsilon, sign), [name, None],
                    [None, "s" + name[0] + ("" if j == 0 else str(j + 1))])

    # Alice's first photon: the tau arm crosses the channel to the (a, p) corner.
    b.splitter(1 - tau, ["a_i", "b_i"], ["arm_a", "local_a"])
    b.splitter(noise.eta, ["arm_a", "f_i"], [None, env("f")])
    b.splitter(0.5, ["arm_a", "p_i"], ["a", "p"])
    b.splitter(0.5, ["local_a", "k_i"], ["b", "k"])
    # Alice's second photon: the t arm crosses the channel to the (c, m) corner.
    b.splitter(1 - t, ["d_i", "c_i"], ["local_b", "arm_b"])
    b.splitter(noise.eta, ["e_i", "arm_b"], [env("e"), None])
    b.splitter(0.5, ["m_i", "arm_b"], ["m", "c"])
    b.splitter(0.5, ["g_i", "local_b"], ["g", "d"])
    b.relabel("h_i", ModeLabel("h", Role.KEPT))
    b.relabel("n_i", ModeLabel("n", Role.KEPT))
    _detect(b, ("a", "b", "c", "d", "g", "k", "m", "p"), noise.delta, sign)

    net = b.build(
        inputs, ["a", "b", "c", "d", "e", "f", "g", "h", "k", "m", "n", "p"]
    )
    half = math.sqrt(0.5)
    omega_a = OperatorState(("k_i", "h_i", "g_i"), {(0, 0, 1): half, (1, 1, 0): half})
    omega_b = OperatorState(("m_i", "n_i", "p_i"), {(1, 0, 0): half, (0, 1, 1): half})
    photons = make_state(("b_i", "d_i"), {"b_i": 1, "d_i": 1})
    state = (photons * omega_a * omega_b).reorder(net.input_names)
    return net, state, _purification_patterns()


def evaluate(circuit: Circuit, output: OperatorState | None = None) -> ConditionedOutcome:
    """Brute-force heralded outcome of a circuit.

    Raises:
        NonUniformClicks: if the click patterns do not share one probability.
    """
    if output is None:
        output = circuit.output_state()
    env = circuit.environment_modes
    patterns = circuit.click_patterns or ({},)

    amplitudes = to_fock_amplitudes(output)
    first = None
    probs = []
    for pattern in patterns:
        residual, prob = project(output, pattern, amplitudes)
        probs.append(prob)
        if first is None:
            first = residual
    if max(probs) - min(probs) > UNIFORMITY_TOL:
        raise NonUniformClicks(
            f"{circuit.protocol.value}: click probabilities differ: {probs}"
        )

    psi_f, p_f = project(first, {m: 0 for m in env})
    lost = {
        mono: amp
        for mono, amp in first.terms.items()
        if any(mono[first.modes.index(m)] for m in env)
    }
    psi_0 = OperatorState(first.modes, lost)
    p_0 = psi_0.norm_squared()
    p_success = float(sum(probs))

    if p_success <= ZERO_PROB:
        x = math.nan
    elif p_0 <= ZERO_PROB:
        x = math.inf
    else:
        x = p_f / p_0
    return ConditionedOutcome(
        p_success=p_success,
        p_f=p_f,
        p_0=p_0,
        x=x,
        psi_f=psi_f,
        psi_0=psi_0,
        click_multiplicity=len(patterns),
        pattern_probabilities=tuple(probs),
    )


def simulate(
    protocol: ProtocolId | str,
    t: float,
    noise: NoiseParams = NoiseParams(),
    tau: float | None = None,
    **kwargs,
) -> ConditionedOutcome:
    """Build at the maximal-entanglement tau (unless given) and evaluate."""
    if tau is None:
        tau = max_entanglement_tau(
            protocol, t, noise, kwargs.get("resource_loss", "asymmetric")
        )
    return evaluate(build(protocol, ProtocolParams(tau=tau, t=t), noise, **kwargs))


def total_outcome_probability(circuit: Circuit, output: OperatorState | None = None) -> float:
    """Sum of probabilities over the full detected-plus-environment basis."""
    if output is None:
        output = circuit.output_state()
    modes = circuit.detected_modes + circuit.environment_modes
    return float(sum(outcome_probabilities(output, modes).values()))
