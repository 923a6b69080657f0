import math

import pytest

from distill import formulas as F
from distill.components import (
    CHANNEL_LOSS,
    DETECTOR_LOSS,
    SOURCE_LOSS,
    NetworkBuilder,
    NoiseParams,
    ProtocolParams,
    beam_splitter,
    entangler,
    loss_channel,
    noisy_detector,
    noisy_source,
)
from distill.fock import Role, apply_network, make_state, outcome_probabilities
from distill.protocols import ProtocolId, simulate

from conftest import R


def photon_through(net, name="in"):
    return apply_network(make_state(net.input_names, {name: 1}), net)


def test_entangler_full_keep():
    out = photon_through(entangler(1.0))
    assert out.modes == ("kept", "sent")
    assert out.terms == {(1, 0): 1.0}


def test_entangler_do_nothing_tau():
    eta = 0.5
    out = photon_through(entangler(eta / (1 + eta)))
    assert out.terms == pytest.approx({(1, 0): R(1 / 3), (0, 1): R(2 / 3)})


def test_entangler_balanced():
    out = photon_through(entangler(0.5))
    assert [abs(a) for a in out.terms.values()] == pytest.approx([R(0.5)] * 2)


def test_entangler_roles():
    net = entangler(0.3)
    assert net.modes_with_role(Role.KEPT) == ("kept",)


def test_loss_channel_identity():
    out = photon_through(loss_channel(1.0))
    assert out.terms == {(1, 0): 1.0}


def test_loss_channel_total_loss():
    out = photon_through(loss_channel(0.0))
    assert out.terms == {(0, 1): 1.0}
    assert loss_channel(0.0).output_label("env").tag == CHANNEL_LOSS


def test_half_channels_compose():
    b = NetworkBuilder()
    b.add_input("x")
    b.apply(loss_channel(math.sqrt(0.25)), ["x", None], [None, "e1"])
    b.apply(loss_channel(math.sqrt(0.25)), ["x", None], [None, "e2"])
    net = b.build()
    out = photon_through(net, "x")
    assert abs(out.terms[(1, 0, 0)]) == pytest.approx(0.5)


@pytest.mark.parametrize("x,y", [(0.3, 0.7), (0.9, 0.5), (0.0, 0.4), (1.0, 0.2)])
def test_loss_composition_matches_single_loss(x, y):
    b = NetworkBuilder()
    b.add_input("x")
    b.apply(loss_channel(x), ["x", None], [None, "e1"])
    b.apply(loss_channel(y), ["x", None], [None, "e2"])
    two = photon_through(b.build(), "x")
    one = photon_through(loss_channel(x * y))
    p_two = outcome_probabilities(two, ("x",))
    p_one = outcome_probabilities(one, ("out",))
    for k in (0, 1):
        assert p_two.get((k,), 0.0) == pytest.approx(p_one.get((k,), 0.0), abs=1e-12)


def test_noisy_source_amplitudes():
    assert photon_through(noisy_source(1.0)).terms == {(1, 0): 1.0}
    assert photon_through(noisy_source(0.0)).terms == {(0, 1): 1.0}
    out = photon_through(noisy_source(0.9))
    assert [abs(a) for a in out.terms.values()] == pytest.approx([R(0.9), R(0.1)])
    assert noisy_source(0.9).output_label("env").tag == SOURCE_LOSS


def test_source_and_loss_share_distribution():
    a = outcome_probabilities(photon_through(noisy_source(0.37)), ("out", "env"))
    b = outcome_probabilities(photon_through(loss_channel(0.37)), ("out", "env"))
    assert a == pytest.approx(b, abs=1e-15)


def test_detector_fragment():
    frag, mode = noisy_detector(0.9, "c")
    assert mode == "c"
    assert frag.output_label("c").role is Role.DETECTED
    env = frag.output_label("env")
    assert env.role is Role.ENVIRONMENT and env.tag == DETECTOR_LOSS


def test_dead_detectors_never_click():
    for protocol in (ProtocolId.NLA_BOB, ProtocolId.NLA_HALFWAY):
        res = simulate(protocol, 0.4, NoiseParams(0.6, 0.0, 1.0))
        assert res.p_success == 0.0
        assert math.isnan(res.x)


def test_detector_efficiency_factor():
    eta, t = 0.5, 0.5
    ideal = simulate(ProtocolId.NLA_BOB, t, NoiseParams(eta))
    noisy = simulate(ProtocolId.NLA_BOB, t, NoiseParams(eta, 0.9))
    assert noisy.p_success < ideal.p_success
    assert noisy.p_success == pytest.approx(
        F.p_nla_bob_detector_noise(noisy.x, eta, 0.9), abs=1e-12
    )


@pytest.mark.parametrize(
    "net",
    [beam_splitter(0.3), entangler(0.8), loss_channel(0.25), noisy_source(0.6),
     noisy_detector(0.7, "d")[0], beam_splitter(0.4, sign=-1)],
)
def test_fragments_are_isometries(net):
    assert net.is_isometry()


def test_parameters_validated():
    with pytest.raises(ValueError):
        beam_splitter(1.2)
    with pytest.raises(ValueError):
        NoiseParams(eta=-0.1)
    with pytest.raises(ValueError):
        ProtocolParams(tau=0.5, t=float("nan"))


def test_builder_rejects_duplicate_rails():
    b = NetworkBuilder()
    b.add_input("x")
    with pytest.raises(ValueError):
        b.add_input("x")
