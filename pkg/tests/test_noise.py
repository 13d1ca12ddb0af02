import pytest

from fractalshor.circuit import Instruction, Kind, parse
from fractalshor.frame_sim import enumerate_fault_sites
from fractalshor.noise import NoiseModel, apply_noise


def test_noise_model_range():
    NoiseModel(0.0)
    NoiseModel(0.5)
    with pytest.raises(ValueError):
        NoiseModel(0.6)
    with pytest.raises(ValueError):
        NoiseModel(-0.1)


def test_mz_gets_flip_then_dep1():
    c = parse("MZ 4\n")
    noisy = apply_noise(c, NoiseModel(0.01))
    assert noisy.layers[0] == [
        Instruction(Kind.MZ, (4,), 0.01),
        Instruction(Kind.DEP1, (4,), 0.01),
    ]


def test_reset_noise_in_same_layer():
    c = parse("RX 0\nRZ 1\n")
    noisy = apply_noise(c, NoiseModel(0.02))
    assert noisy.layers[0] == [
        Instruction(Kind.RX, (0,)),
        Instruction(Kind.ZERR, (0,), 0.02),
        Instruction(Kind.RZ, (1,)),
        Instruction(Kind.XERR, (1,), 0.02),
    ]


def test_idle_kept_with_dep1():
    c = parse("IDLE 7\n")
    noisy = apply_noise(c, NoiseModel(0.25))
    assert noisy.layers[0] == [
        Instruction(Kind.IDLE, (7,)),
        Instruction(Kind.DEP1, (7,), 0.25),
    ]


def test_pair_measurement_noise():
    c = parse("MXX 0 1\nMZZ 2 3\n")
    noisy = apply_noise(c, NoiseModel(0.1))
    kinds = [(i.kind, i.probability) for i in noisy.layers[0]]
    assert kinds == [
        (Kind.MXX, 0.1),
        (Kind.DEP2, 0.1),
        (Kind.MZZ, 0.1),
        (Kind.DEP2, 0.1),
    ]


def test_zero_noise_annotations():
    c = parse("MXX 0 1\n")
    noisy = apply_noise(c, NoiseModel(0.0))
    assert noisy.layers[0][0].probability == 0.0
    # Zero-probability channels contribute no fault sites.
    assert enumerate_fault_sites(noisy) == []


def test_channel_outcome_probabilities_normalize():
    p = 0.3
    c = apply_noise(parse("IDLE 0\nTICK\nMXX 1 2\n"), NoiseModel(p))
    by_site = {}
    for fault, prob in enumerate_fault_sites(c):
        by_site.setdefault(fault.site, []).append(prob)
    for site, probs in by_site.items():
        total = sum(probs)
        # DEP1: 3 x p/3; DEP2: 15 x p/15; MERR: p.  Each channel's nontrivial
        # outcomes sum to exactly p, so with the identity the channel sums to 1.
        assert total == pytest.approx(p, rel=1e-12)
    sizes = sorted(len(v) for v in by_site.values())
    assert sizes == [1, 3, 15]
