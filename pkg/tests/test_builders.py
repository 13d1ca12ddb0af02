import pytest

from fractalshor.builders import (
    MemoryExperimentSpec,
    SurgeryExperimentSpec,
    build_memory,
    build_surgery,
    build_surgery_pattern,
    derive_detectors,
)
from fractalshor.circuit import Kind
from fractalshor.lattice import LatticeSpec, Orientation, ScheduleParams

H = Orientation.HORIZONTAL
V = Orientation.VERTICAL


def layer_kind_count(circuit, layer_idx, kind):
    return sum(1 for ins in circuit.layers[layer_idx] if ins.kind is kind)


def test_plain_d5_round_contents():
    c = build_memory(MemoryExperimentSpec(LatticeSpec(5, 5), basis="X", rounds=5))
    for r in range(5):
        mxx = sum(layer_kind_count(c, 1 + 4 * r + s, Kind.MXX) for s in range(4))
        mzz = sum(layer_kind_count(c, 1 + 4 * r + s, Kind.MZZ) for s in range(4))
        assert (mxx, mzz) == (20, 20)


def test_smallest_grid_validates():
    c = build_memory(MemoryExperimentSpec(LatticeSpec(2, 2), basis="X", rounds=2))
    c.validate()


def test_default_rounds_equal_diameter():
    spec = MemoryExperimentSpec(LatticeSpec(7, 7), basis="Z")
    assert spec.rounds == 7
    with pytest.raises(ValueError, match="2 rounds"):
        MemoryExperimentSpec(LatticeSpec(3, 3), basis="X", rounds=1)


@pytest.mark.slow
def test_fractal_d27_more_detectors_than_plain():
    plain = build_memory(MemoryExperimentSpec(LatticeSpec(27, 27), basis="X", rounds=27))
    frac = build_memory(
        MemoryExperimentSpec(LatticeSpec(27, 27), ScheduleParams(pitch=3), basis="X", rounds=27)
    )
    plain.validate()
    frac.validate()
    assert frac.num_detectors > plain.num_detectors


@pytest.mark.slow
@pytest.mark.parametrize("pitch", [3, 5])
def test_d27_monogamy_validates(pitch):
    c = build_memory(
        MemoryExperimentSpec(LatticeSpec(27, 27), ScheduleParams(pitch=pitch), basis="Z", rounds=8)
    )
    c.validate()


def test_surgery_gate_counts_and_accounting():
    for basis in ("X", "Z"):
        c = build_surgery(SurgeryExperimentSpec(basis=basis))
        mxx, mzz, idle = (c.count_kind(k) for k in (Kind.MXX, Kind.MZZ, Kind.IDLE))
        assert (mxx, mzz, idle) == (215, 200, 170)
        # 50 qubits x 5 rounds x 4 layers: every qubit does one thing per layer.
        assert 2 * mxx + 2 * mzz + idle == 50 * 5 * 4 == 1000


def test_stitched_rounds_have_d_more_mxx():
    c = build_surgery(SurgeryExperimentSpec())
    per_round = []
    for r in range(5):
        per_round.append(sum(layer_kind_count(c, 1 + 4 * r + s, Kind.MXX) for s in range(4)))
    assert per_round == [40, 45, 45, 45, 40]


def test_surgery_observable_structure():
    cx = build_surgery(SurgeryExperimentSpec(basis="X"))
    assert cx.num_observables == 3
    # Seam observable references 3 rounds x 5 edges of seam records.
    assert len(cx.observables[2].records) == 15
    cz = build_surgery(SurgeryExperimentSpec(basis="Z"))
    assert cz.num_observables == 1
    assert len(cz.observables[0].records) == 10  # row 0 across both patches


def test_surgery_pattern_segments():
    c = build_surgery_pattern(3, (False, True, True, False, True, False), "X")
    # Two stitched segments -> two seam observables after the two patch ones.
    assert c.num_observables == 4
    assert len(c.observables[2].records) == 2 * 3
    assert len(c.observables[3].records) == 1 * 3


def test_derive_detectors_plain_full_union():
    lattice = LatticeSpec(3, 3)
    plain = ScheduleParams()

    def active(orientation, e, t):
        from fractalshor.lattice import Edge, edge_active

        return edge_active(Edge(orientation, e, 0), t, plain)

    # Vertical divider 1 measured at t=0 and t=4; horizontal edges at t=1, 3
    # chain all three columns together.
    sets = derive_detectors(lattice, active, V, 1, 0, 4)
    assert sets == [(0, 1, 2)]


def test_derive_detectors_no_intervening_edges():
    lattice = LatticeSpec(5, 5)

    def active(orientation, e, t):
        return False  # nothing anticommuting in the window

    sets = derive_detectors(lattice, active, H, 2, 3, 19)
    assert sets == [(0,), (1,), (2,), (3,), (4,)]


def test_fractal_is_subset_of_plain_instructions():
    lattice = LatticeSpec(9, 9)
    plain = build_memory(MemoryExperimentSpec(lattice, basis="X", rounds=6))
    frac = build_memory(
        MemoryExperimentSpec(lattice, ScheduleParams(pitch=3), basis="X", rounds=6)
    )
    for lp, lf in zip(plain.layers, frac.layers):
        pairs_plain = {i for i in lp if i.kind in (Kind.MXX, Kind.MZZ)}
        pairs_frac = {i for i in lf if i.kind in (Kind.MXX, Kind.MZZ)}
        assert pairs_frac <= pairs_plain


def test_rectangular_lattice_supported():
    c = build_memory(MemoryExperimentSpec(LatticeSpec(5, 10), basis="X", rounds=4))
    c.validate()
