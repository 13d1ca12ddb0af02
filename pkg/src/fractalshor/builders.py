"""Experiment circuit builders: memory blocks and the lattice-surgery block.

Circuit shape: one transversal reset layer, 4*rounds measurement layers
driven by the schedule (layer t of the schedule is circuit layer t+1), and
one transversal measurement layer.  Explicit IDLE instructions mark every
qubit not touched by a pair measurement in a measurement layer.

Detectors compare consecutive measurements of each divider.  The partition
of a divider into independent detector sets comes from a disjoint-set pass
over the anticommuting perpendicular edges measured strictly between the
two epochs: each such edge merges the two parallel positions it touches.
The transversal reset acts as a virtual epoch before layer 0 for dividers
of the experiment basis (contributing no records), and the transversal
measurement as a virtual epoch after the last layer whose per-edge values
are the products of the two single-qubit records.

Basis convention: horizontal edges measure XX and vertical edges measure
ZZ, so the logical X is an X product along a qubit column and the logical
Z a Z product along a qubit row (transposed relative to prose that puts
logical X on a row, which would fail to commute with the vertical ZZ
gauge).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from fractalshor.circuit import Circuit, Detector, Instruction, Kind, Observable
from fractalshor.lattice import (
    Edge,
    LatticeSpec,
    Orientation,
    ScheduleParams,
    active_dividers,
)

H = Orientation.HORIZONTAL
V = Orientation.VERTICAL

ActivityFn = Callable[[Orientation, int, int], bool]


@dataclass(frozen=True)
class MemoryExperimentSpec:
    """A memory experiment: init, `rounds` rounds of gauge measurements, readout."""

    lattice: LatticeSpec
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    basis: str = "X"
    rounds: int = 0  # 0 means "use the grid diameter"

    def __post_init__(self) -> None:
        if self.basis not in ("X", "Z"):
            raise ValueError(f"basis must be X or Z, got {self.basis!r}")
        if self.rounds == 0:
            object.__setattr__(self, "rounds", max(self.lattice.rows, self.lattice.cols))
        if self.rounds < 2:
            raise ValueError("need at least 2 rounds so every active edge is compared across time")


@dataclass(frozen=True)
class SurgeryExperimentSpec:
    """The logical XX pair-measurement block: two d x d patches side by side.

    The patches share a lattice of d rows and 2*d columns; the seam is the
    horizontal divider at column boundary d.  The block spends
    `rounds_before` rounds unstitched, `rounds_during` stitched, then
    `rounds_after` unstitched.
    """

    distance: int = 5
    rounds_before: int = 1
    rounds_during: int = 3
    rounds_after: int = 1
    basis: str = "X"

    def __post_init__(self) -> None:
        if self.distance < 2:
            raise ValueError("patch distance must be >= 2")
        if min(self.rounds_before, self.rounds_during, self.rounds_after) < 1:
            raise ValueError("all round counts must be >= 1")
        if self.basis not in ("X", "Z"):
            raise ValueError(f"basis must be X or Z, got {self.basis!r}")

    @property
    def lattice(self) -> LatticeSpec:
        return LatticeSpec(self.distance, 2 * self.distance)

    @property
    def stitch_pattern(self) -> tuple[bool, ...]:
        return (
            (False,) * self.rounds_before
            + (True,) * self.rounds_during
            + (False,) * self.rounds_after
        )


class _DisjointSet:
    """Union-find over a fixed integer range, path compression + union by size."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def sets(self) -> list[tuple[int, ...]]:
        groups: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            groups.setdefault(self.find(i), []).append(i)
        return sorted((tuple(sorted(v)) for v in groups.values()), key=lambda s: s[0])


def derive_detectors(
    lattice: LatticeSpec,
    active: ActivityFn,
    orientation: Orientation,
    index: int,
    t_prev: int,
    t_cur: int,
) -> list[tuple[int, ...]]:
    """Partition a divider's positions into detector sets for one comparison.

    Considers every perpendicular edge measured in a layer strictly between
    t_prev and t_cur (t_prev = -1 stands for the initial reset).  A
    perpendicular divider e2 always touches this divider's support, and its
    edges merge adjacent positions e2-1 and e2.
    """
    positions = lattice.divider_positions(orientation)
    dsu = _DisjointSet(len(positions))
    perp = V if orientation is H else H
    seen: set[int] = set()
    for t in range(max(t_prev + 1, 0), t_cur):
        for e2 in lattice.divider_indices(perp):
            if e2 in seen:
                continue
            if active(perp, e2, t):
                dsu.union(e2 - 1, e2)
                seen.add(e2)
    return dsu.sets()


def _build_block(
    lattice: LatticeSpec,
    basis: str,
    rounds: int,
    active: ActivityFn,
) -> tuple[Circuit, dict]:
    """Shared emission: layers, records, detectors.  Returns (circuit, record maps)."""
    num_layers = 4 * rounds
    reset_kind = Kind.RX if basis == "X" else Kind.RZ
    measure_kind = Kind.MX if basis == "X" else Kind.MZ
    qubits = list(range(lattice.num_qubits))

    layers: list[list[Instruction]] = []
    layers.append([Instruction(reset_kind, (q,)) for q in qubits])

    rec_counter = 0
    edge_rec: dict[tuple[Orientation, int, int, int], int] = {}
    epochs: dict[tuple[Orientation, int], list[int]] = {}
    for t in range(num_layers):
        layer: list[Instruction] = []
        orientation, dividers = active_dividers(lattice, t, ScheduleParams())
        dividers = [e for e in dividers if active(orientation, e, t)]
        kind = Kind.MXX if orientation is H else Kind.MZZ
        used: set[int] = set()
        for e in dividers:
            epochs.setdefault((orientation, e), []).append(t)
            for pos in lattice.divider_positions(orientation):
                edge = Edge(orientation, e, pos)
                (r1, c1), (r2, c2) = edge.endpoints()
                q1, q2 = lattice.qubit_index(r1, c1), lattice.qubit_index(r2, c2)
                layer.append(Instruction(kind, (q1, q2)))
                edge_rec[(orientation, e, pos, t)] = rec_counter
                rec_counter += 1
                used.update((q1, q2))
        for q in qubits:
            if q not in used:
                layer.append(Instruction(Kind.IDLE, (q,)))
        layers.append(layer)

    final_rec = {}
    final_layer: list[Instruction] = []
    for q in qubits:
        final_layer.append(Instruction(measure_kind, (q,)))
        final_rec[q] = rec_counter
        rec_counter += 1
    layers.append(final_layer)

    detectors = _derive_all_detectors(lattice, basis, num_layers, active, epochs, edge_rec, final_rec)

    circuit = Circuit(
        num_qubits=lattice.num_qubits,
        layers=layers,
        detectors=detectors,
        coords={lattice.qubit_index(r, c): (r, c) for r in range(lattice.rows) for c in range(lattice.cols)},
    )
    maps = {"edge_rec": edge_rec, "final_rec": final_rec, "epochs": epochs}
    return circuit, maps


def _derive_all_detectors(
    lattice: LatticeSpec,
    basis: str,
    num_layers: int,
    active: ActivityFn,
    epochs: dict[tuple[Orientation, int], list[int]],
    edge_rec: dict[tuple[Orientation, int, int, int], int],
    final_rec: dict[int, int],
) -> list[Detector]:
    out: list[tuple[tuple, Detector]] = []
    for orientation in (V, H):
        same_basis = orientation.basis == basis
        for e in lattice.divider_indices(orientation):
            real = epochs.get((orientation, e), [])
            if same_basis:
                pairs = list(zip([-1] + real, real + [num_layers]))
            else:
                pairs = list(zip(real, real[1:]))
            for t_prev, t_cur in pairs:
                for group in derive_detectors(lattice, active, orientation, e, t_prev, t_cur):
                    records: list[int] = []
                    if t_prev >= 0:
                        records += [edge_rec[(orientation, e, pos, t_prev)] for pos in group]
                    if t_cur < num_layers:
                        records += [edge_rec[(orientation, e, pos, t_cur)] for pos in group]
                        layer = t_cur + 1
                    else:
                        for pos in group:
                            for r, c in Edge(orientation, e, pos).endpoints():
                                records.append(final_rec[lattice.qubit_index(r, c)])
                        layer = num_layers + 1
                    if orientation is V:
                        coords = (float(group[0]), e - 0.5, float(t_cur), "Z")
                    else:
                        coords = (e - 0.5, float(group[0]), float(t_cur), "X")
                    out.append(((layer, 0 if orientation is V else 1, e, group[0]),
                                Detector(tuple(records), coords, layer)))
    out.sort(key=lambda kv: kv[0])
    return [det for _, det in out]


def build_memory(spec: MemoryExperimentSpec) -> Circuit:
    """Memory experiment circuit with detectors and one logical observable.

    The observable is the product of final transversal measurements along
    qubit column 0 (X basis) or row 0 (Z basis).
    """
    lattice, schedule = spec.lattice, spec.schedule

    def active(orientation: Orientation, e: int, t: int) -> bool:
        return _edge_on(orientation, e, t, schedule)

    circuit, maps = _build_block(lattice, spec.basis, spec.rounds, active)
    final_rec = maps["final_rec"]
    if spec.basis == "X":
        records = tuple(final_rec[lattice.qubit_index(r, 0)] for r in range(lattice.rows))
    else:
        records = tuple(final_rec[lattice.qubit_index(0, c)] for c in range(lattice.cols))
    circuit.observables.append(Observable(0, records))
    return circuit


def build_surgery(spec: SurgeryExperimentSpec) -> Circuit:
    """Lattice-surgery XX block between two patches, with flow observables.

    X basis: observable 0 and 1 are the per-patch logical X products
    (outermost columns); observable 2 is the parity of every seam MXX
    record, which reveals the logical XX outcome.  Z basis: observable 0 is
    the joint logical ZZ (row 0 across both patches).
    """
    return build_surgery_pattern(spec.distance, spec.stitch_pattern, spec.basis)


def build_surgery_pattern(distance: int, stitch_pattern: tuple[bool, ...], basis: str) -> Circuit:
    """Surgery block with an explicit per-round seam pattern.

    Chained blocks (surgery -> surgery, surgery -> memory) are expressed by
    longer patterns; each contiguous stitched segment contributes one
    seam-parity observable.
    """
    d = distance
    lattice = LatticeSpec(d, 2 * d)
    schedule = ScheduleParams()
    rounds = len(stitch_pattern)
    seam = d

    def active(orientation: Orientation, e: int, t: int) -> bool:
        if orientation is H and e == seam and not stitch_pattern[t // 4]:
            return False
        return _edge_on(orientation, e, t, schedule)

    circuit, maps = _build_block(lattice, basis, rounds, active)
    edge_rec, epochs = maps["edge_rec"], maps["epochs"]
    final_rec = maps["final_rec"]

    obs: list[Observable] = []
    if basis == "X":
        obs.append(Observable(0, tuple(final_rec[lattice.qubit_index(r, 0)] for r in range(d))))
        obs.append(Observable(1, tuple(final_rec[lattice.qubit_index(r, 2 * d - 1)] for r in range(d))))
        seam_epochs = epochs.get((H, seam), [])
        for segment in _contiguous_segments(seam_epochs):
            records = tuple(edge_rec[(H, seam, r, t)] for t in segment for r in range(d))
            obs.append(Observable(len(obs), records))
    else:
        obs.append(Observable(0, tuple(final_rec[lattice.qubit_index(0, c)] for c in range(2 * d))))
    circuit.observables.extend(obs)
    return circuit


def _contiguous_segments(epochs: list[int]) -> list[list[int]]:
    """Split seam epochs into runs of consecutive rounds."""
    segments: list[list[int]] = []
    for t in epochs:
        if segments and t // 4 - segments[-1][-1] // 4 <= 1:
            segments[-1].append(t)
        else:
            segments.append([t])
    return segments


def _edge_on(orientation: Orientation, e: int, t: int, schedule: ScheduleParams) -> bool:
    from fractalshor.lattice import edge_active

    return edge_active(Edge(orientation, e, 0), t, schedule)
