"""Grid geometry and the fractal measurement schedule.

Qubits live at integer coordinates (row, col) on a rows x cols grid.
Vertical edges join vertically adjacent qubits and carry ZZ pair
measurements; horizontal edges join horizontally adjacent qubits and carry
XX pair measurements.  Edges are grouped into "dividers": a vertical
divider with index e (1 <= e < rows) is the full row of vertical edges
between qubit rows e-1 and e, and a horizontal divider with index e
(1 <= e < cols) is the full column of horizontal edges between qubit
columns e-1 and e.  All edges of a divider are measured together.

The schedule assigns each divider a layer slot inside the 4-layer round,
and (when a fractal pitch is set) deletes the divider from most rounds:
a divider whose index is divisible by pitch^L only participates once
every (4*hold)^L rounds, held for hold^L consecutive rounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Orientation(enum.Enum):
    HORIZONTAL = "H"
    VERTICAL = "V"

    @property
    def basis(self) -> str:
        """Measurement basis of this edge family: XX horizontal, ZZ vertical."""
        return "X" if self is Orientation.HORIZONTAL else "Z"


@dataclass(frozen=True)
class LatticeSpec:
    """A rows x cols grid of qubits (a square grid of diameter D has rows = cols = D)."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"lattice must be at least 2x2, got {self.rows}x{self.cols}")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols

    def qubit_index(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"qubit ({row}, {col}) outside {self.rows}x{self.cols} grid")
        return row * self.cols + col

    def qubit_coords(self, index: int) -> tuple[int, int]:
        return divmod(index, self.cols)

    def divider_indices(self, orientation: Orientation) -> range:
        """Valid divider indices: 1..rows-1 for vertical, 1..cols-1 for horizontal."""
        n = self.rows if orientation is Orientation.VERTICAL else self.cols
        return range(1, n)

    def divider_positions(self, orientation: Orientation) -> range:
        """Positions along a divider: columns for vertical, rows for horizontal."""
        return range(self.cols) if orientation is Orientation.VERTICAL else range(self.rows)


@dataclass(frozen=True)
class Edge:
    """One pair-measurement edge.

    A vertical edge (index e, position c) joins qubits (e-1, c) and (e, c)
    and carries a ZZ measurement; a horizontal edge (index e, position r)
    joins qubits (r, e-1) and (r, e) and carries an XX measurement.
    """

    orientation: Orientation
    index: int
    position: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"edge index must be >= 1, got {self.index}")
        if self.position < 0:
            raise ValueError(f"edge position must be >= 0, got {self.position}")

    @property
    def basis(self) -> str:
        return self.orientation.basis

    def endpoints(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """The two qubit coordinates joined by this edge."""
        if self.orientation is Orientation.VERTICAL:
            return (self.index - 1, self.position), (self.index, self.position)
        return (self.position, self.index - 1), (self.position, self.index)


@dataclass(frozen=True)
class ScheduleParams:
    """Fractal schedule parameters.

    pitch: odd integer >= 3, or None for the plain code (every edge measured
        every round).  Odd pitch keeps pair measurements monogamous at every
        concatenation level.
    hold: integer >= 1; how many times longer each successive concatenation
        level stays stitched.  hold = 1 reproduces the base schedule exactly.
    """

    pitch: int | None = None
    hold: int = 1

    def __post_init__(self) -> None:
        if self.pitch is not None:
            if self.pitch < 3 or self.pitch % 2 == 0:
                raise ValueError(f"pitch must be an odd integer >= 3, got {self.pitch}")
        if self.hold < 1:
            raise ValueError(f"hold must be >= 1, got {self.hold}")


def interleave_b(edge: Edge) -> int:
    """Layer-slot assignment within the 4-layer round.

    Vertical dividers use slots 0 (odd index) and 2 (even index); horizontal
    dividers use slots 1 (odd index) and 3 (even index).  Same-slot dividers
    share parity, hence never share a qubit, which keeps every qubit in at
    most one pair measurement per layer.
    """
    odd = edge.index % 2 == 1
    if edge.orientation is Orientation.VERTICAL:
        return 0 if odd else 2
    return 1 if odd else 3


def level(e: int, f: int) -> int:
    """Largest k such that f**k divides e.

    e = 0 is rejected: it would be divisible by every power of f.
    """
    if e < 1:
        raise ValueError(f"edge index must be >= 1, got {e}")
    if f < 3:
        raise ValueError(f"pitch must be >= 3, got {f}")
    k = 0
    while e % f == 0:
        e //= f
        k += 1
    return k


def edge_active(edge: Edge, t: int, params: ScheduleParams) -> bool:
    """Whether `edge` is measured in circuit layer `t`.

    Layer slot: t mod 4 must equal interleave_b(edge).  Round window: with
    L = level(index, pitch), the divider participates for hold**L consecutive
    rounds out of every (4*hold)**L, offset by b*((4*hold)**L - 1)/(4*hold - 1)
    rounds.  At hold = 1 this is exactly the condition
    t = b*(4**(L+1) - 1)/3 (mod 4**(L+1)).

    Arbitrary-precision integers throughout: huge t or deep levels are exact,
    never wrapped.
    """
    if t < 0:
        raise ValueError(f"layer index must be >= 0, got {t}")
    b = interleave_b(edge)
    if t % 4 != b:
        return False
    if params.pitch is None:
        return True
    lvl = level(edge.index, params.pitch)
    if lvl == 0:
        return True
    h = params.hold
    period = (4 * h) ** lvl
    width = h**lvl
    offset = b * (period - 1) // (4 * h - 1)
    return (t // 4 - offset) % period < width


def active_dividers(
    lattice: LatticeSpec, t: int, params: ScheduleParams
) -> tuple[Orientation, list[int]]:
    """The orientation and divider indices measured in layer `t`.

    Exactly one (orientation, parity) class owns each layer slot, so the
    result is a single orientation plus a sorted index list.
    """
    slot = t % 4
    orientation = Orientation.VERTICAL if slot in (0, 2) else Orientation.HORIZONTAL
    parity = 1 if slot in (0, 1) else 0
    out = []
    for e in lattice.divider_indices(orientation):
        if e % 2 != parity:
            continue
        if edge_active(Edge(orientation, e, 0), t, params):
            out.append(e)
    return orientation, out
