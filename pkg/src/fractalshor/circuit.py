"""Layered circuit intermediate representation and its `.fsc` text format.

A circuit is an ordered list of layers, each an ordered list of
instructions over a purely dissipative gate set: resets (RX/RZ), single
and pair measurements (MX/MZ/MXX/MZZ), explicit idles, and Pauli noise
channels (XERR/ZERR/DEP1/DEP2).  Measurements may carry a result-flip
probability.  Detectors and observables reference measurement records;
internally records are absolute indices (the k-th record ever produced has
index k-1), while the text format uses rec[-j] lookbacks relative to the
declaration point.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field


class Kind(enum.Enum):
    RX = "RX"
    RZ = "RZ"
    MX = "MX"
    MZ = "MZ"
    MXX = "MXX"
    MZZ = "MZZ"
    IDLE = "IDLE"
    XERR = "XERR"
    ZERR = "ZERR"
    DEP1 = "DEP1"
    DEP2 = "DEP2"


MEASUREMENT_KINDS = {Kind.MX, Kind.MZ, Kind.MXX, Kind.MZZ}
NOISE_KINDS = {Kind.XERR, Kind.ZERR, Kind.DEP1, Kind.DEP2}
PAIRWISE_KINDS = {Kind.MXX, Kind.MZZ, Kind.DEP2}


@dataclass(frozen=True)
class Instruction:
    kind: Kind
    targets: tuple[int, ...]
    probability: float | None = None

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError(f"{self.kind.value} instruction with no targets")
        if any(t < 0 for t in self.targets):
            raise ValueError(f"negative qubit target in {self}")
        if self.kind in PAIRWISE_KINDS and len(self.targets) % 2 != 0:
            raise ValueError(f"{self.kind.value} needs an even number of targets, got {len(self.targets)}")
        if self.probability is not None and not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        if self.kind in NOISE_KINDS and self.probability is None:
            raise ValueError(f"{self.kind.value} requires a probability")

    @property
    def group_size(self) -> int:
        return 2 if self.kind in PAIRWISE_KINDS else 1

    @property
    def num_records(self) -> int:
        """One record per target group for measurements, else zero."""
        if self.kind in MEASUREMENT_KINDS:
            return len(self.targets) // self.group_size
        return 0

    def groups(self) -> list[tuple[int, ...]]:
        g = self.group_size
        return [self.targets[i : i + g] for i in range(0, len(self.targets), g)]


@dataclass(frozen=True)
class Detector:
    """A deterministic measurement-record parity.

    records: absolute record indices.  layer: index of the layer after which
    the detector is declared (lookbacks are relative to the measurement count
    at that point).  coords: (x, y, t, basis) with basis "X" or "Z".
    """

    records: tuple[int, ...]
    coords: tuple[float, float, float, str]
    layer: int

    def __post_init__(self) -> None:
        if not self.records:
            raise ValueError("detector with empty record set")
        if self.coords[3] not in ("X", "Z"):
            raise ValueError(f"detector basis must be X or Z, got {self.coords[3]!r}")


@dataclass(frozen=True)
class Observable:
    """A tracked logical observable: a deterministic record parity with an id."""

    id: int
    records: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.records:
            raise ValueError("observable with empty record set")


@dataclass
class Circuit:
    num_qubits: int
    layers: list[list[Instruction]] = field(default_factory=list)
    detectors: list[Detector] = field(default_factory=list)
    observables: list[Observable] = field(default_factory=list)
    coords: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def num_records(self) -> int:
        return sum(ins.num_records for layer in self.layers for ins in layer)

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    @property
    def num_observables(self) -> int:
        return len(self.observables)

    @property
    def has_noise(self) -> bool:
        return any(
            ins.kind in NOISE_KINDS or (ins.kind in MEASUREMENT_KINDS and ins.probability is not None)
            for layer in self.layers
            for ins in layer
        )

    def count_kind(self, kind: Kind) -> int:
        return sum(1 for layer in self.layers for ins in layer if ins.kind is kind)

    def records_before_layer_end(self, layer: int) -> int:
        """Total records produced by layers 0..layer inclusive."""
        return sum(ins.num_records for lay in self.layers[: layer + 1] for ins in lay)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.num_qubits == other.num_qubits
            and self.layers == other.layers
            and self.detectors == other.detectors
            and self.observables == other.observables
            and self.coords == other.coords
        )

    # ---------------------------------------------------------------- validation

    def validate(self) -> None:
        """Check structural invariants; raise CircuitError on the first violation.

        Within a layer each qubit may appear in at most one non-noise
        instruction; pairwise kinds need even target counts (enforced at
        construction); record references must resolve to existing records.
        """
        for layer_idx, layer in enumerate(self.layers):
            used: set[int] = set()
            for ins in layer:
                if max(ins.targets) >= self.num_qubits:
                    raise CircuitError(
                        f"layer {layer_idx}: target {max(ins.targets)} >= num_qubits {self.num_qubits}"
                    )
                if ins.kind in NOISE_KINDS:
                    continue
                for q in ins.targets:
                    if q in used:
                        raise CircuitError(f"layer {layer_idx}: qubit {q} used twice")
                    used.add(q)
        cumulative = [0]
        for layer in self.layers:
            cumulative.append(cumulative[-1] + sum(ins.num_records for ins in layer))
        total = cumulative[-1]
        for det in self.detectors:
            if det.layer >= len(self.layers):
                raise CircuitError(f"detector declared after nonexistent layer {det.layer}")
            avail = cumulative[det.layer + 1]
            for r in det.records:
                if not 0 <= r < avail:
                    raise CircuitError(
                        f"detector at layer {det.layer}: record {r} outside [0, {avail})"
                    )
        for obs in self.observables:
            for r in obs.records:
                if not 0 <= r < total:
                    raise CircuitError(f"observable {obs.id}: record {r} outside [0, {total})")

    # ---------------------------------------------------------------- text format

    def serialize(self) -> str:
        """Render to the `.fsc` text format (UTF-8, LF line endings)."""
        lines: list[str] = []
        for q in sorted(self.coords):
            r, c = self.coords[q]
            lines.append(f"QUBIT({r},{c}) {q}")
        dets_by_layer: dict[int, list[Detector]] = {}
        for det in self.detectors:
            dets_by_layer.setdefault(det.layer, []).append(det)
        m_count = 0
        for layer_idx, layer in enumerate(self.layers):
            if layer_idx > 0:
                lines.append("TICK")
            for ins in layer:
                lines.append(_format_instruction(ins))
                m_count += ins.num_records
            for det in dets_by_layer.get(layer_idx, ()):
                refs = " ".join(f"rec[{r - m_count}]" for r in det.records)
                x, y, t, b = det.coords
                lines.append(f"DETECTOR({_fmt_num(x)},{_fmt_num(y)},{_fmt_num(t)},{b}) {refs}")
        for obs in self.observables:
            refs = " ".join(f"rec[{r - m_count}]" for r in obs.records)
            lines.append(f"OBSERVABLE({obs.id}) {refs}")
        return "\n".join(lines) + "\n"


class CircuitError(ValueError):
    """A circuit invariant violation (construction, validation, or parsing)."""


def _fmt_num(v: float) -> str:
    if float(v) == int(v):
        return str(int(v))
    return repr(float(v))


def _format_instruction(ins: Instruction) -> str:
    head = ins.kind.value
    if ins.probability is not None:
        head += f"({ins.probability!r})"
    return head + " " + " ".join(str(t) for t in ins.targets)


_INSTR_RE = re.compile(r"^([A-Z][A-Z0-9]*)(?:\(([^)]*)\))?((?:\s+\S+)*)\s*$")
_REC_RE = re.compile(r"^rec\[(-\d+)\]$")


def parse(text: str) -> Circuit:
    """Parse `.fsc` text back into a Circuit.  Raises CircuitError on bad input."""
    layers: list[list[Instruction]] = [[]]
    detectors: list[Detector] = []
    observables: list[Observable] = []
    coords: dict[int, tuple[int, int]] = {}
    m_count = 0
    max_qubit = -1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "TICK":
            layers.append([])
            continue
        m = _INSTR_RE.match(line)
        if m is None:
            raise CircuitError(f"line {lineno}: unparseable line {raw!r}")
        name, arg, rest = m.group(1), m.group(2), m.group(3).split()
        if name == "QUBIT":
            r, c = _parse_coord_pair(arg, lineno)
            if len(rest) != 1:
                raise CircuitError(f"line {lineno}: QUBIT takes exactly one qubit id")
            coords[int(rest[0])] = (r, c)
            max_qubit = max(max_qubit, int(rest[0]))
            continue
        if name == "DETECTOR":
            x, y, t, b = _parse_detector_coords(arg, lineno)
            records = _parse_recs(rest, m_count, lineno)
            detectors.append(Detector(records, (x, y, t, b), layer=len(layers) - 1))
            continue
        if name == "OBSERVABLE":
            if arg is None:
                raise CircuitError(f"line {lineno}: OBSERVABLE needs an id")
            records = _parse_recs(rest, m_count, lineno)
            observables.append(Observable(int(arg), records))
            continue
        try:
            kind = Kind(name)
        except ValueError:
            raise CircuitError(f"line {lineno}: unknown keyword {name!r}") from None
        prob = None
        if arg is not None:
            try:
                prob = float(arg)
            except ValueError:
                raise CircuitError(f"line {lineno}: bad probability {arg!r}") from None
        targets = tuple(int(tok) for tok in rest)
        try:
            ins = Instruction(kind, targets, prob)
        except ValueError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
        layers[-1].append(ins)
        m_count += ins.num_records
        max_qubit = max(max_qubit, max(targets))

    num_qubits = max(max_qubit + 1, (max(coords) + 1) if coords else 0)
    return Circuit(
        num_qubits=num_qubits,
        layers=layers,
        detectors=detectors,
        observables=observables,
        coords=coords,
    )


def _parse_recs(tokens: list[str], m_count: int, lineno: int) -> tuple[int, ...]:
    records = []
    for tok in tokens:
        m = _REC_RE.match(tok)
        if m is None:
            raise CircuitError(f"line {lineno}: malformed record reference {tok!r}")
        offset = int(m.group(1))
        absolute = m_count + offset
        if absolute < 0:
            raise CircuitError(f"line {lineno}: rec[{offset}] dangles ({m_count} records so far)")
        records.append(absolute)
    if not records:
        raise CircuitError(f"line {lineno}: empty record set")
    return tuple(records)


def _parse_coord_pair(arg: str | None, lineno: int) -> tuple[int, int]:
    if arg is None:
        raise CircuitError(f"line {lineno}: QUBIT needs (row,col)")
    parts = arg.split(",")
    if len(parts) != 2:
        raise CircuitError(f"line {lineno}: QUBIT needs (row,col), got {arg!r}")
    return int(parts[0]), int(parts[1])


def _parse_detector_coords(arg: str | None, lineno: int) -> tuple[float, float, float, str]:
    if arg is None:
        raise CircuitError(f"line {lineno}: DETECTOR needs (x,y,t,basis)")
    parts = [p.strip() for p in arg.split(",")]
    if len(parts) != 4 or parts[3] not in ("X", "Z"):
        raise CircuitError(f"line {lineno}: DETECTOR coords need (x,y,t,basis X|Z), got {arg!r}")
    return float(parts[0]), float(parts[1]), float(parts[2]), parts[3]
