"""High-throughput Pauli-frame sampling and detector-error-model extraction.

The gate set is purely dissipative, so frame propagation is simple: frames
pass through measurements unchanged (flipping the record when the frame
anticommutes with the measured operator), resets clear the frame on the
reset qubit, and noise channels multiply Paulis into the frame.  The
reference run with every measurement reading +1 is a valid trajectory
(there are no unitaries to introduce signs), so detector and observable
bits are exactly the frame-induced flips.

Shots are bit-packed 64 per word; each batch draws its noise from a seed
derived via SeedSequence.spawn, making results bit-identical for a given
(seed, batch size) regardless of batch execution order or thread count.
"""

from __future__ import annotations

import concurrent.futures
import struct
from dataclasses import dataclass

import numpy as np

from fractalshor.circuit import MEASUREMENT_KINDS, Circuit, Kind
from fractalshor.tableau import Fault

_ONE = np.uint64(1)


class NonGraphlike(ValueError):
    """A decomposed fault component touches three or more detectors."""


@dataclass(frozen=True)
class FaultMechanism:
    """An error class: the detectors and observables it flips, per basis.

    sources records every (instruction site, outcome) merged into this
    mechanism; probability is the XOR-combined chance that an odd number of
    them fire.
    """

    detectors: tuple[int, ...]
    observables: tuple[int, ...]
    probability: float
    basis: str
    sources: tuple[tuple[int, str], ...]


@dataclass
class SyndromeBatch:
    """Bit-packed detection events and observable flips, shot-minor layout.

    detector_bits / observable_bits have shape (num_detectors, words) and
    (num_observables, words); bit s of row d (little-endian within each
    64-bit word) is shot s's detection event for detector d.
    """

    shots: int
    detector_bits: np.ndarray
    observable_bits: np.ndarray

    @property
    def num_detectors(self) -> int:
        return self.detector_bits.shape[0]

    @property
    def num_observables(self) -> int:
        return self.observable_bits.shape[0]

    def unpack(self, start: int = 0, stop: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Boolean (shots, detectors) and (shots, observables) slices."""
        stop = self.shots if stop is None else min(stop, self.shots)
        det = _unpack_columns(self.detector_bits, start, stop)
        obs = _unpack_columns(self.observable_bits, start, stop)
        return det, obs

    def to_debug_text(self, max_shots: int | None = None) -> str:
        limit = self.shots if max_shots is None else min(max_shots, self.shots)
        lines = []
        det, obs = self.unpack(0, limit)
        for s in range(limit):
            names = [f"D{d}" for d in np.flatnonzero(det[s])]
            names += [f"L{o}" for o in np.flatnonzero(obs[s])]
            lines.append(f"shot {s}: " + " ".join(names))
        return "\n".join(lines) + "\n"

    def to_bytes(self) -> bytes:
        """FSB1 binary: magic, u32 shots/detectors/observables, then the two
        shot-major row-padded bitmaps (little-endian bit order)."""
        header = b"FSB1" + struct.pack("<III", self.shots, self.num_detectors, self.num_observables)
        parts = [header]
        for packed, width in (
            (self.detector_bits, self.num_detectors),
            (self.observable_bits, self.num_observables),
        ):
            rows = _unpack_columns(packed, 0, self.shots)
            parts.append(np.packbits(rows, axis=1, bitorder="little").tobytes())
        return b"".join(parts)

    @staticmethod
    def from_bytes(data: bytes) -> "SyndromeBatch":
        if data[:4] != b"FSB1":
            raise ValueError("not an FSB1 stream")
        shots, n_det, n_obs = struct.unpack("<III", data[4:16])
        off = 16
        out = []
        for width in (n_det, n_obs):
            row_bytes = (width + 7) // 8
            raw = np.frombuffer(data[off : off + shots * row_bytes], dtype=np.uint8)
            off += shots * row_bytes
            rows = np.unpackbits(raw.reshape(shots, row_bytes), axis=1, bitorder="little")[:, :width]
            out.append(_pack_columns(rows.astype(bool)))
        return SyndromeBatch(shots=shots, detector_bits=out[0], observable_bits=out[1])


def _unpack_columns(packed: np.ndarray, start: int, stop: int) -> np.ndarray:
    """(rows, words) packed -> (stop-start, rows) boolean."""
    w0, w1 = start >> 6, (stop + 63) >> 6
    window = np.ascontiguousarray(packed[:, w0:w1])
    bits = np.unpackbits(window.view(np.uint8), axis=1, bitorder="little")
    sl = bits[:, start - (w0 << 6) : stop - (w0 << 6)]
    return sl.T.astype(bool)


def _pack_columns(rows: np.ndarray) -> np.ndarray:
    """(shots, rows) boolean -> (rows, words) packed uint64."""
    shots = rows.shape[0]
    words = max(1, (shots + 63) // 64)
    by_row = np.packbits(rows.T, axis=1, bitorder="little")
    padded = np.zeros((rows.shape[1], words * 8), dtype=np.uint8)
    padded[:, : by_row.shape[1]] = by_row
    return padded.view(np.uint64)


def _record_maps(circuit: Circuit) -> tuple[list[list[int]], list[list[int]]]:
    n = circuit.num_records
    rec_dets: list[list[int]] = [[] for _ in range(n)]
    rec_obs: list[list[int]] = [[] for _ in range(n)]
    for i, det in enumerate(circuit.detectors):
        for r in det.records:
            rec_dets[r].append(i)
    for i, obs in enumerate(circuit.observables):
        for r in obs.records:
            rec_obs[r].append(i)
    return rec_dets, rec_obs


# --------------------------------------------------------------------- sampling


def sample(
    circuit: Circuit,
    shots: int,
    seed: int | np.random.SeedSequence,
    batch_size: int = 65536,
    threads: int = 1,
) -> SyndromeBatch:
    """Monte-Carlo sample detector and observable flips.

    Deterministic for fixed (seed, shots, batch_size); batches may run
    concurrently without changing the bits.  batch_size must be a multiple
    of 64 so packed batches concatenate on word boundaries.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if batch_size % 64 != 0:
        raise ValueError("batch_size must be a multiple of 64")
    circuit.validate()
    rec_dets, rec_obs = _record_maps(circuit)
    sizes = [min(batch_size, shots - s) for s in range(0, shots, batch_size)]
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    children = seed.spawn(len(sizes))

    def run(i: int) -> tuple[np.ndarray, np.ndarray]:
        return _sample_batch(circuit, sizes[i], np.random.default_rng(children[i]), rec_dets, rec_obs)

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(i) for i in range(len(sizes))]
    det = np.concatenate([r[0] for r in results], axis=1)
    obs = np.concatenate([r[1] for r in results], axis=1)
    return SyndromeBatch(shots=shots, detector_bits=det, observable_bits=obs)


def _sample_batch(circuit, shots, rng, rec_dets, rec_obs):
    words = (shots + 63) // 64
    nq = circuit.num_qubits
    fx = np.zeros((nq, words), dtype=np.uint64)
    fz = np.zeros((nq, words), dtype=np.uint64)
    det = np.zeros((circuit.num_detectors, words), dtype=np.uint64)
    obs = np.zeros((circuit.num_observables, words), dtype=np.uint64)
    rec = 0
    scratch = np.zeros(words * 64, dtype=bool)

    def draw(p):
        k = rng.binomial(shots, p)
        if k == 0:
            return None
        return rng.choice(shots, size=k, replace=False)

    def packed(positions):
        if positions is None or len(positions) == 0:
            return np.zeros(words, dtype=np.uint64)
        scratch[positions] = True
        arr = np.packbits(scratch, bitorder="little").view(np.uint64)
        scratch[positions] = False
        return arr

    for layer in circuit.layers:
        for ins in layer:
            kind = ins.kind
            if kind in (Kind.RX, Kind.RZ):
                for q in ins.targets:
                    fx[q] = 0
                    fz[q] = 0
            elif kind is Kind.IDLE:
                pass
            elif kind in MEASUREMENT_KINDS:
                plane = fz if kind in (Kind.MX, Kind.MXX) else fx
                for group in ins.groups():
                    flip = plane[group[0]].copy()
                    for q in group[1:]:
                        flip ^= plane[q]
                    if ins.probability:
                        flip ^= packed(draw(ins.probability))
                    for d in rec_dets[rec]:
                        det[d] ^= flip
                    for o in rec_obs[rec]:
                        obs[o] ^= flip
                    rec += 1
            elif kind is Kind.XERR:
                for q in ins.targets:
                    fx[q] ^= packed(draw(ins.probability))
            elif kind is Kind.ZERR:
                for q in ins.targets:
                    fz[q] ^= packed(draw(ins.probability))
            elif kind is Kind.DEP1:
                for q in ins.targets:
                    pos = draw(ins.probability)
                    if pos is None:
                        continue
                    o = rng.integers(1, 4, size=len(pos))
                    fx[q] ^= packed(pos[o >= 2])
                    fz[q] ^= packed(pos[(o & 1) == 1])
            elif kind is Kind.DEP2:
                for a, b in ins.groups():
                    pos = draw(ins.probability)
                    if pos is None:
                        continue
                    o = rng.integers(1, 16, size=len(pos))
                    fx[a] ^= packed(pos[(o >> 3) & 1 == 1])
                    fz[a] ^= packed(pos[(o >> 2) & 1 == 1])
                    fx[b] ^= packed(pos[(o >> 1) & 1 == 1])
                    fz[b] ^= packed(pos[(o & 1) == 1])
            else:  # pragma: no cover
                raise ValueError(f"unhandled kind {kind}")
    return det, obs


# ------------------------------------------------------------- fault propagation


def propagate_fault(circuit: Circuit, fault: Fault) -> tuple[frozenset[int], frozenset[int]]:
    """Exact symptom of one fault in the otherwise noiseless circuit.

    Scalar reference implementation; the vectorized enumeration in
    extract_dem must agree with it (tested), and both must agree with the
    tableau oracle.
    """
    rec_dets, rec_obs = _record_maps(circuit)
    sx: set[int] = set()
    sz: set[int] = set()
    dets: set[int] = set()
    obs: set[int] = set()
    rec = 0
    site = 0
    found = False
    for layer in circuit.layers:
        for ins in layer:
            is_fault_site = site == fault.site
            if is_fault_site:
                found = True
            kind = ins.kind
            if kind in (Kind.RX, Kind.RZ):
                for q in ins.targets:
                    sx.discard(q)
                    sz.discard(q)
            elif kind in MEASUREMENT_KINDS:
                plane = sz if kind in (Kind.MX, Kind.MXX) else sx
                for g, group in enumerate(ins.groups()):
                    flip = sum(q in plane for q in group) & 1
                    if is_fault_site and fault.outcome.startswith("FLIP") and g == _flip_group(fault.outcome):
                        flip ^= 1
                    if flip:
                        dets.symmetric_difference_update(rec_dets[rec])
                        obs.symmetric_difference_update(rec_obs[rec])
                    rec += 1
            if is_fault_site and not fault.outcome.startswith("FLIP"):
                if len(fault.outcome) != len(ins.targets):
                    raise ValueError(f"outcome {fault.outcome!r} does not span {ins.targets}")
                for q, letter in zip(ins.targets, fault.outcome):
                    if letter in "XY":
                        sx.symmetric_difference_update({q})
                    if letter in "ZY":
                        sz.symmetric_difference_update({q})
            site += 1
    if not found:
        raise ValueError(f"fault site {fault.site} out of range ({site} instructions)")
    return frozenset(dets), frozenset(obs)


def enumerate_fault_sites(circuit: Circuit) -> list[tuple[Fault, float]]:
    """Every (instruction, outcome) fault the noise model can produce."""
    out: list[tuple[Fault, float]] = []
    site = 0
    for layer in circuit.layers:
        for ins in layer:
            p = ins.probability
            if p:
                if ins.kind in MEASUREMENT_KINDS:
                    for g in range(ins.num_records):
                        out.append((Fault(site, "FLIP" if g == 0 else f"FLIP{g}"), p))
                elif ins.kind is Kind.XERR:
                    for i in range(len(ins.targets)):
                        out.append((Fault(site, _lift("X", i, len(ins.targets))), p))
                elif ins.kind is Kind.ZERR:
                    for i in range(len(ins.targets)):
                        out.append((Fault(site, _lift("Z", i, len(ins.targets))), p))
                elif ins.kind is Kind.DEP1:
                    for i in range(len(ins.targets)):
                        for letter in "XYZ":
                            out.append((Fault(site, _lift(letter, i, len(ins.targets))), p / 3))
                elif ins.kind is Kind.DEP2:
                    for g in range(len(ins.targets) // 2):
                        for pa in "IXYZ":
                            for pb in "IXYZ":
                                if pa == pb == "I":
                                    continue
                                padded = "I" * (2 * g) + pa + pb + "I" * (len(ins.targets) - 2 * g - 2)
                                out.append((Fault(site, padded), p / 15))
            site += 1
    return out


def _lift(letter: str, i: int, n: int) -> str:
    return "I" * i + letter + "I" * (n - i - 1)


def _flip_group(outcome: str) -> int:
    """Record-flip outcomes: "FLIP" targets group 0, "FLIPk" targets group k."""
    return int(outcome[4:]) if len(outcome) > 4 else 0


# ------------------------------------------------------------------ DEM extraction


def observable_bases(circuit: Circuit) -> list[str]:
    """Basis of each observable, inferred from measurement kinds of its records."""
    kinds: dict[int, Kind] = {}
    rec = 0
    for layer in circuit.layers:
        for ins in layer:
            for _ in range(ins.num_records):
                kinds[rec] = ins.kind
                rec += 1
    out = []
    for obs in circuit.observables:
        bases = {"X" if kinds[r] in (Kind.MX, Kind.MXX) else "Z" for r in obs.records}
        if len(bases) != 1:
            raise ValueError(f"observable {obs.id} mixes measurement bases")
        out.append(bases.pop())
    return out


def extract_dem(circuit: Circuit) -> list[FaultMechanism]:
    """Enumerate all fault mechanisms, decomposed per basis and deduplicated.

    Each fault's symptom is split into its X-basis and Z-basis detector
    subsets (observables go with their own basis); a component touching
    three or more detectors raises NonGraphlike.  Identical (detectors,
    observables) components merge with XOR probability combination.
    Symptomless components are dropped.
    """
    circuit.validate()
    if not circuit.has_noise:
        raise ValueError("extract_dem needs a noisy circuit")
    faults = enumerate_fault_sites(circuit)
    symptoms = _batch_symptoms(circuit, [f for f, _ in faults])
    det_basis = np.array([1 if d.coords[3] == "X" else 0 for d in circuit.detectors], dtype=np.uint8)
    obs_basis = np.array([1 if b == "X" else 0 for b in observable_bases(circuit)], dtype=np.uint8)

    merged: dict[tuple[tuple[int, ...], tuple[int, ...], str], tuple[float, list]] = {}
    for (fault, p), (dets, obss) in zip(faults, symptoms):
        for want, basis in ((1, "X"), (0, "Z")):
            dsub = tuple(d for d in dets if det_basis[d] == want)
            osub = tuple(o for o in obss if obs_basis[o] == want)
            if not dsub and not osub:
                continue
            if len(dsub) > 2:
                raise NonGraphlike(
                    f"fault {fault} flips {len(dsub)} {basis}-basis detectors: {dsub}"
                )
            key = (dsub, osub, basis)
            if key in merged:
                q, sources = merged[key]
                merged[key] = (q * (1 - p) + p * (1 - q), sources)
                sources.append((fault.site, fault.outcome))
            else:
                merged[key] = (p, [(fault.site, fault.outcome)])
    out = []
    for (dsub, osub, basis), (p, sources) in sorted(merged.items()):
        out.append(FaultMechanism(dsub, osub, p, basis, tuple(sources)))
    return out


def _batch_symptoms(circuit: Circuit, faults: list[Fault]) -> list[tuple[list[int], list[int]]]:
    """Vectorized propagate_fault: one packed bit column per fault."""
    rec_dets, rec_obs = _record_maps(circuit)
    m = len(faults)
    words = max(1, (m + 63) // 64)
    nq = circuit.num_qubits
    fx = np.zeros((nq, words), dtype=np.uint64)
    fz = np.zeros((nq, words), dtype=np.uint64)
    det = np.zeros((circuit.num_detectors, words), dtype=np.uint64)
    obs = np.zeros((circuit.num_observables, words), dtype=np.uint64)

    by_site: dict[int, list[tuple[int, Fault]]] = {}
    for col, f in enumerate(faults):
        by_site.setdefault(f.site, []).append((col, f))

    rec = 0
    site = 0
    for layer in circuit.layers:
        for ins in layer:
            here = by_site.get(site, ())
            kind = ins.kind
            if kind in (Kind.RX, Kind.RZ):
                for q in ins.targets:
                    fx[q] = 0
                    fz[q] = 0
            elif kind in MEASUREMENT_KINDS:
                plane = fz if kind in (Kind.MX, Kind.MXX) else fx
                for g, group in enumerate(ins.groups()):
                    flip = plane[group[0]].copy()
                    for q in group[1:]:
                        flip ^= plane[q]
                    for col, f in here:
                        if f.outcome.startswith("FLIP") and _flip_group(f.outcome) == g:
                            flip[col >> 6] ^= _ONE << np.uint64(col & 63)
                    for d in rec_dets[rec]:
                        det[d] ^= flip
                    for o in rec_obs[rec]:
                        obs[o] ^= flip
                    rec += 1
            for col, f in here:
                if f.outcome.startswith("FLIP"):
                    continue
                bit = _ONE << np.uint64(col & 63)
                for q, letter in zip(ins.targets, f.outcome):
                    if letter in "XY":
                        fx[q, col >> 6] ^= bit
                    if letter in "ZY":
                        fz[q, col >> 6] ^= bit
            site += 1

    col_dets: list[list[int]] = [[] for _ in range(m)]
    col_obs: list[list[int]] = [[] for _ in range(m)]
    for d in range(circuit.num_detectors):
        bits = np.unpackbits(det[d].view(np.uint8), bitorder="little", count=m)
        for col in np.flatnonzero(bits):
            col_dets[col].append(d)
    for o in range(circuit.num_observables):
        bits = np.unpackbits(obs[o].view(np.uint8), bitorder="little", count=m)
        for col in np.flatnonzero(bits):
            col_obs[col].append(o)
    return list(zip(col_dets, col_obs))
