"""Exact stabilizer-tableau reference simulator.

Brute-force oracle for the fast Pauli-frame sampler: tracks the full
stabilizer group (with destabilizers, Aaronson-Gottesman style) in
bit-packed form and evaluates every measurement exactly, including true
measurement randomness.  Supports injecting a single Pauli fault or record
flip to compute exact fault symptoms.

Pauli encoding: a row is i^phase * X^x * Z^z (XZ-ordered), phase mod 4.
In that convention products compose bilinearly:
    (i^a X^u Z^v)(i^b X^s Z^t) = i^(a+b) (-1)^(v.s) X^(u+s) Z^(v+t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fractalshor.circuit import Circuit, Kind


@dataclass(frozen=True)
class Fault:
    """A single fault: Pauli outcome or record flip after instruction `site`.

    site: flat instruction index (layer-major order).  outcome: "FLIP" for a
    measurement-result flip, otherwise one Pauli letter per target group
    element, e.g. "X", "Z", "Y", "XZ", "IY".
    """

    site: int
    outcome: str


def _popcount_rows(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=-1).astype(np.int64)


class TableauSimulator:
    """n-qubit stabilizer state initialized to |0...0>."""

    def __init__(self, num_qubits: int, rng: np.random.Generator | None = None):
        self.n = num_qubits
        self.w = max(1, (num_qubits + 63) // 64)
        self.x = np.zeros((2 * self.n, self.w), dtype=np.uint64)
        self.z = np.zeros((2 * self.n, self.w), dtype=np.uint64)
        self.phase = np.zeros(2 * self.n, dtype=np.uint8)
        for q in range(self.n):
            self.x[q, q >> 6] = np.uint64(1) << np.uint64(q & 63)           # destabilizer X_q
            self.z[self.n + q, q >> 6] = np.uint64(1) << np.uint64(q & 63)  # stabilizer Z_q
        self.rng = rng

    def _pack(self, qubits: tuple[int, ...], letters: str) -> tuple[np.ndarray, np.ndarray]:
        xv = np.zeros(self.w, dtype=np.uint64)
        zv = np.zeros(self.w, dtype=np.uint64)
        for q, letter in zip(qubits, letters):
            bit = np.uint64(1) << np.uint64(q & 63)
            if letter in "XY":
                xv[q >> 6] |= bit
            if letter in "ZY":
                zv[q >> 6] |= bit
        return xv, zv

    def apply_pauli(self, qubits: tuple[int, ...], letters: str) -> None:
        """Conjugate the state by a Pauli: flips signs of anticommuting rows."""
        xv, zv = self._pack(qubits, letters)
        anti = (_popcount_rows(self.x & zv) + _popcount_rows(self.z & xv)) & 1
        self.phase = (self.phase + 2 * anti.astype(np.uint8)) & 3

    def measure(self, qubits: tuple[int, ...], basis: str) -> int:
        """Measure X/Z on one qubit or XX/ZZ on a pair; returns the outcome bit.

        Random outcomes draw from self.rng, or collapse to 0 when rng is None
        (the forced-plus reference branch).
        """
        xv, zv = self._pack(qubits, basis[0] * len(qubits))
        anti = ((_popcount_rows(self.x & zv) + _popcount_rows(self.z & xv)) & 1).astype(bool)
        stab_anti = np.flatnonzero(anti[self.n :])
        if stab_anti.size:
            p = self.n + int(stab_anti[0])
            outcome = int(self.rng.integers(2)) if self.rng is not None else 0
            rows = np.flatnonzero(anti)
            rows = rows[rows != p]
            if rows.size:
                cross = _popcount_rows(self.z[p][None, :] & self.x[rows]) & 1
                self.phase[rows] = (self.phase[rows] + self.phase[p] + 2 * cross.astype(np.uint8)) & 3
                self.x[rows] ^= self.x[p]
                self.z[rows] ^= self.z[p]
            d = p - self.n
            self.x[d], self.z[d], self.phase[d] = self.x[p].copy(), self.z[p].copy(), self.phase[p]
            self.x[p], self.z[p] = xv, zv
            self.phase[p] = 2 * outcome
            return outcome
        # Deterministic: P is (up to sign) a product of stabilizer rows selected
        # by the anticommuting destabilizers.
        sel = self.n + np.flatnonzero(anti[: self.n])
        xs, zs = self.x[sel], self.z[sel]
        x_acc = np.bitwise_xor.reduce(xs, axis=0)
        z_acc = np.bitwise_xor.reduce(zs, axis=0)
        z_run = np.bitwise_xor.accumulate(zs, axis=0)
        cross = int(_popcount_rows(z_run[:-1] & xs[1:]).sum()) & 1 if len(sel) > 1 else 0
        phi = (int(self.phase[sel].sum()) + 2 * cross) & 3
        if not (np.array_equal(x_acc, xv) and np.array_equal(z_acc, zv)):
            raise AssertionError("deterministic measurement did not reduce to the measured Pauli")
        if phi & 1:
            raise AssertionError("imaginary phase on a stabilizer product")
        return phi >> 1

    def reset(self, q: int, basis: str) -> int:
        """Project qubit q onto the +1 eigenstate of X (basis 'X') or Z ('Z').

        Returns the pre-correction measurement bit (discarded by circuits,
        visible for oracle cross-checks).
        """
        out = self.measure((q,), basis)
        if out:
            self.apply_pauli((q,), "Z" if basis == "X" else "X")
        return out


def sample_tableau(
    circuit: Circuit, shots: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Slow exact sampling of a noisy circuit: per shot, draw every noise
    outcome and run the full tableau.  Statistical cross-check for the fast
    frame sampler; returns (detector bits, observable bits) as (shots, n)."""
    det = np.zeros((shots, circuit.num_detectors), dtype=np.uint8)
    obs = np.zeros((shots, circuit.num_observables), dtype=np.uint8)
    for s in range(shots):
        sim = TableauSimulator(circuit.num_qubits, rng=rng)
        records: list[int] = []
        for layer in circuit.layers:
            for ins in layer:
                kind = ins.kind
                if kind in (Kind.RX, Kind.RZ):
                    for (q,) in ins.groups():
                        sim.reset(q, "X" if kind is Kind.RX else "Z")
                elif kind in (Kind.MX, Kind.MZ):
                    for (q,) in ins.groups():
                        bit = sim.measure((q,), "X" if kind is Kind.MX else "Z")
                        if ins.probability and rng.random() < ins.probability:
                            bit ^= 1
                        records.append(bit)
                elif kind in (Kind.MXX, Kind.MZZ):
                    for pair in ins.groups():
                        bit = sim.measure(pair, "X" if kind is Kind.MXX else "Z")
                        if ins.probability and rng.random() < ins.probability:
                            bit ^= 1
                        records.append(bit)
                elif kind is Kind.XERR or kind is Kind.ZERR:
                    letter = "X" if kind is Kind.XERR else "Z"
                    for (q,) in ins.groups():
                        if rng.random() < ins.probability:
                            sim.apply_pauli((q,), letter)
                elif kind is Kind.DEP1:
                    for (q,) in ins.groups():
                        if rng.random() < ins.probability:
                            sim.apply_pauli((q,), "XZY"[rng.integers(3)])
                elif kind is Kind.DEP2:
                    for pair in ins.groups():
                        if rng.random() < ins.probability:
                            o = int(rng.integers(1, 16))
                            # bits (x, z) per qubit; (x << 1) | z indexes I, Z, X, Y
                            letters = "".join("IZXY"[(o >> k) & 3] for k in (2, 0))
                            sim.apply_pauli(pair, letters)
        rec = np.array(records, dtype=np.uint8)
        for i, d in enumerate(circuit.detectors):
            det[s, i] = np.bitwise_xor.reduce(rec[list(d.records)])
        for i, o in enumerate(circuit.observables):
            obs[s, i] = np.bitwise_xor.reduce(rec[list(o.records)])
    return det, obs


def run_tableau(
    circuit: Circuit,
    rng: np.random.Generator | None = None,
    fault: Fault | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Execute a circuit on the exact simulator.

    Noise instructions are skipped (they define fault sites, not fixed
    operations); `fault`, if given, injects one concrete outcome at its site.
    Returns (records, detector_bits, observable_bits) as uint8 arrays.
    """
    sim = TableauSimulator(circuit.num_qubits, rng=rng)
    records: list[int] = []
    site = 0
    for layer in circuit.layers:
        for ins in layer:
            flip_here = fault is not None and fault.site == site
            if ins.kind in (Kind.RX, Kind.RZ):
                for (q,) in ins.groups():
                    sim.reset(q, "X" if ins.kind is Kind.RX else "Z")
            elif ins.kind in (Kind.MX, Kind.MZ):
                for (q,) in ins.groups():
                    records.append(sim.measure((q,), "X" if ins.kind is Kind.MX else "Z"))
            elif ins.kind in (Kind.MXX, Kind.MZZ):
                for pair in ins.groups():
                    records.append(sim.measure(pair, "X" if ins.kind is Kind.MXX else "Z"))
            if flip_here:
                if fault.outcome.startswith("FLIP"):
                    group = int(fault.outcome[4:]) if len(fault.outcome) > 4 else 0
                    if not 0 <= group < ins.num_records:
                        raise ValueError(f"flip group {group} out of range for {ins}")
                    records[group - ins.num_records] ^= 1
                else:
                    letters = fault.outcome
                    if len(letters) != len(ins.targets):
                        raise ValueError(
                            f"fault outcome {letters!r} does not span targets {ins.targets}"
                        )
                    sim.apply_pauli(ins.targets, letters)
            site += 1
    if fault is not None and fault.site >= site:
        raise ValueError(f"fault site {fault.site} out of range ({site} instructions)")
    rec = np.array(records, dtype=np.uint8)
    det = np.array(
        [np.bitwise_xor.reduce(rec[list(d.records)]) for d in circuit.detectors], dtype=np.uint8
    )
    obs = np.array(
        [np.bitwise_xor.reduce(rec[list(o.records)]) for o in circuit.observables], dtype=np.uint8
    )
    return rec, det, obs
