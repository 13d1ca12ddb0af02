"""Uniform circuit noise: every gate picks up its noisy counterpart.

Idle -> DEP1(p); RX -> RX then ZERR(p); RZ -> RZ then XERR(p);
MX/MZ -> result flipped with probability p, then DEP1(p);
MXX/MZZ -> result flipped with probability p, then DEP2(p) on the pair.
DEP1 draws X, Y, Z at p/3 each; DEP2 draws each of the 15 non-identity
two-qubit Paulis at p/15.  Depolarizing noise lands after the gate, so a
fault on a pair measurement can only disturb later measurements, never its
own record.
"""

from __future__ import annotations

from dataclasses import dataclass

from fractalshor.circuit import Circuit, Instruction, Kind


@dataclass(frozen=True)
class NoiseModel:
    """Uniform noise of strength p applied to every gate in the circuit."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"noise strength must be in [0, 0.5], got {self.p}")


def apply_noise(circuit: Circuit, model: NoiseModel) -> Circuit:
    """Return a new circuit with the uniform noise model applied.

    Rejects circuits that already contain noise instructions or
    measurement-flip annotations (no double application).
    """
    if circuit.has_noise:
        raise ValueError("circuit already contains noise; refusing to apply twice")
    p = model.p
    layers: list[list[Instruction]] = []
    for layer in circuit.layers:
        noisy: list[Instruction] = []
        for ins in layer:
            if ins.kind is Kind.IDLE:
                noisy.append(ins)
                noisy.append(Instruction(Kind.DEP1, ins.targets, p))
            elif ins.kind is Kind.RX:
                noisy.append(ins)
                noisy.append(Instruction(Kind.ZERR, ins.targets, p))
            elif ins.kind is Kind.RZ:
                noisy.append(ins)
                noisy.append(Instruction(Kind.XERR, ins.targets, p))
            elif ins.kind in (Kind.MX, Kind.MZ):
                noisy.append(Instruction(ins.kind, ins.targets, p))
                noisy.append(Instruction(Kind.DEP1, ins.targets, p))
            elif ins.kind in (Kind.MXX, Kind.MZZ):
                noisy.append(Instruction(ins.kind, ins.targets, p))
                noisy.append(Instruction(Kind.DEP2, ins.targets, p))
            else:  # pragma: no cover - has_noise guard rejects these
                raise ValueError(f"unexpected instruction {ins}")
        layers.append(noisy)
    # Noise adds no measurement records, so detector/observable record
    # indices and declaration anchors carry over unchanged.
    return Circuit(
        num_qubits=circuit.num_qubits,
        layers=layers,
        detectors=list(circuit.detectors),
        observables=list(circuit.observables),
        coords=dict(circuit.coords),
    )
