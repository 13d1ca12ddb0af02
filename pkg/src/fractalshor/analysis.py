"""Fault-tolerance verification tools.

enumerate_single_faults: exhaustively inject every possible single fault,
decode its symptom, and classify the outcome.  Faults in the final round
(the last four measurement layers plus the terminal transversal
measurement) whose decode disagrees with the truth are "dangling": their
resolution belongs to the next logical block, which sees detectors
comparing across the interface.  A mid-circuit mismatch is a "logical"
fault, the thing a fault-tolerant block must not have.

fault_distance: the smallest number of mechanisms whose symptoms cancel
while their observable masks do not, found by breadth-first search over
(node, mask) states per graph component.

detector_slice: the qubit support of every detector in flight at a layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from fractalshor.circuit import MEASUREMENT_KINDS, Circuit
from fractalshor.frame_sim import (
    enumerate_fault_sites,
    extract_dem,
    _batch_symptoms,
)
from fractalshor.matcher import DecodingGraph, build_graph


@dataclass(frozen=True)
class FaultRecord:
    site: int
    outcome: str
    detectors: tuple[int, ...]
    observables: tuple[int, ...]
    classification: str


@dataclass
class FaultReport:
    records: list[FaultRecord]

    @property
    def counts(self) -> dict[str, int]:
        out = {"silent": 0, "corrected": 0, "dangling": 0, "logical": 0}
        for r in self.records:
            out[r.classification] += 1
        return out

    def summary(self) -> str:
        c = self.counts
        lines = [f"{k}: {c[k]}" for k in ("silent", "corrected", "dangling", "logical")]
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        lines = []
        for r in self.records:
            lines.append(
                json.dumps(
                    {
                        "site": r.site,
                        "outcome": r.outcome,
                        "detectors": list(r.detectors),
                        "observables": list(r.observables),
                        "class": r.classification,
                    }
                )
            )
        return "\n".join(lines) + "\n"


def last_round_sites(circuit: Circuit) -> set[int]:
    """Instruction sites in the final round: the last 4 measurement layers
    plus the terminal transversal measurement layer."""
    num_layers = len(circuit.layers)
    cutoff = max(1, num_layers - 5)
    sites = set()
    site = 0
    for layer_idx, layer in enumerate(circuit.layers):
        for _ in layer:
            if layer_idx >= cutoff:
                sites.add(site)
            site += 1
    return sites


def enumerate_single_faults(circuit: Circuit, graph: DecodingGraph | None = None) -> FaultReport:
    """Classify every (instruction, outcome) fault of the noisy circuit."""
    if not circuit.has_noise:
        return FaultReport([])
    if graph is None:
        graph = build_graph(extract_dem(circuit), circuit.num_detectors, circuit.num_observables)
    faults = enumerate_fault_sites(circuit)
    symptoms = _batch_symptoms(circuit, [f for f, _ in faults])
    late = last_round_sites(circuit)
    cache: dict[tuple[int, ...], int] = {}
    records = []
    for (fault, _p), (dets, obss) in zip(faults, symptoms):
        truth = 0
        for o in obss:
            truth |= 1 << o
        if not dets and not truth:
            cls = "silent"
        else:
            key = tuple(dets)
            if key not in cache:
                cache[key] = graph.decode_events(dets)[0]
            cls = "corrected" if cache[key] == truth else (
                "dangling" if fault.site in late else "logical"
            )
        records.append(FaultRecord(fault.site, fault.outcome, tuple(dets), tuple(obss), cls))
    return FaultReport(records)


def fault_distance(graph: DecodingGraph) -> int:
    """Minimum number of edges forming an undetectable observable flip.

    Searches shortest closed walks (through the boundary or around cycles)
    with a nonzero accumulated observable mask, per component.
    """
    if graph.num_observables == 0:
        raise ValueError("graph has no observables")
    graph._ensure_prepared()
    best = None
    # A boundary-to-boundary edge with a mask is an undetectable single fault.
    if any(e.a < 0 and e.b < 0 and e.mask for e in graph.edges):
        return 1
    for comp in graph._components:
        n = len(comp.detectors) + 1
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        any_mask = False
        for e in graph.edges:
            det_ref = e.a if e.a >= 0 else e.b
            if det_ref not in comp.local_index:
                continue
            ia = comp.local_index[e.a] + 1 if e.a >= 0 else 0
            ib = comp.local_index[e.b] + 1 if e.b >= 0 else 0
            adjacency[ia].append((ib, e.mask))
            adjacency[ib].append((ia, e.mask))
            any_mask = any_mask or e.mask != 0
        if not any_mask:
            continue
        n_masks = 1 << graph.num_observables
        for start in range(n):
            dist = {(start, 0): 0}
            frontier = [(start, 0)]
            while frontier:
                nxt = []
                for node, mask in frontier:
                    d = dist[(node, mask)]
                    if best is not None and d >= best:
                        continue
                    for other, emask in adjacency[node]:
                        state = (other, mask ^ emask)
                        if state not in dist:
                            dist[state] = d + 1
                            nxt.append(state)
                frontier = nxt
            for mask in range(1, n_masks):
                if (start, mask) in dist:
                    cand = dist[(start, mask)]
                    if best is None or cand < best:
                        best = cand
    if best is None:
        raise ValueError("no undetectable observable flip exists in this graph")
    return best


def detector_slice(circuit: Circuit, t: int) -> list[tuple[int, str, tuple[tuple[int, int], ...]]]:
    """Detectors in flight at measurement-layer t with their qubit supports.

    t ranges over [0, last]; a detector comparing epochs (t_prev, t_cur]
    spans t when t_prev < t <= t_cur (virtual epochs at -1 and the final
    transversal layer included).  Supports are the union of the referenced
    records' target qubits, mapped through the circuit's coordinates.
    """
    rec_time: list[int] = []
    rec_targets: list[tuple[int, ...]] = []
    for layer_idx, layer in enumerate(circuit.layers):
        for ins in layer:
            for group in ins.groups():
                if ins.kind in MEASUREMENT_KINDS:
                    rec_time.append(layer_idx - 1)
                    rec_targets.append(group)
    last_time = len(circuit.layers) - 2
    if not 0 <= t <= last_time:
        raise ValueError(f"layer {t} outside [0, {last_time}]")
    out = []
    for idx, det in enumerate(circuit.detectors):
        times = [rec_time[r] for r in det.records]
        t_cur = max(times)
        t_prev = min(times) if min(times) < t_cur else -1
        if not t_prev < t <= t_cur:
            continue
        qubits = sorted({q for r in det.records for q in rec_targets[r]})
        coords = tuple(circuit.coords.get(q, (q, -1)) for q in qubits)
        out.append((idx, det.coords[3], coords))
    return out


def slice_to_json(circuit: Circuit, t: int) -> str:
    rows, cols = 0, 0
    for r, c in circuit.coords.values():
        rows, cols = max(rows, r + 1), max(cols, c + 1)
    slices = [
        {"detector": idx, "basis": basis, "qubits": [list(q) for q in qubits]}
        for idx, basis, qubits in detector_slice(circuit, t)
    ]
    return json.dumps({"t": t, "rows": rows, "cols": cols, "slices": slices}, indent=None) + "\n"
