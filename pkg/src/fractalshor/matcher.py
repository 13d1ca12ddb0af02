"""Decoding-graph construction and exact minimum-weight matching decoding.

The graph's nodes are detectors plus one virtual boundary per connected
component (components coincide with the detector basis split for circuits
built here, but decoding is component-generic).  Edge weights are
-ln(p/(1-p)).  Decoding pairs the fired detectors minimum-weight-perfectly
over shortest-path distances, allowing any event to pair with the boundary;
the prediction is the XOR of observable masks along the realized paths.

Exactness: per-shot matching runs the blossom core on int64 weights
quantized at 2^40 relative resolution; near-ties below that resolution may
break either way (both sides then agree in weight to ~1e-12 relative).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from fractalshor._blossom import INF, min_weight_perfect_matching
from fractalshor.frame_sim import FaultMechanism, SyndromeBatch

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_QUANT_BITS = 40


@dataclass(frozen=True)
class GraphEdge:
    """A decoding-graph edge; detector id -1 denotes the boundary."""

    a: int
    b: int
    weight: float
    probability: float
    mask: int


@dataclass
class DecodingGraph:
    num_detectors: int
    num_observables: int
    edges: list[GraphEdge] = field(default_factory=list)
    _components: list["_Component"] | None = field(default=None, repr=False)

    def component_of(self, detector: int) -> "_Component":
        self._ensure_prepared()
        return self._by_detector[detector]

    def _ensure_prepared(self) -> None:
        if self._components is not None:
            return
        parent = list(range(self.num_detectors))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            if e.a >= 0 and e.b >= 0:
                ra, rb = find(e.a), find(e.b)
                if ra != rb:
                    parent[rb] = ra
        groups: dict[int, list[int]] = {}
        for d in range(self.num_detectors):
            groups.setdefault(find(d), []).append(d)
        comps = []
        by_det: dict[int, _Component] = {}
        for dets in sorted(groups.values(), key=lambda g: g[0]):
            comp = _Component(sorted(dets), self)
            comps.append(comp)
            for d in dets:
                by_det[d] = comp
        self._components = comps
        self._by_detector = by_det

    # ------------------------------------------------------------------ decode

    def decode_batch(self, batch: SyndromeBatch, chunk: int = 4096) -> np.ndarray:
        """Predicted observable flips, shape (shots, num_observables), bool."""
        if batch.num_detectors != self.num_detectors:
            raise ValueError(
                f"batch has {batch.num_detectors} detectors, graph has {self.num_detectors}"
            )
        self._ensure_prepared()
        out = np.zeros((batch.shots, max(1, self.num_observables)), dtype=bool)
        useful = [c for c in self._components if c.carries_observables]
        for start in range(0, batch.shots, chunk):
            det, _ = batch.unpack(start, start + chunk)
            for comp in useful:
                sub = det[:, comp.detectors]
                for row in range(sub.shape[0]):
                    events = np.flatnonzero(sub[row])
                    if events.size == 0:
                        continue
                    mask, _w = comp.match_events(events)
                    if mask:
                        for o in range(self.num_observables):
                            if mask >> o & 1:
                                out[start + row, o] ^= True
        return out[:, : self.num_observables]

    def decode_events(self, fired: list[int] | np.ndarray) -> tuple[int, float]:
        """Decode one shot given global detector ids; returns (mask, weight)."""
        self._ensure_prepared()
        fired = sorted(int(f) for f in fired)
        mask = 0
        weight = 0.0
        by_comp: dict[int, list[int]] = {}
        for d in fired:
            by_comp.setdefault(id(self._by_detector[d]), []).append(d)
        for comp in self._components:
            local = by_comp.get(id(comp))
            if not local:
                continue
            ev = np.array([comp.local_index[d] for d in local], dtype=np.int64)
            m, w = comp.match_events(ev)
            mask ^= m
            weight += w
        return mask, weight

    # ------------------------------------------------------------------ text io

    def serialize(self) -> str:
        lines = [f"# dem detectors={self.num_detectors} observables={self.num_observables}"]
        for e in sorted(self.edges, key=lambda e: (e.a if e.a >= 0 else 1 << 30, e.b)):
            b = f"D{e.b}" if e.b >= 0 else "BOUNDARY"
            a = f"D{e.a}" if e.a >= 0 else "BOUNDARY"
            obs = ",".join(str(o) for o in range(64) if e.mask >> o & 1)
            lines.append(f"edge {a} {b} w={e.weight!r} p={e.probability!r} obs={obs}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "DecodingGraph":
        num_det = 0
        num_obs = 0
        edges = []
        header = re.search(r"#\s*dem detectors=(\d+) observables=(\d+)", text)
        if header:
            num_det, num_obs = int(header.group(1)), int(header.group(2))
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            m = re.match(
                r"edge (D(?:\d+)|BOUNDARY) (D(?:\d+)|BOUNDARY) w=(\S+) p=(\S+) obs=(\S*)$", line
            )
            if m is None:
                raise ValueError(f"bad graph line: {line!r}")
            a = -1 if m.group(1) == "BOUNDARY" else int(m.group(1)[1:])
            b = -1 if m.group(2) == "BOUNDARY" else int(m.group(2)[1:])
            mask = 0
            if m.group(5):
                for tok in m.group(5).split(","):
                    mask |= 1 << int(tok)
            edges.append(GraphEdge(a, b, float(m.group(3)), float(m.group(4)), mask))
            num_det = max(num_det, a + 1, b + 1)
            if mask:
                num_obs = max(num_obs, mask.bit_length())
        return DecodingGraph(num_det, num_obs, edges)


class _Component:
    """One connected component: local shortest paths, masks, and matching."""

    def __init__(self, detectors: list[int], graph: DecodingGraph):
        self.detectors = detectors
        self.local_index = {d: i for i, d in enumerate(detectors)}
        n = len(detectors) + 1  # node 0 = boundary
        best: dict[tuple[int, int], GraphEdge] = {}
        for e in graph.edges:
            if (e.a if e.a >= 0 else e.b) not in self.local_index:
                continue
            ia = self.local_index[e.a] + 1 if e.a >= 0 else 0
            ib = self.local_index[e.b] + 1 if e.b >= 0 else 0
            key = (min(ia, ib), max(ia, ib))
            cur = best.get(key)
            # Parallel edges with distinct masks: the lighter one defines the
            # shortest-path layer (deterministic tie-break on (weight, mask)).
            if cur is None or (e.weight, e.mask) < (cur.weight, cur.mask):
                best[key] = e
        rows, cols, data = [], [], []
        emask = np.zeros((n, n), dtype=np.uint64)
        for (ia, ib), e in best.items():
            rows.append(ia)
            cols.append(ib)
            data.append(e.weight)
            emask[ia, ib] = emask[ib, ia] = np.uint64(e.mask)
        mat = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
        dist, pred = scipy.sparse.csgraph.dijkstra(
            mat, directed=False, return_predecessors=True
        )
        self.dist = dist
        self.mask_matrix = _path_masks(dist, pred.astype(np.int64), emask)
        self.boundary_dist = dist[0]
        self.boundary_mask = self.mask_matrix[0]
        self.carries_observables = any(e.mask for e in best.values())
        finite = dist[np.isfinite(dist)]
        self.scale = float((1 << _QUANT_BITS) / finite.max()) if finite.size and finite.max() > 0 else 1.0

    def match_events(self, events: np.ndarray) -> tuple[int, float]:
        """Min-weight pairing of local event indices (0-based detectors).

        Returns (observable mask, total weight).
        """
        ids = np.asarray(events, dtype=np.int64) + 1  # node ids (0 = boundary)
        k = ids.size
        if k == 0:
            return 0, 0.0
        if k == 1:
            w = self.boundary_dist[ids[0]]
            if not np.isfinite(w):
                raise RuntimeError("event cannot reach the boundary")
            return int(self.boundary_mask[ids[0]]), float(w)
        d_sub = self.dist[np.ix_(ids, ids)]
        b = self.boundary_dist[ids]
        via_boundary = b[:, None] + b[None, :]
        w = np.minimum(d_sub, via_boundary)
        odd = k % 2 == 1
        m = k + 1 if odd else k
        wq = np.full((m, m), INF, dtype=np.int64)
        finite = np.isfinite(w)
        wq[:k, :k][finite] = (w[finite] * self.scale).astype(np.int64)
        if odd:
            bf = np.isfinite(b)
            wq[:k, k][bf] = (b[bf] * self.scale).astype(np.int64)
            wq[k, :k] = wq[:k, k]
        np.fill_diagonal(wq, INF)
        k_cand = 12 if m > 40 else 0
        mate = min_weight_perfect_matching(wq, missing=INF, k_candidates=k_cand)
        mask = 0
        weight = 0.0
        for i in range(k):
            j = mate[i]
            if j < i:
                continue
            if j == k:  # virtual boundary partner
                mask ^= int(self.boundary_mask[ids[i]])
                weight += float(b[i])
            elif finite[i, j] and d_sub[i, j] <= via_boundary[i, j]:
                mask ^= int(self.mask_matrix[ids[i], ids[j]])
                weight += float(d_sub[i, j])
            else:
                mask ^= int(self.boundary_mask[ids[i]]) ^ int(self.boundary_mask[ids[j]])
                weight += float(via_boundary[i, j])
        return mask, weight


@njit(cache=True)
def _path_masks(dist, pred, emask):
    """Masks along the dijkstra shortest-path tree, per source."""
    n = dist.shape[0]
    out = np.zeros((n, n), dtype=np.uint64)
    for s in range(n):
        order = np.argsort(dist[s])
        for idx in range(n):
            v = order[idx]
            p = pred[s, v]
            if p < 0:
                continue
            out[s, v] = out[s, p] ^ emask[p, v]
    return out


def build_graph(mechanisms: list[FaultMechanism], num_detectors: int, num_observables: int) -> DecodingGraph:
    """One weighted edge per mechanism; parallel same-mask edges XOR-merge.

    Mechanisms touching one detector become boundary edges; two detectors,
    internal edges.  Raises on more than two detectors or on p >= 0.5.
    """
    merged: dict[tuple[int, int, int], float] = {}
    for mech in mechanisms:
        if len(mech.detectors) > 2:
            raise ValueError(f"mechanism touches {len(mech.detectors)} detectors: not graphlike")
        if not mech.detectors:
            if mech.observables:
                raise ValueError(
                    f"undetectable logical mechanism {mech.sources[:1]}: distance would be 1"
                )
            continue
        if len(mech.detectors) == 2:
            a, b = sorted(mech.detectors)
        else:
            a, b = -1, mech.detectors[0]
        mask = 0
        for o in mech.observables:
            mask |= 1 << o
        key = (a, b, mask)
        p = mech.probability
        if key in merged:
            q = merged[key]
            merged[key] = q * (1 - p) + p * (1 - q)
        else:
            merged[key] = p
    edges = []
    for (a, b, mask), p in sorted(merged.items()):
        if not 0 < p < 0.5:
            raise ValueError(f"edge probability {p} outside (0, 0.5): degenerate weight")
        edges.append(GraphEdge(a, b, -math.log(p / (1 - p)), p, mask))
    return DecodingGraph(num_detectors, num_observables, edges)
