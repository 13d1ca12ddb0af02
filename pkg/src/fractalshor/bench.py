"""Monte-Carlo benchmark driver: sampling-decoding loop with the paper's
stopping rule (a shot cap or an error cap, whichever hits first), per-round
rate conversion, X/Z combination, and likelihood-interval summaries.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from fractalshor.circuit import Circuit
from fractalshor.frame_sim import sample
from fractalshor.matcher import DecodingGraph, build_graph
from fractalshor.noise import NoiseModel, apply_noise

DEFAULT_SEED = 2023
DEFAULT_MAX_SHOTS = 10**8
DEFAULT_MAX_ERRORS = 1000

CSV_FIELDS = ["id", "diameter", "pitch", "hold", "basis", "p", "rounds", "shots", "errors", "seconds", "seed"]


@dataclass
class StatsRecord:
    id: str
    diameter: int
    pitch: int | None
    hold: int
    basis: str
    p: float
    rounds: int
    shots: int = 0
    errors: int = 0
    seconds: float = 0.0
    seed: int = DEFAULT_SEED
    obs_errors: dict[int, int] = field(default_factory=dict)

    def config_key(self) -> tuple:
        return (self.id, self.diameter, self.pitch, self.hold, self.basis, self.p, self.rounds)

    def to_row(self) -> dict:
        row = {f: getattr(self, f) for f in CSV_FIELDS}
        row["pitch"] = "" if self.pitch is None else self.pitch
        row["seconds"] = round(self.seconds, 3)
        return row


def run_until(
    circuit: Circuit,
    p: float | None = None,
    max_shots: int = DEFAULT_MAX_SHOTS,
    max_errors: int = DEFAULT_MAX_ERRORS,
    seed: int = DEFAULT_SEED,
    batch_size: int = 65536,
    threads: int = 1,
    graph: DecodingGraph | None = None,
    record: StatsRecord | None = None,
) -> StatsRecord:
    """Sample and decode in batches until either cap is reached.

    An error is a shot where any observable prediction disagrees with the
    sampled truth; per-observable mismatch counts accumulate in
    record.obs_errors.  The caps are checked at batch granularity, so the
    totals may overshoot by at most one batch.  Results are reproducible
    for fixed (seed, batch_size) independent of thread count.
    """
    if max_shots < 1 or max_errors < 1:
        raise ValueError("caps must be >= 1")
    noisy = circuit
    if not circuit.has_noise:
        if p is None:
            raise ValueError("ideal circuit requires a noise strength p")
        noisy = apply_noise(circuit, NoiseModel(p))
    if graph is None:
        from fractalshor.frame_sim import extract_dem

        graph = build_graph(extract_dem(noisy), noisy.num_detectors, noisy.num_observables)
    if record is None:
        record = StatsRecord(
            id="run", diameter=0, pitch=None, hold=1, basis="?",
            p=p if p is not None else 0.0, rounds=0, seed=seed,
        )
    t0 = time.monotonic()
    root = np.random.SeedSequence(seed)
    while record.shots < max_shots and record.errors < max_errors:
        n = min(batch_size, max_shots - record.shots)
        n = max(64, (n + 63) // 64 * 64)
        batch = sample(noisy, shots=n, seed=root.spawn(1)[0], batch_size=batch_size, threads=threads)
        pred = graph.decode_batch(batch)
        _, truth = batch.unpack()
        miss = pred != truth
        record.errors += int(miss.any(axis=1).sum())
        for o in range(noisy.num_observables):
            record.obs_errors[o] = record.obs_errors.get(o, 0) + int(miss[:, o].sum())
        record.shots += n
    record.seconds += time.monotonic() - t0
    return record


def per_round_rate(p_shot: float, rounds: int) -> float:
    """Per-round error rate whose `rounds`-fold flip composition gives p_shot."""
    if not 0.0 <= p_shot <= 0.5:
        raise ValueError(f"per-shot rate {p_shot} outside [0, 0.5]")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    return (1.0 - (1.0 - 2.0 * p_shot) ** (1.0 / rounds)) / 2.0


def combine_xz(p_x: float, p_z: float) -> float:
    """Chance of an X and/or Z failure, assuming independence."""
    if not (0.0 <= p_x <= 1.0 and 0.0 <= p_z <= 1.0):
        raise ValueError("rates must lie in [0, 1]")
    return p_x + p_z - p_x * p_z


def likelihood_band(shots: int, errors: int, factor: float = 1000.0) -> tuple[float, float]:
    """The interval of p whose binomial likelihood is within `factor` of max.

    Solved numerically to relative tolerance well below 1e-6; the errors=0
    and errors=shots ends use the closed forms (1-p)^shots >= 1/factor.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0 <= errors <= shots:
        raise ValueError("errors must lie in [0, shots]")
    log_f = math.log(factor)
    if errors == 0:
        return 0.0, 1.0 - factor ** (-1.0 / shots)
    if errors == shots:
        return factor ** (-1.0 / shots), 1.0

    p_hat = errors / shots

    def excess(p):
        return (
            errors * (math.log(p) - math.log(p_hat))
            + (shots - errors) * (math.log1p(-p) - math.log1p(-p_hat))
            + log_f
        )

    tiny = 1e-18
    low = brentq(excess, tiny, p_hat, rtol=1e-12)
    high = brentq(excess, p_hat, 1.0 - 1e-16, rtol=1e-12)
    return float(low), float(high)


def rate_with_sigma(shots: int, errors: int, rounds: int) -> tuple[float, float]:
    """Per-round rate and its 1-sigma binomial uncertainty (delta method)."""
    p_shot = errors / shots
    sigma_shot = math.sqrt(max(p_shot * (1 - p_shot), 1.0 / shots) / shots)
    r = per_round_rate(min(p_shot, 0.5), rounds)
    h = min(sigma_shot, 0.49 - p_shot if p_shot < 0.49 else 0.0)
    if h > 0:
        slope = (per_round_rate(p_shot + h, rounds) - per_round_rate(max(p_shot - h, 0.0), rounds)) / (
            h + min(h, p_shot)
        )
    else:
        slope = 1.0 / rounds
    return r, abs(slope) * sigma_shot


def combined_rate_with_sigma(
    rec_x: "StatsRecord", rec_z: "StatsRecord", rounds: int
) -> tuple[float, float]:
    """Per-round X-and/or-Z rate with propagated binomial uncertainty."""
    rx, sx = rate_with_sigma(rec_x.shots, rec_x.errors, rounds)
    rz, sz = rate_with_sigma(rec_z.shots, rec_z.errors, rounds)
    r = combine_xz(rx, rz)
    sigma = math.sqrt(((1 - rz) * sx) ** 2 + ((1 - rx) * sz) ** 2)
    return r, sigma


# --------------------------------------------------------------------- CSV I/O


def append_csv(path: str, record: StatsRecord) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if new:
            writer.writeheader()
        writer.writerow(record.to_row())


def read_csv(path: str) -> list[StatsRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                StatsRecord(
                    id=row["id"],
                    diameter=int(row["diameter"]),
                    pitch=int(row["pitch"]) if row["pitch"] else None,
                    hold=int(row["hold"]),
                    basis=row["basis"],
                    p=float(row["p"]),
                    rounds=int(row["rounds"]),
                    shots=int(row["shots"]),
                    errors=int(row["errors"]),
                    seconds=float(row["seconds"]),
                    seed=int(row["seed"]),
                )
            )
    return out


def accumulate(records: list[StatsRecord]) -> list[StatsRecord]:
    """Merge rows with identical configuration keys (shots/errors add up)."""
    merged: dict[tuple, StatsRecord] = {}
    for rec in records:
        key = rec.config_key()
        if key in merged:
            tgt = merged[key]
            tgt.shots += rec.shots
            tgt.errors += rec.errors
            tgt.seconds += rec.seconds
            for o, k in rec.obs_errors.items():
                tgt.obs_errors[o] = tgt.obs_errors.get(o, 0) + k
        else:
            merged[key] = StatsRecord(**{**rec.__dict__, "obs_errors": dict(rec.obs_errors)})
    return list(merged.values())
