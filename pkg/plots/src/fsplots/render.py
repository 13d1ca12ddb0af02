"""Render error-rate curves and detector-slice diagrams to SVG.

Output is deterministic: fixed fonts and sizes, a fixed svg hash salt, and
no embedded timestamps, so rerunning on the same inputs reproduces the file
byte for byte.
"""

from __future__ import annotations

import csv
import json
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update(
    {
        "svg.hashsalt": "fsplots",
        "svg.fonttype": "path",
        "font.family": "DejaVu Sans",
        "font.size": 9,
        "figure.figsize": (5.2, 3.6),
        "figure.dpi": 100,
    }
)

import matplotlib.pyplot as plt

from fsplots.stats import combine_xz, likelihood_band, per_round_rate

_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def read_stats_csv(path: str) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "id": row["id"],
                    "diameter": int(row["diameter"]),
                    "pitch": int(row["pitch"]) if row["pitch"] else None,
                    "hold": int(row["hold"]),
                    "basis": row["basis"],
                    "p": float(row["p"]),
                    "rounds": int(row["rounds"]),
                    "shots": int(row["shots"]),
                    "errors": int(row["errors"]),
                }
            )
    return rows


def _accumulate(rows: list[dict]) -> dict[tuple, dict]:
    merged: dict[tuple, dict] = {}
    for row in rows:
        key = (row["id"], row["diameter"], row["pitch"], row["hold"], row["basis"], row["p"], row["rounds"])
        if key in merged:
            merged[key]["shots"] += row["shots"]
            merged[key]["errors"] += row["errors"]
        else:
            merged[key] = dict(row)
    return merged


def curve_points(rows: list[dict]) -> dict[tuple, list[dict]]:
    """Group accumulated rows into (pitch, p) curves of per-round combined rates.

    Each diameter needs an X-basis and a Z-basis row; incomplete diameters
    are skipped with a warning.
    """
    merged = _accumulate(rows)
    by_cfg: dict[tuple, dict[str, dict]] = defaultdict(dict)
    for row in merged.values():
        cfg = (row["pitch"], row["p"], row["diameter"], row["rounds"])
        by_cfg[cfg][row["basis"]] = row
    curves: dict[tuple, list[dict]] = defaultdict(list)
    for (pitch, p, diameter, rounds), bases in sorted(by_cfg.items(), key=lambda kv: str(kv[0])):
        if "X" not in bases or "Z" not in bases:
            print(f"warning: skipping diameter {diameter} (pitch={pitch}, p={p}): need X and Z rows", file=sys.stderr)
            continue
        point = {"diameter": diameter}
        for edge_idx, field in ((0, "low"), (1, "high")):
            combined = combine_xz(
                per_round_rate(likelihood_band(bases["X"]["shots"], bases["X"]["errors"])[edge_idx], rounds),
                per_round_rate(likelihood_band(bases["Z"]["shots"], bases["Z"]["errors"])[edge_idx], rounds),
            )
            point[field] = combined
        point["rate"] = combine_xz(
            per_round_rate(bases["X"]["errors"] / bases["X"]["shots"], rounds),
            per_round_rate(bases["Z"]["errors"] / bases["Z"]["shots"], rounds),
        )
        curves[(pitch, p)].append(point)
    for points in curves.values():
        points.sort(key=lambda pt: pt["diameter"])
    return dict(curves)


def plot_rates(csv_path: str, out_path: str, floor: float = 1e-9) -> dict[tuple, list[dict]]:
    """One curve per (pitch, p) group with likelihood-band highlights."""
    curves = curve_points(read_stats_csv(csv_path))
    if not curves:
        print("warning: no complete curves to plot", file=sys.stderr)
    fig, ax = plt.subplots()
    for (pitch, p), points in sorted(curves.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        xs = [pt["diameter"] for pt in points]
        ys = [max(pt["rate"], floor) for pt in points]
        lo = [max(pt["low"], floor) for pt in points]
        hi = [max(pt["high"], floor) for pt in points]
        label = f"pitch={'plain' if pitch is None else pitch}, p={p:g}"
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, linewidth=1, label=label)
        ax.fill_between(xs, lo, hi, alpha=0.25, color=line.get_color(), linewidth=0)
    ax.set_yscale("log")
    ax.set_xlabel("grid diameter")
    ax.set_ylabel("logical error rate per round (X and/or Z)")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.25, linewidth=0.4)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)
    return curves


_BASIS_COLOR = {"X": "#d62728", "Z": "#1f77b4"}


def plot_slice(json_path: str, out_path: str) -> int:
    """Qubit grid with detector supports shaded by basis; returns slice count."""
    with open(json_path, encoding="utf-8") as fh:
        data = json.load(fh)
    rows, cols = data["rows"], data["cols"]
    fig, ax = plt.subplots(figsize=(5.0, 5.0 * max(rows, 1) / max(cols, 1)))
    for entry in data["slices"]:
        qubits = entry["qubits"]
        rs = [q[0] for q in qubits]
        cs = [q[1] for q in qubits]
        r0, r1 = min(rs), max(rs)
        c0, c1 = min(cs), max(cs)
        ax.add_patch(
            plt.Rectangle(
                (c0 - 0.35, r0 - 0.35),
                (c1 - c0) + 0.7,
                (r1 - r0) + 0.7,
                facecolor=_BASIS_COLOR[entry["basis"]],
                alpha=0.18,
                edgecolor=_BASIS_COLOR[entry["basis"]],
                linewidth=0.5,
            )
        )
    if rows and cols:
        xs = [c for r in range(rows) for c in range(cols)]
        ys = [r for r in range(rows) for c in range(cols)]
        ax.scatter(xs, ys, s=2.5, c="black", linewidths=0)
    ax.set_xlim(-1, cols)
    ax.set_ylim(rows, -1)
    ax.set_aspect("equal")
    ax.set_title(f"detector supports at layer t={data['t']}", fontsize=9)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)
    return len(data["slices"])
