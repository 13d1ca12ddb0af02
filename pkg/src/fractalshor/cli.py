"""Command-line surface: circuit generation, benchmarking, decoding-graph
export, single-fault enumeration, and detector-slice extraction.

Exit codes: 0 success, 1 domain failure (validation, decoding, file
contents), 2 usage errors.  Seeds default to a fixed constant so published
command lines reproduce exactly; `--threads` (or FRACTALSHOR_THREADS)
bounds worker parallelism without changing any output bit.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

from fractalshor import bench
from fractalshor.analysis import enumerate_single_faults, slice_to_json
from fractalshor.builders import (
    MemoryExperimentSpec,
    SurgeryExperimentSpec,
    build_memory,
    build_surgery,
)
from fractalshor.circuit import Circuit, CircuitError, parse
from fractalshor.frame_sim import NonGraphlike, extract_dem
from fractalshor.lattice import LatticeSpec, ScheduleParams
from fractalshor.matcher import DecodingGraph, build_graph
from fractalshor.noise import NoiseModel, apply_noise

_META_RE = re.compile(r"^# meta (\w+)=(\S*)$", re.MULTILINE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalshor",
        description="Bacon-Shor / fractal Bacon-Shor circuit workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a memory or surgery circuit (.fsc)")
    gen.add_argument("--diameter", type=int, default=5, help="grid diameter (memory) or patch distance (surgery)")
    gen.add_argument("--pitch", type=int, default=None, help="fractal pitch (odd, >= 3); omit for the plain code")
    gen.add_argument("--hold", type=int, default=1, help="surgery hold factor")
    gen.add_argument("--basis", choices=("X", "Z"), default="X")
    gen.add_argument("--rounds", type=int, default=None, help="memory rounds (default: diameter)")
    gen.add_argument("--surgery", action="store_true", help="build the lattice-surgery pair-measurement block")
    gen.add_argument("--surgery-rounds", default="1,3,1", help="before,during,after rounds for --surgery")
    gen.add_argument("--p", type=float, default=None, help="apply uniform noise of this strength")
    gen.add_argument("--out", default="-", help="output path ('-' = stdout)")

    run = sub.add_parser("run", help="Monte-Carlo benchmark a circuit")
    run.add_argument("--circuit", required=True)
    run.add_argument("--p", type=float, default=None, help="noise strength (required for ideal circuits)")
    run.add_argument("--max-shots", type=int, default=bench.DEFAULT_MAX_SHOTS)
    run.add_argument("--max-errors", type=int, default=bench.DEFAULT_MAX_ERRORS)
    run.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    run.add_argument("--batch-size", type=int, default=65536)
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--csv", default=None, help="append the result row to this CSV")
    run.add_argument("--graph", default=None, help="load the decoding graph from a dem file instead of rebuilding")
    run.add_argument("--id", dest="run_id", default=None, help="experiment id for the CSV row")
    run.add_argument("--obs-json", default=None, help="write per-observable error counts to this JSON file")

    dem = sub.add_parser("dem", help="extract the decoding graph of a noisy circuit")
    dem.add_argument("--circuit", required=True)
    dem.add_argument("--out", default="-")

    enum = sub.add_parser("enumerate", help="classify every single fault of a noisy circuit")
    enum.add_argument("--circuit", required=True)
    enum.add_argument("--out", default=None, help="write the per-fault JSON-lines report here")

    slc = sub.add_parser("slice", help="detector supports crossing a layer")
    slc.add_argument("--circuit", required=True)
    slc.add_argument("--t", type=int, required=True)
    slc.add_argument("--out", default="-")
    return parser


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_circuit(path: str) -> tuple[Circuit, dict]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    meta = {k: v for k, v in _META_RE.findall(text)}
    circuit = parse(text)
    circuit.validate()
    return circuit, meta


def _cmd_gen(args) -> int:
    meta = {
        "diameter": args.diameter,
        "pitch": args.pitch if args.pitch is not None else "",
        "hold": args.hold,
        "basis": args.basis,
        "p": args.p if args.p is not None else "",
    }
    if args.surgery:
        try:
            before, during, after = (int(x) for x in args.surgery_rounds.split(","))
        except ValueError:
            print(f"bad --surgery-rounds {args.surgery_rounds!r}", file=sys.stderr)
            return 2
        spec = SurgeryExperimentSpec(
            distance=args.diameter,
            rounds_before=before,
            rounds_during=during,
            rounds_after=after,
            basis=args.basis,
        )
        circuit = build_surgery(spec)
        meta["id"] = "surgery"
        meta["rounds"] = before + during + after
    else:
        spec = MemoryExperimentSpec(
            lattice=LatticeSpec(args.diameter, args.diameter),
            schedule=ScheduleParams(pitch=args.pitch, hold=args.hold),
            basis=args.basis,
            rounds=args.rounds if args.rounds is not None else 0,
        )
        circuit = build_memory(spec)
        meta["id"] = "memory"
        meta["rounds"] = spec.rounds
    if args.p is not None:
        circuit = apply_noise(circuit, NoiseModel(args.p))
    circuit.validate()
    header = "".join(f"# meta {k}={v}\n" for k, v in sorted(meta.items()))
    _write(args.out, header + circuit.serialize())
    return 0


def _cmd_run(args) -> int:
    circuit, meta = _load_circuit(args.circuit)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("FRACTALSHOR_THREADS", "1"))
    graph = None
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            graph = DecodingGraph.parse(fh.read())
    p = args.p if args.p is not None else (float(meta["p"]) if meta.get("p") else None)
    record = bench.StatsRecord(
        id=args.run_id or meta.get("id", "run"),
        diameter=int(meta.get("diameter", 0) or 0),
        pitch=int(meta["pitch"]) if meta.get("pitch") else None,
        hold=int(meta.get("hold", 1) or 1),
        basis=meta.get("basis", "?"),
        p=p if p is not None else 0.0,
        rounds=int(meta.get("rounds", 0) or 0),
        seed=args.seed,
    )
    record = bench.run_until(
        circuit,
        p=p,
        max_shots=args.max_shots,
        max_errors=args.max_errors,
        seed=args.seed,
        batch_size=args.batch_size,
        threads=threads,
        graph=graph,
        record=record,
    )
    if args.csv:
        bench.append_csv(args.csv, record)
    if args.obs_json:
        import json

        with open(args.obs_json, "w", encoding="utf-8") as fh:
            json.dump({str(k): v for k, v in sorted(record.obs_errors.items())}, fh)
            fh.write("\n")
    print(f"shots={record.shots} errors={record.errors} seconds={record.seconds:.3f}")
    return 0


def _cmd_dem(args) -> int:
    circuit, _ = _load_circuit(args.circuit)
    graph = build_graph(extract_dem(circuit), circuit.num_detectors, circuit.num_observables)
    _write(args.out, graph.serialize())
    return 0


def _cmd_enumerate(args) -> int:
    circuit, _ = _load_circuit(args.circuit)
    report = enumerate_single_faults(circuit)
    if args.out:
        _write(args.out, report.to_jsonl())
    sys.stdout.write(report.summary())
    return 0


def _cmd_slice(args) -> int:
    circuit, _ = _load_circuit(args.circuit)
    _write(args.out, slice_to_json(circuit, args.t))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "run": _cmd_run,
        "dem": _cmd_dem,
        "enumerate": _cmd_enumerate,
        "slice": _cmd_slice,
    }
    try:
        return handlers[args.command](args)
    except (CircuitError, NonGraphlike) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
