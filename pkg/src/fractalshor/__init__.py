"""Bacon-Shor and fractal gate-deleted Bacon-Shor circuit workbench."""

from fractalshor.analysis import (
    FaultReport,
    detector_slice,
    enumerate_single_faults,
    fault_distance,
)
from fractalshor.bench import (
    StatsRecord,
    combine_xz,
    likelihood_band,
    per_round_rate,
    run_until,
)
from fractalshor.builders import (
    MemoryExperimentSpec,
    SurgeryExperimentSpec,
    build_memory,
    build_surgery,
    derive_detectors,
)
from fractalshor.circuit import Circuit, CircuitError, Detector, Instruction, Kind, Observable, parse
from fractalshor.frame_sim import (
    FaultMechanism,
    NonGraphlike,
    SyndromeBatch,
    extract_dem,
    propagate_fault,
    sample,
)
from fractalshor.lattice import (
    Edge,
    LatticeSpec,
    Orientation,
    ScheduleParams,
    edge_active,
    interleave_b,
    level,
)
from fractalshor.matcher import DecodingGraph, build_graph
from fractalshor.noise import NoiseModel, apply_noise
from fractalshor.tableau import Fault, TableauSimulator, run_tableau

__all__ = [
    "Circuit",
    "CircuitError",
    "DecodingGraph",
    "Detector",
    "Edge",
    "Fault",
    "FaultMechanism",
    "FaultReport",
    "Instruction",
    "Kind",
    "LatticeSpec",
    "MemoryExperimentSpec",
    "NoiseModel",
    "NonGraphlike",
    "Observable",
    "Orientation",
    "ScheduleParams",
    "StatsRecord",
    "SurgeryExperimentSpec",
    "SyndromeBatch",
    "TableauSimulator",
    "apply_noise",
    "build_graph",
    "build_memory",
    "build_surgery",
    "combine_xz",
    "derive_detectors",
    "detector_slice",
    "edge_active",
    "enumerate_single_faults",
    "extract_dem",
    "fault_distance",
    "interleave_b",
    "level",
    "likelihood_band",
    "parse",
    "per_round_rate",
    "propagate_fault",
    "run_tableau",
    "run_until",
    "sample",
]

__version__ = "0.1.0"
