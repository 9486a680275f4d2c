"""Per-qubit noise-channel tracking and analytic reliability evaluation.

Strips a compiled circuit down to the ordered noise channels each logical
qubit traverses (depolarizing and thermal-relaxation channels per gate, one
readout bit-flip at measurement), then evaluates a reliability figure per
qubit by stepping an initial value of 1 through the sequence:

    depolarizing(p):      f -> 1/2 + (f - 1/2) * (1 - p)
    thermal(t, T1, T2):   f -> 1/2 + (f - 1/2) * (2/3 e^{-t/T2} + 1/3 e^{-t/T1})
    readout(e):           f -> f * (1 - e)

The circuit-level figure is the product over qubits.  All updates multiply
into a single contraction factor, so stepping equals the closed-form product
expression; both are exposed and cross-checked in tests.

A routing SWAP moves a logical qubit across two physical qubits whose noise
differs.  The segment's native-gate channels are accumulated separately on
each physical qubit, the qubit's pre-segment value is evolved through both
sequences, and the two branch values are averaged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .calibration import Calibration, lookup_gate
from .circuit_ir import CompiledCircuit, LayoutState, SwapSegment
from .errors import DomainError, MissingReadoutCal
from .templates import SwapTemplate, default_template, expand_swap_gates

# source_op sentinel for the readout event, which has no op index.
MEASURE = -1


@dataclass(frozen=True, slots=True)
class Depolarizing:
    p: float
    source_op: int = MEASURE


@dataclass(frozen=True, slots=True)
class Thermal:
    t: float
    t1: float
    t2: float
    source_op: int = MEASURE


@dataclass(frozen=True, slots=True)
class Readout:
    e: float
    source_op: int = MEASURE


NoiseEvent = Depolarizing | Thermal | Readout


@dataclass(frozen=True, slots=True)
class SwapMerge:
    """Channel sequences on the segment's two physical qubits; the affected
    qubit's value evolves through both and the results are averaged."""

    branch_a: tuple[NoiseEvent, ...]
    branch_b: tuple[NoiseEvent, ...]
    source_op: int = MEASURE


TrajectoryEvent = NoiseEvent | SwapMerge


@dataclass(slots=True)
class QubitTrajectory:
    logical: int
    events: list[TrajectoryEvent] = field(default_factory=list)
    residences: list[int] = field(default_factory=list)


@dataclass
class ProxyFidelityReport:
    per_qubit: list[float]
    circuit: float
    traces: list[list[tuple[int, float]]]
    scope: str = "all"
    scope_qubits: tuple[int, ...] = ()

    def to_json(self) -> str:
        doc = {
            "per_qubit": self.per_qubit,
            "circuit": self.circuit,
            "traces": [[[idx, f] for idx, f in trace] for trace in self.traces],
            "scope": self.scope,
            "scope_qubits": list(self.scope_qubits),
        }
        return json.dumps(doc, indent=2)

    def trace_csv(self) -> str:
        lines = ["qubit,event_index,fidelity_after"]
        for logical, trace in enumerate(self.traces):
            for idx, f in trace:
                lines.append(f"{logical},{idx},{f!r}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Update rules
# ---------------------------------------------------------------------------


def step_depolarizing(f: float, p: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"fidelity {f} outside [0, 1]")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing probability {p} outside [0, 1]")
    if p == 0.0:  # identity channel, bit-exact
        return f
    return 0.5 + (f - 0.5) * (1.0 - p)


def step_thermal(f: float, t: float, t1: float, t2: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"fidelity {f} outside [0, 1]")
    if t < 0.0:
        raise DomainError(f"duration {t} must be >= 0")
    if t1 <= 0.0 or t2 <= 0.0:
        raise DomainError("t1 and t2 must be positive")
    if t == 0.0:  # zero-duration channel, bit-exact
        return f
    shrink = (2.0 / 3.0) * math.exp(-t / t2) + (1.0 / 3.0) * math.exp(-t / t1)
    return 0.5 + (f - 0.5) * shrink


def step_readout(f: float, e: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"fidelity {f} outside [0, 1]")
    if not 0.0 <= e <= 1.0:
        raise DomainError(f"readout error {e} outside [0, 1]")
    return f * (1.0 - e)


def _step_event(f: float, event: TrajectoryEvent) -> float:
    if type(event) is Depolarizing:
        return step_depolarizing(f, event.p)
    if type(event) is Thermal:
        return step_thermal(f, event.t, event.t1, event.t2)
    if type(event) is Readout:
        return step_readout(f, event.e)
    # SwapMerge: evolve through both physical-qubit sequences, average.
    fa = f
    for ev in event.branch_a:
        fa = _step_event(fa, ev)
    fb = f
    for ev in event.branch_b:
        fb = _step_event(fb, ev)
    return 0.5 * (fa + fb)


def closed_form_fidelity(
    pairs: list[tuple[float, float, float, float]],
    readout_error: float = 0.0,
    f0: float = 1.0,
) -> float:
    """Product-form evaluation over (p, t, t1, t2) channel pairs followed by
    one readout factor.  Equals sequential stepping for the same sequence."""
    product = 1.0
    for p, t, t1, t2 in pairs:
        product *= (1.0 - p) * (
            (2.0 / 3.0) * math.exp(-t / t2) + (1.0 / 3.0) * math.exp(-t / t1)
        )
    return (0.5 + (f0 - 0.5) * product) * (1.0 - readout_error)


def qubit_proxy_fidelity(traj: QubitTrajectory) -> tuple[float, list[tuple[int, float]]]:
    """Step an initial value of 1 through the trajectory; returns the final
    value and the per-event decay trace."""
    f = 1.0
    trace = []
    for idx, event in enumerate(traj.events):
        f = _step_event(f, event)
        trace.append((idx, f))
    return f, trace


def circuit_proxy_fidelity(per_qubit) -> float:
    result = 1.0
    for f in per_qubit:
        result *= f
    return result


# ---------------------------------------------------------------------------
# Trajectory construction
# ---------------------------------------------------------------------------


def expand_swap_channels(
    cal: Calibration,
    a: int,
    b: int,
    template: SwapTemplate | None = None,
    source_op: int = MEASURE,
) -> tuple[tuple[NoiseEvent, ...], tuple[NoiseEvent, ...]]:
    """Per-physical-qubit channel sequences induced by one SWAP segment."""
    template = template or default_template()
    branches: dict[int, list[NoiseEvent]] = {a: [], b: []}
    for gate in expand_swap_gates(a, b, template):
        noise = lookup_gate(cal, gate.name, gate.qubits)
        for q, (t1, t2) in zip(gate.qubits, noise.qubit_times):
            branches[q].append(Depolarizing(noise.p, source_op))
            branches[q].append(Thermal(noise.duration, t1, t2, source_op))
    return tuple(branches[a]), tuple(branches[b])


def apply_swap_segment(
    fidelities: dict[int, float],
    layout: LayoutState,
    a: int,
    b: int,
    cal: Calibration,
    template: SwapTemplate | None = None,
) -> None:
    """Update resident logical qubits' fidelities through the segment's two
    branch sequences (averaged) and exchange the layout entries for a, b."""
    branch_a, branch_b = expand_swap_channels(cal, a, b, template)
    merge = SwapMerge(branch_a, branch_b)
    for physical in (a, b):
        logical = layout.logical(physical)
        if logical is not None:
            fidelities[logical] = _step_event(fidelities[logical], merge)
    layout.swap_physical(a, b)


def build_npc(
    circuit: CompiledCircuit,
    cal: Calibration,
    template: SwapTemplate | None = None,
) -> list[QubitTrajectory]:
    """Reconstruct each logical qubit's noise-channel sequence.

    Single-qubit gates append a depolarizing and a thermal channel to the
    acting qubit; a two-qubit gate appends, to each participating qubit, a
    depolarizing channel with the shared two-qubit probability plus a thermal
    channel with that qubit's own T1/T2.  SWAP segments append a merge event
    holding both branch sequences and exchange the residence map.
    Measurements append one final readout event per measured qubit, using the
    readout error of its final physical residence.
    """
    template = template or default_template()
    trajectories = [QubitTrajectory(logical=l) for l in range(circuit.num_logical)]
    layout = LayoutState(circuit.initial_layout)

    for item in circuit.schedule():
        if isinstance(item, SwapSegment):
            a, b = item.qubits
            branch_a, branch_b = expand_swap_channels(
                cal, a, b, template, source_op=item.first_index
            )
            merge = SwapMerge(branch_a, branch_b, source_op=item.first_index)
            for physical in (a, b):
                logical = layout.logical(physical)
                if logical is not None:
                    traj = trajectories[logical]
                    traj.events.append(merge)
                    # residence recorded post-exchange
                    traj.residences.append(b if physical == a else a)
            layout.swap_physical(a, b)
            continue
        idx, op = item
        noise = lookup_gate(cal, op.name, op.qubits)
        for q, (t1, t2) in zip(op.qubits, noise.qubit_times):
            logical = layout.logical(q)
            if logical is None:
                continue  # noise on a physical qubit hosting no logical qubit
            traj = trajectories[logical]
            traj.events.append(Depolarizing(noise.p, idx))
            traj.residences.append(q)
            traj.events.append(Thermal(noise.duration, t1, t2, idx))
            traj.residences.append(q)

    for logical in sorted(circuit.measured):
        physical = layout.physical(logical)
        if physical >= len(cal.qubits):
            raise MissingReadoutCal(physical)
        traj = trajectories[logical]
        traj.events.append(Readout(cal.qubits[physical].readout_error, MEASURE))
        traj.residences.append(physical)

    return trajectories


def evaluate(
    circuit: CompiledCircuit,
    cal: Calibration,
    scope: str = "all",
    template: SwapTemplate | None = None,
) -> ProxyFidelityReport:
    """Full pipeline: trajectories, per-qubit stepping, circuit aggregation.

    scope selects which qubits the circuit-level product runs over: "all"
    logical qubits, or "measured" only.
    """
    if scope not in ("all", "measured"):
        raise DomainError(f"scope must be 'all' or 'measured', got {scope!r}")
    trajectories = build_npc(circuit, cal, template)
    per_qubit = []
    traces = []
    for traj in trajectories:
        f, trace = qubit_proxy_fidelity(traj)
        per_qubit.append(f)
        traces.append(trace)
    if scope == "all":
        scope_qubits = tuple(range(circuit.num_logical))
    else:
        scope_qubits = tuple(sorted(circuit.measured))
    circuit_f = circuit_proxy_fidelity(per_qubit[q] for q in scope_qubits)
    return ProxyFidelityReport(
        per_qubit=per_qubit,
        circuit=circuit_f,
        traces=traces,
        scope=scope,
        scope_qubits=scope_qubits,
    )
