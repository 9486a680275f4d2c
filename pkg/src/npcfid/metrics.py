"""Comparison metrics: estimated success probability, structural counts,
distribution similarity, and the combined metric vector used for ranking."""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import Calibration
from .circuit_ir import CompiledCircuit, SwapSegment, depth, final_layout, gate_count
from .errors import DomainError
from .npc import evaluate
from .oracle import (
    DensityMatrix,
    Distribution,
    hellinger,
    simulate_ideal,
    simulate_noisy,
    state_fidelity,
    success_probability,
)
from .templates import SwapTemplate, default_template, expand_swap_gates

# Fixed optimization direction per metric identifier.  "ml" is a reserved
# identifier for an external learned estimator so exported tables stay
# comparable; this package never produces it.
METRIC_DIRECTIONS: dict[str, bool] = {
    "proxy_fidelity": True,
    "esp": True,
    "gate_count": False,
    "depth": False,
    "success_prob": True,
    "dist_similarity": True,
    "state_fidelity": True,
    "ml": True,
}


@dataclass(frozen=True, slots=True)
class MetricValue:
    metric: str
    value: float
    higher_is_better: bool
    available: bool = True


@dataclass
class OracleResults:
    """Ground-truth artifacts shared by the oracle-backed metrics."""

    ideal_dm: DensityMatrix
    noisy_dm: DensityMatrix
    ideal_dist: Distribution | None
    noisy_dist: Distribution | None
    targets: tuple[str, ...] | None = None


def compute_oracle_results(
    circuit: CompiledCircuit,
    cal: Calibration,
    template: SwapTemplate | None = None,
    cap: int = 8,
    targets=None,
) -> OracleResults:
    ideal_dm, ideal_dist = simulate_ideal(circuit, template, cap)
    noisy_dm, noisy_dist = simulate_noisy(circuit, cal, template, cap)
    if targets is None and ideal_dist is not None:
        targets = basis_targets(ideal_dist)
    return OracleResults(ideal_dm, noisy_dm, ideal_dist, noisy_dist, targets)


def basis_targets(ideal_dist: Distribution, tol: float = 1e-9) -> tuple[str, ...] | None:
    """The correct-output bitstrings, when the ideal output concentrates on at
    most two basis states (the regime where success probability applies)."""
    support = [k for k, p in ideal_dist.probs.items() if p > tol]
    if 1 <= len(support) <= 2:
        return tuple(sorted(support))
    return None


def esp(circuit: CompiledCircuit, cal: Calibration, template: SwapTemplate | None = None) -> float:
    """Product of per-operation success probabilities (1 - raw error rate)
    times (1 - readout error) for each measured qubit.  SWAP segments
    contribute their expanded native gates."""
    template = template or default_template()
    result = 1.0
    for item in circuit.schedule():
        if isinstance(item, SwapSegment):
            gates = expand_swap_gates(item.qubits[0], item.qubits[1], template)
        else:
            gates = [item[1]]
        for g in gates:
            result *= 1.0 - cal.gate(g.name, g.qubits).error_rate
    layout = final_layout(circuit)
    for logical in circuit.measured:
        result *= 1.0 - cal.qubit(layout.physical(logical)).readout_error
    return result


def dist_similarity(p: Distribution, q: Distribution) -> float:
    return 1.0 - hellinger(p, q)


def score_all(
    circuit: CompiledCircuit,
    cal: Calibration,
    oracle_results: OracleResults | None = None,
    scope: str = "all",
    template: SwapTemplate | None = None,
) -> list[MetricValue]:
    """Deterministic metric vector for one circuit.  Oracle-backed metrics are
    flagged unavailable when no oracle results (or no measurements) exist."""

    def mv(metric, value, available=True):
        return MetricValue(metric, value, METRIC_DIRECTIONS[metric], available)

    values = [
        mv("proxy_fidelity", evaluate(circuit, cal, scope=scope, template=template).circuit),
        mv("esp", esp(circuit, cal, template)),
        mv("gate_count", float(gate_count(circuit))),
        mv("depth", float(depth(circuit))),
    ]
    if oracle_results is None:
        return values

    r = oracle_results
    values.append(mv("state_fidelity", state_fidelity(r.ideal_dm, r.noisy_dm)))
    if r.ideal_dist is not None and r.noisy_dist is not None:
        values.append(mv("dist_similarity", dist_similarity(r.ideal_dist, r.noisy_dist)))
    else:
        values.append(mv("dist_similarity", float("nan"), available=False))
    if r.targets and r.noisy_dist is not None:
        values.append(mv("success_prob", success_probability(r.noisy_dist, r.targets)))
    else:
        values.append(mv("success_prob", float("nan"), available=False))
    return values


def metrics_csv(rows: list[tuple[str, list[MetricValue]]]) -> str:
    """CSV export: one row per (circuit id, metric)."""
    lines = ["circuit_id,metric,value,higher_is_better,available"]
    for circuit_id, metrics in rows:
        for m in metrics:
            lines.append(
                f"{circuit_id},{m.metric},{m.value!r},{int(m.higher_is_better)},{int(m.available)}"
            )
    return "\n".join(lines) + "\n"
