"""Static reliability analysis for compiled noisy quantum circuits.

The package tracks the ordered noise channels each logical qubit traverses in
a compiled circuit (depolarizing per gate, thermal relaxation per duration,
readout bit-flip at measurement), evaluates per-qubit and circuit-level
reliability analytically in linear time, and validates those estimates
against a built-in density-matrix simulator at desk scale.
"""

from .calibration import (
    Calibration,
    GateCal,
    QubitCal,
    depolarizing_param,
    load_calibration,
    lookup_gate,
    serialize_calibration,
)
from .circuit_ir import (
    CompiledCircuit,
    GateOp,
    LayoutState,
    SwapTag,
    depth,
    gate_count,
    parse_json_ir,
    parse_qasm,
    serialize_json_ir,
    validate_against,
)
from .npc import (
    Depolarizing,
    ProxyFidelityReport,
    QubitTrajectory,
    Readout,
    SwapMerge,
    Thermal,
    apply_swap_segment,
    build_npc,
    circuit_proxy_fidelity,
    closed_form_fidelity,
    evaluate,
    qubit_proxy_fidelity,
    step_depolarizing,
    step_readout,
    step_thermal,
)
from .oracle import (
    BlochVector,
    DensityMatrix,
    Distribution,
    apply_depolarizing,
    apply_readout_flip,
    apply_thermal,
    apply_unitary,
    hellinger,
    negativity,
    partial_trace,
    simulate_ideal,
    simulate_noisy,
    state_fidelity,
    success_probability,
    trace_inner,
)
from .metrics import MetricValue, dist_similarity, esp, score_all
from .analysis import (
    AccuracyResult,
    RankingResult,
    aad_r2,
    fig5_sweep,
    gen_bv_circuit,
    gen_calibration,
    gen_ghz_circuit,
    gen_id_circuit,
    gen_random_circuit,
    rank_layouts,
    spearman_rho,
)

__version__ = "0.1.0"
