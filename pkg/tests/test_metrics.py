import math

import numpy as np
import pytest

from npcfid.analysis import gen_bv_circuit, gen_calibration, gen_id_circuit, noiseless_calibration
from npcfid.circuit_ir import CompiledCircuit, GateOp, parse_qasm
from npcfid.errors import MissingGateCal
from npcfid.metrics import (
    METRIC_DIRECTIONS,
    basis_targets,
    compute_oracle_results,
    dist_similarity,
    esp,
    metrics_csv,
    score_all,
)
from npcfid.oracle import Distribution, simulate_ideal, simulate_noisy, state_fidelity


class _StubCal:
    """Minimal calibration stand-in so boundary error rates (like r = 1) can
    exercise the arithmetic contract directly."""

    def __init__(self, rates: dict, readout: float = 0.0):
        self.rates = rates
        self.readout = readout
        self.qubits = [self] * 8
        self.readout_error = readout

    def gate(self, name, qubits):
        class Entry:
            error_rate = self.rates[(name, tuple(qubits))]

        return Entry

    def qubit(self, q):
        return self


class TestEsp:
    def test_noiseless_is_one(self, quiet2):
        c = parse_qasm("qreg q[2]; h q[0]; cx q[0], q[1]; measure q[0] -> c[0];")
        assert esp(c, quiet2) == 1.0

    def test_direct_product(self):
        cal = _StubCal({("x", (0,)): 0.01, ("x", (1,)): 0.01}, readout=0.02)
        c = parse_qasm("qreg q[2]; x q[0]; x q[1]; measure q[0] -> c[0];")
        assert esp(c, cal) == pytest.approx(0.99**2 * 0.98, abs=1e-12)
        assert esp(c, cal) == pytest.approx(0.960498, abs=1e-9)

    def test_total_failure_gate(self):
        cal = _StubCal({("x", (0,)): 1.0})
        c = parse_qasm("qreg q[1]; x q[0];")
        assert esp(c, cal) == 0.0

    def test_permutation_invariant_and_bounded(self, cal8):
        rng = np.random.default_rng(0)
        ops = [GateOp("x", (int(q),)) for q in rng.integers(0, 8, size=6)]
        ops += [GateOp("cx", (0, 1)), GateOp("cz", (2, 3))]
        base = CompiledCircuit(8, 8, tuple(range(8)), tuple(ops), {0: 0})
        value = esp(base, cal8)
        assert value <= 1.0
        for _ in range(5):
            perm = list(rng.permutation(len(ops)))
            c = CompiledCircuit(8, 8, tuple(range(8)), tuple(ops[i] for i in perm), {0: 0})
            assert esp(c, cal8) == pytest.approx(value, abs=1e-15)

    def test_swap_segment_uses_template_gates(self, cal2):
        c = parse_qasm("qreg q[2]; swap q[0], q[1];")
        expected = (1.0 - cal2.gates[("cz", (0, 1))].error_rate) ** 3
        for q, sx_count in ((0, 2), (1, 4)):  # qubit 1 is the CNOT target twice
            expected *= (1.0 - cal2.gates[("sx", (q,))].error_rate) ** sx_count
        assert esp(c, cal2) == pytest.approx(expected, rel=1e-12)

    def test_missing_gate_raises(self, cal2):
        c = CompiledCircuit(2, 2, (0, 1), (GateOp("cphase", (0, 1)),), {})
        with pytest.raises(MissingGateCal):
            esp(c, cal2)


class TestDistSimilarity:
    def test_identical(self):
        d = Distribution({"01": 0.5, "10": 0.5})
        assert dist_similarity(d, d) == 1.0

    def test_disjoint(self):
        assert dist_similarity(Distribution({"0": 1.0}), Distribution({"1": 1.0})) == pytest.approx(0.0, abs=1e-12)

    def test_closed_form_value(self):
        p = Distribution({"0": 1.0})
        q = Distribution({"0": 0.5, "1": 0.5})
        expected = 1.0 - math.sqrt(1.0 - math.sqrt(0.5))
        assert dist_similarity(p, q) == pytest.approx(expected, abs=1e-12)
        assert dist_similarity(p, q) == pytest.approx(0.4588, abs=1e-4)


class TestScoreAll:
    def test_execution_free_metrics(self, cal2):
        c = parse_qasm("qreg q[2]; h q[0]; cx q[0], q[1]; measure q[0] -> c[0];")
        names = [m.metric for m in score_all(c, cal2)]
        assert names == ["proxy_fidelity", "esp", "gate_count", "depth"]

    def test_with_oracle_results(self, cal2):
        c = parse_qasm(
            "qreg q[2]; h q[0]; cx q[0], q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];"
        )
        results = compute_oracle_results(c, cal2)
        metrics = {m.metric: m for m in score_all(c, cal2, results)}
        assert set(metrics) == {
            "proxy_fidelity",
            "esp",
            "gate_count",
            "depth",
            "state_fidelity",
            "dist_similarity",
            "success_prob",
        }
        assert all(m.available for m in metrics.values())
        assert metrics["gate_count"].higher_is_better is False
        assert metrics["depth"].higher_is_better is False
        assert metrics["proxy_fidelity"].higher_is_better is True

    def test_unmeasured_flags_distribution_metrics(self, cal2):
        c = parse_qasm("qreg q[2]; h q[0]; cx q[0], q[1];")
        results = compute_oracle_results(c, cal2)
        metrics = {m.metric: m for m in score_all(c, cal2, results)}
        assert not metrics["dist_similarity"].available
        assert not metrics["success_prob"].available
        assert metrics["state_fidelity"].available

    def test_empty_circuit(self, cal2):
        c = CompiledCircuit(2, 2, (0, 1), (), {0: 0})
        metrics = {m.metric: m for m in score_all(c, cal2)}
        assert metrics["gate_count"].value == 0.0
        assert metrics["depth"].value == 0.0
        assert metrics["esp"].value == pytest.approx(1.0 - cal2.qubits[0].readout_error)

    def test_reserved_ml_direction(self):
        assert METRIC_DIRECTIONS["ml"] is True

    def test_csv_export(self, cal2):
        c = parse_qasm("qreg q[1]; x q[0];")
        text = metrics_csv([("c0", score_all(c, cal2))])
        lines = text.splitlines()
        assert lines[0] == "circuit_id,metric,value,higher_is_better,available"
        assert len(lines) == 5


class TestTargets:
    def test_single_basis_state(self):
        assert basis_targets(Distribution({"101": 1.0})) == ("101",)

    def test_two_basis_states(self):
        assert basis_targets(Distribution({"000": 0.5, "111": 0.5})) == ("000", "111")

    def test_spread_support_unavailable(self):
        d = Distribution({f"{i:02b}": 0.25 for i in range(4)})
        assert basis_targets(d) is None


class TestFidelityVsSuccessProbability:
    def test_fidelity_dominates_success_for_basis_ideal(self):
        # for circuits whose ideal output is one basis state, the quantum
        # overlap never undercuts the post-readout success probability by
        # more than coherent corrections allow
        for seed in range(4):
            cal = gen_calibration(5, seed=31 + seed)
            for circuit in (
                gen_bv_circuit("101"),
                gen_id_circuit(3, 4, seed=seed),
            ):
                ideal_dm, ideal_dist = simulate_ideal(circuit)
                noisy_dm, noisy_dist = simulate_noisy(circuit, cal)
                targets = basis_targets(ideal_dist)
                assert targets is not None and len(targets) == 1
                fidelity = state_fidelity(ideal_dm, noisy_dm)
                success = sum(noisy_dist.get(t) for t in targets)
                assert fidelity >= success - 1e-10
