import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from npcfid.analysis import (
    aad_r2,
    fig5_sweep,
    gen_bv_circuit,
    gen_calibration,
    gen_ghz_circuit,
    gen_id_circuit,
    gen_random_circuit,
    layout_variants,
    linear_fit_r2,
    noiseless_calibration,
    permute_layout,
    rank_layouts,
    run_id_decay,
    spearman_rho,
)
from npcfid.errors import DomainError, LengthMismatch
from npcfid.oracle import simulate_ideal


class TestSpearman:
    def test_identical_orderings(self):
        assert spearman_rho([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)

    def test_reversed(self):
        assert spearman_rho([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_textbook_value(self):
        assert spearman_rho([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            spearman_rho([1, 2], [1, 2, 3])
        with pytest.raises(LengthMismatch):
            spearman_rho([1], [1])

    @given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=12, unique=True))
    def test_symmetry_and_monotone_invariance(self, raw):
        xs = [v / 100.0 for v in raw]
        rng = np.random.default_rng(0)
        ys = list(rng.permutation(xs))
        assert spearman_rho(xs, ys) == pytest.approx(spearman_rho(ys, xs), abs=1e-12)
        transformed = [math.exp(0.3 * y) for y in ys]  # strictly monotone map
        assert spearman_rho(xs, transformed) == pytest.approx(
            spearman_rho(xs, ys), abs=1e-12
        )

    def test_constant_input_flagged(self):
        assert math.isnan(spearman_rho([1.0, 1.0, 1.0], [1, 2, 3]))


class TestAadR2:
    def test_perfect_estimates(self):
        res = aad_r2([(0.5, 0.5), (0.9, 0.9)])
        assert res.aad == 0.0
        assert res.r2 == pytest.approx(1.0)
        assert res.r2_defined

    def test_constant_offset(self):
        res = aad_r2([(0.6, 0.5), (0.8, 0.7), (1.0, 0.9)])
        assert res.aad == pytest.approx(0.1, abs=1e-12)

    def test_two_pair_example(self):
        res = aad_r2([(0.9, 1.0), (0.5, 0.4)])
        assert res.aad == pytest.approx(0.1, abs=1e-12)

    def test_degenerate_actuals_flagged(self):
        res = aad_r2([(0.5, 0.7), (0.9, 0.7)])
        assert not res.r2_defined
        assert math.isnan(res.r2)

    def test_too_few_pairs(self):
        with pytest.raises(LengthMismatch):
            aad_r2([(1.0, 1.0)])


class TestFig5Sweep:
    def test_depolarizing_endpoints(self):
        pts = fig5_sweep(math.pi / 2, "depolarizing", steps=101)
        assert len(pts) == 101
        assert pts[0].param == 0.0
        assert pts[0].negativity == pytest.approx(0.5, abs=1e-10)
        assert pts[0].proxy_fidelity == 1.0
        assert pts[-1].proxy_fidelity == pytest.approx(0.5)

    def test_initial_negativities(self):
        for theta, expected in ((math.pi / 8, 0.19), (math.pi / 4, 0.35), (math.pi / 2, 0.5)):
            pts = fig5_sweep(theta, "depolarizing", steps=5)
            assert pts[0].negativity == pytest.approx(expected, abs=0.005)

    def test_proxy_column_independent_of_theta(self):
        columns = [
            [p.proxy_fidelity for p in fig5_sweep(theta, "depolarizing", steps=21)]
            for theta in (math.pi / 8, math.pi / 4, math.pi / 2)
        ]
        assert columns[0] == columns[1] == columns[2]

    def test_thermal_monotonicity(self):
        pts = fig5_sweep(math.pi / 4, "thermal", steps=31)
        proxies = [p.proxy_fidelity for p in pts]
        negs = [p.negativity for p in pts]
        assert all(a > b for a, b in zip(proxies, proxies[1:]))
        assert all(a >= b - 1e-12 for a, b in zip(negs, negs[1:]))

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            fig5_sweep(0.0, "depolarizing")
        with pytest.raises(DomainError):
            fig5_sweep(1.0, "amplitude")
        with pytest.raises(DomainError):
            fig5_sweep(1.0, "thermal", steps=1)


class TestGenerators:
    def test_bv_ideal_output(self):
        c = gen_bv_circuit("101")
        _, dist = simulate_ideal(c)
        assert dist.get("101") == pytest.approx(1.0, abs=1e-10)
        dust = sum(p for k, p in dist.probs.items() if k != "101")
        assert dust < 1e-12

    def test_bv_rejects_bad_secret(self):
        with pytest.raises(DomainError):
            gen_bv_circuit("10a")

    def test_ghz_ideal_output(self):
        c = gen_ghz_circuit(3)
        _, dist = simulate_ideal(c)
        assert dist.get("000") == pytest.approx(0.5, abs=1e-10)
        assert dist.get("111") == pytest.approx(0.5, abs=1e-10)

    def test_id_circuit_returns_to_ground(self):
        for seed in (0, 1, 2):
            c = gen_id_circuit(2, 10, seed=seed)
            _, dist = simulate_ideal(c)
            assert dist.get("00") == pytest.approx(1.0, abs=1e-9)

    def test_random_circuit_deterministic(self):
        a = gen_random_circuit(4, 6, seed=9)
        b = gen_random_circuit(4, 6, seed=9)
        assert a == b
        c = gen_random_circuit(4, 6, seed=10)
        assert a != c

    def test_random_circuit_two_qubit_fraction(self):
        c = gen_random_circuit(8, 50, seed=1, two_qubit_prob=0.3)
        two = sum(1 for op in c.ops if len(op.qubits) == 2)
        assert 0.1 < two / len(c.ops) < 0.5


class TestLayoutVariants:
    def test_permute_preserves_logical_behavior(self):
        c = gen_bv_circuit("11")
        variant = permute_layout(c, [2, 0, 1], num_physical=4)
        assert variant.num_physical == 4
        assert variant.initial_layout == (2, 0, 1)
        _, base_dist = simulate_ideal(c)
        _, variant_dist = simulate_ideal(variant)
        for key in set(base_dist.probs) | set(variant_dist.probs):
            assert base_dist.get(key) == pytest.approx(variant_dist.get(key), abs=1e-10)

    def test_variants_distinct_and_deterministic(self):
        c = gen_random_circuit(3, 4, seed=2)
        va = layout_variants(c, 6, 5, seed=3)
        vb = layout_variants(c, 6, 5, seed=3)
        assert va == vb
        assert len({v.initial_layout for v in va}) == 5


class TestRankLayouts:
    def test_single_circuit_flagged(self, cal8):
        c = gen_random_circuit(3, 3, seed=4)
        result = rank_layouts([c], cal8, reference="oracle")
        assert result.circuit_ids == ["c0"]
        assert all(math.isnan(v) for v in result.rho_vs_reference.values())

    def test_identical_circuits_tie_flagged(self, cal8):
        c = gen_random_circuit(3, 3, seed=5)
        result = rank_layouts([c, c, c], cal8, reference="oracle")
        for metric, rho in result.rho_vs_reference.items():
            assert math.isnan(rho), metric
        # tie-break by index keeps rank vectors valid permutations
        for ranks in result.ranks.values():
            assert sorted(ranks) == [1, 2, 3]

    def test_ten_layouts_ranked(self, cal8):
        base = gen_random_circuit(4, 4, seed=6)
        variants = layout_variants(base, 8, 10, seed=7)
        result = rank_layouts(variants, cal8, reference="oracle")
        assert len(result.circuit_ids) == 10
        assert sorted(result.ranks["proxy_fidelity"]) == list(range(1, 11))
        assert not math.isnan(result.rho_vs_reference["proxy_fidelity"])
        again = rank_layouts(variants, cal8, reference="oracle")
        assert again.values == result.values
        assert again.ranks == result.ranks

    def test_no_reference(self, cal8):
        c0 = gen_random_circuit(3, 2, seed=8)
        c1 = gen_random_circuit(3, 5, seed=9)
        result = rank_layouts([c0, c1], cal8)
        assert result.reference is None
        assert result.rho_vs_reference == {}
        assert "state_fidelity" not in result.values


class TestIdDecayDriver:
    def test_rows_shape_and_decay(self):
        rows = run_id_decay(n=2, layer_counts=(1, 5, 9), seed=0)
        assert len(rows) == 6
        per_qubit = [r for r in rows if r["qubit"] == 0]
        assert per_qubit[0]["actual"] > per_qubit[-1]["actual"]
        assert per_qubit[0]["estimated"] > per_qubit[-1]["estimated"]


class TestLinearFit:
    def test_exact_line(self):
        slope, intercept, r2 = linear_fit_r2([1, 2, 3], [2.0, 4.0, 6.0])
        assert slope == pytest.approx(2.0)
        assert intercept == pytest.approx(0.0, abs=1e-12)
        assert r2 == pytest.approx(1.0)
