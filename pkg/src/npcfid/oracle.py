"""Desk-scale density-matrix simulator used as ground truth.

States are dense 2^n x 2^n complex matrices, capped at 8 qubits by default.
Basis convention: bit q of a computational-basis index is qubit q, and
bitstrings render most-significant-qubit first (index 0b110 on three qubits
prints as "110" with qubit 2 leftmost).

Channel realizations:
  * depolarizing on a qubit subset replaces that subset's marginal with the
    maximally mixed state at weight p;
  * thermal relaxation composes amplitude-damping Kraus operators
    (gamma = 1 - e^{-t/T1}, cold bath) with pure dephasing chosen so the
    transverse Bloch components contract by exactly e^{-t/T2} (requires
    T2 <= 2*T1);
  * readout error mixes each outcome with its bit-flipped neighbor on the
    classical distribution only.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .calibration import Calibration, lookup_gate
from .circuit_ir import CompiledCircuit, SwapSegment, final_layout
from .errors import DimensionMismatch, DomainError, TooLarge, UnknownUnitary
from .templates import SwapTemplate, default_template, expand_swap_gates

DEFAULT_CAP = 8

_HERMITIAN_ATOL = 1e-10
_TRACE_ATOL = 1e-10
_EIG_FLOOR = -1e-9


@dataclass
class DensityMatrix:
    n: int
    data: np.ndarray

    @classmethod
    def ground_state(cls, n: int) -> "DensityMatrix":
        dim = 1 << n
        data = np.zeros((dim, dim), dtype=complex)
        data[0, 0] = 1.0
        return cls(n, data)

    @classmethod
    def from_statevector(cls, vec: np.ndarray) -> "DensityMatrix":
        vec = np.asarray(vec, dtype=complex).ravel()
        n = int(round(math.log2(vec.size)))
        if 1 << n != vec.size:
            raise DimensionMismatch(f"statevector length {vec.size} is not a power of 2")
        return cls(n, np.outer(vec, vec.conj()))

    def validate(self) -> None:
        if self.data.shape != (1 << self.n, 1 << self.n):
            raise DimensionMismatch("matrix shape inconsistent with qubit count")
        if not np.allclose(self.data, self.data.conj().T, atol=_HERMITIAN_ATOL):
            raise DomainError("density matrix not Hermitian")
        if abs(np.trace(self.data).real - 1.0) > _TRACE_ATOL:
            raise DomainError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(self.data).min() < _EIG_FLOOR:
            raise DomainError("density matrix has a significantly negative eigenvalue")

    def bloch(self) -> "BlochVector":
        if self.n != 1:
            raise DimensionMismatch("Bloch vector requires a single-qubit state")
        rho = self.data
        return BlochVector(
            x=float(np.real(rho[0, 1] + rho[1, 0])),
            y=float(np.real(1j * (rho[0, 1] - rho[1, 0]))),
            z=float(np.real(rho[0, 0] - rho[1, 1])),
        )


@dataclass(frozen=True, slots=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1.0 + 1e-10:
            raise DomainError(f"Bloch vector norm {self.norm()} exceeds 1")

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def to_density_matrix(self) -> DensityMatrix:
        data = 0.5 * np.array(
            [[1.0 + self.z, self.x - 1j * self.y], [self.x + 1j * self.y, 1.0 - self.z]],
            dtype=complex,
        )
        return DensityMatrix(1, data)


@dataclass
class Distribution:
    probs: dict[str, float]
    width: int = field(default=0)

    def __post_init__(self):
        if self.width == 0 and self.probs:
            self.width = len(next(iter(self.probs)))

    def validate(self) -> None:
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"probabilities sum to {total}, not 1")
        if any(p < -1e-12 for p in self.probs.values()):
            raise DomainError("negative probability")
        if any(len(k) != self.width for k in self.probs):
            raise DimensionMismatch("bitstring width inconsistent")

    def get(self, key: str) -> float:
        return self.probs.get(key, 0.0)


# ---------------------------------------------------------------------------
# Gate unitaries
# ---------------------------------------------------------------------------

_SQ2 = 1.0 / math.sqrt(2.0)
_FIXED_GATES = {
    "id": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "sx": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    # two-qubit gates: first listed qubit is the high bit of the 4x4 index
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def gate_unitary(name: str, params: Sequence[float] = ()) -> np.ndarray:
    if name in _FIXED_GATES:
        return _FIXED_GATES[name]
    if name in ("rx", "ry", "rz", "rzz"):
        if len(params) != 1:
            raise DomainError(f"gate {name!r} expects 1 parameter, got {len(params)}")
        theta = params[0]
        c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
        if name == "rx":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if name == "ry":
            return np.array([[c, -s], [s, c]], dtype=complex)
        if name == "rz":
            return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])
        return np.diag(
            [
                np.exp(-1j * theta / 2),
                np.exp(1j * theta / 2),
                np.exp(1j * theta / 2),
                np.exp(-1j * theta / 2),
            ]
        )
    raise UnknownUnitary(name)


_embed_cache: dict[tuple, np.ndarray] = {}


def _embed(u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Expand a 1- or 2-qubit unitary to the full 2^n register.  The first
    listed qubit supplies the high bit of the small matrix index."""
    dim = 1 << n
    k = len(qubits)
    U = np.zeros((dim, dim), dtype=complex)
    mask = 0
    for q in qubits:
        mask |= 1 << q
    for col in range(dim):
        sub_in = 0
        for q in qubits:
            sub_in = (sub_in << 1) | ((col >> q) & 1)
        base = col & ~mask
        for sub_out in range(1 << k):
            amp = u[sub_out, sub_in]
            if amp == 0:
                continue
            row = base
            for j, q in enumerate(qubits):
                row |= ((sub_out >> (k - 1 - j)) & 1) << q
            U[row, col] = amp
    return U


def _embedded_unitary(name, params, qubits, n) -> np.ndarray:
    key = (name, tuple(params), tuple(qubits), n)
    cached = _embed_cache.get(key)
    if cached is None:
        cached = _embed(gate_unitary(name, params), tuple(qubits), n)
        if len(_embed_cache) > 4096:
            _embed_cache.clear()
        _embed_cache[key] = cached
    return cached


def apply_unitary(dm: DensityMatrix, gate) -> DensityMatrix:
    """Conjugate the state by the gate's unitary: rho -> U rho U^dagger."""
    U = _embedded_unitary(gate.name, gate.params, gate.qubits, dm.n)
    return DensityMatrix(dm.n, U @ dm.data @ U.conj().T)


# ---------------------------------------------------------------------------
# Noise channels
# ---------------------------------------------------------------------------


def _with_qubit_order(mat: np.ndarray, order: Sequence[int], n: int) -> np.ndarray:
    """Reindex a density matrix whose bit position j currently holds qubit
    order[j] into canonical ordering (bit q = qubit q)."""
    T = mat.reshape([2] * (2 * n))
    src = [0] * (2 * n)
    for j, q in enumerate(order):
        src[n - 1 - q] = n - 1 - j
        src[2 * n - 1 - q] = 2 * n - 1 - j
    return T.transpose(src).reshape(mat.shape)


def apply_depolarizing(dm: DensityMatrix, qubits: Sequence[int], p: float) -> DensityMatrix:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"depolarizing probability {p} outside [0, 1]")
    qubits = sorted(set(qubits))
    if any(not 0 <= q < dm.n for q in qubits):
        raise DimensionMismatch("depolarized qubit outside register")
    k = len(qubits)
    if p == 0.0:
        return DensityMatrix(dm.n, dm.data.copy())
    rest = [q for q in range(dm.n) if q not in qubits]
    if not rest:
        dim = 1 << dm.n
        mixed = np.eye(dim, dtype=complex) / dim * np.trace(dm.data)
    else:
        tau = partial_trace(dm, rest).data
        mixed = np.kron(np.eye(1 << k, dtype=complex) / (1 << k), tau)
        mixed = _with_qubit_order(mixed, rest + qubits, dm.n)
    return DensityMatrix(dm.n, (1.0 - p) * dm.data + p * mixed)


def _apply_single_qubit_kraus(
    rho: np.ndarray, n: int, q: int, kraus: Iterable[np.ndarray]
) -> np.ndarray:
    a = 1 << (n - 1 - q)
    b = 1 << q
    T = rho.reshape(a, 2, b, a, 2, b)
    out = np.zeros_like(T)
    for K in kraus:
        out += np.einsum("ix,axbcyd,jy->aibcjd", K, T, K.conj())
    return out.reshape(rho.shape)


def thermal_kraus(t: float, t1: float, t2: float) -> list[np.ndarray]:
    """Kraus operators for relaxation of duration t: amplitude damping toward
    the ground state composed with the residual pure dephasing."""
    if t < 0:
        raise DomainError("duration must be >= 0")
    if t1 <= 0 or t2 <= 0:
        raise DomainError("t1 and t2 must be positive")
    dephase_rate = 1.0 / t2 - 0.5 / t1
    if dephase_rate < -1e-9 / t1:
        raise DomainError(f"t2 {t2} exceeds 2*t1 {2 * t1}; no CPTP realization")
    dephase_rate = max(dephase_rate, 0.0)
    gamma = 1.0 - math.exp(-t / t1)
    lam = 1.0 - math.exp(-2.0 * t * dephase_rate)
    ad0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    ad1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    pd0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - lam)]], dtype=complex)
    pd1 = np.array([[0.0, 0.0], [0.0, math.sqrt(lam)]], dtype=complex)
    # compose: K = pd_j @ ad_i
    return [pd @ ad for ad in (ad0, ad1) for pd in (pd0, pd1)]


def apply_thermal(
    dm: DensityMatrix, qubit: int, t: float, t1: float, t2: float
) -> DensityMatrix:
    if not 0 <= qubit < dm.n:
        raise DimensionMismatch("qubit outside register")
    kraus = thermal_kraus(t, t1, t2)
    return DensityMatrix(dm.n, _apply_single_qubit_kraus(dm.data, dm.n, qubit, kraus))


def apply_readout_flip(dist: Distribution, bit: int, e: float) -> Distribution:
    """Mix each bitstring's mass with its neighbor differing in the given bit
    (bit 0 is the rightmost character)."""
    if not 0.0 <= e <= 1.0:
        raise DomainError(f"readout error {e} outside [0, 1]")
    if not 0 <= bit < dist.width:
        raise DimensionMismatch(f"bit {bit} outside width {dist.width}")
    pos = dist.width - 1 - bit
    out: dict[str, float] = {}
    for key, prob in dist.probs.items():
        flipped = key[:pos] + ("1" if key[pos] == "0" else "0") + key[pos + 1 :]
        out[key] = out.get(key, 0.0) + (1.0 - e) * prob
        out[flipped] = out.get(flipped, 0.0) + e * prob
    return Distribution({k: v for k, v in out.items() if v > 0.0}, dist.width)


# ---------------------------------------------------------------------------
# State functionals
# ---------------------------------------------------------------------------


def _clipped_eigvals(evals: np.ndarray) -> np.ndarray:
    # eigenvalue dust of order eps * lambda_max blows up to sqrt(eps) under a
    # square root; zero it out relative to the largest eigenvalue
    floor = 1e-13 * max(float(evals.max()), 0.0)
    return np.where(evals > floor, evals, 0.0)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    evals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    evals = _clipped_eigvals(evals)
    return (vecs * np.sqrt(evals)) @ vecs.conj().T


def trace_inner(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.n != b.n:
        raise DimensionMismatch("states have different qubit counts")
    return float(np.real(np.trace(a.data @ b.data)))


def state_fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2; reduces to the trace
    inner product when either state is pure."""
    if a.n != b.n:
        raise DimensionMismatch("states have different qubit counts")
    sq = _psd_sqrt(a.data)
    inner = sq @ b.data @ sq
    evals = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    evals = _clipped_eigvals(evals)
    return float(np.sum(np.sqrt(evals)) ** 2)


def partial_trace(dm: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out all qubits not listed; kept qubits retain their relative
    order (ascending original index)."""
    keep = sorted(set(keep))
    if not keep:
        raise DimensionMismatch("keep must be nonempty")
    if any(not 0 <= q < dm.n for q in keep):
        raise DimensionMismatch("kept qubit outside register")
    n = dm.n
    letters = string.ascii_letters
    ket = {}
    bra = {}
    next_letter = 0
    for q in range(n):
        if q in keep:
            ket[q] = letters[next_letter]
            bra[q] = letters[next_letter + 1]
            next_letter += 2
        else:
            ket[q] = bra[q] = letters[next_letter]
            next_letter += 1
    in_sub = "".join(ket[q] for q in reversed(range(n))) + "".join(
        bra[q] for q in reversed(range(n))
    )
    out_sub = "".join(ket[q] for q in reversed(keep)) + "".join(
        bra[q] for q in reversed(keep)
    )
    T = dm.data.reshape([2] * (2 * n))
    reduced = np.einsum(f"{in_sub}->{out_sub}", T)
    k = len(keep)
    return DensityMatrix(k, reduced.reshape(1 << k, 1 << k))


def negativity(dm: DensityMatrix, partition: Sequence[int]) -> float:
    """Entanglement negativity across the given bipartition: the summed
    magnitude of negative partial-transpose eigenvalues."""
    part = sorted(set(partition))
    if dm.n < 2:
        raise DimensionMismatch("negativity needs at least 2 qubits")
    if not part or len(part) >= dm.n:
        raise DimensionMismatch("partition must be a nonempty proper subset")
    if any(not 0 <= q < dm.n for q in part):
        raise DimensionMismatch("partition qubit outside register")
    n = dm.n
    T = dm.data.reshape([2] * (2 * n))
    axes = list(range(2 * n))
    for q in part:
        axes[n - 1 - q], axes[2 * n - 1 - q] = axes[2 * n - 1 - q], axes[n - 1 - q]
    pt = T.transpose(axes).reshape(dm.data.shape)
    evals = np.linalg.eigvalsh((pt + pt.conj().T) / 2)
    return float((np.sum(np.abs(evals)) - 1.0) / 2.0)


def hellinger(p: Distribution, q: Distribution) -> float:
    if p.width != q.width:
        raise DimensionMismatch("distributions have different widths")
    keys = set(p.probs) | set(q.probs)
    acc = 0.0
    for key in keys:
        acc += (math.sqrt(p.get(key)) - math.sqrt(q.get(key))) ** 2
    return math.sqrt(acc) / math.sqrt(2.0)


def success_probability(p: Distribution, targets: Iterable[str]) -> float:
    total = 0.0
    for t in targets:
        if len(t) != p.width:
            raise DimensionMismatch(f"target {t!r} has wrong width")
        total += p.get(t)
    return total


def bit_success_probabilities(dist: Distribution, ideal: str) -> list[float]:
    """Per classical bit, the probability that the sampled bit matches the
    ideal bitstring (bit 0 = rightmost character)."""
    if len(ideal) != dist.width:
        raise DimensionMismatch("ideal bitstring has wrong width")
    out = []
    for bit in range(dist.width):
        pos = dist.width - 1 - bit
        out.append(sum(p for k, p in dist.probs.items() if k[pos] == ideal[pos]))
    return out


# ---------------------------------------------------------------------------
# Circuit simulation
# ---------------------------------------------------------------------------


def _measurement_distribution(dm: DensityMatrix, circuit: CompiledCircuit) -> Distribution | None:
    if not circuit.measured:
        return None
    layout = final_layout(circuit)
    width = max(circuit.measured.values()) + 1
    mapping = [
        (clbit, layout.physical(logical)) for logical, clbit in circuit.measured.items()
    ]
    probs: dict[str, float] = {}
    diag = np.real(np.diag(dm.data))
    for index, mass in enumerate(diag):
        if mass <= 0.0:
            continue
        chars = ["0"] * width
        for clbit, physical in mapping:
            if (index >> physical) & 1:
                chars[width - 1 - clbit] = "1"
        key = "".join(chars)
        probs[key] = probs.get(key, 0.0) + float(mass)
    return Distribution(probs, width)


def _apply_noisy_gate(dm: DensityMatrix, op, cal: Calibration) -> DensityMatrix:
    dm = apply_unitary(dm, op)
    noise = lookup_gate(cal, op.name, op.qubits)
    if noise.p > 0.0:
        dm = apply_depolarizing(dm, op.qubits, noise.p)
    if noise.duration > 0.0:
        for q in op.qubits:
            qc = cal.qubit(q)
            dm = apply_thermal(dm, q, noise.duration, qc.t1, qc.t2_clamped)
    return dm


def simulate_ideal(
    circuit: CompiledCircuit,
    template: SwapTemplate | None = None,
    cap: int = DEFAULT_CAP,
) -> tuple[DensityMatrix, Distribution | None]:
    if circuit.num_physical > cap:
        raise TooLarge(circuit.num_physical, cap)
    template = template or default_template()
    dm = DensityMatrix.ground_state(circuit.num_physical)
    for item in circuit.schedule():
        if isinstance(item, SwapSegment):
            for gate in expand_swap_gates(item.qubits[0], item.qubits[1], template):
                dm = apply_unitary(dm, gate)
        else:
            dm = apply_unitary(dm, item[1])
    return dm, _measurement_distribution(dm, circuit)


def simulate_noisy(
    circuit: CompiledCircuit,
    cal: Calibration,
    template: SwapTemplate | None = None,
    cap: int = DEFAULT_CAP,
) -> tuple[DensityMatrix, Distribution | None]:
    """Noisy evolution applying, per op, the ideal unitary followed by its
    depolarizing channel and per-qubit thermal channels with the same
    parameters the analytic path records; readout errors flip the classical
    distribution after measurement."""
    if circuit.num_physical > cap:
        raise TooLarge(circuit.num_physical, cap)
    template = template or default_template()
    dm = DensityMatrix.ground_state(circuit.num_physical)
    for item in circuit.schedule():
        if isinstance(item, SwapSegment):
            for gate in expand_swap_gates(item.qubits[0], item.qubits[1], template):
                dm = _apply_noisy_gate(dm, gate, cal)
        else:
            dm = _apply_noisy_gate(dm, item[1], cal)
    dist = _measurement_distribution(dm, circuit)
    if dist is not None:
        layout = final_layout(circuit)
        for logical, clbit in sorted(circuit.measured.items()):
            e = cal.qubit(layout.physical(logical)).readout_error
            if e > 0.0:
                dist = apply_readout_flip(dist, clbit, e)
    return dm, dist


# ---------------------------------------------------------------------------
# Random states
# ---------------------------------------------------------------------------


def haar_random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure statevector: normalized complex Gaussian."""
    dim = 1 << n
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def random_density_matrix(n: int, rng: np.random.Generator) -> DensityMatrix:
    """Random mixed state rho = G G^dagger / Tr(G G^dagger)."""
    dim = 1 << n
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(n, rho / np.trace(rho))
