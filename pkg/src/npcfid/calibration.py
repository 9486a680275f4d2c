"""Hardware calibration snapshots and error-rate-to-channel conversion.

Loader conventions: T1/T2 arrive in microseconds, gate durations in
nanoseconds (explicit unit keys in the JSON schema); everything is stored in
seconds internally.

Conversion note: a reported gate error rate r maps to the depolarizing
probability p = r * d / (d - 1), so that r = 0 gives the identity channel
(p = 0) and the average-infidelity relation r = p * (d - 1) / d holds.  Some
sources print this relation in the survival form 1 - p * (d - 1) / d = 1 - r;
reading that as a direct formula for p would give p -> 1 for a perfect gate,
which contradicts the identity-channel limit, so this package uses the
physically consistent direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import DomainError, MissingGateCal, SchemaError


@dataclass(frozen=True, slots=True)
class QubitCal:
    """Per-qubit relaxation times (seconds) and readout error probability."""

    t1: float
    t2: float
    readout_error: float

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise ValueError("t1 and t2 must be positive")
        if not 0.0 <= self.readout_error <= 1.0:
            raise ValueError("readout_error must be in [0, 1]")

    @property
    def t2_clamped(self) -> float:
        """T2 capped at 2*T1, the largest value a physical (CPTP) thermal
        channel admits.  Analytic updates use the raw value; the
        density-matrix oracle needs the clamped one."""
        return min(self.t2, 2.0 * self.t1)


@dataclass(frozen=True, slots=True)
class GateCal:
    name: str
    qubits: tuple[int, ...]
    error_rate: float
    duration: float  # seconds

    def __post_init__(self):
        d = 2 ** len(self.qubits)
        bound = (d - 1) / d
        if not 0.0 <= self.error_rate <= bound + 1e-12:
            raise ValueError(
                f"error_rate {self.error_rate} outside [0, {bound}] for a "
                f"{len(self.qubits)}-qubit gate"
            )
        if not self.duration >= 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True, slots=True)
class GateNoise:
    """Channel parameters derived from one calibrated gate."""

    p: float
    duration: float
    qubit_times: tuple[tuple[float, float], ...]  # (t1, t2) per acting qubit


@dataclass(frozen=True)
class Calibration:
    qubits: tuple[QubitCal, ...]
    gates: dict[tuple[str, tuple[int, ...]], GateCal]
    snapshot_id: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def has_gate(self, name: str, qubits) -> bool:
        key = (name, tuple(qubits))
        if key in self.gates:
            return True
        return len(key[1]) == 2 and (name, key[1][::-1]) in self.gates

    def gate(self, name: str, qubits) -> GateCal:
        """Fetch an entry; a reversed two-qubit pair falls back to the
        forward entry (symmetric gates)."""
        key = (name, tuple(qubits))
        entry = self.gates.get(key)
        if entry is None and len(key[1]) == 2:
            entry = self.gates.get((name, key[1][::-1]))
        if entry is None:
            raise MissingGateCal(name, qubits)
        return entry

    def qubit(self, index: int) -> QubitCal:
        if not 0 <= index < len(self.qubits):
            raise MissingGateCal("qubit", (index,))
        return self.qubits[index]


def depolarizing_param(error_rate: float, dim: int) -> float:
    """Depolarizing probability for a reported error rate on a gate of
    Hilbert-space dimension dim (2 or 4)."""
    if dim not in (2, 4):
        raise DomainError(f"dim must be 2 or 4, got {dim}")
    if error_rate < 0:
        raise DomainError(f"error_rate must be >= 0, got {error_rate}")
    p = error_rate * dim / (dim - 1)
    if p > 1.0 + 1e-12:
        raise DomainError(
            f"error_rate {error_rate} exceeds ({dim - 1})/{dim}; derived p > 1"
        )
    return min(p, 1.0)


def lookup_gate(cal: Calibration, name: str, qubits) -> GateNoise:
    """Channel parameters for one gate application: depolarizing probability,
    duration, and each acting qubit's (t1, t2)."""
    qubits = tuple(qubits)
    entry = cal.gate(name, qubits)
    p = depolarizing_param(entry.error_rate, 2 ** len(qubits))
    times = tuple((cal.qubit(q).t1, cal.qubit(q).t2) for q in qubits)
    return GateNoise(p=p, duration=entry.duration, qubit_times=times)


def _num(obj, key, path, minimum=None, maximum=None):
    if key not in obj:
        raise SchemaError(path, f"missing key {key!r}")
    value = obj[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", "expected number")
    value = float(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{path}.{key}: {value} below {minimum}")
    if maximum is not None and value > maximum:
        raise ValueError(f"{path}.{key}: {value} above {maximum}")
    return value


def load_calibration(text: str) -> Calibration:
    """Parse a calibration snapshot from its JSON representation.

    T2 values above the physical 2*T1 bound load with a recorded warning;
    the raw value is kept and `t2_clamped` exposes the capped one.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected object")

    snapshot_id = raw.get("snapshot_id", "")
    if not isinstance(snapshot_id, str):
        raise SchemaError("snapshot_id", "expected string")

    warnings = []
    qubits = []
    if "qubits" not in raw or not isinstance(raw["qubits"], list):
        raise SchemaError("$", "missing or invalid 'qubits' array")
    for i, q in enumerate(raw["qubits"]):
        path = f"qubits[{i}]"
        if not isinstance(q, dict):
            raise SchemaError(path, "expected object")
        t1 = _num(q, "t1_us", path, minimum=1e-12) * 1e-6
        t2 = _num(q, "t2_us", path, minimum=1e-12) * 1e-6
        readout = _num(q, "readout_error", path, minimum=0.0, maximum=1.0)
        if t2 > 2.0 * t1:
            warnings.append(
                f"{path}: t2 {t2 * 1e6:.3f}us exceeds 2*t1; oracle will clamp"
            )
        qubits.append(QubitCal(t1=t1, t2=t2, readout_error=readout))

    gates = {}
    if "gates" not in raw or not isinstance(raw["gates"], list):
        raise SchemaError("$", "missing or invalid 'gates' array")
    for i, g in enumerate(raw["gates"]):
        path = f"gates[{i}]"
        if not isinstance(g, dict):
            raise SchemaError(path, "expected object")
        if "name" not in g or not isinstance(g["name"], str):
            raise SchemaError(path, "missing or invalid 'name'")
        qlist = g.get("qubits")
        if (
            not isinstance(qlist, list)
            or not 1 <= len(qlist) <= 2
            or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in qlist)
        ):
            raise SchemaError(f"{path}.qubits", "expected 1 or 2 integers >= 0")
        if any(x >= len(qubits) for x in qlist):
            raise SchemaError(f"{path}.qubits", "gate references unlisted qubit")
        error_rate = _num(g, "error_rate", path, minimum=0.0)
        duration = _num(g, "duration_ns", path, minimum=0.0) * 1e-9
        try:
            entry = GateCal(g["name"], tuple(qlist), error_rate, duration)
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from exc
        gates[(entry.name, entry.qubits)] = entry

    return Calibration(
        qubits=tuple(qubits),
        gates=gates,
        snapshot_id=snapshot_id,
        warnings=tuple(warnings),
    )


def serialize_calibration(cal: Calibration) -> str:
    doc = {
        "snapshot_id": cal.snapshot_id,
        "qubits": [
            {
                "t1_us": q.t1 * 1e6,
                "t2_us": q.t2 * 1e6,
                "readout_error": q.readout_error,
            }
            for q in cal.qubits
        ],
        "gates": [
            {
                "name": g.name,
                "qubits": list(g.qubits),
                "error_rate": g.error_rate,
                "duration_ns": g.duration * 1e9,
            }
            for g in sorted(cal.gates.values(), key=lambda g: (g.name, g.qubits))
        ],
    }
    return json.dumps(doc, indent=2)
