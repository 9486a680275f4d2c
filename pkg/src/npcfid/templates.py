"""Native-gate realization of routing SWAPs, configured as data.

A SWAP segment expands to three CNOTs in alternating direction; each CNOT is
realized as a native-gate sequence (default: single-qubit rz/sx frames around
a cz, matching cz-based superconducting gate sets).  Other backends can
supply their own JSON template with the same structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .circuit_ir import GateOp
from .errors import SchemaError

_ROLES = ("control", "target", "both")


@dataclass(frozen=True)
class TemplateStep:
    gate: str
    on: str  # control | target | both
    params: tuple[float, ...]


@dataclass(frozen=True)
class SwapTemplate:
    name: str
    cnot: tuple[TemplateStep, ...]
    swap_order: tuple[tuple[str, str], ...]  # (control role, target role) per CNOT


def parse_template(text: str) -> SwapTemplate:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected object")
    steps = []
    for i, step in enumerate(raw.get("cnot", [])):
        path = f"cnot[{i}]"
        if not isinstance(step, dict) or "gate" not in step or "on" not in step:
            raise SchemaError(path, "expected object with 'gate' and 'on'")
        if step["on"] not in _ROLES:
            raise SchemaError(f"{path}.on", f"expected one of {_ROLES}")
        params = step.get("params", [])
        if not isinstance(params, list):
            raise SchemaError(f"{path}.params", "expected list")
        steps.append(TemplateStep(step["gate"], step["on"], tuple(float(p) for p in params)))
    if not steps:
        raise SchemaError("cnot", "template defines no steps")
    order = []
    for i, pair in enumerate(raw.get("swap_order", [])):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or set(pair) != {"a", "b"}
        ):
            raise SchemaError(f"swap_order[{i}]", "expected a permutation of ['a', 'b']")
        order.append((pair[0], pair[1]))
    if not order:
        raise SchemaError("swap_order", "template defines no CNOT order")
    return SwapTemplate(str(raw.get("name", "")), tuple(steps), tuple(order))


@lru_cache(maxsize=1)
def default_template() -> SwapTemplate:
    text = resources.files("npcfid.data").joinpath("swap_template.json").read_text()
    return parse_template(text)


def load_template(path: str | None) -> SwapTemplate:
    if path is None:
        return default_template()
    with open(path, encoding="utf-8") as fh:
        return parse_template(fh.read())


def expand_cnot_gates(control: int, target: int, template: SwapTemplate) -> list[GateOp]:
    ops = []
    for step in template.cnot:
        if step.on == "control":
            qubits = (control,)
        elif step.on == "target":
            qubits = (target,)
        else:
            qubits = (control, target)
        ops.append(GateOp(step.gate, qubits, step.params))
    return ops


def expand_swap_gates(a: int, b: int, template: SwapTemplate | None = None) -> list[GateOp]:
    """Native-gate sequence realizing SWAP(a, b) under the template."""
    template = template or default_template()
    roles = {"a": a, "b": b}
    ops = []
    for control_role, target_role in template.swap_order:
        ops.extend(expand_cnot_gates(roles[control_role], roles[target_role], template))
    return ops
