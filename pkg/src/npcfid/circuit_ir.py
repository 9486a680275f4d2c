"""Compiled-circuit data model, text/JSON parsers, and structural metrics.

A compiled circuit is an ordered list of native-gate operations on physical
qubits plus an initial logical-to-physical layout and a (partial) map from
logical qubits to classical readout bits.  Routing SWAPs are kept first-class:
a ``swap q[a], q[b];`` statement becomes a contiguous pair of single-qubit
marker ops tagged with a shared segment id, expanded into native gates only
where noise or unitaries are actually needed.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import (
    IndexOutOfRange,
    MissingGateCal,
    MissingReadoutCal,
    QasmSyntaxError,
    SchemaError,
    UnknownGate,
)

_GATE_NAME_RE = re.compile(r"[a-z][a-z0-9_]*$")


@dataclass(frozen=True, slots=True)
class SwapTag:
    """Marks an op as one half of a routing-SWAP segment."""

    segment: int
    partner: int


@dataclass(frozen=True, slots=True)
class GateOp:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    tag: SwapTag | None = None

    def __post_init__(self):
        if not 1 <= len(self.qubits) <= 2:
            raise ValueError(f"op {self.name!r} must act on 1 or 2 qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"op {self.name!r} has duplicate qubit operands")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"op {self.name!r} has negative qubit index")
        if any(not math.isfinite(p) for p in self.params):
            raise ValueError(f"op {self.name!r} has non-finite parameter")


@dataclass(frozen=True, slots=True)
class SwapSegment:
    """A matched pair of tagged ops, resolved to its two physical qubits."""

    first_index: int
    qubits: tuple[int, int]


# One entry of a circuit's execution schedule: either a plain op with its
# index, or a whole SWAP segment.
ScheduleItem = tuple[int, GateOp] | SwapSegment


@dataclass(frozen=True)
class CompiledCircuit:
    num_physical: int
    num_logical: int
    initial_layout: tuple[int, ...]
    ops: tuple[GateOp, ...]
    measured: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_logical > self.num_physical:
            raise ValueError("num_logical exceeds num_physical")
        if len(self.initial_layout) != self.num_logical:
            raise ValueError("initial_layout length must equal num_logical")
        if any(not 0 <= p < self.num_physical for p in self.initial_layout):
            raise ValueError("initial_layout entry out of range")
        if len(set(self.initial_layout)) != len(self.initial_layout):
            raise ValueError("initial_layout not injective")
        for op in self.ops:
            if any(q >= self.num_physical for q in op.qubits):
                raise ValueError(f"op {op.name!r} uses qubit beyond num_physical")
        for logical, clbit in self.measured.items():
            if not 0 <= logical < self.num_logical:
                raise ValueError(f"measured logical {logical} out of range")
            if clbit < 0:
                raise ValueError("classical bit index must be >= 0")
        if len(set(self.measured.values())) != len(self.measured):
            raise ValueError("measured maps two logical qubits to one classical bit")
        list(self.schedule())  # validates swap-segment pairing

    def schedule(self) -> Iterator[ScheduleItem]:
        """Walk ops in order, grouping tagged pairs into SwapSegments."""
        i = 0
        ops = self.ops
        while i < len(ops):
            op = ops[i]
            if op.tag is None:
                yield (i, op)
                i += 1
                continue
            if i + 1 >= len(ops) or ops[i + 1].tag is None:
                raise ValueError(f"unpaired swap tag at op {i}")
            nxt = ops[i + 1]
            if nxt.tag.segment != op.tag.segment:
                raise ValueError(f"swap segment {op.tag.segment} not contiguous")
            covered = set(op.qubits) | {op.tag.partner} | set(nxt.qubits) | {nxt.tag.partner}
            if len(covered) != 2:
                raise ValueError(
                    f"swap segment {op.tag.segment} must cover exactly two qubits"
                )
            a, b = op.qubits[0], op.tag.partner
            yield SwapSegment(first_index=i, qubits=(a, b))
            i += 2


class LayoutState:
    """Mutable logical<->physical residence map, exchanged by SWAP segments."""

    def __init__(self, initial: Sequence[int]):
        self.l2p = list(initial)
        self.p2l: dict[int, int] = {p: l for l, p in enumerate(initial)}

    def physical(self, logical: int) -> int:
        return self.l2p[logical]

    def logical(self, physical: int) -> int | None:
        return self.p2l.get(physical)

    def swap_physical(self, i: int, j: int) -> None:
        li, lj = self.p2l.get(i), self.p2l.get(j)
        if li is not None:
            self.l2p[li] = j
        if lj is not None:
            self.l2p[lj] = i
        if li is None:
            self.p2l.pop(j, None)
        else:
            self.p2l[j] = li
        if lj is None:
            self.p2l.pop(i, None)
        else:
            self.p2l[i] = lj

    def copy(self) -> "LayoutState":
        return LayoutState(self.l2p)


def final_layout(circuit: CompiledCircuit) -> LayoutState:
    """Residence map after all SWAP segments have been applied."""
    layout = LayoutState(circuit.initial_layout)
    for item in circuit.schedule():
        if isinstance(item, SwapSegment):
            layout.swap_physical(*item.qubits)
    return layout


# ---------------------------------------------------------------------------
# QASM-subset parser
# ---------------------------------------------------------------------------

_SYMBOLS = ("->", "[", "]", "(", ")", ",", ";", "+", "-", "*", "/")


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind  # ident | number | string | symbol | eof
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            tokens.append(_Token("symbol", "->", line, col))
            i += 2
            col += 2
            continue
        if c in "[](),;+-*/":
            tokens.append(_Token("symbol", c, line, col))
            i += 1
            col += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                raise QasmSyntaxError("closing quote", line, col)
            tokens.append(_Token("string", text[i + 1 : j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if (c.isascii() and c.isdigit()) or (
            c == "." and i + 1 < n and text[i + 1].isascii() and text[i + 1].isdigit()
        ):
            m = re.match(r"\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?", text[i:])
            lit = m.group(0)
            tokens.append(_Token("number", lit, line, col))
            i += len(lit)
            col += len(lit)
            continue
        if (c.isascii() and c.isalpha()) or c == "_":
            m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", text[i:])
            word = m.group(0)
            tokens.append(_Token("ident", word, line, col))
            i += len(word)
            col += len(word)
            continue
        raise QasmSyntaxError("statement", line, col, found=c)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _QasmParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.ops: list[GateOp] = []
        self.measured: dict[int, int] = {}
        self.layout: LayoutState | None = None
        self.segment_counter = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None, what: str = "") -> _Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            raise QasmSyntaxError(what or value or kind, tok.line, tok.col, found=tok.value)
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> CompiledCircuit:
        while self.peek().kind != "eof":
            self.statement()
        num = self.qreg[1] if self.qreg else 0
        return CompiledCircuit(
            num_physical=num,
            num_logical=num,
            initial_layout=tuple(range(num)),
            ops=tuple(self.ops),
            measured=self.measured,
        )

    def statement(self):
        tok = self.peek()
        if tok.kind != "ident":
            raise QasmSyntaxError("statement", tok.line, tok.col, found=tok.value)
        word = tok.value
        if word == "OPENQASM":
            self.advance()
            self.expect("number", what="version number")
            self.expect("symbol", ";")
        elif word == "include":
            # Tolerated extension: headers like include "qelib1.inc"; carry no
            # circuit content in this subset, so they are skipped.
            self.advance()
            self.expect("string", what="file name")
            self.expect("symbol", ";")
        elif word in ("qreg", "creg"):
            self.advance()
            name = self.expect("ident", what="register name").value
            self.expect("symbol", "[")
            size = int(self.expect("number", what="register size").value)
            self.expect("symbol", "]")
            self.expect("symbol", ";")
            if word == "qreg":
                if self.qreg is not None:
                    raise QasmSyntaxError("single qreg", tok.line, tok.col, found="second qreg")
                self.qreg = (name, size)
                self.layout = LayoutState(range(size))
            else:
                if self.creg is not None:
                    raise QasmSyntaxError("single creg", tok.line, tok.col, found="second creg")
                self.creg = (name, size)
        elif word == "barrier":
            # Barriers carry no noise channel and no depth: parse and discard.
            self.advance()
            while self.peek().kind != "eof" and self.peek().value != ";":
                self.advance()
            self.expect("symbol", ";")
        elif word == "measure":
            self.advance()
            q = self.qubit_ref()
            self.expect("symbol", "->")
            c = self.clbit_ref()
            self.expect("symbol", ";")
            logical = self.layout.logical(q)
            if c in self.measured.values() and self.measured.get(logical) != c:
                raise QasmSyntaxError(
                    "unused classical bit", tok.line, tok.col, found=f"c[{c}]"
                )
            self.measured[logical] = c
        elif word == "swap":
            self.advance()
            a = self.qubit_ref()
            self.expect("symbol", ",")
            b = self.qubit_ref()
            self.expect("symbol", ";")
            if a == b:
                raise QasmSyntaxError("distinct qubits", tok.line, tok.col, found=f"q[{a}]")
            seg = self.segment_counter
            self.segment_counter += 1
            self.ops.append(GateOp("swap", (a,), (), SwapTag(seg, b)))
            self.ops.append(GateOp("swap", (b,), (), SwapTag(seg, a)))
            self.layout.swap_physical(a, b)
        else:
            self.gate_statement()

    def gate_statement(self):
        tok = self.advance()
        name = tok.value
        if not _GATE_NAME_RE.match(name):
            raise UnknownGate(name, tok.line, tok.col)
        params: list[float] = []
        if self.peek().value == "(":
            self.advance()
            params.append(self.expression())
            while self.peek().value == ",":
                self.advance()
                params.append(self.expression())
            self.expect("symbol", ")")
        qubits = [self.qubit_ref()]
        if self.peek().value == ",":
            self.advance()
            qubits.append(self.qubit_ref())
        self.expect("symbol", ";")
        if len(set(qubits)) != len(qubits):
            raise QasmSyntaxError("distinct qubits", tok.line, tok.col, found=f"q[{qubits[0]}]")
        self.ops.append(GateOp(name, tuple(qubits), tuple(params)))

    def qubit_ref(self) -> int:
        tok = self.expect("ident", what="qubit reference")
        if self.qreg is None or tok.value != self.qreg[0]:
            raise QasmSyntaxError("declared quantum register", tok.line, tok.col, found=tok.value)
        self.expect("symbol", "[")
        itok = self.expect("number", what="qubit index")
        idx = int(itok.value)
        self.expect("symbol", "]")
        if idx >= self.qreg[1]:
            raise IndexOutOfRange(idx, self.qreg[1], itok.line, itok.col)
        return idx

    def clbit_ref(self) -> int:
        tok = self.expect("ident", what="classical register reference")
        self.expect("symbol", "[")
        itok = self.expect("number", what="classical bit index")
        idx = int(itok.value)
        self.expect("symbol", "]")
        # A declared creg bounds its indices; with no declaration the flat
        # register is open-ended (size inferred from use).
        if self.creg is not None:
            if tok.value != self.creg[0]:
                raise QasmSyntaxError("declared classical register", tok.line, tok.col, found=tok.value)
            if idx >= self.creg[1]:
                raise IndexOutOfRange(idx, self.creg[1], itok.line, itok.col)
        return idx

    # Parameter arithmetic: numbers, pi, + - * /, unary minus, parentheses.

    def expression(self) -> float:
        value = self.term()
        while self.peek().value in ("+", "-"):
            op = self.advance().value
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.peek().value in ("*", "/"):
            op = self.advance().value
            tok = self.peek()
            rhs = self.factor()
            if op == "/":
                if rhs == 0:
                    raise QasmSyntaxError("nonzero divisor", tok.line, tok.col, found="0")
                value = value / rhs
            else:
                value = value * rhs
        return value

    def factor(self) -> float:
        tok = self.peek()
        if tok.value in ("+", "-"):
            self.advance()
            sign = 1.0 if tok.value == "+" else -1.0
            return sign * self.factor()
        if tok.value == "(":
            self.advance()
            value = self.expression()
            self.expect("symbol", ")")
            return value
        if tok.kind == "number":
            self.advance()
            return float(tok.value)
        if tok.kind == "ident" and tok.value == "pi":
            self.advance()
            return math.pi
        raise QasmSyntaxError("parameter expression", tok.line, tok.col, found=tok.value)


def parse_qasm(text: str) -> CompiledCircuit:
    """Parse the QASM-2-like subset into a CompiledCircuit.

    Raises QasmSyntaxError / UnknownGate / IndexOutOfRange, each carrying the
    source position.
    """
    try:
        return _QasmParser(text).parse()
    except (QasmSyntaxError, UnknownGate, IndexOutOfRange):
        raise
    except ValueError as exc:  # circuit invariant backstop
        raise QasmSyntaxError(str(exc), 0, 0) from exc


def parse_param_expression(text: str) -> float:
    """Evaluate a gate-parameter expression such as "pi/8" or "-0.5*pi"."""
    parser = _QasmParser.__new__(_QasmParser)
    parser.tokens = _tokenize(text)
    parser.pos = 0
    value = parser.expression()
    tok = parser.peek()
    if tok.kind != "eof":
        raise QasmSyntaxError("end of expression", tok.line, tok.col, found=tok.value)
    return value


# ---------------------------------------------------------------------------
# JSON IR
# ---------------------------------------------------------------------------


def _require(obj, key, kind, path):
    if key not in obj:
        raise SchemaError(path, f"missing key {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", "expected integer")
    if not isinstance(value, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return value


def parse_json_ir(text: str) -> CompiledCircuit:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected object")

    num_physical = _require(raw, "num_physical", int, "$")
    num_logical = _require(raw, "num_logical", int, "$")
    if num_physical < 0 or num_logical < 0:
        raise SchemaError("$", "qubit counts must be >= 0")
    layout_raw = _require(raw, "initial_layout", list, "$")
    layout = []
    for i, entry in enumerate(layout_raw):
        if not isinstance(entry, int) or isinstance(entry, bool) or entry < 0:
            raise SchemaError(f"initial_layout[{i}]", "expected integer >= 0")
        layout.append(entry)
    if len(set(layout)) != len(layout):
        raise SchemaError("initial_layout", "not injective")

    ops = []
    for i, op_raw in enumerate(_require(raw, "ops", list, "$")):
        path = f"ops[{i}]"
        if not isinstance(op_raw, dict):
            raise SchemaError(path, "expected object")
        name = _require(op_raw, "name", str, path)
        qubits = _require(op_raw, "qubits", list, path)
        if not all(isinstance(q, int) and not isinstance(q, bool) and q >= 0 for q in qubits):
            raise SchemaError(f"{path}.qubits", "expected integers >= 0")
        params = op_raw.get("params", [])
        if not isinstance(params, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in params
        ):
            raise SchemaError(f"{path}.params", "expected numbers")
        tag_raw = op_raw.get("tag")
        tag = None
        if tag_raw is not None:
            if not isinstance(tag_raw, dict):
                raise SchemaError(f"{path}.tag", "expected object or null")
            tag = SwapTag(
                segment=_require(tag_raw, "segment", int, f"{path}.tag"),
                partner=_require(tag_raw, "partner", int, f"{path}.tag"),
            )
        try:
            ops.append(GateOp(name, tuple(qubits), tuple(float(p) for p in params), tag))
        except ValueError as exc:
            raise SchemaError(path, str(exc)) from exc

    measured_raw = _require(raw, "measured", dict, "$")
    measured = {}
    for key, value in measured_raw.items():
        try:
            logical = int(key)
        except ValueError as exc:
            raise SchemaError(f"measured.{key}", "key must be an integer") from exc
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise SchemaError(f"measured.{key}", "expected integer >= 0")
        measured[logical] = value

    try:
        return CompiledCircuit(
            num_physical=num_physical,
            num_logical=num_logical,
            initial_layout=tuple(layout),
            ops=tuple(ops),
            measured=measured,
        )
    except ValueError as exc:
        raise SchemaError("$", str(exc)) from exc


def serialize_json_ir(circuit: CompiledCircuit) -> str:
    doc = {
        "num_physical": circuit.num_physical,
        "num_logical": circuit.num_logical,
        "initial_layout": list(circuit.initial_layout),
        "ops": [
            {
                "name": op.name,
                "qubits": list(op.qubits),
                "params": list(op.params),
                "tag": None
                if op.tag is None
                else {"segment": op.tag.segment, "partner": op.tag.partner},
            }
            for op in circuit.ops
        ],
        "measured": {str(l): c for l, c in sorted(circuit.measured.items())},
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Validation and structural metrics
# ---------------------------------------------------------------------------


def validate_against(circuit: CompiledCircuit, cal, template=None) -> list:
    """Collect calibration gaps for every op (SWAP segments expanded) and
    every measured qubit's readout entry.  Issues are returned, not raised."""
    from .templates import default_template, expand_swap_gates

    template = template or default_template()
    issues = []
    seen = set()

    def check_gate(name, qubits):
        # unordered key: a reversed pair resolves through the symmetric
        # fallback, so it is the same calibration gap
        key = (name, tuple(sorted(qubits)))
        if key in seen:
            return
        seen.add(key)
        if not cal.has_gate(name, qubits):
            issues.append(MissingGateCal(name, qubits))

    for item in circuit.schedule():
        if isinstance(item, SwapSegment):
            for g in expand_swap_gates(item.qubits[0], item.qubits[1], template):
                check_gate(g.name, g.qubits)
        else:
            _, op = item
            check_gate(op.name, op.qubits)

    layout = final_layout(circuit)
    for logical in sorted(circuit.measured):
        physical = layout.physical(logical)
        if physical >= len(cal.qubits):
            issues.append(MissingReadoutCal(physical))
    return issues


def gate_count(circuit: CompiledCircuit) -> int:
    return len(circuit.ops)


def depth(circuit: CompiledCircuit) -> int:
    """Longest chain of ops under the partial order induced by shared
    physical qubits.  A SWAP segment counts as one two-qubit op."""
    wire = [0] * circuit.num_physical
    for item in circuit.schedule():
        qubits = item.qubits if isinstance(item, SwapSegment) else item[1].qubits
        level = 1 + max(wire[q] for q in qubits)
        for q in qubits:
            wire[q] = level
    return max(wire, default=0)
