"""Exception hierarchy and validation-issue records shared across the package."""


class NpcfidError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NpcfidError):
    """Positioned error from the circuit text parser."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class QasmSyntaxError(ParseError):
    def __init__(self, expected: str, line: int, col: int, found: str = ""):
        detail = f"expected {expected}"
        if found:
            detail += f", found {found!r}"
        super().__init__(detail, line, col)
        self.expected = expected
        self.found = found


class UnknownGate(ParseError):
    """Gate token is not a valid lowercase identifier."""

    def __init__(self, name: str, line: int = 0, col: int = 0):
        super().__init__(f"unknown gate {name!r}", line, col)
        self.name = name


class IndexOutOfRange(ParseError):
    def __init__(self, index: int, limit: int, line: int = 0, col: int = 0):
        super().__init__(f"index {index} out of range (size {limit})", line, col)
        self.index = index
        self.limit = limit


class SchemaError(NpcfidError):
    """Structured-input violation, with the offending path for diagnostics."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class DomainError(NpcfidError, ValueError):
    """Numeric argument outside its admissible range."""


class DimensionMismatch(NpcfidError, ValueError):
    """Operands describe systems of incompatible size."""


class LengthMismatch(NpcfidError, ValueError):
    """Paired sequences have unusable lengths."""


class UnknownUnitary(NpcfidError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"no unitary registered for gate {name!r}")
        self.name = name


class TooLarge(NpcfidError):
    """Circuit exceeds the configured simulator qubit cap."""

    def __init__(self, n: int, cap: int):
        super().__init__(f"circuit has {n} qubits, simulator cap is {cap}")
        self.n = n
        self.cap = cap


class MissingGateCal(NpcfidError):
    """No calibration entry for a (gate, qubits) combination.

    Doubles as the issue record returned by circuit validation, so the same
    object can be collected into a report or raised.
    """

    def __init__(self, name: str, qubits):
        qs = list(qubits)
        super().__init__(f"no calibration for gate {name!r} on qubits {qs}")
        self.name = name
        self.qubits = tuple(qs)

    def __eq__(self, other):
        return (
            isinstance(other, MissingGateCal)
            and (self.name, self.qubits) == (other.name, other.qubits)
        )

    def __hash__(self):
        return hash((type(self).__name__, self.name, self.qubits))


class MissingReadoutCal(NpcfidError):
    """No readout-error entry for a measured physical qubit."""

    def __init__(self, qubit: int):
        super().__init__(f"no readout calibration for physical qubit {qubit}")
        self.qubit = qubit

    def __eq__(self, other):
        return isinstance(other, MissingReadoutCal) and self.qubit == other.qubit

    def __hash__(self):
        return hash((type(self).__name__, self.qubit))


# Items returned by circuit_ir.validate_against.
ValidationIssue = MissingGateCal | MissingReadoutCal
