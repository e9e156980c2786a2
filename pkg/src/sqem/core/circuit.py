"""Circuit IR and its line-oriented text format.

Document grammar::

    qubits N
    init q<i> <label>          # optional, label in 0 1 + - +i -i
    GATE[(a[,b...])] q<i>[,q<j>]
    ...
    measure all | measure q<i>,q<j>,...

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .gates import GATE_ARITY, Gate

PREP_LABELS = ("0", "1", "+", "-", "+i", "-i")

_GATE_RE = re.compile(r"^([A-Za-z]+)\s*(?:\(([^)]*)\))?\s+(\S.*)$")
_QUBIT_RE = re.compile(r"^q(\d+)$")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    measured_qubits: tuple[int, ...] | None = None
    initial_preparations: tuple[str, ...] | None = None
    # measured_qubits=None means "measure all"
    _measure_all: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.num_qubits)
        if n < 1:
            raise ValidationError(f"num_qubits must be positive, got {n}")
        object.__setattr__(self, "num_qubits", n)
        gates = tuple(self.gates)
        for i, g in enumerate(gates):
            if not isinstance(g, Gate):
                raise ValidationError(f"gate {i} is not a Gate: {g!r}")
            if max(g.qubits) >= n:
                raise ValidationError(f"gate {i} ({g.kind}) uses qubit {max(g.qubits)} >= {n}")
        object.__setattr__(self, "gates", gates)
        measured = self.measured_qubits
        measure_all = measured is None
        measured = tuple(range(n)) if measured is None else tuple(int(q) for q in measured)
        if len(set(measured)) != len(measured):
            raise ValidationError(f"duplicate measured qubits {measured}")
        if any(q < 0 or q >= n for q in measured):
            raise ValidationError(f"measured qubit out of range in {measured}")
        object.__setattr__(self, "measured_qubits", measured)
        object.__setattr__(self, "_measure_all", measure_all or measured == tuple(range(n)))
        preps = self.initial_preparations
        if preps is not None:
            preps = tuple(str(p) for p in preps)
            if len(preps) != n:
                raise ValidationError(f"expected {n} preparation labels, got {len(preps)}")
            bad = [p for p in preps if p not in PREP_LABELS]
            if bad:
                raise ValidationError(f"unknown preparation label(s) {bad}")
            if all(p == "0" for p in preps):
                preps = None
        object.__setattr__(self, "initial_preparations", preps)

    @property
    def preparations(self) -> tuple[str, ...]:
        return self.initial_preparations or ("0",) * self.num_qubits

    @property
    def num_measured(self) -> int:
        return len(self.measured_qubits)

    def extend(self, gates) -> "Circuit":
        return Circuit(
            self.num_qubits,
            self.gates + tuple(gates),
            self.measured_qubits,
            self.initial_preparations,
        )

    def with_gates(self, gates) -> "Circuit":
        return Circuit(self.num_qubits, tuple(gates), self.measured_qubits, self.initial_preparations)

    def with_measured(self, measured) -> "Circuit":
        return Circuit(self.num_qubits, self.gates, tuple(measured), self.initial_preparations)

    def with_preparations(self, preps) -> "Circuit":
        return Circuit(self.num_qubits, self.gates, self.measured_qubits, preps)

    def gates_on(self, qubit: int) -> list[int]:
        """Indices of gates that touch ``qubit``."""
        return [i for i, g in enumerate(self.gates) if qubit in g.qubits]


def _fmt_angle(x: float) -> str:
    return repr(float(x))


def gate_text(g: Gate) -> str:
    name = g.kind.upper()
    if g.params:
        name += "(" + ",".join(_fmt_angle(p) for p in g.params) + ")"
    return f"{name} " + ",".join(f"q{q}" for q in g.qubits)


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    for q, label in enumerate(c.preparations):
        if label != "0":
            lines.append(f"init q{q} {label}")
    lines += [gate_text(g) for g in c.gates]
    if c._measure_all:
        lines.append("measure all")
    elif c.measured_qubits:
        lines.append("measure " + ",".join(f"q{q}" for q in c.measured_qubits))
    else:
        lines.append("measure none")
    return "\n".join(lines) + "\n"


def _parse_qubits(text: str, lineno: int) -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        m = _QUBIT_RE.match(tok)
        if not m:
            raise ParseError("bad qubit reference", line=lineno, field=tok)
        out.append(int(m.group(1)))
    return tuple(out)


def parse_circuit(text: str) -> Circuit:
    n = None
    gates: list[Gate] = []
    preps: dict[int, str] = {}
    measured = None
    measure_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if measure_seen:
            raise ParseError("content after measure line", line=lineno, field=line)
        head = line.split(None, 1)[0].lower()
        if n is None:
            if head != "qubits":
                raise ParseError("document must start with 'qubits N'", line=lineno, field=head)
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("malformed header", line=lineno, field=line)
            n = int(parts[1])
            if n < 1:
                raise ParseError("qubit count must be positive", line=lineno, field=parts[1])
            continue
        if head == "init":
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'init q<i> <label>'", line=lineno, field=line)
            (q,) = _parse_qubits(parts[1], lineno)
            if parts[2] not in PREP_LABELS:
                raise ParseError("unknown preparation label", line=lineno, field=parts[2])
            if q >= n:
                raise ValidationError(f"qubit q{q} out of range for {n} qubits (line {lineno})")
            preps[q] = parts[2]
            continue
        if head == "measure":
            rest = line.split(None, 1)[1].strip() if len(line.split(None, 1)) > 1 else ""
            if rest.lower() == "all":
                measured = None
            elif rest.lower() == "none":
                measured = ()
            else:
                measured = _parse_qubits(rest, lineno)
                if any(q >= n for q in measured):
                    raise ValidationError(f"measured qubit out of range for {n} qubits (line {lineno})")
            measure_seen = True
            continue
        m = _GATE_RE.match(line)
        if not m:
            raise ParseError("malformed gate line", line=lineno, field=line)
        kind = m.group(1).lower()
        if kind not in GATE_ARITY:
            raise ParseError("unknown gate", line=lineno, field=m.group(1))
        params: tuple[float, ...] = ()
        if m.group(2) is not None:
            try:
                params = tuple(float(p) for p in m.group(2).split(","))
            except ValueError:
                raise ParseError("bad angle", line=lineno, field=m.group(2)) from None
            if not all(math.isfinite(p) for p in params):
                raise ParseError("non-finite angle", line=lineno, field=m.group(2))
        qubits = _parse_qubits(m.group(3), lineno)
        if any(q >= n for q in qubits):
            raise ValidationError(f"gate {kind} references qubit out of range for {n} qubits (line {lineno})")
        try:
            gates.append(Gate(kind, qubits, params))
        except ValidationError as exc:
            raise ParseError(str(exc), line=lineno, field=line) from None
    if n is None:
        raise ParseError("empty circuit document")
    if not measure_seen:
        raise ParseError("missing measure line", line=None, field="measure")
    prep_tuple = tuple(preps.get(q, "0") for q in range(n)) if preps else None
    return Circuit(n, tuple(gates), measured, prep_tuple)


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())
