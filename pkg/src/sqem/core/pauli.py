"""Pauli strings, Pauli-sum Hamiltonians and their text format.

Letter ``k`` of a Pauli string acts on qubit ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import ParseError, ValidationError
from .gates import PAULI_MATRICES
from .linalg import apply_left, check_dense_size, circuit_unitary

PAULI_LETTERS = "IXYZ"


@dataclass(frozen=True)
class PauliString:
    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or any(ch not in PAULI_LETTERS for ch in letters):
            raise ValidationError(f"invalid Pauli letters {self.letters!r}")
        if not math.isfinite(self.coefficient):
            raise ValidationError(f"non-finite coefficient for {letters}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.letters) if ch != "I")

    def is_identity(self) -> bool:
        return not self.support

    def matrix(self) -> np.ndarray:
        """Dense matrix without the coefficient."""
        return reduce(np.kron, (PAULI_MATRICES[ch] for ch in self.letters))


def qubitwise_commute(a: str, b: str) -> bool:
    return all(x == "I" or y == "I" or x == y for x, y in zip(a, b))


@dataclass(frozen=True)
class Hamiltonian:
    num_qubits: int
    terms: tuple[PauliString, ...]

    def __post_init__(self):
        merged: dict[str, float] = {}
        for t in self.terms:
            if t.num_qubits != self.num_qubits:
                raise ValidationError(
                    f"term {t.letters} has length {t.num_qubits}, expected {self.num_qubits}"
                )
            merged[t.letters] = merged.get(t.letters, 0.0) + t.coefficient
        object.__setattr__(
            self, "terms", tuple(PauliString(k, v) for k, v in merged.items())
        )

    def scaled(self, factor: float) -> "Hamiltonian":
        return Hamiltonian(self.num_qubits, tuple(PauliString(t.letters, factor * t.coefficient) for t in self.terms))

    def matrix(self) -> np.ndarray:
        check_dense_size(self.num_qubits)
        dim = 2**self.num_qubits
        m = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            m += t.coefficient * t.matrix()
        return m

    def ground_energy(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix())[0])


def parse_hamiltonian(text: str) -> Hamiltonian:
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected '<coefficient> <letters>'", line=lineno, field=line)
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ParseError("bad coefficient", line=lineno, field=parts[0]) from None
        try:
            term = PauliString(parts[1], coeff)
        except ValidationError as exc:
            raise ParseError(str(exc), line=lineno, field=parts[1]) from None
        if n is None:
            n = term.num_qubits
        elif term.num_qubits != n:
            raise ParseError(f"term length {term.num_qubits} differs from {n}", line=lineno, field=parts[1])
        terms.append(term)
    if n is None:
        raise ParseError("empty Hamiltonian document")
    return Hamiltonian(n, tuple(terms))


def serialize_hamiltonian(h: Hamiltonian) -> str:
    return "".join(f"{t.coefficient!r} {t.letters}\n" for t in h.terms)


def load_hamiltonian(path) -> Hamiltonian:
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())


def pauli_commutes_with_circuit(p: PauliString, c, tol: float = 1e-10) -> bool:
    """True iff the Pauli string commutes with the circuit's unitary."""
    if p.num_qubits != c.num_qubits:
        raise ValidationError(f"Pauli length {p.num_qubits} != circuit width {c.num_qubits}")
    check_dense_size(c.num_qubits)
    u = circuit_unitary(c)
    n = c.num_qubits
    pu = u
    up = u.conj().T
    for q in p.support:
        pu = apply_left(pu, PAULI_MATRICES[p.letters[q]], (q,), n)
        up = apply_left(up, PAULI_MATRICES[p.letters[q]], (q,), n)
    # U P = (P U^dagger)^dagger for Hermitian P
    return float(np.max(np.abs(pu - up.conj().T), initial=0.0)) < tol
