"""Gate kinds, their arities and unitary matrices.

Matrices for multi-qubit gates use big-endian ordering over ``gate.qubits``:
the first listed qubit is the most significant index bit. For controlled
gates the control is listed first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# kind -> (number of qubits, number of angle parameters)
GATE_ARITY = {
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "h": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "s": (1, 0),
    "sdg": (1, 0),
    "cz": (2, 0),
    "cx": (2, 0),
    # controlled exp(i*gamma) * U3(theta, phi, lam); params (theta, phi, lam, gamma)
    "cu": (2, 4),
}

_SQRT1_2 = 1.0 / math.sqrt(2.0)

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if kind not in GATE_ARITY:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        n_q, n_p = GATE_ARITY[kind]
        if len(self.qubits) != n_q:
            raise ValidationError(f"{kind} acts on {n_q} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValidationError(f"{kind} has repeated qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValidationError(f"negative qubit index in {self.qubits}")
        if len(self.params) != n_p:
            raise ValidationError(f"{kind} takes {n_p} parameter(s), got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise ValidationError(f"non-finite angle in {kind}{self.params}")

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def matrix(self) -> np.ndarray:
        return gate_matrix(self.kind, self.params)

    def inverse(self) -> "Gate":
        k, p = self.kind, self.params
        if k in ("rx", "ry", "rz"):
            return Gate(k, self.qubits, (-p[0],))
        if k == "s":
            return Gate("sdg", self.qubits)
        if k == "sdg":
            return Gate("s", self.qubits)
        if k == "cu":
            theta, phi, lam, gamma = p
            return Gate("cu", self.qubits, (-theta, -lam, -phi, -gamma))
        return self

    def remap(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.params)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def gate_matrix(kind: str, params=()) -> np.ndarray:
    if kind == "rx":
        c, s = math.cos(params[0] / 2), math.sin(params[0] / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "ry":
        c, s = math.cos(params[0] / 2), math.sin(params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rz":
        t = params[0] / 2
        return np.array([[np.exp(-1j * t), 0], [0, np.exp(1j * t)]], dtype=complex)
    if kind == "h":
        return np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
    if kind in ("x", "y", "z"):
        return PAULI_MATRICES[kind.upper()].copy()
    if kind == "s":
        return np.array([[1, 0], [0, 1j]], dtype=complex)
    if kind == "sdg":
        return np.array([[1, 0], [0, -1j]], dtype=complex)
    if kind == "cz":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "cx":
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = PAULI_MATRICES["X"]
        return m
    if kind == "cu":
        theta, phi, lam, gamma = params
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = np.exp(1j * gamma) * u3_matrix(theta, phi, lam)
        return m
    raise ValidationError(f"unknown gate kind {kind!r}")


def u3_params_from_matrix(u: np.ndarray) -> tuple[float, float, float, float]:
    """Decompose a 2x2 unitary as ``exp(i*gamma) * U3(theta, phi, lam)``."""
    u = np.asarray(u, dtype=complex)
    a, b = u[0, 0], u[0, 1]
    c, d = u[1, 0], u[1, 1]
    theta = 2.0 * math.atan2(abs(c), abs(a))
    if abs(a) > 1e-12:
        gamma = float(np.angle(a))
    else:
        # a == 0: U3 top-left vanishes; fix gamma from -exp(i(gamma+lam)) = b with lam = 0
        gamma = float(np.angle(-b))
    if abs(c) > 1e-12:
        phi = float(np.angle(c)) - gamma
    else:
        phi = float(np.angle(d)) - gamma
    if abs(b) > 1e-12:
        lam = float(np.angle(-b)) - gamma
    else:
        lam = float(np.angle(d)) - gamma - phi
    return theta, phi, lam, gamma


def gates_matrix_1q(gates) -> np.ndarray:
    """Operator product of single-qubit gates applied in list order."""
    m = np.eye(2, dtype=complex)
    for g in gates:
        if g.num_qubits != 1:
            raise ValidationError(f"expected single-qubit gate, got {g.kind}")
        m = g.matrix() @ m
    return m
