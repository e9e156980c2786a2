"""Dense-operator helpers used by the commutation and check-condition tests."""

from __future__ import annotations

import numpy as np

from .errors import UnsupportedSizeError

DENSE_LIMIT = 12


def check_dense_size(num_qubits: int, limit: int = DENSE_LIMIT) -> None:
    if num_qubits > limit:
        raise UnsupportedSizeError(
            f"dense computation on {num_qubits} qubits exceeds the limit of {limit}"
        )


def apply_left(mat: np.ndarray, gate: np.ndarray, qubits, num_qubits: int) -> np.ndarray:
    """Return ``G_(qubits) @ mat`` for a (2^n, m) matrix; qubit 0 is the MSB."""
    k = len(qubits)
    cols = mat.shape[1]
    t = mat.reshape((2,) * num_qubits + (cols,))
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the gate's output axes first; move them back into place
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(2**num_qubits, cols)


def circuit_unitary(circuit, limit: int = DENSE_LIMIT) -> np.ndarray:
    n = circuit.num_qubits
    check_dense_size(n, limit)
    u = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        u = apply_left(u, g.matrix(), g.qubits, n)
    return u
