"""Dense density-matrix simulation, statevector fast path and shot sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from ..core.circuit import Circuit
from ..core.distribution import PROBABILITY, Distribution
from ..core.errors import ValidationError
from ..core.gates import PAULI_MATRICES
from ..core.linalg import DENSE_LIMIT, apply_left, check_dense_size
from ..core.seeding import make_rng
from . import kernels
from .noise import NoiseModel

_S2 = 1.0 / math.sqrt(2.0)

PREP_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_S2, _S2], dtype=complex),
    "-": np.array([_S2, -_S2], dtype=complex),
    "+i": np.array([_S2, 1j * _S2], dtype=complex),
    "-i": np.array([_S2, -1j * _S2], dtype=complex),
}
ORTHOGONAL = {"0": "1", "1": "0", "+": "-", "-": "+", "+i": "-i", "-i": "+i"}


@dataclass(frozen=True)
class DensityMatrix:
    num_qubits: int
    entries: np.ndarray

    def check(self, tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
        m = self.entries
        if m.shape != (2**self.num_qubits,) * 2:
            raise ValidationError(f"bad density-matrix shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValidationError("density matrix not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"density-matrix trace {tr} != 1")
        if np.linalg.eigvalsh(m)[0] < -psd_tol:
            raise ValidationError("density matrix not positive semidefinite")

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()


@dataclass(frozen=True)
class ExecutionReport:
    distribution: Distribution
    shots: int | None
    seed: int | None
    backend: str  # "exact" | "sampled"
    noise: NoiseModel | None

    def __post_init__(self):
        if self.backend not in ("exact", "sampled"):
            raise ValidationError(f"unknown backend {self.backend!r}")
        if self.backend == "sampled" and not self.shots:
            raise ValidationError("sampled report requires shots")


def _initial_state(c: Circuit, spam_flip: float) -> np.ndarray:
    singles = []
    for label in c.preparations:
        v = PREP_STATES[label]
        rho = np.outer(v, v.conj())
        if spam_flip:
            w = PREP_STATES[ORTHOGONAL[label]]
            rho = (1.0 - spam_flip) * rho + spam_flip * np.outer(w, w.conj())
        singles.append(rho)
    return np.ascontiguousarray(reduce(np.kron, singles))


def run_exact(c: Circuit, noise: NoiseModel | None = None, noisy_gates=None, limit: int = DENSE_LIMIT) -> DensityMatrix:
    """Evolve the circuit's initial state through gates and noise channels.

    Noise follows every gate, or only the gate indices in ``noisy_gates``.
    Readout flips are classical and are not part of the returned state.
    """
    n = c.num_qubits
    check_dense_size(n, limit)
    if noise is not None and noise.is_trivial:
        noise = None
    rho = _initial_state(c, noise.spam_flip if noise else 0.0)
    p1 = noise.one_qubit_depolarizing if noise else 0.0
    p2 = noise.two_qubit_depolarizing if noise else 0.0
    pqp = dict(noise.per_qubit_pauli) if noise else {}
    for i, g in enumerate(c.gates):
        u = np.ascontiguousarray(g.matrix())
        if g.num_qubits == 1:
            rho = kernels.apply_unitary_1q(rho, u, g.qubits[0], n)
        else:
            rho = kernels.apply_unitary_2q(rho, u, g.qubits[0], g.qubits[1], n)
        if noise is None or (noisy_gates is not None and i not in noisy_gates):
            continue
        if g.num_qubits == 1:
            rho = kernels.depolarize_1q(rho, g.qubits[0], p1, n)
        else:
            rho = kernels.depolarize_2q(rho, g.qubits[0], g.qubits[1], p2, n)
        for q in g.qubits:
            if q in pqp:
                px, py, pz = pqp[q]
                rho = kernels.pauli_channel_1q(rho, q, px, py, pz, n)
    return DensityMatrix(n, rho)


def run_statevector(c: Circuit, limit: int = 24) -> np.ndarray:
    """Noiseless pure-state evolution; used as the fast path and as an oracle."""
    n = c.num_qubits
    check_dense_size(n, limit)
    psi = reduce(np.kron, [PREP_STATES[p] for p in c.preparations]).reshape(-1, 1)
    for g in c.gates:
        psi = apply_left(psi, g.matrix(), g.qubits, n)
    return psi.reshape(-1)


def _marginalize(full: np.ndarray, n: int, measured) -> np.ndarray:
    t = full.reshape((2,) * n)
    drop = tuple(q for q in range(n) if q not in measured)
    if drop:
        t = t.sum(axis=drop)
    kept = [q for q in range(n) if q in measured]
    order = [kept.index(q) for q in measured]
    return np.ascontiguousarray(np.transpose(t, order)).reshape(-1) if measured else t.reshape(1)


@lru_cache(maxsize=4096)
def _exact_probabilities_cached(c: Circuit, noise, noisy_gates) -> np.ndarray:
    n = c.num_qubits
    if noise is None:
        full = np.abs(run_statevector(c)) ** 2
    else:
        full = run_exact(c, noise, noisy_gates).diagonal()
    full = np.clip(full, 0.0, None)
    probs = _marginalize(full, n, c.measured_qubits)
    if noise is not None:
        m = len(c.measured_qubits)
        for pos, q in enumerate(c.measured_qubits):
            f = noise.readout_for(q)
            if f:
                probs = kernels.readout_flip(np.ascontiguousarray(probs), pos, f, m)
    probs = probs / probs.sum()
    probs.flags.writeable = False
    return probs


def exact_probabilities(c: Circuit, noise: NoiseModel | None = None, noisy_gates=None) -> np.ndarray:
    """Dense outcome probabilities over ``c.measured_qubits`` incl. readout flips."""
    if noise is not None and noise.is_trivial:
        noise = None
    ng = None if noisy_gates is None else frozenset(noisy_gates)
    return _exact_probabilities_cached(c, noise, ng)


def execute_exact(c: Circuit, noise: NoiseModel | None = None, noisy_gates=None) -> ExecutionReport:
    probs = exact_probabilities(c, noise, noisy_gates)
    dist = Distribution.from_dense(probs, c.num_measured, PROBABILITY)
    return ExecutionReport(dist, None, None, "exact", noise)


def sample_counts(probs: np.ndarray, shots: int, seed: int) -> np.ndarray:
    rng = make_rng(seed)
    return rng.multinomial(shots, probs)


def sample(c: Circuit, noise: NoiseModel | None, shots: int, seed: int, noisy_gates=None) -> ExecutionReport:
    if int(shots) < 1:
        raise ValidationError("shots must be >= 1")
    probs = exact_probabilities(c, noise, noisy_gates)
    counts = sample_counts(probs, int(shots), seed)
    dist = Distribution.from_dense(counts / shots, c.num_measured, PROBABILITY, shots=int(shots))
    return ExecutionReport(dist, int(shots), int(seed), "sampled", noise)


def expectation(rho: DensityMatrix, p) -> float:
    """tr(P rho) for a Pauli string (coefficient ignored)."""
    if p.num_qubits != rho.num_qubits:
        raise ValidationError(f"Pauli length {p.num_qubits} != {rho.num_qubits} qubits")
    m = rho.entries
    for q in p.support:
        m = apply_left(m, PAULI_MATRICES[p.letters[q]], (q,), rho.num_qubits)
    val = np.trace(m)
    if abs(val.imag) > 1e-9:
        raise ValidationError(f"expectation has imaginary residue {val.imag}")
    return float(val.real)
