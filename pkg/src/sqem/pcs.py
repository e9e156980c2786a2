"""Pauli check sandwiches: construction, check-condition test and post-selection.

A check pair (L, R) on target qubit k satisfies ``R U L = U``. Wrapping
realizes the controlled forms ``L (x) |-><-| + I (x) |+><+|`` on an ancilla
prepared and closed with Hadamards, so ancilla outcome 0 flags "no error
detected".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.circuit import Circuit
from .core.distribution import PROBABILITY, Distribution
from .core.errors import CheckInfeasibleError, EmptyPostSelectionError, ValidationError
from .core.gates import Gate, gates_matrix_1q, u3_params_from_matrix
from .core.linalg import DENSE_LIMIT, apply_left, check_dense_size, circuit_unitary
from .core.pauli import PauliString, pauli_commutes_with_circuit

CHECK_TOL = 1e-10


@dataclass(frozen=True)
class CheckPair:
    """``left`` and ``right`` are single-qubit gate lists on ``target_qubit``, in execution order."""

    target_qubit: int
    left: tuple[Gate, ...]
    right: tuple[Gate, ...]
    ancilla: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        for g in self.left + self.right:
            if g.qubits != (self.target_qubit,):
                raise ValidationError(f"check gate {g} must act only on qubit {self.target_qubit}")

    def left_matrix(self) -> np.ndarray:
        return gates_matrix_1q(self.left)

    def right_matrix(self) -> np.ndarray:
        return gates_matrix_1q(self.right)


@dataclass(frozen=True)
class SandwichCircuit:
    circuit: Circuit
    ancilla_bits: tuple[int, ...]
    compute_bits: tuple[int, ...]
    pairs: tuple[CheckPair, ...]
    # per pair, [start, stop) gate-index ranges of its controlled left / right checks
    left_blocks: tuple[tuple[int, int], ...]
    right_blocks: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PostSelectionResult:
    distribution: Distribution
    retained_fraction: float
    clipped_mass: float = 0.0


def _inverse_list(gates):
    return tuple(g.inverse() for g in reversed(gates))


def _single_gate_commutes_with_z(g: Gate, k: int) -> bool:
    local = Circuit(g.num_qubits, (g.remap({q: i for i, q in enumerate(g.qubits)}),))
    letters = "".join("Z" if q == k else "I" for q in g.qubits)
    return pauli_commutes_with_circuit(PauliString(letters), local)


def _first_offending(c: Circuit, k: int, skip=()):
    for i, g in enumerate(c.gates):
        if i in skip or k not in g.qubits:
            continue
        if not _single_gate_commutes_with_z(g, k):
            return i, g
    return None


def _z_on(k: int, n: int) -> PauliString:
    return PauliString("".join("Z" if q == k else "I" for q in range(n)))


def frame_gates(c: Circuit, k: int):
    """Leading and trailing runs of single-qubit gates on ``k`` (indices, gates)."""
    on_k = c.gates_on(k)
    lead, trail = [], []
    for i in on_k:
        if c.gates[i].num_qubits != 1:
            break
        lead.append(i)
    if len(lead) < len(on_k):
        for i in reversed(on_k):
            if c.gates[i].num_qubits != 1:
                break
            trail.append(i)
        trail.reverse()
    return lead, trail


def build_z_check(c: Circuit, k: int, frame=None) -> CheckPair:
    """Z check on qubit ``k``.

    ``frame=None`` requires Z_k to commute with the whole circuit. ``"auto"``
    conjugates Z by the leading/trailing single-qubit gates on ``k`` so only
    the remaining core must commute. A ``(lead, trail)`` tuple of gate lists
    supplies the conjugating frame explicitly.
    """
    if not 0 <= k < c.num_qubits:
        raise ValidationError(f"check qubit {k} out of range")
    z = Gate("z", (k,))
    if frame is None:
        if not pauli_commutes_with_circuit(_z_on(k, c.num_qubits), c):
            bad = _first_offending(c, k)
            where = f"gate {bad[0]} ({bad[1].kind.upper()} on {bad[1].qubits})" if bad else "circuit"
            raise CheckInfeasibleError(f"Z on qubit {k} does not commute with {where}")
        return CheckPair(k, (z,), (z,))

    if frame == "auto":
        lead_idx, trail_idx = frame_gates(c, k)
        lead = tuple(c.gates[i] for i in lead_idx)
        trail = tuple(c.gates[i] for i in trail_idx)
        skip = set(lead_idx) | set(trail_idx)
        core = c.with_gates(g for i, g in enumerate(c.gates) if i not in skip)
        if not pauli_commutes_with_circuit(_z_on(k, c.num_qubits), core):
            bad = _first_offending(c, k, skip)
            where = f"gate {bad[0]} ({bad[1].kind.upper()} on {bad[1].qubits})" if bad else "circuit core"
            raise CheckInfeasibleError(f"Z on qubit {k} does not commute with {where}")
    else:
        lead, trail = (tuple(x) for x in frame)

    pair = CheckPair(k, lead + (z,) + _inverse_list(lead), _inverse_list(trail) + (z,) + trail)
    if frame != "auto" and not verify_check_condition(c, pair):
        raise CheckInfeasibleError(f"supplied frame does not give a valid check on qubit {k}")
    return pair


def check_residual(c: Circuit, pair: CheckPair, limit: int = DENSE_LIMIT) -> float:
    """max |R U L - phase * U| with the best global phase."""
    n = c.num_qubits
    check_dense_size(n, limit)
    k = pair.target_qubit
    u = circuit_unitary(c, limit)
    # U L = (L^dagger U^dagger)^dagger
    ul = apply_left(u.conj().T, pair.left_matrix().conj().T, (k,), n).conj().T
    m = apply_left(ul, pair.right_matrix(), (k,), n)
    overlap = np.vdot(u, m)
    if abs(overlap) < 1e-12:
        return float(np.max(np.abs(m - u)))
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(m - phase * u)))


def verify_check_condition(c: Circuit, pair: CheckPair) -> bool:
    return check_residual(c, pair) < CHECK_TOL


def _controlled(gates, anc: int, k: int) -> list[Gate]:
    z = Gate("z", (k,))
    gates = tuple(gates)
    if gates == (z,):
        return [Gate("cz", (anc, k))]
    h = len(gates) // 2
    if len(gates) % 2 == 1 and gates[h] == z and gates[h + 1 :] == _inverse_list(gates[:h]):
        return list(gates[:h]) + [Gate("cz", (anc, k))] + list(gates[h + 1 :])
    params = u3_params_from_matrix(gates_matrix_1q(gates))
    return [Gate("cu", (anc, k), params)]


def wrap(c: Circuit, pairs) -> SandwichCircuit:
    """Sandwich ``c`` between controlled checks, pair 1 innermost."""
    pairs = list(pairs)
    n = c.num_qubits
    m = len(pairs)
    ancillas = []
    for i, p in enumerate(pairs):
        a = p.ancilla if p.ancilla is not None else n + i
        if a < n or a >= n + m:
            raise ValidationError(f"ancilla {a} must lie in {n}..{n + m - 1}")
        ancillas.append(a)
    if len(set(ancillas)) != m:
        raise ValidationError(f"duplicate ancilla assignment {ancillas}")
    pairs = [CheckPair(p.target_qubit, p.left, p.right, a) for p, a in zip(pairs, ancillas)]

    gates: list[Gate] = [Gate("h", (a,)) for a in ancillas]
    left_blocks = [None] * m
    for i in reversed(range(m)):
        start = len(gates)
        gates += _controlled(pairs[i].left, ancillas[i], pairs[i].target_qubit)
        left_blocks[i] = (start, len(gates))
    gates += c.gates
    right_blocks = [None] * m
    for i in range(m):
        start = len(gates)
        gates += _controlled(pairs[i].right, ancillas[i], pairs[i].target_qubit)
        right_blocks[i] = (start, len(gates))
    gates += [Gate("h", (a,)) for a in ancillas]

    measured = tuple(c.measured_qubits) + tuple(ancillas)
    circ = Circuit(n + m, tuple(gates), measured, tuple(c.preparations) + ("0",) * m)
    compute_bits = tuple(range(c.num_measured))
    ancilla_bits = tuple(range(c.num_measured, c.num_measured + m))
    return SandwichCircuit(circ, ancilla_bits, compute_bits, tuple(pairs), tuple(left_blocks), tuple(right_blocks))


def post_select(d: Distribution, ancilla_bits) -> PostSelectionResult:
    """Keep outcomes with every ancilla bit 0, drop ancilla bits, renormalize."""
    ancilla_bits = set(ancilla_bits)
    if any(b < 0 or b >= d.num_bits for b in ancilla_bits):
        raise ValidationError(f"ancilla bits {sorted(ancilla_bits)} out of range")
    keep = [i for i in range(d.num_bits) if i not in ancilla_bits]
    restricted = {}
    for key, w in d.items():
        if all(key[b] == "0" for b in ancilla_bits):
            sub = "".join(key[i] for i in keep)
            restricted[sub] = restricted.get(sub, 0.0) + w
    retained = math.fsum(restricted.values())
    clipped = 0.0 - math.fsum(w for w in restricted.values() if w < 0)
    positive = {k: w for k, w in restricted.items() if w > 0}
    mass = math.fsum(positive.values())
    if not mass > 0:
        raise EmptyPostSelectionError("no probability mass with all ancillas 0")
    table = {k: w / mass for k, w in positive.items()}
    dist = Distribution(len(keep), table, PROBABILITY, d.shots, d.clipped_mass + clipped)
    return PostSelectionResult(dist, retained, clipped)
