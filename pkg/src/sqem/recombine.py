"""Bayesian recombination of per-qubit mitigated distributions.

Starting from the unmitigated distribution, every outcome ``s`` is updated by

    P'(s) = P(s) + sum_k P(s) * w_{s[k]}(P_M_k, k) / w_{s[k]}(P, k)

and renormalized, until the Hellinger distance between successive iterates
drops below the threshold.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core.distribution import PROBABILITY, Distribution
from .core.errors import DegenerateDistributionError, ValidationError
from .sim import kernels

DENOMINATOR_FLOOR = 1e-12
DEFAULT_THRESHOLD = 1e-4
DEFAULT_MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class RecombinationConfig:
    threshold: float = DEFAULT_THRESHOLD
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold}")
        if int(self.max_iterations) < 1:
            raise ValidationError("max_iterations must be positive")


@dataclass(frozen=True)
class MarginalTable:
    """w[(k, j)]: probability that bit k reads j."""

    w: dict

    @classmethod
    def of(cls, d: Distribution, qubits=None) -> "MarginalTable":
        qubits = range(d.num_bits) if qubits is None else qubits
        return cls({(k, j): bitwise_marginal(d, k, j) for k in qubits for j in (0, 1)})

    def __getitem__(self, key) -> float:
        return self.w[key]


@dataclass(frozen=True)
class RecombinationResult:
    distribution: Distribution
    iterations: int
    converged: bool
    final_step: float
    deviation: dict
    trace: list = field(default_factory=list, repr=False)

    @property
    def max_deviation(self) -> float:
        return max(self.deviation.values(), default=0.0)

    def trace_csv(self) -> str:
        qubits = sorted(self.deviation)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "hellinger_step"] + [f"deviation_q{k}" for k in qubits])
        for row in self.trace:
            writer.writerow([row[0], repr(row[1])] + [repr(x) for x in row[2]])
        return buf.getvalue()


def _require_probability(d: Distribution, name="distribution"):
    if d.kind != PROBABILITY:
        raise ValidationError(f"{name} must be a probability distribution")


def bitwise_marginal(d: Distribution, k: int, j: int) -> float:
    _require_probability(d)
    if not 0 <= k < d.num_bits:
        raise ValidationError(f"bit {k} out of range for {d.num_bits} bits")
    if j not in (0, 1):
        raise ValidationError(f"outcome must be 0 or 1, got {j}")
    ch = str(j)
    return math.fsum(w for key, w in d.items() if key[k] == ch)


def hellinger(p: Distribution, q: Distribution) -> float:
    _require_probability(p, "p")
    _require_probability(q, "q")
    if p.num_bits != q.num_bits:
        raise ValidationError(f"layout mismatch: {p.num_bits} vs {q.num_bits} bits")
    bc = math.fsum(math.sqrt(w * q[key]) for key, w in p.items())
    return math.sqrt(max(1.0 - bc, 0.0))


def _arrays(d: Distribution, qubits):
    keys = list(d.table)
    probs = np.array([d.table[k] for k in keys], dtype=np.float64)
    bits = np.array([[int(key[k]) for k in qubits] for key in keys], dtype=np.uint8).reshape(len(keys), len(qubits))
    return keys, probs, bits


def _targets(marginals: dict, qubits) -> np.ndarray:
    t = np.empty((len(qubits), 2))
    for i, k in enumerate(qubits):
        m = marginals[k]
        if isinstance(m, Distribution):
            m = MarginalTable.of(m, [k])
        t[i, 0] = m[(k, 0)]
        t[i, 1] = m[(k, 1)]
    return t


def update_step(p_r: Distribution, marginals: dict) -> Distribution:
    """One recombination update; ``marginals`` maps k to P_M_k or its MarginalTable."""
    _require_probability(p_r, "P_R")
    qubits = sorted(marginals)
    if any(not 0 <= k < p_r.num_bits for k in qubits):
        raise ValidationError(f"protected qubits {qubits} out of range")
    keys, probs, bits = _arrays(p_r, qubits)
    new, total = kernels.recombine_update(probs, bits, _targets(marginals, qubits), DENOMINATOR_FLOOR)
    if not total > 0:
        raise DegenerateDistributionError("recombination update produced no mass")
    return Distribution(p_r.num_bits, dict(zip(keys, new.tolist())), PROBABILITY)


def recombine(p_um: Distribution, mitigated: dict, cfg: RecombinationConfig | None = None) -> RecombinationResult:
    cfg = cfg or RecombinationConfig()
    if not mitigated:
        raise ValidationError("recombination needs at least one mitigated distribution")
    _require_probability(p_um, "P_UM")
    for k, d in mitigated.items():
        _require_probability(d, f"P_M_{k}")
        if d.num_bits != p_um.num_bits:
            raise ValidationError(f"P_M_{k} has {d.num_bits} bits, P_UM has {p_um.num_bits}")
    qubits = sorted(mitigated)
    keys, probs, bits = _arrays(p_um, qubits)
    targets = _targets(mitigated, qubits)
    out, iters, step, converged, steps, devs, degenerate = kernels.recombine_loop(
        probs, bits, targets, float(cfg.threshold), int(cfg.max_iterations), DENOMINATOR_FLOOR
    )
    if degenerate:
        raise DegenerateDistributionError("recombination update produced no mass")
    dist = Distribution(p_um.num_bits, {k: w for k, w in zip(keys, out.tolist()) if w > 0}, PROBABILITY, p_um.shots)
    final = np.abs(kernels.bitwise_marginals(out, bits)[:, 0] - targets[:, 0])
    deviation = {k: float(final[i]) for i, k in enumerate(qubits)}
    trace = [(i + 1, float(steps[i]), [float(x) for x in devs[i]]) for i in range(int(iters))]
    meta = {
        "iterations": int(iters),
        "converged": bool(converged),
        "final_step": float(step),
        "max_deviation": max(deviation.values()),
        "threshold": cfg.threshold,
    }
    dist = Distribution(dist.num_bits, dist.table, PROBABILITY, dist.shots, metadata=meta)
    return RecombinationResult(dist, int(iters), bool(converged), float(step), deviation, trace)
