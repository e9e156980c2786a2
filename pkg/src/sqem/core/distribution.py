"""Sparse (quasi-)probability tables keyed by measurement bit strings.

Character ``k`` of a key is the outcome of the ``k``-th measured bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .errors import DegenerateDistributionError, ValidationError

PROBABILITY = "probability"
QUASI = "quasi-probability"
KINDS = (PROBABILITY, QUASI)

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Distribution:
    num_bits: int
    table: dict
    kind: str = PROBABILITY
    shots: int | None = None
    clipped_mass: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        if self.num_bits < 0:
            raise ValidationError("num_bits must be non-negative")
        table = {}
        for key in sorted(self.table):
            w = float(self.table[key])
            if len(key) != self.num_bits or any(ch not in "01" for ch in key):
                raise ValidationError(f"bad key {key!r} for {self.num_bits} bits")
            if not math.isfinite(w):
                raise ValidationError(f"non-finite weight for {key!r}")
            table[key] = w
        if self.kind == PROBABILITY:
            if any(w < 0 for w in table.values()):
                raise ValidationError("probability distribution has negative weight")
            total = math.fsum(table.values())
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise ValidationError(f"probability weights sum to {total}, not 1")
        if self.shots is not None and int(self.shots) < 1:
            raise ValidationError("shots must be positive")
        object.__setattr__(self, "table", MappingProxyType(table))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    def __getitem__(self, key: str) -> float:
        return self.table.get(key, 0.0)

    def __len__(self) -> int:
        return len(self.table)

    def items(self):
        return self.table.items()

    def total(self) -> float:
        return math.fsum(self.table.values())

    def negative_mass(self) -> float:
        return 0.0 - math.fsum(w for w in self.table.values() if w < 0)

    @classmethod
    def from_dense(cls, vec, num_bits: int | None = None, kind=PROBABILITY, shots=None, tol=0.0, **kw):
        vec = np.asarray(vec, dtype=float)
        if num_bits is None:
            num_bits = int(round(math.log2(vec.size))) if vec.size > 1 else 0
        if vec.size != 2**num_bits:
            raise ValidationError(f"dense vector of size {vec.size} is not 2^{num_bits}")
        idx = np.flatnonzero(np.abs(vec) > tol)
        table = {format(int(i), f"0{num_bits}b") if num_bits else "": float(vec[i]) for i in idx}
        return cls(num_bits, table, kind, shots, **kw)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(2**self.num_bits)
        for key, w in self.table.items():
            out[int(key, 2) if key else 0] = w
        return out

    def marginal(self, positions) -> "Distribution":
        """Marginal over the given bit positions, in the given order."""
        positions = tuple(positions)
        if any(p < 0 or p >= self.num_bits for p in positions):
            raise ValidationError(f"marginal positions {positions} out of range")
        acc: dict[str, float] = {}
        for key, w in self.table.items():
            sub = "".join(key[p] for p in positions)
            acc[sub] = acc.get(sub, 0.0) + w
        if self.kind == PROBABILITY:
            acc = {k: max(v, 0.0) for k, v in acc.items()}
            total = math.fsum(acc.values())
            acc = {k: v / total for k, v in acc.items()}
        return Distribution(len(positions), acc, self.kind, self.shots, self.clipped_mass)

    def to_json_obj(self) -> dict:
        meta = {
            "kind": self.kind,
            "num_bits": self.num_bits,
            "shots": self.shots,
            "clipped_mass": self.clipped_mass,
        }
        meta.update(self.metadata)
        return {"weights": dict(self.table), "metadata": meta}

    @classmethod
    def from_json_obj(cls, obj) -> "Distribution":
        if "weights" not in obj or "metadata" not in obj:
            raise ValidationError("distribution JSON needs 'weights' and 'metadata'")
        meta = dict(obj["metadata"])
        weights = obj["weights"]
        num_bits = meta.pop("num_bits", None)
        if num_bits is None:
            num_bits = len(next(iter(weights))) if weights else 0
        return cls(
            int(num_bits),
            weights,
            meta.pop("kind", PROBABILITY),
            meta.pop("shots", None),
            float(meta.pop("clipped_mass", 0.0)),
            metadata=meta,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"


def normalize(d: Distribution) -> Distribution:
    """Clip negative weights, drop zeros and rescale to a probability distribution.

    The removed negative mass is added to ``clipped_mass``.
    """
    clipped = d.negative_mass()
    kept = {k: w for k, w in d.table.items() if w > 0}
    total = math.fsum(kept.values())
    if not total > 0:
        raise DegenerateDistributionError("distribution has no positive mass")
    table = {k: w / total for k, w in kept.items()}
    return Distribution(
        d.num_bits, table, PROBABILITY, d.shots, d.clipped_mass + clipped, metadata=d.metadata
    )


merge_distributions_normalize = normalize


def from_counts(counts: dict, num_bits: int) -> Distribution:
    shots = sum(counts.values())
    table = {k: c / shots for k, c in counts.items() if c}
    return Distribution(num_bits, table, PROBABILITY, shots)


def load_distribution(path) -> Distribution:
    with open(path, encoding="utf-8") as fh:
        return Distribution.from_json_obj(json.load(fh))


def total_variation(p: Distribution, q: Distribution) -> float:
    if p.num_bits != q.num_bits:
        raise ValidationError("layout mismatch")
    keys = set(p.table) | set(q.table)
    return 0.5 * math.fsum(abs(p[k] - q[k]) for k in keys)
