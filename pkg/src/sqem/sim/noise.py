"""Synthetic device noise model and its JSON document form.

JSON fields (all optional)::

    {
      "one_qubit_depolarizing": 0.001,
      "two_qubit_depolarizing": 0.01,
      "per_qubit_pauli": {"0": [px, py, pz]},
      "readout_flip": 0.02 | {"0": 0.02},
      "spam_flip": 0.01
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..core.errors import ValidationError


def _prob(name, value):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class NoiseModel:
    one_qubit_depolarizing: float = 0.0
    two_qubit_depolarizing: float = 0.0
    # sorted tuples of (qubit, value) so the model stays hashable
    per_qubit_pauli: tuple = ()
    readout_flip: tuple = ()
    spam_flip: float = 0.0
    readout_flip_default: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "one_qubit_depolarizing", _prob("one_qubit_depolarizing", self.one_qubit_depolarizing))
        object.__setattr__(self, "two_qubit_depolarizing", _prob("two_qubit_depolarizing", self.two_qubit_depolarizing))
        object.__setattr__(self, "spam_flip", _prob("spam_flip", self.spam_flip))
        object.__setattr__(self, "readout_flip_default", _prob("readout_flip", self.readout_flip_default))

        pqp = dict(self.per_qubit_pauli)
        clean = []
        for q, triple in sorted(pqp.items()):
            px, py, pz = (_prob("per_qubit_pauli", v) for v in triple)
            if px + py + pz > 1.0 + 1e-12:
                raise ValidationError(f"px+py+pz > 1 for qubit {q}")
            clean.append((int(q), (px, py, pz)))
        object.__setattr__(self, "per_qubit_pauli", tuple(clean))

        rf = dict(self.readout_flip)
        object.__setattr__(
            self, "readout_flip", tuple((int(q), _prob("readout_flip", f)) for q, f in sorted(rf.items()))
        )

    @property
    def is_trivial(self) -> bool:
        return (
            self.one_qubit_depolarizing == 0.0
            and self.two_qubit_depolarizing == 0.0
            and all(sum(t) == 0.0 for _, t in self.per_qubit_pauli)
            and self.readout_for_all_zero()
            and self.spam_flip == 0.0
        )

    def readout_for_all_zero(self) -> bool:
        return self.readout_flip_default == 0.0 and all(f == 0.0 for _, f in self.readout_flip)

    def pauli_for(self, qubit: int):
        return dict(self.per_qubit_pauli).get(qubit)

    def readout_for(self, qubit: int) -> float:
        return dict(self.readout_flip).get(qubit, self.readout_flip_default)

    def remap(self, origin) -> "NoiseModel":
        """Re-key per-qubit entries for a circuit whose qubit i stands for ``origin[i]``."""
        pqp = dict(self.per_qubit_pauli)
        rf = dict(self.readout_flip)
        return NoiseModel(
            self.one_qubit_depolarizing,
            self.two_qubit_depolarizing,
            tuple((i, pqp[o]) for i, o in enumerate(origin) if o in pqp),
            tuple((i, rf[o]) for i, o in enumerate(origin) if o in rf),
            self.spam_flip,
            self.readout_flip_default,
        )

    def to_json_obj(self) -> dict:
        obj = {
            "one_qubit_depolarizing": self.one_qubit_depolarizing,
            "two_qubit_depolarizing": self.two_qubit_depolarizing,
            "per_qubit_pauli": {str(q): list(t) for q, t in self.per_qubit_pauli},
            "spam_flip": self.spam_flip,
        }
        if self.readout_flip:
            rf = {str(q): f for q, f in self.readout_flip}
            obj["readout_flip"] = rf
            if self.readout_flip_default:
                obj["readout_flip_default"] = self.readout_flip_default
        else:
            obj["readout_flip"] = self.readout_flip_default
        return obj

    @classmethod
    def from_json_obj(cls, obj) -> "NoiseModel":
        known = {"one_qubit_depolarizing", "two_qubit_depolarizing", "per_qubit_pauli", "readout_flip", "spam_flip", "readout_flip_default"}
        extra = set(obj) - known
        if extra:
            raise ValidationError(f"unknown noise fields {sorted(extra)}")
        rf = obj.get("readout_flip", 0.0)
        default = float(obj.get("readout_flip_default", 0.0))
        if isinstance(rf, dict):
            per = tuple((int(q), f) for q, f in rf.items())
        else:
            per, default = (), float(rf)
        pqp = obj.get("per_qubit_pauli", {}) or {}
        for q, t in pqp.items():
            if len(t) != 3:
                raise ValidationError(f"per_qubit_pauli[{q}] needs [px, py, pz]")
        return cls(
            obj.get("one_qubit_depolarizing", 0.0),
            obj.get("two_qubit_depolarizing", 0.0),
            tuple((int(q), tuple(t)) for q, t in pqp.items()),
            per,
            obj.get("spam_flip", 0.0),
            default,
        )


def load_noise(path) -> NoiseModel:
    with open(path, encoding="utf-8") as fh:
        return NoiseModel.from_json_obj(json.load(fh))
