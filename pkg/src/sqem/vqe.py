"""Hardware-efficient ansatz, measurement grouping, energies and the method comparison."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .campaign import CampaignConfig, run_campaign
from .core.circuit import Circuit
from .core.distribution import Distribution
from .core.errors import ValidationError
from .core.gates import Gate
from .core.pauli import Hamiltonian, PauliString, qubitwise_commute
from .core.seeding import derive_seed
from .pcs import build_z_check, post_select, wrap
from .recombine import RecombinationConfig, recombine
from .sim.noise import NoiseModel
from .sim.simulator import execute_exact, sample

METHODS = ("noiseless", "unmitigated", "pcs_noisy", "sqem", "recombined")
ROTATIONS = ("rx", "ry", "rz")


@dataclass(frozen=True)
class AnsatzSpec:
    num_qubits: int
    rotation_kinds: tuple[str, ...] = ("ry", "rz")
    entangler: str = "cz_cascade"
    layers: int = 2

    def __post_init__(self):
        object.__setattr__(self, "rotation_kinds", tuple(r.lower() for r in self.rotation_kinds))
        if self.num_qubits < 1:
            raise ValidationError("ansatz needs at least one qubit")
        if not self.rotation_kinds or any(r not in ROTATIONS for r in self.rotation_kinds):
            raise ValidationError(f"rotation kinds must be drawn from {ROTATIONS}")
        if self.entangler != "cz_cascade":
            raise ValidationError(f"unsupported entangler {self.entangler!r}")
        if self.layers != 2:
            raise ValidationError("only the rotations-entangler-rotations structure is supported")

    @property
    def num_parameters(self) -> int:
        return 2 * self.num_qubits * len(self.rotation_kinds)

    @classmethod
    def from_json_obj(cls, obj) -> "AnsatzSpec":
        return cls(
            int(obj["num_qubits"]),
            tuple(obj.get("rotation_kinds", ("ry", "rz"))),
            obj.get("entangler", "cz_cascade"),
            int(obj.get("layers", 2)),
        )


@dataclass(frozen=True)
class ParameterSet:
    values: tuple[float, ...]
    provenance: str = ""

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("non-finite ansatz parameter")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_json_obj(cls, obj) -> "ParameterSet":
        return cls(tuple(obj["values"]), obj.get("provenance", ""))


@dataclass(frozen=True)
class MeasurementGroup:
    basis: str
    terms: tuple[PauliString, ...]

    @property
    def suffix(self) -> tuple[Gate, ...]:
        gates = []
        for q, ch in enumerate(self.basis):
            if ch == "X":
                gates.append(Gate("h", (q,)))
            elif ch == "Y":
                gates += [Gate("sdg", (q,)), Gate("h", (q,))]
        return tuple(gates)


@dataclass(frozen=True)
class EnergyReport:
    method: str
    energy: float
    per_term: dict = field(default_factory=dict)
    shots_used: int | None = None
    qubit: int | None = None

    @property
    def label(self) -> str:
        return self.method if self.qubit is None else f"{self.method}_{self.qubit}"

    def to_json_obj(self) -> dict:
        return {
            "method": self.label,
            "energy": self.energy,
            "per_term": dict(self.per_term),
            "shots_used": self.shots_used,
        }


def build_ansatz(spec: AnsatzSpec, params: ParameterSet, hf_occupation: str = "") -> Circuit:
    n = spec.num_qubits
    if len(params.values) != spec.num_parameters:
        raise ValidationError(f"ansatz needs {spec.num_parameters} parameters, got {len(params.values)}")
    occ = hf_occupation or "0" * n
    if len(occ) != n or any(ch not in "01" for ch in occ):
        raise ValidationError(f"occupation must be a {n}-bit string, got {hf_occupation!r}")
    gates = [Gate("x", (q,)) for q, ch in enumerate(occ) if ch == "1"]
    vals = iter(params.values)

    def rotation_layer():
        return [Gate(kind, (q,), (next(vals),)) for q in range(n) for kind in spec.rotation_kinds]

    gates += rotation_layer()
    gates += [Gate("cz", (q, q + 1)) for q in range(n - 1)]
    gates += rotation_layer()
    return Circuit(n, tuple(gates))


def measurement_groups(h: Hamiltonian) -> list[MeasurementGroup]:
    """First-fit qubit-wise-commuting grouping; identity terms join the first group."""
    bases: list[list[str]] = []
    members: list[list[PauliString]] = []
    identity = []
    for t in h.terms:
        if t.is_identity():
            identity.append(t)
            continue
        for b, m in zip(bases, members):
            if qubitwise_commute("".join(b), t.letters):
                for q, ch in enumerate(t.letters):
                    if ch != "I":
                        b[q] = ch
                m.append(t)
                break
        else:
            bases.append(list(t.letters))
            members.append([t])
    if not bases:
        bases.append(["I"] * h.num_qubits)
        members.append([])
    members[0] = identity + members[0]
    return [MeasurementGroup("".join(b), tuple(m)) for b, m in zip(bases, members)]


def term_expectation(term: PauliString, d: Distribution) -> float:
    support = term.support
    acc = []
    for key, w in d.items():
        parity = sum(key[q] == "1" for q in support) & 1
        acc.append(-w if parity else w)
    return math.fsum(acc)


def energy_from_distributions(h: Hamiltonian, groups, group_results: dict, method: str = "", qubit=None) -> EnergyReport:
    per_term = {}
    shots = 0
    for gi, g in enumerate(groups):
        if gi not in group_results:
            raise ValidationError(f"no distribution for measurement group {gi} ({g.basis})")
        d = group_results[gi]
        if d.num_bits != h.num_qubits:
            raise ValidationError(f"group {gi} distribution has {d.num_bits} bits, expected {h.num_qubits}")
        shots += d.shots or 0
        for t in g.terms:
            per_term[t.letters] = 1.0 if t.is_identity() else term_expectation(t, d)
    energy = math.fsum(t.coefficient * per_term[t.letters] for t in h.terms)
    return EnergyReport(method, energy, per_term, shots or None, qubit)


@dataclass(frozen=True)
class ComparisonConfig:
    shots: int | None = 10000
    seed: int = 0
    qubits: tuple[int, ...] | None = None
    threshold: float = 1e-4
    max_iterations: int = 10_000
    frame: object = "auto"
    jobs: int = 1


@dataclass
class ComparisonResult:
    reports: list
    recombination: dict  # group index -> RecombinationResult
    hardware_executions: int

    def by_label(self) -> dict:
        return {r.label: r for r in self.reports}


def _run_pcs_noisy(circuit, k, noise, shots, seed, frame):
    s = wrap(circuit, [build_z_check(circuit, k, frame=frame)])
    if shots is None:
        d = execute_exact(s.circuit, noise).distribution
    else:
        d = sample(s.circuit, noise, shots, seed).distribution
    return post_select(d, s.ancilla_bits).distribution


def run_comparison(
    spec: AnsatzSpec,
    params: ParameterSet,
    h: Hamiltonian,
    noise: NoiseModel | None,
    cfg: ComparisonConfig = ComparisonConfig(),
    hf_occupation: str = "",
) -> ComparisonResult:
    """Energies for every method; all noisy methods draw from one seed stream per group."""
    if h.num_qubits != spec.num_qubits:
        raise ValidationError(f"Hamiltonian has {h.num_qubits} qubits, ansatz {spec.num_qubits}")
    ansatz = build_ansatz(spec, params, hf_occupation)
    qubits = tuple(range(spec.num_qubits)) if cfg.qubits is None else tuple(cfg.qubits)
    groups = measurement_groups(h)
    rcfg = RecombinationConfig(cfg.threshold, cfg.max_iterations)

    results = {m: {} for m in ("noiseless", "unmitigated", "recombined")}
    per_qubit = {("pcs_noisy", k): {} for k in qubits} | {("sqem", k): {} for k in qubits}
    recomb = {}
    hardware = 0
    for gi, g in enumerate(groups):
        circ = ansatz.extend(g.suffix)
        group_seed = derive_seed(cfg.seed, "group", gi)
        results["noiseless"][gi] = execute_exact(circ).distribution
        camp = run_campaign(CampaignConfig(circ, qubits, noise, cfg.shots, group_seed, cfg.frame, cfg.jobs))
        hardware += camp.hardware_executions
        results["unmitigated"][gi] = camp.unmitigated.distribution
        for k in qubits:
            per_qubit[("sqem", k)][gi] = camp.mitigated[k]
            per_qubit[("pcs_noisy", k)][gi] = _run_pcs_noisy(
                circ, k, noise, cfg.shots, derive_seed(group_seed, "pcs_noisy", k), cfg.frame
            )
            hardware += 1
        rec = recombine(camp.unmitigated.distribution, camp.mitigated, rcfg)
        recomb[gi] = rec
        results["recombined"][gi] = rec.distribution

    reports = [energy_from_distributions(h, groups, results["noiseless"], "noiseless")]
    reports.append(energy_from_distributions(h, groups, results["unmitigated"], "unmitigated"))
    for k in qubits:
        reports.append(energy_from_distributions(h, groups, per_qubit[("pcs_noisy", k)], "pcs_noisy", k))
    for k in qubits:
        reports.append(energy_from_distributions(h, groups, per_qubit[("sqem", k)], "sqem", k))
    reports.append(energy_from_distributions(h, groups, results["recombined"], "recombined"))
    return ComparisonResult(reports, recomb, hardware)


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def energy_exact(h: Hamiltonian, circuit: Circuit) -> float:
    """<psi|H|psi> by dense statevector, independent of sampling and grouping."""
    from .sim.simulator import run_statevector

    psi = run_statevector(circuit)
    return float(np.real(np.vdot(psi, h.matrix() @ psi)))
