"""Per-qubit simulated mitigation jobs and campaigns.

For each protected qubit k: wrap the circuit in a single Z-check sandwich,
cut qubit k's wire just after the left check and just before the right
check, run the fragment holding the ancilla and both checks noiselessly and
the fragment holding the original circuit on the noisy backend, reconstruct,
and post-select on the ancilla.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .core.circuit import Circuit
from .core.distribution import Distribution
from .core.errors import PlanningError, SqemError, ValidationError
from .core.seeding import derive_seed
from .cut import HARDWARE, NOISELESS, Backend, CutPoint, cut_wires, enumerate_variants, execute_and_reconstruct
from .pcs import SandwichCircuit, build_z_check, post_select, wrap
from .sim.noise import NoiseModel
from .sim.simulator import ExecutionReport, execute_exact, sample

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SqemJob:
    base_circuit: Circuit
    protected_qubit: int
    noise: NoiseModel | None = None
    shots_per_variant: int | None = None  # None: main fragment evaluated exactly
    seed: int = 0
    frame: object = "auto"
    jobs: int = 1


@dataclass
class SqemCampaign:
    jobs: list
    unmitigated: ExecutionReport
    mitigated: dict
    costs: dict = field(default_factory=dict)

    @property
    def hardware_executions(self) -> int:
        """Noisy-backend circuit configurations, the unmitigated run included."""
        return 1 + sum(c["hardware_configurations"] for c in self.costs.values())

    def to_json_obj(self) -> dict:
        return {
            "qubits": sorted(self.mitigated),
            "unmitigated": self.unmitigated.distribution.to_json_obj(),
            "mitigated": {str(k): self.mitigated[k].to_json_obj() for k in sorted(self.mitigated)},
            "costs": {str(k): self.costs[k] for k in sorted(self.costs)},
            "hardware_executions": self.hardware_executions,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"


def plan_cuts_for_check(s: SandwichCircuit, k: int) -> list[CutPoint]:
    """Two cuts on qubit k: right after the left check and right before the right check."""
    idx = [i for i, p in enumerate(s.pairs) if p.target_qubit == k]
    if len(idx) != 1 or len(s.pairs) != 1:
        raise PlanningError(f"sandwich must hold exactly one check pair on qubit {k}, found {len(idx)} of {len(s.pairs)}")
    (i,) = idx
    after_left = s.left_blocks[i][1]
    before_right = s.right_blocks[i][0]
    if before_right <= after_left:
        raise PlanningError("left and right checks are adjacent; nothing to protect")
    gates = s.circuit.gates
    if k not in gates[after_left - 1].qubits or k not in gates[before_right].qubits:
        raise PlanningError("check boundaries do not act on the protected qubit")
    return [CutPoint(k, after_left), CutPoint(k, before_right)]


def _split_for_job(s: SandwichCircuit, k: int):
    cuts = plan_cuts_for_check(s, k)
    fs = cut_wires(s.circuit, cuts)
    ancilla = s.pairs[0].ancilla
    tags = tuple(NOISELESS if ancilla in f.origin else HARDWARE for f in fs.fragments)
    fs = fs.with_backends(tags)
    (lo, hi), (ro, rh) = s.left_blocks[0], s.right_blocks[0]
    n_gates = len(s.circuit.gates)
    allowed = set(range(lo)) | set(range(lo, hi)) | set(range(ro, rh)) | set(range(rh, n_gates))
    for f in fs.fragments:
        if f.backend == NOISELESS and not set(f.gate_indices) <= allowed:
            raise PlanningError("mitigation fragment would contain gates of the protected circuit")
        if f.backend == HARDWARE and set(f.gate_indices) & (set(range(lo, hi)) | set(range(ro, rh))):
            raise PlanningError("main fragment would contain check gates")
    return fs


def run_job(j: SqemJob) -> Distribution:
    """Post-selected distribution P_M_k with cost and diagnostic metadata."""
    k = j.protected_qubit
    pair = build_z_check(j.base_circuit, k, frame=j.frame)
    s = wrap(j.base_circuit, [pair])
    fs = _split_for_job(s, k)
    backends = {
        HARDWARE: Backend(j.noise, exact=j.shots_per_variant is None),
        NOISELESS: Backend(None, exact=True),
    }
    if backends[NOISELESS].noise is not None or not backends[NOISELESS].exact:
        raise SqemError("mitigation backend must be noiseless and exact")
    variants = enumerate_variants(fs)
    rec = execute_and_reconstruct(
        fs, variants, backends, j.shots_per_variant, derive_seed(j.seed, "job", k), jobs=j.jobs
    )
    try:
        ps = post_select(rec.joint, s.ancilla_bits)
    except SqemError as exc:
        raise type(exc)(f"job on qubit {k}: {exc}") from exc
    meta = {
        "protected_qubit": k,
        "retained_fraction": ps.retained_fraction,
        "negativity": rec.negativity,
        "variants": rec.terms_executed,
        "hardware_configurations": rec.executions.get(HARDWARE, 0),
        "noiseless_configurations": rec.executions.get(NOISELESS, 0),
    }
    d = ps.distribution
    return Distribution(d.num_bits, d.table, d.kind, j.shots_per_variant, d.clipped_mass, metadata=meta)


@dataclass(frozen=True)
class CampaignConfig:
    circuit: Circuit
    qubits: tuple[int, ...]
    noise: NoiseModel | None = None
    shots: int | None = 10000  # None: every noisy execution is exact
    seed: int = 0
    frame: object = "auto"
    jobs: int = 1


def run_unmitigated(circuit: Circuit, noise, shots, seed) -> ExecutionReport:
    if shots is None:
        return execute_exact(circuit, noise)
    return sample(circuit, noise, shots, derive_seed(seed, "unmitigated"))


def run_campaign(cfg: CampaignConfig) -> SqemCampaign:
    qubits = tuple(cfg.qubits)
    if not qubits:
        raise ValidationError("campaign needs at least one protected qubit")
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < cfg.circuit.num_qubits for q in qubits):
        raise ValidationError(f"bad protected qubit list {qubits}")
    if cfg.circuit.measured_qubits != tuple(range(cfg.circuit.num_qubits)):
        raise ValidationError("campaign circuits must measure all qubits in order")
    jobs = [SqemJob(cfg.circuit, k, cfg.noise, cfg.shots, cfg.seed, cfg.frame) for k in qubits]
    unmitigated = run_unmitigated(cfg.circuit, cfg.noise, cfg.shots, cfg.seed)

    def run_one(job):
        try:
            return run_job(job)
        except SqemError as exc:
            done = [q for q in qubits if q != job.protected_qubit]
            raise SqemError(f"campaign aborted at qubit {job.protected_qubit}: {exc}; other jobs: {done}") from exc

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(job) for job in jobs]
    mitigated = {job.protected_qubit: d for job, d in zip(jobs, results)}
    costs = {
        k: {
            "variants": d.metadata["variants"],
            "hardware_configurations": d.metadata["hardware_configurations"],
            "noiseless_configurations": d.metadata["noiseless_configurations"],
            "shots_per_configuration": cfg.shots,
        }
        for k, d in mitigated.items()
    }
    return SqemCampaign(jobs, unmitigated, mitigated, costs)
