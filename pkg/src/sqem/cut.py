"""Wire cutting: split a circuit into two fragments and recombine their statistics.

A wire cut replaces the identity channel on one qubit by the measure-and-prepare
expansion over {I, X, Y, Z},

    rho = 1/2 * sum_M  M * tr(M rho),   M = sum_s lambda_s |s><s|.

Each cut variant is a (basis, prepared-eigenstate sign) pair with weight
``1/2 * lambda_sign`` (``+1/2`` for both identity variants). The measuring
fragment contributes the basis-signed outcome sum ``sum_t lambda_t P(.., t)``,
measured in the X, Y or Z setting (I reuses the Z setting).
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core.circuit import Circuit
from .core.distribution import QUASI, Distribution
from .core.errors import CombinatorialBudgetError, ExecutionError, InfeasibleCutError, ValidationError
from .core.gates import Gate
from .core.seeding import derive_seed
from .sim.noise import NoiseModel
from .sim.simulator import exact_probabilities, sample_counts

log = logging.getLogger(__name__)

HARDWARE = "hardware-emulated"
NOISELESS = "noiseless"

BASES = ("I", "X", "Y", "Z")
SIGNS = ("+", "-")
EIGENSTATE = {
    ("I", "+"): "0",
    ("I", "-"): "1",
    ("Z", "+"): "0",
    ("Z", "-"): "1",
    ("X", "+"): "+",
    ("X", "-"): "-",
    ("Y", "+"): "+i",
    ("Y", "-"): "-i",
}
SETTING = {"I": "Z", "X": "X", "Y": "Y", "Z": "Z"}
_OUTCOME_SIGNS = {"I": np.array([1.0, 1.0]), "X": np.array([1.0, -1.0]), "Y": np.array([1.0, -1.0]), "Z": np.array([1.0, -1.0])}

MAX_CUTS = 4


@dataclass(frozen=True, order=True)
class CutPoint:
    """Cut on ``qubit``'s wire between gate ``position - 1`` and gate ``position``."""

    qubit: int
    position: int

    @classmethod
    def parse(cls, text: str) -> "CutPoint":
        """Parse ``q<k>@<pos>``."""
        try:
            q, pos = text.split("@")
            if not q.startswith("q"):
                raise ValueError
            return cls(int(q[1:]), int(pos))
        except ValueError:
            raise ValidationError(f"bad cut spec {text!r}, expected q<k>@<pos>") from None

    def __str__(self):
        return f"q{self.qubit}@{self.position}"


@dataclass(frozen=True)
class Fragment:
    circuit: Circuit
    origin: tuple[int, ...]
    output_bits: tuple[int, ...]
    measure_terminals: tuple[tuple[int, int], ...]
    prepare_terminals: tuple[tuple[int, int], ...]
    gate_indices: tuple[int, ...]
    backend: str = HARDWARE

    @property
    def num_outputs(self) -> int:
        return len(self.output_bits)

    @property
    def measure_cuts(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.measure_terminals)

    @property
    def prepare_cuts(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.prepare_terminals)

    def configure(self, settings, preps) -> Circuit:
        """Concrete circuit for measurement settings / preparation labels per terminal."""
        c = self.circuit
        labels = list(c.preparations)
        for (_, q), label in zip(self.prepare_terminals, preps):
            labels[q] = label
        suffix = []
        for (_, q), basis in zip(self.measure_terminals, settings):
            if basis == "X":
                suffix.append(Gate("h", (q,)))
            elif basis == "Y":
                suffix += [Gate("sdg", (q,)), Gate("h", (q,))]
        return Circuit(c.num_qubits, c.gates + tuple(suffix), c.measured_qubits, tuple(labels))

    def with_backend(self, backend: str) -> "Fragment":
        return Fragment(
            self.circuit, self.origin, self.output_bits, self.measure_terminals,
            self.prepare_terminals, self.gate_indices, backend,
        )


@dataclass(frozen=True)
class FragmentSet:
    original: Circuit
    cuts: tuple[CutPoint, ...]
    upstream: Fragment
    downstream: Fragment | None
    # cut index -> ((fragment index, local qubit) measuring, (fragment index, local qubit) preparing)
    terminal_map: tuple = ()

    @property
    def fragments(self) -> tuple[Fragment, ...]:
        return (self.upstream,) if self.downstream is None else (self.upstream, self.downstream)

    @property
    def backend_tags(self) -> tuple[str, ...]:
        return tuple(f.backend for f in self.fragments)

    def with_backends(self, tags) -> "FragmentSet":
        frags = [f.with_backend(t) for f, t in zip(self.fragments, tags)]
        return FragmentSet(
            self.original, self.cuts, frags[0], frags[1] if len(frags) > 1 else None, self.terminal_map
        )

    def recompose(self) -> tuple[Gate, ...]:
        """Original gate sequence rebuilt from the fragments."""
        owned = {}
        for f in self.fragments:
            for local_gate, idx in zip(f.circuit.gates, f.gate_indices):
                if idx in owned:
                    raise InfeasibleCutError(f"gate {idx} appears in both fragments")
                owned[idx] = local_gate.remap(f.origin)
        return tuple(owned[i] for i in sorted(owned))


@dataclass(frozen=True)
class VariantAssignment:
    choices: tuple[tuple[str, str], ...]
    weight: float

    def eigenstate(self, cut: int) -> str:
        return EIGENSTATE[self.choices[cut]]

    def basis(self, cut: int) -> str:
        return self.choices[cut][0]


@dataclass(frozen=True)
class Backend:
    """Execution config for one fragment tag; ``exact=False`` samples ``shots_per_variant`` shots."""

    noise: NoiseModel | None = None
    exact: bool = True


@dataclass(frozen=True)
class ReconstructionResult:
    joint: Distribution
    terms_executed: int
    negativity: float
    executions: dict = field(default_factory=dict)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def cut_wires(c: Circuit, cuts) -> FragmentSet:
    cuts = tuple(cuts)
    n_gates = len(c.gates)
    seen = set()
    for cp in cuts:
        if not 0 <= cp.qubit < c.num_qubits:
            raise ValidationError(f"cut {cp} on nonexistent qubit")
        if not 0 <= cp.position <= n_gates:
            raise ValidationError(f"cut {cp} position outside 0..{n_gates}")
        if (cp.qubit, cp.position) in seen:
            raise ValidationError(f"duplicate cut {cp}")
        seen.add((cp.qubit, cp.position))

    if not cuts:
        frag = Fragment(
            c, tuple(range(c.num_qubits)), tuple(range(c.num_measured)), (), (), tuple(range(n_gates))
        )
        return FragmentSet(c, (), frag, None, ())

    positions = {q: sorted(cp.position for cp in cuts if cp.qubit == q) for q in range(c.num_qubits)}

    def segment(q, gate_index):
        return sum(1 for p in positions[q] if p <= gate_index)

    uf = _UnionFind()
    for q in range(c.num_qubits):
        for s in range(len(positions[q]) + 1):
            uf.find((q, s))
    for i, g in enumerate(c.gates):
        segs = [(q, segment(q, i)) for q in g.qubits]
        for other in segs[1:]:
            uf.union(segs[0], other)

    # cut i joins segment (q, s) [measured] to (q, s+1) [prepared]
    cut_sides = []
    for cp in cuts:
        s = positions[cp.qubit].index(cp.position)
        cut_sides.append((uf.find((cp.qubit, s)), uf.find((cp.qubit, s + 1))))

    comp_a, comp_b = cut_sides[0]
    for i, (m, p) in enumerate(cut_sides):
        if m == p:
            raise InfeasibleCutError(f"cut {cuts[i]} does not separate the circuit; both sides share gates")
        if {m, p} != {comp_a, comp_b}:
            raise InfeasibleCutError(
                f"cut {cuts[i]} would create a third fragment; only two-fragment cuts are supported"
            )

    # components touching no cut (idle wires, disjoint subcircuits) join the
    # preparing side of the first cut
    def fragment_of(seg):
        return 0 if uf.find(seg) == comp_a else 1

    segs_by_frag = {0: [], 1: []}
    for q in range(c.num_qubits):
        for s in range(len(positions[q]) + 1):
            segs_by_frag[fragment_of((q, s))].append((q, s))

    cut_index = {(cp.qubit, cp.position): i for i, cp in enumerate(cuts)}
    measured_pos = {q: i for i, q in enumerate(c.measured_qubits)}
    frags = []
    local_of = {}
    for fi in (0, 1):
        segs = segs_by_frag[fi]
        local = {seg: j for j, seg in enumerate(segs)}
        for seg, j in local.items():
            local_of[seg] = (fi, j)
        origin = tuple(q for q, _ in segs)
        preps = []
        outputs = []
        meas_terms = []
        prep_terms = []
        for (q, s), j in local.items():
            last = s == len(positions[q])
            if s == 0:
                preps.append(c.preparations[q])
            else:
                preps.append("0")
                prep_terms.append((cut_index[(q, positions[q][s - 1])], j))
            if last:
                if q in measured_pos:
                    outputs.append((measured_pos[q], j))
            else:
                meas_terms.append((cut_index[(q, positions[q][s])], j))
        outputs.sort()
        meas_terms.sort()
        prep_terms.sort()
        gates = []
        gate_idx = []
        for i, g in enumerate(c.gates):
            segs_g = [(q, segment(q, i)) for q in g.qubits]
            if fragment_of(segs_g[0]) == fi:
                gates.append(Gate(g.kind, tuple(local[sg] for sg in segs_g), g.params))
                gate_idx.append(i)
        measured = tuple(j for _, j in outputs) + tuple(j for _, j in meas_terms)
        circ = Circuit(len(segs), tuple(gates), measured, tuple(preps))
        frags.append(
            Fragment(circ, origin, tuple(p for p, _ in outputs), tuple(meas_terms), tuple(prep_terms), tuple(gate_idx))
        )

    tmap = []
    for cp in cuts:
        s = positions[cp.qubit].index(cp.position)
        tmap.append((local_of[(cp.qubit, s)], local_of[(cp.qubit, s + 1)]))
    fs = FragmentSet(c, cuts, frags[0], frags[1], tuple(tmap))
    if fs.recompose() != c.gates:
        raise InfeasibleCutError("fragments do not recompose to the original circuit")
    return fs


def enumerate_variants(fs: FragmentSet, max_cuts: int = MAX_CUTS) -> list[VariantAssignment]:
    k = len(fs.cuts)
    if k > max_cuts:
        raise CombinatorialBudgetError(f"{k} cuts need 8^{k} = {8**k} variants; cap is {max_cuts} cuts")
    per_cut = [(b, s) for b in BASES for s in SIGNS]
    out = []
    for choices in itertools.product(per_cut, repeat=k):
        w = 1.0
        for b, s in choices:
            w *= 0.5 if (b == "I" or s == "+") else -0.5
        out.append(VariantAssignment(tuple(choices), w))
    return out


def _config_key(f: Fragment, v: VariantAssignment):
    settings = tuple(SETTING[v.basis(ci)] for ci in f.measure_cuts)
    preps = tuple(v.eigenstate(ci) for ci in f.prepare_cuts)
    return settings, preps


def _factor_key(f: Fragment, v: VariantAssignment):
    return tuple(v.basis(ci) for ci in f.measure_cuts), tuple(v.eigenstate(ci) for ci in f.prepare_cuts)


def fragment_probabilities(f: Fragment, key, backend: Backend, shots, seed):
    circ = f.configure(*key)
    noise = backend.noise.remap(f.origin) if backend.noise is not None else None
    probs = exact_probabilities(circ, noise)
    if backend.exact:
        return np.array(probs)
    counts = sample_counts(probs, shots, seed)
    return counts / shots


def execute_and_reconstruct(
    fs: FragmentSet,
    variants,
    backends: dict,
    shots_per_variant: int | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> ReconstructionResult:
    """Run every fragment configuration the variants need and sum the quasi-probability joint."""
    variants = list(variants)
    frags = fs.fragments
    for f in frags:
        if f.backend not in backends:
            raise ValidationError(f"no backend configured for tag {f.backend!r}")
        if not backends[f.backend].exact and not shots_per_variant:
            raise ValidationError("sampled backend needs shots_per_variant")

    # distinct configurations per fragment, in first-needed order
    tasks = []
    first_variant = {}
    for fi, f in enumerate(frags):
        for vi, v in enumerate(variants):
            key = _config_key(f, v)
            if (fi, key) not in first_variant:
                first_variant[(fi, key)] = vi
                tasks.append((fi, key))

    def run(task):
        fi, key = task
        f = frags[fi]
        try:
            return fragment_probabilities(
                f, key, backends[f.backend], shots_per_variant, derive_seed(seed, "fragment", fi, key)
            )
        except Exception as exc:
            raise ExecutionError(f"variant {first_variant[task]} (fragment {fi}, config {key}) failed: {exc}") from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(zip(tasks, pool.map(run, tasks)))
    else:
        results = {t: run(t) for t in tasks}

    executions = {}
    for fi, _ in tasks:
        tag = frags[fi].backend
        executions[tag] = executions.get(tag, 0) + 1

    factors = {}

    def factor(fi, v):
        f = frags[fi]
        fkey = _factor_key(f, v)
        if (fi, fkey) in factors:
            return factors[(fi, fkey)]
        probs = results[(fi, _config_key(f, v))]
        m = len(f.measure_terminals)
        t = probs.reshape((2**f.num_outputs,) + (2,) * m)
        for basis in reversed(fkey[0]):
            t = t @ _OUTCOME_SIGNS[basis]
        factors[(fi, fkey)] = t
        return t

    if len(frags) == 1:
        joint_vec = np.array(results[(0, ((), ()))])
    else:
        acc = np.zeros((2 ** frags[0].num_outputs, 2 ** frags[1].num_outputs))
        for v in variants:
            acc += v.weight * np.outer(factor(0, v), factor(1, v))
        out_a, out_b = frags[0].output_bits, frags[1].output_bits
        m_total = len(out_a) + len(out_b)
        t = acc.reshape((2,) * m_total)
        order = list(out_a) + list(out_b)
        # axis i of t holds original bit order[i]
        t = np.transpose(t, np.argsort(order))
        joint_vec = t.reshape(-1)

    joint = Distribution.from_dense(joint_vec, fs.original.num_measured, QUASI, tol=1e-15)
    return ReconstructionResult(joint, len(variants), joint.negative_mass(), executions)
