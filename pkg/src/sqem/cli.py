"""Command-line entry point: ``sqem <command> ...``.

Every command writes its artifacts into ``--out`` (default ``$SQEM_OUT_DIR``
or the working directory) through temp-file-and-rename, plus a
``manifest.json`` describing the run.

Exit codes: 0 success, 2 usage, 3 invalid input, 4 execution failure,
5 recombination did not converge (artifacts are still written).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .campaign import CampaignConfig, run_campaign
from .core.circuit import gate_text, load_circuit, serialize_circuit
from .core.distribution import load_distribution
from .core.errors import SqemError, ValidationError
from .core.pauli import load_hamiltonian
from .core.seeding import derive_seed
from .cut import HARDWARE, Backend, CutPoint, cut_wires, enumerate_variants, execute_and_reconstruct
from .pcs import build_z_check, post_select, wrap
from .recombine import RecombinationConfig, recombine
from .sim.noise import NoiseModel, load_noise
from .sim.simulator import execute_exact, sample
from .vqe import AnsatzSpec, ComparisonConfig, ParameterSet, run_comparison

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_EXECUTION = 4
EXIT_NOT_CONVERGED = 5

OUT_ENV = "SQEM_OUT_DIR"
SCHEMAS = (
    "distribution",
    "manifest",
    "reconstruction",
    "sandwich",
    "post_selection",
    "campaign",
    "recombination",
    "energy_report",
    "comparison",
)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    duration_seconds: float = 0.0
    version: str = __version__

    def to_json_obj(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "duration_seconds": self.duration_seconds,
            "version": self.version,
        }


class Run:
    """Collects inputs and outputs of one invocation and writes the manifest."""

    def __init__(self, command: str, out_dir: Path, config: dict):
        self.out = out_dir
        self.manifest = RunManifest(command, config)
        self.t0 = time.perf_counter()

    def input(self, path):
        if path is not None:
            self.manifest.inputs[str(path)] = file_digest(path)
        return path

    def write(self, name: str, text: str) -> None:
        atomic_write(self.out / name, text)
        self.manifest.outputs.append(name)

    def write_json(self, name: str, obj) -> None:
        self.write(name, dumps(obj))

    def finish(self) -> None:
        self.manifest.duration_seconds = round(time.perf_counter() - self.t0, 6)
        atomic_write(self.out / "manifest.json", dumps(self.manifest.to_json_obj()))


def _noise(run: Run, path):
    return load_noise(run.input(path)) if path else None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _frame(text: str):
    if text not in ("auto", "none"):
        raise argparse.ArgumentTypeError("frame must be 'auto' or 'none'")
    return None if text == "none" else "auto"


# ---------------------------------------------------------------- commands


def cmd_simulate(args, run: Run) -> int:
    c = load_circuit(run.input(args.circuit))
    noise = _noise(run, args.noise)
    if args.exact:
        rep = execute_exact(c, noise)
    else:
        seed = derive_seed(args.seed, "simulate")
        run.manifest.seeds["simulate"] = seed
        rep = sample(c, noise, args.shots, seed)
    obj = rep.distribution.to_json_obj()
    obj["metadata"]["backend"] = rep.backend
    run.write_json("distribution.json", obj)
    return EXIT_OK


def cmd_cut(args, run: Run) -> int:
    c = load_circuit(run.input(args.circuit))
    noise = _noise(run, args.noise)
    cuts = [CutPoint.parse(t) for t in args.cut]
    fs = cut_wires(c, cuts)
    exact = args.shots_per_variant is None
    seed = derive_seed(args.seed, "cut")
    run.manifest.seeds["cut"] = seed
    rec = execute_and_reconstruct(
        fs, enumerate_variants(fs), {HARDWARE: Backend(noise, exact)}, args.shots_per_variant, seed, args.jobs
    )
    obj = {
        "joint": rec.joint.to_json_obj(),
        "terms_executed": rec.terms_executed,
        "negativity": rec.negativity,
        "executions": rec.executions,
        "cuts": [str(cp) for cp in cuts],
        "fragments": [
            {"qubits": list(f.origin), "backend": f.backend, "circuit": serialize_circuit(f.circuit)}
            for f in fs.fragments
        ],
    }
    run.write_json("reconstruction.json", obj)
    return EXIT_OK


def cmd_pcs(args, run: Run) -> int:
    c = load_circuit(run.input(args.circuit))
    pairs = [build_z_check(c, k, frame=args.frame) for k in args.check_qubit]
    s = wrap(c, pairs)
    doc = {
        "circuit": serialize_circuit(s.circuit),
        "ancilla_bits": list(s.ancilla_bits),
        "compute_bits": list(s.compute_bits),
        "pairs": [
            {
                "target_qubit": p.target_qubit,
                "ancilla": p.ancilla,
                "left": [gate_text(g) for g in p.left],
                "right": [gate_text(g) for g in p.right],
                "left_block": list(lb),
                "right_block": list(rb),
            }
            for p, lb, rb in zip(s.pairs, s.left_blocks, s.right_blocks)
        ],
    }
    run.write_json("sandwich.json", doc)
    if args.run:
        noise = _noise(run, args.noise)
        if args.exact:
            d = execute_exact(s.circuit, noise).distribution
        else:
            seed = derive_seed(args.seed, "pcs")
            run.manifest.seeds["pcs"] = seed
            d = sample(s.circuit, noise, args.shots, seed).distribution
        ps = post_select(d, s.ancilla_bits)
        run.write_json(
            "post_selection.json",
            {
                "distribution": ps.distribution.to_json_obj(),
                "retained_fraction": ps.retained_fraction,
                "clipped_mass": ps.clipped_mass,
            },
        )
    return EXIT_OK


def cmd_sqem_run(args, run: Run) -> int:
    c = load_circuit(run.input(args.circuit))
    noise = _noise(run, args.noise)
    qubits = args.qubits if args.qubits is not None else tuple(range(c.num_qubits))
    shots = None if args.exact else args.shots
    run.manifest.seeds["root"] = args.seed
    camp = run_campaign(CampaignConfig(c, qubits, noise, shots, args.seed, args.frame, args.jobs))
    run.write_json("unmitigated.json", camp.unmitigated.distribution.to_json_obj())
    for k in sorted(camp.mitigated):
        run.write_json(f"mitigated_q{k}.json", camp.mitigated[k].to_json_obj())
    summary = camp.to_json_obj()
    summary.pop("unmitigated")
    summary.pop("mitigated")
    run.write_json("campaign.json", summary)
    return EXIT_OK


def _mitigated_arg(text: str):
    k, sep, path = text.partition("=")
    if not sep or not path:
        raise argparse.ArgumentTypeError(f"expected k=file, got {text!r}")
    try:
        return int(k), path
    except ValueError:
        raise argparse.ArgumentTypeError(f"qubit index must be an integer, got {k!r}") from None


def cmd_recombine(args, run: Run) -> int:
    p_um = load_distribution(run.input(args.unmitigated))
    mitigated = {}
    for k, path in args.mitigated:
        if k in mitigated:
            raise ValidationError(f"qubit {k} given twice")
        mitigated[k] = load_distribution(run.input(path))
    res = recombine(p_um, mitigated, RecombinationConfig(args.threshold, args.max_iterations))
    obj = res.distribution.to_json_obj()
    obj["metadata"]["deviation"] = {str(k): v for k, v in sorted(res.deviation.items())}
    run.write_json("recombined.json", obj)
    run.write("trace.csv", res.trace_csv())
    if not res.converged:
        print(f"recombination did not converge after {res.iterations} iterations "
              f"(last Hellinger step {res.final_step:.3g})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _mean_stderr(xs):
    m = math.fsum(xs) / len(xs)
    if len(xs) < 2:
        return m, 0.0
    var = math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)
    return m, math.sqrt(var / len(xs))


def cmd_vqe_compare(args, run: Run) -> int:
    ansatz_obj = json.loads(Path(run.input(args.ansatz)).read_text(encoding="utf-8"))
    spec = AnsatzSpec.from_json_obj(ansatz_obj)
    params = ParameterSet.from_json_obj(json.loads(Path(run.input(args.params)).read_text(encoding="utf-8")))
    h = load_hamiltonian(run.input(args.ham))
    noise = _noise(run, args.noise)
    occupation = args.occupation if args.occupation is not None else ansatz_obj.get("hf_occupation", "")
    shots = None if args.exact else args.shots
    seeds = [derive_seed(args.seed, "replicate", i) for i in range(args.seeds)]
    run.manifest.seeds["replicates"] = seeds
    per_seed = []
    for s in seeds:
        cfg = ComparisonConfig(shots, s, args.qubits, args.threshold, frame=args.frame, jobs=args.jobs)
        per_seed.append(run_comparison(spec, params, h, noise, cfg, occupation))

    labels = [r.label for r in per_seed[0].reports]
    rows = []
    summary = {"methods": [], "replicates": len(seeds), "hardware_executions_per_replicate": per_seed[0].hardware_executions}
    for label in labels:
        reps = [res.by_label()[label] for res in per_seed]
        energies = [r.energy for r in reps]
        mean, stderr = _mean_stderr(energies)
        per_term = {t: math.fsum(r.per_term[t] for r in reps) / len(reps) for t in reps[0].per_term}
        doc = {
            "method": label,
            "energy": mean,
            "stderr": stderr,
            "per_term": per_term,
            "shots_used": reps[0].shots_used,
            "energies": energies,
        }
        run.write_json(f"report_{label}.json", doc)
        rows.append((label, mean, stderr))
        summary["methods"].append(label)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "energy", "stderr"])
    for label, mean, stderr in rows:
        w.writerow([label, repr(mean), repr(stderr)])
    run.write("energies.csv", buf.getvalue())
    converged = all(r.converged for res in per_seed for r in res.recombination.values())
    summary["recombination_converged"] = converged
    run.write_json("comparison.json", summary)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--seed", type=int, default=0, help="root seed")
    common.add_argument("--jobs", type=_positive, default=1, help="worker threads")

    noisy = argparse.ArgumentParser(add_help=False)
    noisy.add_argument("--noise", help="noise model JSON")
    noisy.add_argument("--shots", type=_positive, default=10000)
    noisy.add_argument("--exact", action="store_true", help="use exact probabilities instead of shots")

    p = _Parser(prog="sqem", description="Single-qubit error mitigation pipeline.")
    p.add_argument("--version", action="version", version=f"sqem {__version__}")
    p.add_argument("--schema", nargs="?", const="", metavar="NAME", help="print a JSON schema, or list them")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common, noisy], help="run a circuit on the simulator")
    s.add_argument("--circuit", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("cut", parents=[common], help="cut wires and reconstruct the joint distribution")
    s.add_argument("--circuit", required=True)
    s.add_argument("--cut", action="append", required=True, metavar="q<k>@<pos>")
    s.add_argument("--noise")
    s.add_argument("--shots-per-variant", type=_positive)
    s.set_defaults(func=cmd_cut)

    s = sub.add_parser("pcs", parents=[common, noisy], help="build a Pauli check sandwich")
    s.add_argument("--circuit", required=True)
    s.add_argument("--check-qubit", type=int, action="append", required=True)
    s.add_argument("--frame", type=_frame, default="auto", help="auto (default) or none")
    s.add_argument("--run", action="store_true", help="also execute and post-select")
    s.set_defaults(func=cmd_pcs)

    s = sub.add_parser("sqem", help="single-qubit mitigation campaigns")
    ssub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = ssub.add_parser("run", parents=[common, noisy])
    r.add_argument("--circuit", required=True)
    r.add_argument("--qubits", type=_int_list, help="protected qubits, e.g. 0,1,2 (default all)")
    r.add_argument("--frame", type=_frame, default="auto")
    r.set_defaults(func=cmd_sqem_run)

    s = sub.add_parser("recombine", parents=[common], help="merge per-qubit mitigated distributions")
    s.add_argument("--unmitigated", required=True)
    s.add_argument("--mitigated", type=_mitigated_arg, action="append", required=True, metavar="k=file")
    s.add_argument("--threshold", type=float, default=1e-4)
    s.add_argument("--max-iterations", type=_positive, default=10_000)
    s.set_defaults(func=cmd_recombine)

    s = sub.add_parser("vqe", help="VQE energy comparison")
    vsub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = vsub.add_parser("compare", parents=[common, noisy])
    v.add_argument("--ansatz", required=True)
    v.add_argument("--params", required=True)
    v.add_argument("--ham", required=True)
    v.add_argument("--seeds", type=_positive, default=1, help="number of replicates")
    v.add_argument("--occupation", help="Hartree-Fock occupation bit string (default from ansatz file)")
    v.add_argument("--qubits", type=_int_list)
    v.add_argument("--threshold", type=float, default=1e-4)
    v.add_argument("--frame", type=_frame, default="auto")
    v.set_defaults(func=cmd_vqe_compare)
    return p


def schema_text(name: str) -> str:
    return resources.files("sqem").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")


def _config_of(args) -> dict:
    skip = {"func", "out", "seed", "jobs", "schema", "command", "action"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        cfg[k] = list(v) if isinstance(v, tuple) else v
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    if args.schema is not None:
        if not args.schema:
            print("\n".join(SCHEMAS))
            return EXIT_OK
        if args.schema not in SCHEMAS:
            print(f"unknown schema {args.schema!r}; choose from {', '.join(SCHEMAS)}", file=sys.stderr)
            return EXIT_USAGE
        sys.stdout.write(schema_text(args.schema))
        return EXIT_OK
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    command = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    run = Run(command, out, _config_of(args))
    run.manifest.seeds.setdefault("root", args.seed)
    try:
        code = args.func(args, run)
    except (ValidationError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SqemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXECUTION
    run.finish()
    return code


if __name__ == "__main__":
    raise SystemExit(main())
