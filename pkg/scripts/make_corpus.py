"""Regenerate the synthetic Hamiltonian corpus and its fixed optimal parameters.

Each Hamiltonian is molecule-like: a Hartree-Fock-favouring diagonal part
(Z fields and ZZ couplings) plus small X, ZX and XX terms that mix the
reference with nearby configurations. Parameters are found by minimizing
the noiseless energy of the default ansatz from several random starts.

Needs scipy, which the package itself does not import.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from sqem.core.pauli import Hamiltonian, PauliString, serialize_hamiltonian
from sqem.vqe import AnsatzSpec, ParameterSet, build_ansatz, energy_exact

N = 4
OCCUPATION = "1100"
SEEDS = {"mol_a": 1, "mol_b": 2, "mol_c": 3}


def _letters(ops: dict) -> str:
    return "".join(ops.get(q, "I") for q in range(N))


def molecule_like(seed: int) -> Hamiltonian:
    rng = np.random.default_rng(seed)
    terms = [PauliString("I" * N, rng.uniform(-1.5, -0.5))]
    for q in range(N):
        sign = 1.0 if OCCUPATION[q] == "1" else -1.0
        terms.append(PauliString(_letters({q: "Z"}), sign * rng.uniform(0.15, 0.4)))
    for a in range(N):
        for b in range(a + 1, N):
            terms.append(PauliString(_letters({a: "Z", b: "Z"}), rng.uniform(0.1, 0.18)))
    for q in range(N):
        terms.append(PauliString(_letters({q: "X"}), rng.uniform(-0.04, 0.04)))
    for q in range(N - 1):
        terms.append(PauliString(_letters({q: "Z", q + 1: "X"}), rng.uniform(-0.03, 0.03)))
        terms.append(PauliString(_letters({q: "X", q + 1: "X"}), rng.uniform(0.01, 0.05)))
    return Hamiltonian(N, tuple(terms))


def optimal_parameters(h: Hamiltonian, spec: AnsatzSpec, starts: int = 8, seed: int = 0):
    rng = np.random.default_rng(seed)

    def energy(x):
        return energy_exact(h, build_ansatz(spec, ParameterSet(x), OCCUPATION))

    best = None
    for _ in range(starts):
        res = minimize(energy, rng.normal(0.0, 0.3, spec.num_parameters), method="BFGS", options={"gtol": 1e-9})
        if best is None or res.fun < best.fun:
            best = res
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/sqem/data/vqe"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = AnsatzSpec(N)
    (out / "ansatz.json").write_text(
        json.dumps({"num_qubits": N, "rotation_kinds": list(spec.rotation_kinds), "entangler": "cz_cascade",
                    "layers": 2, "hf_occupation": OCCUPATION}, indent=2) + "\n"
    )
    for name, seed in SEEDS.items():
        h = molecule_like(seed)
        best = optimal_parameters(h, spec)
        (out / f"{name}.txt").write_text(f"# synthetic molecule-like Hamiltonian, generator seed {seed}\n" + serialize_hamiltonian(h))
        params = {
            "values": [float(v) for v in best.x],
            "provenance": f"noiseless energy minimum, generator seed {seed}",
            "energy": float(best.fun),
            "ground_energy": h.ground_energy(),
        }
        (out / f"{name}.params.json").write_text(json.dumps(params, indent=2) + "\n")
        print(f"{name}: ansatz {best.fun:.6f}  ground {h.ground_energy():.6f}")


if __name__ == "__main__":
    main()
