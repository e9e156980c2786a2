"""Compare the numba and numpy kernel paths.

Usage: python benchmarks/bench_kernels.py [--qubits 8] [--repeat 5] [--no-pipeline]

Kernel timings call both implementations directly in one process (numba is
warmed up first so compilation is not counted). The pipeline timing runs the
same campaign in two subprocesses with SQEM_USE_NUMBA set to 1 and 0.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from sqem.sim import _kernels_numpy

try:
    from sqem.sim import _kernels_numba
except ImportError:
    _kernels_numba = None

PIPELINE = """
import time
from sqem.campaign import CampaignConfig, run_campaign
from sqem.sim import KERNEL_BACKEND, NoiseModel
from sqem.vqe import AnsatzSpec, ParameterSet, build_ansatz
import numpy as np
spec = AnsatzSpec({n})
c = build_ansatz(spec, ParameterSet(np.random.default_rng(1).uniform(-1, 1, spec.num_parameters)))
run_campaign(CampaignConfig(c, (0,), NoiseModel(0.001, 0.01), 1000, 0))
t = time.perf_counter()
run_campaign(CampaignConfig(c, tuple(range({n})), NoiseModel(0.001, 0.01), 1000, 1))
print(KERNEL_BACKEND, time.perf_counter() - t)
"""


def random_density(n, rng):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases(n, rng):
    rho = random_density(n, rng)
    u2 = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    m = 12
    probs = rng.random(2**m)
    probs /= probs.sum()
    bits = ((np.arange(2**m)[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)
    targets = np.stack([np.full(m, 0.6), np.full(m, 0.4)], axis=1)

    def layer(k):
        def run():
            r = rho
            for q in range(n - 1):
                r = k.apply_unitary_2q(r, u2, q, q + 1, n)
                r = k.depolarize_2q(r, q, q + 1, 0.01, n)
            return r

        return run

    return {
        f"gate+noise layer ({n} qubits)": layer,
        "recombination loop (12 bits)": lambda k: lambda: k.recombine_loop(probs, bits, targets, 1e-4, 10_000, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-pipeline", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    impls = {"numpy": _kernels_numpy}
    if _kernels_numba is not None:
        impls["numba"] = _kernels_numba
    else:
        print("numba not importable; timing numpy only")

    print(f"{'case':36s} " + " ".join(f"{name:>10s}" for name in impls) + "   speedup")
    for label, make in kernel_cases(args.qubits, rng).items():
        row = {}
        for name, impl in impls.items():
            fn = make(impl)
            fn()  # warm-up (triggers JIT compilation for numba)
            row[name] = best_of(fn, args.repeat)
        speed = f"{row['numpy'] / row['numba']:8.1f}x" if "numba" in row else ""
        print(f"{label:36s} " + " ".join(f"{row[name]:9.4f}s" for name in impls) + f"  {speed}")

    if not args.no_pipeline:
        print("\nfull campaign, 5-qubit ansatz, all qubits protected, 1000 shots:")
        for flag in ("1", "0"):
            env = dict(os.environ, SQEM_USE_NUMBA=flag)
            out = subprocess.run(
                [sys.executable, "-c", PIPELINE.format(n=5)], env=env, capture_output=True, text=True, check=True
            )
            backend, seconds = out.stdout.split()
            print(f"  {backend:6s} {float(seconds):.3f}s")


if __name__ == "__main__":
    main()
