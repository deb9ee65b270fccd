"""Time the accelerated kernels against the pure-numpy fallback.

Runs the two hot paths (fixed-step RK4 propagation and Wigner grid
evaluation) in subprocesses with SQCAT_BACKEND forced either way, so each
timing sees a clean import. The numba worker does one untimed warmup pass
to absorb JIT compilation.

Usage: python benchmarks/benchmark_backends.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _workload(repeats: int) -> dict:
    import numpy as np

    from sqcat import backend, fock, model, wigner
    from sqcat.dynamics import evolve

    p = model.params_for_target(2.0, 1.1, 0.1)
    d = model.derive_params(p)
    mdl = model.build_reduced_model(d, dim_a=30)
    rho0 = fock.vacuum(mdl.space).density()

    psi = fock.squeezed_cat(fock.ModeSpace(200), 2.0, 1.1, "even")
    q, pg = wigner.default_grid(1.1)

    def run_evolve():
        evolve(mdl, rho0, 50.0, n_samples=2)

    def run_wigner():
        wigner.wigner_numeric(psi, q, pg)

    timings = {}
    for name, fn in (("evolve_rk4", run_evolve), ("wigner_grid", run_wigner)):
        fn()  # warmup: JIT compile under numba, cache warm under numpy
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        timings[name] = best
    return {"backend": backend.backend_name(), "timings": timings}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--worker", choices=("numba", "numpy"), help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.worker:
        print(json.dumps(_workload(args.repeats)))
        return 0

    results = {}
    for name in ("numba", "numpy"):
        env = dict(os.environ, SQCAT_BACKEND=name)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--worker", name, "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{name} worker failed:\n{proc.stderr}", file=sys.stderr)
            return 1
        payload = json.loads(proc.stdout.strip().splitlines()[-1])
        assert payload["backend"] == name
        results[name] = payload["timings"]

    width = max(len(k) for k in results["numba"])
    # the jitted kernels lean on prange; on few cores numpy's C paths
    # (scipy csr matvec, vectorized recurrences) can come out ahead
    print(f"cpus={os.cpu_count()}  best of {args.repeats} repeats")
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for kernel in results["numba"]:
        t_nb = results["numba"][kernel]
        t_np = results["numpy"][kernel]
        print(
            f"{kernel:<{width}}  {t_nb:>9.3f}s  {t_np:>9.3f}s  {t_np / t_nb:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
