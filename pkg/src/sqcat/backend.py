"""Backend selection for the accelerated kernels.

The two hot paths (fixed-step RK4 on the vectorized density matrix and
Wigner grid evaluation) exist twice: numba-jitted kernels and pure
numpy/scipy fallbacks. The environment variable SQCAT_BACKEND forces one of
{"numba", "numpy"}; when unset, numba is used if it imports.

Callers branch on HAS_NUMBA at call time, so tests may monkeypatch it.
Both backends are deterministic run-to-run; they are not guaranteed to be
bit-identical to each other (summation order differs).
"""

import os

# The workqueue layer has a fixed static schedule and no version probes
# (tbb emits a warning on older installs); all kernels write disjoint
# elements, so any layer is correct, this one is just quiet and predictable.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

_requested = os.environ.get("SQCAT_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"SQCAT_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    HAS_NUMBA = False
elif _requested == "numba":
    import numba  # noqa: F401  # fail loudly when forced but unavailable

    HAS_NUMBA = True
else:
    try:
        import numba  # noqa: F401

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False


def backend_name() -> str:
    return "numba" if HAS_NUMBA else "numpy"
