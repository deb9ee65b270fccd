"""Phase-estimation figures of merit for cat-state interferometry.

The probe is a separable two-arm input built from one cat-family state per
arm. For such pure product inputs the quantum Fisher information of the
relative phase reduces to photon-number moments of a single arm:
F = 2 [Var(n) - Cov] with Cov = 0, N = 2 <n> counts both arms, and the
decomposition F = N (1 + Q)(1 - J) holds with Q the single-arm Mandel
parameter and J the inter-arm covariance ratio (zero throughout).

Families: even (ECS), odd (OCS) and Yurke-Stoler (YSCS) cats, plus their
position-squeezed versions (SECS, SOCS, SYSCS) obtained by applying the
inverse squeeze to the cat. Closed forms are evaluated with overflow-safe
hyperbolic ratios so arbitrarily large alpha^2 is allowed; numeric values
come from truncated Fock-space moments and serve as the cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import TruncationError, ValidityError
from .fock import (
    DensityMatrix,
    ModeSpace,
    PureState,
    expectation,
    ladder,
    required_dim,
    squeezed_cat,
    variance,
)
from .model import to_lab_frame

__all__ = [
    "StateFamily",
    "QfiResult",
    "qfi_analytic",
    "qfi_numeric",
    "mandel_q",
    "optimize_qfi",
    "fit_scaling",
    "qfi_of_simulated_state",
    "FIT_BASES",
]

KINDS = ("ECS", "OCS", "YSCS", "SECS", "SOCS", "SYSCS")
_UNSQUEEZED = ("ECS", "OCS", "YSCS")
_CAT_OF_KIND = {
    "ECS": "even",
    "OCS": "odd",
    "YSCS": "yurke_stoler",
    "SECS": "even",
    "SOCS": "odd",
    "SYSCS": "yurke_stoler",
}
_R_MAX = 3.0  # optimization search range for the squeeze parameter


@dataclass(frozen=True)
class StateFamily:
    """One arm's input state: a cat of amplitude alpha under squeeze r."""

    kind: str
    alpha: float
    r: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; choose from {KINDS}")
        if self.alpha < 0.0 or self.r < 0.0:
            raise ValueError("alpha and r must be nonnegative")
        if self.kind in _UNSQUEEZED and self.r != 0.0:
            raise ValueError(f"{self.kind} is an unsqueezed family; r must be 0")
        if self.kind in ("OCS", "SOCS") and self.alpha == 0.0:
            raise ValueError("odd cats are undefined at alpha = 0")


@dataclass(frozen=True)
class QfiResult:
    """QFI decomposition for one input; family is None for simulated states."""

    family: Optional[StateFamily]
    F: float
    N: float
    Q: float
    J_corr: float = 0.0


def _result(family: Optional[StateFamily], f: float, n: float) -> QfiResult:
    q = f / n - 1.0 if n > 0.0 else 0.0
    return QfiResult(family=family, F=f, N=n, Q=q, J_corr=0.0)


# ---------------------------------------------------------------------------
# closed forms (overflow-safe in s = alpha^2)


def _sech(s):
    e = np.exp(-s)
    return 2.0 * e / (1.0 + e * e)


def _csch(s):
    e = np.exp(-s)
    return 2.0 * e / (1.0 - e * e)


def _sinh_over_cosh(c, s):
    # sinh(c - s) / cosh(s), stable for any s >= 0 (c stays small)
    return (np.exp(c - 2.0 * s) - np.exp(-c)) / (1.0 + np.exp(-2.0 * s))


def _cosh_over_sinh(c, s):
    # cosh(c - s) / sinh(s), stable for any s > 0
    return (np.exp(c - 2.0 * s) + np.exp(-c)) / (1.0 - np.exp(-2.0 * s))


def _moments(kind: str, alpha, r: float):
    """(N, F) of the family; alpha may be a scalar or an array."""
    s = np.asarray(alpha, dtype=np.float64) ** 2
    sh_r2 = math.sinh(r) ** 2
    sh_2r = math.sinh(2.0 * r)
    ch_2r = math.cosh(2.0 * r)
    if kind == "SECS" or kind == "ECS":
        n = 2.0 * (sh_r2 - s * _sinh_over_cosh(2.0 * r, s))
        f = (
            sh_2r**2
            - 2.0 * s * _sinh_over_cosh(4.0 * r, s)
            + 2.0 * s**2 * ch_2r**2 * _sech(s) ** 2
        )
    elif kind == "SOCS" or kind == "OCS":
        n = 2.0 * (sh_r2 + s * _cosh_over_sinh(2.0 * r, s))
        f = (
            sh_2r**2
            + 2.0 * s * _cosh_over_sinh(4.0 * r, s)
            - 2.0 * s**2 * ch_2r**2 * _csch(s) ** 2
        )
    elif kind == "SYSCS" or kind == "YSCS":
        n = 2.0 * (sh_r2 + s * math.exp(-2.0 * r))
        f = sh_2r**2 + 2.0 * s * math.exp(-4.0 * r)
    else:
        raise ValueError(f"unknown family kind {kind!r}")
    return n, f


def qfi_analytic(family: StateFamily) -> QfiResult:
    """Closed-form QFI and photon number of the family."""
    n, f = _moments(family.kind, family.alpha, family.r)
    return _result(family, float(f), float(n))


def _build_state(family: StateFamily, dim: int) -> PureState:
    need = required_dim(family.alpha, family.r)
    if dim < need:
        raise TruncationError(
            f"dim {dim} below the guard {need} for alpha={family.alpha}, r={family.r}"
        )
    sp = ModeSpace(dim)
    return squeezed_cat(sp, family.alpha, family.r, _CAT_OF_KIND[family.kind])


def qfi_numeric(family: StateFamily, dim: int) -> QfiResult:
    """Fock-space moment evaluation of the same quantities (the oracle)."""
    psi = _build_state(family, dim)
    num = ladder(psi.space, "number")
    var = variance(num, psi)
    mean = expectation(num, psi).real
    return _result(family, 2.0 * var, 2.0 * mean)


def mandel_q(arg: Union[StateFamily, PureState, DensityMatrix]) -> float:
    """Mandel parameter Var(n)/<n> - 1 of one arm (0 for Poissonian input)."""
    if isinstance(arg, StateFamily):
        res = qfi_analytic(arg)
        return res.Q
    num = ladder(arg.space, "number")
    mean = expectation(num, arg).real
    if mean == 0.0:
        return 0.0
    return variance(num, arg) / mean - 1.0


# ---------------------------------------------------------------------------
# constrained optimization


def _alpha_candidates(kind: str, r: float, n_target: float, n_grid: int = 1001):
    """All alpha >= 0 with N(kind, alpha, r) = n_target at this squeeze."""
    lo = 0.0 if kind not in ("OCS", "SOCS") else 1e-6
    hi = math.sqrt(0.5 * n_target * math.exp(2.0 * r)) + 4.0
    grid = np.linspace(lo, hi, n_grid)
    n_vals, _ = _moments(kind, grid, r)
    resid = n_vals - n_target
    roots = []
    for i in np.flatnonzero(np.sign(resid[:-1]) * np.sign(resid[1:]) <= 0.0):
        a, b = grid[i], grid[i + 1]
        if resid[i] == 0.0:
            roots.append(float(a))
            continue
        if resid[i + 1] == 0.0:
            continue  # picked up by the next bracket
        root = brentq(
            lambda x: float(_moments(kind, x, r)[0]) - n_target, a, b, xtol=1e-14
        )
        roots.append(float(root))
    if resid[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _best_on_constraint(kind: str, r: float, n_target: float):
    """(F, alpha) maximizing F at fixed r on the constraint, or None."""
    best = None
    for alpha in _alpha_candidates(kind, r, n_target):
        _, f = _moments(kind, alpha, r)
        if best is None or f > best[0]:
            best = (float(f), alpha)
    return best


def optimize_qfi(kind: str, N_target: float) -> Tuple[float, float, float]:
    """Maximize F over (r, alpha) subject to N = N_target; returns (r, alpha, F).

    Unsqueezed kinds have no freedom: alpha is pinned by the constraint.
    Squeezed kinds are optimized by golden-section over r in [0, 3] around a
    coarse-scan bracket, solving the constraint for alpha at every r.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown family kind {kind!r}; choose from {KINDS}")
    if N_target <= 0.0:
        raise ValueError("N_target must be positive")

    if kind in _UNSQUEEZED:
        best = _best_on_constraint(kind, 0.0, N_target)
        if best is None:
            raise ValidityError(
                f"no {kind} state reaches N = {N_target} (odd cats have N > 2)"
            )
        f_star, alpha_star = best
        return 0.0, alpha_star, f_star

    def g(r: float):
        return _best_on_constraint(kind, r, N_target)

    rs = np.linspace(0.0, _R_MAX, 121)
    evals = [g(float(r)) for r in rs]
    feasible = [i for i, e in enumerate(evals) if e is not None]
    if not feasible:
        raise ValidityError(f"no {kind} state reaches N = {N_target} for r <= {_R_MAX}")
    i_best = max(feasible, key=lambda i: evals[i][0])
    lo = rs[max(i_best - 1, 0)]
    hi = rs[min(i_best + 1, len(rs) - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    g1, g2 = g(x1), g(x2)
    f1 = g1[0] if g1 else -math.inf
    f2 = g2[0] if g2 else -math.inf
    for _ in range(70):
        if f1 < f2:
            lo, x1, f1, g1 = x1, x2, f2, g2
            x2 = lo + invphi * (hi - lo)
            g2 = g(x2)
            f2 = g2[0] if g2 else -math.inf
        else:
            hi, x2, f2, g2 = x2, x1, f1, g1
            x1 = hi - invphi * (hi - lo)
            g1 = g(x1)
            f1 = g1[0] if g1 else -math.inf
    r_star = x1 if f1 >= f2 else x2
    best = g(float(r_star))
    candidates = [(best[0], float(r_star), best[1])] if best else []

    # alpha = 0 (pure squeezed vacuum) is a boundary candidate the golden
    # section can miss by a hair; for SECS/SYSCS it is often exactly optimal
    if kind != "SOCS":
        arg = math.sqrt(0.5 * N_target)
        r0 = math.asinh(arg)
        if r0 <= _R_MAX:
            _, f0 = _moments(kind, 0.0, r0)
            candidates.append((float(f0), r0, 0.0))

    if not candidates:
        raise ValidityError(f"no {kind} state reaches N = {N_target} for r <= {_R_MAX}")
    f_top = max(c[0] for c in candidates)
    # on a float-level tie take the smallest alpha; the alpha = 0 candidate
    # satisfies the constraint to the ulp
    near = [c for c in candidates if c[0] >= f_top - 1e-9 * max(1.0, abs(f_top))]
    f_star, r_star, alpha_star = min(near, key=lambda c: c[2])
    n_check, _ = _moments(kind, alpha_star, r_star)
    if abs(float(n_check) - N_target) > 1e-8:
        raise ValidityError(
            f"constraint polish failed: |N - N_target| = {abs(float(n_check) - N_target):.2e}"
        )
    return r_star, alpha_star, f_star


FIT_BASES = {
    "SECS": ("N", "N^2"),
    "SOCS": ("1", "sqrt(N)", "N", "N^2"),
    "SYSCS": ("N", "N^2"),
}


def fit_scaling(kind: str, N_samples: Optional[Sequence[float]] = None):
    """Least-squares fit of optimized F*(N) to the family's scaling basis.

    Returns (coefficients, rms_residual); coefficient order follows the
    basis: SECS and SYSCS use (N, N^2), SOCS uses (1, sqrt(N), N, N^2).
    """
    if kind not in FIT_BASES:
        raise ValueError(f"fit basis defined only for {sorted(FIT_BASES)}")
    if N_samples is None:
        N_samples = np.arange(4.0, 101.0, 2.0)
    n_arr = np.asarray(list(N_samples), dtype=np.float64)
    f_arr = np.array([optimize_qfi(kind, float(n))[2] for n in n_arr])
    cols = {
        "1": np.ones_like(n_arr),
        "sqrt(N)": np.sqrt(n_arr),
        "N": n_arr,
        "N^2": n_arr**2,
    }
    basis = np.column_stack([cols[name] for name in FIT_BASES[kind]])
    coeffs, _, _, _ = np.linalg.lstsq(basis, f_arr, rcond=None)
    residual = float(np.sqrt(np.mean((basis @ coeffs - f_arr) ** 2)))
    return coeffs, residual


# ---------------------------------------------------------------------------
# simulated states


def qfi_of_simulated_state(
    rho_a: Union[DensityMatrix, PureState], r: float
) -> QfiResult:
    """QFI of a simulated frame state, read out in the lab frame.

    The stored state lives in the squeezed frame; the physical arm state is
    its image under the inverse squeeze, so the photon-number moments are
    taken after applying S+(r).
    """
    lab = to_lab_frame(rho_a, r) if r != 0.0 else rho_a
    num = ladder(lab.space, "number")
    var = variance(num, lab)
    mean = expectation(num, lab).real
    return _result(None, 2.0 * var, 2.0 * mean)
