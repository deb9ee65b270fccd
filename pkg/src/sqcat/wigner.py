"""Wigner functions: numeric displaced-parity evaluation and the squeezed-cat
closed form, plus negativity diagnostics.

Convention: with quadratures q = (a + a+)/sqrt(2), p = (a - a+)/(i sqrt(2)),
    W(q, p) = (1/pi) Tr[rho D(beta) Pi D+(beta)],   beta = (q + i p)/sqrt(2),
where Pi = (-1)^{a+a}. Then the vacuum gives W = e^{-q^2-p^2}/pi and the
plane integral of W is 1. Since D(beta) Pi D+(beta) = D(2 beta) Pi, each grid
point costs one displacement-matrix contraction. The contraction runs along
the density-matrix diagonals: the scaled elements
    e^{-|z|^2/2} zbar^k sqrt(n!/(n+k)!) L_n^{(k)}(|z|^2)
follow the associated-Laguerre three-term recurrence in n, which tracks the
dominant solution and so stays accurate for states occupying high Fock
levels (a recurrence across rows instead loses all digits there). Every
intermediate is a unitary-matrix entry, bounded by 1, so no grid or
dimension overflows and far-out points underflow gracefully to exact zeros.
Pairing the +-k diagonals of the Hermitian density matrix makes each point
value exactly real, with no imaginary residue to discard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from . import backend
from .fock import DensityMatrix, PureState

__all__ = [
    "WignerGrid",
    "default_grid",
    "wigner_numeric",
    "wigner_analytic_secs",
    "negativity_volume",
]

# exp(-(q^2+p^2)) underflows at 745; beyond this the kernel would emit exact
# zeros regardless of the state, which silently misrepresents high-photon
# states, so such grids are rejected.
_RADIUS_SQ_LIMIT = 700.0


@dataclass(frozen=True)
class WignerGrid:
    """W(q_i, p_j) sampled on a rectangular grid.

    q0, p0 are the cat-peak coordinates (sqrt(2) Re alpha, sqrt(2) Im alpha)
    when the grid describes a cat-family state; 0 otherwise.
    """

    q_values: np.ndarray
    p_values: np.ndarray
    values: np.ndarray
    q0: float = 0.0
    p0: float = 0.0

    def cell_area(self) -> float:
        dq = float(self.q_values[1] - self.q_values[0])
        dp = float(self.p_values[1] - self.p_values[0])
        return dq * dp

    def normalization(self) -> float:
        """Riemann-sum integral of W over the grid."""
        return float(self.values.sum() * self.cell_area())


def default_grid(r: float = 0.0, half_width: float = 8.0, n: int = 101) -> Tuple[np.ndarray, np.ndarray]:
    """Grid covering the e^{-r}-squeezed q axis and e^{+r}-stretched p axis."""
    q = np.linspace(-half_width * math.exp(-r), half_width * math.exp(-r), n)
    p = np.linspace(-half_width * math.exp(r), half_width * math.exp(r), n)
    return q, p


def _diagonal_coefficients(rho: np.ndarray) -> np.ndarray:
    # rd[k, n] = (2 - delta_{k0}) (-1)^n rho[n+k, n]: the k-th subdiagonal,
    # parity-signed, doubled for k > 0 because the matching superdiagonal is
    # folded in by Hermiticity.
    dim = rho.shape[0]
    signs = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    rd = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(dim):
        mult = 1.0 if k == 0 else 2.0
        rd[k, : dim - k] = mult * signs[: dim - k] * np.diagonal(rho, offset=-k)
    return rd


def wigner_numeric(
    state: Union[DensityMatrix, PureState],
    q_values: Optional[np.ndarray] = None,
    p_values: Optional[np.ndarray] = None,
) -> WignerGrid:
    """Wigner function of a single-mode state on the grid (default_grid if omitted)."""
    if isinstance(state, PureState):
        state = state.density()
    if q_values is None or p_values is None:
        q_values, p_values = default_grid()
    q = np.asarray(q_values, dtype=np.float64)
    p = np.asarray(p_values, dtype=np.float64)
    radius_sq = max(float(np.max(q * q)), 0.0) + max(float(np.max(p * p)), 0.0)
    if radius_sq > _RADIUS_SQ_LIMIT:
        raise ValueError(
            f"grid reaches q^2+p^2 = {radius_sq:.0f} > {_RADIUS_SQ_LIMIT:.0f}; "
            "the displacement weights underflow there"
        )
    rho = state.matrix if not isinstance(state.matrix, np.ndarray) else state.matrix
    rho = np.asarray(rho.toarray() if hasattr(rho, "toarray") else rho)
    rd = _diagonal_coefficients(rho)
    if backend.HAS_NUMBA:
        from . import _kernels

        out = np.empty(q.size * p.size, dtype=np.float64)
        _kernels.wigner_points(q, p, rd, out)
        w = out.reshape(q.size, p.size)
    else:
        w = _wigner_numpy(q, p, rd)
    return WignerGrid(q_values=q, p_values=p, values=w)


def _wigner_numpy(q, p, rd):
    """Laguerre-diagonal recurrence, vectorized over all grid points at once."""
    dim = rd.shape[0]
    qq, pp = np.meshgrid(q, p, indexing="ij")
    z = math.sqrt(2.0) * (qq + 1j * pp).ravel()
    x = np.abs(z) ** 2
    zbar = np.conj(z)
    head = np.exp(-0.5 * x).astype(np.complex128)
    acc = np.zeros(z.size, dtype=np.float64)
    for k in range(dim):
        if k > 0:
            head = head * zbar / math.sqrt(k)
        e_nm1 = np.zeros_like(head)
        e_n = head
        acc += (e_n * rd[k, 0]).real
        for n in range(dim - k - 1):
            den = math.sqrt((n + 1.0) * (n + k + 1.0))
            c2 = math.sqrt(n * (n + k)) / den
            e_np1 = ((2.0 * n + k + 1.0 - x) / den) * e_n - c2 * e_nm1
            e_nm1 = e_n
            e_n = e_np1
            acc += (e_n * rd[k, n + 1]).real
    return (acc / math.pi).reshape(q.size, p.size)


def wigner_analytic_secs(
    alpha: complex,
    r: float,
    q_values: Optional[np.ndarray] = None,
    p_values: Optional[np.ndarray] = None,
) -> WignerGrid:
    """Closed-form Wigner function of the squeezed even cat S+(r)|cat_even(alpha)>.

    W = W1 + W2 + Win with
        W1,2 = exp[-(e^{-r} p -+ p0)^2 - (e^{r} q -+ q0)^2] / (2 pi (1 + e^{-p0^2 - q0^2}))
        Win  = exp(-e^{-2r} p^2 - e^{2r} q^2)
               cos[2 (e^{-r} p q0 - e^{r} p0 q)] / (pi (1 + e^{-p0^2 - q0^2}))
    and q0 = (alpha + alpha*)/sqrt(2), p0 = (alpha - alpha*)/(i sqrt(2)); the
    two Gaussian peaks sit at (q, p) = +-(e^{-r} q0, e^{r} p0).
    """
    if q_values is None or p_values is None:
        q_values, p_values = default_grid(r)
    q = np.asarray(q_values, dtype=np.float64)
    p = np.asarray(p_values, dtype=np.float64)
    alpha = complex(alpha)
    q0 = float((alpha + alpha.conjugate()).real / math.sqrt(2.0))
    p0 = float(((alpha - alpha.conjugate()) / (1j * math.sqrt(2.0))).real)
    qq, pp = np.meshgrid(q, p, indexing="ij")
    em, ep = math.exp(-r), math.exp(r)
    norm = 1.0 + math.exp(-(p0**2) - q0**2)
    w1 = np.exp(-((em * pp - p0) ** 2) - (ep * qq - q0) ** 2) / (2.0 * math.pi * norm)
    w2 = np.exp(-((em * pp + p0) ** 2) - (ep * qq + q0) ** 2) / (2.0 * math.pi * norm)
    win = (
        np.exp(-(em**2) * pp**2 - ep**2 * qq**2)
        * np.cos(2.0 * (em * pp * q0 - ep * p0 * qq))
        / (math.pi * norm)
    )
    return WignerGrid(q_values=q, p_values=p, values=w1 + w2 + win, q0=q0, p0=p0)


def negativity_volume(grid: WignerGrid) -> float:
    """Total negative quasiprobability volume sum(max(0, -W)) dq dp."""
    return float(np.maximum(0.0, -grid.values).sum() * grid.cell_area())
