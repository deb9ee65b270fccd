"""Truncated-Fock-space linear algebra.

Single- and multi-mode bosonic operators, canonical states, and the
expectation / fidelity machinery everything else is built on.

Conventions fixed here and relied on everywhere else:

- Mode ordering: mode 0 is the leftmost (slowest-varying) Kronecker factor,
  so basis index n = n_0*(d_1*...*d_{k-1}) + n_1*(d_2*...) + ... (lexicographic).
- Quadratures: q = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), so the
  vacuum has Var(q) = Var(p) = 1/2.
- Squeeze: S(z) = exp[(z a^dag^2 - z* a^2)/2]. With this sign, S^dag(r)|0> for
  real r > 0 has Var(q) = e^{-2r}/2 (position-squeezed).
- Displacement: D(eta) = exp(eta a^dag - eta* a), D(eta)|0> = |eta>.

Storage: dense complex for single-mode operators, CSR sparse for composite
embeddings once the total dimension exceeds ``DENSE_CUTOFF``.

All values are treated as immutable after construction; operations are pure
functions, safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import SpaceMismatchError, TruncationError, UndefinedStateError

# Composite operators denser than this total dimension are stored sparse.
DENSE_CUTOFF = 256


@dataclass(frozen=True)
class ModeSpace:
    """A single bosonic mode truncated to Fock levels 0..dim-1."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"mode dimension must be >= 2, got {self.dim}")


@dataclass(frozen=True)
class CompositeSpace:
    """An ordered tensor product of modes; ordering fixes all embeddings."""

    modes: tuple[ModeSpace, ...]

    def __post_init__(self) -> None:
        if not self.modes:
            raise ValueError("composite space needs at least one mode")

    @property
    def dim(self) -> int:
        n = 1
        for m in self.modes:
            n *= m.dim
        return n

    @property
    def nmodes(self) -> int:
        return len(self.modes)

    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)


SpaceLike = Union[ModeSpace, CompositeSpace]


def as_composite(space: SpaceLike) -> CompositeSpace:
    if isinstance(space, ModeSpace):
        return CompositeSpace((space,))
    return space


def _check_same_space(a: CompositeSpace, b: CompositeSpace) -> None:
    if a.dims() != b.dims():
        raise SpaceMismatchError(f"space mismatch: dims {a.dims()} vs {b.dims()}")


class Operator:
    """A linear operator on a composite space (dense ndarray or CSR matrix)."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: SpaceLike, matrix) -> None:
        space = as_composite(space)
        d = space.dim
        if matrix.shape != (d, d):
            raise SpaceMismatchError(
                f"matrix shape {matrix.shape} does not match space dim {d}"
            )
        if sp.issparse(matrix):
            matrix = matrix.tocsr().astype(np.complex128)
        else:
            matrix = np.asarray(matrix, dtype=np.complex128)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("Operator is immutable")

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def to_dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.matrix.toarray()
        return self.matrix

    def adjoint(self) -> "Operator":
        if self.is_sparse:
            return Operator(self.space, self.matrix.conj().T.tocsr())
        return Operator(self.space, self.matrix.conj().T.copy())

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)


class PureState:
    """A normalized state vector on a composite space."""

    __slots__ = ("space", "amplitudes")

    def __init__(self, space: SpaceLike, amplitudes: np.ndarray) -> None:
        space = as_composite(space)
        amp = np.asarray(amplitudes, dtype=np.complex128).ravel()
        if amp.size != space.dim:
            raise SpaceMismatchError(
                f"amplitude length {amp.size} does not match space dim {space.dim}"
            )
        norm = float(np.linalg.norm(amp))
        if norm < 1e-14:
            raise UndefinedStateError("cannot normalize a (near-)zero vector")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "amplitudes", amp / norm)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    def overlap(self, other: "PureState") -> complex:
        _check_same_space(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def projector(self) -> Operator:
        return Operator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


# Validation tolerances for DensityMatrix; `checkpoint=True` is the relaxed
# mid-integration variant.
_HERM_TOL = 1e-10
_TRACE_TOL = 1e-8
_TRACE_TOL_CHECKPOINT = 1e-6
_EIG_FLOOR = -1e-8


class DensityMatrix:
    """A Hermitian, unit-trace, positive-semidefinite matrix on a space."""

    __slots__ = ("space", "matrix")

    def __init__(
        self,
        space: SpaceLike,
        matrix: np.ndarray,
        validate: bool = True,
        checkpoint: bool = False,
    ) -> None:
        space = as_composite(space)
        mat = np.asarray(matrix, dtype=np.complex128)
        d = space.dim
        if mat.shape != (d, d):
            raise SpaceMismatchError(
                f"matrix shape {mat.shape} does not match space dim {d}"
            )
        if validate:
            herm = float(np.max(np.abs(mat - mat.conj().T)))
            if herm > _HERM_TOL:
                raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
            tr = complex(np.trace(mat))
            tol = _TRACE_TOL_CHECKPOINT if checkpoint else _TRACE_TOL
            if abs(tr - 1.0) > tol:
                raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
            evals = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
            if float(evals.min()) < _EIG_FLOOR:
                raise ValueError(f"negative eigenvalue {evals.min():.3e}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", mat)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def purity(self) -> float:
        return float(np.real(np.sum(self.matrix * self.matrix.T)))


StateLike = Union[PureState, DensityMatrix]


# ----------------------------------------------------------------------------
# Operators


def ladder(space: ModeSpace, which: str) -> Operator:
    """Single-mode ladder operator.

    which: 'annihilation' (<n-1|a|n> = sqrt(n)), 'creation' (adjoint),
    'number' (diag 0..dim-1), or 'identity'.
    """
    d = space.dim
    if which == "annihilation":
        mat = np.diag(np.sqrt(np.arange(1, d, dtype=np.float64)), k=1)
    elif which == "creation":
        mat = np.diag(np.sqrt(np.arange(1, d, dtype=np.float64)), k=-1)
    elif which == "number":
        mat = np.diag(np.arange(d, dtype=np.float64))
    elif which == "identity":
        mat = np.eye(d)
    else:
        raise ValueError(f"unknown ladder kind {which!r}")
    return Operator(space, mat.astype(np.complex128))


def identity(space: SpaceLike) -> Operator:
    space = as_composite(space)
    d = space.dim
    if d > DENSE_CUTOFF:
        return Operator(space, sp.identity(d, dtype=np.complex128, format="csr"))
    return Operator(space, np.eye(d, dtype=np.complex128))


def embed(op: Operator, target: SpaceLike, position: int) -> Operator:
    """Lift a single-mode operator to the composite space at `position`.

    Identity on every other tensor factor; mode 0 is the leftmost factor.
    """
    target = as_composite(target)
    if op.space.nmodes != 1:
        raise SpaceMismatchError("embed expects a single-mode operator")
    if not (0 <= position < target.nmodes):
        raise SpaceMismatchError(f"position {position} out of range")
    if op.space.modes[0].dim != target.modes[position].dim:
        raise SpaceMismatchError(
            f"operator dim {op.space.modes[0].dim} does not match "
            f"target mode dim {target.modes[position].dim}"
        )
    use_sparse = target.dim > DENSE_CUTOFF
    kron = sp.kron if use_sparse else np.kron
    core = sp.csr_matrix(op.matrix) if use_sparse else op.to_dense()
    mat = None
    for k, mode in enumerate(target.modes):
        factor = core if k == position else (
            sp.identity(mode.dim, dtype=np.complex128, format="csr")
            if use_sparse else np.eye(mode.dim, dtype=np.complex128)
        )
        mat = factor if mat is None else kron(mat, factor)
    if use_sparse:
        mat = mat.tocsr()
    return Operator(target, mat)


def parity_op(space: ModeSpace) -> Operator:
    """Photon-number parity (-1)^n on a single mode."""
    signs = np.where(np.arange(space.dim) % 2 == 0, 1.0, -1.0)
    return Operator(space, np.diag(signs).astype(np.complex128))


def _expm_antihermitian(x: np.ndarray) -> np.ndarray:
    """exp(X) for anti-Hermitian X via eigendecomposition of the Hermitian iX."""
    h = 1j * x
    herm_defect = float(np.max(np.abs(h - h.conj().T)))
    if herm_defect > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
        raise ValueError("generator is not anti-Hermitian")
    evals, vecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    return (vecs * np.exp(-1j * evals)) @ vecs.conj().T


def displacement(space: ModeSpace, eta: complex) -> Operator:
    """D(eta) = exp(eta a^dag - eta* a); D(eta)|0> is the coherent state |eta>."""
    if abs(eta) ** 2 > space.dim / 4.0:
        raise TruncationError(
            f"displacement |eta|^2 = {abs(eta)**2:.3f} exceeds dim/4 = {space.dim / 4:.1f}"
        )
    a = ladder(space, "annihilation").to_dense()
    x = eta * a.conj().T - np.conj(eta) * a
    return Operator(space, _expm_antihermitian(x))


def max_squeeze(dim: int) -> float:
    """Largest squeeze amplitude the truncation guard allows at this dim."""
    return 0.5 * math.log(dim / 4.0)


def squeeze(space: ModeSpace, zeta: complex) -> Operator:
    """S(zeta) = exp[(zeta a^dag^2 - zeta* a^2)/2].

    Sign convention: S^dag(r)|0> for real r > 0 is position-squeezed,
    Var(q) = e^{-2r}/2.
    """
    if abs(zeta) > max_squeeze(space.dim) + 1e-12:
        raise TruncationError(
            f"squeeze |zeta| = {abs(zeta):.3f} exceeds guard "
            f"{max_squeeze(space.dim):.3f} at dim {space.dim}"
        )
    a = ladder(space, "annihilation").to_dense()
    a2 = a @ a
    x = 0.5 * (zeta * a2.conj().T - np.conj(zeta) * a2)
    return Operator(space, _expm_antihermitian(x))


# ----------------------------------------------------------------------------
# States


def fock_state(space: SpaceLike, occupation: Union[int, Sequence[int]]) -> PureState:
    space = as_composite(space)
    occ = [occupation] if isinstance(occupation, int) else list(occupation)
    if len(occ) != space.nmodes:
        raise SpaceMismatchError("one occupation number per mode required")
    idx = 0
    for n, mode in zip(occ, space.modes):
        if not (0 <= n < mode.dim):
            raise TruncationError(f"Fock level {n} outside mode dim {mode.dim}")
        idx = idx * mode.dim + n
    amp = np.zeros(space.dim, dtype=np.complex128)
    amp[idx] = 1.0
    return PureState(space, amp)


def vacuum(space: SpaceLike) -> PureState:
    space = as_composite(space)
    return fock_state(space, [0] * space.nmodes)


def _coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    """Unnormalized-by-truncation coherent amplitudes e^{-|a|^2/2} a^n/sqrt(n!)."""
    amp = np.empty(dim, dtype=np.complex128)
    amp[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, dim):
        amp[n] = amp[n - 1] * alpha / math.sqrt(n)
    return amp


def coherent_state(space: ModeSpace, alpha: complex) -> PureState:
    if abs(alpha) ** 2 > space.dim / 4.0:
        raise TruncationError(
            f"coherent |alpha|^2 = {abs(alpha)**2:.3f} exceeds dim/4 = {space.dim / 4:.1f}"
        )
    return PureState(space, _coherent_amplitudes(space.dim, alpha))


def cat_state(space: ModeSpace, alpha: complex, kind: str) -> PureState:
    """Coherent-state superposition of |alpha> and |-alpha>.

    kind 'even':  (|a> + |-a>)/sqrt(N_e), N_e = 2[1 + exp(-2|a|^2)]
    kind 'odd':   (|a> - |-a>)/sqrt(N_o), N_o = 2[1 - exp(-2|a|^2)]
    kind 'yurke_stoler': (1+i)/2 |a> + (1-i)/2 |-a>  (exactly normalized)
    """
    if abs(alpha) ** 2 > space.dim / 4.0:
        raise TruncationError(
            f"cat |alpha|^2 = {abs(alpha)**2:.3f} exceeds dim/4 = {space.dim / 4:.1f}"
        )
    plus = _coherent_amplitudes(space.dim, alpha)
    minus = _coherent_amplitudes(space.dim, -alpha)
    if kind == "even":
        amp = (plus + minus) / math.sqrt(2.0 * (1.0 + math.exp(-2.0 * abs(alpha) ** 2)))
    elif kind == "odd":
        n_o = 2.0 * (1.0 - math.exp(-2.0 * abs(alpha) ** 2))
        if n_o < 1e-14:
            raise UndefinedStateError("odd cat is undefined at alpha = 0")
        amp = (plus - minus) / math.sqrt(n_o)
    elif kind == "yurke_stoler":
        amp = 0.5 * (1.0 + 1j) * plus + 0.5 * (1.0 - 1j) * minus
    else:
        raise ValueError(f"unknown cat kind {kind!r}")
    # Truncation residue is re-normalized away; for guard-satisfying inputs the
    # correction is ~1e-12 or smaller.
    return PureState(space, amp)


def required_dim(alpha: complex, r: float) -> int:
    """Truncation guard: dim needed for a cat of size alpha under squeeze r."""
    return int(math.ceil(4.0 * (abs(alpha) ** 2 * math.exp(2.0 * r) + math.exp(2.0 * r))))


def squeezed_cat(space: ModeSpace, alpha: complex, r: float, kind: str) -> PureState:
    """S^dag(r) applied to cat_state(alpha, kind)."""
    need = required_dim(alpha, r)
    if space.dim < need:
        raise TruncationError(
            f"squeezed cat (alpha={alpha}, r={r}) needs dim >= {need}, got {space.dim}"
        )
    cat = cat_state(space, alpha, kind)
    if r == 0.0:
        return cat
    s_dag = squeeze(space, r).adjoint()
    return PureState(space, s_dag.apply(cat.amplitudes))


def squeezed_vacuum(space: ModeSpace, r: float) -> PureState:
    """S^dag(r)|0>, the position-squeezed vacuum for r > 0."""
    s_dag = squeeze(space, r).adjoint()
    return PureState(space, s_dag.apply(vacuum(space).amplitudes))


# ----------------------------------------------------------------------------
# Expectations, fidelity, partial trace


def expectation(op: Operator, state: StateLike) -> complex:
    _check_same_space(op.space, state.space)
    if isinstance(state, PureState):
        return complex(np.vdot(state.amplitudes, op.apply(state.amplitudes)))
    # Tr(O rho) = sum_ij O_ij rho_ji
    if op.is_sparse:
        return complex(op.matrix.multiply(state.matrix.T).sum())
    return complex(np.sum(op.matrix * state.matrix.T))


def variance(op: Operator, state: StateLike) -> float:
    """Var(O) = <O^2> - <O>^2 for a Hermitian observable."""
    mean = expectation(op, state)
    if isinstance(state, PureState):
        v = op.apply(state.amplitudes)
        second = float(np.real(np.vdot(v, v)))
    else:
        second = float(np.real(expectation(op @ op, state)))
    return second - float(np.real(mean)) ** 2


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    evals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    return (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T


def fidelity(rho: StateLike, target: StateLike) -> float:
    """Uhlmann fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1].

    For a pure target this reduces to sqrt(<psi|rho|psi>), which keeps
    F^2 affine in rho.
    """
    _check_same_space(rho.space, target.space)
    if isinstance(rho, PureState) and isinstance(target, PureState):
        return min(1.0, abs(rho.overlap(target)))
    if isinstance(target, PureState) or isinstance(rho, PureState):
        psi, mixed = (target, rho) if isinstance(target, PureState) else (rho, target)
        val = float(np.real(np.vdot(psi.amplitudes, mixed.matrix @ psi.amplitudes)))
        return min(1.0, math.sqrt(max(0.0, val)))
    root = _sqrtm_psd(rho.matrix)
    inner = root @ target.matrix @ root
    evals = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    return min(1.0, float(np.sum(np.sqrt(np.clip(evals, 0.0, None)))))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """T(rho, sigma) = (1/2) ||rho - sigma||_1."""
    _check_same_space(rho.space, sigma.space)
    diff = rho.matrix - sigma.matrix
    evals = np.linalg.eigvalsh((diff + diff.conj().T) / 2.0)
    return 0.5 * float(np.sum(np.abs(evals)))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every mode not listed in `keep` (order preserved)."""
    keep = sorted(set(keep))
    n = rho.space.nmodes
    if any(k < 0 or k >= n for k in keep) or not keep:
        raise SpaceMismatchError(f"bad mode indices {keep} for {n} modes")
    dims = rho.space.dims()
    arr = rho.matrix.reshape(dims + dims)
    # Removing the largest traced index first keeps remaining axis labels stable.
    for mode in sorted(set(range(n)) - set(keep), reverse=True):
        half = arr.ndim // 2
        arr = np.trace(arr, axis1=mode, axis2=mode + half)
    kept_space = CompositeSpace(tuple(rho.space.modes[k] for k in keep))
    d = kept_space.dim
    return DensityMatrix(kept_space, arr.reshape(d, d), validate=False)
