"""Lindblad master-equation models and a deterministic fixed-step integrator.

Conventions
-----------
* State of the solver is the column-stacked density matrix
  y = vec(rho), y[i + D*j] = rho[i, j], so vec(A rho B) = (B^T kron A) y.
* Master equation:
      drho/dt = -i [H(t), rho] + sum_k  kappa_k  D_k(rho)
  with the standard dissipator
      D[o](rho) = o rho o^+ - (o^+ o rho + rho o^+ o) / 2
  and the squeezed-reservoir dissipator
      (N+1) D[o] + N D[o^+] - M G[o] - M* G[o^+],
      G[o](rho) = o rho o - (o o rho + rho o o) / 2,
  which requires |M|^2 <= N (N + 1).
* H(t) = sum_m f_m(t) O_m. Each term carries an optional envelope; terms
  with oscillating envelopes are supplied in Hermitian pairs via
  hermitian_pair so the assembled H(t) stays Hermitian at all times.
* Integration is fixed-step RK4 with the step contract
      dt <= (2 pi / omega_max) / 20,
  where omega_max adds the largest envelope frequency, a power-iteration
  estimate of the spectral radius of H(0), and an upper bound on the total
  dissipative rate. Violations raise StepSizeError instead of proceeding.
* Observables and snapshots are recorded at the nearest step of the actual
  grid (no interpolation); the trace is checked to 1e-6 at every recorded
  sample and Hermiticity/positivity at every snapshot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from . import backend
from .errors import (
    MultiplicityError,
    NumericalContractError,
    PhysicsError,
    SpaceMismatchError,
    StepSizeError,
)
from .fock import CompositeSpace, DensityMatrix, ModeSpace, Operator, fock_state

__all__ = [
    "ComplexExponential",
    "HamiltonianTerm",
    "hermitian_pair",
    "Dissipator",
    "LindbladModel",
    "Observer",
    "Trajectory",
    "rhs",
    "evolve",
    "steady_state",
]

_CONTRACT_POINTS_PER_PERIOD = 20
_TRACE_TOL = 1e-6


class ComplexExponential:
    """Envelope f(t) = amplitude * exp(i omega t)."""

    __slots__ = ("omega", "amplitude")

    def __init__(self, omega: float, amplitude: complex = 1.0 + 0.0j):
        self.omega = float(omega)
        self.amplitude = complex(amplitude)

    def __call__(self, t: float) -> complex:
        return self.amplitude * np.exp(1j * self.omega * t)

    def conjugate(self) -> "ComplexExponential":
        return ComplexExponential(-self.omega, np.conj(self.amplitude))

    def __repr__(self) -> str:
        return f"ComplexExponential(omega={self.omega!r}, amplitude={self.amplitude!r})"


Envelope = Union[None, ComplexExponential, Callable[[float], complex]]


@dataclass(frozen=True)
class HamiltonianTerm:
    """One term f(t) * operator of the Hamiltonian.

    envelope None means the constant 1. Oscillating terms must come in
    Hermitian pairs (see hermitian_pair); a static term must be Hermitian on
    its own or be paired likewise.
    """

    operator: Operator
    envelope: Envelope = None


def hermitian_pair(operator: Operator, envelope: ComplexExponential) -> tuple:
    """Return the pair (f(t) O, f*(t) O^+) keeping the total Hermitian."""
    return (
        HamiltonianTerm(operator, envelope),
        HamiltonianTerm(operator.adjoint(), envelope.conjugate()),
    )


@dataclass(frozen=True)
class Dissipator:
    """One Lindblad channel: rate, jump operator and reservoir statistics.

    kind "standard" is rate * D[o]. kind "squeezed" is
    rate * ((N+1) D[o] + N D[o^+] - M G[o] - M* G[o^+]).
    """

    operator: Operator
    rate: float
    kind: str = "standard"
    n_env: float = 0.0
    m_env: complex = 0.0 + 0.0j

    def __post_init__(self):
        if self.kind not in ("standard", "squeezed"):
            raise ValueError(f"unknown dissipator kind {self.kind!r}")
        if self.rate < 0.0:
            raise PhysicsError(f"negative dissipator rate {self.rate}")
        if self.kind == "squeezed":
            n = float(self.n_env)
            m = complex(self.m_env)
            if n < 0.0:
                raise PhysicsError(f"negative thermal occupation N={n}")
            if abs(m) ** 2 > n * (n + 1.0) + 1e-10:
                raise PhysicsError(
                    f"unphysical squeezed reservoir: |M|^2={abs(m) ** 2:.6g} "
                    f"> N(N+1)={n * (n + 1.0):.6g}"
                )


@dataclass(frozen=True)
class LindbladModel:
    """A Lindblad master equation on a fixed (composite) space."""

    space: Union[ModeSpace, CompositeSpace]
    terms: tuple = ()
    dissipators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        for term in self.terms:
            if term.operator.space.dim != self.space.dim:
                raise SpaceMismatchError(
                    "Hamiltonian term operator dimension "
                    f"{term.operator.space.dim} != model dimension {self.space.dim}"
                )
        for dis in self.dissipators:
            if dis.operator.space.dim != self.space.dim:
                raise SpaceMismatchError(
                    "dissipator operator dimension "
                    f"{dis.operator.space.dim} != model dimension {self.space.dim}"
                )
        # H(t) must be Hermitian; sample t=0 and one incommensurate time.
        for t in (0.0, 0.7371):
            h = self.hamiltonian(t)
            dense = h.to_dense()
            if np.max(np.abs(dense - dense.conj().T)) > 1e-10:
                raise PhysicsError(
                    f"assembled Hamiltonian is not Hermitian at t={t}; "
                    "oscillating terms must be added via hermitian_pair"
                )

    @property
    def dim(self) -> int:
        return self.space.dim

    def hamiltonian(self, t: float) -> Operator:
        """Assemble H(t) as a dense-backed Operator."""
        d = self.space.dim
        acc = np.zeros((d, d), dtype=np.complex128)
        for term in self.terms:
            f = 1.0 + 0.0j if term.envelope is None else complex(term.envelope(t))
            acc += f * term.operator.to_dense()
        return Operator(self.space, acc)


@dataclass(frozen=True)
class Observer:
    """A named per-sample functional of the state.

    kind "expectation" records Tr(O rho). kind "fidelity" expects O to be a
    projector P = |psi><psi| (possibly embedded in a larger space) and
    records sqrt(clip(Re Tr(P rho), 0, 1)), the fidelity of the state to psi.
    """

    name: str
    operator: Operator
    kind: str = "expectation"

    def __post_init__(self):
        if self.kind not in ("expectation", "fidelity"):
            raise ValueError(f"unknown observer kind {self.kind!r}")


@dataclass(frozen=True)
class Trajectory:
    """Result of evolve(): sampled observables plus optional snapshots."""

    times: np.ndarray
    observables: dict
    snapshots: tuple
    dt: float
    n_steps: int


# ---------------------------------------------------------------------------
# superoperator assembly


def _csr(mat) -> sp.csr_matrix:
    out = sp.csr_matrix(mat)
    out.sort_indices()
    return sp.csr_matrix(
        (out.data.astype(np.complex128), out.indices, out.indptr), shape=out.shape
    )


def _ham_superop(op: sp.csr_matrix) -> sp.csr_matrix:
    """Superoperator of rho -> -i (O rho - rho O)."""
    d = op.shape[0]
    eye = sp.identity(d, dtype=np.complex128, format="csr")
    return (-1j) * (sp.kron(eye, op, format="csr") - sp.kron(op.T, eye, format="csr"))


def _standard_superop(op: sp.csr_matrix) -> sp.csr_matrix:
    """Superoperator of D[o]."""
    d = op.shape[0]
    eye = sp.identity(d, dtype=np.complex128, format="csr")
    odo = (op.conj().T @ op).tocsr()
    return (
        sp.kron(op.conj(), op, format="csr")
        - 0.5 * sp.kron(eye, odo, format="csr")
        - 0.5 * sp.kron(odo.T, eye, format="csr")
    )


def _twisted_superop(op: sp.csr_matrix) -> sp.csr_matrix:
    """Superoperator of G[o](rho) = o rho o - (o o rho + rho o o)/2."""
    d = op.shape[0]
    eye = sp.identity(d, dtype=np.complex128, format="csr")
    oo = (op @ op).tocsr()
    return (
        sp.kron(op.T, op, format="csr")
        - 0.5 * sp.kron(eye, oo, format="csr")
        - 0.5 * sp.kron(oo.T, eye, format="csr")
    )


def _dissipator_superop(dis: Dissipator) -> sp.csr_matrix:
    op = _csr(dis.operator.matrix)
    if dis.kind == "standard":
        return dis.rate * _standard_superop(op)
    n = float(dis.n_env)
    m = complex(dis.m_env)
    opd = _csr(op.conj().T)
    acc = (n + 1.0) * _standard_superop(op) + n * _standard_superop(opd)
    if m != 0.0:
        acc = acc - m * _twisted_superop(op) - np.conj(m) * _twisted_superop(opd)
    return dis.rate * acc


@dataclass
class _Compiled:
    """Liouvillian split into a static CSR part and oscillating CSR parts."""

    dim: int
    l0: sp.csr_matrix
    osc: list = field(default_factory=list)  # (csr, omega) pairs
    generic: list = field(default_factory=list)  # (csr, callable) pairs


def _compile(model: LindbladModel) -> _Compiled:
    d = model.dim
    n2 = d * d
    l0 = sp.csr_matrix((n2, n2), dtype=np.complex128)
    osc: dict = {}
    generic = []
    for term in model.terms:
        c = _ham_superop(_csr(term.operator.matrix))
        env = term.envelope
        if env is None:
            l0 = l0 + c
        elif isinstance(env, ComplexExponential):
            if env.omega == 0.0:
                l0 = l0 + env.amplitude * c
            else:
                key = env.omega
                piece = env.amplitude * c
                osc[key] = osc[key] + piece if key in osc else piece
        else:
            generic.append((c, env))
    for dis in model.dissipators:
        if dis.rate != 0.0:
            l0 = l0 + _dissipator_superop(dis)
    compiled = _Compiled(dim=d, l0=_csr(l0))
    compiled.osc = [(_csr(c), omega) for omega, c in sorted(osc.items())]
    compiled.generic = generic
    return compiled


def _apply(compiled: _Compiled, t: float, y: np.ndarray) -> np.ndarray:
    out = compiled.l0 @ y
    for c, omega in compiled.osc:
        out += np.exp(1j * omega * t) * (c @ y)
    for c, env in compiled.generic:
        out += complex(env(t)) * (c @ y)
    return out


def rhs(model: LindbladModel, rho: DensityMatrix, t: float = 0.0) -> np.ndarray:
    """Right-hand side drho/dt of the master equation, as a dense matrix."""
    if rho.space.dim != model.dim:
        raise SpaceMismatchError("state dimension does not match model")
    compiled = _compile(model)
    y = rho.matrix.flatten(order="F")
    dy = _apply(compiled, t, y)
    return dy.reshape((model.dim, model.dim), order="F")


# ---------------------------------------------------------------------------
# step-size contract


def _spectral_radius(mat: np.ndarray) -> float:
    """Power-iteration estimate of the spectral radius of a Hermitian matrix."""
    d = mat.shape[0]
    v = np.full(d, 1.0 / math.sqrt(d), dtype=np.complex128)
    lam = 0.0
    for _ in range(60):
        w = mat @ v
        nrm = np.linalg.norm(w)
        if nrm < 1e-300:
            return 0.0
        v = w / nrm
        lam = nrm
    return float(lam)


def _sigma_max_sq(op: sp.csr_matrix) -> float:
    """Bound sigma_max(o)^2 <= ||o||_1 ||o||_inf."""
    a = np.abs(op)
    col = a.sum(axis=0).max() if op.nnz else 0.0
    row = a.sum(axis=1).max() if op.nnz else 0.0
    return float(col) * float(row)


def _omega_max(model: LindbladModel, compiled: _Compiled) -> float:
    freq = max((abs(omega) for _, omega in compiled.osc), default=0.0)
    h0 = model.hamiltonian(0.0).to_dense()
    rad = _spectral_radius(h0)
    diss = 0.0
    for dis in model.dissipators:
        s2 = _sigma_max_sq(_csr(dis.operator.matrix))
        if dis.kind == "standard":
            diss += dis.rate * s2
        else:
            diss += dis.rate * s2 * (2.0 * float(dis.n_env) + 2.0 * abs(dis.m_env) + 1.0)
    return freq + rad + diss


def required_dt(model: LindbladModel) -> float:
    """Largest step satisfying the integrator contract for this model."""
    wmax = _omega_max(model, _compile(model))
    if wmax == 0.0:
        return math.inf
    return (2.0 * math.pi / wmax) / _CONTRACT_POINTS_PER_PERIOD


# ---------------------------------------------------------------------------
# evolve


def _nearest_steps(times: Sequence[float], dt: float, n_steps: int) -> np.ndarray:
    arr = np.asarray(times, dtype=np.float64)
    if arr.size and (arr.min() < -1e-12 or arr.max() > n_steps * dt * (1 + 1e-12)):
        raise ValueError("requested sample time outside [0, t_final]")
    steps = np.rint(arr / dt).astype(np.int64)
    return np.unique(np.clip(steps, 0, n_steps))


def _observer_weight(obs: Observer, dim: int) -> np.ndarray:
    if obs.operator.space.dim != dim:
        raise SpaceMismatchError(f"observer {obs.name!r} dimension mismatch")
    # Tr(O rho) = sum_k vec_F(O^T)[k] y[k] = row-major ravel of O dotted with y.
    return np.ascontiguousarray(obs.operator.to_dense().ravel())


def evolve(
    model: LindbladModel,
    rho0: DensityMatrix,
    t_final: float,
    dt: Optional[float] = None,
    observers: Sequence[Observer] = (),
    sample_times: Optional[Sequence[float]] = None,
    snapshot_times: Sequence[float] = (),
    n_samples: int = 201,
) -> Trajectory:
    """Integrate the master equation from rho0 over [0, t_final].

    The step is snapped so an integer number of steps lands exactly on
    t_final; sample and snapshot times are rounded to the nearest grid step.
    dt=None uses the largest contract-satisfying step; an explicit dt above
    the contract raises StepSizeError. Models with generic callable
    envelopes must pass dt explicitly (their bandwidth cannot be bounded
    here) and always integrate on the numpy path.
    """
    if rho0.space.dim != model.dim:
        raise SpaceMismatchError("initial state dimension does not match model")
    if t_final <= 0.0:
        raise ValueError("t_final must be positive")
    observers = [
        obs if isinstance(obs, Observer) else Observer(f"obs{i}", obs)
        for i, obs in enumerate(observers)
    ]
    compiled = _compile(model)

    if compiled.generic and dt is None:
        raise ValueError("models with generic envelopes need an explicit dt")
    dt_req = math.inf
    if not compiled.generic:
        wmax = _omega_max(model, compiled)
        if wmax > 0.0:
            dt_req = (2.0 * math.pi / wmax) / _CONTRACT_POINTS_PER_PERIOD
    if dt is None:
        dt = dt_req if math.isfinite(dt_req) else t_final / 100.0
    elif dt > dt_req * (1.0 + 1e-9):
        raise StepSizeError(
            f"dt={dt:.6g} violates the step contract; required dt <= {dt_req:.6g}"
        )
    n_steps = max(1, int(math.ceil(t_final / dt - 1e-12)))
    dt = t_final / n_steps

    if sample_times is None:
        sample_times = np.linspace(0.0, t_final, n_samples)
    sample_steps = _nearest_steps(sample_times, dt, n_steps)
    snap_steps = _nearest_steps(snapshot_times, dt, n_steps)

    d = model.dim
    weights = np.zeros((len(observers), d * d), dtype=np.complex128)
    for i, obs in enumerate(observers):
        weights[i] = _observer_weight(obs, d)

    y0 = np.ascontiguousarray(rho0.matrix.flatten(order="F"))
    use_numba = backend.HAS_NUMBA and not compiled.generic
    if use_numba:
        obs_vals, snap_vecs, status = _run_numba(
            compiled, y0, dt, n_steps, weights, sample_steps, snap_steps
        )
    else:
        obs_vals, snap_vecs, status = _run_numpy(
            compiled, y0, dt, n_steps, weights, sample_steps, snap_steps
        )
    if status != 0:
        raise NumericalContractError(
            "trace deviated from 1 beyond 1e-6 during integration; "
            "the state left the truncated space or the model is unphysical"
        )

    observables = {}
    for i, obs in enumerate(observers):
        vals = obs_vals[:, i]
        if obs.kind == "fidelity":
            observables[obs.name] = np.sqrt(np.clip(vals.real, 0.0, 1.0))
        else:
            observables[obs.name] = vals.copy()
    snapshots = []
    for k, step in enumerate(snap_steps):
        mat = snap_vecs[k].reshape((d, d), order="F")
        snapshots.append(
            (float(step * dt), DensityMatrix(rho0.space, mat, checkpoint=True))
        )
    return Trajectory(
        times=sample_steps.astype(np.float64) * dt,
        observables=observables,
        snapshots=tuple(snapshots),
        dt=dt,
        n_steps=n_steps,
    )


def _run_numba(compiled, y0, dt, n_steps, weights, sample_steps, snap_steps):
    from . import _kernels

    n2 = y0.shape[0]
    l0 = compiled.l0
    n_osc = len(compiled.osc)
    omegas = np.array([omega for _, omega in compiled.osc], dtype=np.float64)
    if n_osc:
        osc_data = np.concatenate([c.data for c, _ in compiled.osc])
        osc_indices = np.concatenate([c.indices for c, _ in compiled.osc]).astype(
            np.int64
        )
        osc_indptr = np.zeros((n_osc, n2 + 1), dtype=np.int64)
        offset = 0
        for k, (c, _) in enumerate(compiled.osc):
            osc_indptr[k] = c.indptr.astype(np.int64) + offset
            offset += c.nnz
    else:
        osc_data = np.zeros(0, dtype=np.complex128)
        osc_indices = np.zeros(0, dtype=np.int64)
        osc_indptr = np.zeros((0, n2 + 1), dtype=np.int64)
    obs_vals, snap_vecs, status, _ = _kernels.rk4_trajectory(
        y0,
        dt,
        n_steps,
        l0.data,
        l0.indices.astype(np.int64),
        l0.indptr.astype(np.int64),
        osc_data,
        osc_indices,
        osc_indptr,
        omegas,
        weights,
        sample_steps,
        snap_steps,
        compiled.dim,
    )
    return obs_vals, snap_vecs, int(status)


def _run_numpy(compiled, y0, dt, n_steps, weights, sample_steps, snap_steps):
    d = compiled.dim
    y = y0.copy()
    obs_vals = np.zeros((sample_steps.shape[0], weights.shape[0]), dtype=np.complex128)
    snap_vecs = np.zeros((snap_steps.shape[0], y.shape[0]), dtype=np.complex128)
    si = 0
    pi = 0
    status = 0
    diag = (np.arange(d) * (d + 1)).astype(np.int64)
    for step in range(n_steps + 1):
        if si < sample_steps.shape[0] and sample_steps[si] == step:
            if abs(y[diag].sum() - 1.0) > _TRACE_TOL:
                status = 1
            obs_vals[si] = weights @ y
            si += 1
        if pi < snap_steps.shape[0] and snap_steps[pi] == step:
            snap_vecs[pi] = y
            pi += 1
        if step == n_steps or status != 0:
            break
        t = step * dt
        k1 = _apply(compiled, t, y)
        k2 = _apply(compiled, t + 0.5 * dt, y + (0.5 * dt) * k1)
        k3 = _apply(compiled, t + 0.5 * dt, y + (0.5 * dt) * k2)
        k4 = _apply(compiled, t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return obs_vals, snap_vecs, status


# ---------------------------------------------------------------------------
# steady state


def _mode_parity_table(space, mode_index: int) -> np.ndarray:
    """Occupation parity (0/1) of one mode for every composite basis index."""
    if isinstance(space, ModeSpace):
        if mode_index != 0:
            raise ValueError("single-mode space has only mode 0")
        return np.arange(space.dim, dtype=np.int64) % 2
    dims = space.dims()
    if not 0 <= mode_index < len(dims):
        raise ValueError(f"mode index {mode_index} out of range")
    idx = np.arange(space.dim, dtype=np.int64)
    for k in range(len(dims) - 1, mode_index, -1):
        idx = idx // dims[k]
    return (idx % dims[mode_index]) % 2


def steady_state(
    model: LindbladModel,
    parity_hint: Optional[int] = None,
    parity_mode: int = 0,
    method: str = "auto",
    tol: float = 1e-9,
    max_horizon: float = 1e5,
) -> DensityMatrix:
    """Stationary state of a time-independent model.

    For dimension <= 64 (or method="svd") the kernel of the Liouvillian is
    found by dense SVD. A degenerate kernel raises MultiplicityError unless
    parity_hint in {0, 1} selects the steady state with definite photon
    parity of mode parity_mode; the hint is validated by checking that the
    even/odd parity sector is actually invariant under the Liouvillian.
    Larger models (or method="evolve") relax a parity-compatible initial
    state until the residual stalls below tol; this path cannot detect
    degeneracy on its own, so supply the hint.
    """
    compiled = _compile(model)
    if compiled.osc or compiled.generic:
        raise ValueError("steady_state requires a time-independent model")
    if method not in ("auto", "svd", "evolve"):
        raise ValueError(f"unknown method {method!r}")
    if parity_hint not in (None, 0, 1):
        raise ValueError("parity_hint must be None, 0 or 1")
    d = model.dim
    if method == "auto":
        method = "svd" if d <= 64 else "evolve"

    if method == "svd":
        rho = _steady_svd(compiled, model, parity_hint, parity_mode)
    else:
        rho = _steady_evolve(compiled, model, parity_hint, parity_mode, tol, max_horizon)

    resid = np.max(np.abs(_apply(compiled, 0.0, rho.matrix.flatten(order="F"))))
    resid_tol = 1e-10 if method == "svd" else max(10.0 * tol, 1e-8)
    if resid > resid_tol:
        raise NumericalContractError(
            f"steady-state residual {resid:.3e} exceeds {resid_tol:.1e}"
        )
    return rho


def _steady_svd(compiled, model, parity_hint, parity_mode) -> DensityMatrix:
    d = compiled.dim
    lmat = compiled.l0.toarray()
    scale = max(1.0, np.max(np.abs(lmat)))
    if parity_hint is None:
        null = _null_space(lmat, scale)
        if null.shape[1] > 1:
            raise MultiplicityError(
                f"Liouvillian kernel is {null.shape[1]}-dimensional; pass "
                "parity_hint to select a steady state of definite parity"
            )
        vec = null[:, 0]
    else:
        par = _mode_parity_table(model.space, parity_mode)
        sector = np.flatnonzero(par == parity_hint)
        # vec positions i + d*j with both row and column in the sector
        keep = np.sort((sector[:, None] + d * sector[None, :]).ravel())
        out = np.setdiff1d(np.arange(d * d), keep)
        leak = np.max(np.abs(lmat[np.ix_(out, keep)])) if out.size and keep.size else 0.0
        if leak > 1e-10 * scale:
            raise ValueError(
                "parity sector is not invariant under this model; "
                "parity_hint is not applicable"
            )
        sub = lmat[np.ix_(keep, keep)]
        null = _null_space(sub, scale)
        if null.shape[1] > 1:
            raise MultiplicityError(
                "Liouvillian kernel is degenerate even within the parity sector"
            )
        vec = np.zeros(d * d, dtype=np.complex128)
        vec[keep] = null[:, 0]
    mat = vec.reshape((d, d), order="F")
    mat = 0.5 * (mat + mat.conj().T)
    tr = np.trace(mat)
    if abs(tr) < 1e-12:
        raise MultiplicityError(
            "null vector is traceless (a steady coherence, not a state); "
            "the kernel is degenerate"
        )
    return DensityMatrix(model.space, mat / tr.real, validate=True)


def _null_space(lmat: np.ndarray, scale: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(lmat)
    cut = max(1e-12 * scale, 1e-13 * (s[0] if s.size else 1.0))
    count = int(np.sum(s < cut))
    if count == 0:
        # The smallest singular value is the kernel up to roundoff.
        count = 1
    return vh[-count:].conj().T


def _steady_evolve(compiled, model, parity_hint, parity_mode, tol, max_horizon):
    d = model.dim
    if parity_hint is None:
        occ = [0] * (len(model.space.dims()) if isinstance(model.space, CompositeSpace) else 1)
    else:
        par = _mode_parity_table(model.space, parity_mode)
        # lowest basis state with the requested parity on the designated mode
        first = int(np.flatnonzero(par == parity_hint)[0])
        occ = _index_to_occupations(model.space, first)
    psi = fock_state(model.space, occ if len(occ) > 1 else occ[0])
    rho = psi.density()

    rates = [dis.rate for dis in model.dissipators if dis.rate > 0.0]
    chunk = 10.0 / min(rates) if rates else 1.0
    dt = required_dt(model)
    if not math.isfinite(dt):
        raise ValueError("model has no dynamics; steady state undefined")
    t_done = 0.0
    while t_done < max_horizon:
        traj = evolve(model, rho, chunk, dt=dt, sample_times=(chunk,), snapshot_times=(chunk,))
        rho = traj.snapshots[-1][1]
        t_done += chunk
        resid = np.max(np.abs(_apply(compiled, 0.0, rho.matrix.flatten(order="F"))))
        if resid <= tol:
            return rho
    raise NumericalContractError(
        f"steady state not reached within horizon {max_horizon:g}"
    )


def _index_to_occupations(space, index: int) -> list:
    if isinstance(space, ModeSpace):
        return [index]
    occ = []
    for dim in reversed(space.dims()):
        occ.append(index % dim)
        index //= dim
    return list(reversed(occ))
