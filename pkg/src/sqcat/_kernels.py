"""Numba kernels for the two hot paths.

This module must only be imported when numba is available (the dynamics and
wigner modules guard on backend.HAS_NUMBA). Both kernels are deterministic:
parallel loops only write disjoint rows/points, no parallel reductions.
"""

import math

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def apply_liouvillian(
    t,
    y,
    out,
    l0_data,
    l0_indices,
    l0_indptr,
    osc_data,
    osc_indices,
    osc_indptr,
    omegas,
):
    """out = L(t) y with L(t) = L0 + sum_k exp(i w_k t) C_k, all CSR."""
    n_osc = omegas.shape[0]
    phases = np.empty(n_osc, np.complex128)
    for k in range(n_osc):
        phases[k] = np.exp(1j * omegas[k] * t)
    n = y.shape[0]
    for i in prange(n):
        acc = 0.0 + 0.0j
        for jj in range(l0_indptr[i], l0_indptr[i + 1]):
            acc += l0_data[jj] * y[l0_indices[jj]]
        for k in range(n_osc):
            s = 0.0 + 0.0j
            for jj in range(osc_indptr[k, i], osc_indptr[k, i + 1]):
                s += osc_data[jj] * y[osc_indices[jj]]
            acc += phases[k] * s
        out[i] = acc


@njit(cache=True)
def rk4_trajectory(
    y0,
    h,
    n_steps,
    l0_data,
    l0_indices,
    l0_indptr,
    osc_data,
    osc_indices,
    osc_indptr,
    omegas,
    obs_weights,
    sample_steps,
    snap_steps,
    dim,
):
    """Fixed-step RK4 on the vectorized density matrix.

    Records observable dot products at sample_steps and full state copies at
    snap_steps (both sorted, step indices into the 0..n_steps grid). Returns
    (obs_values, snapshots, status, y_final); status 1 flags a trace
    deviation beyond 1e-6 at a sample step.
    """
    n = y0.shape[0]
    y = y0.copy()
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    yt = np.empty(n, np.complex128)
    n_obs = obs_weights.shape[0]
    obs_out = np.zeros((sample_steps.shape[0], n_obs), np.complex128)
    snaps = np.zeros((snap_steps.shape[0], n), np.complex128)
    si = 0
    pi = 0
    status = 0
    for step in range(n_steps + 1):
        if si < sample_steps.shape[0] and sample_steps[si] == step:
            tr = 0.0 + 0.0j
            for d in range(dim):
                tr += y[d * dim + d]
            if abs(tr - 1.0) > 1e-6:
                status = 1
            for m in range(n_obs):
                acc = 0.0 + 0.0j
                for i in range(n):
                    acc += obs_weights[m, i] * y[i]
                obs_out[si, m] = acc
            si += 1
        if pi < snap_steps.shape[0] and snap_steps[pi] == step:
            for i in range(n):
                snaps[pi, i] = y[i]
            pi += 1
        if step == n_steps or status != 0:
            break
        t = step * h
        apply_liouvillian(t, y, k1, l0_data, l0_indices, l0_indptr,
                          osc_data, osc_indices, osc_indptr, omegas)
        for i in range(n):
            yt[i] = y[i] + 0.5 * h * k1[i]
        apply_liouvillian(t + 0.5 * h, yt, k2, l0_data, l0_indices, l0_indptr,
                          osc_data, osc_indices, osc_indptr, omegas)
        for i in range(n):
            yt[i] = y[i] + 0.5 * h * k2[i]
        apply_liouvillian(t + 0.5 * h, yt, k3, l0_data, l0_indices, l0_indptr,
                          osc_data, osc_indices, osc_indptr, omegas)
        for i in range(n):
            yt[i] = y[i] + h * k3[i]
        apply_liouvillian(t + h, yt, k4, l0_data, l0_indices, l0_indptr,
                          osc_data, osc_indices, osc_indptr, omegas)
        for i in range(n):
            y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
    return obs_out, snaps, status, y


@njit(parallel=True, cache=True)
def wigner_points(qs, ps, rd, out):
    """Displaced-parity Wigner values W(q_i, p_j) on the grid, flattened
    as iq * n_p + ip.

    rd[k, n] = (2 - delta_{k0}) (-1)^n rho[n+k, n] packs the subdiagonals of
    the density matrix; Hermitian pairing of the +-k diagonals makes every
    point sum exactly real. Per diagonal the scaled displacement elements
        e_n = e^{-x/2} zbar^k sqrt(n!/(n+k)!) L_n^{(k)}(x),   x = |z|^2,
    obey the Laguerre-direction recurrence
        e_{n+1} = (2n+k+1-x)/sqrt((n+1)(n+k+1)) e_n
                  - sqrt(n(n+k)/((n+1)(n+k+1))) e_{n-1},
    which runs in the stable (dominant-solution) direction; |e_n| <= 1
    throughout (they are unitary-matrix entries), so no overflow for any
    grid or dimension, and far points underflow gracefully to exact zeros.
    """
    dim = rd.shape[0]
    n_p = ps.shape[0]
    npts = qs.shape[0] * n_p
    rt2 = math.sqrt(2.0)
    for idx in prange(npts):
        iq = idx // n_p
        ip = idx % n_p
        zr = rt2 * qs[iq]  # z = 2 beta = sqrt(2) (q + i p)
        zi = rt2 * ps[ip]
        x = zr * zr + zi * zi
        zbar = complex(zr, -zi)
        head = complex(math.exp(-0.5 * x), 0.0)
        acc = 0.0
        for k in range(dim):
            if k > 0:
                head = head * zbar / math.sqrt(k)
            e_nm1 = complex(0.0, 0.0)
            e_n = head
            acc += (e_n * rd[k, 0]).real
            for n in range(dim - k - 1):
                den = math.sqrt((n + 1.0) * (n + k + 1.0))
                c1 = (2.0 * n + k + 1.0 - x) / den
                c2 = math.sqrt(n * (n + k + 0.0)) / den
                e_np1 = c1 * e_n - c2 * e_nm1
                e_nm1 = e_n
                e_n = e_np1
                acc += (e_n * rd[k, n + 1]).real
        out[idx] = acc / math.pi
