"""Pure numpy implementations of the hot loops.

These mirror ``_ckernels.pyx`` one to one and are used whenever the compiled
extension is unavailable (or ``STOCHVOLTERRA_BACKEND=python`` is set).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = 0xFFFFFFFF
_SHIFT32 = np.uint64(32)
_TWO_M53 = 2.0**-53


def cq_diag(omega, dt, lam, u0, dW, n):
    """Run the CQ implicit Euler recurrence for independent scalar modes.

    Returns the trajectory, shape ``(n + 1, J)``.
    """
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    J = lam.shape[0]
    u = np.empty((n + 1, J))
    u[0] = u0
    denom = 1.0 + dt * omega[0] * lam
    dtlam = dt * lam
    for k in range(1, n + 1):
        rhs = u[k - 1].copy()
        if k > 1:
            rhs -= dtlam * (omega[k - 1 : 0 : -1] @ u[1:k])
        if dW is not None:
            rhs += dW[k - 1]
        u[k] = rhs / denom
    return u


def _apply_tridiag(diag, off, x):
    # symmetric Toeplitz tridiagonal with zero Dirichlet closure, along the last axis
    y = diag * x
    y[..., 1:] += off * x[..., :-1]
    y[..., :-1] += off * x[..., 1:]
    return y


def cq_fem(omega, dt, h, u0, loads, n):
    """Fully discrete P1 stepper for a batch of paths.

    ``u0`` has shape ``(S, m)`` and ``loads`` (mass-weighted noise) shape
    ``(n, S, m)`` or ``None``. Returns the trajectory ``(n + 1, S, m)``.
    """
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    u0 = np.atleast_2d(np.asarray(u0, dtype=np.float64))
    S, m = u0.shape
    shift = dt * omega[0]
    m_diag, m_off = 4.0 * h / 6.0, h / 6.0
    k_diag, k_off = 2.0 / h, -1.0 / h
    ab = np.empty((2, m))
    ab[0, :] = m_off + shift * k_off
    ab[1, :] = m_diag + shift * k_diag
    chol = cholesky_banded(ab)

    u = np.empty((n + 1, S, m))
    u[0] = u0
    flat = u.reshape(n + 1, S * m)
    for k in range(1, n + 1):
        rhs = _apply_tridiag(m_diag, m_off, u[k - 1])
        if k > 1:
            hist = (omega[k - 1 : 0 : -1] @ flat[1:k]).reshape(S, m)
            rhs -= dt * _apply_tridiag(k_diag, k_off, hist)
        if loads is not None:
            rhs += loads[k - 1]
        u[k] = cho_solve_banded((chol, False), rhs.T).T
    return u


def tridiag_solve(sub, diag, sup, rhs):
    """Thomas elimination; ``rhs`` may carry extra trailing columns."""
    diag = np.asarray(diag, dtype=np.float64)
    m = diag.shape[0]
    x = np.array(rhs, dtype=np.float64, copy=True)
    cp = np.empty(m)
    beta = diag[0]
    x[0] = x[0] / beta
    for i in range(1, m):
        cp[i - 1] = sup[i - 1] / beta
        beta = diag[i] - sub[i - 1] * cp[i - 1]
        x[i] = (x[i] - sub[i - 1] * x[i - 1]) / beta
    for i in range(m - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


def _philox4x32(c0, c1, c2, c3, k0, k1):
    k0 = int(k0)
    k1 = int(k1)
    for _ in range(10):
        p0 = _M0 * c0.astype(np.uint64)
        p1 = _M1 * c2.astype(np.uint64)
        hi0 = (p0 >> _SHIFT32).astype(np.uint32)
        lo0 = p0.astype(np.uint32)
        hi1 = (p1 >> _SHIFT32).astype(np.uint32)
        lo1 = p1.astype(np.uint32)
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint32(k0), lo1, hi0 ^ c3 ^ np.uint32(k1), lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def philox_block(counter, key):
    """Raw Philox4x32-10 output for one 128-bit counter and 64-bit key."""
    c = [np.array([v], dtype=np.uint32) for v in counter]
    return tuple(int(v[0]) for v in _philox4x32(*c, key[0], key[1]))


def philox_bits(seed, stream, k0, n, J):
    """Raw Philox4x32-10 words for addresses ``(k0 + r, j)``, shape ``(n, J, 4)``.

    Key is ``seed`` split into two 32-bit halves, counter is
    ``(j, k, stream_lo, stream_hi)``.
    """
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    stream = int(stream) & 0xFFFFFFFFFFFFFFFF
    jj, kk = np.meshgrid(
        np.arange(J, dtype=np.uint32),
        np.arange(k0, k0 + n, dtype=np.uint32),
    )
    c2 = np.full(jj.shape, stream & _MASK32, dtype=np.uint32)
    c3 = np.full(jj.shape, stream >> 32, dtype=np.uint32)
    out = _philox4x32(jj, kk, c2, c3, seed & _MASK32, seed >> 32)
    return np.stack(out, axis=-1)


def philox_normals(seed, stream, k0, n, J):
    """Box-Muller on Philox words: u1 in (0, 1], u2 in [0, 1), both 53-bit."""
    bits = philox_bits(seed, stream, k0, n, J).astype(np.uint64)
    a = ((bits[..., 0] << _SHIFT32) | bits[..., 1]) >> np.uint64(11)
    b = ((bits[..., 2] << _SHIFT32) | bits[..., 3]) >> np.uint64(11)
    u1 = (a.astype(np.float64) + 1.0) * _TWO_M53
    u2 = b.astype(np.float64) * _TWO_M53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
