"""Hot inner kernels, compiled with numba when available.

Every kernel exists twice: a ``*_numpy`` reference built from vectorised
numpy and a ``*_numba`` version compiled with ``@njit``.  The public name
(without suffix) is bound to one of them at import time.

Set ``NHSIM_DISABLE_JIT=1`` in the environment to force the numpy path.
"""
from __future__ import annotations

import math
import os

import numpy as np

_FLAG = os.environ.get("NHSIM_DISABLE_JIT", "").strip().lower()
JIT_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not JIT_DISABLED

# block size for the numpy trigonometric interpolation (points per block)
_INTERP_BLOCK = 256


# ---------------------------------------------------------------------------
# band-limited (trigonometric) interpolation
# ---------------------------------------------------------------------------

def trig_interp_numpy(coef, xi_min, dxi, origin, pts):
    """Evaluate ``sum_k coef[k] exp(i xi_k (p - origin))`` at each point ``p``.

    ``coef`` is in ascending-wavenumber order, ``xi_k = xi_min + k*dxi``.
    The first (Nyquist) coefficient is split symmetrically, i.e. it
    contributes ``coef[0] * cos(xi_min * (p - origin))``.
    """
    coef = np.asarray(coef, dtype=np.complex128)
    pts = np.asarray(pts, dtype=np.float64)
    n = coef.shape[0]
    xi = xi_min + dxi * np.arange(n)
    out = np.empty(pts.shape[0], dtype=np.complex128)
    for start in range(0, pts.shape[0], _INTERP_BLOCK):
        s = pts[start:start + _INTERP_BLOCK] - origin
        phase = np.exp(1j * np.outer(s, xi[1:]))
        out[start:start + _INTERP_BLOCK] = phase @ coef[1:] + coef[0] * np.cos(xi_min * s)
    return out


def _trig_interp_py(coef, xi_min, dxi, origin, pts):
    n = coef.shape[0]
    m = pts.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for j in range(m):
        s = pts[j] - origin
        # start at k=1 and advance the phase by a fixed rotation
        th0 = (xi_min + dxi) * s
        cur = complex(math.cos(th0), math.sin(th0))
        rot = complex(math.cos(dxi * s), math.sin(dxi * s))
        acc = coef[0] * math.cos(xi_min * s)
        for k in range(1, n):
            acc += coef[k] * cur
            cur *= rot
            # re-anchor periodically to bound roundoff growth
            if (k & 63) == 0:
                th = (xi_min + (k + 1) * dxi) * s
                cur = complex(math.cos(th), math.sin(th))
        out[j] = acc
    return out


# ---------------------------------------------------------------------------
# 1-d linearisation remainder |x-y|^g - |x|^g + g |x|^(g-2) x y
# ---------------------------------------------------------------------------

def _ktilde_scalar(x, y, gamma):
    t = y / x
    if abs(t) <= 0.25:
        # binomial series of (1-t)^g - 1 + g t, no cancellation near t=0
        coef = gamma
        powt = -t
        phi = 0.0
        for k in range(2, 80):
            coef *= (gamma - k + 1.0) / k
            powt *= -t
            term = coef * powt
            phi += term
            if abs(term) <= 1e-18 * abs(phi):
                break
    else:
        phi = abs(1.0 - t) ** gamma - 1.0 + gamma * t
    return abs(x) ** gamma * phi


def ktilde_grid_numpy(xs, ys, gamma):
    """Table ``out[i, j]`` of the remainder at ``(xs[i], ys[j])`` in one dimension."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    T = Y / X
    small = np.abs(T) <= 0.25
    phi = np.empty_like(T)
    big = ~small
    phi[big] = np.abs(1.0 - T[big]) ** gamma - 1.0 + gamma * T[big]
    ts = T[small]
    acc = np.zeros_like(ts)
    coef = gamma
    powt = -ts
    for k in range(2, 80):
        coef *= (gamma - k + 1.0) / k
        powt = powt * (-ts)
        acc += coef * powt
        if coef == 0.0 or np.all(np.abs(coef * powt) <= 1e-18 * np.abs(acc)):
            break
    phi[small] = acc
    return np.abs(X) ** gamma * phi


def _ktilde_grid_py(xs, ys, gamma):
    out = np.empty((xs.shape[0], ys.shape[0]))
    for i in range(xs.shape[0]):
        for j in range(ys.shape[0]):
            out[i, j] = _ktilde_scalar(xs[i], ys[j], gamma)
    return out


# ---------------------------------------------------------------------------
# potential substep: u <- u * exp(-i * pot * dt)
# ---------------------------------------------------------------------------

def phase_kick_numpy(u, pot, dt):
    return u * np.exp(-1j * dt * pot)


def _phase_kick_py(u, pot, dt):
    flat_u = u.ravel()
    flat_p = pot.ravel()
    out = np.empty_like(flat_u)
    for i in range(flat_u.shape[0]):
        th = -dt * flat_p[i]
        out[i] = flat_u[i] * complex(math.cos(th), math.sin(th))
    return out.reshape(u.shape)


if HAVE_NUMBA:
    trig_interp_numba = njit(cache=True, fastmath=False)(_trig_interp_py)
    _ktilde_scalar_nb = njit(cache=True)(_ktilde_scalar)

    @njit(cache=True)
    def ktilde_grid_numba(xs, ys, gamma):
        out = np.empty((xs.shape[0], ys.shape[0]))
        for i in range(xs.shape[0]):
            for j in range(ys.shape[0]):
                out[i, j] = _ktilde_scalar_nb(xs[i], ys[j], gamma)
        return out

    phase_kick_numba = njit(cache=True)(_phase_kick_py)
else:  # pragma: no cover
    trig_interp_numba = _trig_interp_py
    ktilde_grid_numba = _ktilde_grid_py
    phase_kick_numba = _phase_kick_py


def trig_interp(coef, xi_min, dxi, origin, pts):
    coef = np.ascontiguousarray(coef, dtype=np.complex128)
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    if USE_NUMBA:
        return trig_interp_numba(coef, float(xi_min), float(dxi), float(origin), pts)
    return trig_interp_numpy(coef, xi_min, dxi, origin, pts)


def ktilde_grid(xs, ys, gamma):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if USE_NUMBA:
        return ktilde_grid_numba(xs, ys, float(gamma))
    return ktilde_grid_numpy(xs, ys, gamma)


def phase_kick(u, pot, dt):
    if USE_NUMBA:
        return phase_kick_numba(np.ascontiguousarray(u), np.ascontiguousarray(pot), float(dt))
    return phase_kick_numpy(u, pot, dt)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
