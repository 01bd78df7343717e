"""Exact dynamics for quadratic interactions.

For ``i u_t + 1/2 Lap u + (eta/2)|x|^2 u + (zeta/2)(|x|^2 * |u|^2) u = 0``
the solution is a decorated harmonic (or inverted harmonic) flow with
frequency parameter ``omega = eta + zeta M``.  The propagator ``U_w(t)`` of
``i u_t + 1/2 Lap u + (w/2)|x|^2 u = 0`` is applied through the lens
transform: a free spectral propagation followed by a dilation and a
quadratic phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from ._accel import trig_interp
from .grid import Grid, WaveField, integrate, spectral_gradient
from .observables import (FrameVectors, PhaseConstants, frame_vectors, mass,
                          phase_constants)

ZERO_OMEGA = 1e-12
# tolerance (in units of pi) for hitting a singular time
SINGULAR_TOL = 1e-9
# largest sqrt|w| t per lens substep when w < 0, keeps cos bounded away from 0
LENS_MAX_ANGLE = math.pi / 4.0
DILATION_MASS_TOL = 1e-10


class SingularTimeError(ValueError):
    """``t`` is a zero of the oscillatory factor ``sin(sqrt|w| t)``."""

    def __init__(self, omega: float, t: float, nearest: float):
        self.omega = omega
        self.t = t
        self.nearest = nearest
        super().__init__(f"t={t!r} is singular for omega={omega!r}; "
                         f"nearest admissible time is {nearest!r}")


class DilationError(RuntimeError):
    """The dilated field no longer fits inside the computational box."""


@dataclass(frozen=True)
class OmegaMode:
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def branch(self) -> str:
        if abs(self.omega) < ZERO_OMEGA:
            return "zero"
        return "positive" if self.omega > 0 else "negative"

    @property
    def alpha(self) -> float:
        return math.sqrt(abs(self.omega)) if self.branch != "zero" else 0.0

    def cs(self, t: float) -> tuple[float, float]:
        """``(C, S)`` with ``C'' = w C``, ``C(0) = 1``, ``S' = C``, ``S(0) = 0``."""
        z = self.alpha * t
        if self.branch == "positive":
            return math.cosh(z), math.sinh(z) / self.alpha
        if self.branch == "negative":
            return math.cos(z), math.sin(z) / self.alpha
        return 1.0, float(t)


def _as_mode(omega) -> OmegaMode:
    return omega if isinstance(omega, OmegaMode) else OmegaMode(omega)


def g_omega(t: float, mode, a, b) -> np.ndarray:
    """Trajectory solving ``g'' = w g`` with ``g(0) = b``, ``g'(0) = a``."""
    C, S = _as_mode(mode).cs(t)
    return np.asarray(a, dtype=float) * S + np.asarray(b, dtype=float) * C


def g_omega_prime(t: float, mode, a, b) -> np.ndarray:
    mode = _as_mode(mode)
    C, S = mode.cs(t)
    w = mode.omega if mode.branch != "zero" else 0.0
    return np.asarray(a, dtype=float) * C + np.asarray(b, dtype=float) * (w * S)


# (sinh w - w)/w^3 and (w - sin w)/w^3 without cancellation
def _shc(w: float) -> float:
    if abs(w) < 1e-2:
        w2 = w * w
        return 1.0 / 6.0 + w2 / 120.0 + w2 * w2 / 5040.0
    return (math.sinh(w) - w) / w ** 3


def _snc(w: float) -> float:
    if abs(w) < 1e-2:
        w2 = w * w
        return 1.0 / 6.0 - w2 / 120.0 + w2 * w2 / 5040.0
    return (w - math.sin(w)) / w ** 3


def _sinc_h(z: float) -> float:
    return 1.0 if z == 0.0 else math.sinh(z) / z


def _sinc(z: float) -> float:
    return 1.0 if z == 0.0 else math.sin(z) / z


def _quadratic_integral(p: float, q: float, r: float, t: float, mode: OmegaMode) -> float:
    """``int_0^t (p S^2 + 2 q S C + r C^2) ds`` in closed form."""
    z = mode.alpha * t
    if mode.branch == "positive":
        A, B, Cc = 2.0 * _shc(2.0 * z), _sinc_h(z) ** 2, 0.5 + 0.5 * _sinc_h(2.0 * z)
    elif mode.branch == "negative":
        A, B, Cc = 2.0 * _snc(2.0 * z), _sinc(z) ** 2, 0.5 + 0.5 * _sinc(2.0 * z)
    else:
        A, B, Cc = 1.0 / 3.0, 1.0, 1.0
    return p * t ** 3 * A + q * t ** 2 * B + r * t * Cc


def psi_omega(t: float, mode, k: PhaseConstants) -> float:
    """``psi_w(t) = int_0^t ||x U_w(s) u0||^2 ds`` expressed through ``c, d, e``.

    Algebraically the same as the three branch formulas; arranged so that
    the branches join continuously at ``w = 0``.
    """
    return _quadratic_integral(k.c, k.d, k.e, t, _as_mode(mode))


def int_g_squared(t: float, mode, a, b) -> float:
    """``int_0^t |g_w(s)|^2 ds``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return _quadratic_integral(float(a @ a), float(a @ b), float(b @ b), t, _as_mode(mode))


# ---------------------------------------------------------------------------
# elementary operators
# ---------------------------------------------------------------------------

def _vec(v, dim: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), (dim,)).astype(float)


def translate(u: WaveField, s) -> WaveField:
    """``(tau_s u)(x) = u(x - s)``, spectrally (exact for band-limited fields)."""
    g = u.grid
    s = _vec(s, g.dim)
    if not np.any(s):
        return u
    phase = np.zeros(g.shape)
    for kc, sc in zip(g.kcoords, s):
        phase = phase + kc * sc
    return u.replace(np.fft.ifftn(np.fft.fftn(u.values) * np.exp(-1j * phase)))


def modulate(u: WaveField, k) -> WaveField:
    """``(pi_k u)(x) = exp(i x.k) u(x)``."""
    g = u.grid
    k = _vec(k, g.dim)
    if not np.any(k):
        return u
    arg = np.zeros(g.shape)
    for c, kc in zip(g.coords, k):
        arg = arg + c * kc
    return u.replace(u.values * np.exp(1j * arg))


def free_propagate(u: WaveField, t: float) -> WaveField:
    """``exp(i t Lap / 2) u`` as a spectral multiplier."""
    if t == 0.0:
        return u
    g = u.grid
    vals = np.fft.ifftn(np.fft.fftn(u.values) * np.exp(-0.5j * t * g.k2))
    return u.replace(vals, u.time + t)


def _dilate(values: np.ndarray, grid: Grid, factor: float) -> np.ndarray:
    """Samples of ``f(x / factor)`` from samples of band-limited ``f``."""
    n, L = grid.n, grid.L
    pts = grid.x / factor
    inside = (pts >= -L) & (pts < L)
    xi_min = -math.pi * n / (2.0 * L)
    dxi = math.pi / L
    out = values
    for axis in range(grid.dim):
        moved = np.moveaxis(out, axis, -1)
        coef = np.fft.fftshift(np.fft.fft(moved, axis=-1), axes=-1) / n
        res = np.zeros(moved.shape, dtype=np.complex128)
        flat_c = coef.reshape(-1, n)
        flat_r = res.reshape(-1, n)
        for row in range(flat_c.shape[0]):
            flat_r[row, inside] = trig_interp(flat_c[row], xi_min, dxi, -L, pts[inside])
        out = np.moveaxis(res, -1, axis)
    return out


def _nearest_admissible(mode: OmegaMode, t: float) -> float:
    period = math.pi / mode.alpha
    k = round(t / period)
    shift = max(1e-6 * period, 8.0 * SINGULAR_TOL * period)
    return k * period + (shift if t >= k * period else -shift)


def check_admissible(omega, t: float):
    mode = _as_mode(omega)
    if mode.branch != "negative" or t == 0.0:
        return
    m = mode.alpha * t / math.pi
    k = round(m)
    if k != 0 and abs(m - k) <= SINGULAR_TOL:
        raise SingularTimeError(mode.omega, t, _nearest_admissible(mode, t))


def _lens(u: WaveField, mode: OmegaMode, t: float) -> WaveField:
    g = u.grid
    C, S = mode.cs(t)
    v = free_propagate(u, S / C)
    vals = _dilate(v.values, g, C)
    w = mode.omega if mode.branch != "zero" else 0.0
    vals = vals * (abs(C) ** (-g.dim / 2.0) * np.exp(0.5j * w * S / C * g.r2))
    m_in = mass(u)
    out = u.replace(vals, u.time + t)
    lost = abs(m_in - mass(out)) / max(m_in, np.finfo(float).tiny)
    if lost > DILATION_MASS_TOL:
        raise DilationError(f"dilation by {C:.6g} changed the mass by a fraction {lost:.3e}; "
                            "enlarge the box")
    return out


def mehler_propagate(u: WaveField, omega, t: float) -> WaveField:
    """``U_w(t) u`` for ``i u_t + 1/2 Lap u + (w/2)|x|^2 u = 0``."""
    mode = _as_mode(omega)
    if t == 0.0:
        return u
    check_admissible(mode, t)
    if mode.branch == "zero":
        return free_propagate(u, t)
    if mode.branch == "positive":
        return _lens(u, mode, t)
    steps = max(1, math.ceil(abs(mode.alpha * t) / LENS_MAX_ANGLE - 1e-12))
    out = u
    for _ in range(steps):
        out = _lens(out, mode, t / steps)
    return out.replace(time=u.time + t)


# ---------------------------------------------------------------------------
# explicit solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicSetup:
    eta: float
    zeta: float
    frame: FrameVectors
    consts: PhaseConstants

    @property
    def M(self) -> float:
        return self.frame.M

    @property
    def omega(self) -> float:
        return self.eta + self.zeta * self.frame.M

    @classmethod
    def from_field(cls, u0: WaveField, eta: float, zeta: float) -> "HarmonicSetup":
        return cls(float(eta), float(zeta), frame_vectors(u0), phase_constants(u0))


def _decorations(t: float, setup: HarmonicSetup):
    a, b = setup.frame.a, setup.frame.b
    w_mode = OmegaMode(setup.omega)
    e_mode = OmegaMode(setup.eta)
    ge, gep = g_omega(t, e_mode, a, b), g_omega_prime(t, e_mode, a, b)
    gw, gwp = g_omega(t, w_mode, a, b), g_omega_prime(t, w_mode, a, b)
    Psi = (0.5 * (ge @ gep - gw @ gwp)
           - 0.5 * setup.zeta * setup.M * int_g_squared(t, w_mode, a, b)
           + 0.5 * setup.zeta * psi_omega(t, w_mode, setup.consts))
    return ge, gep, gw, gwp, float(Psi)


def explicit_solution_2H(t: float, u0: WaveField, setup: HarmonicSetup) -> WaveField:
    """Closed-form solution of the quadratic equation at time ``t`` (``u0`` taken at time 0)."""
    if t == 0.0:
        return u0
    ge, gep, gw, gwp, Psi = _decorations(t, setup)
    w = mehler_propagate(u0, setup.omega, t)
    w = translate(w, -gw)
    w = modulate(w, gep - gwp)
    w = translate(w, ge)
    return w.replace(np.exp(1j * Psi) * w.values, u0.time + t)


def strip_decorations(u: WaveField, t: float, setup: HarmonicSetup) -> WaveField:
    """Undo the phase and frame shifts of :func:`explicit_solution_2H`, leaving ``U_w(t) u0``."""
    ge, gep, gw, gwp, Psi = _decorations(t, setup)
    w = u.replace(np.exp(-1j * Psi) * u.values)
    w = translate(w, -ge)
    w = modulate(w, gwp - gep)
    return translate(w, gw)


def explicit_solution_nH(t: float, u0: WaveField, lam: float = 0.5) -> WaveField:
    """Closed-form solution for the kernel ``lam |x|^2``.

    The base cases are ``lam = +-1/2``; any other nonzero ``lam`` is reduced
    to them by scaling the amplitude with ``sqrt(2 |lam|)``.
    """
    if lam == 0.0:
        raise ValueError("lam must be nonzero")
    if t == 0.0:
        return u0
    s = math.sqrt(2.0 * abs(lam))
    v0 = u0.replace(u0.values * s) if s != 1.0 else u0
    setup = HarmonicSetup.from_field(v0, 0.0, math.copysign(1.0, lam))
    v = explicit_solution_2H(t, v0, setup)
    return v.replace(v.values / s) if s != 1.0 else v


def psi_plus(t: float, frame: FrameVectors, k: PhaseConstants) -> float:
    """Nonlinear phase for ``lam = 1/2`` in the form with explicit hyperbolic factors."""
    M, a, b = frame.M, frame.a, frame.b
    r = math.sqrt(M)
    sh, ch = math.sinh(r * t), math.cosh(r * t)
    aa, ab, bb = a @ a, a @ b, b @ b
    return ((k.c - M * aa + M * (k.e - M * bb)) / (4.0 * M ** 1.5) * sh * ch
            + (k.d - M * ab) / (2.0 * M) * sh * sh
            + (-k.c + M * aa + M * (k.e - M * bb)) / (4.0 * M) * t)


def psi_minus(t: float, frame: FrameVectors, k: PhaseConstants) -> float:
    """Nonlinear phase for ``lam = -1/2``."""
    M, a, b = frame.M, frame.a, frame.b
    r = math.sqrt(M)
    sn, cs = math.sin(r * t), math.cos(r * t)
    aa, ab, bb = a @ a, a @ b, b @ b
    return ((k.c - M * aa - M * (k.e - M * bb)) / (4.0 * M ** 1.5) * sn * cs
            + (M * ab - k.d) / (2.0 * M) * sn * sn
            + (-k.c + M * aa - M * (k.e - M * bb)) / (4.0 * M) * t)


def assembled_psi(t: float, frame: FrameVectors, k: PhaseConstants, sign: int) -> float:
    """The same phase rebuilt from ``psi_w`` and ``int |g_w|^2`` with ``w = +-M``."""
    mode = OmegaMode(sign * frame.M)
    return sign * (0.5 * psi_omega(t, mode, k)
                   - 0.5 * frame.M * int_g_squared(t, mode, frame.a, frame.b))


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------

def _l2(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(integrate(np.abs(values) ** 2, grid)))


def verify_translation_identity(phi: WaveField, kappa: float, a, b, t: float) -> float:
    """L2 residual of ``U(t) pi_-a tau_-b phi = e^{-i(g.g' - a.b)/2} pi_-g' tau_-g U(t) phi``."""
    dim = phi.grid.dim
    a = _vec(a, dim)
    b = _vec(b, dim)
    mode = OmegaMode(kappa)
    lhs = mehler_propagate(modulate(translate(phi, -b), -a), mode, t)
    g, gp = g_omega(t, mode, a, b), g_omega_prime(t, mode, a, b)
    rhs = modulate(translate(mehler_propagate(phi, mode, t), -g), -gp)
    rhs_vals = np.exp(-0.5j * (g @ gp - a @ b)) * rhs.values
    return _l2(lhs.values - rhs_vals, phi.grid)


def verify_phase_formula(u0: WaveField, omega: float, T: float, nodes: int = 201,
                         checkpoints: int = 10) -> float:
    """Max deviation between a Simpson time integral of ``||y w(s)||^2`` and its closed form.

    ``w(s) = U_w(s) pi_-a tau_-b u0`` where ``a``, ``b`` are the frame
    vectors of ``u0`` itself (the closed form relies on that).
    """
    if T == 0.0:
        return 0.0
    if nodes < 3:
        raise ValueError("need at least 3 quadrature nodes")
    if nodes % 2 == 0:
        nodes += 1
    fr = frame_vectors(u0)
    k = phase_constants(u0)
    mode = OmegaMode(omega)
    ts = np.linspace(0.0, T, nodes)
    for s in ts[1:]:
        check_admissible(mode, s)
    v0 = modulate(translate(u0, -fr.b), -fr.a)
    r2 = u0.grid.r2
    q = np.array([integrate(r2 * mehler_propagate(v0, mode, s).density, u0.grid) for s in ts])
    acc = cumulative_simpson(q, x=ts, initial=0.0)
    idx = np.unique(np.linspace(0, nodes - 1, checkpoints + 1).round().astype(int))[1:]
    exact = np.array([psi_omega(ts[i], mode, k) - fr.M * int_g_squared(ts[i], mode, fr.a, fr.b)
                      for i in idx])
    return float(np.max(np.abs(acc[idx] - exact)))


def remark_norm_formulas(u0: WaveField, t: float) -> tuple[float, float]:
    """``(||grad u(t)||^2, ||sqrt(M) x u(t)||^2)`` for the kernel ``|x|^2 / 2``, from ``u0`` alone."""
    fr = frame_vectors(u0)
    M, a, b = fr.M, fr.a, fr.b
    r = math.sqrt(M)
    sh, ch = math.sinh(r * t), math.cosh(r * t)
    g = u0.grid
    grads = spectral_gradient(u0)
    vals = u0.values

    def op_norm(p, q):
        # ||(p grad + i q x) u0||^2
        return sum(integrate(np.abs(p * du + 1j * q * c * vals) ** 2, g) for du, c in zip(grads, g.coords))

    beta1 = ch * a + r * sh * b
    beta2 = sh * a + r * ch * b
    at_b = a * t + b
    grad2 = op_norm(ch, r * sh) + M * (a @ a) - M * (beta1 @ beta1)
    xw2 = op_norm(sh, r * ch) + M * M * (at_b @ at_b) - M * (beta2 @ beta2)
    return float(grad2), float(xw2)
