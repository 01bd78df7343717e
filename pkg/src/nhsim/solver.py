"""Strang split-step integration of Hartree-type equations.

Every equation handled here has the form ``i u_t = -1/2 Lap u + P[|u|] u``
with a real effective potential ``P`` that depends on ``u`` only through
``|u|``.  A full potential substep ``u <- u exp(-i P dt)`` therefore leaves
``|u|`` (and ``P``) unchanged and is exact; the kinetic half steps are
spectral multipliers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ._accel import phase_kick
from .closedform import mehler_propagate, modulate, translate
from .grid import WaveField, integrate
from .kernels import PotentialSpec, grid_values, kernel_table
from .observables import (BOUNDARY_TOL, FrameVectors, ObservableSeries, boundary_mass,
                          frame_vectors, mass, momentum)

FORMS = ("nH_direct", "gH", "mgH", "harmonic_2H", "logH")
NEUTRALITY_TOL = 1e-8


class SolverError(RuntimeError):
    pass


class BoundaryMassError(SolverError):
    """Too much density reached the outer part of the box."""


class NonFiniteError(SolverError):
    pass


@dataclass(frozen=True)
class EquationSpec:
    """Which equation to integrate.

    ``M`` is the mass parameter of the modified (frame) equation; ``frame``
    records the frame vectors of the original data so that results can be
    mapped back.
    """

    form: str
    pot: PotentialSpec
    frame: FrameVectors | None = None
    M: float | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown equation form {self.form!r}; expected one of {FORMS}")
        fam = self.pot.family
        expected = {"nH_direct": ("power",), "gH": ("power",), "mgH": ("power", "logarithmic"),
                    "harmonic_2H": ("harmonic",), "logH": ("logarithmic",)}[self.form]
        if fam not in expected:
            raise ValueError(f"form {self.form} needs a {' or '.join(expected)} kernel, got {fam}")
        if self.form == "mgH":
            if self.M is None or not self.M > 0:
                raise ValueError("mgH needs a positive mass parameter M")
            object.__setattr__(self, "M", float(self.M))


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 5e-4
    T: float = 1.0
    stride: int = 1
    snapshot_stride: int = 0
    boundary_tol: float = BOUNDARY_TOL

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt={self.dt} must be positive")
        if not self.T >= 0:
            raise ValueError(f"T={self.T} must be nonnegative")
        if self.stride < 1:
            raise ValueError(f"stride={self.stride} must be at least 1")
        if self.snapshot_stride < 0:
            raise ValueError("snapshot_stride must be nonnegative")

    @property
    def steps(self) -> int:
        """Number of steps; ``dt`` is shrunk slightly when it does not divide ``T``."""
        if self.T == 0:
            return 0
        return max(1, math.ceil(self.T / self.dt - 1e-9))

    @property
    def dt_eff(self) -> float:
        return self.T / self.steps if self.steps else self.dt


@dataclass
class SimulationRun:
    initial: WaveField
    equation: EquationSpec
    config: SolverConfig = field(default_factory=SolverConfig)


@dataclass
class SimulationResult:
    series: ObservableSeries
    snapshots: list
    final: WaveField
    drifts: dict
    com_deviation: float
    steps: int


# ---------------------------------------------------------------------------
# potential and stepping
# ---------------------------------------------------------------------------

def guard_boundary(u: WaveField, tol: float = BOUNDARY_TOL):
    m = mass(u)
    bm = boundary_mass(u)
    if m > 0 and bm > tol * m:
        raise BoundaryMassError(f"t={u.time:.6g}: boundary mass {bm:.3e} exceeds {tol:g} x mass {m:.3e}")


def _moments(u: WaveField):
    rho = u.density
    g = u.grid
    m = float(integrate(rho, g))
    X = np.array([integrate(c * rho, g) for c in g.coords], dtype=float)
    e = float(integrate(g.r2 * rho, g))
    return rho, m, X, e


def _quadratic_pot(u: WaveField, coef: float) -> np.ndarray:
    """``coef * (|x|^2 * rho)(x) = coef (|x|^2 m - 2 x.X + e)``."""
    _, m, X, e = _moments(u)
    g = u.grid
    xX = sum(c * Xc for c, Xc in zip(g.coords, X)) * np.ones(g.shape)
    return coef * (g.r2 * m - 2.0 * xX + e)


def effective_potential(u: WaveField, spec: EquationSpec, boundary_tol: float | None = BOUNDARY_TOL) -> np.ndarray:
    """Real potential ``P`` with ``i u_t = -1/2 Lap u + P u``."""
    if boundary_tol is not None:
        guard_boundary(u, boundary_tol)
    g = u.grid
    pot = spec.pot
    form = spec.form
    if form == "harmonic_2H":
        return -0.5 * pot.eta * g.r2 - _quadratic_pot(u, 0.5 * pot.zeta)
    if form == "nH_direct" and pot.gamma == 2.0:
        return -_quadratic_pot(u, pot.lam)
    table = kernel_table(pot, g)
    rho = u.density
    if form in ("nH_direct", "gH", "logH"):
        return -table.convolve_full(rho)
    # mgH: -M V - [V*rho - m V + W.X] - R*rho
    vals = grid_values(pot, g)
    m = float(integrate(rho, g))
    X = [integrate(c * rho, g) for c in g.coords]
    wX = sum(Wc * Xc for Wc, Xc in zip(vals["W"], X))
    return -(spec.M - m) * vals["V"] - table.convolve_full(rho) - wX


def _kinetic(values: np.ndarray, k2: np.ndarray, dt: float) -> np.ndarray:
    return np.fft.ifftn(np.fft.fftn(values) * np.exp(-0.5j * dt * k2))


def strang_step(u: WaveField, spec: EquationSpec, dt: float,
                boundary_tol: float | None = BOUNDARY_TOL) -> WaveField:
    """One symmetric step: half kinetic, exact potential kick, half kinetic."""
    g = u.grid
    half = _kinetic(u.values, g.k2, 0.5 * dt)
    mid = WaveField(g, half, u.time) if np.all(np.isfinite(half)) else None
    if mid is None:
        raise NonFiniteError(f"non-finite amplitudes at t={u.time:.6g}")
    kicked = phase_kick(half, effective_potential(mid, spec, boundary_tol), dt)
    out = _kinetic(kicked, g.k2, 0.5 * dt)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"non-finite amplitudes after step from t={u.time:.6g}")
    return WaveField(g, out, u.time + dt)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

def to_com_frame(u0: WaveField) -> tuple[WaveField, FrameVectors]:
    """``v0 = pi_-a tau_-b u0``: zero momentum and zero center of mass."""
    fr = frame_vectors(u0)
    return modulate(translate(u0, -fr.b), -fr.a), fr


def from_com_frame(v: WaveField, frame: FrameVectors, t: float | None = None) -> WaveField:
    """``exp(i |a|^2 t / 2) tau_{a t + b} pi_a v`` at time ``t`` (default ``v.time``)."""
    t = v.time if t is None else float(t)
    a, b = frame.a, frame.b
    w = translate(modulate(v, a), a * t + b)
    return w.replace(np.exp(0.5j * float(a @ a) * t) * w.values)


def gauge_strip(fields, lam: float) -> list:
    """Multiply a time-ordered series of frame fields by ``exp(-i lam int_0^t ||y u(s)||^2 ds)``.

    The time integral is a composite trapezoid over the given fields, which
    should therefore be spaced at step resolution.
    """
    fields = list(fields)
    if lam == 0.0 or not fields:
        return fields
    ts = np.array([f.time for f in fields])
    q = np.array([integrate(f.grid.r2 * f.density, f.grid) for f in fields])
    phase = cumulative_trapezoid(q, x=ts, initial=0.0) if len(fields) > 1 else np.zeros(1)
    return [f.replace(f.values * np.exp(-1j * lam * p)) for f, p in zip(fields, phase)]


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _drift(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    ref = v[0]
    scale = max(1.0, float(np.linalg.norm(ref)))
    return float(np.max(np.linalg.norm(v - ref, axis=1)) / scale)


def _check_neutral(u: WaveField):
    fr_m = mass(u)
    P = momentum(u)
    X = np.array([integrate(c * u.density, u.grid) for c in u.grid.coords])
    scale = max(1.0, fr_m)
    if np.max(np.abs(P)) > NEUTRALITY_TOL * scale or np.max(np.abs(X)) > NEUTRALITY_TOL * scale:
        raise ValueError(f"mgH data must be neutral: |X|={np.max(np.abs(X)):.3e}, |P|={np.max(np.abs(P)):.3e}")


def run_simulation(run: SimulationRun) -> SimulationResult:
    """Integrate to ``T``, recording observables every ``stride`` steps and at the end.

    Drifts are ``max_t |Q(t) - Q(0)| / max(1, |Q(0)|)``.  The center-of-mass
    deviation is ``max_t |X[u(t)] - M g(t)|`` with ``g(t) = a t + b``
    (``g = g_eta`` for the harmonic form).
    """
    from .closedform import g_omega

    u = run.initial
    spec = run.equation
    cfg = run.config
    if spec.form == "mgH":
        _check_neutral(u)
    guard_boundary(u, cfg.boundary_tol)
    fr = frame_vectors(u) if mass(u) > 0 else None
    eta = spec.pot.eta if spec.form == "harmonic_2H" else 0.0
    t0 = u.time

    series = ObservableSeries(dim=u.grid.dim)
    snaps = []
    com_dev = 0.0

    def record(w: WaveField):
        nonlocal com_dev
        series.record(w, spec.pot)
        if fr is not None:
            target = fr.M * g_omega(w.time - t0, eta, fr.a, fr.b)
            com_dev = max(com_dev, float(np.max(np.abs(series.com[-1] - target))))

    record(u)
    if cfg.snapshot_stride:
        snaps.append(u)
    n = cfg.steps
    dt = cfg.dt_eff
    for j in range(1, n + 1):
        u = strang_step(u, spec, dt, cfg.boundary_tol)
        u = u.replace(time=t0 + j * dt)
        if j % cfg.stride == 0 or j == n:
            record(u)
        if cfg.snapshot_stride and (j % cfg.snapshot_stride == 0 or j == n):
            snaps.append(u)
    drifts = {"mass": _drift(series.mass), "energy": _drift(series.energy),
              "momentum": _drift(series.momentum)}
    return SimulationResult(series, snaps, u, drifts, com_dev, n)


def evolve(u: WaveField, spec: EquationSpec, T: float, dt: float,
           boundary_tol: float | None = BOUNDARY_TOL, every: int = 0) -> tuple[WaveField, list]:
    """Plain stepping without observables; returns the final field and every ``every``-th field."""
    cfg = SolverConfig(dt=dt, T=T)
    out = [u] if every else []
    t0 = u.time
    for j in range(1, cfg.steps + 1):
        u = strang_step(u, spec, cfg.dt_eff, boundary_tol).replace(time=t0 + j * cfg.dt_eff)
        if every and j % every == 0:
            out.append(u)
    return u, out


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

class InsufficientSeriesError(ValueError):
    pass


@dataclass
class GrowthRow:
    name: str
    measured: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured) and self.measured <= self.bound)


@dataclass
class GrowthReport:
    gamma: float
    lam_sign: int
    kind: str
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_text(self) -> str:
        lines = [f"growth diagnostics gamma={self.gamma:g} sign(lambda)={self.lam_sign:+d} fit={self.kind}"]
        for r in self.rows:
            lines.append(f"  {r.name:<16} measured={r.measured:.6g} bound={r.bound:.6g} "
                         f"{'PASS' if r.passed else 'FAIL'}")
        return "\n".join(lines)


GROWTH_MARGIN = 0.2


def _fit_slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def growth_diagnostics(series: ObservableSeries, gamma: float, lam_sign: int,
                       min_T: float = 5.0, M: float | None = None) -> GrowthReport:
    """Fit the growth of ``||grad u||`` (and of the weighted norm) over the latter half of the series.

    For ``gamma < 2`` the slope of ``log`` norm against ``log <t>`` is compared
    with the exponent ``1/(1-kappa)`` (``lam > 0``) or ``0`` for the gradient
    and ``1/(2-kappa)`` for the weighted norm (``lam < 0``), plus a margin.
    For ``gamma = 2`` the exponential rate is compared with ``sqrt(2|lam| M)``
    for ``lam > 0`` and with 0 for ``lam < 0``; pass ``M = 2|lam| x mass``.
    """
    t = series.array("times")
    if len(t) < 4 or t[-1] - t[0] < (min_T if gamma < 2 else 0.0):
        raise InsufficientSeriesError(
            f"growth fit needs a series over at least T={min_T}, got {t[-1] - t[0] if len(t) else 0:g}")
    sign = 1 if lam_sign > 0 else -1
    late = t >= t[0] + 0.5 * (t[-1] - t[0])
    grad = np.log(series.array("grad_norm")[late])
    weighted = np.log(series.array("weighted_norm")[late])
    if gamma == 2.0:
        M = series.mass[0] if M is None else M
        rate = _fit_slope(t[late], grad)
        bound = (math.sqrt(M) if sign > 0 else 0.0) + GROWTH_MARGIN
        return GrowthReport(gamma, sign, "exponential", [GrowthRow("grad_norm rate", rate, bound)])
    kappa = 2.0 * (gamma - 1.0) / gamma if gamma > 1.0 else 0.0
    lt = np.log(np.sqrt(1.0 + t[late] ** 2))
    rows = []
    if sign > 0:
        expo = 1.0 / (1.0 - kappa)
        rows.append(GrowthRow("grad_norm slope", _fit_slope(lt, grad), expo + GROWTH_MARGIN))
        rows.append(GrowthRow("weighted slope", _fit_slope(lt, weighted), expo + GROWTH_MARGIN))
    else:
        rows.append(GrowthRow("grad_norm slope", _fit_slope(lt, grad), GROWTH_MARGIN))
        rows.append(GrowthRow("weighted slope", _fit_slope(lt, weighted),
                              1.0 / (2.0 - kappa) + GROWTH_MARGIN))
    return GrowthReport(gamma, sign, "power", rows)


def verify_momentum_motion(eta: float, zeta: float, u0: WaveField, T: float = 1.0,
                           dt: float = 2.5e-4, checkpoint: float = 0.05) -> float:
    """Max over checkpoints of ``|dP/dt - eta X[u]|`` along a split-step solution of the quadratic equation.

    ``dP/dt`` is a centered difference over one step on each side.
    """
    spec = EquationSpec("harmonic_2H", PotentialSpec(family="harmonic", eta=eta, zeta=zeta))
    cfg = SolverConfig(dt=dt, T=T)
    n, h = cfg.steps, cfg.dt_eff
    every = max(1, round(checkpoint / h))
    u = u0
    prev_P = momentum(u)
    res = 0.0
    pending = None
    for j in range(1, n + 1):
        u = strang_step(u, spec, h)
        P = momentum(u)
        if pending is not None:
            dP = (P - pending[0]) / (2.0 * h)
            res = max(res, float(np.max(np.abs(dP - eta * pending[1]))))
            pending = None
        if j % every == 0 and j < n:
            X = np.array([integrate(c * u.density, u.grid) for c in u.grid.coords])
            pending = (prev_P, X)
        prev_P = P
    return res


def stripped_oracle_error(fields, lam: float, v0: WaveField) -> float:
    """Relative L2 distance between the gauge-stripped last field and ``U_{2 lam M}(t) v0``."""
    stripped = gauge_strip(fields, lam)[-1]
    ref = mehler_propagate(v0, 2.0 * lam * mass(v0), stripped.time - v0.time)
    return relative_l2(stripped, ref)


def relative_l2(u: WaveField, ref: WaveField) -> float:
    num = integrate(np.abs(u.values - ref.values) ** 2, u.grid)
    den = integrate(np.abs(ref.values) ** 2, u.grid)
    return float(np.sqrt(num / den))
