"""Interaction kernels: cutoff, divergent/bounded split, linearisation vector, audits.

A potential ``V + R`` is split with a radial cutoff ``chi`` into a smooth
divergent part ``V = lam |x|^g chi`` and a compactly supported remainder
``R = lam |x|^g (1 - chi)``.  The linearisation vector
``W(x) = lam g x <x>^(g-2)`` makes

    K(x, y) = V(x - y) - V(x) + y.W(x)

bounded in ``x`` for each fixed ``y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._accel import ktilde_grid
from .grid import Grid, convolve_spectrum, kernel_spectrum

FAMILIES = ("power", "logarithmic", "harmonic")

# finite-difference step used by the assumption audit
FD_STEP = 1e-4
# a running sup is "bounded" when doubling the radius raises it by less than 2**SLOPE_TOL
SLOPE_TOL = 0.05


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    """Kernel family and coefficients.

    ``power``: ``lam |x|^gamma`` with ``0 < gamma <= 2``.
    ``logarithmic``: ``lam log|x|``.
    ``harmonic``: external ``-(eta/2)|x|^2`` plus interaction ``(zeta/2)|x|^2``;
    evaluated from moments, never tabulated.

    ``use_w`` switches the linearisation vector; by default it is on for the
    power family with ``gamma > 1`` and off otherwise.
    """

    family: str = "power"
    gamma: float = 2.0
    lam: float = 0.5
    eta: float = 0.0
    zeta: float = 0.0
    use_w: bool | None = None
    r0: float = 1.0
    r1: float = 2.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not 0.0 < self.r0 < self.r1:
            raise KernelError(f"cutoff radii must satisfy 0 < r0 < r1, got {self.r0}, {self.r1}")
        if self.family == "power":
            if not 0.0 < self.gamma <= 2.0:
                raise KernelError(f"gamma={self.gamma} outside the admissible interval (0, 2]")
        if self.family in ("power", "logarithmic") and self.lam == 0.0:
            raise KernelError("coupling lam must be nonzero; use PotentialSpec.free() for lam = 0")
        if self.family == "logarithmic" and self.use_w:
            raise KernelError("the logarithmic family has no linearisation vector")
        for name in ("gamma", "lam", "eta", "zeta"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def free(cls) -> "PotentialSpec":
        """No interaction at all."""
        return cls(family="harmonic", eta=0.0, zeta=0.0)

    @property
    def w_active(self) -> bool:
        if self.family != "power":
            return False
        if self.use_w is None:
            return self.gamma > 1.0
        return bool(self.use_w)

    @property
    def kappa(self) -> float:
        """Growth exponent of ``|grad V|`` measured in ``<V>``: ``2(g-1)/g`` for ``g > 1``, else 0."""
        if self.family == "power" and self.gamma > 1.0:
            return 2.0 * (self.gamma - 1.0) / self.gamma
        return 0.0

    @property
    def is_free(self) -> bool:
        return self.family == "harmonic" and self.eta == 0.0 and self.zeta == 0.0


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------

def chi(r, r0: float = 1.0, r1: float = 2.0):
    """Quintic smoothstep: 0 for ``r <= r0``, 1 for ``r >= r1``, C^2 in between."""
    s = np.clip((np.asarray(r, dtype=float) - r0) / (r1 - r0), 0.0, 1.0)
    out = s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    return float(out) if out.ndim == 0 else out


def _radius(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.abs(x) if x.ndim == 0 else np.sqrt(np.sum(x * x, axis=-1))


def _require_tabulable(spec: PotentialSpec):
    if spec.family == "harmonic":
        raise KernelError("harmonic kernels are handled through moments, not pointwise tables")


def _full_radial(r, spec: PotentialSpec):
    r = np.asarray(r, dtype=float)
    if spec.family == "power":
        return spec.lam * r ** spec.gamma
    with np.errstate(divide="ignore"):
        return spec.lam * np.log(r)


def V_radial(r, spec: PotentialSpec):
    _require_tabulable(spec)
    r = np.asarray(r, dtype=float)
    c = chi(r, spec.r0, spec.r1)
    # chi vanishes near 0, where log r is singular
    return np.where(c > 0.0, _full_radial(np.where(c > 0.0, r, 1.0), spec) * c, 0.0)


def R_radial(r, spec: PotentialSpec):
    _require_tabulable(spec)
    r = np.asarray(r, dtype=float)
    c = chi(r, spec.r0, spec.r1)
    return _full_radial(r, spec) * (1.0 - c)


def W_factor(r, spec: PotentialSpec):
    """Scalar ``f`` with ``W(x) = f(|x|) x``."""
    _require_tabulable(spec)
    r = np.asarray(r, dtype=float)
    if not spec.w_active:
        return np.zeros_like(r)
    return spec.lam * spec.gamma * (1.0 + r * r) ** ((spec.gamma - 2.0) / 2.0)


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def eval_V(x, spec: PotentialSpec):
    """``V`` at a point (scalar for d=1, or coordinates along the last axis)."""
    return _scalar(V_radial(_radius(x), spec))


def eval_R(x, spec: PotentialSpec):
    """``R`` at a point; the logarithmic family is ``-inf``-free only away from 0."""
    return _scalar(R_radial(_radius(x), spec))


def eval_W(x, spec: PotentialSpec):
    x = np.asarray(x, dtype=float)
    f = W_factor(_radius(x), spec)
    if x.ndim == 0:
        return float(f * x)
    return f[..., None] * x


def _dot(y, w):
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    return y * w if y.ndim == 0 else np.sum(y * w, axis=-1)


def eval_K(x, y, spec: PotentialSpec):
    """``K(x, y) = V(x - y) - V(x) + y.W(x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return _scalar(eval_V(x - y, spec) - eval_V(x, spec) + _dot(y, eval_W(x, spec)))


def eval_K_tilde(x, y, gamma: float):
    """``|x - y|^g - |x|^g + g |x|^(g-2) x.y`` for ``1 < g <= 2`` and ``x != 0``.

    In one dimension this is evaluated as ``|x|^g phi(y/x)`` with a series for
    ``phi`` near zero, so that no cancellation occurs when ``|y| << |x|``.
    """
    if not 1.0 < gamma <= 2.0:
        raise KernelError(f"gamma={gamma} outside (1, 2]")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(_radius(x) == 0.0):
        raise KernelError("the remainder is singular at x = 0")
    if x.ndim == 0 and y.ndim == 0:
        return float(ktilde_grid(np.array([x]), np.array([y]), gamma)[0, 0])
    rx = _radius(x)
    return _scalar(_radius(x - y) ** gamma - rx ** gamma + gamma * rx ** (gamma - 2.0) * _dot(y, x))


def kernel_bound_constant(gamma: float) -> float:
    """Constant ``C_g`` in ``sup_x |K~(x, y)| <= C_g |y|^g``."""
    return max(3.0 ** gamma + 2.0 ** gamma + gamma * 2.0 ** (gamma - 1.0),
               gamma / 2.0 + 9.0 * gamma * (4.0 - gamma) / 2.0)


# ---------------------------------------------------------------------------
# tables on the doubled domain
# ---------------------------------------------------------------------------

def _log_cell_average(h: float, dim: int) -> float:
    # mean of log|x| over the cell [-h/2, h/2]^dim
    if dim == 1:
        return math.log(h / 2.0) - 1.0
    return math.log(h) + 0.5 * (math.pi / 2.0 - 3.0 - math.log(2.0))


def _tables(spec: PotentialSpec, grid: Grid, coords, r):
    V = V_radial(r, spec) * np.ones(r.shape)
    R = R_radial(r, spec) * np.ones(r.shape)
    if spec.family == "logarithmic":
        R = np.where(r == 0.0, spec.lam * _log_cell_average(grid.h, grid.dim), R)
    f = W_factor(r, spec)
    W = np.stack([f * c * np.ones(r.shape) for c in coords])
    return V, R, W


@dataclass(frozen=True, eq=False)
class KernelTable:
    """``V``, ``R``, ``W`` sampled on ``[-2L, 2L)^dim`` plus their spectra."""

    spec: PotentialSpec
    grid: Grid
    V: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    V_hat: np.ndarray = field(repr=False)
    R_hat: np.ndarray = field(repr=False)
    full_hat: np.ndarray = field(repr=False)

    def convolve_V(self, rho: np.ndarray) -> np.ndarray:
        return convolve_spectrum(self.V_hat, rho, self.grid)

    def convolve_R(self, rho: np.ndarray) -> np.ndarray:
        return convolve_spectrum(self.R_hat, rho, self.grid)

    def convolve_full(self, rho: np.ndarray) -> np.ndarray:
        """``((V + R) * rho)(x)`` on the grid."""
        return convolve_spectrum(self.full_hat, rho, self.grid)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


@lru_cache(maxsize=32)
def kernel_table(spec: PotentialSpec, grid: Grid) -> KernelTable:
    """Build (once per ``(spec, grid)``) the doubled-domain kernel table."""
    _require_tabulable(spec)
    coords = grid.doubled_coords
    r = np.sqrt(sum(c ** 2 for c in coords))
    V, R, W = _tables(spec, grid, coords, r)
    V_hat = kernel_spectrum(V, grid)
    R_hat = kernel_spectrum(R, grid)
    full_hat = kernel_spectrum(V + R, grid)
    _freeze(V, R, W, V_hat, R_hat, full_hat)
    return KernelTable(spec, grid, V, R, W, V_hat, R_hat, full_hat)


@lru_cache(maxsize=32)
def _grid_values(spec: PotentialSpec, grid: Grid):
    r = np.sqrt(grid.r2)
    if spec.family == "harmonic":
        V = 0.5 * spec.zeta * grid.r2
        R = np.zeros(grid.shape)
        W = np.zeros((grid.dim,) + grid.shape)
    else:
        V, R, W = _tables(spec, grid, grid.coords, r)
    _freeze(V, R, W)
    return V, R, W


def grid_values(spec: PotentialSpec, grid: Grid) -> dict[str, np.ndarray]:
    """``V``, ``R`` and ``W`` (shape ``(dim, *grid.shape)``) on the base grid.

    For the harmonic family ``V`` is the quadratic interaction ``(zeta/2)|x|^2``.
    """
    V, R, W = _grid_values(spec, grid)
    return {"V": V, "R": R, "W": W}


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------

@dataclass
class AuditRow:
    name: str
    constant: float
    bound: float | None
    passed: bool | None
    witness: tuple = ()
    slope: float | None = None
    required: bool = True
    note: str = ""
    tail: float | None = None  # sup restricted to |x| >= r1, where the cutoff is inactive

    @property
    def status(self) -> str:
        if self.passed is None:
            return "NO SAMPLES"
        if not self.required:
            return "n/a"
        return "PASS" if self.passed else "FAIL"


@dataclass
class AuditReport:
    title: str
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        req = [r for r in self.rows if r.required]
        return bool(req) and all(r.passed is True for r in req)

    def row(self, name: str) -> AuditRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_text(self) -> str:
        head = f"{'check':<12} {'constant':>14} {'bound':>12} {'slope':>8} {'status':>10}  witness"
        lines = [self.title]
        lines += [f"  {k} = {v}" for k, v in self.params.items()]
        lines += [head, "-" * len(head)]
        for r in self.rows:
            bound = "-" if r.bound is None else f"{r.bound:.6g}"
            slope = "-" if r.slope is None else f"{r.slope:.3f}"
            wit = ", ".join(f"{w:.6g}" for w in r.witness)
            line = f"{r.name:<12} {r.constant:>14.6g} {bound:>12} {slope:>8} {r.status:>10}  ({wit})"
            if r.note:
                line += f"  {r.note}"
            lines.append(line)
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    __str__ = to_text


@dataclass
class KernelBoundReport:
    gamma: float
    bound: float
    max_ratio: float
    min_ratio: float
    witness: tuple
    n_samples: int

    @property
    def status(self) -> str:
        if self.n_samples == 0:
            return "NO SAMPLES"
        return "PASS" if self.max_ratio <= self.bound else "FAIL"

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_text(self) -> str:
        wit = "-" if not self.witness else f"x={self.witness[0]:.6g}, y={self.witness[1]:.6g}"
        return (f"gamma={self.gamma:g} samples={self.n_samples} max_ratio={self.max_ratio:.10g} "
                f"bound={self.bound:.6g} {self.status} witness=({wit})")


def audit_kernel_bound(gamma: float, x_range=(-100.0, 100.0), y_range=(-10.0, 10.0),
                       nx: int = 400, ny: int = 400) -> KernelBoundReport:
    """Scan ``|K~(x, y)| / |y|^g`` over a 1-d sample grid; ``x = 0`` and ``y = 0`` are dropped."""
    if not 1.0 < gamma <= 2.0:
        raise KernelError(f"gamma={gamma} outside (1, 2]")
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    xs = xs[xs != 0.0]
    ys = ys[ys != 0.0]
    bound = kernel_bound_constant(gamma)
    if xs.size == 0 or ys.size == 0:
        return KernelBoundReport(gamma, bound, math.nan, math.nan, (), 0)
    ratio = np.abs(ktilde_grid(xs, ys, gamma)) / np.abs(ys)[None, :] ** gamma
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    return KernelBoundReport(gamma, bound, float(ratio[i, j]), float(ratio.min()),
                             (float(xs[i]), float(ys[j])), int(ratio.size))


def _growth_slope(r: np.ndarray, values: np.ndarray) -> float:
    """``log2(S(Rmax) / S(Rmax/2))`` for the running sup ``S`` of ``values`` over ``|r| <= R``."""
    rmax = np.max(np.abs(r))
    s_full = np.max(values)
    inner = values[np.abs(r) <= rmax / 2.0]
    s_half = np.max(inner) if inner.size else 0.0
    if s_full <= 0.0:
        return 0.0
    if s_half <= 0.0:
        return math.inf
    return math.log2(s_full / s_half)


def _fd1(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _fd2(f, x, h):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def _bounded_row(name, xs, values, required=True, note="", bound=None):
    k = int(np.argmax(values))
    slope = _growth_slope(xs, values)
    ok = slope <= SLOPE_TOL and np.all(np.isfinite(values))
    return AuditRow(name, float(values[k]), bound, bool(ok), (float(xs[k]),), slope, required, note)


def audit_assumptions(spec: PotentialSpec, x_max: float = 100.0, nx: int = 2001,
                      y_max: float = 100.0, ny: int = 201, h: float = FD_STEP) -> AuditReport:
    """Empirical constants for the structural assumptions on ``V``, ``W`` and ``R`` (one dimension).

    Each row reports the sup of a ratio over the scan together with the
    growth slope of its running sup; a row passes when the slope stays
    below ``SLOPE_TOL``, i.e. the ratio has levelled off.
    """
    _require_tabulable(spec)
    xs = np.linspace(-x_max, x_max, nx)
    ys = np.linspace(-y_max, y_max, ny)
    ys = ys[ys != 0.0]

    def V(x):
        return V_radial(np.abs(x), spec)

    def W(x):
        return W_factor(np.abs(x), spec) * x

    def jbr(v):
        return np.sqrt(1.0 + v * v)

    kappa = spec.kappa
    rows = []

    # V1: second derivatives of V bounded
    rows.append(_bounded_row("V1", xs, np.abs(_fd2(V, xs, h)), note="|V''|"))

    # V2: |V'| <= C <V>^(kappa/2)
    dv = np.abs(_fd1(V, xs, h))
    ratio = dv / jbr(V(xs)) ** (kappa / 2.0)
    row = _bounded_row("V2", xs, ratio, note=f"kappa={kappa:.6g}")
    tail = np.abs(xs) >= spec.r1
    if np.any(tail):
        row.tail = float(np.max(ratio[tail]))
        row.note += f" tail_constant={row.tail:.6g}"
    rows.append(row)

    # V3: sup_x |K| + sup_x |d_x K| <= C <V(y)>, plus W'' bounded
    X = xs[:, None]
    Y = ys[None, :]

    def K(x):
        return V(x - Y) - V(x) + Y * W(x)

    sup_k = np.max(np.abs(K(X)), axis=0) + np.max(np.abs(_fd1(K, X, h)), axis=0)
    v3 = sup_k / jbr(V(ys))
    r3 = _bounded_row("V3", ys, v3, note="W=0" if not spec.w_active else "")
    rows.append(r3)
    rows.append(_bounded_row("V3-W''", xs, np.abs(_fd2(W, xs, h)), required=spec.w_active))

    # V4: <x> <= C <V(x)>; only needed when W is active (it makes X[u] finite)
    rows.append(_bounded_row("V4", xs, jbr(xs) / jbr(V(xs)), required=spec.w_active,
                             note="" if spec.w_active else "not required with W=0"))

    # R1: R compactly supported and square integrable (bounded when the kernel is)
    fine = np.linspace(-spec.r1 * 1.5, spec.r1 * 1.5, 60001)
    fine = fine[fine != 0.0]
    rv = R_radial(np.abs(fine), spec)
    support = float(np.max(np.abs(fine[rv != 0.0]))) if np.any(rv != 0.0) else 0.0
    l2 = float(np.sqrt(np.sum(rv ** 2) * (fine[1] - fine[0])))
    sup_far = float(np.max(np.abs(rv[np.abs(fine) >= 1e-3])))
    ok = support <= spec.r1 and np.isfinite(l2)
    if spec.family == "power":
        ok = ok and sup_far <= abs(spec.lam) * spec.r1 ** spec.gamma
    rows.append(AuditRow("R1", sup_far, abs(spec.lam) * spec.r1 ** spec.gamma if spec.family == "power" else None,
                         bool(ok), (support,), None, True,
                         f"support<={support:.6g} L2={l2:.6g}"))

    params = {"family": spec.family, "lambda": spec.lam, "kappa": kappa,
              "W": "active" if spec.w_active else "0", "x_max": x_max, "fd_step": h}
    if spec.family == "power":
        params = {"gamma": spec.gamma, **params}
    return AuditReport(f"assumption audit ({spec.family})", rows, params)
