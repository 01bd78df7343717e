"""Mass, center of mass, momentum, energy and the phase constants c, d, e."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import WaveField, integrate, spectral_gradient, transform_forward

BOUNDARY_FRACTION = 1.0 / 8.0
BOUNDARY_TOL = 1e-10


class BoundaryMassWarning(UserWarning):
    """Density in the outer part of the domain is large enough to bias moments."""


class ZeroFieldError(ValueError):
    pass


def boundary_mass(u: WaveField, fraction: float = BOUNDARY_FRACTION) -> float:
    """Mass carried by the outer ``fraction`` of the domain."""
    return float(integrate(np.where(u.grid.outer_mask(fraction), u.density, 0.0), u.grid))


def check_boundary(u: WaveField, tol: float = BOUNDARY_TOL) -> bool:
    """Warn and return False when the boundary mass exceeds ``tol * M``."""
    m = mass(u)
    bm = boundary_mass(u)
    if bm > tol * max(m, np.finfo(float).tiny):
        warnings.warn(f"boundary mass {bm:.3e} exceeds {tol:g} of total mass {m:.3e}; "
                      "moment integrals are unreliable", BoundaryMassWarning, stacklevel=3)
        return False
    return True


def mass(u: WaveField) -> float:
    return float(integrate(u.density, u.grid))


def center_of_mass(u: WaveField) -> np.ndarray:
    """``X[u] = int y |u|^2 dy`` (not normalised by the mass)."""
    check_boundary(u)
    rho = u.density
    return np.array([integrate(c * rho, u.grid) for c in u.grid.coords], dtype=float)


def momentum(u: WaveField) -> np.ndarray:
    """``P[u] = int xi |F u(xi)|^2 dxi`` evaluated on the wavenumber grid."""
    g = u.grid
    uh2 = np.abs(transform_forward(u)) ** 2
    dual = g.dual()
    return np.array([integrate(c * uh2, dual) for c in dual.coords], dtype=float)


def momentum_physical(u: WaveField) -> np.ndarray:
    """``Im int conj(u) grad u`` with a spectral gradient."""
    conj = np.conj(u.values)
    return np.array([integrate(conj * du, u.grid).imag for du in spectral_gradient(u)], dtype=float)


def gradient_norm2(u: WaveField) -> float:
    """``||grad u||_2^2`` in physical space."""
    return float(sum(integrate(np.abs(du) ** 2, u.grid) for du in spectral_gradient(u)))


def kinetic_spectral(u: WaveField) -> float:
    """``int |xi|^2 |F u|^2 dxi``, Nyquist mode dropped."""
    g = u.grid
    uh2 = np.abs(transform_forward(u)) ** 2
    dual = g.dual()
    xi2 = np.zeros(g.shape)
    for c in dual.coords:
        cc = np.where(np.isclose(c, dual.x[0]), 0.0, c)
        xi2 = xi2 + cc ** 2
    return float(integrate(xi2 * uh2, dual))


def second_moment(u: WaveField) -> float:
    """``||x u||_2^2``."""
    return float(integrate(u.grid.r2 * u.density, u.grid))


def energy(u: WaveField, pot) -> float:
    """Hamiltonian ``1/2 ||grad u||^2 - 1/2 iint (V+R)(x-y) |u(x)|^2 |u(y)|^2``.

    This is the functional conserved by ``i u_t + 1/2 Lap u = -((V+R)*|u|^2) u``.
    ``pot`` is a :class:`~nhsim.kernels.PotentialSpec`.  For the harmonic
    family the quadratic kernel ``(zeta/2)|x|^2`` and the external term
    ``-(eta/2) ||x u||^2`` are evaluated from moments.
    """
    from .kernels import kernel_table  # local import: kernels depends on this module

    kin = 0.5 * gradient_norm2(u)
    if pot.family == "harmonic":
        m = mass(u)
        x = center_of_mass(u)
        e = second_moment(u)
        pair = 0.5 * pot.zeta * (2.0 * m * e - 2.0 * float(x @ x))
        return kin - 0.5 * pot.eta * e - 0.5 * pair
    if pot.lam == 0.0:
        return kin
    table = kernel_table(pot, u.grid)
    rho = u.density
    pair = integrate(rho * table.convolve_full(rho), u.grid)
    return kin - 0.5 * float(pair)


def weighted_norm(u: WaveField, pot) -> float:
    """``||<V>^(1/2) u||_2`` for the divergent part ``V`` of the potential."""
    from .kernels import grid_values

    v = grid_values(pot, u.grid)["V"]
    return float(np.sqrt(integrate(np.sqrt(1.0 + v ** 2) * u.density, u.grid)))


@dataclass(frozen=True)
class FrameVectors:
    """Mass together with the scaled momentum ``a = P/M`` and center ``b = X/M``."""

    M: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if not self.M > 0:
            raise ZeroFieldError("frame vectors need a field of positive mass")
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))


@dataclass(frozen=True)
class PhaseConstants:
    c: float
    d: float
    e: float


def phase_constants(u: WaveField) -> PhaseConstants:
    """``c = ||grad u||^2``, ``d = Im int conj(u) x.grad u``, ``e = ||x u||^2``."""
    check_boundary(u)
    conj = np.conj(u.values)
    grads = spectral_gradient(u)
    c = sum(integrate(np.abs(du) ** 2, u.grid) for du in grads)
    d = sum(integrate(conj * x * du, u.grid).imag for x, du in zip(u.grid.coords, grads))
    e = second_moment(u)
    return PhaseConstants(float(c), float(d), float(e))


def frame_vectors(u: WaveField) -> FrameVectors:
    m = mass(u)
    if not m > 0:
        raise ZeroFieldError("cannot build a center-of-mass frame for the zero field")
    return FrameVectors(m, momentum(u) / m, center_of_mass(u) / m)


@dataclass
class ObservableSeries:
    """Time series of monitored functionals."""

    dim: int = 1
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    momentum: list = field(default_factory=list)
    com: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    weighted_norm: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def append(self, t, mass, energy, momentum, com, grad_norm, weighted_norm):
        if self.times and not t > self.times[-1]:
            raise ValueError(f"time {t} does not increase past {self.times[-1]}")
        self.times.append(float(t))
        self.mass.append(float(mass))
        self.energy.append(float(energy))
        self.momentum.append(np.atleast_1d(np.asarray(momentum, dtype=float)).copy())
        self.com.append(np.atleast_1d(np.asarray(com, dtype=float)).copy())
        self.grad_norm.append(float(grad_norm))
        self.weighted_norm.append(float(weighted_norm))

    def record(self, u: WaveField, pot):
        self.append(u.time, mass(u), energy(u, pot), momentum(u), center_of_mass(u),
                    np.sqrt(gradient_norm2(u)), weighted_norm(u, pot))

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)
