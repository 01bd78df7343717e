"""Uniform periodic grids, Fourier transforms, quadrature and linear convolution.

The physical domain per axis is ``[-L, L)`` sampled at ``n`` points with
spacing ``h = 2L/n``.  Wavenumbers are ``xi_k = pi k / L`` for
``k = -n/2 .. n/2-1``.  The continuous transform is normalised as

    F f(xi) = (2 pi)^(-d/2) \\int exp(-i x.xi) f(x) dx

and ``transform_forward`` returns its rectangle-rule approximation on the
centred (ascending) wavenumber grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Raised for invalid grid parameters or mismatched grids."""


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    L: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"unsupported dimension {self.dim}; expected 1 or 2")
        if self.n < 8 or self.n & (self.n - 1):
            raise GridError(f"n={self.n} must be a power of two and at least 8")
        if not self.L > 0:
            raise GridError(f"half width L={self.L} must be positive")
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell(self) -> float:
        """Quadrature weight ``h**dim``."""
        return self.h ** self.dim

    @cached_property
    def x(self) -> np.ndarray:
        """1-d coordinate axis ``-L + j h``."""
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def xi(self) -> np.ndarray:
        """1-d wavenumber axis in ascending order."""
        return (np.pi / self.L) * np.arange(-self.n // 2, self.n // 2)

    @cached_property
    def k(self) -> np.ndarray:
        """1-d wavenumber axis in FFT order."""
        return np.fft.ifftshift(self.xi)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        return _axes(self.x, self.dim)

    @cached_property
    def kcoords(self) -> tuple[np.ndarray, ...]:
        return _axes(self.k, self.dim)

    @cached_property
    def r2(self) -> np.ndarray:
        """``|x|^2`` on the full grid."""
        return sum(c ** 2 for c in self.coords) * np.ones(self.shape)

    @cached_property
    def k2(self) -> np.ndarray:
        """``|xi|^2`` on the full grid, FFT order."""
        return sum(c ** 2 for c in self.kcoords) * np.ones(self.shape)

    @cached_property
    def doubled_x(self) -> np.ndarray:
        """1-d coordinates of the doubled domain ``[-2L, 2L)`` with the same spacing."""
        return -2.0 * self.L + self.h * np.arange(2 * self.n)

    @cached_property
    def doubled_coords(self) -> tuple[np.ndarray, ...]:
        return _axes(self.doubled_x, self.dim)

    def dual(self) -> "Grid":
        """Grid whose points are this grid's wavenumbers."""
        return Grid(self.dim, self.n, np.pi * self.n / (2.0 * self.L))

    def outer_mask(self, fraction: float = 1.0 / 8.0) -> np.ndarray:
        """Points lying in the outer ``fraction`` of the domain width along any axis."""
        edge = self.L * (1.0 - fraction)
        mask = np.zeros(self.shape, dtype=bool)
        for c in self.coords:
            mask |= np.abs(c) >= edge
        return mask


def _axes(axis: np.ndarray, dim: int) -> tuple[np.ndarray, ...]:
    if dim == 1:
        return (axis,)
    return (axis[:, None], axis[None, :])


def make_grid(dim: int, n: int, L: float) -> Grid:
    return Grid(dim, n, L)


@dataclass(frozen=True)
class WaveField:
    """Complex amplitudes on a grid at a given time."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.size == self.grid.n ** self.grid.dim and vals.shape != self.grid.shape:
            vals = vals.reshape(self.grid.shape)
        if vals.shape != self.grid.shape:
            raise GridError(f"values of shape {vals.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise GridError("wave field contains non-finite amplitudes")
        object.__setattr__(self, "values", vals)

    def replace(self, values=None, time=None) -> "WaveField":
        return WaveField(self.grid,
                         self.values if values is None else values,
                         self.time if time is None else float(time))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def field_from_function(grid: Grid, func, time: float = 0.0) -> WaveField:
    """Sample ``func(*coords)`` on the grid."""
    vals = func(*grid.coords) * np.ones(grid.shape)
    return WaveField(grid, vals, time)


def gaussian(grid: Grid, center=0.0, wavenumber=0.0, width=1.0, amplitude=1.0) -> WaveField:
    """``amplitude * exp(i k.x) * exp(-|x - center|^2 / width^2)``."""
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    wavenumber = np.broadcast_to(np.asarray(wavenumber, dtype=float), (grid.dim,))
    arg = np.zeros(grid.shape, dtype=np.complex128)
    for c, x0, k0 in zip(grid.coords, center, wavenumber):
        arg = arg - ((c - x0) / width) ** 2 + 1j * k0 * c
    return WaveField(grid, amplitude * np.exp(arg))


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def _centering_phase(grid: Grid) -> np.ndarray:
    # exp(i L xi_k) = (-1)^k on the FFT-ordered wavenumbers
    sign = np.where((np.fft.fftfreq(grid.n) * grid.n).astype(int) % 2 == 0, 1.0, -1.0)
    out = np.ones(grid.shape)
    for ax in _axes(sign, grid.dim):
        out = out * ax
    return out


def transform_forward(f: WaveField) -> np.ndarray:
    """Continuum-normalised Fourier coefficients on ``grid.xi`` (ascending)."""
    g = f.grid
    scale = g.cell / (2.0 * np.pi) ** (g.dim / 2.0)
    coeffs = np.fft.fftn(f.values) * _centering_phase(g) * scale
    return np.fft.fftshift(coeffs)


def transform_inverse(coeffs: np.ndarray, grid: Grid, time: float = 0.0) -> WaveField:
    """Inverse of :func:`transform_forward`."""
    scale = grid.cell / (2.0 * np.pi) ** (grid.dim / 2.0)
    c = np.fft.ifftshift(np.asarray(coeffs, dtype=np.complex128)) / (_centering_phase(grid) * scale)
    return WaveField(grid, np.fft.ifftn(c), time)


def spectral_gradient(f: WaveField) -> list[np.ndarray]:
    """Spectral partial derivatives, Nyquist mode dropped."""
    g = f.grid
    fh = np.fft.fftn(f.values)
    kk = g.k.copy()
    kk[g.n // 2] = 0.0
    out = []
    for axis in range(g.dim):
        shape = [1] * g.dim
        shape[axis] = g.n
        out.append(np.fft.ifftn(1j * kk.reshape(shape) * fh))
    return out


# ---------------------------------------------------------------------------
# quadrature and convolution
# ---------------------------------------------------------------------------

def integrate(samples, grid: Grid):
    """Rectangle rule ``h**dim * sum(samples)``."""
    samples = np.asarray(samples)
    if samples.size != grid.n ** grid.dim:
        raise GridError(f"{samples.size} samples do not match grid with {grid.n ** grid.dim} points")
    return grid.cell * samples.sum()


def kernel_spectrum(a_doubled: np.ndarray, grid: Grid) -> np.ndarray:
    """Real FFT of a doubled-domain kernel, rolled so index 0 is ``x = 0``."""
    a = np.asarray(a_doubled, dtype=np.float64)
    if a.shape != (2 * grid.n,) * grid.dim:
        raise GridError(f"kernel of shape {a.shape} is not on the doubled domain of {grid}")
    return np.fft.rfftn(np.fft.ifftshift(a))


def convolve_spectrum(a_hat: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    """Linear convolution with a kernel given by :func:`kernel_spectrum`."""
    shape2 = (2 * grid.n,) * grid.dim
    axes = tuple(range(grid.dim))
    c = np.fft.irfftn(a_hat * np.fft.rfftn(b, s=shape2, axes=axes), s=shape2, axes=axes)
    sl = (slice(0, grid.n),) * grid.dim
    return grid.cell * c[sl]


def linear_convolve(a: np.ndarray, b: np.ndarray, grid: Grid, b_grid: Grid | None = None) -> np.ndarray:
    """``c(x) = sum_y a(x - y) b(y) h**dim`` for ``x`` on the grid.

    ``a`` is tabulated on the doubled domain ``[-2L, 2L)`` so that no
    circular wrap-around occurs.
    """
    if b_grid is not None and b_grid != grid:
        raise GridError("convolution operands live on different grids")
    b = np.asarray(b, dtype=np.float64)
    if b.shape != grid.shape:
        raise GridError(f"samples of shape {b.shape} do not match grid {grid.shape}")
    return convolve_spectrum(kernel_spectrum(a, grid), b, grid)
