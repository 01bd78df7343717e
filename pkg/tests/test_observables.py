import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhsim.grid import Grid, WaveField, field_from_function, gaussian
from nhsim.kernels import PotentialSpec
from nhsim.observables import (BoundaryMassWarning, ObservableSeries, ZeroFieldError, boundary_mass,
                               center_of_mass, energy, frame_vectors, gradient_norm2,
                               kinetic_spectral, mass, momentum, momentum_physical,
                               phase_constants, second_moment)

SQRT_HALF_PI = math.sqrt(math.pi / 2)
G = Grid(1, 1024, 20)
FREE = PotentialSpec(family="harmonic", eta=0.0, zeta=0.0)


def gauss(center=0.0, k=0.0):
    return field_from_function(G, lambda x: np.exp(1j * k * x - (x - center) ** 2))


def shifted(u, cells):
    return u.replace(np.roll(u.values, cells))


def test_mass_of_zero_and_gaussian():
    assert mass(WaveField(G, np.zeros(G.n))) == 0.0
    assert abs(mass(gauss()) - SQRT_HALF_PI) <= 1e-10


def test_mass_translation_invariant():
    u = gauss(0.3)
    assert abs(mass(shifted(u, 37)) - mass(u)) <= 1e-12


def test_com_of_even_field_vanishes():
    assert np.max(np.abs(center_of_mass(gauss()))) <= 1e-12


def test_com_of_shifted_gaussian():
    u = gauss(1.0)
    assert abs(center_of_mass(u)[0] - mass(u)) <= 1e-8


def test_com_shift_by_whole_cells():
    u = gauss(-0.4, 1.0)
    s = 25
    diff = center_of_mass(shifted(u, s))[0] - center_of_mass(u)[0]
    assert abs(diff - mass(u) * s * G.h) <= 1e-10


def test_com_warns_near_boundary():
    u = gauss(18.5)
    with pytest.warns(BoundaryMassWarning):
        center_of_mass(u)
    assert boundary_mass(u) > 1e-10 * mass(u)


def test_real_field_has_no_momentum():
    assert np.max(np.abs(momentum(gauss(0.7)))) <= 1e-12


def test_momentum_of_modulated_gaussian():
    k = math.pi / G.L * 16
    u = gauss(0.0, k)
    assert abs(momentum(u)[0] - mass(u) * k) <= 1e-8


def test_momentum_modulation_covariance():
    u = gauss(0.5, 0.3)
    a = 1.7
    pu = u.replace(np.exp(1j * a * G.x) * u.values)
    assert abs(momentum(pu)[0] - momentum(u)[0] - mass(u) * a) <= 1e-8


def test_free_energy_of_gaussian():
    assert abs(energy(gauss(), FREE) - 0.5 * SQRT_HALF_PI) <= 1e-8
    assert energy(WaveField(G, np.zeros(G.n)), FREE) == 0.0


def test_quadratic_interaction_from_moments():
    u = gauss(0.8, 0.5)
    pot = PotentialSpec(gamma=2.0, lam=0.5)
    M = mass(u)
    e = second_moment(u)
    X = center_of_mass(u)[0]
    interaction = 0.5 * gradient_norm2(u) - energy(u, pot)
    assert abs(interaction - 0.25 * (2 * M * e - 2 * X ** 2)) <= 1e-8


def test_phase_constants_of_gaussian():
    k = phase_constants(gauss())
    assert abs(k.c - SQRT_HALF_PI) <= 1e-8
    assert abs(k.d) <= 1e-8
    assert abs(k.e - 0.25 * SQRT_HALF_PI) <= 1e-8


def test_second_moment_after_shift():
    u = gauss(0.3, 0.4)
    s = 40
    lhs = phase_constants(shifted(u, s)).e
    sh = s * G.h
    assert abs(lhs - (phase_constants(u).e + 2 * sh * center_of_mass(u)[0] + sh ** 2 * mass(u))) <= 1e-8


def test_d_of_modulated_gaussian():
    # d = Im int conj(u) x u' = k X[u] for u = e^{ikx} times a real profile
    k = math.pi / G.L * 16
    for center in (0.0, 1.0):
        u = gauss(center, k)
        assert abs(phase_constants(u).d - k * center_of_mass(u)[0]) <= 1e-8


def test_frame_vectors():
    fr = frame_vectors(gauss())
    assert np.max(np.abs(fr.a)) <= 1e-12 and np.max(np.abs(fr.b)) <= 1e-12
    fr = frame_vectors(gauss(1.0))
    assert abs(fr.b[0] - 1.0) <= 1e-8 and abs(fr.a[0]) <= 1e-12
    k = math.pi / G.L * 16
    fr = frame_vectors(gauss(0.0, k))
    assert abs(fr.a[0] - k) <= 1e-8 and abs(fr.b[0]) <= 1e-8


def test_frame_vectors_reject_zero_field():
    with pytest.raises(ZeroFieldError):
        frame_vectors(WaveField(G, np.zeros(G.n)))


def test_series_record_and_order():
    s = ObservableSeries(dim=1)
    u = gauss()
    s.record(u, FREE)
    s.record(u.replace(time=0.1), FREE)
    assert len(s) == 2
    with pytest.raises(ValueError):
        s.record(u.replace(time=0.05), FREE)


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

params = st.tuples(st.floats(-2, 2), st.floats(-3, 3), st.floats(0.6, 1.5), st.floats(0.2, 2.0))


def field(p, g=G):
    c, k, w, a = p
    return gaussian(g, center=c, wavenumber=k, width=w, amplitude=a)


@settings(max_examples=30, deadline=None)
@given(params, st.integers(-80, 80))
def test_com_shift_covariance(p, cells):
    u = field(p)
    diff = center_of_mass(shifted(u, cells))[0] - center_of_mass(u)[0]
    assert abs(diff - mass(u) * cells * G.h) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(params, st.integers(-40, 40))
def test_momentum_grid_aligned_modulation(p, j):
    u = field(p)
    k = j * math.pi / G.L
    pu = u.replace(np.exp(1j * k * G.x) * u.values)
    assert abs(momentum(pu)[0] - momentum(u)[0] - mass(u) * k) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(params)
def test_spectral_equals_physical_momentum(p):
    u = field(p)
    assert abs(momentum(u)[0] - momentum_physical(u)[0]) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(params)
def test_free_energy_is_half_spectral_kinetic(p):
    u = field(p)
    assert abs(energy(u, FREE) - 0.5 * kinetic_spectral(u)) <= 1e-12 * max(1.0, kinetic_spectral(u))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_cauchy_schwarz_for_phase_constants(seed):
    rng = np.random.default_rng(seed)
    g = Grid(1, 512, 20)
    vals = np.zeros(g.n, dtype=complex)
    for _ in range(3):
        c, k, w = rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.5, 1.5)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        vals += amp * np.exp(1j * k * g.x - ((g.x - c) / w) ** 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryMassWarning)
        k = phase_constants(WaveField(g, vals))
    assert k.c >= 0 and k.e >= 0
    assert k.d ** 2 <= k.c * k.e * (1 + 1e-12)
