import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhsim.closedform import (HarmonicSetup, OmegaMode, SingularTimeError, assembled_psi,
                              check_admissible, explicit_solution_2H, explicit_solution_nH,
                              free_propagate, g_omega, g_omega_prime, int_g_squared,
                              mehler_propagate, modulate, psi_minus, psi_omega, psi_plus,
                              remark_norm_formulas, strip_decorations, translate,
                              verify_phase_formula, verify_translation_identity)
from nhsim.grid import Grid, field_from_function, integrate, spectral_gradient, transform_forward
from nhsim.observables import PhaseConstants, center_of_mass, frame_vectors, mass, phase_constants

G = Grid(1, 1024, 20)


def gauss(center=0.0, k=0.0, g=G):
    return field_from_function(g, lambda x: np.exp(1j * k * x - (x - center) ** 2))


def l2(u, v):
    return math.sqrt(integrate(np.abs(u.values - v.values) ** 2, u.grid))


# ---------------------------------------------------------------------------
# trajectories and phases
# ---------------------------------------------------------------------------

def test_omega_branches():
    assert OmegaMode(2.0).branch == "positive"
    assert OmegaMode(-2.0).branch == "negative"
    assert OmegaMode(0.0).branch == "zero"
    assert OmegaMode(1e-13).branch == "zero"


@pytest.mark.parametrize("omega", [1.3, 0.0, -0.7])
def test_trajectory_initial_conditions(omega):
    a, b = np.array([0.4]), np.array([-1.2])
    np.testing.assert_allclose(g_omega(0.0, omega, a, b), b, atol=0)
    np.testing.assert_allclose(g_omega_prime(0.0, omega, a, b), a, atol=0)


def test_trajectory_linear_branch():
    assert float(g_omega(1.0, 0.0, 2.0, 1.0)) == pytest.approx(3.0, abs=1e-15)


def test_trajectory_branch_continuity():
    for w in (1e-9, -1e-9):
        assert abs(float(g_omega(1.0, w, 2.0, 1.0)) - 3.0) <= 1e-8


def test_psi_zero_at_origin():
    k = PhaseConstants(1.3, 0.4, 0.7)
    for w in (2.0, 0.0, -2.0):
        assert psi_omega(0.0, w, k) == 0.0


def test_psi_cubic_branch():
    assert psi_omega(1.0, 0.0, PhaseConstants(3.0, 2.0, 1.0)) == pytest.approx(4.0, abs=1e-14)


def test_psi_branch_continuity():
    k = phase_constants(gauss(0.3, 0.8))
    ref = psi_omega(1.0, 0.0, k)
    for w in (1e-6, -1e-6):
        assert abs(psi_omega(1.0, w, k) - ref) <= 1e-6


@pytest.mark.parametrize("omega", [1.5, 0.0, -1.5])
def test_psi_initial_slope(omega):
    k = PhaseConstants(1.1, -0.3, 0.6)
    h = 1e-6
    assert (psi_omega(h, omega, k) - psi_omega(-h, omega, k)) / (2 * h) == pytest.approx(k.e, rel=1e-8)


@pytest.mark.parametrize("omega", [2.0, 0.0, -2.0])
def test_int_g_squared_against_quadrature(omega):
    a, b = np.array([0.7]), np.array([-0.4])
    ts = np.linspace(0, 1.1, 20001)
    vals = np.array([float(g_omega(t, omega, a, b)[0]) ** 2 for t in ts])
    quad = np.trapezoid(vals, ts)
    assert int_g_squared(1.1, omega, a, b) == pytest.approx(quad, rel=1e-7)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def test_translate_modulate_zero_is_identity():
    u = gauss(0.5, 1.0)
    assert translate(u, 0.0) is u
    assert modulate(u, 0.0) is u


def test_translate_inverse():
    u = gauss(0.5, 1.0)
    back = translate(translate(u, 1.37), -1.37)
    assert np.max(np.abs(back.values - u.values)) <= 1e-12


def test_translate_matches_shifted_samples():
    u = gauss(0.0, 0.5)
    s = 0.731
    ref = gauss(s, 0.5)
    # tau_s (e^{ikx} f(x)) = e^{ik(x - s)} f(x - s)
    ref = ref.replace(ref.values * np.exp(-0.5j * s))
    assert np.max(np.abs(translate(u, s).values - ref.values)) <= 1e-12


def test_fourier_intertwining():
    u = gauss(0.3)
    j = 12
    k = j * math.pi / G.L
    lhs = transform_forward(modulate(u, k))
    rhs = np.roll(transform_forward(u), j)  # coefficients move up by k
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_propagator_zero_time_is_identity():
    u = gauss(0.2, 0.4)
    for w in (1.0, 0.0, -1.0):
        assert mehler_propagate(u, w, 0.0) is u


def test_free_gaussian_peak():
    u = mehler_propagate(gauss(), 0.0, 0.5)
    assert abs(np.max(np.abs(u.values)) - (1 + 4 * 0.25) ** -0.25) <= 1e-6


def test_harmonic_propagator_on_ground_state():
    # e^{-x^2/2} is stationary for the confining oscillator (omega = -1) up to the phase e^{-it/2}
    u = field_from_function(G, lambda x: np.exp(-x ** 2 / 2))
    t = 0.9
    out = mehler_propagate(u, -1.0, t)
    assert np.max(np.abs(out.values - np.exp(-0.5j * t) * u.values)) <= 1e-10


@pytest.mark.parametrize("omega,t", [(1.0, 0.8), (0.0, 1.0), (-1.0, 2.5), (0.3, 1.5), (-4.0, 0.3)])
def test_propagator_unitary(omega, t):
    u = gauss(0.5, 0.5)
    assert abs(mass(mehler_propagate(u, omega, t)) - mass(u)) <= 1e-10


def test_singular_time_error():
    with pytest.raises(SingularTimeError) as err:
        mehler_propagate(gauss(), -1.0, math.pi)
    assert err.value.nearest != math.pi
    check_admissible(-1.0, math.pi / 2)
    check_admissible(1.0, math.pi)


# ---------------------------------------------------------------------------
# explicit solutions
# ---------------------------------------------------------------------------

def test_2h_reduces_to_free_flow():
    u0 = gauss()
    setup = HarmonicSetup.from_field(u0, 0.0, 0.0)
    out = explicit_solution_2H(0.6, u0, setup)
    assert np.max(np.abs(out.values - free_propagate(u0, 0.6).values)) <= 1e-12


@pytest.mark.parametrize("eta,zeta", [(1.0, 0.5), (-0.5, 0.4), (0.3, -0.2)])
def test_2h_centre_of_mass_law(eta, zeta):
    u0 = gauss(0.5, 0.4)
    setup = HarmonicSetup.from_field(u0, eta, zeta)
    fr = setup.frame
    for t in (0.3, 0.7):
        out = explicit_solution_2H(t, u0, setup)
        target = fr.M * g_omega(t, eta, fr.a, fr.b)
        assert np.max(np.abs(center_of_mass(out) - target)) <= 1e-6
        assert abs(mass(out) - fr.M) <= 1e-10


def test_2h_critical_mass_decays_like_free_gaussian():
    u0 = gauss()
    zeta = 0.4
    setup = HarmonicSetup.from_field(u0, -zeta * mass(u0), zeta)
    assert setup.omega == pytest.approx(0.0, abs=1e-15)
    t = 0.5
    out = explicit_solution_2H(t, u0, setup)
    assert abs(np.max(np.abs(out.values)) - (1 + 4 * t * t) ** -0.25) <= 1e-6
    stripped = strip_decorations(out, t, setup)
    assert l2(stripped, free_propagate(u0, t)) <= 1e-12


def test_nh_zero_time():
    u0 = gauss(1.0, 0.5)
    assert explicit_solution_nH(0.0, u0) is u0


@pytest.mark.parametrize("center,k", [(1.0, 0.5), (0.0, 0.0), (-0.7, 1.2)])
def test_phase_forms_agree(center, k):
    u0 = gauss(center, k)
    fr, pk = frame_vectors(u0), phase_constants(u0)
    for t in np.linspace(0, 2, 41):
        assert abs(psi_plus(t, fr, pk) - assembled_psi(t, fr, pk, 1)) <= 1e-10
        assert abs(psi_minus(t, fr, pk) - assembled_psi(t, fr, pk, -1)) <= 1e-10


def test_nh_scaling_in_coupling():
    # lam = 2 is lam = 1/2 applied to 2 u0, scaled back
    g = Grid(1, 1024, 20)
    u0 = gauss(g=g).replace(0.5 * gauss(g=g).values)
    direct = explicit_solution_nH(0.3, u0, lam=2.0)
    via = explicit_solution_nH(0.3, u0.replace(2 * u0.values), lam=0.5)
    assert np.max(np.abs(direct.values - via.values / 2)) <= 1e-12


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------

def test_translation_identity_trivial_frame():
    assert verify_translation_identity(gauss(), 0.7, 0.0, 0.0, 0.6) <= 1e-12


@pytest.mark.parametrize("kappa", [0.0, 1.0, -1.0])
def test_translation_identity(kappa):
    assert verify_translation_identity(gauss(), kappa, 1.0, 0.5, 0.7) <= 1e-8


def test_phase_formula_zero_horizon():
    assert verify_phase_formula(gauss(), 1.0, 0.0) == 0.0


def test_phase_formula_free_gaussian():
    assert verify_phase_formula(gauss(), 0.0, 1.0) <= 1e-6


def test_phase_formula_moving_gaussian():
    u0 = gauss(0.0, 1.0)  # a = 1, b = 0
    assert verify_phase_formula(u0, 1.0, 1.0) <= 1e-5


def test_remark_formulas_at_zero():
    u0 = gauss(0.4, 0.6)
    pk = phase_constants(u0)
    grad2, xw2 = remark_norm_formulas(u0, 0.0)
    assert grad2 == pytest.approx(pk.c, rel=1e-12)
    assert xw2 == pytest.approx(mass(u0) * pk.e, rel=1e-12)


def test_remark_formula_against_explicit_solution():
    g = Grid(1, 2048, 40)
    u0 = gauss(g=g)
    out = explicit_solution_nH(1.0, u0, 0.5)
    measured = sum(integrate(np.abs(d) ** 2, g) for d in spectral_gradient(out))
    assert abs(measured - remark_norm_formulas(u0, 1.0)[0]) <= 1e-6 * measured


def test_remark_formula_growth():
    u0 = gauss()
    assert remark_norm_formulas(u0, 2.0)[0] / remark_norm_formulas(u0, 1.0)[0] >= math.e


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2.0))
def test_trajectory_solves_ode(omega, a, b, t):
    h = 1e-3
    gpp = (g_omega(t + h, omega, a, b) - 2 * g_omega(t, omega, a, b) + g_omega(t - h, omega, a, b)) / h ** 2
    scale = max(1.0, float(np.max(np.abs(g_omega(t, omega, a, b)))) * max(1.0, abs(omega)))
    assert float(np.max(np.abs(gpp - omega * g_omega(t, omega, a, b)))) <= 1e-6 * scale


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([-1.0, -0.3, 0.0, 0.5, 1.0]), st.floats(0.05, 0.6), st.floats(0.05, 0.6),
       st.floats(-1, 1), st.floats(-1, 1))
def test_group_property(omega, t1, t2, c, k):
    u = gauss(c, k)
    whole = mehler_propagate(u, omega, t1 + t2)
    split = mehler_propagate(mehler_propagate(u, omega, t2), omega, t1)
    assert np.max(np.abs(whole.values - split.values)) <= 1e-7


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([-1.0, -0.3, 0.0, 0.5, 1.0]), st.floats(0.2, 1.0))
def test_propagator_solves_equation(omega, t):
    u0 = gauss(0.3, 0.5)
    d = 1e-4
    up, um = mehler_propagate(u0, omega, t + d), mehler_propagate(u0, omega, t - d)
    u = mehler_propagate(u0, omega, t)
    g = u.grid
    lap = np.fft.ifft(-g.k2 * np.fft.fft(u.values))
    res = 1j * (up.values - um.values) / (2 * d) + 0.5 * lap + 0.5 * omega * g.r2 * u.values
    assert math.sqrt(integrate(np.abs(res) ** 2, g)) <= 1e-3 * math.sqrt(mass(u))


@settings(max_examples=10, deadline=None)
@given(st.floats(-1e-6, 1e-6), st.floats(0.2, 1.0))
def test_propagator_branch_continuity(omega, t):
    u0 = gauss(0.2, 0.3)
    near = mehler_propagate(u0, omega, t)
    free = free_propagate(u0, t)
    assert np.max(np.abs(near.values - free.values)) <= 1e-6
