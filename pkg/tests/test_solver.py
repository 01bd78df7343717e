import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhsim.closedform import explicit_solution_nH, free_propagate
from nhsim.grid import Grid, WaveField, field_from_function, gaussian
from nhsim.kernels import PotentialSpec, grid_values
from nhsim.observables import center_of_mass, mass, momentum
from nhsim.solver import (BoundaryMassError, EquationSpec, InsufficientSeriesError, SimulationRun,
                          SolverConfig, effective_potential, evolve, from_com_frame, gauge_strip,
                          growth_diagnostics, relative_l2, run_simulation, strang_step,
                          stripped_oracle_error, to_com_frame, verify_momentum_motion)

G = Grid(1, 1024, 20)
FREE = EquationSpec("harmonic_2H", PotentialSpec.free())
P15 = PotentialSpec(gamma=1.5, lam=1.0)


def gauss(center=0.0, k=0.0, g=G):
    return field_from_function(g, lambda x: np.exp(1j * k * x - (x - center) ** 2))


def test_equation_spec_validation():
    with pytest.raises(ValueError):
        EquationSpec("nH_direct", PotentialSpec(family="logarithmic", lam=1.0))
    with pytest.raises(ValueError):
        EquationSpec("mgH", P15)
    with pytest.raises(ValueError):
        EquationSpec("bogus", P15)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(stride=0)


def test_potential_of_zero_field():
    z = WaveField(G, np.zeros(G.n))
    for spec in (EquationSpec("gH", P15), EquationSpec("nH_direct", PotentialSpec(gamma=2.0)), FREE):
        assert np.all(effective_potential(z, spec) == 0.0)


def test_frame_potential_bridge():
    u = gauss(0.6, 0.4)
    M = 1.7
    vals = grid_values(P15, G)
    X = center_of_mass(u)[0]
    diff = effective_potential(u, EquationSpec("mgH", P15, M=M)) - effective_potential(u, EquationSpec("gH", P15))
    expected = -(M - mass(u)) * vals["V"] - vals["W"][0] * X
    assert np.max(np.abs(diff - expected)) <= 1e-8


def test_quadratic_shortcut_matches_convolution():
    g = Grid(1, 512, 15)
    u = gauss(0.5, 0.3, g)
    pot = PotentialSpec(gamma=2.0, lam=0.5)
    shortcut = effective_potential(u, EquationSpec("nH_direct", pot))
    conv = effective_potential(u, EquationSpec("gH", pot))
    assert np.max(np.abs(shortcut - conv)) <= 1e-8


def test_free_steps_match_analytic_gaussian():
    u0 = gauss()
    u, _ = evolve(u0, FREE, 0.5, 1e-3)
    t = 0.5
    exact = (1 + 2j * t) ** -0.5 * np.exp(-G.x ** 2 / (1 + 2j * t))
    assert np.max(np.abs(u.values - exact)) <= 1e-8


def test_single_step_mass():
    u0 = gauss(0.4, 0.8)
    u1 = strang_step(u0, EquationSpec("gH", P15), 5e-4)
    assert abs(mass(u1) - mass(u0)) <= 1e-14 * mass(u0)
    assert u1.time == pytest.approx(5e-4)


def test_second_order_in_dt():
    u0 = gauss(1.0, 0.5)
    spec = EquationSpec("nH_direct", PotentialSpec(gamma=2.0, lam=0.5))
    ref = explicit_solution_nH(0.25, u0, 0.5)
    e1 = relative_l2(evolve(u0, spec, 0.25, 2e-3)[0], ref)
    e2 = relative_l2(evolve(u0, spec, 0.25, 1e-3)[0], ref)
    assert 3.5 <= e1 / e2 <= 4.5


def test_boundary_guard_aborts():
    u0 = gauss(18.0)
    with pytest.raises(BoundaryMassError):
        strang_step(u0, EquationSpec("gH", P15), 1e-3)


def test_frame_transform_of_neutral_data():
    u0 = gauss()
    v0, fr = to_com_frame(u0)
    assert np.max(np.abs(v0.values - u0.values)) <= 1e-12


def test_frame_transform_neutralises():
    u0 = gauss(1.0, 2.0)
    v0, fr = to_com_frame(u0)
    assert abs(center_of_mass(v0)[0]) <= 1e-8 and abs(momentum(v0)[0]) <= 1e-8
    back = from_com_frame(v0, fr, 0.0)
    assert np.max(np.abs(back.values - u0.values)) <= 1e-10


def test_frame_transform_moves_with_momentum():
    # a free packet seen from the frame is the centred packet, shifted by a t + b
    u0 = gauss(1.0, 0.5)
    v0, fr = to_com_frame(u0)
    t = 0.8
    lab = from_com_frame(free_propagate(v0, t), fr, t)
    assert np.max(np.abs(lab.values - free_propagate(u0, t).values)) <= 1e-10


def test_gauge_strip_trivial_cases():
    fields = [gauss(), gauss(0.1).replace(time=0.1)]
    assert gauge_strip(fields, 0.0) == fields
    one = gauge_strip([gauss()], 0.5)
    assert np.all(one[0].values == gauss().values)


@pytest.mark.slow
def test_gauge_strip_recovers_linear_flow():
    g = Grid(1, 2048, 30)
    u0 = field_from_function(g, lambda x: np.exp(0.5j * x - (x - 1) ** 2))
    v0, fr = to_com_frame(u0)
    spec = EquationSpec("mgH", PotentialSpec(gamma=2.0, lam=0.5), fr, mass(u0))
    _, fields = evolve(v0, spec, 0.5, 5e-4, every=1)
    assert stripped_oracle_error(fields, 0.5, v0) <= 1e-4


def test_zero_horizon_run():
    res = run_simulation(SimulationRun(gauss(), EquationSpec("gH", P15), SolverConfig(T=0.0)))
    assert len(res.series) == 1 and res.steps == 0
    assert all(v == 0.0 for v in res.drifts.values())


def test_run_records_and_snapshots():
    cfg = SolverConfig(dt=1e-2, T=0.1, stride=3, snapshot_stride=5)
    res = run_simulation(SimulationRun(gauss(0.3, 0.2), EquationSpec("gH", P15), cfg))
    assert res.steps == 10
    np.testing.assert_allclose(res.series.times, [0, 0.03, 0.06, 0.09, 0.1], atol=1e-12)
    assert [s.time for s in res.snapshots] == pytest.approx([0.0, 0.05, 0.1])
    assert res.drifts["mass"] <= 1e-12


def test_frame_run_requires_neutral_data():
    u0 = gauss(1.0)
    with pytest.raises(ValueError):
        run_simulation(SimulationRun(u0, EquationSpec("mgH", P15, M=mass(u0)), SolverConfig(T=0.01)))


def test_conservation_short_run():
    cfg = SolverConfig(dt=5e-4, T=0.2)
    res = run_simulation(SimulationRun(gauss(1.0, 0.5), EquationSpec("gH", P15), cfg))
    assert res.drifts["mass"] <= 1e-10
    assert res.drifts["energy"] <= 1e-5
    assert res.drifts["momentum"] <= 1e-6
    assert res.com_deviation <= 1e-5


def test_growth_needs_long_series():
    res = run_simulation(SimulationRun(gauss(), FREE, SolverConfig(dt=0.05, T=1.0)))
    with pytest.raises(InsufficientSeriesError):
        growth_diagnostics(res.series, 1.5, -1)


def test_free_growth_slope_is_flat():
    g = Grid(1, 256, 40)
    res = run_simulation(SimulationRun(gaussian(g, width=3.0), FREE, SolverConfig(dt=0.05, T=6.0)))
    rep = growth_diagnostics(res.series, 1.5, -1)
    assert abs(rep.rows[0].measured) <= 1e-8
    assert rep.passed
    assert "grad_norm" in rep.to_text()


def test_momentum_constant_without_confinement():
    u0 = gauss(0.5, 0.7)
    assert verify_momentum_motion(0.0, 0.3, u0, T=0.3) <= 1e-6


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.7, 1.3))
def test_frame_round_trip(center, k, width):
    u0 = gaussian(G, center=center, wavenumber=k, width=width)
    v0, fr = to_com_frame(u0)
    assert np.max(np.abs(from_com_frame(v0, fr, 0.0).values - u0.values)) <= 1e-10


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([0.75, 1.25, 1.5, 2.0]), st.sampled_from([1.0, -1.0]), st.floats(-1, 1))
def test_mass_exact_over_many_steps(gamma, lam, k):
    g = Grid(1, 256, 15)
    u0 = gaussian(g, center=0.2, wavenumber=k)
    u, _ = evolve(u0, EquationSpec("gH", PotentialSpec(gamma=gamma, lam=lam)), 0.1, 1e-4)
    assert abs(mass(u) - mass(u0)) <= 1e-12 * mass(u0)
