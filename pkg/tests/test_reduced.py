import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade.integrate import simulate
from cascade.model import BoundaryCondition, rhs_hydro, to_hydro
from cascade.reduced import (
    PER2_IC,
    ReducedState,
    bond_sum_error,
    extract_reduced,
    integrate_reduced,
    lift_to_lattice,
    reduced_hamiltonian,
    reduced_rhs,
    return_time,
    symmetry_error,
    wrap_mod_pi,
)


@st.composite
def reduced_states(draw):
    rho_bar = draw(st.floats(0.1, 4.0))
    drho = draw(st.floats(-0.95, 0.95)) * rho_bar
    return ReducedState(draw(st.floats(-np.pi, np.pi)), drho, rho_bar, draw(st.floats(-np.pi, np.pi)))


def test_rhs_examples():
    npt.assert_allclose(reduced_rhs(ReducedState(np.pi / 4, 0, 2)), (0, 16, 0, -2), atol=1e-14)
    npt.assert_allclose(reduced_rhs(ReducedState(0, 0, 1.7)), (0, 0, 0, 3 * 1.7), atol=1e-15)
    assert reduced_rhs(ReducedState(np.pi / 2, 2, 2))[1] == pytest.approx(0, abs=1e-15)
    assert reduced_rhs(ReducedState(np.pi / 2, -2, 2))[1] == pytest.approx(0, abs=1e-15)


def test_state_validation():
    with pytest.raises(ValueError):
        ReducedState(0.0, 2.5, 2.0)


def test_hamiltonian_examples():
    assert reduced_hamiltonian(ReducedState(np.pi / 4, 0, 2)) == pytest.approx(2, abs=1e-15)
    assert reduced_hamiltonian(ReducedState(0.3, 1.5, 1.5)) == 0
    assert reduced_hamiltonian(ReducedState(0, 0, 1)) == 2.5


def test_lift_examples():
    h = to_hydro(lift_to_lattice(ReducedState(np.pi / 4, 0, 2, np.pi / 4), 4))
    npt.assert_allclose(h.rho, [1, 1, 1, 1], atol=1e-15)
    npt.assert_allclose(h.phi, [0, np.pi / 4, 0, np.pi / 4], atol=1e-15)
    assert h.bc is BoundaryCondition.PERIODIC
    npt.assert_allclose(lift_to_lattice(ReducedState(0, 0, 2, 0), 6).b, np.ones(6), atol=1e-15)
    npt.assert_allclose(np.abs(lift_to_lattice(ReducedState(0, 2, 2, 0), 4).b) ** 2, [0, 2, 0, 2], atol=1e-15)


def test_lift_rejects_odd_ring():
    with pytest.raises(ValueError):
        lift_to_lattice(PER2_IC, 5)


def test_wrap_mod_pi():
    npt.assert_allclose(wrap_mod_pi([0.0, np.pi, 3 * np.pi / 4, -np.pi / 2]), [0, 0, -np.pi / 4, -np.pi / 2])


@given(reduced_states())
@settings(max_examples=200)
def test_reduced_field_conserves_its_energy(r):
    dphi, drho, drho_bar, _ = reduced_rhs(r)
    c, s = np.cos(2 * r.dphi), np.sin(2 * r.dphi)
    gH = (-4 * s * (r.rho_bar**2 - r.drho**2), -(1 + 4 * c) * r.drho)
    assert drho_bar == 0
    assert abs(gH[0] * dphi + gH[1] * drho) <= 1e-12 * max(1.0, r.rho_bar**3)


@given(reduced_states(), st.sampled_from([2, 4, 10]))
@settings(max_examples=200)
def test_reduced_field_matches_lattice_field(r, N):
    # differentiate the lifted lattice state and project back onto the four variables
    h = to_hydro(lift_to_lattice(r, N))
    dphi_l, drho_l = rhs_hydro(h)
    odd, even = dphi_l[0::2], dphi_l[1::2]
    want = reduced_rhs(r)
    tol = 1e-10 * max(1.0, r.rho_bar)
    npt.assert_allclose(even - odd, want[0], atol=tol)
    npt.assert_allclose(drho_l[1::2] - drho_l[0::2], want[1], atol=tol)
    npt.assert_allclose(drho_l[1::2] + drho_l[0::2], 0.0, atol=tol)
    npt.assert_allclose(even + odd, want[3], atol=tol)


def test_energy_and_rho_bar_conserved_to_50():
    traj = integrate_reduced(PER2_IC, np.linspace(0, 50, 501))
    H = [reduced_hamiltonian(ReducedState.from_array(y)) for y in traj.states]
    assert np.max(np.abs(np.array(H) - H[0])) <= 1e-10
    assert np.max(np.abs(traj.states[:, 2] - PER2_IC.rho_bar)) <= 1e-12


@pytest.fixture(scope="module")
def lattice_run():
    times = np.linspace(0, 10, 201)
    return times, integrate_reduced(PER2_IC, times), simulate(lift_to_lattice(PER2_IC, 10), times)


def test_lattice_keeps_period_two_symmetry(lattice_run):
    _, _, full = lattice_run
    for k in range(len(full)):
        s = full.state(k)
        assert symmetry_error(s) <= 1e-8
        assert bond_sum_error(s, PER2_IC.rho_bar) <= 1e-8


def test_lattice_matches_reduced_trajectory(lattice_run):
    times, red, full = lattice_run
    for k in range(times.size):
        s = full.state(k)
        for site in (2, 6, 10):
            dphi, drho = extract_reduced(s, site)
            assert abs(wrap_mod_pi(dphi - red.states[k, 0])) <= 1e-7
            assert abs(drho - red.states[k, 1]) <= 1e-7


def test_extract_rejects_odd_site():
    with pytest.raises(ValueError):
        extract_reduced(lift_to_lattice(PER2_IC, 4), 3)


def test_orbit_returns():
    ret = return_time(PER2_IC)
    assert 0 < ret.period <= 50
    assert ret.distance <= 1e-6
    # the section is crossed upward, so half a period later drho is back at zero going down
    mid = integrate_reduced(PER2_IC, [0.0, ret.period / 2]).states[-1]
    assert abs(mid[1]) <= 1e-6


def test_return_time_needs_a_crossing():
    # the (0, 0) equilibrium never leaves drho = 0
    with pytest.raises(RuntimeError):
        return_time(ReducedState(0.0, 0.0, 1.0), t_max=1.0)
