from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade.integrate import simulate
from cascade.stationary import (
    IncompatibleBlocksError,
    PlacementError,
    apply_A,
    det_A,
    embed_blocks,
    scan_positive,
    solve_phase_locked,
)


def brute_det(N: int) -> int:
    m = sympy.zeros(N, N)
    for i in range(N):
        m[i, i] = -1
        if i + 1 < N:
            m[i, i + 1] = m[i + 1, i] = 2
    return int(m.det(method="bareiss"))


@pytest.mark.parametrize("N, d", [(1, -1), (2, -3), (3, 7)])
def test_det_examples(N, d):
    assert det_A(N) == d


@pytest.mark.parametrize("N", range(1, 13))
def test_det_matches_bareiss(N):
    assert det_A(N) == brute_det(N)


def test_det_is_odd_up_to_200():
    assert all(det_A(N) % 2 == 1 for N in range(1, 201))


def test_det_rejects_nonpositive():
    with pytest.raises(ValueError):
        det_A(0)


def test_solve_examples():
    p2 = solve_phase_locked(2, 1.0)
    npt.assert_allclose(p2.rho, [1, 1], rtol=1e-15)
    assert p2.strictly_positive
    p3 = solve_phase_locked(3, 1.0)
    npt.assert_allclose(p3.rho, [3 / 7, 5 / 7, 3 / 7], rtol=1e-15)
    assert p3.strictly_positive
    assert not solve_phase_locked(5, 1.0).strictly_positive


def test_exact_rational_solution_n3():
    # Cramer by hand: -r1 + 2 r2 = 1, 2 r1 - r2 + 2 r3 = 1, 2 r2 - r3 = 1
    rho = solve_phase_locked(3, 1.0).rho
    assert [Fraction(x).limit_denominator(100) for x in rho] == [Fraction(3, 7), Fraction(5, 7), Fraction(3, 7)]


def test_zero_omega_rejected():
    with pytest.raises(ValueError):
        solve_phase_locked(4, 0.0)


def test_scan_examples():
    small = scan_positive(8, 1.0)
    assert {2, 3, 4, 8} <= set(small) and 5 not in small
    assert scan_positive(1, 1.0) == []


@pytest.mark.parametrize("N", [1, 2, 7, 50, 143, 500])
def test_residual(N):
    for omega in (1.0, -2.5, 1e-3):
        p = solve_phase_locked(N, omega)
        assert p.residual() <= 1e-10 * abs(omega)
        npt.assert_allclose(apply_A(p.rho), np.full(N, omega), rtol=0, atol=1e-10 * abs(omega))


@given(st.integers(1, 200), st.floats(0.01, 100), st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
@settings(max_examples=100)
def test_linearity_in_omega(N, omega, lam):
    a = solve_phase_locked(N, omega).rho
    b = solve_phase_locked(N, lam * omega).rho
    npt.assert_allclose(b, lam * a, rtol=1e-12, atol=1e-12 * np.max(np.abs(lam * a)))


@pytest.mark.parametrize("N", [2, 3, 4, 8])
def test_lifted_profile_rotates_rigidly(N):
    prof = solve_phase_locked(N, 1.0)
    traj = simulate(prof.lift(), np.linspace(0, 10, 11))
    for t, b in zip(traj.times, traj.states):
        assert np.max(np.abs(np.abs(b) ** 2 - prof.rho)) <= 1e-8
        dphase = np.angle(b * np.exp(-1j * prof.omega * t))
        assert np.max(np.abs(dphase)) <= 1e-8


def test_lift_of_non_positive_profile_fails():
    with pytest.raises(ValueError):
        solve_phase_locked(5, 1.0).lift()


def test_embed_examples():
    p2 = solve_phase_locked(2, 1.0)
    s = embed_blocks([p2], [55], 100)
    assert np.flatnonzero(s.b).tolist() == [54, 55]
    npt.assert_allclose(np.abs(s.b[54:56]) ** 2, [1, 1])
    npt.assert_array_equal(embed_blocks([], [], 7).b, np.zeros(7))
    two = embed_blocks([p2, p2], [1, 4], 5)
    assert np.flatnonzero(two.b).tolist() == [0, 1, 3, 4]


def test_embed_errors():
    p2, p3 = solve_phase_locked(2, 1.0), solve_phase_locked(3, 1.0)
    with pytest.raises(PlacementError):
        embed_blocks([p2, p2], [1, 3], 10)  # touching
    with pytest.raises(PlacementError):
        embed_blocks([p2, p3], [1, 2], 10)  # overlapping
    with pytest.raises(PlacementError):
        embed_blocks([p3], [9], 10)
    with pytest.raises(IncompatibleBlocksError):
        embed_blocks([p2, solve_phase_locked(2, 2.0)], [1, 5], 10)


def test_block_isolation():
    p2, p3 = solve_phase_locked(2, 1.0), solve_phase_locked(3, 1.0)
    s = embed_blocks([p2, p3], [20, 40], 60, phase=0.4)
    traj = simulate(s, np.linspace(0, 10, 21))
    off = np.ones(60, dtype=bool)
    off[19:21] = off[39:42] = False
    assert np.max(np.abs(traj.states[:, off])) <= 1e-10
    # each block keeps rotating rigidly on its own support
    for t, b in zip(traj.times, traj.states):
        npt.assert_allclose(b[19:21], np.sqrt(p2.rho) * np.exp(1j * (0.4 + t)), atol=1e-8)
