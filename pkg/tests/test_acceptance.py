"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 1 and 2 integrate at full scale and take roughly ten seconds and one
minute respectively on one core.  ``CASCADE_THREADS`` bounds the
ensemble worker pool.
"""

import numpy as np
import pytest
import sympy

from cascade.compacton import (
    AMPLITUDE,
    CompactonParams,
    compacton_ode_residual,
    compacton_profile,
    first_integral,
)
from cascade.ensemble import EnsembleConfig, ICKind, InitialConditionSpec, draw_phases, make_ic, run_ensemble
from cascade.integrate import IntegratorConfig, invariant_drift, simulate
from cascade.model import (
    BoundaryCondition,
    HydroState,
    State,
    from_hydro,
    lattice_norm,
    polynomial,
    rhs_cartesian,
    rhs_hydro,
)
from cascade.reduced import (
    PER2_IC,
    ReducedState,
    bond_sum_error,
    extract_reduced,
    integrate_reduced,
    lift_to_lattice,
    reduced_hamiltonian,
    symmetry_error,
    wrap_mod_pi,
)
from cascade.stationary import det_A, embed_blocks, scan_positive, solve_phase_locked

D = BoundaryCondition.DIRICHLET
LATTICE_TOL = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


@pytest.fixture
def report(capsys):
    def emit(k, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {k:2d} {title}: {detail}")
        assert ok, detail

    return emit


@pytest.mark.slow
def test_01_invariant_drift_to_10000(report):
    spec = InitialConditionSpec(ICKind.LOCALIZED_RANDOM_PHASE, 100, eps=0.1, j_star=10)
    state = make_ic(spec, draw_phases(2024, 0, 100))
    traj = simulate(state, np.linspace(0, 10_000, 1001), LATTICE_TOL)
    d = invariant_drift(traj)
    worst = max(d.max_abs_mass, d.max_rel_mass, d.max_abs_ham, d.max_rel_ham)
    report(1, "invariant drift, t=10000", worst <= 1e-9,
           f"mass abs/rel {d.max_abs_mass:.2e}/{d.max_rel_mass:.2e}, "
           f"H abs/rel {d.max_abs_ham:.2e}/{d.max_rel_ham:.2e} (bound 1e-9)")


@pytest.mark.slow
def test_02_ensemble_norm_growth(report):
    cfg = EnsembleConfig(
        InitialConditionSpec(ICKind.LOCALIZED_RANDOM_PHASE, 100, eps=0.1, j_star=10),
        realizations=100,
        t_final=1000.0,
        sample_times=tuple(np.linspace(0, 1000, 11)),
        norms=tuple(polynomial(s) for s in (1, 2, 3, 4)),
        master_seed=2024,
        integrator=LATTICE_TOL,
    )
    stats = run_ensemble(cfg)
    parts, ok = [], stats.count == 100
    for s in (2, 3, 4):
        k = stats.column(f"norm_poly_{s}")
        mean, lo = stats.mean[-1, k], stats.ci_lower[-1, k]
        ok &= bool(mean > 1 and lo > 1)
        parts.append(f"s={s} mean {mean:.4f} ci_lower {lo:.4f}")
    report(2, "ensemble norm growth, M=100, t=1000", ok,
           "; ".join(parts) + f"; {stats.count} ok, {len(stats.failures)} failed")


def test_03_positivity_table(report):
    positive = scan_positive(142, 1.0)
    ok = {2, 3, 4, 8, 142} <= set(positive) and 5 not in positive
    report(3, "stationary positivity table", ok, f"positive N <= 142: {positive}")


def _bareiss(N):
    m = sympy.zeros(N, N)
    for i in range(N):
        m[i, i] = -1
        if i + 1 < N:
            m[i, i + 1] = m[i + 1, i] = 2
    return int(m.det(method="bareiss"))


def test_04_determinant_oracle(report):
    mismatches = [N for N in range(1, 13) if det_A(N) != _bareiss(N)]
    even = [N for N in range(1, 201) if det_A(N) % 2 == 0]
    report(4, "determinant oracle", not mismatches and not even,
           f"oracle mismatches N<=12: {mismatches}; even determinants N<=200: {even}")


def test_05_phase_locked_flow(report):
    prof = solve_phase_locked(3, 1.0)
    traj = simulate(prof.lift(), np.linspace(0, 10, 101), LATTICE_TOL)
    rho_err = np.max(np.abs(np.abs(traj.states) ** 2 - prof.rho))
    phase_err = np.max(np.abs(np.angle(traj.states * np.exp(-1j * prof.omega * traj.times)[:, None])))
    report(5, "phase-locked stationarity, N=3, t=10", rho_err <= 1e-8 and phase_err <= 1e-8,
           f"max density error {rho_err:.2e}, max phase error {phase_err:.2e} (bound 1e-8)")


def test_06_block_isolation(report):
    state = embed_blocks([solve_phase_locked(2, 1.0)], [55], 100)
    traj = simulate(state, np.linspace(0, 10, 101), LATTICE_TOL)
    off = np.ones(100, dtype=bool)
    off[54:56] = False
    leak = np.max(np.abs(traj.states[:, off]))
    report(6, "block isolation, sites 55-56 in N=100", leak <= 1e-10, f"max off-support |b| {leak:.2e} (bound 1e-10)")


def test_07_reduced_fidelity(report):
    long = integrate_reduced(PER2_IC, np.linspace(0, 50, 501))
    H = np.array([reduced_hamiltonian(ReducedState.from_array(y)) for y in long.states])
    h_drift = np.max(np.abs(H - H[0]))
    # informational: the same run at the lattice tolerance
    loose = integrate_reduced(PER2_IC, np.linspace(0, 50, 501), LATTICE_TOL)
    h_loose = max(abs(reduced_hamiltonian(ReducedState.from_array(y)) - H[0]) for y in loose.states)

    times = np.linspace(0, 10, 201)
    red = integrate_reduced(PER2_IC, times)
    full = simulate(lift_to_lattice(PER2_IC, 10), times, LATTICE_TOL)
    sym = bond = match = 0.0
    for k in range(times.size):
        s = full.state(k)
        sym = max(sym, symmetry_error(s))
        bond = max(bond, bond_sum_error(s, PER2_IC.rho_bar))
        for site in (2, 4, 6, 8, 10):
            dphi, drho = extract_reduced(s, site)
            match = max(match, abs(wrap_mod_pi(dphi - red.states[k, 0])), abs(drho - red.states[k, 1]))
    ok = h_drift <= 1e-10 and sym <= 1e-8 and bond <= 1e-8 and match <= 1e-7
    report(7, "reduced-system fidelity", ok,
           f"H drift {h_drift:.2e} (rel_tol 1e-13; {h_loose:.2e} at 1e-12), symmetry {sym:.2e}, "
           f"bond sum {bond:.2e}, reduced/lattice mismatch {match:.2e}")


def test_08_rarefaction(report):
    state = make_ic(InitialConditionSpec(ICKind.SHOCK, 100))
    rho0 = np.abs(state.b) ** 2
    drho1 = rhs_hydro(HydroState(rho0, np.angle(state.b), D))[1][0]
    traj = simulate(state, np.linspace(0, 5, 501), LATTICE_TOL)
    rho1 = np.abs(traj.states[:, 0]) ** 2
    h1 = [lattice_norm(traj.state(i), polynomial(1)) for i in (0, len(traj) - 1)]
    window = traj.times <= 1.0
    decreasing = bool(np.all(np.diff(rho1[window]) < 0))
    ok = h1[1] > h1[0] and decreasing and drho1 == pytest.approx(-4, abs=1e-12)
    report(8, "rarefaction mass transport", ok,
           f"h1 {h1[0]:.4f} -> {h1[1]:.4f}; rho_1 strictly decreasing on [0, 1]: {decreasing}; "
           f"d rho_1/dt(0) = {drho1:.12g}")


def test_09_compacton(report):
    p = CompactonParams(1.0)
    analytic = compacton_ode_residual(p, 0.01, "analytic").interior_max
    x = np.linspace(-p.half_width, p.half_width, 4001)
    fi = np.max(np.abs(first_integral(x, p)))
    peak = compacton_profile(0.0, p)
    fd = [compacton_ode_residual(p, 0.1 / 2**k, "fd").interior_max for k in range(5)]
    orders = np.log2(np.array(fd[:-1]) / np.array(fd[1:]))
    ok = analytic <= 1e-12 and fi <= 1e-12 and abs(peak - AMPLITUDE) <= 1e-15 and np.all(np.abs(orders - 2) <= 0.1)
    report(9, "compacton exactness", ok,
           f"analytic residual {analytic:.2e}, first integral {fi:.2e}, max Q {peak:.15f}, "
           f"fd orders {np.round(orders, 3).tolist()}")


def test_10_cross_formulation(report):
    rng = np.random.default_rng(10)
    worst = 0.0
    for bc in BoundaryCondition:
        for _ in range(100):
            h = HydroState(rng.uniform(0.05, 3.0, 20), rng.uniform(-np.pi, np.pi, 20), bc)
            b = from_hydro(h).b
            db = rhs_cartesian(State(b, bc))
            dphi, drho = rhs_hydro(h)
            worst = max(worst,
                        np.max(np.abs(2 * np.real(np.conj(b) * db) - drho)),
                        np.max(np.abs(np.imag(np.conj(b) * db) / h.rho - dphi)))
    report(10, "Cartesian vs hydrodynamic RHS, 2 x 100 states", worst <= 1e-10, f"max deviation {worst:.2e} (bound 1e-10)")


def test_11_integrator_order(report):
    T = 64.0
    errs = []
    for h in (0.8, 0.4, 0.2):
        traj = simulate(State([1 + 0j], D), [0.0, T], IntegratorConfig(fixed_step=h))
        errs.append(abs(traj.states[-1, 0] - np.exp(-1j * T)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(256 / 3 <= r <= 256 * 3 for r in ratios)
    report(11, "eighth-order fixed-step convergence", ok,
           f"errors {[f'{e:.2e}' for e in errs]} at h=0.8,0.4,0.2; ratios {[round(float(r), 1) for r in ratios]} (target 256, x3)")
