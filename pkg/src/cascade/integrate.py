"""Adaptive eighth-order embedded Runge-Kutta integration (DOP853 tableau).

Sample times are hit by clamping the step, never by interpolation, so every
returned state is an actual integrator state.  The stepping loop is written
once; it is compiled with numba when the right-hand side is itself a numba
kernel and executed as plain numpy code otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from numba.core.registry import CPUDispatcher

from . import _dop853 as tab
from .model import BoundaryCondition, State, hamiltonian, mass, toy_model_kernel

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ORDER_EXPONENT = -1.0 / 8.0

# status codes returned by the driver
_OK, _STEP_LIMIT, _BLOWUP, _UNDERFLOW = 0, 1, 2, 3


class IntegrationError(RuntimeError):
    def __init__(self, message, trajectory=None, t_last=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.t_last = t_last


class StepLimitError(IntegrationError):
    pass


class BlowUpError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    initial_step: float | None = None
    max_steps: int = 50_000_000
    method: str = "dop853"
    # constant step with error control switched off; used for order studies
    fixed_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.method != "dop853":
            raise ValueError(f"unknown method {self.method!r}")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise ValueError("fixed_step must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    accepted_steps: int = 0
    rejected_steps: int = 0
    bc: BoundaryCondition | None = None
    drift: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> State:
        if self.bc is None:
            raise ValueError("trajectory does not hold lattice states")
        return State(self.states[i], self.bc)


def _initial_step(f, y, f0, rtol, atol, span):
    sc = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y / sc))
    d1 = np.max(np.abs(f0 / sc))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(y + h0 * f0)
    d2 = np.max(np.abs((f1 - f0) / sc)) / h0
    big = max(d1, d2)
    if big <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / big) ** (1.0 / 8.0)
    return min(100.0 * h0, h1, span)


_initial_step_jit = njit(cache=True)(_initial_step)


def _drive(f, y0, t0, times, rtol, atol, h, max_steps, fixed, A, B, C, E3, E5, out):
    n = y0.size
    n_samples = times.size
    K = np.zeros((13, n))
    y = y0.copy()
    t = t0
    k = 0
    while k < n_samples and times[k] == t0:
        out[k] = y
        k += 1
    f0 = f(y)
    if not np.all(np.isfinite(f0)):
        return _BLOWUP, k, t, 0, 0
    accepted = 0
    rejected = 0
    just_rejected = False
    while k < n_samples:
        if accepted + rejected >= max_steps:
            return _STEP_LIMIT, k, t, accepted, rejected
        target = times[k]
        hit = t + h * (1.0 + 1e-8) >= target
        h_step = target - t if hit else h
        K[0] = f0
        for s in range(1, 12):
            K[s] = f(y + h_step * (A[s, :s] @ K[:s]))
        y_new = y + h_step * (B @ K[:12])
        f_new = f(y_new)
        K[12] = f_new
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
            return _BLOWUP, k, t, accepted, rejected
        if fixed:
            err = 0.0
        else:
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            e5 = (E5 @ K) / sc
            e3 = (E3 @ K) / sc
            num = e5 * e5
            den = np.sqrt(num + 0.01 * e3 * e3)
            err = abs(h_step) * np.max(num / np.maximum(den, 1e-300))
        if err <= 1.0:
            accepted += 1
            t = target if hit else t + h_step
            y = y_new
            f0 = f_new
            if hit:
                out[k] = y
                k += 1
            if not fixed:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err**ORDER_EXPONENT))
                if just_rejected:
                    factor = min(factor, 1.0)
                h_new = h_step * factor
                # a step shortened to land on a sample says nothing against h
                h = max(h_new, h) if hit else h_new
            just_rejected = False
        else:
            rejected += 1
            just_rejected = True
            h = h_step * max(MIN_FACTOR, SAFETY * err**ORDER_EXPONENT)
            if h < 1e-14 * max(1.0, abs(t)):
                return _UNDERFLOW, k, t, accepted, rejected
    return _OK, k, t, accepted, rejected


_drive_jit = njit(cache=True)(_drive)


def _as_real(y0):
    y0 = np.asarray(y0)
    is_complex = np.iscomplexobj(y0)
    if is_complex:
        yr = np.ascontiguousarray(y0, dtype=np.complex128).reshape(-1).view(np.float64).copy()
    else:
        yr = np.ascontiguousarray(y0, dtype=np.float64).reshape(-1).copy()
    return yr, is_complex


def integrate(
    rhs,
    y0,
    t0: float,
    t1: float,
    sample_times=None,
    cfg: IntegratorConfig | None = None,
) -> Trajectory:
    """Integrate the autonomous system ``dy/dt = rhs(y)`` and sample it.

    ``rhs`` is either a Python callable acting on arrays shaped like ``y0``
    (complex states are handled through their real view) or a numba kernel
    acting directly on the float64 view of ``y0``; complex values appear
    there as interleaved (real, imag) pairs.

    Integration stops at the last sample time.  ``sample_times`` defaults to
    ``[t0, t1]``.
    """
    cfg = cfg or IntegratorConfig()
    if sample_times is None:
        sample_times = [t0, t1]
    times = np.asarray(sample_times, dtype=np.float64).reshape(-1)
    if times.size == 0:
        raise ValueError("need at least one sample time")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample times must be strictly increasing")
    if times[0] < t0 or times[-1] > t1:
        raise ValueError("sample times must lie in [t0, t1]")

    yr, is_complex = _as_real(y0)
    if not np.all(np.isfinite(yr)):
        raise ValueError("initial state must be finite")
    shape = np.shape(y0)

    compiled = isinstance(rhs, CPUDispatcher)
    if compiled:
        f = rhs
        drive, first_step = _drive_jit, _initial_step_jit
    else:
        if is_complex:
            def f(y):
                dy = np.asarray(rhs(y.view(np.complex128).reshape(shape)), dtype=np.complex128)
                return np.ascontiguousarray(dy).reshape(-1).view(np.float64)
        else:
            def f(y):
                return np.asarray(rhs(y.reshape(shape)), dtype=np.float64).reshape(-1)
        drive, first_step = _drive, _initial_step

    span = float(times[-1] - t0)
    if cfg.fixed_step is not None:
        h = float(cfg.fixed_step)
    elif cfg.initial_step is not None:
        h = float(cfg.initial_step)
    elif span > 0:
        f0 = f(yr)
        if not np.all(np.isfinite(f0)):
            raise BlowUpError(f"non-finite derivative at t={t0}", t_last=t0)
        h = first_step(f, yr, f0, cfg.rel_tol, cfg.abs_tol, span)
    else:
        h = 1.0

    out = np.zeros((times.size, yr.size))
    # overflow inside a trial step only leads to its rejection
    with np.errstate(over="ignore", invalid="ignore"):
        status, filled, t_last, acc, rej = drive(
            f, yr, float(t0), times, cfg.rel_tol, cfg.abs_tol, h, cfg.max_steps,
            cfg.fixed_step is not None, tab.A, tab.B, tab.C, tab.E3, tab.E5, out,
        )

    states = out[:filled]
    if is_complex:
        states = states.view(np.complex128)
    states = states.reshape((filled,) + shape)
    traj = Trajectory(times[:filled].copy(), states, int(acc), int(rej))
    if status == _STEP_LIMIT:
        raise StepLimitError(f"step limit {cfg.max_steps} reached at t={t_last}", traj, t_last)
    if status == _BLOWUP:
        raise BlowUpError(f"non-finite values after t={t_last}", traj, t_last)
    if status == _UNDERFLOW:
        raise BlowUpError(f"step size underflow at t={t_last}", traj, t_last)
    return traj


def simulate(state: State, sample_times, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Evolve a lattice state under the toy model and record invariant drift."""
    times = np.asarray(sample_times, dtype=np.float64)
    t1 = float(times[-1])
    t0 = float(min(0.0, times[0]))
    if t1 <= t0:
        t1 = t0 + 1.0
    try:
        traj = integrate(toy_model_kernel(state.bc), state.b, t0, t1, times, cfg)
    except IntegrationError as exc:
        if exc.trajectory is not None:
            exc.trajectory.bc = state.bc
        raise
    traj.bc = state.bc
    traj.drift = drift_record(traj)
    return traj


def drift_record(traj: Trajectory) -> dict[str, np.ndarray]:
    """Per-sample absolute and relative deviation of mass and Hamiltonian."""
    if traj.bc is None:
        raise ValueError("trajectory does not hold lattice states")
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    m = np.array([mass(State(b, traj.bc)) for b in traj.states])
    H = np.array([hamiltonian(State(b, traj.bc)) for b in traj.states])
    rec = {"mass_abs": np.abs(m - m[0]), "ham_abs": np.abs(H - H[0])}
    rec["mass_rel"] = rec["mass_abs"] / abs(m[0]) if abs(m[0]) >= 1e-30 else np.full(m.size, np.nan)
    rec["ham_rel"] = rec["ham_abs"] / abs(H[0]) if abs(H[0]) >= 1e-30 else np.full(H.size, np.nan)
    return rec


@dataclass(frozen=True)
class Drift:
    max_abs_mass: float
    max_rel_mass: float
    max_abs_ham: float
    max_rel_ham: float
    # relative forms are NaN and flagged when the t=0 value is below 1e-30
    rel_mass_skipped: bool = False
    rel_ham_skipped: bool = False

    def worst(self) -> float:
        vals = [self.max_abs_mass, self.max_abs_ham]
        if not self.rel_mass_skipped:
            vals.append(self.max_rel_mass)
        if not self.rel_ham_skipped:
            vals.append(self.max_rel_ham)
        return max(vals)


def invariant_drift(traj: Trajectory) -> Drift:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    rec = traj.drift or drift_record(traj)
    mass_skip = bool(np.isnan(rec["mass_rel"][0]))
    ham_skip = bool(np.isnan(rec["ham_rel"][0]))
    return Drift(
        float(np.max(rec["mass_abs"])),
        float("nan") if mass_skip else float(np.max(rec["mass_rel"])),
        float(np.max(rec["ham_abs"])),
        float("nan") if ham_skip else float(np.max(rec["ham_rel"])),
        mass_skip,
        ham_skip,
    )
