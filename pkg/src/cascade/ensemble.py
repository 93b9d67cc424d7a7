"""Initial-condition families and seeded many-realization ensembles."""

from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .integrate import IntegrationError, IntegratorConfig, invariant_drift, simulate
from .model import BoundaryCondition, NormKind, State, lattice_norm, polynomial

log = logging.getLogger(__name__)

Z95 = 1.96
MAX_FAILURE_FRACTION = 0.10


class ICKind(enum.Enum):
    LOCALIZED_RANDOM_PHASE = "localized_random_phase"
    WEIGHTED_RANDOM_PHASE = "weighted_random_phase"
    SHOCK = "shock"
    WEIGHTED_SHOCK = "weighted_shock"
    GENERALIZED_WEIGHTED_SHOCK = "generalized_weighted_shock"

    @property
    def random(self) -> bool:
        return self in (ICKind.LOCALIZED_RANDOM_PHASE, ICKind.WEIGHTED_RANDOM_PHASE)


class ICSpecError(ValueError):
    pass


class EnsembleError(RuntimeError):
    pass


@dataclass(frozen=True)
class InitialConditionSpec:
    kind: ICKind
    N: int
    eps: float | None = None
    j_star: int | None = None
    sigma: float | None = None
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ICKind(self.kind))
        except ValueError:
            raise ICSpecError(f"unknown initial condition kind {self.kind!r}") from None
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        if self.N < 1:
            raise ICSpecError("N must be positive")
        if self.kind.random:
            if self.eps is None or not 0 < self.eps < 1:
                raise ICSpecError("random-phase kinds need eps in (0, 1)")
            if self.j_star is None or not 1 < self.j_star < self.N:
                raise ICSpecError("random-phase kinds need 1 < j_star < N")
        elif self.eps is not None or self.j_star is not None:
            raise ICSpecError(f"{self.kind.value} takes no eps or j_star")
        if self.kind is ICKind.GENERALIZED_WEIGHTED_SHOCK:
            if self.sigma is None or not 0 < self.sigma < 1:
                raise ICSpecError("generalized weighted shock needs sigma in (0, 1)")
        elif self.sigma is not None:
            raise ICSpecError(f"{self.kind.value} takes no sigma")


def make_ic(spec: InitialConditionSpec, phases=None) -> State:
    """Build the initial state; ``phases`` is required for the random kinds only."""
    N = spec.N
    j = np.arange(1, N + 1, dtype=np.float64)
    if spec.kind.random:
        if phases is None:
            raise ICSpecError(f"{spec.kind.value} needs a phase vector")
        theta = np.asarray(phases, dtype=np.float64)
        if theta.shape != (N,):
            raise ICSpecError(f"expected {N} phases, got shape {theta.shape}")
        top = np.sqrt(1.0 - spec.eps**2)
        if spec.kind is ICKind.LOCALIZED_RANDOM_PHASE:
            amp = np.full(N, spec.eps / (N - 1))
            amp[spec.j_star - 1] = top
        else:
            amp = spec.eps / j
            amp[spec.j_star - 1] = top / spec.j_star
        return State(amp * np.exp(1j * theta), spec.bc)

    shock = np.exp(1j * (j - 1) * np.pi / 4)
    if spec.kind is ICKind.SHOCK:
        return State(shock, spec.bc)
    if spec.kind is ICKind.WEIGHTED_SHOCK:
        return State(shock / j, spec.bc)
    return State(shock / j**spec.sigma, spec.bc)


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for realization ``index``, regardless of scheduling."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(seq))


def draw_phases(master_seed: int, index: int, N: int) -> np.ndarray:
    return realization_rng(master_seed, index).uniform(0.0, 2.0 * np.pi, N)


@dataclass(frozen=True)
class Interval:
    mean: float
    lower: float
    upper: float
    n: int

    @property
    def degenerate(self) -> bool:
        return self.n < 2

    def __iter__(self):
        return iter((self.mean, self.lower, self.upper))


def ci95(samples) -> Interval:
    """Normal-approximation 95% interval of the mean."""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("need at least one sample")
    m = float(np.mean(x))
    if x.size == 1:
        return Interval(m, m, m, 1)
    half = Z95 * float(np.std(x, ddof=1)) / np.sqrt(x.size)
    return Interval(m, m - half, m + half, x.size)


@dataclass(frozen=True)
class EnsembleConfig:
    ic: InitialConditionSpec
    realizations: int
    t_final: float
    sample_times: tuple[float, ...] | None = None
    norms: tuple[NormKind, ...] = (polynomial(1), polynomial(2), polynomial(3), polynomial(4))
    master_seed: int = 0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    # realizations whose invariants drift further than this count as failed
    drift_limit: float | None = 1e-9

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if not self.norms:
            raise ValueError("need at least one norm")
        times = self.times()
        if times[0] != 0.0 or times[-1] > self.t_final or np.any(np.diff(times) <= 0):
            raise ValueError("sample times must start at 0, increase, and end by t_final")

    def times(self) -> np.ndarray:
        if self.sample_times is None:
            return np.linspace(0.0, self.t_final, 101)
        return np.asarray(self.sample_times, dtype=np.float64)


@dataclass
class RealizationResult:
    index: int
    norms: np.ndarray | None  # (times, norms), normalized by the t=0 values
    max_drift: float = float("nan")
    error: str | None = None


@dataclass
class EnsembleStats:
    times: np.ndarray
    labels: list[str]
    mean: np.ndarray
    std: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    count: int
    failures: list[tuple[int, str]]
    max_drift: float
    normalized: bool = True

    @property
    def degenerate(self) -> bool:
        return self.count < 2

    def column(self, label: str) -> int:
        return self.labels.index(label)


def run_realization(cfg: EnsembleConfig, index: int) -> RealizationResult:
    phases = draw_phases(cfg.master_seed, index, cfg.ic.N) if cfg.ic.kind.random else None
    state = make_ic(cfg.ic, phases)
    try:
        traj = simulate(state, cfg.times(), cfg.integrator)
    except IntegrationError as exc:
        return RealizationResult(index, None, error=str(exc))
    drift = invariant_drift(traj).worst()
    if cfg.drift_limit is not None and not drift <= cfg.drift_limit:
        return RealizationResult(index, None, drift, f"invariant drift {drift:.3e} above {cfg.drift_limit:g}")
    values = np.array([[lattice_norm(State(b, traj.bc), nk) for nk in cfg.norms] for b in traj.states])
    return RealizationResult(index, values / values[0], drift)


def _run_chunk(args):
    cfg, indices = args
    return [run_realization(cfg, k) for k in indices]


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("CASCADE_THREADS")
    n = requested or (int(env) if env else os.cpu_count() or 1)
    return max(1, n)


def run_ensemble(cfg: EnsembleConfig, workers: int | None = None) -> EnsembleStats:
    M = cfg.realizations
    n_workers = min(worker_count(workers), M)
    if n_workers == 1:
        results = _run_chunk((cfg, range(M)))
    else:
        chunks = [list(range(w, M, n_workers)) for w in range(n_workers)]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = [r for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for r in part]
    results.sort(key=lambda r: r.index)
    return aggregate(cfg, results)


def aggregate(cfg: EnsembleConfig, results: list[RealizationResult]) -> EnsembleStats:
    ok = [r for r in results if r.error is None]
    failures = [(r.index, r.error) for r in results if r.error is not None]
    for idx, msg in failures:
        log.warning("realization %d failed: %s", idx, msg)
    if len(failures) > MAX_FAILURE_FRACTION * len(results):
        raise EnsembleError(f"{len(failures)} of {len(results)} realizations failed: {failures[:3]}")
    data = np.stack([r.norms for r in ok])  # (realizations, times, norms)
    n = data.shape[0]
    # shifting by the first realization keeps identical samples exactly identical
    dev = data - data[0]
    mean = data[0] + dev.mean(axis=0)
    std = dev.std(axis=0, ddof=1) if n > 1 else np.zeros_like(mean)
    half = Z95 * std / np.sqrt(n)
    return EnsembleStats(
        times=cfg.times(),
        labels=[nk.label for nk in cfg.norms],
        mean=mean,
        std=std,
        ci_lower=mean - half,
        ci_upper=mean + half,
        count=n,
        failures=failures,
        max_drift=max(r.max_drift for r in ok),
    )
