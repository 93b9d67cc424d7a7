"""Phase-locked stationary profiles.

With all phases equal, the densities freeze and solve the tridiagonal system
``A_N rho = omega * 1`` where ``A_N`` has -1 on the diagonal and 2 on both
off-diagonals (zero densities outside the lattice).  The lifted state then
rotates rigidly, ``b_j(t) = b_j(0) exp(i omega t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import solve_banded

from .model import BoundaryCondition, State

DIAG = -1
OFF = 2
POSITIVITY_RTOL = 1e-9
PIVOT_RTOL = 1e-8


class PlacementError(ValueError):
    pass


class IncompatibleBlocksError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseLockedProfile:
    rho: np.ndarray
    omega: float
    strictly_positive: bool
    positivity_rtol: float = POSITIVITY_RTOL
    # True when the float classification was borderline and decided exactly
    exact_check: bool = False

    @property
    def N(self) -> int:
        return self.rho.size

    def residual(self) -> float:
        return float(np.max(np.abs(apply_A(self.rho) - self.omega)))

    def lift(self, phase: float = 0.0, N_total: int | None = None, offset: int = 1) -> State:
        """Uniform-phase Dirichlet state carrying this profile."""
        if np.any(self.rho < 0):
            raise ValueError("profile has negative densities; the amplitude map cannot be inverted")
        return embed_blocks([self], [offset], N_total or self.N, phase)


def det_A(N: int) -> int:
    if N < 1:
        raise ValueError("N must be positive")
    prev, cur = 1, -1  # det A_0 = 1 continues the recursion to det A_2 = -3
    for _ in range(N - 1):
        prev, cur = cur, -cur - 4 * prev
    return cur


def apply_A(rho: np.ndarray) -> np.ndarray:
    out = DIAG * rho
    out[1:] += OFF * rho[:-1]
    out[:-1] += OFF * rho[1:]
    return out


def _thomas(n: int, rhs: np.ndarray) -> np.ndarray | None:
    """Elimination without pivoting; None when a pivot is too small."""
    c = np.empty(n)
    d = np.empty(n)
    pivot = float(DIAG)
    if abs(pivot) < PIVOT_RTOL * abs(OFF):
        return None
    c[0] = OFF / pivot
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = DIAG - OFF * c[i - 1]
        if abs(pivot) < PIVOT_RTOL * abs(OFF):
            return None
        c[i] = OFF / pivot
        d[i] = (rhs[i] - OFF * d[i - 1]) / pivot
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _pivoting_solve(n: int, rhs: np.ndarray) -> np.ndarray:
    ab = np.zeros((3, n))
    ab[0, 1:] = OFF
    ab[1, :] = DIAG
    ab[2, :-1] = OFF
    return solve_banded((1, 1), ab, rhs)


def _exact_solve(n: int, omega: Fraction) -> list[Fraction]:
    """Gaussian elimination with row swaps over the rationals."""
    rows = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for i in range(n):
        rows[i][i] = Fraction(DIAG)
        if i > 0:
            rows[i][i - 1] = Fraction(OFF)
        if i < n - 1:
            rows[i][i + 1] = Fraction(OFF)
        rows[i][n] = omega
    for col in range(n):
        p = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[p] = rows[p], rows[col]
        for r in range(col + 1, min(col + 3, n)):
            if rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = rows[i][n] - sum(rows[i][k] * x[k] for k in range(i + 1, min(i + 3, n)))
        x[i] = acc / rows[i][i]
    return x


def solve_phase_locked(N: int, omega: float = 1.0) -> PhaseLockedProfile:
    if N < 1:
        raise ValueError("N must be positive")
    if omega == 0:
        raise ValueError("omega = 0 admits only the trivial phase-locked solution")
    rhs = np.full(N, float(omega))
    rho = _thomas(N, rhs)
    if rho is None:
        rho = _pivoting_solve(N, rhs)
    scale = np.max(np.abs(rho))
    low = np.min(rho)
    positive = bool(low > POSITIVITY_RTOL * scale)
    exact = False
    if not positive and abs(low) <= POSITIVITY_RTOL * scale:
        exact = True
        positive = all(v > 0 for v in _exact_solve(N, Fraction(omega)))
    return PhaseLockedProfile(rho, float(omega), positive, exact_check=exact)


def scan_positive(N_max: int, omega: float = 1.0) -> list[int]:
    if N_max < 1:
        raise ValueError("N_max must be positive")
    if not omega > 0:
        raise ValueError("omega must be positive")
    return [N for N in range(1, N_max + 1) if solve_phase_locked(N, omega).strictly_positive]


def embed_blocks(
    blocks: list[PhaseLockedProfile],
    offsets: list[int],
    N_total: int,
    phase: float = 0.0,
) -> State:
    """Place profiles on a Dirichlet lattice; ``offsets`` are 1-based start sites.

    Blocks must be separated by at least one empty site so that each one
    evolves as an isolated Dirichlet system.
    """
    if len(blocks) != len(offsets):
        raise PlacementError("need one offset per block")
    if N_total < 1:
        raise PlacementError("N_total must be positive")
    if len({b.omega for b in blocks}) > 1:
        raise IncompatibleBlocksError("all blocks must share the same omega")
    b = np.zeros(N_total, dtype=np.complex128)
    spans = sorted((off, off + blk.N - 1, blk) for off, blk in zip(offsets, blocks))
    last_end = -1
    for start, end, blk in spans:
        if start < 1 or end > N_total:
            raise PlacementError(f"block at sites {start}..{end} does not fit in 1..{N_total}")
        if start <= last_end + 1:
            raise PlacementError(f"block at site {start} overlaps or touches its neighbour")
        if np.any(blk.rho < 0):
            raise PlacementError("cannot lift a profile with negative densities")
        b[start - 1 : end] = np.sqrt(blk.rho) * np.exp(1j * phase)
        last_end = end
    return State(b, BoundaryCondition.DIRICHLET)
