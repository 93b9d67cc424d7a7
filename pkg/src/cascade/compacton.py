"""Compactly supported stationary profiles of the continuum limit.

With ``B = exp(it) Q(x)`` the continuum equation reduces to

    Q = 3 Q^3 + 2 h^2 Q (Q^2)''

and ``U = Q^2`` solves ``2 h^2 U'' + 3 U - 1 = 0``.  The C = 0 level set of
the first integral ``h^2 U'^2 + 3/2 U^2 - U = C`` gives a truncated cosine of
amplitude sqrt(2/3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import BoundaryCondition, State

AMPLITUDE = np.sqrt(2.0 / 3.0)
MIN_INTERIOR_POINTS = 32


class Form(enum.Enum):
    COSINE = "cosine"
    SINE = "sine"


@dataclass(frozen=True)
class CompactonParams:
    h: float = 1.0
    form: Form = Form.COSINE
    C: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.C != 0.0:
            raise ValueError("only the C = 0 profile has a closed form")

    @property
    def wavenumber(self) -> float:
        return 0.5 * np.sqrt(1.5) / self.h

    @property
    def half_width(self) -> float:
        return self.h * np.pi * np.sqrt(2.0 / 3.0)

    def support(self) -> tuple[float, float]:
        L = self.half_width
        if self.form is Form.COSINE:
            return -L, L
        # the sine form is the cosine hump shifted right by one half-width
        return 0.0, 2.0 * L

    def centered(self, x):
        """Coordinate relative to the hump centre."""
        lo, hi = self.support()
        return np.asarray(x, dtype=np.float64) - 0.5 * (lo + hi)


def compacton_profile(x, p: CompactonParams = CompactonParams()):
    xc = p.centered(x)
    inside = np.abs(xc) < p.half_width
    q = np.where(inside, AMPLITUDE * np.cos(p.wavenumber * xc), 0.0)
    return q if q.ndim else float(q)


def profile_squared_derivatives(x, p: CompactonParams = CompactonParams()):
    """Closed-form ``U``, ``U'`` and ``U''`` for ``U = Q^2`` on the open support."""
    xc = p.centered(x)
    k = p.wavenumber
    inside = np.abs(xc) < p.half_width
    # U = (2/3) cos^2(k x) = (1 + cos 2kx) / 3
    U = np.where(inside, (1.0 + np.cos(2 * k * xc)) / 3.0, 0.0)
    dU = np.where(inside, -2.0 * k * np.sin(2 * k * xc) / 3.0, 0.0)
    d2U = np.where(inside, -4.0 * k * k * np.cos(2 * k * xc) / 3.0, 0.0)
    return U, dU, d2U


def ode_residual(q, d2u, h):
    """Pointwise ``Q - 3 Q^3 - 2 h^2 Q (Q^2)''``."""
    return q - 3.0 * q**3 - 2.0 * h * h * q * d2u


@dataclass(frozen=True)
class ResidualReport:
    dx: float
    interior_max: float
    edge_max: float
    x: np.ndarray
    residual: np.ndarray


def residual_grid(p: CompactonParams, grid_dx: float, aligned: bool = True) -> tuple[np.ndarray, float]:
    """Grid covering the support plus one cell either side.

    With ``aligned`` the spacing is shrunk to the largest value not above
    ``grid_dx`` that puts both support edges on grid points; otherwise the
    nodes sit at integer multiples of ``grid_dx`` from the hump centre.
    """
    L = p.half_width
    if not grid_dx > 0:
        raise ValueError("grid spacing must be positive")
    if aligned:
        m = int(np.ceil(2 * L / grid_dx - 1e-12))
        dx = 2 * L / m
        xc = -L + dx * np.arange(-1, m + 2)
    else:
        dx = grid_dx
        k = int(np.floor(L / dx)) + 1
        xc = dx * np.arange(-k, k + 1)
    lo, hi = p.support()
    return xc + 0.5 * (lo + hi), dx


def compacton_ode_residual(
    p: CompactonParams = CompactonParams(),
    grid_dx: float = 0.05,
    mode: str = "fd",
    profile: Callable | None = None,
    aligned: bool = True,
) -> ResidualReport:
    """Residual of the compacton ODE on the support.

    ``mode="analytic"`` uses closed-form second derivatives of ``Q^2``;
    ``mode="fd"`` uses centred second differences of the sampled ``Q^2``.
    ``interior_max`` covers points whose stencil stays inside the closed
    support, ``edge_max`` the outermost support points on either side.
    ``profile`` replaces the closed form (finite differences only).
    """
    x, dx = residual_grid(p, grid_dx, aligned)
    if mode not in ("fd", "analytic"):
        raise ValueError(f"unknown mode {mode!r}")
    if profile is not None and mode == "analytic":
        raise ValueError("analytic mode needs the closed-form profile")
    q_fn = profile or (lambda s: compacton_profile(s, p))
    q = np.asarray(q_fn(x), dtype=np.float64) * np.ones_like(x)
    xc = p.centered(x)
    L = p.half_width
    on_support = np.abs(xc) < L
    if np.count_nonzero(on_support) < MIN_INTERIOR_POINTS:
        raise ValueError(f"grid resolves fewer than {MIN_INTERIOR_POINTS} support points")

    if mode == "analytic":
        _, _, d2u = profile_squared_derivatives(x, p)
        res = np.where(on_support, ode_residual(q, d2u, p.h), 0.0)
    else:
        u = q * q
        d2u = np.zeros_like(u)
        d2u[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / (dx * dx)
        res = np.where(on_support, ode_residual(q, d2u, p.h), 0.0)
        res[0] = res[-1] = 0.0

    tol = 1e-9 * dx
    interior = np.abs(xc) + dx <= L + tol
    idx = np.flatnonzero(on_support)
    edges = [idx[0], idx[-1]]
    edge = np.zeros_like(on_support)
    edge[edges] = True
    interior &= ~edge
    interior_max = float(np.max(np.abs(res[interior]))) if interior.any() else 0.0
    return ResidualReport(dx, interior_max, float(np.max(np.abs(res[edge]))), x, res)


def u_equation_residual(x, p: CompactonParams = CompactonParams()):
    """``2 h^2 U'' + 3 U - 1`` on the open support (zero elsewhere)."""
    U, _, d2U = profile_squared_derivatives(x, p)
    inside = np.abs(p.centered(x)) < p.half_width
    return np.where(inside, 2 * p.h**2 * d2U + 3 * U - 1, 0.0)


def first_integral(x, p: CompactonParams = CompactonParams()):
    """``h^2 U'^2 + 3/2 U^2 - U``; identically zero for the C = 0 profile."""
    U, dU, _ = profile_squared_derivatives(x, p)
    return p.h**2 * dU**2 + 1.5 * U**2 - U


def support_sites(p: CompactonParams, center: int) -> tuple[int, int]:
    """First and last lattice sites with ``h (j - center)`` inside the open support."""
    lo, hi = p.support()
    # x_j / h = j - center, so the site range does not depend on h
    return center + int(np.floor(lo / p.h)) + 1, center + int(np.ceil(hi / p.h)) - 1


def lattice_ic_from_profile(p: CompactonParams, N: int, center: int) -> State:
    """Sample ``Q`` at ``x_j = h (j - center)`` onto a Dirichlet lattice, zero phase."""
    if N < 1:
        raise ValueError("N must be positive")
    first, last = support_sites(p, center)
    if first < 1 or last > N:
        raise ValueError(f"support sites {first}..{last} do not fit in 1..{N}")
    j = np.arange(1, N + 1)
    q = compacton_profile(p.h * (j - center), p)
    return State(q.astype(np.complex128), BoundaryCondition.DIRICHLET)
