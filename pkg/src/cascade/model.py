"""Lattice state types, right-hand sides, invariants and the Madelung map.

The toy model on ``N`` sites reads

    db_j/dt = i * (-|b_j|^2 b_j + 2 b_{j-1}^2 conj(b_j) + 2 b_{j+1}^2 conj(b_j))

with ghost values ``b_0``, ``b_{N+1}`` fixed by the boundary condition.
Indices in docstrings are 1-based to match the lattice labels; arrays are
0-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit


class InvalidStateError(ValueError):
    """Raised for non-finite amplitudes or negative densities."""


class BoundaryCondition(enum.Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value: BoundaryCondition | str) -> BoundaryCondition:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown boundary condition {value!r}") from None


@dataclass(frozen=True)
class State:
    """Complex amplitudes ``b_1..b_N`` together with their boundary condition."""

    b: np.ndarray
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET

    def __post_init__(self):
        b = np.array(self.b, dtype=np.complex128).reshape(-1)
        if b.size < 1:
            raise InvalidStateError("state needs at least one site")
        if not np.all(np.isfinite(b)):
            raise InvalidStateError("state has non-finite entries")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))

    @property
    def N(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class HydroState:
    """Densities ``rho_j = |b_j|^2`` and phases ``phi_j`` (radians)."""

    rho: np.ndarray
    phi: np.ndarray
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.float64).reshape(-1)
        phi = np.array(self.phi, dtype=np.float64).reshape(-1)
        if rho.shape != phi.shape:
            raise InvalidStateError("rho and phi must have equal length")
        if rho.size < 1:
            raise InvalidStateError("state needs at least one site")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(phi))):
            raise InvalidStateError("hydro state has non-finite entries")
        if np.any(rho < 0):
            raise InvalidStateError("densities must be nonnegative")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))

    @property
    def N(self) -> int:
        return self.rho.size


class NormFamily(enum.Enum):
    POLYNOMIAL = "poly"
    DYADIC = "dyadic"


@dataclass(frozen=True)
class NormKind:
    family: NormFamily
    s: float

    def __post_init__(self):
        object.__setattr__(self, "family", NormFamily(self.family))
        if not np.isfinite(self.s):
            raise ValueError("norm exponent must be finite")

    @property
    def label(self) -> str:
        return f"norm_{self.family.value}_{self.s:g}"


def polynomial(s: float) -> NormKind:
    return NormKind(NormFamily.POLYNOMIAL, s)


def dyadic(s: float) -> NormKind:
    return NormKind(NormFamily.DYADIC, s)


def _neighbors(x: np.ndarray, bc: BoundaryCondition) -> tuple[np.ndarray, np.ndarray]:
    """Return (x_{j-1}, x_{j+1}) arrays with ghost values filled in."""
    left = np.empty_like(x)
    right = np.empty_like(x)
    left[1:] = x[:-1]
    right[:-1] = x[1:]
    if bc is BoundaryCondition.PERIODIC:
        left[0] = x[-1]
        right[-1] = x[0]
    else:
        left[0] = 0
        right[-1] = 0
    return left, right


def rhs_cartesian(state: State) -> np.ndarray:
    b = state.b
    left, right = _neighbors(b, state.bc)
    return 1j * (-np.abs(b) ** 2 * b + 2.0 * (left**2 + right**2) * np.conj(b))


def rhs_hydro(hstate: HydroState) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(dphi/dt, drho/dt)`` of the density/phase system."""
    rho, phi = hstate.rho, hstate.phi
    rho_l, rho_r = _neighbors(rho, hstate.bc)
    phi_l, phi_r = _neighbors(phi, hstate.bc)
    # ghost phases only ever multiply a zero ghost density
    dl = 2.0 * (phi_l - phi)
    dr = 2.0 * (phi_r - phi)
    dphi = -rho + 2.0 * rho_l * np.cos(dl) + 2.0 * rho_r * np.cos(dr)
    drho = -4.0 * rho * rho_l * np.sin(dl) - 4.0 * rho * rho_r * np.sin(dr)
    return dphi, drho


def mass(state: State) -> float:
    return float(np.sum(np.abs(state.b) ** 2))


def hamiltonian(state: State) -> float:
    b = state.b
    left, _ = _neighbors(b, state.bc)
    return float(np.sum(0.25 * np.abs(b) ** 4 - np.real(np.conj(b) ** 2 * left**2)))


def norm_weights(norm: NormKind, N: int) -> np.ndarray:
    j = np.arange(1, N + 1, dtype=np.float64)
    if norm.family is NormFamily.POLYNOMIAL:
        return j ** (2.0 * norm.s)
    return 2.0 ** ((norm.s - 1.0) * j)


def lattice_norm(state: State, norm: NormKind) -> float:
    return float(np.sqrt(np.sum(norm_weights(norm, state.N) * np.abs(state.b) ** 2)))


def to_hydro(state: State) -> HydroState:
    rho = np.abs(state.b) ** 2
    # np.angle(0) is 0, and np.angle gives (-pi, pi]; -0.0 imaginary parts
    # would map to -pi, so they are normalised first
    b = state.b + 0.0
    phi = np.angle(np.where(b == 0, 0.0, b))
    phi = np.where(phi == -np.pi, np.pi, phi)
    return HydroState(rho, phi, state.bc)


def from_hydro(hstate: HydroState) -> State:
    return State(np.sqrt(hstate.rho) * np.exp(1j * hstate.phi), hstate.bc)


def rhs_discrete_burgers(rho: np.ndarray, bc: BoundaryCondition | str) -> np.ndarray:
    """``drho_j/dt = -4 rho_j rho_{j-1} + 4 rho_j rho_{j+1}``."""
    rho = np.asarray(rho, dtype=np.float64)
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density vector has non-finite entries")
    left, right = _neighbors(rho, BoundaryCondition.parse(bc))
    return -4.0 * rho * left + 4.0 * rho * right


# Compiled kernels acting on the interleaved real view (re_1, im_1, re_2, ...)
# of the amplitude vector; these feed the integrator's compiled driver.


@njit(cache=True)
def _toy_rhs_interleaved(y, periodic):
    n = y.size // 2
    out = np.empty_like(y)
    for j in range(n):
        br = y[2 * j]
        bi = y[2 * j + 1]
        if j > 0:
            lr = y[2 * j - 2]
            li = y[2 * j - 1]
        elif periodic:
            lr = y[2 * n - 2]
            li = y[2 * n - 1]
        else:
            lr = 0.0
            li = 0.0
        if j < n - 1:
            rr = y[2 * j + 2]
            ri = y[2 * j + 3]
        elif periodic:
            rr = y[0]
            ri = y[1]
        else:
            rr = 0.0
            ri = 0.0
        sr = lr * lr - li * li + rr * rr - ri * ri
        si = 2.0 * (lr * li + rr * ri)
        m = br * br + bi * bi
        re = -m * br + 2.0 * (sr * br + si * bi)
        im = -m * bi + 2.0 * (si * br - sr * bi)
        out[2 * j] = -im
        out[2 * j + 1] = re
    return out


@njit(cache=True)
def _burgers_rhs(rho, periodic):
    n = rho.size
    out = np.empty_like(rho)
    for j in range(n):
        if j > 0:
            left = rho[j - 1]
        elif periodic:
            left = rho[n - 1]
        else:
            left = 0.0
        if j < n - 1:
            right = rho[j + 1]
        elif periodic:
            right = rho[0]
        else:
            right = 0.0
        out[j] = 4.0 * rho[j] * (right - left)
    return out


@njit(cache=True)
def _toy_rhs_dirichlet(y):
    return _toy_rhs_interleaved(y, False)


@njit(cache=True)
def _toy_rhs_periodic(y):
    return _toy_rhs_interleaved(y, True)


@njit(cache=True)
def _burgers_rhs_dirichlet(y):
    return _burgers_rhs(y, False)


@njit(cache=True)
def _burgers_rhs_periodic(y):
    return _burgers_rhs(y, True)


def toy_model_kernel(bc: BoundaryCondition | str):
    """Compiled toy-model RHS on the interleaved real view of ``b``."""
    if BoundaryCondition.parse(bc) is BoundaryCondition.PERIODIC:
        return _toy_rhs_periodic
    return _toy_rhs_dirichlet


def burgers_kernel(bc: BoundaryCondition | str):
    if BoundaryCondition.parse(bc) is BoundaryCondition.PERIODIC:
        return _burgers_rhs_periodic
    return _burgers_rhs_dirichlet
