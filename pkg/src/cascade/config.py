"""Run configurations for the command-line front end.

Each subcommand has a flat dataclass; integrator settings live in a nested
``integrator`` section.  Configurations are read from JSON, unknown keys are
rejected, and ``to_dict``/``from_dict`` round-trip exactly.
"""

from __future__ import annotations

import json
import types
import typing
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .compacton import CompactonParams, Form
from .ensemble import EnsembleConfig, ICKind, InitialConditionSpec
from .integrate import IntegratorConfig
from .model import BoundaryCondition, NormKind, dyadic, polynomial


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


def parse_norm(text: str) -> NormKind:
    """``"poly:2"`` or ``"dyadic:1.5"``."""
    family, _, s = text.partition(":")
    try:
        value = float(s)
    except ValueError:
        raise ValueError(f"bad norm exponent in {text!r}") from None
    if family == "poly":
        return polynomial(value)
    if family == "dyadic":
        return dyadic(value)
    raise ValueError(f"unknown norm family in {text!r}")


@dataclass
class IntegratorSection:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    initial_step: float | None = None
    max_steps: int = 50_000_000
    fixed_step: float | None = None

    def build(self) -> IntegratorConfig:
        try:
            return IntegratorConfig(self.rel_tol, self.abs_tol, self.initial_step, self.max_steps,
                                    fixed_step=self.fixed_step)
        except ValueError as exc:
            raise ConfigError("integrator", str(exc)) from None


def _check(cond: bool, name: str, message: str):
    if not cond:
        raise ConfigError(name, message)


@dataclass
class _ICFields:
    """Mixin for sections that build a lattice initial condition."""

    def ic_spec(self) -> InitialConditionSpec:
        kind = ICKind(self.ic)
        return InitialConditionSpec(
            kind,
            self.n,
            self.eps if kind.random else None,
            self.j_star if kind.random else None,
            self.sigma if kind is ICKind.GENERALIZED_WEIGHTED_SHOCK else None,
            self.bc,
        )

    def _validate_ic(self):
        _check(self.ic in {k.value for k in ICKind}, "ic", f"unknown kind {self.ic!r}")
        _check(self.bc in {b.value for b in BoundaryCondition}, "bc", f"unknown boundary condition {self.bc!r}")
        _check(self.n >= 1, "n", "must be positive")
        kind = ICKind(self.ic)
        if kind.random:
            _check(0 < self.eps < 1, "eps", "must lie in (0, 1)")
            _check(1 < self.j_star < self.n, "j_star", "must satisfy 1 < j_star < n")
        if kind is ICKind.GENERALIZED_WEIGHTED_SHOCK:
            _check(0 < self.sigma < 1, "sigma", "must lie in (0, 1)")
        _check(self.t_final > 0, "t_final", "must be positive")
        _check(self.samples >= 1, "samples", "must be at least 1")
        for text in self.norms:
            try:
                parse_norm(text)
            except ValueError as exc:
                raise ConfigError("norms", str(exc)) from None

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.samples + 1)

    def norm_kinds(self) -> tuple[NormKind, ...]:
        return tuple(parse_norm(t) for t in self.norms)


DEFAULT_NORMS = ("poly:1", "poly:2", "poly:3", "poly:4")


@dataclass
class SimulateConfig(_ICFields):
    ic: str = "localized_random_phase"
    n: int = 100
    bc: str = "dirichlet"
    eps: float = 0.1
    j_star: int = 10
    sigma: float = 0.5
    t_final: float = 100.0
    samples: int = 100
    seed: int = 0
    norms: tuple[str, ...] = DEFAULT_NORMS
    integrator: IntegratorSection = field(default_factory=IntegratorSection)

    def validate(self):
        self._validate_ic()


@dataclass
class EnsembleRunConfig(_ICFields):
    ic: str = "localized_random_phase"
    n: int = 100
    bc: str = "dirichlet"
    eps: float = 0.1
    j_star: int = 10
    sigma: float = 0.5
    t_final: float = 1000.0
    samples: int = 100
    realizations: int = 100
    seed: int = 0
    norms: tuple[str, ...] = DEFAULT_NORMS
    drift_limit: float | None = 1e-9
    integrator: IntegratorSection = field(default_factory=IntegratorSection)

    def validate(self):
        self._validate_ic()
        _check(self.realizations >= 1, "realizations", "must be at least 1")

    def build(self) -> EnsembleConfig:
        return EnsembleConfig(
            self.ic_spec(), self.realizations, self.t_final, tuple(self.sample_times()),
            self.norm_kinds(), self.seed, self.integrator.build(), self.drift_limit,
        )


@dataclass
class StationaryConfig:
    n: int = 3
    omega: float = 1.0

    def validate(self):
        _check(self.n >= 1, "n", "must be positive")
        _check(self.omega != 0, "omega", "must be nonzero")


@dataclass
class ScanConfig:
    n_max: int = 142
    omega: float = 1.0

    def validate(self):
        _check(self.n_max >= 1, "n_max", "must be positive")
        _check(self.omega > 0, "omega", "must be positive")


@dataclass
class ReducedConfig:
    dphi: float = 0.7853981633974483
    drho: float = 0.0
    rho_bar: float = 2.0
    phi_bar: float = 0.7853981633974483
    n: int = 10
    t_final: float = 10.0
    samples: int = 1000
    integrator: IntegratorSection = field(default_factory=lambda: IntegratorSection(rel_tol=1e-13, abs_tol=1e-15))

    def validate(self):
        _check(self.rho_bar > 0, "rho_bar", "must be positive")
        _check(abs(self.drho) <= self.rho_bar, "drho", "must satisfy |drho| <= rho_bar")
        _check(self.n >= 2 and self.n % 2 == 0, "n", "must be a positive even integer")
        _check(self.t_final > 0, "t_final", "must be positive")
        _check(self.samples >= 1, "samples", "must be at least 1")


@dataclass
class BurgersConfig:
    ic: str = "shock"
    n: int = 100
    bc: str = "dirichlet"
    sigma: float = 0.5
    t_final: float = 5.0
    samples: int = 100
    integrator: IntegratorSection = field(default_factory=IntegratorSection)

    def validate(self):
        shock_kinds = {"shock", "weighted_shock", "generalized_weighted_shock"}
        _check(self.ic in shock_kinds, "ic", f"must be one of {sorted(shock_kinds)}")
        _check(self.bc in {b.value for b in BoundaryCondition}, "bc", f"unknown boundary condition {self.bc!r}")
        _check(self.n >= 1, "n", "must be positive")
        if self.ic == "generalized_weighted_shock":
            _check(0 < self.sigma < 1, "sigma", "must lie in (0, 1)")
        _check(self.t_final > 0, "t_final", "must be positive")
        _check(self.samples >= 1, "samples", "must be at least 1")

    def ic_spec(self) -> InitialConditionSpec:
        sigma = self.sigma if self.ic == "generalized_weighted_shock" else None
        return InitialConditionSpec(ICKind(self.ic), self.n, sigma=sigma, bc=self.bc)


@dataclass
class CompactonConfig:
    h: float = 1.0
    form: str = "cosine"
    dx: float = 0.05
    levels: int = 4
    n: int = 100
    center: int = 50

    def validate(self):
        _check(self.h > 0, "h", "must be positive")
        _check(self.form in {f.value for f in Form}, "form", f"unknown form {self.form!r}")
        _check(self.dx > 0, "dx", "must be positive")
        _check(self.levels >= 1, "levels", "must be at least 1")
        _check(self.n >= 1, "n", "must be positive")

    def params(self) -> CompactonParams:
        return CompactonParams(self.h, Form(self.form))


SECTIONS: dict[str, type] = {
    "simulate": SimulateConfig,
    "ensemble": EnsembleRunConfig,
    "stationary": StationaryConfig,
    "scan": ScanConfig,
    "reduced": ReducedConfig,
    "burgers": BurgersConfig,
    "compacton": CompactonConfig,
}


def _coerce(value, tp, name: str):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        (inner,) = [a for a in args if a is not type(None)]
        return _coerce(value, inner, name)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(name, "expected a list")
        return tuple(_coerce(v, args[0], name) for v in value)
    if isinstance(tp, type) and hasattr(tp, "__dataclass_fields__"):
        if not isinstance(value, dict):
            raise ConfigError(name, "expected an object")
        return from_dict(tp, value, prefix=f"{name}.")
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(name, "expected true or false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(name, f"expected a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {tp!r}")


def from_dict(cls, data: dict, prefix: str = ""):
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip(".") or "config", "expected a JSON object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(prefix + key, "unknown field")
    obj = cls(**{k: _coerce(v, hints[k], prefix + k) for k, v in data.items()})
    if prefix == "" and hasattr(obj, "validate"):
        obj.validate()
    return obj


def to_dict(cfg) -> dict:
    d = asdict(cfg)
    return json.loads(json.dumps(d))


def load(command: str, path=None, overrides: dict | None = None):
    """Defaults, then the JSON file, then command-line overrides."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"malformed JSON: {exc}") from None
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object")
    data = dict(data)
    names = {f.name for f in fields(SECTIONS[command])}
    for key, value in (overrides or {}).items():
        if key not in names:
            raise ConfigError(key, f"not an option of {command}")
        data[key] = value
    return from_dict(SECTIONS[command], data)
