"""``cascade`` command-line entry point.

Exit codes: 0 on success, 1 on configuration errors, 2 on numerical or I/O
failures.  Every error also prints one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .compacton import (
    compacton_ode_residual,
    compacton_profile,
    first_integral,
    lattice_ic_from_profile,
    profile_squared_derivatives,
)
from .config import ConfigError
from .ensemble import EnsembleError, ICSpecError, draw_phases, make_ic, run_ensemble
from .integrate import IntegrationError, integrate, invariant_drift, simulate
from .io import write_csv, write_json, write_trajectory_csv
from .model import BoundaryCondition, burgers_kernel
from .reduced import (
    ReducedState,
    bond_sum_error,
    extract_reduced,
    integrate_reduced,
    lift_to_lattice,
    reduced_hamiltonian,
    return_time,
    symmetry_error,
    wrap_mod_pi,
)
from .stationary import det_A, solve_phase_locked

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

# flag -> (config field, type)
OVERRIDES = {
    "--n": ("n", int),
    "--omega": ("omega", float),
    "--n-max": ("n_max", int),
    "--eps": ("eps", float),
    "--j-star": ("j_star", int),
    "--t-final": ("t_final", float),
    "--realizations": ("realizations", int),
    "--sigma": ("sigma", float),
    "--bc": ("bc", str),
    "--seed": ("seed", int),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cascade", description="Toy-model lattice simulations and analyses.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in cfgmod.SECTIONS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON configuration file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--dry-run", action="store_true", help="validate and echo the configuration")
        for flag, (dest, tp) in OVERRIDES.items():
            kwargs = {"choices": [b.value for b in BoundaryCondition]} if flag == "--bc" else {}
            p.add_argument(flag, dest=f"override_{dest}", type=tp, default=None, **kwargs)
    return parser


def _emit_error(kind: str, message: str, field: str | None = None):
    payload = {"status": "error", "kind": kind, "message": message}
    if field is not None:
        payload["field"] = field
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def run_simulate(cfg: cfgmod.SimulateConfig, out: Path) -> list[Path]:
    spec = cfg.ic_spec()
    phases = draw_phases(cfg.seed, 0, cfg.n) if spec.kind.random else None
    state = make_ic(spec, phases)
    traj = simulate(state, cfg.sample_times(), cfg.integrator.build())
    drift = invariant_drift(traj)
    return [
        write_trajectory_csv(traj, out / "trajectory.csv"),
        write_trajectory_csv(traj, out / "norms.csv", list(cfg.norm_kinds())),
        write_json(out / "drift.json", {
            "max_abs_mass_drift": drift.max_abs_mass,
            "max_rel_mass_drift": drift.max_rel_mass,
            "max_abs_H_drift": drift.max_abs_ham,
            "max_rel_H_drift": drift.max_rel_ham,
            "accepted_steps": traj.accepted_steps,
            "rejected_steps": traj.rejected_steps,
            "per_sample": {"t": traj.times, **traj.drift},
        }),
    ]


def run_ensemble_cmd(cfg: cfgmod.EnsembleRunConfig, out: Path) -> list[Path]:
    stats = run_ensemble(cfg.build())
    header = ["t"]
    for label in stats.labels:
        header += [f"mean_{label}", f"std_{label}", f"ci_lower_{label}", f"ci_upper_{label}"]
    rows = []
    for i, t in enumerate(stats.times):
        row = [t]
        for k in range(len(stats.labels)):
            row += [stats.mean[i, k], stats.std[i, k], stats.ci_lower[i, k], stats.ci_upper[i, k]]
        rows.append(row)
    return [
        write_csv(out / "ensemble.csv", header, rows),
        write_json(out / "ensemble_summary.json", {
            "realizations": stats.count,
            "failures": [{"index": i, "error": e} for i, e in stats.failures],
            "max_invariant_drift": stats.max_drift,
            "normalized": stats.normalized,
            "degenerate_ci": stats.degenerate,
        }),
    ]


def run_stationary(cfg: cfgmod.StationaryConfig, out: Path) -> list[Path]:
    prof = solve_phase_locked(cfg.n, cfg.omega)
    return [
        write_csv(out / "stationary.csv", ["j", "rho"], ([j, r] for j, r in enumerate(prof.rho, 1))),
        write_json(out / "stationary.json", {
            "n": cfg.n,
            "omega": cfg.omega,
            "strictly_positive": prof.strictly_positive,
            "residual": prof.residual(),
            "det_A": str(det_A(cfg.n)),
        }),
    ]


def run_scan(cfg: cfgmod.ScanConfig, out: Path) -> list[Path]:
    rows = []
    print(f"{'N':>5} {'min_rho':>24} {'positive':>9}")
    for N in range(1, cfg.n_max + 1):
        prof = solve_phase_locked(N, cfg.omega)
        rows.append([N, float(prof.rho.min()), float(prof.rho.max()), prof.strictly_positive])
        mark = "yes" if prof.strictly_positive else "no"
        print(f"{N:>5} {prof.rho.min():>24.17g} {mark:>9}")
    positive = [r[0] for r in rows if r[3]]
    print("strictly positive N: " + ", ".join(map(str, positive)))
    return [write_csv(out / "scan.csv", ["N", "min_rho", "max_rho", "strictly_positive"], rows)]


def run_reduced(cfg: cfgmod.ReducedConfig, out: Path) -> list[Path]:
    r0 = ReducedState(cfg.dphi, cfg.drho, cfg.rho_bar, cfg.phi_bar)
    icfg = cfg.integrator.build()
    times = np.linspace(0.0, cfg.t_final, cfg.samples + 1)
    red = integrate_reduced(r0, times, icfg)
    full = simulate(lift_to_lattice(r0, cfg.n), times, icfg)
    energy = [reduced_hamiltonian(ReducedState.from_array(y)) for y in red.states]
    red_rows = ([t, *y, H] for t, y, H in zip(times, red.states, energy))
    cross = []
    for k, t in enumerate(times):
        s = full.state(k)
        dphi, drho = extract_reduced(s)
        cross.append([t, wrap_mod_pi(red.states[k, 0]), red.states[k, 1], dphi, drho,
                      symmetry_error(s), bond_sum_error(s, cfg.rho_bar)])
    cross_arr = np.array(cross)
    summary = {
        "max_energy_drift": float(np.max(np.abs(np.array(energy) - energy[0]))),
        "max_dphi_mismatch": float(np.max(np.abs(wrap_mod_pi(cross_arr[:, 1] - cross_arr[:, 3])))),
        "max_drho_mismatch": float(np.max(np.abs(cross_arr[:, 2] - cross_arr[:, 4]))),
        "max_symmetry_error": float(cross_arr[:, 5].max()),
        "max_bond_sum_error": float(cross_arr[:, 6].max()),
    }
    try:
        ret = return_time(r0, cfg=icfg)
        summary.update(period=ret.period, return_distance=ret.distance)
    except RuntimeError:
        summary.update(period=None, return_distance=None)
    return [
        write_csv(out / "reduced.csv", ["t", "dphi", "drho", "rho_bar", "phi_bar", "H"], red_rows),
        write_csv(out / "reduced_crosscheck.csv",
                  ["t", "dphi_reduced", "drho_reduced", "dphi_lattice", "drho_lattice",
                   "symmetry_error", "bond_sum_error"], cross),
        write_json(out / "reduced_summary.json", summary),
    ]


def run_burgers(cfg: cfgmod.BurgersConfig, out: Path) -> list[Path]:
    rho0 = np.abs(make_ic(cfg.ic_spec()).b) ** 2
    times = np.linspace(0.0, cfg.t_final, cfg.samples + 1)
    traj = integrate(burgers_kernel(cfg.bc), rho0, 0.0, cfg.t_final, times, cfg.integrator.build())
    header = ["t"] + [f"rho_{j}" for j in range(1, cfg.n + 1)]
    return [write_csv(out / "burgers.csv", header, ([t, *r] for t, r in zip(traj.times, traj.states)))]


def run_compacton(cfg: cfgmod.CompactonConfig, out: Path) -> list[Path]:
    p = cfg.params()
    base = compacton_ode_residual(p, cfg.dx, "fd")
    analytic = compacton_ode_residual(p, cfg.dx, "analytic")
    x = base.x
    U, _, _ = profile_squared_derivatives(x, p)
    profile_rows = zip(x, compacton_profile(x, p), U, first_integral(x, p), analytic.residual, base.residual)
    conv = []
    for level in range(cfg.levels):
        rep = compacton_ode_residual(p, cfg.dx / 2**level, "fd")
        conv.append([rep.dx, rep.interior_max, rep.edge_max])
    paths = [
        write_csv(out / "compacton_profile.csv",
                  ["x", "Q", "U", "first_integral", "residual_analytic", "residual_fd"], profile_rows),
        write_csv(out / "compacton_convergence.csv", ["dx", "interior_max", "edge_max"], conv),
    ]
    try:
        state = lattice_ic_from_profile(p, cfg.n, cfg.center)
    except ValueError as exc:
        raise ConfigError("center", str(exc)) from None
    paths.append(write_csv(out / "compacton_lattice.csv", ["j", "b"],
                           ([j, b.real] for j, b in enumerate(state.b, 1))))
    return paths


RUNNERS = {
    "simulate": run_simulate,
    "ensemble": run_ensemble_cmd,
    "stationary": run_stationary,
    "scan": run_scan,
    "reduced": run_reduced,
    "burgers": run_burgers,
    "compacton": run_compacton,
}


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        overrides = {
            k.removeprefix("override_"): v
            for k, v in vars(args).items()
            if k.startswith("override_") and v is not None
        }
        cfg = cfgmod.load(args.command, args.config, overrides)
        if args.dry_run:
            print(json.dumps({"command": args.command, "config": cfgmod.to_dict(cfg)}, indent=2, sort_keys=True))
            return EXIT_OK
        args.out.mkdir(parents=True, exist_ok=True)
        for path in RUNNERS[args.command](cfg, args.out):
            print(f"wrote {path}")
        return EXIT_OK
    except ConfigError as exc:
        _emit_error("config", exc.message, exc.field)
        return EXIT_CONFIG
    except ICSpecError as exc:
        _emit_error("config", str(exc))
        return EXIT_CONFIG
    except (IntegrationError, EnsembleError) as exc:
        _emit_error("numerical", str(exc))
        return EXIT_NUMERICAL
    except OSError as exc:
        _emit_error("io", str(exc))
        return EXIT_NUMERICAL


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
