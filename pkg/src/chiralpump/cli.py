"""Command-line front end.

Exit codes: 0 success, 2 input/configuration error, 3 physics or solver
error, 4 no unique steady state.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import config as configmod
from .dynamics import kernel_dimension
from .errors import (
    ChiralPumpError,
    DegenerateSteadyStateError,
    EliminationUndefinedError,
    IntegrationError,
    InvalidArgumentError,
    UndefinedObservableError,
)
from .experiments import (
    FIGURES,
    OBS_COLUMNS,
    Dataset,
    SweepSpec,
    observables_row,
    run_figure,
    simulate,
    steady,
    sweep,
    trajectory_dataset,
    write_atomic,
)
from .model import mhz

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_DEGENERATE = 4

# sweep parameters given in MHz on the command line
_FREQUENCY_PARAMS = {"delta", "omega0", "gammaPhi"}


def exit_code_for(err: BaseException) -> int:
    if isinstance(err, DegenerateSteadyStateError):
        return EXIT_DEGENERATE
    if isinstance(err, (EliminationUndefinedError, IntegrationError, UndefinedObservableError)):
        return EXIT_SOLVER
    if isinstance(err, InvalidArgumentError):
        return EXIT_INPUT
    return EXIT_SOLVER


def _output_path(args, cfg, default):
    return args.out or cfg.output or default


def cmd_simulate(args) -> int:
    cfg = configmod.load(args.config)
    traj = simulate(cfg.scenario, cfg.times, cfg.solver)
    path = _output_path(args, cfg, "simulate.csv")
    trajectory_dataset(traj).to_csv(path)
    print(f"wrote {path} ({len(traj.times)} rows, final epsilon {traj.epsilon[-1]:.6g})")
    return EXIT_OK


def cmd_steady(args) -> int:
    cfg = configmod.load(args.config)
    sc = cfg.scenario
    if args.method == "integrate":
        # a closed or otherwise degenerate generator never settles; report it like the null-space route
        dim = kernel_dimension(sc.liouvillian())
        if dim != 1:
            raise DegenerateSteadyStateError(dim)
    rho, t = steady(sc, args.method, cfg.solver)
    ds = Dataset(OBS_COLUMNS + ("converged_time_us",), np.array([observables_row(rho) + [t]]))
    path = _output_path(args, cfg, "steady.csv")
    ds.to_csv(path)
    print(f"wrote {path} (epsilon {ds.data[0, 4]:.6g})")
    return EXIT_OK


def _parse_overrides(items):
    overrides = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise InvalidArgumentError(f"--override expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", label.replace("=", "-"))


def cmd_figure(args) -> int:
    result = run_figure(args.id, _parse_overrides(args.override))
    os.makedirs(args.out_dir, exist_ok=True)
    files = []
    for label, ds in result.curves.items():
        name = f"{args.id}.csv" if label == args.id else f"{args.id}_{_safe(label)}.csv"
        ds.to_csv(os.path.join(args.out_dir, name))
        files.append(name)
    manifest = dict(result.manifest, files=files, overrides=_parse_overrides(args.override))
    write_atomic(
        os.path.join(args.out_dir, f"{args.id}_manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    print(f"wrote {len(files)} curve file(s) and manifest to {args.out_dir}")
    return EXIT_OK


def _grid(args):
    if args.values:
        try:
            grid = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise InvalidArgumentError(f"--values: cannot parse {args.values!r}") from None
    elif args.start is not None and args.stop is not None and args.num:
        if args.log:
            if args.start <= 0 or args.stop <= 0:
                raise InvalidArgumentError("--log needs positive --start and --stop")
            grid = np.geomspace(args.start, args.stop, args.num)
        else:
            grid = np.linspace(args.start, args.stop, args.num)
    else:
        raise InvalidArgumentError("give --values or all of --start, --stop, --num")
    return np.asarray(grid, dtype=float)


def cmd_sweep(args) -> int:
    cfg = configmod.load(args.config)
    grid = _grid(args)
    physical = np.array([mhz(v) for v in grid]) if args.param in _FREQUENCY_PARAMS else grid
    ds = sweep(SweepSpec(args.param, tuple(physical), cfg.scenario), args.method, cfg.solver)
    ds.data[:, 0] = grid
    path = _output_path(args, cfg, "sweep.csv")
    ds.to_csv(path)
    print(f"wrote {path} ({len(grid)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralpump",
        description="Optical-pumping enantio-conversion simulator (four-level chiral model).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="time series for one configuration")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("steady", help="steady-state observables for one configuration")
    p.add_argument("config")
    p.add_argument("--method", choices=("nullspace", "integrate"), default="nullspace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("figure", help="reproduce one figure panel as CSV files")
    p.add_argument("id", help=", ".join(sorted(FIGURES)))
    p.add_argument("--override", action="append", metavar="KEY=VALUE")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("sweep", help="steady state over a parameter grid")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=("delta", "omega0", "gammaPhi", "initX"))
    p.add_argument("--values", help="comma-separated grid (MHz for delta, omega0, gammaPhi)")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--num", type=int)
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.add_argument("--method", choices=("nullspace", "integrate"), default="nullspace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "figure" and args.id not in FIGURES:
        print(f"error: unknown figure {args.id!r}; choose from {', '.join(sorted(FIGURES))}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ChiralPumpError as err:
        print(f"error: {err}", file=sys.stderr)
        return exit_code_for(err)


if __name__ == "__main__":
    sys.exit(main())
