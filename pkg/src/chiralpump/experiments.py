"""
Named enantio-conversion panels and generic parameter sweeps.

A :class:`Scenario` bundles everything one run needs (Hamiltonian choice,
decay rates, initial state). Figures are described by *knobs* in reporting
units: frequencies in MHz (``X/2pi``), detuning and
couplings as ratios (``Delta/Delta0``, ``Omega0/Omega_S``).
"""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .core import build_liouvillian
from .dissipation import DecayRates, collapse_operators
from .dynamics import SolverConfig, Trajectory, evolve, evolve_to_steady, steady_state
from .errors import ChiralPumpError, EliminationUndefinedError, InvalidArgumentError
from .model import (
    L,
    R,
    RL,
    RR,
    ModelParams,
    hamiltonian_effective,
    hamiltonian_interaction,
    hamiltonian_reduced,
    mhz,
)
from .observables import enantiomeric_excess, populations

__all__ = [
    "InitialStateSpec",
    "Scenario",
    "SweepSpec",
    "Dataset",
    "FigureResult",
    "FIGURES",
    "make_initial",
    "enantiomeric_excess",
    "simulate",
    "steady",
    "sweep",
    "run_figure",
    "scenario_from_knobs",
]

TIME_COLUMNS = ("t_us", "P_L", "P_R", "P_S", "P_A", "epsilon")
OBS_COLUMNS = ("P_L", "P_R", "P_S", "P_A", "epsilon")
HAMILTONIANS = ("full", "effective", "reduced")
SWEEP_PARAMS = ("delta", "omega0", "gammaPhi", "initX")
INITIAL_KINDS = ("chiralMix", "pmMix")


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str = "chiralMix"
    x: float = 0.5

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise InvalidArgumentError(f"initial kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.x <= 1.0:
            raise InvalidArgumentError(f"initial mixing coefficient x must lie in [0, 1], got {self.x!r}")


def make_initial(spec: InitialStateSpec, dim: int = 4) -> np.ndarray:
    """Ground-manifold mixture embedded in the 4-level or reduced 3-level space.

    ``chiralMix(x) = x|L><L| + (1-x)|R><R|``;
    ``pmMix(x) = x|+><+| + (1-x)|-><-|`` with ``|+-> = (|L> +- |R>)/sqrt(2)``.
    """
    if dim == 4:
        il, ir = L, R
    elif dim == 3:
        il, ir = RL, RR
    else:
        raise InvalidArgumentError(f"unsupported dimension {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    if spec.kind == "chiralMix":
        rho[il, il] = spec.x
        rho[ir, ir] = 1.0 - spec.x
    else:
        # x|+><+| + (1-x)|-><-| has diagonal 1/2 and L-R coherence x - 1/2
        rho[il, il] = rho[ir, ir] = 0.5
        rho[il, ir] = rho[ir, il] = spec.x - 0.5
    return rho


@dataclass(frozen=True)
class Scenario:
    """One fully specified run.

    With ``couple_omega_a`` set, ``Omega_A`` is kept at ``Omega_S Omega0 / Delta``
    whenever the detuning or pump coupling is changed by :meth:`with_param`.
    """

    model: ModelParams
    rates: DecayRates = field(default_factory=DecayRates)
    initial: InitialStateSpec = field(default_factory=InitialStateSpec)
    hamiltonian_kind: str = "full"
    couple_omega_a: bool = False

    def __post_init__(self):
        if self.hamiltonian_kind not in HAMILTONIANS:
            raise InvalidArgumentError(f"hamiltonian must be one of {HAMILTONIANS}")

    @property
    def dim(self) -> int:
        return 3 if self.hamiltonian_kind == "reduced" else 4

    def hamiltonian(self) -> np.ndarray:
        if self.hamiltonian_kind == "full":
            return hamiltonian_interaction(self.model)
        if self.hamiltonian_kind == "effective":
            return hamiltonian_effective(self.model)
        return hamiltonian_reduced(self.model)

    def collapse(self) -> list:
        return collapse_operators(self.rates, self.dim)

    def rho0(self) -> np.ndarray:
        return make_initial(self.initial, self.dim)

    def liouvillian(self) -> np.ndarray:
        return build_liouvillian(self.hamiltonian(), self.collapse())

    def with_param(self, name: str, value: float) -> "Scenario":
        m = self.model
        if name == "delta":
            m = m.replace(delta=value)
        elif name == "omega0":
            m = m.replace(omega0=value)
        elif name == "gammaPhi":
            return replace(self, rates=replace(self.rates, gamma_phi=value))
        elif name == "initX":
            return replace(self, initial=replace(self.initial, x=value))
        else:
            raise InvalidArgumentError(f"unknown sweep parameter {name!r}; choose from {SWEEP_PARAMS}")
        if self.couple_omega_a:
            if m.delta == 0:
                raise EliminationUndefinedError("Omega_A = Omega_S Omega0 / Delta needs Delta != 0")
            m = m.replace(omega_a=m.omega_s * m.omega0 / m.delta)
        return replace(self, model=m)


@dataclass
class Dataset:
    columns: tuple
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_csv_string(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.data:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        write_atomic(path, self.to_csv_string())


def _fmt(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    out = f"{v:.12g}"
    return "0" if out == "-0" else out


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_dataset(traj: Trajectory, meta: Optional[dict] = None) -> Dataset:
    data = np.column_stack([traj.times, traj.populations, traj.epsilon])
    return Dataset(TIME_COLUMNS, data, dict(meta or {}))


def simulate(scenario: Scenario, times, cfg: SolverConfig | None = None, store_states=False) -> Trajectory:
    return evolve(scenario.hamiltonian(), scenario.collapse(), scenario.rho0(), times, cfg, store_states)


def steady(scenario: Scenario, method: str = "nullspace", cfg: SolverConfig | None = None):
    """Return ``(rho_ss, converged_time_us)``; the time is NaN for the null-space method.

    For ``integrate`` the reported time is the settling time (see
    :class:`~chiralpump.dynamics.SolverConfig`).
    """
    if method == "nullspace":
        return steady_state(scenario.liouvillian()), math.nan
    if method == "integrate":
        run = evolve_to_steady(scenario.hamiltonian(), scenario.collapse(), scenario.rho0(), cfg)
        return run.state, run.settle_time
    raise InvalidArgumentError(f"unknown steady-state method {method!r}")


def observables_row(rho) -> list:
    return list(populations(rho)) + [enantiomeric_excess(rho)]


@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: tuple
    base: Scenario

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise InvalidArgumentError(f"unknown sweep parameter {self.param!r}; choose from {SWEEP_PARAMS}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise InvalidArgumentError("sweep grid must be a non-empty 1-D sequence")
        if np.any(np.diff(grid) <= 0):
            raise InvalidArgumentError("sweep grid must be strictly ascending")
        object.__setattr__(self, "grid", tuple(float(g) for g in grid))


def sweep_threads() -> int:
    env = os.environ.get("CHIRALPUMP_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidArgumentError(f"CHIRALPUMP_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise InvalidArgumentError("CHIRALPUMP_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def sweep(
    spec: SweepSpec,
    method: str = "nullspace",
    cfg: SolverConfig | None = None,
    threads: int | None = None,
) -> Dataset:
    """One steady-state row per grid value, in grid order."""

    def point(value):
        try:
            rho, t = steady(spec.base.with_param(spec.param, value), method, cfg)
            return [value] + observables_row(rho) + [t]
        except ChiralPumpError as err:
            err.args = (f"sweep point {spec.param}={value:g}: {err}",) + err.args[1:]
            raise

    threads = threads or sweep_threads()
    if threads == 1 or len(spec.grid) == 1:
        rows = [point(v) for v in spec.grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, spec.grid))
    columns = (spec.param,) + OBS_COLUMNS + ("converged_time_us",)
    return Dataset(columns, np.array(rows, dtype=float), {"param": spec.param, "method": method})


# ---------------------------------------------------------------- figures

# default knob values (frequencies in MHz)
BASE_KNOBS = {
    "eta": 0.02,
    "OmegaS": 1.0,
    "Omega0_ratio": 1.0,
    "Delta_ratio": 1.0,
    "phi": 0.0,
    "gammaS": 0.1,
    "gammaA": 0.1,
    "gammaSA": 0.5,
    "gammaPhi": 0.01,
    "x": 0.5,
    "t_end": 300.0,
    "n_points": 3001,
}
CLOSED = {"gammaS": 0.0, "gammaA": 0.0, "gammaSA": 0.0, "gammaPhi": 0.0}
# sweep axes are expressed through these knobs; the dataset header uses the knob name
AXIS_KNOBS = ("Delta_ratio", "Omega0_ratio", "gammaPhi_ratio")


@dataclass(frozen=True)
class FigureDef:
    kind: str  # "time" or "sweep"
    knobs: dict
    curve_knob: Optional[str] = None
    curve_values: tuple = ()
    initial_kind: str = "chiralMix"
    axis_knob: Optional[str] = None
    axis_grid: Optional[Callable[[], np.ndarray]] = None
    description: str = ""


FIGURES = {
    "fig2a": FigureDef(
        "time",
        {**BASE_KNOBS, **CLOSED, "Omega0_ratio": 1.0, "t_end": 100.0, "n_points": 2001},
        description="closed-system populations, Omega0/Omega_S = 1",
    ),
    "fig2b": FigureDef(
        "time",
        {**BASE_KNOBS, **CLOSED, "Omega0_ratio": 5.0, "t_end": 100.0, "n_points": 2001},
        description="closed-system populations, Omega0/Omega_S = 5",
    ),
    "fig3a": FigureDef(
        "time",
        {**BASE_KNOBS, "Omega0_ratio": 1.0},
        curve_knob="Delta_ratio",
        curve_values=(0.8, 0.9, 1.0, 1.1, 1.2),
        description="dissipative populations for several Delta/Delta0, Omega0/Omega_S = 1",
    ),
    "fig3b": FigureDef(
        "time",
        {**BASE_KNOBS, "Omega0_ratio": 5.0},
        curve_knob="Delta_ratio",
        curve_values=(0.8, 0.9, 1.0, 1.1, 1.2),
        description="dissipative populations for several Delta/Delta0, Omega0/Omega_S = 5",
    ),
    "fig4a": FigureDef(
        "sweep",
        dict(BASE_KNOBS),
        curve_knob="Omega0_ratio",
        curve_values=(1.0, 5.0),
        axis_knob="Delta_ratio",
        axis_grid=lambda: np.linspace(0.5, 1.5, 101),
        description="steady-state excess versus Delta/Delta0",
    ),
    "fig4b": FigureDef(
        "sweep",
        dict(BASE_KNOBS),
        axis_knob="Omega0_ratio",
        axis_grid=lambda: np.geomspace(0.1, 50.0, 60),
        description="steady-state excess versus Omega0/Omega_S at Delta = Delta0",
    ),
    "fig5": FigureDef(
        "sweep",
        {**BASE_KNOBS, "OmegaS": 2.0},
        curve_knob="Omega0_ratio",
        curve_values=(1.0, 5.0, 10.0, 20.0),
        axis_knob="gammaPhi_ratio",
        axis_grid=lambda: np.linspace(0.0, 30.0, 61),
        description="steady-state excess versus gammaPhi/gammaS",
    ),
    "fig6a": FigureDef(
        "time",
        dict(BASE_KNOBS),
        curve_knob="x",
        curve_values=(0.3, 0.5, 0.7),
        initial_kind="chiralMix",
        description="excess dynamics for x|L><L| + (1-x)|R><R|",
    ),
    "fig6b": FigureDef(
        "time",
        dict(BASE_KNOBS),
        curve_knob="x",
        curve_values=(0.0, 0.5, 1.0),
        initial_kind="pmMix",
        description="excess dynamics for x|+><+| + (1-x)|-><-|",
    ),
}
OVERRIDE_KEYS = tuple(BASE_KNOBS) + ("gammaPhi_ratio",)


def scenario_from_knobs(knobs: dict, initial_kind: str = "chiralMix") -> Scenario:
    """Build a full-model scenario from reporting-unit knobs.

    ``Delta = Delta_ratio * OmegaS^2 / eta`` and ``Omega_A = Omega_S Omega0 / Delta``.
    """
    eta = mhz(knobs["eta"])
    omega_s = mhz(knobs["OmegaS"])
    omega0 = knobs["Omega0_ratio"] * omega_s
    if eta <= 0:
        raise InvalidArgumentError("eta must be > 0 to define Delta0")
    delta = knobs["Delta_ratio"] * omega_s**2 / eta
    if delta == 0:
        raise InvalidArgumentError("Delta_ratio must be nonzero")
    model = ModelParams(
        eta=eta,
        omega0=omega0,
        omega_s=omega_s,
        omega_a=omega_s * omega0 / delta,
        phi=knobs["phi"],
        delta=delta,
    )
    gamma_s = mhz(knobs["gammaS"])
    gamma_phi = mhz(knobs["gammaPhi"])
    if "gammaPhi_ratio" in knobs:
        gamma_phi = knobs["gammaPhi_ratio"] * gamma_s
    rates = DecayRates(
        gamma_s=gamma_s,
        gamma_a=mhz(knobs["gammaA"]),
        gamma_sa=mhz(knobs["gammaSA"]),
        gamma_phi=gamma_phi,
    )
    initial = InitialStateSpec(initial_kind, knobs["x"])
    return Scenario(model, rates, initial, "full", couple_omega_a=True)


@dataclass
class FigureResult:
    fig_id: str
    curves: dict  # label -> Dataset
    manifest: dict


def _parse_override_value(key, raw):
    if isinstance(raw, (int, float)):
        return (float(raw),)
    if isinstance(raw, (list, tuple)):
        return tuple(float(v) for v in raw)
    try:
        return tuple(float(v) for v in str(raw).split(",") if v.strip())
    except ValueError:
        raise InvalidArgumentError(f"override {key}: cannot parse {raw!r} as number(s)") from None


def _label(knob, value) -> str:
    return f"{knob}={value:g}"


def run_figure(
    fig_id: str,
    overrides: Optional[dict] = None,
    cfg: SolverConfig | None = None,
    threads: int | None = None,
) -> FigureResult:
    """Compute every curve of one figure panel.

    ``overrides`` maps knob names to a number or comma-separated list. Lists
    are accepted for the curve knob (replacing the set of curves) and for the
    sweep-axis knob (replacing the grid); every other knob takes one value.
    """
    if fig_id not in FIGURES:
        raise InvalidArgumentError(f"unknown figure {fig_id!r}; choose from {sorted(FIGURES)}")
    fig = FIGURES[fig_id]
    knobs = dict(fig.knobs)
    curve_values = fig.curve_values
    grid = fig.axis_grid() if fig.axis_grid else None

    for key, raw in (overrides or {}).items():
        if key not in OVERRIDE_KEYS:
            raise InvalidArgumentError(f"unknown override {key!r}; allowed: {', '.join(OVERRIDE_KEYS)}")
        values = _parse_override_value(key, raw)
        if not values:
            raise InvalidArgumentError(f"override {key}: no value given")
        if key == fig.curve_knob:
            curve_values = values
        elif key == fig.axis_knob:
            grid = np.asarray(values)
        elif len(values) != 1:
            raise InvalidArgumentError(f"override {key} takes a single value for {fig_id}")
        else:
            knobs[key] = values[0]

    knob_sets = (
        [(None, knobs)]
        if fig.curve_knob is None
        else [(_label(fig.curve_knob, v), {**knobs, fig.curve_knob: v}) for v in curve_values]
    )
    n_points = int(knobs["n_points"])
    if n_points < 2 or knobs["t_end"] <= 0:
        raise InvalidArgumentError("t_end must be > 0 and n_points >= 2")

    curves = {}
    manifest = {"figure": fig_id, "description": fig.description, "curves": []}
    for label, kn in knob_sets:
        label = label or fig_id
        sc = scenario_from_knobs(kn, fig.initial_kind)
        entry = {"label": label, "knobs": kn, "initial_kind": fig.initial_kind, "params": _scenario_record(sc)}
        if fig.kind == "time":
            times = np.linspace(0.0, kn["t_end"], n_points)
            ds = trajectory_dataset(simulate(sc, times, cfg))
        else:
            ds = _figure_sweep(fig.axis_knob, grid, sc, threads)
            entry["axis"] = fig.axis_knob
            entry["grid"] = [float(g) for g in grid]
        ds.meta.update(entry)
        curves[label] = ds
        manifest["curves"].append(entry)
    return FigureResult(fig_id, curves, manifest)


def _figure_sweep(axis_knob, grid, sc: Scenario, threads) -> Dataset:
    grid = np.asarray(grid, dtype=float)
    m = sc.model
    if axis_knob == "Delta_ratio":
        spec = SweepSpec("delta", tuple(grid * m.omega_s**2 / m.eta), sc)
    elif axis_knob == "Omega0_ratio":
        spec = SweepSpec("omega0", tuple(grid * m.omega_s), sc)
    elif axis_knob == "gammaPhi_ratio":
        spec = SweepSpec("gammaPhi", tuple(grid * sc.rates.gamma_s), sc)
    else:
        raise InvalidArgumentError(f"unsupported sweep axis {axis_knob!r}")
    ds = sweep(spec, threads=threads)
    ds.data[:, 0] = grid
    ds.columns = (axis_knob,) + ds.columns[1:]
    return ds


def _scenario_record(sc: Scenario) -> dict:
    """Exact parameters in rad/us, for the manifest."""
    m, r = sc.model, sc.rates
    return {
        "units": "rad/us",
        "eta": m.eta,
        "omega0": m.omega0,
        "omegaS": m.omega_s,
        "omegaA": m.omega_a,
        "phi": m.phi,
        "delta": m.delta,
        "gammaS": r.gamma_s,
        "gammaA": r.gamma_a,
        "gammaSA": r.gamma_sa,
        "gammaPhi": r.gamma_phi,
        "initial": {"kind": sc.initial.kind, "x": sc.initial.x},
    }
