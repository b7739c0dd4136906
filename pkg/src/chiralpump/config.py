"""
Run configuration files.

Configs are flat TOML documents using dotted keys, one value per line::

    model.eta = 0.02        # MHz, i.e. eta/2pi
    model.omegaS = 1.0
    model.omega0 = 1.0
    model.delta_ratio = 1.0 # or model.delta = 50.0 (MHz)
    rates.gammaS = 0.1

Frequencies and rates are ordinary frequencies in MHz and are converted to
rad/us here, once. See ``configs/SCHEMA.md`` for every key.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dissipation import DecayRates
from .dynamics import METHODS, SolverConfig
from .errors import EliminationUndefinedError, InvalidArgumentError
from .experiments import HAMILTONIANS, INITIAL_KINDS, InitialStateSpec, Scenario
from .model import ModelParams, mhz


class ConfigError(InvalidArgumentError):
    """Malformed or invalid configuration; the message names the field path."""


SCHEMA = {
    "model": {"eta", "omegaS", "omega0", "omegaA", "delta", "delta_ratio", "phi", "hamiltonian", "labWS", "labWA"},
    "rates": {"gammaS", "gammaA", "gammaSA", "gammaPhi"},
    "initial": {"kind", "x"},
    "times": {"end", "points"},
    "solver": {
        "method",
        "relTol",
        "absTol",
        "maxStep",
        "hermitizeEachStep",
        "steadyWindowTol",
        "settleTol",
        "window",
        "sampleStep",
        "timeCap",
    },
    "output": {"path"},
}


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    times: np.ndarray
    solver: SolverConfig
    output: Optional[str] = None


def _number(section: dict, prefix: str, key: str, default=None, *, minimum=None, positive=False):
    path = f"{prefix}.{key}"
    if key not in section:
        if default is None:
            raise ConfigError(f"{path}: required key is missing")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum:g}, got {value:g}")
    if positive and value <= 0:
        raise ConfigError(f"{path}: must be > 0, got {value:g}")
    return value


def _string(section, prefix, key, default, choices):
    value = section.get(key, default)
    if not isinstance(value, str) or value not in choices:
        raise ConfigError(f"{prefix}.{key}: must be one of {', '.join(choices)}, got {value!r}")
    return value


def loads(text: str) -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"parse error: {err}") from None
    return from_dict(doc)


def load(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not UTF-8 text") from None
    return loads(text)


def from_dict(doc: dict) -> RunConfig:
    for section, value in doc.items():
        if section not in SCHEMA:
            raise ConfigError(f"{section}: unknown section; expected one of {', '.join(SCHEMA)}")
        if not isinstance(value, dict):
            raise ConfigError(f"{section}: expected dotted keys such as {section}.<name> = value")
        for key in value:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}: unknown key")

    m = doc.get("model", {})
    eta = mhz(_number(m, "model", "eta", minimum=0))
    omega_s = mhz(_number(m, "model", "omegaS", minimum=0))
    omega0 = mhz(_number(m, "model", "omega0", minimum=0))
    phi = _number(m, "model", "phi", 0.0)
    kind = _string(m, "model", "hamiltonian", "full", HAMILTONIANS)

    if ("delta" in m) == ("delta_ratio" in m):
        raise ConfigError("model.delta: give exactly one of model.delta or model.delta_ratio")
    if "delta" in m:
        delta = mhz(_number(m, "model", "delta"))
    else:
        ratio = _number(m, "model", "delta_ratio")
        if eta == 0:
            raise EliminationUndefinedError("model.delta_ratio: Delta0 = OmegaS^2/eta is undefined for eta = 0")
        delta = ratio * omega_s**2 / eta

    couple = "omegaA" not in m
    if couple:
        if delta == 0:
            raise EliminationUndefinedError(
                "model.omegaA defaults to OmegaS*Omega0/Delta, which is undefined for Delta = 0"
            )
        omega_a = omega_s * omega0 / delta
    else:
        omega_a = mhz(_number(m, "model", "omegaA", minimum=0))

    lab = {}
    if "labWS" in m:
        lab["lab_ws"] = mhz(_number(m, "model", "labWS", positive=True))
    if "labWA" in m:
        lab["lab_wa"] = mhz(_number(m, "model", "labWA", positive=True))
    model = ModelParams(eta=eta, omega0=omega0, omega_s=omega_s, omega_a=omega_a, phi=phi, delta=delta, **lab)
    if kind != "full" and delta == 0:
        raise EliminationUndefinedError(f"model.hamiltonian = {kind!r} needs a nonzero detuning")

    r = doc.get("rates", {})
    rates = DecayRates(
        gamma_s=mhz(_number(r, "rates", "gammaS", 0.0, minimum=0)),
        gamma_a=mhz(_number(r, "rates", "gammaA", 0.0, minimum=0)),
        gamma_sa=mhz(_number(r, "rates", "gammaSA", 0.0, minimum=0)),
        gamma_phi=mhz(_number(r, "rates", "gammaPhi", 0.0, minimum=0)),
    )

    i = doc.get("initial", {})
    x = _number(i, "initial", "x", 0.5)
    if not 0 <= x <= 1:
        raise ConfigError(f"initial.x: must lie in [0, 1], got {x:g}")
    initial = InitialStateSpec(_string(i, "initial", "kind", "chiralMix", INITIAL_KINDS), x)

    t = doc.get("times", {})
    end = _number(t, "times", "end", 300.0, positive=True)
    points = _number(t, "times", "points", 3001.0)
    if points != int(points) or points < 2:
        raise ConfigError(f"times.points: must be an integer >= 2, got {points:g}")
    times = np.linspace(0.0, end, int(points))

    s = doc.get("solver", {})
    herm = s.get("hermitizeEachStep", True)
    if not isinstance(herm, bool):
        raise ConfigError("solver.hermitizeEachStep: expected true or false")
    solver = SolverConfig(
        rel_tol=_number(s, "solver", "relTol", 1e-10, positive=True),
        abs_tol=_number(s, "solver", "absTol", 1e-12, positive=True),
        max_step=_number(s, "solver", "maxStep", 0.1, positive=True),
        hermitize_each_step=herm,
        steady_window_tol=_number(s, "solver", "steadyWindowTol", 1e-9, positive=True),
        settle_tol=_number(s, "solver", "settleTol", 1e-3, positive=True),
        window=_number(s, "solver", "window", 10.0, positive=True),
        sample_step=_number(s, "solver", "sampleStep", 0.1, positive=True),
        time_cap=_number(s, "solver", "timeCap", 1e4, positive=True),
        method=_string(s, "solver", "method", "expm", METHODS),
    )

    out = doc.get("output", {}).get("path")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output.path: expected a string")

    scenario = Scenario(model, rates, initial, kind, couple_omega_a=couple)
    return RunConfig(scenario, times, solver, out)
