"""
Closed and open time evolution plus steady-state extraction.

Time-independent generators are propagated with the exact matrix exponential
of the (16x16 at most) Liouvillian by default. The embedded Runge-Kutta
integrators (``rk45``, ``dop853``) remain selectable and are what the
lab-frame (explicitly time-dependent) evolution always uses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import DOP853, RK45
from scipy.linalg import expm

from .core import (
    build_liouvillian,
    check_density_matrix,
    density_violations,
    devectorize,
    hermitize,
    vectorize,
)
from .errors import (
    DegenerateSteadyStateError,
    IntegrationError,
    InvalidArgumentError,
    SteadyStateTimeout,
)
from .model import ModelParams, lab_components
from .observables import excess_from_populations, populations

_RK_METHODS = {"rk45": RK45, "dop853": DOP853}
METHODS = ("expm",) + tuple(_RK_METHODS)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings shared by every evolution routine.

    ``steady_window_tol`` bounds ``||rho(t + window) - rho(t)||_F`` when
    :func:`evolve_to_steady` stops; ``settle_tol`` is the looser bound whose
    first crossing is reported as the settling time.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    hermitize_each_step: bool = True
    steady_window_tol: float = 1e-9
    method: str = "expm"
    window: float = 10.0
    settle_tol: float = 1e-3
    sample_step: float = 0.1
    time_cap: float = 1e4
    # mid-run guard: trace error and negative eigenvalue magnitude
    guard_tol: float = 1e-6

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "window", "sample_step", "time_cap"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be > 0")
        if not self.steady_window_tol > 0 or not self.settle_tol > 0:
            raise InvalidArgumentError("steady-state tolerances must be > 0")
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}; choose from {METHODS}")


@dataclass
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # shape (n, 4): P_L, P_R, P_S, P_A
    epsilon: np.ndarray
    states: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p_l(self):
        return self.populations[:, 0]

    @property
    def p_r(self):
        return self.populations[:, 1]

    @property
    def p_s(self):
        return self.populations[:, 2]

    @property
    def p_a(self):
        return self.populations[:, 3]

    @property
    def final_state(self):
        return None if self.states is None else self.states[-1]


class SteadyRun(NamedTuple):
    state: np.ndarray
    time: float  # first t with ||rho(t+window) - rho(t)|| < steady_window_tol
    settle_time: float  # first t with the same difference below settle_tol


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidArgumentError("times must be a non-empty 1-D array")
    if times[0] != 0.0:
        raise InvalidArgumentError("times must start at 0")
    if np.any(np.diff(times) <= 0):
        raise InvalidArgumentError("times must be strictly ascending")
    return times


def _guard(rho: np.ndarray, t: float, cfg: SolverConfig) -> None:
    v = density_violations(rho)
    worst = max(v["trace"], v["hermiticity"], -v["min_eigenvalue"])
    if worst > cfg.guard_tol:
        raise IntegrationError(
            f"state invariant violated at t = {t:.6g} us (magnitude {worst:.3e}): {v}",
            time=t,
            magnitude=worst,
        )


def _finish(rho: np.ndarray, t: float, cfg: SolverConfig) -> np.ndarray:
    if cfg.hermitize_each_step:
        rho = hermitize(rho)
    _guard(rho, t, cfg)
    return rho


def _propagate_expm(lv: np.ndarray, rho0: np.ndarray, times: np.ndarray, cfg) -> np.ndarray:
    dim = rho0.shape[0]
    out = np.empty((times.size, dim, dim), dtype=complex)
    out[0] = rho0
    v = vectorize(rho0)
    cache = {}
    for k in range(1, times.size):
        dt = times[k] - times[k - 1]
        key = round(dt, 12)
        if key not in cache:
            cache[key] = expm(lv * dt)
        v = cache[key] @ v
        rho = _finish(devectorize(v, dim), times[k], cfg)
        v = vectorize(rho)
        out[k] = rho
    return out


def _rk_solver(fun, y0, t_bound, cfg):
    cls = _RK_METHODS.get(cfg.method, DOP853)
    return cls(fun, 0.0, y0, t_bound, rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step)


def _rk_samples(fun, rho0: np.ndarray, times: np.ndarray, cfg):
    """Yield ``(t, rho)`` at each requested time, Hermitizing after every accepted step."""
    dim = rho0.shape[0]
    yield times[0], rho0
    if times.size == 1:
        return
    solver = _rk_solver(fun, vectorize(rho0).copy(), times[-1], cfg)
    k = 1
    while k < times.size:
        if solver.status != "running":
            raise IntegrationError(f"integrator stopped at t = {solver.t:.6g} us", time=solver.t)
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integrator failed at t = {solver.t:.6g} us: {msg}", time=solver.t)
        dense = solver.dense_output()
        while k < times.size and times[k] <= solver.t:
            rho = devectorize(dense(times[k]), dim)
            yield times[k], _finish(rho, times[k], cfg)
            k += 1
        if cfg.hermitize_each_step:
            solver.y = vectorize(hermitize(devectorize(solver.y, dim))).copy()


def _trajectory(times, states, store_states) -> Trajectory:
    pops = np.array([populations(r) for r in states])
    return Trajectory(
        times=np.asarray(times, dtype=float),
        populations=pops,
        epsilon=excess_from_populations(pops),
        states=np.asarray(states) if store_states else None,
    )


def evolve(
    h,
    collapse: Sequence = (),
    rho0=None,
    times=(0.0,),
    cfg: SolverConfig | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Solve ``drho/dt = -i[H, rho] + sum_c D[c] rho`` on the grid ``times``."""
    cfg = cfg or SolverConfig()
    times = _check_times(times)
    rho0 = check_density_matrix(rho0)
    lv = build_liouvillian(h, collapse)
    if rho0.shape[0] ** 2 != lv.shape[0]:
        raise InvalidArgumentError("rho0 dimension does not match the Hamiltonian")
    if cfg.method == "expm":
        states = _propagate_expm(lv, rho0, times, cfg)
    else:
        states = [r for _, r in _rk_samples(lambda t, y: lv @ y, rho0, times, cfg)]
    return _trajectory(times, states, store_states)


def evolve_lab(
    p: ModelParams,
    rho0,
    times,
    cfg: SolverConfig | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Unitary evolution under the explicitly time-dependent lab-frame Hamiltonian.

    ``cfg.method == "expm"`` is not applicable here and falls back to DOP853.
    """
    cfg = cfg or SolverConfig()
    times = _check_times(times)
    rho0 = check_density_matrix(rho0)
    if rho0.shape != (4, 4):
        raise InvalidArgumentError("lab-frame evolution needs a four-level state")
    static, drives = lab_components(p)
    drives_dag = [(c.conj().T, w) for c, w in drives]

    def rhs(t, y):
        h = static.copy()
        for (c, w), (cd, _) in zip(drives, drives_dag):
            phase = np.exp(1j * w * t)
            h += c * phase + cd * phase.conjugate()
        rho = y.reshape((4, 4), order="F")
        return (-1j * (h @ rho - rho @ h)).reshape(-1, order="F")

    states = [r for _, r in _rk_samples(rhs, rho0, times, cfg)]
    return _trajectory(times, states, store_states)


def kernel_dimension(lv: np.ndarray, rtol: float = 1e-9) -> int:
    s = np.linalg.svd(lv, compute_uv=False)
    return int(np.sum(s <= rtol * s[0])) if s[0] > 0 else lv.shape[0]


def steady_state(lv: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Unit-trace null vector of the Liouvillian, devectorised and Hermitized."""
    lv = np.asarray(lv, dtype=complex)
    _, s, vh = np.linalg.svd(lv)
    null_dim = int(np.sum(s <= rtol * s[0])) if s[0] > 0 else lv.shape[0]
    if null_dim != 1:
        raise DegenerateSteadyStateError(null_dim)
    rho = devectorize(vh[-1].conj())
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise DegenerateSteadyStateError(0)
    return hermitize(rho / tr)


def _uniform_samples(lv, rho0, cfg):
    """Endless stream of ``(t, rho)`` on the grid ``k * cfg.sample_step``."""
    dim = rho0.shape[0]
    dt = cfg.sample_step
    if cfg.method == "expm":
        prop = expm(lv * dt)
        v = vectorize(rho0)
        k = 0
        yield 0.0, rho0
        while True:
            k += 1
            t = round(k * dt, 9)
            rho = _finish(devectorize(prop @ v, dim), t, cfg)
            v = vectorize(rho)
            yield t, rho
    else:
        n = int(np.ceil(cfg.time_cap / dt)) + 1
        grid = np.arange(n) * dt
        yield from _rk_samples(lambda t, y: lv @ y, rho0, grid, cfg)


def evolve_to_steady(h, collapse: Sequence = (), rho0=None, cfg: SolverConfig | None = None) -> SteadyRun:
    """Integrate until ``rho`` stops changing over a ``cfg.window`` lookahead."""
    cfg = cfg or SolverConfig()
    rho0 = check_density_matrix(rho0)
    lv = build_liouvillian(h, collapse)
    lag = max(1, int(round(cfg.window / cfg.sample_step)))
    history = deque(maxlen=lag + 1)
    settle = None
    for t, rho in _uniform_samples(lv, rho0, cfg):
        history.append(rho)
        if len(history) <= lag:
            continue
        diff = np.linalg.norm(history[-1] - history[0])
        t_start = round(t - lag * cfg.sample_step, 9)
        if settle is None and diff < cfg.settle_tol:
            settle = t_start
        if diff < cfg.steady_window_tol:
            return SteadyRun(rho, t_start, settle if settle is not None else t_start)
        if t >= cfg.time_cap:
            raise SteadyStateTimeout(
                f"no steady state within {cfg.time_cap:g} us (last window difference {diff:.3e})",
                time=t,
                magnitude=diff,
            )
    raise SteadyStateTimeout("sample stream ended before convergence")
