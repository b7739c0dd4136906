"""
Four-level chiral molecule driven in a cyclic (Delta-type) configuration.

Basis order is ``(L, R, S, A)`` for four-level operators and ``(L, R, A)``
for the reduced three-level model once ``|S>`` has been eliminated.

All frequencies, couplings and rates are angular (rad/us); time is in us.
A value quoted as ``X/2pi = f MHz`` enters as ``mhz(f) == 2*pi*f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import dag, outer
from .errors import EliminationUndefinedError, InvalidArgumentError

TWO_PI = 2.0 * math.pi

L, R, S, A = 0, 1, 2, 3
LABELS = ("L", "R", "S", "A")
# positions of L, R, A inside the reduced three-level basis
RL, RR, RA = 0, 1, 2
REDUCED_LABELS = ("L", "R", "A")

DEFAULT_LAB_WS = TWO_PI * 500.0
DEFAULT_LAB_WA = TWO_PI * 1500.0


def mhz(f: float) -> float:
    """Convert an ordinary frequency in MHz to rad/us."""
    return TWO_PI * f


def to_mhz(w: float) -> float:
    return w / TWO_PI


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the driven four-level model (angular units).

    ``phi`` is the overall loop phase of the left-handed molecule; the
    right-handed one carries ``phi + pi``. ``lab_ws`` and ``lab_wa`` are the
    bare energies of ``|S>`` and ``|A>``, used only by the lab-frame
    Hamiltonian.
    """

    eta: float
    omega0: float
    omega_s: float
    omega_a: float
    phi: float = 0.0
    delta: float = 0.0
    lab_ws: float = DEFAULT_LAB_WS
    lab_wa: float = DEFAULT_LAB_WA

    def __post_init__(self):
        for name in ("eta", "omega0", "omega_s", "omega_a"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be a finite value >= 0, got {value!r}")
        for name in ("phi", "delta", "lab_ws", "lab_wa"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @property
    def phi_l(self) -> float:
        return self.phi

    @property
    def phi_r(self) -> float:
        return self.phi + math.pi

    def field_frequencies(self):
        """Return ``(w0, w1, w2)`` fixed by one- and three-photon resonance."""
        if not self.lab_wa > self.lab_ws > 0:
            raise InvalidArgumentError(
                f"lab-frame energies need lab_wa > lab_ws > 0 (got {self.lab_ws}, {self.lab_wa})"
            )
        w2 = self.lab_wa
        w1 = self.lab_ws - self.delta
        w0 = self.lab_wa - w1
        return w0, w1, w2


@dataclass(frozen=True)
class DerivedParams:
    lam: float
    lam_tilde: float
    delta_tilde: float
    omega_tilde_l: complex
    omega_tilde_r: complex
    # None when eta == 0
    delta0: Optional[float]
    small_delta: float


def _require_delta(p: ModelParams) -> None:
    if p.delta == 0:
        raise EliminationUndefinedError("adiabatic elimination needs a nonzero detuning Delta")


def derive(p: ModelParams) -> DerivedParams:
    _require_delta(p)
    lam = -p.omega_s**2 / p.delta
    lam_tilde = -p.omega0**2 / p.delta
    two_photon = p.omega_s * p.omega0 / p.delta
    return DerivedParams(
        lam=lam,
        lam_tilde=lam_tilde,
        delta_tilde=p.delta - 2.0 * lam - lam_tilde,
        omega_tilde_l=p.omega_a * np.exp(1j * p.phi_l) - two_photon,
        omega_tilde_r=p.omega_a * np.exp(1j * p.phi_r) - two_photon,
        delta0=p.omega_s**2 / p.eta if p.eta > 0 else None,
        small_delta=lam - lam_tilde,
    )


def delta0(eta: float, omega_s: float) -> float:
    """Detuning ``Omega_S^2 / eta`` at which direct and induced tunneling cancel."""
    if eta <= 0:
        raise EliminationUndefinedError("Delta0 = Omega_S^2/eta is undefined for eta = 0")
    return omega_s**2 / eta


def matching_params(eta: float, omega_s: float, omega0: float, **extra) -> ModelParams:
    """Parameters for which ``|L>`` decouples from both ``|R>`` and ``|A>``."""
    if not eta > 0:
        raise InvalidArgumentError("matching conditions need eta > 0")
    delta = omega_s**2 / eta
    return ModelParams(
        eta=eta,
        omega0=omega0,
        omega_s=omega_s,
        omega_a=omega_s * omega0 / delta,
        phi=0.0,
        delta=delta,
        **extra,
    )


def _herm(upper: np.ndarray) -> np.ndarray:
    """Complete a matrix given its diagonal and strict upper triangle."""
    return np.triu(upper) + dag(np.triu(upper, 1))


def hamiltonian_interaction(p: ModelParams) -> np.ndarray:
    h = np.zeros((4, 4), dtype=complex)
    h[S, S] = p.delta
    h[L, R] = p.eta
    h[S, A] = p.omega0
    h[L, S] = h[R, S] = p.omega_s
    h[L, A] = p.omega_a * np.exp(1j * p.phi_l)
    h[R, A] = p.omega_a * np.exp(1j * p.phi_r)
    return _herm(h)


def h0_unperturbed(p: ModelParams) -> np.ndarray:
    return p.delta * outer(S, S, 4)


def h1_first_order(p: ModelParams) -> np.ndarray:
    x = p.omega_s * (outer(L, S, 4) + outer(R, S, 4)) + p.omega0 * outer(S, A, 4)
    return x + dag(x)


def h2_second_order(p: ModelParams) -> np.ndarray:
    x = (
        p.omega_a * np.exp(1j * p.phi_l) * outer(L, A, 4)
        + p.omega_a * np.exp(1j * p.phi_r) * outer(R, A, 4)
        + p.eta * outer(L, R, 4)
    )
    return x + dag(x)


def frohlich_generator(p: ModelParams) -> np.ndarray:
    """Anti-Hermitian generator solving ``[H0, S] + H1 = 0``."""
    _require_delta(p)
    x = p.omega_s * (outer(L, S, 4) + outer(R, S, 4)) + p.omega0 * outer(A, S, 4)
    return (x - dag(x)) / p.delta


def hamiltonian_effective(p: ModelParams) -> np.ndarray:
    d = derive(p)
    h = np.zeros((4, 4), dtype=complex)
    h[S, S] = d.delta_tilde
    h[A, A] = d.lam_tilde
    h[L, L] = h[R, R] = d.lam
    h[L, A] = d.omega_tilde_l
    h[R, A] = d.omega_tilde_r
    h[L, R] = p.eta + d.lam
    return _herm(h)


def hamiltonian_reduced(p: ModelParams) -> np.ndarray:
    keep = [L, R, A]
    return hamiltonian_effective(p)[np.ix_(keep, keep)]


def hamiltonian_lab(p: ModelParams, t: float) -> np.ndarray:
    """Time-dependent Hamiltonian before the rotating-frame transformation."""
    w0, w1, w2 = p.field_frequencies()
    h = np.zeros((4, 4), dtype=complex)
    h[S, S] = p.lab_ws
    h[A, A] = p.lab_wa
    h[L, R] = p.eta
    h[S, A] = p.omega0 * np.exp(1j * w0 * t)
    h[L, S] = h[R, S] = p.omega_s * np.exp(1j * w1 * t)
    h[L, A] = p.omega_a * np.exp(1j * (p.phi_l + w2 * t))
    h[R, A] = p.omega_a * np.exp(1j * (p.phi_r + w2 * t))
    return _herm(h)


def lab_components(p: ModelParams):
    """Split the lab Hamiltonian as ``H0 + sum_k (C_k e^{i w_k t} + h.c.)``.

    Returns ``(static, [(C_k, w_k), ...])``; used by the lab-frame integrator
    so each right-hand side evaluation is three scalar phases.
    """
    w0, w1, w2 = p.field_frequencies()
    static = np.zeros((4, 4), dtype=complex)
    static[S, S] = p.lab_ws
    static[A, A] = p.lab_wa
    static[L, R] = static[R, L] = p.eta
    c0 = p.omega0 * outer(S, A, 4)
    c1 = p.omega_s * (outer(L, S, 4) + outer(R, S, 4))
    c2 = p.omega_a * (np.exp(1j * p.phi_l) * outer(L, A, 4) + np.exp(1j * p.phi_r) * outer(R, A, 4))
    return static, [(c0, w0), (c1, w1), (c2, w2)]
