"""Collapse operators for spontaneous decay and pure dephasing.

Every term written as ``(gamma/2) * Lcal_o`` with
``Lcal_o rho = 2 o rho o^dag - o^dag o rho - rho o^dag o`` becomes the single
standard collapse operator ``sqrt(gamma) * o``. This is the only place the
factor-of-two convention is converted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import outer
from .errors import InvalidArgumentError
from .model import A, L, R, RA, RL, RR, S

DECAY_CHANNELS = (
    # (rate field, final state, initial state)
    ("gamma_s", L, S),
    ("gamma_s", R, S),
    ("gamma_sa", S, A),
    ("gamma_a", L, A),
    ("gamma_a", R, A),
)
DEPHASING_PAIRS = ((S, L), (S, R), (A, L), (A, R), (A, S), (R, L))


@dataclass(frozen=True)
class DecayRates:
    gamma_s: float = 0.0
    gamma_a: float = 0.0
    gamma_sa: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        for name in ("gamma_s", "gamma_a", "gamma_sa", "gamma_phi"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be a finite rate >= 0, got {value!r}")


def sigma(p: int, q: int, dim: int = 4) -> np.ndarray:
    return outer(p, q, dim)


def sigma_z(p: int, q: int, dim: int = 4) -> np.ndarray:
    return outer(p, p, dim) - outer(q, q, dim)


def collapse_operators(rates: DecayRates, dim: int = 4) -> list:
    """Collapse operators for the full (dim 4) or reduced (dim 3) model.

    Channels with zero rate are dropped. The reduced set keeps only the
    operators that do not touch ``|S>``, re-indexed onto ``(L, R, A)``.
    """
    if not isinstance(rates, DecayRates):
        raise InvalidArgumentError("rates must be a DecayRates instance")
    if dim == 4:
        index = {L: L, R: R, S: S, A: A}
    elif dim == 3:
        index = {L: RL, R: RR, A: RA}
    else:
        raise InvalidArgumentError(f"unsupported dimension {dim}; expected 3 or 4")

    ops = []
    for field, p, q in DECAY_CHANNELS:
        gamma = getattr(rates, field)
        if gamma > 0 and p in index and q in index:
            ops.append(math.sqrt(gamma) * sigma(index[p], index[q], dim))
    if rates.gamma_phi > 0:
        for p, q in DEPHASING_PAIRS:
            if p in index and q in index:
                ops.append(math.sqrt(rates.gamma_phi) * sigma_z(index[p], index[q], dim))
    return ops
