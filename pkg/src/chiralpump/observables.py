"""Populations and enantiomeric excess of four- or three-level states."""

import numpy as np

from .errors import UndefinedObservableError
from .model import A, L, R, RA, RL, RR, S


def populations(rho) -> np.ndarray:
    """Return ``(P_L, P_R, P_S, P_A)``; ``P_S`` is 0 for the reduced model."""
    d = np.real(np.diagonal(rho))
    if d.size == 4:
        return np.array([d[L], d[R], d[S], d[A]])
    if d.size == 3:
        return np.array([d[RL], d[RR], 0.0, d[RA]])
    raise ValueError(f"expected a 3- or 4-level state, got dimension {d.size}")


def enantiomeric_excess(rho) -> float:
    """``(P_L - P_R) / (P_L + P_R)`` of the chiral ground-state manifold."""
    p = populations(rho)
    total = p[0] + p[1]
    if total <= 0:
        raise UndefinedObservableError("enantiomeric excess undefined: P_L + P_R = 0")
    return float((p[0] - p[1]) / total)


def excess_from_populations(p: np.ndarray) -> np.ndarray:
    """Vectorised excess over rows of ``(P_L, P_R, ...)``; NaN where undefined."""
    p = np.atleast_2d(p)
    total = p[:, 0] + p[:, 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        eps = np.where(total > 0, (p[:, 0] - p[:, 1]) / total, np.nan)
    return eps
